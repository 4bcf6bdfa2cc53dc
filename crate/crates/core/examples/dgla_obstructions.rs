// SPDX-License-Identifier: MIT OR Apache-2.0
//! Maurer–Cartan elements, gauge equivalence and obstructions along small extensions.

use std::sync::Arc;

use gcdeform::artin::{small_extension_chain, AElem, ArtinAlgebra, ArtinHom};
use gcdeform::dgla::{aa_c_fixture, abelian_fixture, gauge_equivalence, gelem_json, mc_check, obstruction_lift, GElem, LiftOutcome};
use gcdeform::ring::q;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let eps = |n| ArtinAlgebra::truncated("e", n).map(Arc::new);
    let (e2, e3) = (eps(2)?, eps(3)?);

    let g = aa_c_fixture();
    let mut x: GElem = AElem::zero(&e2);
    x.add_comp(1, vec![q(1)]);
    println!("a·e is Maurer–Cartan over R[e]/e²: {}", mc_check(&g, &x)?.is_mc);
    let chain = small_extension_chain(&ArtinHom::by_labels(&e3, &e2)?)?;
    match obstruction_lift(&g, &chain[0], &x)? {
        LiftOutcome::Lifted(_) => println!("lifted to R[e]/e³"),
        LiftOutcome::Obstructed { class, .. } => println!("obstructed; class in H² = {:?}", class.iter().map(|c| c.to_string()).collect::<Vec<_>>()),
    }

    let ab = abelian_fixture();
    let (mut x1, mut x2): (GElem, GElem) = (AElem::zero(&e2), AElem::zero(&e2));
    x1.add_comp(1, vec![q(0), q(1), q(0)]);
    x2.add_comp(1, vec![q(1), q(1), q(0)]);
    match gauge_equivalence(&ab, &x1, &x2)? {
        Some(y) => println!("gauge equivalent via y = {}", gelem_json(&y)),
        None => println!("not gauge equivalent"),
    }
    Ok(())
}
