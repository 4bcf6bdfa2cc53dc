// SPDX-License-Identifier: MIT OR Apache-2.0
//! Descent data on nerve covers: restriction, a broken cocycle, and reassembly.

use std::collections::BTreeMap;
use std::sync::Arc;

use gcdeform::artin::{AElem, ArtinAlgebra};
use gcdeform::brane::NerveCover;
use gcdeform::deform::{induced_first_order, two_chart_brane, DescentData, Equivalence};
use gcdeform::ring::{q, QPoly};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (gc, brane) = two_chart_brane();
    let alg = Arc::new(ArtinAlgebra::truncated("e", 2)?);
    let amb = brane.sub().ambient().clone();
    let f = (&QPoly::var(&amb, 0) * &QPoly::var(&amb, 2)).complexify();
    let global = induced_first_order(&brane, &alg, &gc.gen_hamiltonian(&f))?;

    let restricted = DescentData::restriction(&global, &NerveCover::triangle());
    println!("restriction to a triangle: {} violations", restricted.validate().len());

    let mut aut = Equivalence::identity(&alg, 2);
    aut.g = vec![AElem::basis_elem(&alg, 1, QPoly::constant(brane.sub().zvars(), q(1))); 2];
    let mut morph = BTreeMap::new();
    morph.insert((0, 1), Equivalence::identity(&alg, 2));
    morph.insert((1, 2), Equivalence::identity(&alg, 2));
    morph.insert((0, 2), aut);
    let broken = DescentData::new(NerveCover::triangle(), vec![global.clone(); 3], morph)?;
    for v in broken.validate() {
        println!("broken data fails on {:?}: {}", v.simplex, v.reason);
    }

    let (glued, phis) = restricted.reassemble()?;
    println!("reassembled the restriction: {} (with {} chart isomorphisms)", glued == global, phis.len());
    Ok(())
}
