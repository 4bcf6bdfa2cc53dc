// SPDX-License-Identifier: MIT OR Apache-2.0
//! Local Artin algebras, small extensions and the BCH product on vector fields.

use std::sync::Arc;

use gcdeform::artin::{bch, exp_action, small_extension_chain, AElem, ArtinAlgebra, ArtinHom};
use gcdeform::cartan::{DiffForm, VectorField};
use gcdeform::ring::{vars, QPoly};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = Arc::new(ArtinAlgebra::truncated("e", 4)?);
    let ground = Arc::new(ArtinAlgebra::ground());
    let chain = small_extension_chain(&ArtinHom::by_labels(&a, &ground)?)?;
    println!("R[e]/e⁴ → R factors into {} small extensions", chain.len());

    let v = vars(&["x", "y"]);
    let xi = AElem::basis_elem(&a, 1, VectorField::coord(&v, 0).mul_fn(&QPoly::var(&v, 1)));
    let eta = AElem::basis_elem(&a, 1, VectorField::coord(&v, 1));
    let z = bch(&xi, &eta, |p, q| p.lie_bracket(q))?;
    let f = AElem::unit(&a, DiffForm::function(&(&QPoly::var(&v, 0) * &QPoly::var(&v, 0))));
    let lie = |x: &VectorField<_>, w: &DiffForm<_>| w.lie_derivative(x);
    let lhs = exp_action(&z, &f, lie)?;
    let rhs = exp_action(&xi, &exp_action(&eta, &f, lie)?, lie)?;
    println!("e^bch(ξ,η) f = e^ξ e^η f: {}", lhs == rhs);
    Ok(())
}
