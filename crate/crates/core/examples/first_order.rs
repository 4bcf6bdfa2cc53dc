// SPDX-License-Identifier: MIT OR Apache-2.0
//! First-order deformations of the complex brane `ℂ×{0} ⊂ ℂ²`: classes in `H¹` and equivalences.

use std::sync::Arc;

use gcdeform::artin::ArtinAlgebra;
use gcdeform::brane::{brane_frame, complex_brane};
use gcdeform::cartan::VectorField;
use gcdeform::courant::QSection;
use gcdeform::deform::{first_order_class, first_order_equivalence, induced_first_order};
use gcdeform::ring::{QPoly, Scalar};
use serde_json::Value;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (gc, brane) = complex_brane();
    let amb = brane.sub().ambient().clone();
    let alg = Arc::new(ArtinAlgebra::truncated("e", 2)?);
    let frame = brane_frame(&brane, &gc)?;
    let coh = frame.cohomology(1, 2)?;
    println!("dim_C H^1 = {} (dim_R {})", coh.dim(), coh.dim_real());

    let zdz = VectorField::coord(&amb, 2).mul_fn(&QPoly::var(&amb, 0)).add(&VectorField::coord(&amb, 3).mul_fn(&QPoly::var(&amb, 1)));
    let x = QSection::from_vf(zdz);
    let bx = induced_first_order(&brane, &alg, &x)?;
    let class = first_order_class(&bx, &frame, &coh)?;
    println!("class of z1 ∂z2: {}", Value::Array(class.iter().map(Scalar::to_json).collect()));

    let f = (&QPoly::var(&amb, 0) * &QPoly::var(&amb, 2)).complexify();
    let x2 = x.add(&gc.gen_hamiltonian(&f));
    let bx2 = induced_first_order(&brane, &alg, &x2)?;
    println!("adding a Hamiltonian keeps the class: {}", first_order_class(&bx2, &frame, &coh)? == class);
    let psi = first_order_equivalence(&brane, &gc, &frame, 2, &alg, &x2, &x)?;
    println!("B^{{x'}} → B^x is an equivalence: {}", psi.check(&bx2, &bx).is_ok());
    Ok(())
}
