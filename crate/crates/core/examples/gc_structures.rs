// SPDX-License-Identifier: MIT OR Apache-2.0
//! Generalized complex structures: type, integrability, B-transforms and Hamiltonian symmetries.

use gcdeform::cartan::DiffForm;
use gcdeform::gcs::{sheared_complex, GCStructure};
use gcdeform::ring::{q, QPoly};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gc = GCStructure::standard(1, 1);
    let v = gc.vars().clone();
    println!("X^(1,1) on {:?}: type {} at 0, integrable {}", *v, gc.type_at(&[q(0), q(0), q(0), q(0)])?, gc.is_integrable());

    let sheared = sheared_complex();
    println!("sheared structure: {} nonzero Nijenhuis values", sheared.nijenhuis_residuals().len());

    let b = DiffForm::function(&(&QPoly::var(&v, 0) * &QPoly::var(&v, 3))).ext_d().wedge(&DiffForm::dx(&v, 2));
    let moved = gc.b_transform(&b)?;
    println!("B-transform by a closed 2-form stays integrable: {}", moved.is_integrable());

    let f = (&QPoly::var(&v, 0) * &QPoly::var(&v, 3)).complexify();
    let g = (&QPoly::var(&v, 1) * &QPoly::var(&v, 2)).complexify();
    let (xf, xg) = (gc.gen_hamiltonian(&f), gc.gen_hamiltonian(&g));
    let h = gc.hamiltonian_bracket_witness(&f, &g);
    println!("[x_f, x_g] = x_h: {}", xf.ghat_bracket(&xg) == gc.gen_hamiltonian(&h));
    println!("x_f is holomorphic: {}", gc.holomorphy(&xf)?.is_holomorphic());
    Ok(())
}
