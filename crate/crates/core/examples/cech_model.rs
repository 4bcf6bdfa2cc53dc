// SPDX-License-Identifier: MIT OR Apache-2.0
//! The Čech model of the standard brane on two charts and the map `H²(C) → H²(B)`.

use gcdeform::brane::{brane_frame, NerveCover};
use gcdeform::deform::two_chart_brane;
use gcdeform::dgla::{build_v, h2_total, phi_matrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (gc, brane) = two_chart_brane();
    let deg = 2;
    let model = build_v(&brane, &gc, &NerveCover::two_chart(), deg)?;
    println!("{}", serde_json::to_string_pretty(&model.to_json())?);
    let frame = brane_frame(&brane, &gc)?;
    let coh2 = frame.cohomology(2, deg)?;
    let (h2c, _) = h2_total(&model)?;
    let (_, rank) = phi_matrix(&model, &frame, &coh2)?;
    println!("dim H²(C) = {h2c}, dim H²(B) = {}, rank Φ = {rank}", coh2.dim());
    Ok(())
}
