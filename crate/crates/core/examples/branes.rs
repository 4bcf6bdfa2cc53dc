// SPDX-License-Identifier: MIT OR Apache-2.0
//! Brane compatibility, the leaf-wise Lagrangian test and brane cohomology.

use gcdeform::brane::{brane_compatible, brane_frame, complex_brane, curved_lagrangian, lagrangian_line, lwl_check, sample_points, standard_brane};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (name, (gc, brane)) in [
        ("Lagrangian line", lagrangian_line()),
        ("curved Lagrangian", curved_lagrangian()),
        ("complex brane", complex_brane()),
        ("R × C ⊂ R² × C", standard_brane(1, 1, 1)),
    ] {
        let c = brane_compatible(&brane, &gc, 2);
        let lwl = lwl_check(&brane, &gc, &sample_points(brane.sub()))?;
        println!("{name}: compatible {}, leaf-wise Lagrangian {lwl}", c.compatible);
        if c.compatible {
            let frame = brane_frame(&brane, &gc)?;
            let dims: Vec<usize> = (0..=frame.rank()).map(|k| frame.cohomology(k, 2).map(|h| h.dim())).collect::<Result<_, _>>()?;
            println!("  dim H^k for k = 0..={} (degree ≤ 2): {dims:?}", frame.rank());
        }
    }
    Ok(())
}
