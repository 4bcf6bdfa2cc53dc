// SPDX-License-Identifier: MIT OR Apache-2.0
//! Writes the built-in fixtures as model files for the `gcdeform` binary.
//!
//! Usage: `cargo run --example model_files -- <dir>` (default `models`).

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use gcdeform::artin::{AElem, ArtinAlgebra};
use gcdeform::brane::{complex_brane, curved_lagrangian, lagrangian_line, NerveCover};
use gcdeform::cartan::{DiffForm, VectorField};
use gcdeform::courant::{QSection, SymElement};
use gcdeform::deform::{induced_first_order, two_chart_brane, DescentData, Equivalence};
use gcdeform::dgla::{aa_c_fixture, abelian_fixture, gelem_json, two_step_fixture, Complex, GradedMap, SemiCx};
use gcdeform::gcs::{sheared_complex, GCStructure};
use gcdeform::ring::{q, ExactMatrix, QPoly};
use serde_json::{json, Value};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "models".into()));
    std::fs::create_dir_all(&dir)?;
    let eps = |n| Arc::new(ArtinAlgebra::truncated("e", n).expect("truncated polynomial algebra"));
    let standard = json!({"kind": "standard", "data": {"m": 1, "n": 1}});
    let mut files: BTreeMap<&str, Value> = BTreeMap::new();

    files.insert("standard_gc", json!({"description": "X^{1,1} = (R^2, omega) x C", "gc": standard}));
    files.insert("sheared_gc", json!({"description": "non-integrable conjugate of J_0 on R^4", "gc": sheared_complex().to_json()}));

    let gc = GCStructure::standard(1, 1);
    let v = gc.vars().clone();
    let f = &QPoly::var(&v, 0) * &QPoly::var(&v, 2);
    let g = &QPoly::var(&v, 1) + &(&QPoly::var(&v, 3) * &QPoly::var(&v, 3));
    files.insert(
        "hamiltonian",
        json!({"gc": standard, "f": f.to_json(), "g": g.to_json(), "section": gc.gen_hamiltonian(&f.complexify()).to_json()}),
    );

    for (name, (gc, brane)) in [("lagrangian_line", lagrangian_line()), ("curved_lagrangian", curved_lagrangian()), ("complex_brane", complex_brane())] {
        files.insert(name, json!({"gc": gc.to_json(), "brane": brane.to_json()}));
    }
    let (gc, brane) = complex_brane();
    let amb = brane.sub().ambient().clone();
    let zdz = VectorField::coord(&amb, 2).mul_fn(&QPoly::var(&amb, 0)).add(&VectorField::coord(&amb, 3).mul_fn(&QPoly::var(&amb, 1)));
    let x = QSection::from_vf(zdz);
    files.insert(
        "first_order",
        json!({"description": "ℂ×{0} ⊂ ℂ² moved by the holomorphic field z1 ∂z2", "gc": gc.to_json(), "brane": brane.to_json(), "section": x.to_json()}),
    );

    let (gc, brane) = two_chart_brane();
    let alg = eps(2);
    let amb = brane.sub().ambient().clone();
    let h = (&QPoly::var(&amb, 0) * &QPoly::var(&amb, 2)).complexify();
    let global = induced_first_order(&brane, &alg, &gc.gen_hamiltonian(&h))?;
    let u = AElem::basis_elem(&alg, 1, DiffForm::one_form(&amb, &[QPoly::zero(&amb), QPoly::var(&amb, 0), QPoly::zero(&amb), QPoly::zero(&amb)]));
    let xi = AElem::basis_elem(&alg, 1, VectorField::coord(&amb, 0));
    let z = SymElement::new(u, xi)?;
    files.insert(
        "two_chart_brane",
        json!({"gc": gc.to_json(), "brane": brane.to_json(), "deformation": global.to_json(), "element": z.to_json()}),
    );

    let zv = brane.sub().zvars().clone();
    let mut aut = Equivalence::identity(&alg, 2);
    aut.g = vec![AElem::basis_elem(&alg, 1, QPoly::constant(&zv, q(1))); 2];
    let mut morph = BTreeMap::new();
    morph.insert((0, 1), Equivalence::identity(&alg, 2));
    morph.insert((1, 2), Equivalence::identity(&alg, 2));
    morph.insert((0, 2), aut.clone());
    let broken = DescentData::new(NerveCover::triangle(), vec![global.clone(); 3], morph)?;
    let objects: Vec<Value> = broken.objects().iter().map(|o| o.to_json()).collect();
    files.insert(
        "descent_broken",
        json!({
            "description": "restriction to a triangle with a non-identity gluing on [0,2]",
            "gc": gc.to_json(),
            "brane": brane.to_json(),
            "descent": {"cover": NerveCover::triangle().to_json(), "objects": objects, "morphisms": {"0,2": aut.to_json()}},
        }),
    );

    let a_eps = |n, comps: Vec<(usize, Vec<i64>)>| {
        let alg = eps(n);
        let mut x = AElem::zero(&alg);
        for (b, c) in comps {
            x.add_comp(b, c.into_iter().map(q).collect::<Vec<_>>());
        }
        gelem_json(&x)
    };
    files.insert(
        "aa_c",
        json!({
            "description": "[a,a] = c: a·e over R[e]/e^2 does not lift to R[e]/e^3",
            "dgla": aa_c_fixture().to_json(),
            "artin": eps(2).to_json(),
            "lift_to": eps(3).to_json(),
            "x": a_eps(2, vec![(1, vec![1])]),
        }),
    );
    let mut two_step_x = AElem::zero(&eps(3));
    two_step_x.add_comp(1, vec![q(1), q(0)]);
    two_step_x.add_comp(2, vec![q(0), -q(1) / q(2)]);
    files.insert(
        "two_step",
        json!({
            "description": "a·e − ½b·e² is Maurer–Cartan over R[e]/e^3",
            "dgla": two_step_fixture().to_json(),
            "artin": eps(3).to_json(),
            "lift_to": eps(5).to_json(),
            "x": gelem_json(&two_step_x),
        }),
    );
    files.insert(
        "abelian",
        json!({
            "dgla": abelian_fixture().to_json(),
            "artin": eps(2).to_json(),
            "x": a_eps(2, vec![(1, vec![0, 1, 0])]),
            "x2": a_eps(2, vec![(1, vec![1, 1, 0])]),
        }),
    );
    let p0 = ExactMatrix::from_rows(vec![vec![q(0), q(1)]])?;
    let p1 = ExactMatrix::from_rows(vec![vec![q(1), q(0)]])?;
    let cech = SemiCx::new(
        vec![Complex::concentrated(0, 2), Complex::concentrated(0, 1)],
        vec![vec![GradedMap::new(0, [(0, p0)].into()), GradedMap::new(0, [(0, p1)].into())]],
    )?;
    files.insert("cech_two_points", json!({"description": "Čech complex of a two-point cover", "semicosimplicial": cech.to_json()}));

    for (name, model) in &files {
        let path = dir.join(format!("{name}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(model)? + "\n")?;
        println!("{}", path.display());
    }
    Ok(())
}
