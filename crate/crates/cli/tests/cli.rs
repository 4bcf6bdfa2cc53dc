// SPDX-License-Identifier: MIT OR Apache-2.0
//! End-to-end runs of the `gcdeform` binary on the model files in `tests/models`.
//!
//! Golden outputs live in `tests/golden`; set `GCDEFORM_BLESS=1` to rewrite them.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn dir(sub: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join(sub)
}

fn gcdeform(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcdeform")).args(args).output().expect("binary runs")
}

fn on_model(args: &[&str], model: &str) -> Output {
    let path = dir("models").join(format!("{model}.json"));
    let mut all: Vec<&str> = args.to_vec();
    let p = path.to_str().expect("utf-8 path");
    all.extend(["--input", p]);
    gcdeform(&all)
}

fn with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_gcdeform"))
        .args(args)
        .args(["--input", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().expect("stdin").write_all(input.as_bytes()).expect("write stdin");
    child.wait_with_output().expect("binary exits")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(o)).expect("JSON report")
}

#[test]
fn gc_check_on_the_product_model() {
    let o = on_model(&["gc", "check"], "standard_gc");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), r#"{"almost":true,"integrable":true,"type":1}"#);
}

#[test]
fn lagrangian_line_has_no_first_cohomology() {
    let o = on_model(&["brane", "cohomology", "--k", "1", "--deg", "3"], "lagrangian_line");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), r#"{"dim":0}"#);
}

#[test]
fn aa_c_obstruction_exits_one_with_its_representative() {
    let o = on_model(&["dgla", "obstruct"], "aa_c");
    assert_eq!(o.status.code(), Some(1));
    let r = json(&o);
    assert_eq!(r["lifted"], false);
    assert_eq!(r["representative"], serde_json::json!([{"mono": "e^2", "value": ["1/2"]}]));
    assert_eq!(r["class"], serde_json::json!(["1/2"]));
}

#[test]
fn false_checks_exit_one_with_witnesses() {
    let o = on_model(&["gc", "nijenhuis"], "sheared_gc");
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["residuals"].as_array().map(Vec::len), Some(13));

    let o = on_model(&["brane", "check"], "curved_lagrangian");
    assert_eq!(o.status.code(), Some(1));
    assert!(json(&o)["witness"]["value"]["terms"].as_array().is_some_and(|t| !t.is_empty()));

    let o = on_model(&["deform", "descent"], "descent_broken");
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["violations"][0]["simplex"], serde_json::json!([0, 1, 2]));
}

#[test]
fn schema_violations_report_json_pointers() {
    let bad = r#"{"gc": {"kind": "standard", "data": {"m": 1, "n": 1}}, "f": {"terms": [{"exp": [1, 0], "coef": "x"}]}}"#;
    let o = with_stdin(&["gc", "hamiltonian"], bad);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o)["error"]["pointer"], "/f/terms/0/coef");

    let o = with_stdin(&["brane", "check"], r#"{"gc": {"kind": "standard", "data": {"m": 1, "n": 0}}, "brane": {"z_coords": [7]}}"#);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o)["error"]["pointer"], "/brane");

    let o = with_stdin(&["gc", "check"], "{not json");
    assert_eq!(o.status.code(), Some(2));

    let o = gcdeform(&["gc", "check", "--input", "/nonexistent/model.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn table_output_lists_keys() {
    let o = on_model(&["brane", "check", "--output", "table"], "lagrangian_line");
    assert_eq!(stdout(&o), "compatible      true\nj_preserves_tb  true\n");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = on_model(&["dgla", "build-v"], "two_chart_brane");
    let b = on_model(&["dgla", "build-v"], "two_chart_brane");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn selftest_runs_a_single_criterion() {
    let o = gcdeform(&["selftest", "--criterion", "1", "--output", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!((r["passed"].as_u64(), r["failed"].as_u64()), (Some(1), Some(0)));
    let o = gcdeform(&["selftest", "--criterion", "1"]);
    assert!(stdout(&o).starts_with("[PASS]  1 Courant identities"));
    assert_eq!(gcdeform(&["selftest", "--criterion", "99"]).status.code(), Some(2));
}

#[test]
fn outputs_match_golden_files() {
    let cases: &[(&str, &[&str], &str)] = &[
        ("gc_check_sheared", &["gc", "check"], "sheared_gc"),
        ("gc_hamiltonian", &["gc", "hamiltonian"], "hamiltonian"),
        ("brane_check_line", &["brane", "check"], "lagrangian_line"),
        ("brane_lwl_line", &["brane", "lwl"], "lagrangian_line"),
        ("brane_cohomology_complex", &["brane", "cohomology"], "complex_brane"),
        ("deform_first_order", &["deform", "first-order"], "first_order"),
        ("deform_act", &["deform", "act"], "two_chart_brane"),
        ("deform_compat", &["deform", "compat"], "two_chart_brane"),
        ("deform_descent_broken", &["deform", "descent"], "descent_broken"),
        ("dgla_mc", &["dgla", "mc"], "two_step"),
        ("dgla_obstruct_two_step", &["dgla", "obstruct"], "two_step"),
        ("dgla_gauge", &["dgla", "gauge"], "abelian"),
        ("dgla_tot", &["dgla", "tot"], "cech_two_points"),
        ("dgla_build_v", &["dgla", "build-v"], "two_chart_brane"),
        ("dgla_phi", &["dgla", "phi"], "two_chart_brane"),
    ];
    let bless = std::env::var_os("GCDEFORM_BLESS").is_some();
    for (name, args, model) in cases {
        let o = on_model(args, model);
        let got = format!("exit {}\n{}", o.status.code().unwrap_or(-1), stdout(&o));
        let path = dir("golden").join(format!("{name}.txt"));
        if bless {
            std::fs::write(&path, &got).expect("write golden file");
            continue;
        }
        let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(got, want, "{name} differs from {}", path.display());
    }
}
