// SPDX-License-Identifier: MIT OR Apache-2.0
//! Model files and the commands of the `gcdeform` binary.
//!
//! A model file is one JSON object with optional sections (`gc`, `brane`, `artin`, `deformation`,
//! `dgla`, ...). Each command reads the sections it needs and returns a JSON report plus a verdict.
//! Structural errors are located by JSON pointer before any section is interpreted.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::artin::{small_extension_chain, Artin, ArtinAlgebra, ArtinError, ArtinHom};
use crate::brane::{
    brane_compatible, brane_frame, j_preserves_tb, lwl_check, parse_edge_key, sample_points, Brane, BraneError, NerveCover,
};
use crate::checks;
use crate::courant::{CourantError, QSection, SymElement};
use crate::deform::{
    first_order_class, first_order_section, induced_first_order, is_compatible_deformation, BraneDeformation, DeformError,
    DescentData, Equivalence,
};
use crate::dgla::{
    build_v, gauge_act, gauge_equivalence, gelem_from_json, gelem_json, h2_total, mc_check, obstruction_lift, phi_matrix, tot,
    DglaError, Fdgla, GElem, LiftOutcome, SemiCx,
};
use crate::gcs::{GCStructure, GcsError};
use crate::ring::{parse_rational, q, CPoly, Poly, RingError, Scalar, Vars};

#[derive(Debug, Error)]
pub enum CliError {
    /// The input does not match the model schema at `pointer`.
    #[error("{pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("no acceptance criterion {0}")]
    Criterion(usize),
    #[error(transparent)]
    Dgla(#[from] DglaError),
    #[error(transparent)]
    Deform(#[from] DeformError),
    #[error(transparent)]
    Brane(#[from] BraneError),
    #[error(transparent)]
    Gcs(#[from] GcsError),
    #[error(transparent)]
    Courant(#[from] CourantError),
    #[error(transparent)]
    Artin(#[from] ArtinError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

impl CliError {
    fn schema(pointer: impl Into<String>, message: impl ToString) -> Self {
        CliError::Schema { pointer: pointer.into(), message: message.to_string() }
    }

    /// `{"error": {"pointer": .., "message": ..}}`; the pointer is omitted for non-schema errors.
    pub fn to_json(&self) -> Value {
        match self {
            CliError::Schema { pointer, message } => json!({"error": {"pointer": pointer, "message": message}}),
            other => json!({"error": {"message": other.to_string()}}),
        }
    }
}

/// Expected JSON shapes, checked before parsing so errors carry a pointer to the offending value.
#[derive(Clone, Copy, Debug)]
enum Shape {
    Any,
    Str,
    UInt,
    Int,
    /// `"p/q"` text or an integer.
    Rational,
    /// A rational or `{"re": .., "im": ..}`.
    Scalar,
    Enum(&'static [&'static str]),
    List(&'static Shape),
    /// An object with arbitrary keys.
    Map(&'static Shape),
    Object(&'static [Field]),
}

#[derive(Clone, Copy, Debug)]
struct Field {
    key: &'static str,
    required: bool,
    shape: Shape,
}

const fn req(key: &'static str, shape: Shape) -> Field {
    Field { key, required: true, shape }
}

const fn opt(key: &'static str, shape: Shape) -> Field {
    Field { key, required: false, shape }
}

const TERM: Shape = Shape::Object(&[req("exp", Shape::List(&Shape::UInt)), req("coef", Shape::Scalar)]);
const POLY: Shape = Shape::Object(&[opt("vars", Shape::List(&Shape::Str)), req("terms", Shape::List(&TERM))]);
const POLYS: Shape = Shape::List(&POLY);
const FORM_TERM: Shape = Shape::Object(&[req("idx", Shape::List(&Shape::UInt)), req("coef", POLY)]);
const FORM: Shape = Shape::Object(&[req("deg", Shape::UInt), req("terms", Shape::List(&FORM_TERM))]);
const SECTION: Shape = Shape::Object(&[req("vf", POLYS), req("form", POLYS)]);
const COMP_POLY: Shape = Shape::Object(&[req("mono", Shape::Str), req("value", POLY)]);
const COMP_FORM: Shape = Shape::Object(&[req("mono", Shape::Str), req("value", FORM)]);
const COMP_POLYS: Shape = Shape::Object(&[req("mono", Shape::Str), req("value", POLYS)]);
const COMP_RATS: Shape = Shape::Object(&[req("mono", Shape::Str), req("value", Shape::List(&Shape::Rational))]);
const A_POLY: Shape = Shape::List(&COMP_POLY);
const A_FORM: Shape = Shape::List(&COMP_FORM);
const A_POLYS: Shape = Shape::List(&COMP_POLYS);
const GELEM: Shape = Shape::List(&COMP_RATS);
const ARTIN: Shape = Shape::Object(&[req("gens", Shape::List(&Shape::Str)), req("relations", Shape::List(&Shape::List(&Shape::UInt)))]);
const COVER: Shape = Shape::Object(&[req("verts", Shape::UInt), opt("simplices", Shape::List(&Shape::List(&Shape::UInt)))]);
const BRANE: Shape = Shape::Object(&[
    req("z_coords", Shape::List(&Shape::UInt)),
    opt("cover", COVER),
    opt("c", Shape::Map(&POLY)),
    opt("a", Shape::Map(&FORM)),
]);
const GC: Shape = Shape::Object(&[
    req("kind", Shape::Enum(&["symplectic", "complex", "product", "standard", "matrix"])),
    req("data", Shape::Any),
]);
const RHO: Shape = Shape::Object(&[opt("x", Shape::List(&A_POLY)), opt("y", Shape::List(&A_POLY))]);
const BUNDLE: Shape = Shape::Object(&[opt("f", Shape::Map(&A_POLY)), opt("u", Shape::Map(&A_FORM))]);
const DEFORMATION: Shape = Shape::Object(&[req("artin", ARTIN), opt("rho", RHO), opt("bundle", BUNDLE)]);
const SYM: Shape = Shape::Object(&[opt("u", A_POLYS), opt("xi", A_POLYS)]);
const EQUIV: Shape = Shape::Object(&[opt("tau", A_POLYS), opt("g", Shape::List(&A_POLY)), opt("z", SYM)]);
const DESCENT: Shape =
    Shape::Object(&[req("cover", COVER), req("objects", Shape::List(&DEFORMATION)), opt("morphisms", Shape::Map(&EQUIV))]);
const MATRIX: Shape = Shape::List(&Shape::List(&Shape::Rational));
const COMPLEX: Shape = Shape::Object(&[req("dims", Shape::Map(&Shape::UInt)), opt("d", Shape::Map(&MATRIX))]);
const BRACKET_ENTRY: Shape = Shape::Object(&[
    req("x", Shape::List(&Shape::Int)),
    req("y", Shape::List(&Shape::Int)),
    req("value", Shape::List(&Shape::Rational)),
]);
const DGLA: Shape = Shape::Object(&[
    req("dims", Shape::Map(&Shape::UInt)),
    opt("d", Shape::Map(&MATRIX)),
    opt("bracket", Shape::List(&BRACKET_ENTRY)),
]);
const GRADED_MAP: Shape = Shape::Object(&[opt("shift", Shape::Int), opt("blocks", Shape::Map(&MATRIX))]);
const SEMI: Shape = Shape::Object(&[req("levels", Shape::List(&COMPLEX)), req("cofaces", Shape::List(&Shape::List(&GRADED_MAP)))]);
const MODEL: Shape = Shape::Object(&[
    opt("description", Shape::Str),
    opt("ambient", Shape::Object(&[req("vars", Shape::List(&Shape::Str))])),
    opt("gc", GC),
    opt("brane", BRANE),
    opt("cover", COVER),
    opt("section", SECTION),
    opt("f", POLY),
    opt("g", POLY),
    opt("artin", ARTIN),
    opt("lift_to", ARTIN),
    opt("deformation", DEFORMATION),
    opt("element", SYM),
    opt("descent", DESCENT),
    opt("dgla", DGLA),
    opt("x", GELEM),
    opt("y", GELEM),
    opt("x2", GELEM),
    opt("semicosimplicial", SEMI),
]);

/// Appends one reference token to a JSON pointer.
fn child(ptr: &str, token: &str) -> String {
    format!("{ptr}/{}", token.replace('~', "~0").replace('/', "~1"))
}

fn validate(v: &Value, shape: Shape, ptr: &str) -> Result<(), CliError> {
    let fail = |m: &str| Err(CliError::schema(if ptr.is_empty() { "/" } else { ptr }, m));
    match shape {
        Shape::Any => Ok(()),
        Shape::Str => if v.is_string() { Ok(()) } else { fail("expected a string") },
        Shape::UInt => if v.is_u64() { Ok(()) } else { fail("expected a non-negative integer") },
        Shape::Int => if v.is_i64() { Ok(()) } else { fail("expected an integer") },
        Shape::Rational => match v {
            Value::String(s) => parse_rational(s).map(|_| ()).or_else(|_| fail(&format!("`{s}` is not a rational p/q"))),
            Value::Number(n) if n.is_i64() => Ok(()),
            _ => fail("expected a rational as \"p/q\" text or an integer"),
        },
        Shape::Scalar => match v {
            Value::Object(m) => {
                for (k, x) in m {
                    if k != "re" && k != "im" {
                        return Err(CliError::schema(child(ptr, k), "unexpected key; Gaussian rationals have `re` and `im`"));
                    }
                    validate(x, Shape::Rational, &child(ptr, k))?;
                }
                Ok(())
            }
            _ => validate(v, Shape::Rational, ptr),
        },
        Shape::Enum(options) => match v.as_str() {
            Some(s) if options.contains(&s) => Ok(()),
            _ => fail(&format!("expected one of {}", options.join(", "))),
        },
        Shape::List(item) => {
            let arr = match v.as_array() {
                Some(a) => a,
                None => return fail("expected a list"),
            };
            arr.iter().enumerate().try_for_each(|(i, x)| validate(x, *item, &child(ptr, &i.to_string())))
        }
        Shape::Map(item) => {
            let obj = match v.as_object() {
                Some(o) => o,
                None => return fail("expected an object"),
            };
            obj.iter().try_for_each(|(k, x)| validate(x, *item, &child(ptr, k)))
        }
        Shape::Object(fields) => {
            let obj = match v.as_object() {
                Some(o) => o,
                None => return fail("expected an object"),
            };
            for k in obj.keys() {
                if !fields.iter().any(|f| f.key == k) {
                    return Err(CliError::schema(child(ptr, k), "unknown key"));
                }
            }
            for f in fields {
                match obj.get(f.key) {
                    Some(x) => validate(x, f.shape, &child(ptr, f.key))?,
                    None if f.required => return Err(CliError::schema(child(ptr, f.key), "missing required key")),
                    None => {}
                }
            }
            Ok(())
        }
    }
}

/// A schema-checked model file.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    root: Value,
}

impl Model {
    pub fn from_json(root: Value) -> Result<Self, CliError> {
        validate(&root, MODEL, "")?;
        Ok(Model { root })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let root: Value = serde_json::from_str(text).map_err(|e| CliError::schema("/", format!("invalid JSON: {e}")))?;
        Self::from_json(root)
    }

    pub fn as_json(&self) -> &Value {
        &self.root
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.root.get(key)
    }

    fn require(&self, key: &str) -> Result<&Value, CliError> {
        self.get(key).ok_or_else(|| CliError::schema(child("", key), "missing required section"))
    }

    pub fn gc(&self) -> Result<GCStructure, CliError> {
        GCStructure::from_json(self.require("gc")?).map_err(|e| CliError::schema("/gc", e))
    }

    /// Ambient coordinates: the labels of `gc`, which must agree with `ambient.vars` when both are given.
    pub fn vars(&self) -> Result<Vars, CliError> {
        let declared: Option<Vec<String>> = self.get("ambient").map(|a| {
            a["vars"].as_array().into_iter().flatten().filter_map(|s| s.as_str().map(str::to_string)).collect()
        });
        match (self.get("gc"), declared) {
            (Some(_), declared) => {
                let vars = self.gc()?.vars().clone();
                match declared {
                    Some(d) if d != *vars => {
                        Err(CliError::schema("/ambient/vars", format!("does not match the structure's coordinates {:?}", *vars)))
                    }
                    _ => Ok(vars),
                }
            }
            (None, Some(d)) => Ok(Arc::new(d)),
            (None, None) => Err(CliError::schema("/ambient", "needs `ambient` or `gc` to fix the coordinates")),
        }
    }

    pub fn brane(&self) -> Result<Brane, CliError> {
        let vars = self.vars()?;
        Brane::from_json(self.require("brane")?, &vars).map_err(|e| CliError::schema("/brane", e))
    }

    /// The cover given by `cover`, else the brane's own cover.
    pub fn cover(&self, brane: &Brane) -> Result<NerveCover, CliError> {
        match self.get("cover") {
            Some(c) => NerveCover::from_json(c).map_err(|e| CliError::schema("/cover", e)),
            None => Ok(brane.herm().cover().clone()),
        }
    }

    fn algebra(&self, key: &str) -> Result<Artin, CliError> {
        let a = ArtinAlgebra::from_json(self.require(key)?).map_err(|e| CliError::schema(child("", key), e))?;
        Ok(Arc::new(a))
    }

    pub fn artin(&self) -> Result<Artin, CliError> {
        self.algebra("artin")
    }

    pub fn deformation(&self, brane: &Brane) -> Result<BraneDeformation, CliError> {
        BraneDeformation::from_json(self.require("deformation")?, brane).map_err(|e| CliError::schema("/deformation", e))
    }

    pub fn dgla(&self) -> Result<Fdgla, CliError> {
        Fdgla::from_json(self.require("dgla")?).map_err(|e| CliError::schema("/dgla", e))
    }

    fn section(&self, vars: &Vars) -> Result<QSection, CliError> {
        QSection::from_json(self.require("section")?, vars).map_err(|e| CliError::schema("/section", e))
    }

    fn cpoly(&self, key: &str, vars: &Vars) -> Result<CPoly, CliError> {
        Poly::from_json_in(self.require(key)?, vars).map_err(|e| CliError::schema(child("", key), e))
    }

    fn gelem(&self, key: &str, g: &Fdgla, k: i32, alg: &Artin) -> Result<GElem, CliError> {
        gelem_from_json(self.require(key)?, alg, g.dim(k)).map_err(|e| CliError::schema(child("", key), e))
    }
}

/// Subcommands that read a model file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    GcCheck,
    GcNijenhuis,
    GcHamiltonian,
    BraneCheck,
    BraneLwl,
    BraneCohomology,
    DeformFirstOrder,
    DeformAct,
    DeformCompat,
    DeformDescent,
    DglaMc,
    DglaGauge,
    DglaTot,
    DglaBuildV,
    DglaPhi,
    DglaObstruct,
}

/// Numeric flags shared by the subcommands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Options {
    /// Polynomial degree bound.
    pub deg: u32,
    /// Cohomological degree.
    pub k: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options { deg: 2, k: 1 }
    }
}

/// A report and its verdict; `passed == false` means a check came out false.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub report: Value,
    /// Preformatted table output, used instead of the generic key/value layout.
    pub table: Option<String>,
}

impl Outcome {
    fn new(passed: bool, report: Value) -> Self {
        Outcome { passed, report, table: None }
    }

    /// 0 when the check passed, 1 when it came out false.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    /// Canonical JSON text; object keys are sorted.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.report).expect("JSON values serialize")
    }

    pub fn to_table(&self) -> String {
        self.table.clone().unwrap_or_else(|| table(&self.report))
    }
}

/// Two-column `key  value` layout of a JSON object; nested values are written as compact JSON.
pub fn table(v: &Value) -> String {
    let cell = |x: &Value| match x {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    match v.as_object() {
        Some(obj) => {
            let width = obj.keys().map(|k| k.chars().count()).max().unwrap_or(0);
            obj.iter().map(|(k, x)| format!("{k:<width$}  {}\n", cell(x))).collect()
        }
        None => format!("{}\n", cell(v)),
    }
}

pub fn run(cmd: Command, model: &Model, opts: Options) -> Result<Outcome, CliError> {
    match cmd {
        Command::GcCheck => gc_check(model),
        Command::GcNijenhuis => gc_nijenhuis(model),
        Command::GcHamiltonian => gc_hamiltonian(model),
        Command::BraneCheck => brane_check(model, opts),
        Command::BraneLwl => brane_lwl(model),
        Command::BraneCohomology => brane_cohomology(model, opts),
        Command::DeformFirstOrder => deform_first_order(model, opts),
        Command::DeformAct => deform_act(model),
        Command::DeformCompat => deform_compat(model),
        Command::DeformDescent => deform_descent(model),
        Command::DglaMc => dgla_mc(model),
        Command::DglaGauge => dgla_gauge(model),
        Command::DglaTot => dgla_tot(model),
        Command::DglaBuildV => dgla_build_v(model, opts),
        Command::DglaPhi => dgla_phi(model, opts),
        Command::DglaObstruct => dgla_obstruct(model),
    }
}

/// Runs the acceptance criteria, or only `only`, and reports a pass/fail matrix.
pub fn selftest(seed: u64, only: Option<usize>) -> Result<Outcome, CliError> {
    let reports = match only {
        None => checks::run_all(seed),
        Some(id) if (1..=checks::TITLES.len()).contains(&id) => vec![checks::run(id as u8, seed)],
        Some(id) => return Err(CliError::Criterion(id)),
    };
    let passed = reports.iter().filter(|r| r.passed).count();
    let failed = reports.len() - passed;
    let mut lines: String = reports.iter().map(|r| r.line() + "\n").collect();
    lines.push_str(&format!("{passed} passed, {failed} failed\n"));
    let report = json!({
        "seed": seed,
        "criteria": reports.iter().map(checks::CriterionReport::to_json).collect::<Vec<_>>(),
        "passed": passed,
        "failed": failed,
    });
    Ok(Outcome { passed: failed == 0, report, table: Some(lines) })
}

fn origin(vars: &Vars) -> Vec<crate::ring::Rational> {
    vec![q(0); vars.len()]
}

fn gc_check(model: &Model) -> Result<Outcome, CliError> {
    let gc = match model.gc() {
        Ok(gc) => gc,
        Err(CliError::Schema { message, .. })
            if message == GcsError::NotAlmostComplex.to_string() || message == GcsError::NotOrthogonal.to_string() =>
        {
            return Ok(Outcome::new(false, json!({"almost": false, "integrable": false, "witness": message})));
        }
        Err(e) => return Err(e),
    };
    let ty = gc.type_at(&origin(gc.vars()))?;
    let residuals = gc.nijenhuis_residuals();
    let mut report = json!({"almost": true, "integrable": residuals.is_empty(), "type": ty});
    if let Some((i, j, r)) = residuals.first() {
        report["witness"] = json!({"pair": [i, j], "value": r.to_json()});
    }
    Ok(Outcome::new(residuals.is_empty(), report))
}

fn gc_nijenhuis(model: &Model) -> Result<Outcome, CliError> {
    let gc = model.gc()?;
    let residuals = gc.nijenhuis_residuals();
    let list: Vec<Value> = residuals.iter().map(|(i, j, r)| json!({"pair": [i, j], "value": r.to_json()})).collect();
    Ok(Outcome::new(residuals.is_empty(), json!({"integrable": residuals.is_empty(), "residuals": list})))
}

/// `x_f`, and with `g` the closure `[x_f, x_g] = x_h`; with `section`, its holomorphy.
fn gc_hamiltonian(model: &Model) -> Result<Outcome, CliError> {
    let gc = model.gc()?;
    let vars = gc.vars().clone();
    let f = model.cpoly("f", &vars)?;
    let xf = gc.gen_hamiltonian(&f);
    let mut report = json!({"x_f": xf.to_json()});
    let mut passed = true;
    if model.get("g").is_some() {
        let g = model.cpoly("g", &vars)?;
        let bracket = xf.ghat_bracket(&gc.gen_hamiltonian(&g));
        let h = gc.hamiltonian_bracket_witness(&f, &g);
        let closes = bracket == gc.gen_hamiltonian(&h);
        passed &= closes;
        report["bracket"] = bracket.to_json();
        report["h"] = h.to_json();
        report["closes"] = json!(closes);
    }
    if model.get("section").is_some() {
        let w = gc.holomorphy(&model.section(&vars)?)?;
        passed &= w.is_holomorphic();
        report["holomorphic"] = json!(w.is_holomorphic());
        report["consistent"] = json!(w.consistent());
    }
    Ok(Outcome::new(passed, report))
}

fn brane_check(model: &Model, opts: Options) -> Result<Outcome, CliError> {
    let (gc, brane) = (model.gc()?, model.brane()?);
    let c = brane_compatible(&brane, &gc, opts.deg);
    let mut report = json!({"compatible": c.compatible, "j_preserves_tb": j_preserves_tb(&brane, &gc)});
    if let Some((a, b, v)) = &c.witness {
        report["witness"] = json!({"generators": [a, b], "value": v.to_json()});
    }
    Ok(Outcome::new(c.compatible, report))
}

fn brane_lwl(model: &Model) -> Result<Outcome, CliError> {
    let (gc, brane) = (model.gc()?, model.brane()?);
    match lwl_check(&brane, &gc, &sample_points(brane.sub())) {
        Ok(ok) => Ok(Outcome::new(ok, json!({"lwl": ok}))),
        Err(BraneError::Irregular(point)) => Ok(Outcome::new(false, json!({"lwl": false, "irregular_at": point}))),
        Err(e) => Err(e.into()),
    }
}

fn brane_cohomology(model: &Model, opts: Options) -> Result<Outcome, CliError> {
    let (gc, brane) = (model.gc()?, model.brane()?);
    let coh = brane_frame(&brane, &gc)?.cohomology(opts.k, opts.deg)?;
    Ok(Outcome::new(true, json!({"dim": coh.dim()})))
}

/// The first-order section and class of `deformation`, or of the deformation induced by `section`.
fn deform_first_order(model: &Model, opts: Options) -> Result<Outcome, CliError> {
    let (gc, brane) = (model.gc()?, model.brane()?);
    let bd = match model.get("deformation") {
        Some(_) => model.deformation(&brane)?,
        None => {
            let alg = match model.get("artin") {
                Some(_) => model.artin()?,
                None => Arc::new(ArtinAlgebra::truncated("eps", 2)?),
            };
            induced_first_order(&brane, &alg, &model.section(brane.sub().ambient())?)?
        }
    };
    let frame = brane_frame(&brane, &gc)?;
    let coh = frame.cohomology(1, opts.deg)?;
    let class = first_order_class(&bd, &frame, &coh)?;
    let trivial = class.iter().all(num_traits::Zero::is_zero);
    Ok(Outcome::new(
        true,
        json!({
            "section": first_order_section(&bd)?.to_json(),
            "class": class.iter().map(Scalar::to_json).collect::<Vec<_>>(),
            "h1_dim": coh.dim(),
            "trivial": trivial,
            "compatible": is_compatible_deformation(&bd, &gc)?,
        }),
    ))
}

fn deform_act(model: &Model) -> Result<Outcome, CliError> {
    let brane = model.brane()?;
    let bd = model.deformation(&brane)?;
    let z = SymElement::from_json(model.require("element")?, bd.alg(), brane.sub().ambient())
        .map_err(|e| CliError::schema("/element", e))?;
    Ok(Outcome::new(true, json!({"deformation": bd.act(&z)?.to_json()})))
}

fn deform_compat(model: &Model) -> Result<Outcome, CliError> {
    let (gc, brane) = (model.gc()?, model.brane()?);
    let ok = is_compatible_deformation(&model.deformation(&brane)?, &gc)?;
    Ok(Outcome::new(ok, json!({"compatible": ok})))
}

/// Validates descent data and reassembles it; without `descent`, restricts `deformation` to `cover`.
fn deform_descent(model: &Model) -> Result<Outcome, CliError> {
    let brane = model.brane()?;
    let data = match model.get("descent") {
        Some(d) => {
            let cover = NerveCover::from_json(&d["cover"]).map_err(|e| CliError::schema("/descent/cover", e))?;
            let objects: Vec<BraneDeformation> = d["objects"]
                .as_array()
                .into_iter()
                .flatten()
                .enumerate()
                .map(|(i, o)| {
                    BraneDeformation::from_json(o, &brane).map_err(|e| CliError::schema(format!("/descent/objects/{i}"), e))
                })
                .collect::<Result<_, _>>()?;
            let verts = brane.herm().cover().verts();
            let mut morphisms = BTreeMap::new();
            for (a, b) in cover.edges() {
                let o = objects.get(a).ok_or_else(|| CliError::schema("/descent/objects", "one object per chart"))?;
                morphisms.insert((a, b), Equivalence::identity(o.alg(), verts));
            }
            if let Some(ms) = d.get("morphisms").and_then(Value::as_object) {
                for (key, m) in ms {
                    let ptr = child("/descent/morphisms", key);
                    let edge = parse_edge_key(key).map_err(|e| CliError::schema(&ptr, e))?;
                    if !morphisms.contains_key(&edge) {
                        return Err(CliError::schema(ptr, "not an edge of the cover"));
                    }
                    let alg = objects[edge.0].alg().clone();
                    morphisms.insert(edge, Equivalence::from_json(m, &brane, &alg).map_err(|e| CliError::schema(&ptr, e))?);
                }
            }
            DescentData::new(cover, objects, morphisms).map_err(|e| CliError::schema("/descent", e))?
        }
        None => DescentData::restriction(&model.deformation(&brane)?, &model.cover(&brane)?),
    };
    let violations = data.validate();
    if !violations.is_empty() {
        let list: Vec<Value> = violations.iter().map(|v| json!({"simplex": v.simplex, "reason": v.reason})).collect();
        return Ok(Outcome::new(false, json!({"valid": false, "violations": list})));
    }
    let (global, _) = data.reassemble()?;
    Ok(Outcome::new(true, json!({"valid": true, "global": global.to_json()})))
}

fn dgla_mc(model: &Model) -> Result<Outcome, CliError> {
    let (g, alg) = (model.dgla()?, model.artin()?);
    let x = model.gelem("x", &g, 1, &alg)?;
    let m = mc_check(&g, &x)?;
    Ok(Outcome::new(m.is_mc, json!({"is_mc": m.is_mc, "residual": gelem_json(&m.residual)})))
}

/// `e^y·x` when `y` is given, otherwise a gauge equivalence `x ~ x2`.
fn dgla_gauge(model: &Model) -> Result<Outcome, CliError> {
    let (g, alg) = (model.dgla()?, model.artin()?);
    let x = model.gelem("x", &g, 1, &alg)?;
    if model.get("y").is_some() {
        let y = model.gelem("y", &g, 0, &alg)?;
        return Ok(Outcome::new(true, json!({"result": gelem_json(&gauge_act(&g, &y, &x)?)})));
    }
    let x2 = model.gelem("x2", &g, 1, &alg)?;
    match gauge_equivalence(&g, &x, &x2)? {
        Some(y) => Ok(Outcome::new(true, json!({"equivalent": true, "gauge": gelem_json(&y)}))),
        None => Ok(Outcome::new(false, json!({"equivalent": false}))),
    }
}

fn dgla_tot(model: &Model) -> Result<Outcome, CliError> {
    let semi = SemiCx::from_json(model.require("semicosimplicial")?).map_err(|e| CliError::schema("/semicosimplicial", e))?;
    let (total, _) = tot(&semi)?;
    let mut cohomology = Map::new();
    for &k in total.dims().keys() {
        cohomology.insert(k.to_string(), json!(total.cohomology(k)?.0));
    }
    let dims: Map<String, Value> = total.dims().iter().map(|(k, n)| (k.to_string(), json!(n))).collect();
    let ok = total.d_squared_is_zero();
    Ok(Outcome::new(ok, json!({"dims": dims, "d_squared_zero": ok, "cohomology": cohomology})))
}

fn dgla_build_v(model: &Model, opts: Options) -> Result<Outcome, CliError> {
    let (gc, brane) = (model.gc()?, model.brane()?);
    let v = build_v(&brane, &gc, &model.cover(&brane)?, opts.deg)?;
    Ok(Outcome::new(v.total().d_squared_is_zero(), v.to_json()))
}

/// The matrix of `Φ: H²(C) → H²(B)` and whether it is injective.
fn dgla_phi(model: &Model, opts: Options) -> Result<Outcome, CliError> {
    let (gc, brane) = (model.gc()?, model.brane()?);
    let v = build_v(&brane, &gc, &model.cover(&brane)?, opts.deg)?;
    let frame = brane_frame(&brane, &gc)?;
    let coh2 = frame.cohomology(2, opts.deg)?;
    let (h2c, _) = h2_total(&v)?;
    let (images, rank) = phi_matrix(&v, &frame, &coh2)?;
    let images: Vec<Value> = images.iter().map(|c| Value::Array(c.iter().map(Scalar::to_json).collect())).collect();
    let injective = rank == h2c;
    Ok(Outcome::new(
        injective,
        json!({"h2_total": h2c, "h2_brane": coh2.dim(), "rank": rank, "injective": injective, "images": images}),
    ))
}

/// Lifts `x` over `artin` along the small extensions from `lift_to`, stopping at the first obstruction.
fn dgla_obstruct(model: &Model) -> Result<Outcome, CliError> {
    let (g, alg, big) = (model.dgla()?, model.artin()?, model.algebra("lift_to")?);
    let mut x = model.gelem("x", &g, 1, &alg)?;
    let hom = ArtinHom::by_labels(&big, &alg).map_err(|e| CliError::schema("/lift_to", e))?;
    let chain = small_extension_chain(&hom).map_err(|e| CliError::schema("/lift_to", e))?;
    for (stage, link) in chain.iter().rev().enumerate() {
        match obstruction_lift(&g, link, &x)? {
            LiftOutcome::Lifted(l) => x = l,
            LiftOutcome::Obstructed { residual, class } => {
                let class: Vec<Value> = class.iter().map(Scalar::to_json).collect();
                return Ok(Outcome::new(
                    false,
                    json!({"lifted": false, "stage": stage, "representative": gelem_json(&residual), "class": class}),
                ));
            }
        }
    }
    Ok(Outcome::new(true, json!({"lifted": true, "x": gelem_json(&x)})))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(v: Value) -> Model {
        Model::from_json(v).unwrap()
    }

    #[test]
    fn schema_errors_carry_pointers() {
        let bad = json!({"gc": {"kind": "standard", "data": {"m": 1, "n": 1}}, "f": {"terms": [{"exp": [1, 0, 0, 0], "coef": "1/0"}]}});
        match Model::from_json(bad) {
            Err(CliError::Schema { pointer, .. }) => assert_eq!(pointer, "/f/terms/0/coef"),
            other => panic!("expected a schema error, got {other:?}"),
        }
        match Model::from_json(json!({"brane": {"z_coords": [0, -1]}})) {
            Err(CliError::Schema { pointer, .. }) => assert_eq!(pointer, "/brane/z_coords/1"),
            other => panic!("expected a schema error, got {other:?}"),
        }
        match Model::from_json(json!({"gcs": {}})) {
            Err(CliError::Schema { pointer, message }) => assert_eq!((pointer.as_str(), message.as_str()), ("/gcs", "unknown key")),
            other => panic!("expected a schema error, got {other:?}"),
        }
        let m = model(json!({"gc": {"kind": "standard", "data": {"m": 1, "n": 1}}}));
        match run(Command::BraneCheck, &m, Options::default()) {
            Err(CliError::Schema { pointer, .. }) => assert_eq!(pointer, "/brane"),
            other => panic!("expected a missing section, got {other:?}"),
        }
    }

    #[test]
    fn pointer_tokens_are_escaped() {
        assert_eq!(child("/a", "b/c~d"), "/a/b~1c~0d");
    }

    #[test]
    fn gc_check_reports_type_of_the_product_model() {
        let m = model(json!({"gc": {"kind": "standard", "data": {"m": 1, "n": 1}}}));
        let out = run(Command::GcCheck, &m, Options::default()).unwrap();
        assert_eq!(out.to_json_string(), r#"{"almost":true,"integrable":true,"type":1}"#);
        assert_eq!(out.exit_code(), 0);
    }

    #[test]
    fn sheared_structure_fails_with_a_witness() {
        let m = model(json!({"gc": crate::gcs::sheared_complex().to_json()}));
        let out = run(Command::GcNijenhuis, &m, Options::default()).unwrap();
        assert_eq!(out.exit_code(), 1);
        assert_eq!(out.report["residuals"].as_array().unwrap().len(), 13);
    }

    #[test]
    fn table_aligns_keys() {
        assert_eq!(table(&json!({"a": 1, "long": "x"})), "a     1\nlong  x\n");
    }
}
