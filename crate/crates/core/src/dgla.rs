// SPDX-License-Identifier: MIT OR Apache-2.0
//! Finite DGLAs over ℚ, Maurer–Cartan elements and the gauge action, semicosimplicial and
//! bisemicosimplicial cochain complexes with their totalizations, the diagram `V••` of a brane on a
//! nerve cover, the map `Φ: H²(C) → H²(𝓑)`, and obstruction lifting along small extensions.
//!
//! Section Lie algebras enter through monomial truncations of polynomial degree `≤ D`. The nerve model
//! uses the full ambient chart for every open set, so restriction maps are identities.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::artin::{bch, bilinear, AElem, Artin, ArtinError, Module, SmallExtension};
use crate::brane::{Brane, BraneError, BraneFrame, Cohomology, NerveCover};
use crate::courant::{aelem_from_json, aelem_json, CourantError, GenEndo, QSection, SymElement};
use crate::deform::{chi, kkk_bracket, kkk_violations, sigma_morphism, sigma_preimage, BraneDeformation, DeformError, DescentData, KKKElement, RElement};
use crate::gcs::{AlgebroidForm, GCStructure, GcsError};
use crate::ring::{fmt_rational, monomials_up_to, parse_rational, q, quotient_dim, ExactMatrix, GaussianRational, Mono, QPoly, Rational, RingError, Vars};

/// Errors raised by DGLA and totalization operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DglaError {
    #[error("expected an element of degree {degree} with {dim} coordinates")]
    Shape { degree: i32, dim: usize },
    #[error("DGLA axiom fails: {0}")]
    Axiom(String),
    #[error("cosimplicial identity fails: {0}")]
    Cosimplicial(String),
    #[error("D² ≠ 0: {0}")]
    DSquared(String),
    #[error("truncation is not closed: {0}")]
    Truncation(String),
    #[error("linear system has no solution: {0}")]
    Insoluble(String),
    #[error("unsupported case: {0}")]
    Unsupported(String),
    #[error("element is not a cocycle")]
    NotCocycle,
    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Artin(#[from] ArtinError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Brane(#[from] BraneError),
    #[error(transparent)]
    Deform(#[from] DeformError),
    #[error(transparent)]
    Courant(#[from] CourantError),
    #[error(transparent)]
    Gcs(#[from] GcsError),
}

/// Coordinate vectors in a fixed basis.
pub type Coords = Vec<Rational>;
/// Homogeneous elements of `g ⊗ A`.
pub type GElem = AElem<Coords>;

fn zero_vec(n: usize) -> Coords {
    vec![q(0); n]
}

fn unit_vec(n: usize, i: usize) -> Coords {
    let mut v = zero_vec(n);
    v[i] = q(1);
    v
}

fn is_zero_vec(v: &[Rational]) -> bool {
    v.iter().all(|c| *c == q(0))
}

fn mat_vec(m: &ExactMatrix<Rational>, v: &[Rational]) -> Coords {
    (0..m.rows()).map(|i| (0..m.cols()).fold(q(0), |acc, j| acc + m.get(i, j) * &v[j])).collect()
}

fn mat_mul(a: &ExactMatrix<Rational>, b: &ExactMatrix<Rational>) -> ExactMatrix<Rational> {
    let mut out: ExactMatrix<Rational> = ExactMatrix::zeros(a.rows(), b.cols());
    for i in 0..a.rows() {
        for k in 0..a.cols() {
            let x = a.get(i, k);
            if *x == q(0) {
                continue;
            }
            for j in 0..b.cols() {
                let y = b.get(k, j);
                if *y != q(0) {
                    let cur = out.get(i, j).clone();
                    out.set(i, j, cur + x * y);
                }
            }
        }
    }
    out
}

fn mat_is_zero(m: &ExactMatrix<Rational>) -> bool {
    (0..m.rows()).all(|i| (0..m.cols()).all(|j| *m.get(i, j) == q(0)))
}

fn cols_matrix(rows: usize, cols: &[Coords]) -> ExactMatrix<Rational> {
    let mut m = ExactMatrix::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        for (i, x) in c.iter().enumerate() {
            if *x != q(0) {
                m.set(i, j, x.clone());
            }
        }
    }
    m
}

/// Solves `m·x = b`, treating empty systems explicitly.
fn solve(m: &ExactMatrix<Rational>, b: &[Rational]) -> Result<Option<Coords>, DglaError> {
    if m.cols() == 0 {
        return Ok(if is_zero_vec(b) { Some(vec![]) } else { None });
    }
    if m.rows() == 0 {
        return Ok(Some(zero_vec(m.cols())));
    }
    Ok(m.solve(b)?)
}

fn kernel(m: &ExactMatrix<Rational>) -> Vec<Coords> {
    if m.cols() == 0 {
        return vec![];
    }
    if m.rows() == 0 {
        return (0..m.cols()).map(|i| unit_vec(m.cols(), i)).collect();
    }
    m.kernel_basis()
}

/// Dimension and representatives of `ker / im` inside a space of dimension `dim`.
fn quotient(im: &[Coords], ker: &[Coords], dim: usize) -> Result<(usize, Vec<Coords>), DglaError> {
    if ker.is_empty() {
        return Ok((0, vec![]));
    }
    let im: Vec<Coords> = im.iter().filter(|v| !is_zero_vec(v)).cloned().collect();
    Ok(quotient_dim(&im, ker, dim)?)
}

fn sign(n: i64) -> Rational {
    if n.rem_euclid(2) == 0 {
        q(1)
    } else {
        q(-1)
    }
}

fn rat_json(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(|c| Value::String(fmt_rational(c))).collect())
}

fn rat_from_json(v: &Value) -> Result<Coords, DglaError> {
    let arr = v.as_array().ok_or_else(|| DglaError::Parse("expected an array of rationals".into()))?;
    arr.iter()
        .map(|x| match x {
            Value::String(s) => Ok(parse_rational(s)?),
            Value::Number(n) => n.as_i64().map(q).ok_or_else(|| DglaError::Parse(format!("bad number {n}"))),
            _ => Err(DglaError::Parse("expected a rational".into())),
        })
        .collect()
}

/// JSON list `[{"mono": label, "value": [..]}]` of an element of `gᵏ ⊗ A`.
pub fn gelem_json(x: &GElem) -> Value {
    aelem_json(x, |v| rat_json(v))
}

/// Parses the list written by [`gelem_json`], checking the length of each component.
pub fn gelem_from_json(v: &Value, alg: &Artin, dim: usize) -> Result<GElem, DglaError> {
    let x = aelem_from_json(v, alg, |c| -> Result<Coords, CourantError> {
        let c = rat_from_json(c).map_err(|e| CourantError::Parse(e.to_string()))?;
        if c.len() != dim {
            return Err(CourantError::Parse(format!("components need {dim} coordinates")));
        }
        Ok(c)
    })?;
    Ok(x)
}

fn matrix_json(m: &ExactMatrix<Rational>) -> Value {
    Value::Array((0..m.rows()).map(|i| rat_json(&m.row(i))).collect())
}

fn matrix_from_json(v: &Value, rows: usize, cols: usize) -> Result<ExactMatrix<Rational>, DglaError> {
    let arr = v.as_array().ok_or_else(|| DglaError::Parse("expected a matrix".into()))?;
    if arr.len() != rows {
        return Err(DglaError::Parse(format!("matrix needs {rows} rows")));
    }
    let mut m = ExactMatrix::zeros(rows, cols);
    for (i, r) in arr.iter().enumerate() {
        let r = rat_from_json(r)?;
        if r.len() != cols {
            return Err(DglaError::Parse(format!("matrix needs {cols} columns")));
        }
        for (j, x) in r.into_iter().enumerate() {
            m.set(i, j, x);
        }
    }
    Ok(m)
}

/// A cochain complex of finite-dimensional ℚ-vector spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct Complex {
    dims: BTreeMap<i32, usize>,
    d: BTreeMap<i32, ExactMatrix<Rational>>,
}

impl Complex {
    /// `d[k]` maps degree `k` to `k + 1`; missing differentials are zero. Checks shapes and `d² = 0`.
    pub fn new(dims: BTreeMap<i32, usize>, d: BTreeMap<i32, ExactMatrix<Rational>>) -> Result<Self, DglaError> {
        let dims: BTreeMap<i32, usize> = dims.into_iter().filter(|(_, n)| *n > 0).collect();
        let c = Complex { dims, d };
        for (k, m) in &c.d {
            if m.cols() != c.dim(*k) || m.rows() != c.dim(k + 1) {
                return Err(DglaError::Parse(format!("d in degree {k} has the wrong shape")));
            }
        }
        for k in c.d.keys() {
            if !mat_is_zero(&mat_mul(&c.d_matrix(k + 1), &c.d_matrix(*k))) {
                return Err(DglaError::DSquared(format!("degree {k}")));
            }
        }
        Ok(c)
    }

    /// A single space in degree `k` with zero differential.
    pub fn concentrated(k: i32, dim: usize) -> Self {
        Complex { dims: [(k, dim)].into_iter().filter(|(_, n)| *n > 0).collect(), d: BTreeMap::new() }
    }

    pub fn dim(&self, k: i32) -> usize {
        self.dims.get(&k).copied().unwrap_or(0)
    }

    pub fn dims(&self) -> &BTreeMap<i32, usize> {
        &self.dims
    }

    pub fn d_matrix(&self, k: i32) -> ExactMatrix<Rational> {
        self.d.get(&k).cloned().unwrap_or_else(|| ExactMatrix::zeros(self.dim(k + 1), self.dim(k)))
    }

    pub fn apply_d(&self, k: i32, v: &[Rational]) -> Coords {
        mat_vec(&self.d_matrix(k), v)
    }

    pub fn d_squared_is_zero(&self) -> bool {
        self.dims.keys().all(|&k| mat_is_zero(&mat_mul(&self.d_matrix(k + 1), &self.d_matrix(k))))
    }

    /// `dim H^k` and representatives completing a basis of boundaries to one of cocycles.
    pub fn cohomology(&self, k: i32) -> Result<(usize, Vec<Coords>), DglaError> {
        let n = self.dim(k);
        if n == 0 {
            return Ok((0, vec![]));
        }
        let z = kernel(&self.d_matrix(k));
        let prev = self.d_matrix(k - 1);
        let b: Vec<Coords> = (0..prev.cols()).map(|j| prev.col(j)).collect();
        quotient(&b, &z, n)
    }

    /// Coordinates of a cocycle's class in the representative basis of [`Complex::cohomology`].
    pub fn class_of(&self, k: i32, v: &[Rational]) -> Result<Coords, DglaError> {
        if !is_zero_vec(&self.apply_d(k, v)) {
            return Err(DglaError::NotCocycle);
        }
        let (_, reps) = self.cohomology(k)?;
        let prev = self.d_matrix(k - 1);
        let mut cols: Vec<Coords> = (0..prev.cols()).map(|j| prev.col(j)).collect();
        let nb = cols.len();
        cols.extend(reps.iter().cloned());
        let sol = solve(&cols_matrix(self.dim(k), &cols), v)?.ok_or(DglaError::NotCocycle)?;
        Ok(sol[nb..].to_vec())
    }

    pub fn to_json(&self) -> Value {
        let dims: Map<String, Value> = self.dims.iter().map(|(k, n)| (k.to_string(), json!(n))).collect();
        let d: Map<String, Value> = self.d.iter().map(|(k, m)| (k.to_string(), matrix_json(m))).collect();
        json!({"dims": dims, "d": d})
    }

    pub fn from_json(v: &Value) -> Result<Self, DglaError> {
        let dims = parse_dims(v.get("dims"))?;
        let mut d = BTreeMap::new();
        if let Some(obj) = v.get("d").and_then(Value::as_object) {
            for (k, m) in obj {
                let k: i32 = k.parse().map_err(|_| DglaError::Parse(format!("bad degree `{k}`")))?;
                let (r, c) = (dims.get(&(k + 1)).copied().unwrap_or(0), dims.get(&k).copied().unwrap_or(0));
                d.insert(k, matrix_from_json(m, r, c)?);
            }
        }
        Complex::new(dims, d)
    }
}

fn parse_dims(v: Option<&Value>) -> Result<BTreeMap<i32, usize>, DglaError> {
    let obj = v.and_then(Value::as_object).ok_or_else(|| DglaError::Parse("missing `dims`".into()))?;
    obj.iter()
        .map(|(k, n)| {
            let k: i32 = k.parse().map_err(|_| DglaError::Parse(format!("bad degree `{k}`")))?;
            let n = n.as_u64().ok_or_else(|| DglaError::Parse("dimensions must be integers".into()))? as usize;
            Ok((k, n))
        })
        .collect()
}

/// A finite-dimensional DGLA over ℚ given by differential matrices and bracket structure constants.
#[derive(Clone, Debug, PartialEq)]
pub struct Fdgla {
    complex: Complex,
    bracket: BTreeMap<(i32, usize, i32, usize), Coords>,
}

impl Fdgla {
    /// Missing brackets of basis pairs are filled by graded antisymmetry, then all axioms are checked.
    pub fn new(
        dims: BTreeMap<i32, usize>,
        d: BTreeMap<i32, ExactMatrix<Rational>>,
        bracket: BTreeMap<(i32, usize, i32, usize), Coords>,
    ) -> Result<Self, DglaError> {
        let complex = Complex::new(dims, d)?;
        let mut full = bracket.clone();
        for ((p, i, r, j), v) in &bracket {
            if complex.dim(*p) <= *i || complex.dim(*r) <= *j {
                return Err(DglaError::Parse(format!("bracket on missing basis element ({p},{i}),({r},{j})")));
            }
            if v.len() != complex.dim(p + r) {
                return Err(DglaError::Parse(format!("bracket value in degree {} has the wrong length", p + r)));
            }
            let key = (*r, *j, *p, *i);
            if !bracket.contains_key(&key) {
                full.insert(key, v.iter().map(|c| -(sign((*p as i64) * (*r as i64)) * c)).collect());
            }
        }
        full.retain(|_, v| !is_zero_vec(v));
        let g = Fdgla { complex, bracket: full };
        g.check_axioms()?;
        Ok(g)
    }

    /// A Lie algebra placed in degree 0 with `[e_i, e_j] = Σ c_ijk e_k`.
    pub fn lie_algebra(dim: usize, bracket: BTreeMap<(usize, usize), Coords>) -> Result<Self, DglaError> {
        let br = bracket.into_iter().map(|((i, j), v)| ((0, i, 0, j), v)).collect();
        Self::new([(0, dim)].into(), BTreeMap::new(), br)
    }

    /// `End(V)` of a cochain complex: `[f,g] = fg − (−1)^{|f||g|}gf`, `df = d_V f − (−1)^{|f|} f d_V`.
    pub fn endomorphisms(v: &Complex) -> Result<Self, DglaError> {
        let degs: Vec<i32> = v.dims().keys().copied().collect();
        let mut blocks: BTreeMap<i32, Vec<(i32, usize, usize)>> = BTreeMap::new();
        for &src in &degs {
            for &tgt in &degs {
                for r in 0..v.dim(tgt) {
                    for c in 0..v.dim(src) {
                        blocks.entry(tgt - src).or_default().push((src, r, c));
                    }
                }
            }
        }
        let as_maps = |k: i32, x: &[Rational]| -> BTreeMap<i32, ExactMatrix<Rational>> {
            let mut out: BTreeMap<i32, ExactMatrix<Rational>> = BTreeMap::new();
            for (idx, &(src, r, c)) in blocks.get(&k).map(|b| b.as_slice()).unwrap_or(&[]).iter().enumerate() {
                let m = out.entry(src).or_insert_with(|| ExactMatrix::zeros(v.dim(src + k), v.dim(src)));
                m.set(r, c, x[idx].clone());
            }
            out
        };
        let from_maps = |k: i32, maps: &BTreeMap<i32, ExactMatrix<Rational>>| -> Coords {
            blocks
                .get(&k)
                .map(|b| b.iter().map(|&(src, r, c)| maps.get(&src).map(|m| m.get(r, c).clone()).unwrap_or_default()).collect())
                .unwrap_or_default()
        };
        let compose = |f: &BTreeMap<i32, ExactMatrix<Rational>>, kf: i32, g: &BTreeMap<i32, ExactMatrix<Rational>>, kg: i32| {
            let mut out = BTreeMap::new();
            for (src, gm) in g {
                if let Some(fm) = f.get(&(src + kg)) {
                    out.insert(*src, mat_mul(fm, gm));
                }
            }
            let _ = kf;
            out
        };
        let add = |a: &BTreeMap<i32, ExactMatrix<Rational>>, b: &BTreeMap<i32, ExactMatrix<Rational>>, s: &Rational| {
            let mut out = a.clone();
            for (k, m) in b {
                let e = out.entry(*k).or_insert_with(|| ExactMatrix::zeros(m.rows(), m.cols()));
                for i in 0..m.rows() {
                    for j in 0..m.cols() {
                        let cur = e.get(i, j).clone();
                        e.set(i, j, cur + s * m.get(i, j));
                    }
                }
            }
            out
        };
        let dv: BTreeMap<i32, ExactMatrix<Rational>> = degs.iter().map(|&k| (k, v.d_matrix(k))).collect();
        let dims: BTreeMap<i32, usize> = blocks.iter().map(|(k, b)| (*k, b.len())).collect();
        let mut d = BTreeMap::new();
        for (&k, &n) in &dims {
            if dims.contains_key(&(k + 1)) {
                let cols: Vec<Coords> = (0..n)
                    .map(|i| {
                        let f = as_maps(k, &unit_vec(n, i));
                        let df = add(&compose(&dv, 1, &f, k), &compose(&f, k, &dv, 1), &-sign(k as i64));
                        from_maps(k + 1, &df)
                    })
                    .collect();
                d.insert(k, cols_matrix(dims[&(k + 1)], &cols));
            }
        }
        let mut bracket = BTreeMap::new();
        for (&p, &np) in &dims {
            for (&r, &nr) in &dims {
                if !dims.contains_key(&(p + r)) {
                    continue;
                }
                for i in 0..np {
                    for j in 0..nr {
                        let f = as_maps(p, &unit_vec(np, i));
                        let g = as_maps(r, &unit_vec(nr, j));
                        let s = -sign((p as i64) * (r as i64));
                        let b = add(&compose(&f, p, &g, r), &compose(&g, r, &f, p), &s);
                        let val = from_maps(p + r, &b);
                        if !is_zero_vec(&val) {
                            bracket.insert((p, i, r, j), val);
                        }
                    }
                }
            }
        }
        Self::new(dims, d, bracket)
    }

    fn check_axioms(&self) -> Result<(), DglaError> {
        let degs: Vec<i32> = self.complex.dims.keys().copied().collect();
        let basis = |k: i32| (0..self.dim(k)).map(move |i| (i, unit_vec(self.dim(k), i)));
        for &p in &degs {
            for &r in &degs {
                for (i, a) in basis(p) {
                    for (j, b) in basis(r) {
                        let ab = self.bracket(p, &a, r, &b);
                        let ba = self.bracket(r, &b, p, &a);
                        let s = sign((p as i64) * (r as i64));
                        if ab.iter().zip(&ba).any(|(x, y)| *x != -(&s * y)) {
                            return Err(DglaError::Axiom(format!("graded antisymmetry for ({p},{i}),({r},{j})")));
                        }
                        let lhs = self.diff(p + r, &ab);
                        let t1 = self.bracket(p + 1, &self.diff(p, &a), r, &b);
                        let t2 = self.bracket(p, &a, r + 1, &self.diff(r, &b));
                        let rhs: Coords = t1.iter().zip(&t2).map(|(x, y)| x + sign(p as i64) * y).collect();
                        if lhs != rhs {
                            return Err(DglaError::Axiom(format!("d is not a derivation on ({p},{i}),({r},{j})")));
                        }
                    }
                }
            }
        }
        for &p in &degs {
            for &r in &degs {
                for &s in &degs {
                    if self.dim(p + r + s) == 0 {
                        continue;
                    }
                    for (i, a) in basis(p) {
                        for (j, b) in basis(r) {
                            for (k, c) in basis(s) {
                                let lhs = self.bracket(p, &a, r + s, &self.bracket(r, &b, s, &c));
                                let t1 = self.bracket(p + r, &self.bracket(p, &a, r, &b), s, &c);
                                let t2 = self.bracket(r, &b, p + s, &self.bracket(p, &a, s, &c));
                                let rhs: Coords =
                                    t1.iter().zip(&t2).map(|(x, y)| x + sign((p as i64) * (r as i64)) * y).collect();
                                if lhs != rhs {
                                    return Err(DglaError::Axiom(format!("graded Jacobi for ({p},{i}),({r},{j}),({s},{k})")));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn complex(&self) -> &Complex {
        &self.complex
    }

    pub fn dim(&self, k: i32) -> usize {
        self.complex.dim(k)
    }

    pub fn is_abelian(&self) -> bool {
        self.bracket.is_empty()
    }

    pub fn diff(&self, k: i32, x: &[Rational]) -> Coords {
        self.complex.apply_d(k, x)
    }

    /// `[x, y]` for `x` of degree `p` and `y` of degree `r`.
    pub fn bracket(&self, p: i32, x: &[Rational], r: i32, y: &[Rational]) -> Coords {
        let mut out = zero_vec(self.dim(p + r));
        if out.is_empty() {
            return out;
        }
        for (i, a) in x.iter().enumerate() {
            if *a == q(0) {
                continue;
            }
            for (j, b) in y.iter().enumerate() {
                if *b == q(0) {
                    continue;
                }
                if let Some(v) = self.bracket.get(&(p, i, r, j)) {
                    let ab = a * b;
                    for (o, c) in out.iter_mut().zip(v) {
                        *o += &ab * c;
                    }
                }
            }
        }
        out
    }

    /// Checks that `x` is a degree-`k` element of `g ⊗ m`.
    pub fn check_element(&self, k: i32, x: &GElem) -> Result<(), DglaError> {
        let n = self.dim(k);
        if x.comps().values().any(|v| v.len() != n) {
            return Err(DglaError::Shape { degree: k, dim: n });
        }
        if !x.is_in_m() {
            return Err(ArtinError::NotInMaximalIdeal.into());
        }
        Ok(())
    }

    pub fn a_diff(&self, k: i32, x: &GElem) -> GElem {
        let mut out = AElem::zero(x.alg());
        for (b, v) in x.comps() {
            let dv = self.diff(k, v);
            if !is_zero_vec(&dv) {
                out.add_comp(*b, dv);
            }
        }
        out
    }

    pub fn a_bracket(&self, p: i32, x: &GElem, r: i32, y: &GElem) -> Result<GElem, DglaError> {
        Ok(bilinear(x, y, |a, b| self.bracket(p, a, r, b))?)
    }

    /// The graded element `0 ∈ g^k ⊗ A`.
    pub fn a_zero(&self, alg: &Artin) -> GElem {
        AElem::zero(alg)
    }

    /// `e_i ⊗ a` for a basis element of `A`.
    pub fn a_basis(&self, alg: &Artin, k: i32, i: usize, b: usize) -> GElem {
        AElem::basis_elem(alg, b, unit_vec(self.dim(k), i))
    }

    pub fn to_json(&self) -> Value {
        let bracket: Vec<Value> = self
            .bracket
            .iter()
            .filter(|((p, i, r, j), _)| (p, i) <= (r, j))
            .map(|((p, i, r, j), v)| json!({"x": [p, i], "y": [r, j], "value": rat_json(v)}))
            .collect();
        let mut out = self.complex.to_json();
        out["bracket"] = Value::Array(bracket);
        out
    }

    pub fn from_json(v: &Value) -> Result<Self, DglaError> {
        let c = Complex::from_json(v)?;
        let mut bracket = BTreeMap::new();
        for item in v.get("bracket").and_then(Value::as_array).map(|a| a.as_slice()).unwrap_or(&[]) {
            let idx = |key: &str| -> Result<(i32, usize), DglaError> {
                let a = item.get(key).and_then(Value::as_array).filter(|a| a.len() == 2);
                let a = a.ok_or_else(|| DglaError::Parse(format!("bracket entry needs `{key}: [degree, index]`")))?;
                let p = a[0].as_i64().ok_or_else(|| DglaError::Parse("degree must be an integer".into()))? as i32;
                let i = a[1].as_u64().ok_or_else(|| DglaError::Parse("index must be an integer".into()))? as usize;
                Ok((p, i))
            };
            let (p, i) = idx("x")?;
            let (r, j) = idx("y")?;
            let val = rat_from_json(item.get("value").ok_or_else(|| DglaError::Parse("bracket entry needs `value`".into()))?)?;
            bracket.insert((p, i, r, j), val);
        }
        Self::new(c.dims, c.d, bracket)
    }
}

/// Result of a Maurer–Cartan test with its exact residual `dx + ½[x,x]`.
#[derive(Clone, Debug, PartialEq)]
pub struct McCheck {
    pub is_mc: bool,
    pub residual: GElem,
}

/// `dx + ½[x,x]` for `x ∈ g¹ ⊗ m`.
pub fn mc_residual(g: &Fdgla, x: &GElem) -> Result<GElem, DglaError> {
    g.check_element(1, x)?;
    let half = g.a_bracket(1, x, 1, x)?.scale(&(q(1) / q(2)));
    Ok(g.a_diff(1, x).add(&half))
}

pub fn mc_check(g: &Fdgla, x: &GElem) -> Result<McCheck, DglaError> {
    let residual = mc_residual(g, x)?;
    Ok(McCheck { is_mc: residual.is_zero(), residual })
}

/// `e^y · x = x + Σ_{n≥0} ad_yⁿ/(n+1)! ([y,x] − dy)`.
pub fn gauge_act(g: &Fdgla, y: &GElem, x: &GElem) -> Result<GElem, DglaError> {
    g.check_element(0, y)?;
    g.check_element(1, x)?;
    let mut term = g.a_bracket(0, y, 1, x)?.sub(&g.a_diff(0, y));
    let mut out = x.add(&term);
    let mut n = 1i64;
    while !term.is_zero() {
        n += 1;
        term = g.a_bracket(0, y, 1, &term)?.scale(&(q(1) / q(n)));
        out = out.add(&term);
    }
    Ok(out)
}

/// `log(e^y e^z)` in the gauge group.
pub fn gauge_mul(g: &Fdgla, y: &GElem, z: &GElem) -> Result<GElem, DglaError> {
    Ok(bch(y, z, |a, b| g.bracket(0, a, 0, b))?)
}

/// A gauge element `y` with `e^y·x = x'`, or `None` when the two elements lie in different orbits.
/// Exact for abelian `g` and for algebras with `m³ = 0`.
pub fn gauge_equivalence(g: &Fdgla, x: &GElem, x2: &GElem) -> Result<Option<GElem>, DglaError> {
    let alg = x.alg().clone();
    if *x2.alg() != alg {
        return Err(ArtinError::AlgebraMismatch.into());
    }
    for e in [x, x2] {
        if !mc_check(g, e)?.is_mc {
            return Err(DglaError::Unsupported("gauge equivalence is tested between Maurer–Cartan elements".into()));
        }
    }
    let d0 = g.complex.d_matrix(0);
    let n0 = g.dim(0);
    let comp = |e: &GElem, b: usize| e.comp(b).cloned().unwrap_or_else(|| zero_vec(g.dim(1)));
    if g.is_abelian() {
        let mut y = AElem::zero(&alg);
        for b in alg.maximal_ideal_basis() {
            let rhs: Coords = comp(x, b).iter().zip(&comp(x2, b)).map(|(a, c)| a - c).collect();
            match solve(&d0, &rhs)? {
                Some(s) if !is_zero_vec(&s) => y.add_comp(b, s),
                Some(_) => {}
                None => return Ok(None),
            }
        }
        return Ok(Some(y));
    }
    if alg.nilpotency_order() > 3 {
        return Err(DglaError::Unsupported("non-abelian orbit tests need m³ = 0".into()));
    }
    let m = alg.maximal_ideal_basis();
    let first: Vec<usize> = m.iter().copied().filter(|&b| alg.degree_of(b) == 1).collect();
    let second: Vec<usize> = m.iter().copied().filter(|&b| alg.degree_of(b) == 2).collect();
    let mut p: BTreeMap<usize, Coords> = BTreeMap::new();
    let mut delta: BTreeMap<usize, Coords> = BTreeMap::new();
    for &b in &first {
        let rhs: Coords = comp(x, b).iter().zip(&comp(x2, b)).map(|(a, c)| a - c).collect();
        match solve(&d0, &rhs)? {
            Some(s) => {
                p.insert(b, s);
                delta.insert(b, rhs);
            }
            None => return Ok(None),
        }
    }
    let z0 = kernel(&d0);
    let nc = z0.len() * first.len();
    let ny = n0 * second.len();
    let n1 = g.dim(1);
    let mut cols: Vec<Coords> = vec![zero_vec(n1 * second.len()); nc + ny];
    let mut rhs = zero_vec(n1 * second.len());
    for (k, &e) in second.iter().enumerate() {
        let mut fixed: Coords = comp(x2, e).iter().zip(&comp(x, e)).map(|(a, c)| a - c).collect();
        for (bi, &b) in first.iter().enumerate() {
            for &b2 in &first {
                if alg.mul_index(b, b2) != Some(e) {
                    continue;
                }
                let shifted: Coords = comp(x, b2).iter().zip(&delta[&b2]).map(|(a, c)| a - c * (q(1) / q(2))).collect();
                let base = g.bracket(0, &p[&b], 1, &shifted);
                for (f, v) in fixed.iter_mut().zip(&base) {
                    *f -= v;
                }
                for (zi, z) in z0.iter().enumerate() {
                    let col = g.bracket(0, z, 1, &shifted);
                    for (r, v) in col.iter().enumerate() {
                        cols[bi * z0.len() + zi][k * n1 + r] += v;
                    }
                }
            }
        }
        for j in 0..n0 {
            let dcol = d0.col(j);
            for (r, v) in dcol.iter().enumerate() {
                cols[nc + k * n0 + j][k * n1 + r] -= v;
            }
        }
        for (r, v) in fixed.into_iter().enumerate() {
            rhs[k * n1 + r] = v;
        }
    }
    let sol = match solve(&cols_matrix(n1 * second.len(), &cols), &rhs)? {
        Some(s) => s,
        None => return Ok(None),
    };
    let mut y = AElem::zero(&alg);
    for (bi, &b) in first.iter().enumerate() {
        let mut v = p[&b].clone();
        for (zi, z) in z0.iter().enumerate() {
            for (o, c) in v.iter_mut().zip(z) {
                *o += &sol[bi * z0.len() + zi] * c;
            }
        }
        if !is_zero_vec(&v) {
            y.add_comp(b, v);
        }
    }
    for (k, &e) in second.iter().enumerate() {
        let v = sol[nc + k * n0..nc + (k + 1) * n0].to_vec();
        if !is_zero_vec(&v) {
            y.add_comp(e, v);
        }
    }
    if gauge_act(g, &y, x)? != *x2 {
        return Err(DglaError::Insoluble("orbit solve produced a non-solution".into()));
    }
    Ok(Some(y))
}

/// What is known about `π₀ Del_g(A)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Pi0 {
    /// One isomorphism class.
    Singleton,
    /// `H¹(g) ⊗ m` for abelian `g`, with a basis of `H¹(g)`.
    VectorSpace { dim: usize, h1_basis: Vec<Coords> },
    /// Only pairwise equivalence testing is available.
    TesterOnly,
}

/// `π₀` of the Deligne groupoid, when it is determined by linear algebra.
pub fn deligne_pi0(g: &Fdgla, alg: &Artin) -> Result<Pi0, DglaError> {
    let (h1, reps) = g.complex.cohomology(1)?;
    if g.is_abelian() {
        let dim = h1 * alg.maximal_ideal_basis().len();
        return Ok(if dim == 0 { Pi0::Singleton } else { Pi0::VectorSpace { dim, h1_basis: reps } });
    }
    Ok(if h1 == 0 { Pi0::Singleton } else { Pi0::TesterOnly })
}

/// The class of an MC element of an abelian DGLA in `H¹(g) ⊗ m`, one block per basis element of `m`.
pub fn abelian_class(g: &Fdgla, x: &GElem) -> Result<Vec<Coords>, DglaError> {
    if !g.is_abelian() {
        return Err(DglaError::Unsupported("classes are linear only for abelian DGLAs".into()));
    }
    x.alg()
        .maximal_ideal_basis()
        .into_iter()
        .map(|b| g.complex.class_of(1, &x.comp(b).cloned().unwrap_or_else(|| zero_vec(g.dim(1)))))
        .collect()
}

/// Outcome of lifting a Maurer–Cartan element along a small extension.
#[derive(Clone, Debug, PartialEq)]
pub enum LiftOutcome {
    Lifted(GElem),
    /// The residual `r ⊗ e ∈ g² ⊗ I` of the naive lift and the class of `r` in `H²(g)`.
    Obstructed { residual: GElem, class: Coords },
}

/// Lifts `x ∈ MC(g ⊗ m_A)` along `A' → A`, or returns the obstruction class in `H²(g) ⊗ I`.
pub fn obstruction_lift(g: &Fdgla, ext: &SmallExtension, x: &GElem) -> Result<LiftOutcome, DglaError> {
    let hom = &ext.hom;
    let (src, tgt) = (hom.source().clone(), hom.target().clone());
    if *x.alg() != tgt {
        return Err(ArtinError::AlgebraMismatch.into());
    }
    if !mc_check(g, x)?.is_mc {
        return Err(DglaError::Unsupported("only Maurer–Cartan elements are lifted".into()));
    }
    let mat = hom.matrix();
    let mut lifted: GElem = AElem::zero(&src);
    for (b, v) in x.comps() {
        let pre = solve(&mat, &unit_vec(tgt.dim(), *b))?.ok_or_else(|| DglaError::Insoluble("A' → A is not surjective".into()))?;
        for (i, c) in pre.iter().enumerate() {
            if *c != q(0) {
                lifted.add_comp(i, v.scale(c));
            }
        }
    }
    let lifted = lifted.m_part();
    let residual = mc_residual(g, &lifted)?;
    let e = &ext.kernel_generator;
    let (j, ej) = e.comps().iter().next().map(|(j, c)| (*j, c.clone())).ok_or_else(|| DglaError::Unsupported("zero kernel".into()))?;
    let r: Coords = residual.comp(j).cloned().unwrap_or_else(|| zero_vec(g.dim(2))).scale(&(q(1) / ej));
    let along = |v: &Coords| -> GElem {
        let mut out = AElem::zero(&src);
        for (i, c) in e.comps() {
            out.add_comp(*i, v.scale(c));
        }
        out
    };
    if along(&r) != residual {
        return Err(DglaError::Insoluble("the residual does not lie in g² ⊗ I".into()));
    }
    match solve(&g.complex.d_matrix(1), &r)? {
        Some(eta) => {
            let out = lifted.sub(&along(&eta));
            debug_assert!(mc_check(g, &out)?.is_mc);
            Ok(LiftOutcome::Lifted(out))
        }
        None => Ok(LiftOutcome::Obstructed { class: g.complex.class_of(2, &r)?, residual }),
    }
}

/// Linear maps between graded spaces, one matrix per source degree, of a fixed degree shift.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct GradedMap {
    shift: i32,
    blocks: BTreeMap<i32, ExactMatrix<Rational>>,
}

impl GradedMap {
    pub fn new(shift: i32, blocks: BTreeMap<i32, ExactMatrix<Rational>>) -> Self {
        GradedMap { shift, blocks }
    }

    /// The identity of a complex.
    pub fn identity(c: &Complex) -> Self {
        GradedMap { shift: 0, blocks: c.dims().iter().map(|(k, n)| (*k, ExactMatrix::identity(*n))).collect() }
    }

    pub fn shift(&self) -> i32 {
        self.shift
    }

    pub fn block(&self, k: i32, src: &Complex, tgt: &Complex) -> ExactMatrix<Rational> {
        self.blocks
            .get(&k)
            .cloned()
            .unwrap_or_else(|| ExactMatrix::zeros(tgt.dim(k + self.shift), src.dim(k)))
    }

    pub fn to_json(&self) -> Value {
        let blocks: Map<String, Value> = self.blocks.iter().map(|(k, m)| (k.to_string(), matrix_json(m))).collect();
        json!({"shift": self.shift, "blocks": blocks})
    }

    /// Parses `{"shift": s, "blocks": {"k": matrix}}` for maps `src → tgt`; `shift` defaults to 0.
    pub fn from_json(v: &Value, src: &Complex, tgt: &Complex) -> Result<Self, DglaError> {
        let shift = match v.get("shift") {
            None => 0,
            Some(s) => s.as_i64().ok_or_else(|| DglaError::Parse("`shift` must be an integer".into()))? as i32,
        };
        let mut blocks = BTreeMap::new();
        if let Some(obj) = v.get("blocks").and_then(Value::as_object) {
            for (k, m) in obj {
                let k: i32 = k.parse().map_err(|_| DglaError::Parse(format!("bad degree `{k}`")))?;
                blocks.insert(k, matrix_from_json(m, tgt.dim(k + shift), src.dim(k))?);
            }
        }
        Ok(GradedMap { shift, blocks })
    }

    fn compose(&self, other: &GradedMap, src: &Complex, mid: &Complex, tgt: &Complex) -> BTreeMap<i32, ExactMatrix<Rational>> {
        src.dims()
            .keys()
            .map(|&k| (k, mat_mul(&self.block(k + other.shift, mid, tgt), &other.block(k, src, mid))))
            .collect()
    }
}

/// A semicosimplicial cochain complex `V₀ ⇉ V₁ ⇛ …`, with `cofaces[n][i] = ∂ⁱ: V_n → V_{n+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SemiCx {
    levels: Vec<Complex>,
    cofaces: Vec<Vec<GradedMap>>,
}

impl SemiCx {
    /// Checks shapes, that cofaces are chain maps and `∂ʲ∂ⁱ = ∂ⁱ∂ʲ⁻¹` for `i < j`.
    pub fn new(levels: Vec<Complex>, cofaces: Vec<Vec<GradedMap>>) -> Result<Self, DglaError> {
        if cofaces.len() + 1 != levels.len().max(1) {
            return Err(DglaError::Parse("one family of cofaces per consecutive pair of levels".into()));
        }
        for (n, fam) in cofaces.iter().enumerate() {
            if fam.len() != n + 2 {
                return Err(DglaError::Parse(format!("level {n} needs {} cofaces", n + 2)));
            }
            for (i, f) in fam.iter().enumerate() {
                if f.shift != 0 {
                    return Err(DglaError::Parse("cofaces preserve degree".into()));
                }
                let (src, tgt) = (&levels[n], &levels[n + 1]);
                for (k, m) in &f.blocks {
                    if m.cols() != src.dim(*k) || m.rows() != tgt.dim(*k) {
                        return Err(DglaError::Parse(format!("∂^{i} on level {n} has the wrong shape in degree {k}")));
                    }
                }
                for &k in src.dims().keys() {
                    let a = mat_mul(&tgt.d_matrix(k), &f.block(k, src, tgt));
                    let b = mat_mul(&f.block(k + 1, src, tgt), &src.d_matrix(k));
                    if a != b {
                        return Err(DglaError::Cosimplicial(format!("∂^{i} on level {n} is not a chain map")));
                    }
                }
            }
        }
        let s = SemiCx { levels, cofaces };
        s.check_identities()?;
        Ok(s)
    }

    fn check_identities(&self) -> Result<(), DglaError> {
        for n in 0..self.cofaces.len().saturating_sub(1) {
            let (a, b, c) = (&self.levels[n], &self.levels[n + 1], &self.levels[n + 2]);
            for j in 1..n + 3 {
                for i in 0..j {
                    let lhs = self.cofaces[n + 1][j].compose(&self.cofaces[n][i], a, b, c);
                    let rhs = self.cofaces[n + 1][i].compose(&self.cofaces[n][j - 1], a, b, c);
                    if lhs != rhs {
                        return Err(DglaError::Cosimplicial(format!("∂^{j}∂^{i} ≠ ∂^{i}∂^{} on level {n}", j - 1)));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn levels(&self) -> &[Complex] {
        &self.levels
    }

    pub fn coface(&self, n: usize, i: usize) -> &GradedMap {
        &self.cofaces[n][i]
    }

    pub fn to_json(&self) -> Value {
        let levels: Vec<Value> = self.levels.iter().map(Complex::to_json).collect();
        let cofaces: Vec<Value> = self.cofaces.iter().map(|f| Value::Array(f.iter().map(GradedMap::to_json).collect())).collect();
        json!({"levels": levels, "cofaces": cofaces})
    }

    /// Parses `{"levels": [complex..], "cofaces": [[map..]..]}` and validates it.
    pub fn from_json(v: &Value) -> Result<Self, DglaError> {
        let bad = |m: &str| DglaError::Parse(m.to_string());
        let levels: Vec<Complex> = v
            .get("levels")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("semicosimplicial complex needs `levels`"))?
            .iter()
            .map(Complex::from_json)
            .collect::<Result<_, _>>()?;
        let fams = v.get("cofaces").and_then(Value::as_array).ok_or_else(|| bad("semicosimplicial complex needs `cofaces`"))?;
        if fams.len() + 1 != levels.len().max(1) {
            return Err(bad("one family of cofaces per consecutive pair of levels"));
        }
        let cofaces = fams
            .iter()
            .enumerate()
            .map(|(n, fam)| {
                fam.as_array()
                    .ok_or_else(|| bad("a coface family must be a list"))?
                    .iter()
                    .map(|m| GradedMap::from_json(m, &levels[n], &levels[n + 1]))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?;
        Self::new(levels, cofaces)
    }
}

/// A block of a total complex: level `n`, inner degree `k`, and its coordinate range.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TotBlock {
    pub level: usize,
    pub inner: i32,
    pub offset: usize,
    pub len: usize,
}

/// The block decomposition `Tot^k = ⊕_n V_n^{k−n}`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct TotLayout {
    pub blocks: BTreeMap<i32, Vec<TotBlock>>,
}

impl TotLayout {
    pub fn find(&self, k: i32, level: usize) -> Option<&TotBlock> {
        self.blocks.get(&k)?.iter().find(|b| b.level == level)
    }
}

/// `Tot(V) = ⊕ V_n[−n]` with `D = Σ(−1)ⁿ d_n + Σ_n Σ_i (−1)ⁱ ∂ⁱ_n`; `D² = 0` is verified.
pub fn tot(v: &SemiCx) -> Result<(Complex, TotLayout), DglaError> {
    let mut layout = TotLayout::default();
    for (n, lvl) in v.levels.iter().enumerate() {
        for (&k, &len) in lvl.dims() {
            let t = k + n as i32;
            let blocks = layout.blocks.entry(t).or_default();
            let offset = blocks.iter().map(|b| b.len).sum();
            blocks.push(TotBlock { level: n, inner: k, offset, len });
        }
    }
    let dims: BTreeMap<i32, usize> = layout.blocks.iter().map(|(k, b)| (*k, b.iter().map(|x| x.len).sum())).collect();
    let mut d = BTreeMap::new();
    for (&t, blocks) in &layout.blocks {
        let Some(targets) = layout.blocks.get(&(t + 1)) else { continue };
        let mut m: ExactMatrix<Rational> = ExactMatrix::zeros(dims[&(t + 1)], dims[&t]);
        let mut put = |tb: &TotBlock, sb: &TotBlock, blk: &ExactMatrix<Rational>, s: &Rational| {
            for i in 0..blk.rows() {
                for j in 0..blk.cols() {
                    let x = blk.get(i, j);
                    if *x != q(0) {
                        let cur = m.get(tb.offset + i, sb.offset + j).clone();
                        m.set(tb.offset + i, sb.offset + j, cur + s * x);
                    }
                }
            }
        };
        for sb in blocks {
            let lvl = &v.levels[sb.level];
            if let Some(tb) = targets.iter().find(|b| b.level == sb.level && b.inner == sb.inner + 1) {
                put(tb, sb, &lvl.d_matrix(sb.inner), &sign(sb.level as i64));
            }
            if let Some(tb) = targets.iter().find(|b| b.level == sb.level + 1 && b.inner == sb.inner) {
                for (i, f) in v.cofaces[sb.level].iter().enumerate() {
                    put(tb, sb, &f.block(sb.inner, lvl, &v.levels[sb.level + 1]), &sign(i as i64));
                }
            }
        }
        d.insert(t, m);
    }
    let c = Complex { dims, d };
    if !c.d_squared_is_zero() {
        return Err(DglaError::DSquared("totalization".into()));
    }
    Ok((c, layout))
}

/// A bisemicosimplicial cochain complex: semicosimplicial rows and vertical cofaces
/// `vertical[m][n][j]: V_{n,m} → V_{n,m+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BisemiCx {
    rows: Vec<SemiCx>,
    vertical: Vec<Vec<Vec<GradedMap>>>,
}

/// A block of `Tot(V••)`: row, column, inner degree and coordinate range.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiBlock {
    pub row: usize,
    pub col: usize,
    pub inner: i32,
    pub offset: usize,
    pub len: usize,
}

/// Block decomposition of `Tot(V••)` by total degree.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct BiLayout {
    pub blocks: BTreeMap<i32, Vec<BiBlock>>,
}

impl BiLayout {
    pub fn find(&self, k: i32, row: usize, col: usize) -> Option<&BiBlock> {
        self.blocks.get(&k)?.iter().find(|b| b.row == row && b.col == col)
    }
}

impl BisemiCx {
    /// Checks the rows, the vertical cosimplicial identities and that vertical and horizontal cofaces commute.
    pub fn new(rows: Vec<SemiCx>, vertical: Vec<Vec<Vec<GradedMap>>>) -> Result<Self, DglaError> {
        if rows.is_empty() || vertical.len() + 1 != rows.len() {
            return Err(DglaError::Parse("one family of vertical cofaces per consecutive pair of rows".into()));
        }
        let ncols = rows[0].levels.len();
        if rows.iter().any(|r| r.levels.len() != ncols) {
            return Err(DglaError::Parse("rows must have the same number of columns".into()));
        }
        for (m, per_col) in vertical.iter().enumerate() {
            if per_col.len() != ncols || per_col.iter().any(|f| f.len() != m + 2) {
                return Err(DglaError::Parse(format!("row {m} needs {} vertical cofaces per column", m + 2)));
            }
        }
        for n in 0..ncols {
            let levels: Vec<Complex> = rows.iter().map(|r| r.levels[n].clone()).collect();
            let cofaces: Vec<Vec<GradedMap>> = vertical.iter().map(|pc| pc[n].clone()).collect();
            SemiCx::new(levels, cofaces).map_err(|e| DglaError::Cosimplicial(format!("column {n}: {e}")))?;
        }
        for (m, per_col) in vertical.iter().enumerate() {
            for n in 0..ncols.saturating_sub(1) {
                let (a, b) = (&rows[m].levels[n], &rows[m].levels[n + 1]);
                let (a2, b2) = (&rows[m + 1].levels[n], &rows[m + 1].levels[n + 1]);
                for (j, vmap) in per_col[n].iter().enumerate() {
                    for (i, h) in rows[m].cofaces[n].iter().enumerate() {
                        let lhs = per_col[n + 1][j].compose(h, a, b, b2);
                        let rhs = rows[m + 1].cofaces[n][i].compose(vmap, a, a2, b2);
                        if lhs != rhs {
                            return Err(DglaError::Cosimplicial(format!(
                                "vertical ∂^{j} and horizontal ∂^{i} do not commute at ({n},{m})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(BisemiCx { rows, vertical })
    }

    pub fn rows(&self) -> &[SemiCx] {
        &self.rows
    }

    /// `Tot^△`: the row totalizations with the induced vertical cofaces.
    pub fn tot_rows(&self) -> Result<(SemiCx, Vec<TotLayout>), DglaError> {
        let totals: Vec<(Complex, TotLayout)> = self.rows.iter().map(tot).collect::<Result<_, _>>()?;
        let mut cofaces = Vec::new();
        for (m, per_col) in self.vertical.iter().enumerate() {
            let (src, srcl) = &totals[m];
            let (tgt, tgtl) = &totals[m + 1];
            let mut fam = Vec::new();
            for j in 0..m + 2 {
                let mut blocks = BTreeMap::new();
                for (&t, sblocks) in &srcl.blocks {
                    let mut mat = ExactMatrix::zeros(tgt.dim(t), src.dim(t));
                    for sb in sblocks {
                        let Some(tb) = tgtl.find(t, sb.level) else { continue };
                        let blk = per_col[sb.level][j].block(sb.inner, &self.rows[m].levels[sb.level], &self.rows[m + 1].levels[sb.level]);
                        for i in 0..blk.rows() {
                            for k in 0..blk.cols() {
                                mat.set(tb.offset + i, sb.offset + k, blk.get(i, k).clone());
                            }
                        }
                    }
                    blocks.insert(t, mat);
                }
                fam.push(GradedMap::new(0, blocks));
            }
            cofaces.push(fam);
        }
        let (levels, layouts): (Vec<Complex>, Vec<TotLayout>) = totals.into_iter().unzip();
        Ok((SemiCx::new(levels, cofaces)?, layouts))
    }

    /// `Tot(V••) = Tot(Tot^△(V••))` with its block decomposition.
    pub fn tot(&self) -> Result<(Complex, BiLayout), DglaError> {
        let (tri, row_layouts) = self.tot_rows()?;
        let (c, outer) = tot(&tri)?;
        let mut layout = BiLayout::default();
        for (&k, oblocks) in &outer.blocks {
            let mut out = Vec::new();
            for ob in oblocks {
                for ib in row_layouts[ob.level].blocks.get(&ob.inner).map(|v| v.as_slice()).unwrap_or(&[]) {
                    out.push(BiBlock { row: ob.level, col: ib.level, inner: ib.inner, offset: ob.offset + ib.offset, len: ib.len });
                }
            }
            layout.blocks.insert(k, out);
        }
        Ok((c, layout))
    }
}

/// Coordinates of sections with coefficients of degree `≤ D`.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionSpace {
    vars: Vars,
    items: Vec<(usize, Mono)>,
    index: BTreeMap<(usize, Mono), usize>,
}

impl SectionSpace {
    pub fn new(vars: &Vars, deg: u32) -> Self {
        let mut items = Vec::new();
        for c in 0..2 * vars.len() {
            for m in monomials_up_to(vars.len(), deg) {
                items.push((c, m));
            }
        }
        let index = items.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        SectionSpace { vars: vars.clone(), items, index }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn coords(&self, x: &QSection) -> Option<Coords> {
        let mut v = zero_vec(self.len());
        for (c, p) in x.to_vec().iter().enumerate() {
            for (m, a) in p.terms() {
                v[*self.index.get(&(c, m.clone()))?] = a.clone();
            }
        }
        Some(v)
    }

    pub fn element(&self, v: &[Rational]) -> QSection {
        let mut comps = vec![QPoly::zero(&self.vars); 2 * self.vars.len()];
        for (i, a) in v.iter().enumerate() {
            if *a != q(0) {
                let (c, m) = &self.items[i];
                comps[*c].add_term(m.clone(), a.clone());
            }
        }
        QSection::from_vec(&self.vars, &comps)
    }
}

fn sparse_kernel<K: Ord + Clone>(cols: &[BTreeMap<K, Rational>]) -> Vec<Coords> {
    let keys: BTreeSet<K> = cols.iter().flat_map(|c| c.keys().cloned()).collect();
    let index: BTreeMap<K, usize> = keys.into_iter().enumerate().map(|(i, k)| (k, i)).collect();
    let mut m = ExactMatrix::zeros(index.len(), cols.len());
    for (j, c) in cols.iter().enumerate() {
        for (k, v) in c {
            m.set(index[k], j, v.clone());
        }
    }
    kernel(&m)
}

fn endo_entries(e: &GenEndo<Rational>) -> BTreeMap<(usize, usize, Mono), Rational> {
    let mut out = BTreeMap::new();
    for i in 0..e.size() {
        for j in 0..e.size() {
            for (m, c) in e.get(i, j).terms() {
                out.insert((i, j, m.clone()), c.clone());
            }
        }
    }
    out
}

fn pivots(dim: usize, vecs: &[Coords]) -> Vec<usize> {
    if vecs.is_empty() || dim == 0 {
        return vec![];
    }
    cols_matrix(dim, vecs).rref().1
}

/// The truncated section Lie algebras `𝒯_D ⊃ H_D` and `𝒦_D` of a brane on a GC chart.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionAlgebras {
    pub deg: u32,
    space: SectionSpace,
    t_basis: Vec<QSection>,
    t_solver: ExactMatrix<Rational>,
    h_basis: Vec<QSection>,
    k_basis: Vec<KKKElement>,
}

impl SectionAlgebras {
    /// Bases of generalized holomorphic sections of degree `≤ D`, Hamiltonian sections `x_f` with
    /// `deg f ≤ D + 1`, and elements of `𝒦` whose ambient part has degree `≤ D`.
    pub fn new(brane: &Brane, gc: &GCStructure, deg: u32) -> Result<Self, DglaError> {
        let sub = brane.sub();
        let amb = sub.ambient().clone();
        let space = SectionSpace::new(&amb, deg);
        let cols: Vec<_> =
            (0..space.len()).map(|i| endo_entries(&GenEndo::inf_action(&space.element(&unit_vec(space.len(), i)), gc.endo()))).collect();
        let t_coords = sparse_kernel(&cols);
        let t_basis: Vec<QSection> = t_coords.iter().map(|v| space.element(v)).collect();
        let t_solver = cols_matrix(space.len(), &t_coords);

        let mut hs = Vec::new();
        for m in monomials_up_to(amb.len(), deg + 1) {
            let f = QPoly::monomial(&amb, m, q(1)).complexify();
            hs.push(gc.gen_hamiltonian(&f));
            hs.push(gc.gen_hamiltonian(&f.scale(&crate::ring::gi())));
        }
        let hcoords: Vec<Coords> = hs
            .iter()
            .map(|x| space.coords(x).ok_or_else(|| DglaError::Truncation("x_f exceeds the section degree".into())))
            .collect::<Result<_, _>>()?;
        let h_basis: Vec<QSection> = pivots(space.len(), &hcoords).into_iter().map(|j| hs[j].clone()).collect();

        let zv = sub.zvars().clone();
        let hmonos = monomials_up_to(zv.len(), deg + 1);
        let f = brane.curvature();
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
        enum Key {
            Normal(usize, Mono),
            Form(Vec<usize>, Mono),
        }
        let mut cols: Vec<BTreeMap<Key, Rational>> = Vec::new();
        for t in &t_basis {
            let mut c = BTreeMap::new();
            for &y in sub.normal() {
                for (m, a) in sub.restrict(t.vf.comp(y)).terms() {
                    c.insert(Key::Normal(y, m.clone()), a.clone());
                }
            }
            let tau = sub.restrict_vf(&t.vf);
            let w = sub.pullback(&t.form).add(&f.contract(&tau).neg());
            for (idx, p) in w.terms() {
                for (m, a) in p.terms() {
                    c.insert(Key::Form(idx.clone(), m.clone()), a.clone());
                }
            }
            cols.push(c);
        }
        for m in &hmonos {
            let dh = crate::cartan::DiffForm::function(&QPoly::monomial(&zv, m.clone(), q(1))).ext_d();
            let mut c = BTreeMap::new();
            for (idx, p) in dh.terms() {
                for (mm, a) in p.terms() {
                    c.insert(Key::Form(idx.clone(), mm.clone()), a.clone());
                }
            }
            cols.push(c);
        }
        let nt = t_basis.len();
        let k_basis: Vec<KKKElement> = sparse_kernel(&cols)
            .into_iter()
            .map(|v| {
                let ambient = t_basis.iter().zip(&v[..nt]).fold(QSection::zero(&amb), |acc, (t, c)| acc.add(&t.scale(c)));
                let h = hmonos.iter().zip(&v[nt..]).fold(QPoly::zero(&zv), |acc, (m, c)| &acc + &QPoly::monomial(&zv, m.clone(), c.clone()));
                KKKElement { boundary: RElement { xi: sub.restrict_vf(&ambient.vf), f: h }, ambient }
            })
            .collect();
        for k in &k_basis {
            let bad = kkk_violations(brane, Some(gc), k);
            if !bad.is_empty() {
                return Err(DglaError::Truncation(bad.join("; ")));
            }
        }
        Ok(SectionAlgebras { deg, space, t_basis, t_solver, h_basis, k_basis })
    }

    pub fn t_basis(&self) -> &[QSection] {
        &self.t_basis
    }

    pub fn h_basis(&self) -> &[QSection] {
        &self.h_basis
    }

    pub fn k_basis(&self) -> &[KKKElement] {
        &self.k_basis
    }

    /// Coordinates in the `𝒯_D` basis.
    pub fn t_coords(&self, x: &QSection) -> Option<Coords> {
        let v = self.space.coords(x)?;
        solve(&self.t_solver, &v).ok().flatten()
    }

    pub fn t_element(&self, c: &[Rational]) -> QSection {
        self.t_basis.iter().zip(c).fold(QSection::zero(&self.space.vars), |acc, (t, a)| acc.add(&t.scale(a)))
    }

    pub fn k_element(&self, c: &[Rational]) -> KKKElement {
        self.k_basis.iter().zip(c).fold(
            KKKElement { ambient: QSection::zero(&self.space.vars), boundary: RElement::zero(&self.k_basis.first().map(|k| k.boundary.f.vars().clone()).unwrap_or_else(|| self.space.vars.clone())) },
            |acc, (k, a)| acc.add(&Module::scale(k, a)),
        )
    }

    /// Whether the `𝒯_D` span is closed under the bracket `ĝ`.
    pub fn t_closure_defect(&self) -> Option<String> {
        for (i, a) in self.t_basis.iter().enumerate() {
            for (j, b) in self.t_basis.iter().enumerate().skip(i + 1) {
                if self.t_coords(&a.ghat_bracket(b)).is_none() {
                    return Some(format!("[t_{i}, t_{j}] leaves 𝒯_{}", self.deg));
                }
            }
        }
        None
    }
}

/// The Lie algebra spanned by `basis` if the bracket closes on it, as a DGLA in degree 0.
pub fn lie_from_span<V, K, F, B>(basis: &[V], flatten: F, bracket: B) -> Result<Fdgla, DglaError>
where
    V: Module,
    K: Ord + Clone,
    F: Fn(&V) -> BTreeMap<K, Rational>,
    B: Fn(&V, &V) -> V,
{
    let flat: Vec<BTreeMap<K, Rational>> = basis.iter().map(&flatten).collect();
    let keys: BTreeSet<K> = flat.iter().flat_map(|c| c.keys().cloned()).collect();
    let index: BTreeMap<K, usize> = keys.into_iter().enumerate().map(|(i, k)| (k, i)).collect();
    let vec_of = |m: &BTreeMap<K, Rational>| -> Option<Coords> {
        let mut v = zero_vec(index.len());
        for (k, c) in m {
            v[*index.get(k)?] = c.clone();
        }
        Some(v)
    };
    let cols: Vec<Coords> = flat.iter().map(|m| vec_of(m).expect("own keys")).collect();
    let mat = cols_matrix(index.len(), &cols);
    if pivots(index.len(), &cols).len() != basis.len() {
        return Err(DglaError::Truncation("the spanning family is not independent".into()));
    }
    let mut br = BTreeMap::new();
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let c = bracket(a, b);
            let v = vec_of(&flatten(&c)).ok_or_else(|| DglaError::Truncation(format!("[e_{i}, e_{j}] leaves the span")))?;
            let s = solve(&mat, &v)?.ok_or_else(|| DglaError::Truncation(format!("[e_{i}, e_{j}] leaves the span")))?;
            if !is_zero_vec(&s) {
                br.insert((i, j), s);
            }
        }
    }
    Fdgla::lie_algebra(basis.len(), br)
}

/// Antisymmetry and Jacobi violations of a bracket on sample elements.
pub fn spot_check_lie<V: Module, B: Fn(&V, &V) -> V>(samples: &[V], bracket: B) -> Vec<String> {
    let mut out = Vec::new();
    for (i, a) in samples.iter().enumerate() {
        for (j, b) in samples.iter().enumerate() {
            if !bracket(a, b).add(&bracket(b, a)).is_zero() {
                out.push(format!("antisymmetry fails on ({i},{j})"));
            }
            for (k, c) in samples.iter().enumerate() {
                let s = bracket(a, &bracket(b, c)).add(&bracket(b, &bracket(c, a))).add(&bracket(c, &bracket(a, b)));
                if !s.is_zero() {
                    out.push(format!("Jacobi fails on ({i},{j},{k})"));
                }
            }
        }
    }
    out
}

/// The smallest even column count that keeps the constant `H(X)` row exact after truncation.
fn column_cutoff(cover: &NerveCover) -> usize {
    let top = cover.simplices().iter().map(|s| s.len().saturating_sub(1)).max().unwrap_or(0);
    let mut n = (top + 1).max(2);
    if n % 2 == 1 {
        n += 1;
    }
    n
}

/// The diagram `V••_{𝓑,𝒰}`: top row the nerve of `𝒯`, bottom row `H(X) ⊕` the nerve of `𝒦`, with
/// `∂⁰_V` the inclusion of Hamiltonians and `∂¹_V = χ`. Columns beyond the nerve carry only `H(X)`
/// and are cut at an even column, which leaves the cohomology of `Tot` unchanged.
#[derive(Clone, Debug, PartialEq)]
pub struct VModel {
    brane: Brane,
    cover: NerveCover,
    algebras: SectionAlgebras,
    columns: Vec<Vec<Vec<usize>>>,
    bisemi: BisemiCx,
    total: Complex,
    layout: BiLayout,
}

/// Builds `V••` and its totalization for a brane, a GC structure and a nerve cover of `X`.
pub fn build_v(brane: &Brane, gc: &GCStructure, cover: &NerveCover, deg: u32) -> Result<VModel, DglaError> {
    let alg = SectionAlgebras::new(brane, gc, deg)?;
    let (nt, nh, nk) = (alg.t_basis.len(), alg.h_basis.len(), alg.k_basis.len());
    let h_in_t: Vec<Coords> = alg
        .h_basis
        .iter()
        .map(|x| alg.t_coords(x).ok_or_else(|| DglaError::Truncation("a Hamiltonian section is not in 𝒯_D".into())))
        .collect::<Result<_, _>>()?;
    let chi_in_t: Vec<Coords> = alg
        .k_basis
        .iter()
        .map(|k| alg.t_coords(&k.ambient).ok_or_else(|| DglaError::Truncation("χ leaves 𝒯_D".into())))
        .collect::<Result<_, _>>()?;
    let h_mat = cols_matrix(nt, &h_in_t);
    let chi_mat = cols_matrix(nt, &chi_in_t);
    let ncols = column_cutoff(cover) + 1;
    let columns: Vec<Vec<Vec<usize>>> = (0..ncols).map(|n| cover.of_dim(n)).collect();
    let place = |m: &mut ExactMatrix<Rational>, r0: usize, c0: usize, blk: &ExactMatrix<Rational>| {
        for i in 0..blk.rows() {
            for j in 0..blk.cols() {
                m.set(r0 + i, c0 + j, blk.get(i, j).clone());
            }
        }
    };
    let face_index = |n: usize, s: &[usize], i: usize| -> usize {
        let mut f = s.to_vec();
        f.remove(i);
        columns[n].iter().position(|x| *x == f).expect("faces of simplices are simplices")
    };
    let mut rows = Vec::new();
    for (row, (base, per)) in [(nh, nk), (0, nt)].into_iter().enumerate() {
        let levels: Vec<Complex> = columns.iter().map(|c| Complex::concentrated(0, base + per * c.len())).collect();
        let mut cofaces = Vec::new();
        for n in 0..ncols - 1 {
            let (src, tgt) = (base + per * columns[n].len(), base + per * columns[n + 1].len());
            let mut fam = Vec::new();
            for i in 0..n + 2 {
                let mut m = ExactMatrix::zeros(tgt, src);
                place(&mut m, 0, 0, &ExactMatrix::identity(base));
                for (a, s) in columns[n + 1].iter().enumerate() {
                    let b = face_index(n, s, i);
                    place(&mut m, base + per * a, base + per * b, &ExactMatrix::identity(per));
                }
                fam.push(GradedMap::new(0, [(0, m)].into()));
            }
            cofaces.push(fam);
        }
        let _ = row;
        rows.push(SemiCx::new(levels, cofaces)?);
    }
    let mut per_col = Vec::new();
    for c in &columns {
        let (src, tgt) = (nh + nk * c.len(), nt * c.len());
        let mut v0 = ExactMatrix::zeros(tgt, src);
        let mut v1 = ExactMatrix::zeros(tgt, src);
        for a in 0..c.len() {
            place(&mut v0, nt * a, 0, &h_mat);
            place(&mut v1, nt * a, nh + nk * a, &chi_mat);
        }
        per_col.push(vec![GradedMap::new(0, [(0, v0)].into()), GradedMap::new(0, [(0, v1)].into())]);
    }
    let bisemi = BisemiCx::new(rows, vec![per_col])?;
    let (total, layout) = bisemi.tot()?;
    Ok(VModel { brane: brane.clone(), cover: cover.clone(), algebras: alg, columns, bisemi, total, layout })
}

impl VModel {
    pub fn algebras(&self) -> &SectionAlgebras {
        &self.algebras
    }

    pub fn bisemi(&self) -> &BisemiCx {
        &self.bisemi
    }

    /// The cochain complex `C = Tot(V••)`.
    pub fn total(&self) -> &Complex {
        &self.total
    }

    pub fn layout(&self) -> &BiLayout {
        &self.layout
    }

    pub fn columns(&self) -> &[Vec<Vec<usize>>] {
        &self.columns
    }

    pub fn to_json(&self) -> Value {
        let dims: Map<String, Value> = self.total.dims().iter().map(|(k, n)| (k.to_string(), json!(n))).collect();
        json!({
            "deg": self.algebras.deg,
            "dim_T": self.algebras.t_basis.len(),
            "dim_H": self.algebras.h_basis.len(),
            "dim_K": self.algebras.k_basis.len(),
            "columns": self.columns.iter().map(Vec::len).collect::<Vec<_>>(),
            "tot_dims": dims,
            "d_squared_zero": self.total.d_squared_is_zero(),
        })
    }
}

/// `dim H²(C)` and representative cocycles.
pub fn h2_total(model: &VModel) -> Result<(usize, Vec<Coords>), DglaError> {
    model.total.cohomology(2)
}

/// Auxiliary choices entering `Φ`: a global shift of the `σ_α`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PhiChoice {
    pub sigma_shift: Option<AlgebroidForm>,
}

fn block_slice(v: &[Rational], b: &BiBlock) -> Coords {
    v[b.offset..b.offset + b.len].to_vec()
}

/// Reduces a 2-cocycle to `z = 0` and `f_{αβγ} = 0`, as two successive linear solves.
pub fn reduce_cocycle(model: &VModel, c: &[Rational]) -> Result<Coords, DglaError> {
    let total = &model.total;
    if c.len() != total.dim(2) {
        return Err(DglaError::Shape { degree: 2, dim: total.dim(2) });
    }
    if !is_zero_vec(&total.apply_d(2, c)) {
        return Err(DglaError::NotCocycle);
    }
    let nh = model.algebras.h_basis.len();
    let nk = model.algebras.k_basis.len();
    let d1 = total.d_matrix(1);
    let (n1, n2) = (total.dim(1), total.dim(2));
    let b1 = model.layout.find(1, 0, 1).cloned();
    let b2 = model.layout.find(2, 0, 2).cloned();
    let mut c = c.to_vec();
    if let (Some(b1), Some(b2)) = (&b1, &b2) {
        let src: Vec<usize> = (b1.offset..b1.offset + nh).collect();
        let tgt: Vec<usize> = (b2.offset..b2.offset + nh).collect();
        c = reduce_step(&d1, &c, &src, &tgt, |v| v.to_vec(), n1, n2)?;
        let src: Vec<usize> = (b1.offset + nh..b1.offset + b1.len).collect();
        let zv = model.brane.sub().zvars().clone();
        let monos = monomials_up_to(zv.len(), model.algebras.deg + 1);
        let ntri = (b2.len - nh) / nk.max(1);
        let kb = &model.algebras.k_basis;
        let fpart = |v: &[Rational]| -> Coords {
            let mut out = Vec::new();
            for t in 0..ntri {
                let seg = &v[b2.offset + nh + t * nk..b2.offset + nh + (t + 1) * nk];
                let f = kb.iter().zip(seg).fold(QPoly::zero(&zv), |acc, (k, a)| &acc + &k.boundary.f.scale(a));
                out.extend(monos.iter().map(|m| f.coeff(m)));
            }
            out
        };
        if ntri > 0 {
            c = reduce_step(&d1, &c, &src, &[], fpart, n1, n2)?;
        }
        if !is_zero_vec(&block_slice(&c, b2)[..nh]) {
            return Err(DglaError::Insoluble("the H(X) component reappeared".into()));
        }
    }
    Ok(c)
}

/// Finds `b` supported on `src` with `P(c − Db) = 0`, where `P` selects `tgt` (or applies `proj` when
/// `tgt` is empty), and returns `c − Db`.
fn reduce_step<P: Fn(&[Rational]) -> Coords>(
    d1: &ExactMatrix<Rational>,
    c: &[Rational],
    src: &[usize],
    tgt: &[usize],
    proj: P,
    n1: usize,
    n2: usize,
) -> Result<Coords, DglaError> {
    let select = |v: &[Rational]| -> Coords {
        if tgt.is_empty() {
            proj(v)
        } else {
            tgt.iter().map(|&i| v[i].clone()).collect()
        }
    };
    let rhs = select(c);
    if is_zero_vec(&rhs) {
        return Ok(c.to_vec());
    }
    let cols: Vec<Coords> = src.iter().map(|&j| select(&mat_vec(d1, &unit_vec(n1, j)))).collect();
    let sol = solve(&cols_matrix(rhs.len(), &cols), &rhs)?.ok_or_else(|| DglaError::Insoluble("cocycle reduction".into()))?;
    let mut b = zero_vec(n1);
    for (&j, s) in src.iter().zip(sol) {
        b[j] = s;
    }
    let db = mat_vec(d1, &b);
    debug_assert_eq!(db.len(), n2);
    Ok(c.iter().zip(&db).map(|(x, y)| x - y).collect())
}

/// `Φ([c]) = [ζ]` with `ζ|_{U_α} = δ_l μ(σ_α)`, `σ_β − σ_α = μqr(x_{αβ})` after reducing `c`.
pub fn phi_map(
    model: &VModel,
    frame: &BraneFrame,
    coh2: &Cohomology,
    c: &[Rational],
    choice: &PhiChoice,
) -> Result<Vec<GaussianRational>, DglaError> {
    let c = reduce_cocycle(model, c)?;
    let sub = model.brane.sub();
    let zv = sub.zvars().clone();
    let nt = model.algebras.t_basis.len();
    let edges = model.cover.edges();
    let mut eta: BTreeMap<(usize, usize), AlgebroidForm> = BTreeMap::new();
    if let Some(b) = model.layout.find(2, 1, 1) {
        let v = block_slice(&c, b);
        for (a, e) in model.columns[1].iter().enumerate() {
            let x = model.algebras.t_element(&v[a * nt..(a + 1) * nt]);
            eta.insert((e[0], e[1]), frame.normal_mu(&sub.restrict_section(&x)));
        }
    }
    let zero1 = AlgebroidForm::zero(&zv, 1);
    let n = model.cover.verts();
    let mut sigma: Vec<Option<AlgebroidForm>> = vec![None; n];
    for root in 0..n {
        if sigma[root].is_some() {
            continue;
        }
        sigma[root] = Some(choice.sigma_shift.clone().unwrap_or_else(|| zero1.clone()));
        let mut queue = VecDeque::from([root]);
        while let Some(p) = queue.pop_front() {
            let sp = sigma[p].clone().expect("visited");
            for &(a, b) in &edges {
                let e = eta.get(&(a, b)).cloned().unwrap_or_else(|| zero1.clone());
                let (child, val) = if a == p { (b, sp.add(&e)) } else if b == p { (a, sp.add(&e.neg())) } else { continue };
                if sigma[child].is_none() {
                    sigma[child] = Some(val);
                    queue.push_back(child);
                }
            }
        }
    }
    let sigma: Vec<AlgebroidForm> = sigma.into_iter().map(|s| s.expect("all vertices visited")).collect();
    for &(a, b) in &edges {
        let e = eta.get(&(a, b)).cloned().unwrap_or_else(|| zero1.clone());
        if sigma[b].add(&sigma[a].neg()) != e {
            return Err(DglaError::Insoluble("σ_β − σ_α = η_αβ has no solution on this cover".into()));
        }
    }
    let zetas: Vec<AlgebroidForm> = sigma.iter().map(|s| frame.delta(s)).collect::<Result<_, _>>()?;
    if zetas.windows(2).any(|w| w[0] != w[1]) {
        return Err(DglaError::Insoluble("the local forms δ_l μ(σ_α) do not glue".into()));
    }
    let zeta = zetas.into_iter().next().unwrap_or_else(|| AlgebroidForm::zero(&zv, 2));
    Ok(coh2.class_of(frame, &zeta)?)
}

/// The real matrix of `Φ` on the representative basis of `H²(C)` and its rank.
pub fn phi_matrix(model: &VModel, frame: &BraneFrame, coh2: &Cohomology) -> Result<(Vec<Vec<GaussianRational>>, usize), DglaError> {
    let (_, reps) = h2_total(model)?;
    let images: Vec<Vec<GaussianRational>> =
        reps.iter().map(|r| phi_map(model, frame, coh2, r, &PhiChoice::default())).collect::<Result<_, _>>()?;
    let real: Vec<Coords> = images.iter().map(|v| v.iter().flat_map(|c| [c.re.clone(), c.im.clone()]).collect()).collect();
    let rank = pivots(2 * coh2.dim(), &real).len();
    Ok((images, rank))
}

/// An object `({y_αβ}, {x_α})` of `Desc(Del_{V••})` for a cover of `X`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeligneDescent {
    pub x: Vec<SymElement<Rational>>,
    pub y: BTreeMap<(usize, usize), AElem<KKKElement>>,
}

impl DeligneDescent {
    /// Violations of `χ(y_αβ)x_β = x_α`, of `y_βγ y_αγ⁻¹ y_αβ = 1`, and of membership in `𝒦 ⊗ m`.
    pub fn violations(&self, brane: &Brane, gc: &GCStructure, cover: &NerveCover) -> Result<Vec<String>, DglaError> {
        let mut out = Vec::new();
        let f = brane.curvature().clone();
        if self.x.len() != cover.verts() || self.y.keys().cloned().collect::<BTreeSet<_>>() != cover.edges().into_iter().collect() {
            out.push("data do not match the cover".into());
            return Ok(out);
        }
        for ((a, b), y) in &self.y {
            for k in y.comps().values() {
                for v in kkk_violations(brane, Some(gc), k) {
                    out.push(format!("y_{a}{b}: {v}"));
                }
            }
            if chi(y)?.mul(&self.x[*b])? != self.x[*a] {
                out.push(format!("χ(y_{a}{b})x_{b} ≠ x_{a}"));
            }
        }
        for (a, b, c) in cover.triangles() {
            let mul = |u: &AElem<KKKElement>, v: &AElem<KKKElement>| bch(u, v, |p, r| kkk_bracket(p, r, &f));
            let prod = mul(&mul(&self.y[&(b, c)], &self.y[&(a, c)].neg())?, &self.y[&(a, b)])?;
            if !prod.is_zero() {
                out.push(format!("cocycle condition fails on ({a},{b},{c})"));
            }
        }
        Ok(out)
    }

    /// The descent datum `({B·x_α}, {Σ(y_αβ)})` of deformations.
    pub fn to_deform(&self, brane: &Brane, cover: &NerveCover) -> Result<DescentData, DglaError> {
        let alg = self.x.first().map(|x| x.alg().clone()).ok_or_else(|| DglaError::Parse("empty cover".into()))?;
        let base = BraneDeformation::trivial(brane, &alg);
        let objects = self.x.iter().map(|x| base.act(x)).collect::<Result<Vec<_>, _>>()?;
        let mut morphisms = BTreeMap::new();
        for ((a, b), y) in &self.y {
            morphisms.insert((*a, *b), sigma_morphism(brane, y, &self.x[*b], &self.x[*a])?);
        }
        Ok(DescentData::new(cover.clone(), objects, morphisms)?)
    }

    /// Recovers `{y_αβ}` from descent data whose objects are `B·x_α`.
    pub fn from_deform(brane: &Brane, xs: &[SymElement<Rational>], data: &DescentData) -> Result<Self, DglaError> {
        let alg = xs.first().map(|x| x.alg().clone()).ok_or_else(|| DglaError::Parse("empty cover".into()))?;
        let base = BraneDeformation::trivial(brane, &alg);
        for (x, o) in xs.iter().zip(data.objects()) {
            if base.act(x)? != *o {
                return Err(DglaError::Unsupported("objects must be of the form B·x_α".into()));
            }
        }
        let mut y = BTreeMap::new();
        for (a, b) in data.cover().edges() {
            y.insert((a, b), sigma_preimage(brane, &data.morphism(a, b)?, &xs[b], &xs[a])?);
        }
        Ok(DeligneDescent { x: xs.to_vec(), y })
    }
}

/// `[a,a] = c` with `a` in degree 1, `c` in degree 2 and `d = 0`.
pub fn aa_c_fixture() -> Fdgla {
    let mut br = BTreeMap::new();
    br.insert((1, 0, 1, 0), vec![q(1)]);
    Fdgla::new([(1, 1), (2, 1)].into(), BTreeMap::new(), br).expect("valid fixture")
}

/// The abelian DGLA `ℚ → ℚ³ → ℚ` with `d⁰ = e₀` and `d¹ = e₂^*`, so `H¹ = ℚ` and `H² = 0`.
pub fn abelian_fixture() -> Fdgla {
    let mut d = BTreeMap::new();
    d.insert(0, ExactMatrix::from_rows(vec![vec![q(1)], vec![q(0)], vec![q(0)]]).expect("shape"));
    d.insert(1, ExactMatrix::from_rows(vec![vec![q(0), q(0), q(1)]]).expect("shape"));
    Fdgla::new([(0, 1), (1, 3), (2, 1)].into(), d, BTreeMap::new()).expect("valid fixture")
}

/// `g¹ = ⟨a, b⟩`, `g² = ⟨c⟩`, `db = c`, `[a,a] = c`; here `H² = 0`.
pub fn two_step_fixture() -> Fdgla {
    let mut d = BTreeMap::new();
    d.insert(1, ExactMatrix::from_rows(vec![vec![q(0), q(1)]]).expect("shape"));
    let mut br = BTreeMap::new();
    br.insert((1, 0, 1, 0), vec![q(1)]);
    Fdgla::new([(1, 2), (2, 1)].into(), d, br).expect("valid fixture")
}

/// `𝔰𝔩₂` in degree 0 with `[h,e] = 2e`, `[h,f] = −2f`, `[e,f] = h` in the basis `(h, e, f)`.
pub fn sl2_fixture() -> Fdgla {
    let mut br = BTreeMap::new();
    br.insert((0, 1), vec![q(0), q(2), q(0)]);
    br.insert((0, 2), vec![q(0), q(0), q(-2)]);
    br.insert((1, 2), vec![q(1), q(0), q(0)]);
    Fdgla::lie_algebra(3, br).expect("valid fixture")
}

/// `End(V)` for the acyclic complex `V = (ℚ² → ℚ²)` in degrees 0 and 1 with `d = [[1,0],[0,1]]`,
/// plus a second copy of `ℚ` in degree 1; a non-abelian DGLA with `H• = End(ℚ[−1])`.
pub fn endomorphism_fixture() -> Fdgla {
    let mut d = BTreeMap::new();
    d.insert(0, ExactMatrix::from_rows(vec![vec![q(1), q(0)], vec![q(0), q(1)], vec![q(0), q(0)]]).expect("shape"));
    let v = Complex::new([(0, 2), (1, 3)].into(), d).expect("complex");
    Fdgla::endomorphisms(&v).expect("End is a DGLA")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::artin::{small_extension_chain, ArtinAlgebra, ArtinHom};
    use crate::brane::{brane_frame, standard_brane};
    use crate::deform::Equivalence;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn eps(n: u32) -> Artin {
        Arc::new(ArtinAlgebra::truncated("e", n).unwrap())
    }

    fn random_elem(rng: &mut ChaCha8Rng, g: &Fdgla, k: i32, alg: &Artin) -> GElem {
        let mut out = AElem::zero(alg);
        for b in alg.maximal_ideal_basis() {
            let v: Coords = (0..g.dim(k)).map(|_| q(rng.gen_range(-3..=3))).collect();
            if !is_zero_vec(&v) {
                out.add_comp(b, v);
            }
        }
        out
    }

    #[test]
    fn fixtures_satisfy_axioms_and_bad_data_is_rejected() {
        for g in [aa_c_fixture(), abelian_fixture(), two_step_fixture(), sl2_fixture(), endomorphism_fixture()] {
            assert!(g.complex().d_squared_is_zero());
            assert_eq!(Fdgla::from_json(&g.to_json()).unwrap(), g);
        }
        let mut br = BTreeMap::new();
        br.insert((0, 1), vec![q(1), q(0)]);
        br.insert((1, 0), vec![q(1), q(0)]);
        assert!(matches!(Fdgla::lie_algebra(2, br), Err(DglaError::Axiom(_))));
        let mut d = BTreeMap::new();
        d.insert(0, ExactMatrix::from_rows(vec![vec![q(1)]]).unwrap());
        let mut br = BTreeMap::new();
        br.insert((1, 0, 1, 0), vec![q(1)]);
        assert!(matches!(Fdgla::new([(0, 1), (1, 1), (2, 1)].into(), d, br), Err(DglaError::Axiom(_))));
    }

    #[test]
    fn mc_residuals() {
        let g = aa_c_fixture();
        let alg = eps(3);
        assert!(mc_check(&g, &AElem::zero(&alg)).unwrap().is_mc);
        let x = g.a_basis(&alg, 1, 0, 1);
        let r = mc_check(&g, &x).unwrap();
        assert!(!r.is_mc);
        assert_eq!(r.residual, AElem::basis_elem(&alg, 2, vec![q(1) / q(2)]));
        let ab = abelian_fixture();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let x = random_elem(&mut rng, &ab, 1, &alg);
            let closed = x.comps().values().all(|v| is_zero_vec(&ab.diff(1, v)));
            assert_eq!(mc_check(&ab, &x).unwrap().is_mc, closed);
        }
    }

    #[test]
    fn gauge_action_laws() {
        let g = endomorphism_fixture();
        let alg = eps(4);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let x = gauge_act(&g, &random_elem(&mut rng, &g, 0, &alg), &AElem::zero(&alg)).unwrap();
            assert!(mc_check(&g, &x).unwrap().is_mc);
            let y = random_elem(&mut rng, &g, 0, &alg);
            let z = random_elem(&mut rng, &g, 0, &alg);
            let out = gauge_act(&g, &y, &x).unwrap();
            assert!(mc_check(&g, &out).unwrap().is_mc);
            assert_eq!(gauge_act(&g, &AElem::zero(&alg), &x).unwrap(), x);
            let lhs = gauge_act(&g, &gauge_mul(&g, &y, &z).unwrap(), &x).unwrap();
            assert_eq!(lhs, gauge_act(&g, &y, &gauge_act(&g, &z, &x).unwrap()).unwrap());
        }
        let ab = abelian_fixture();
        let y = ab.a_basis(&alg, 0, 0, 1);
        let x = ab.a_basis(&alg, 1, 1, 2);
        assert_eq!(gauge_act(&ab, &y, &x).unwrap(), x.sub(&ab.a_diff(0, &y)));
    }

    #[test]
    fn deligne_classification() {
        let ab = abelian_fixture();
        let alg = eps(2);
        match deligne_pi0(&ab, &alg).unwrap() {
            Pi0::VectorSpace { dim, h1_basis } => {
                assert_eq!(dim, 1);
                assert_eq!(h1_basis.len(), 1);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(deligne_pi0(&sl2_fixture(), &alg).unwrap(), Pi0::Singleton);
        let sl2 = sl2_fixture();
        let y = sl2.a_basis(&alg, 0, 1, 1);
        assert!(gauge_act(&sl2, &y, &AElem::zero(&alg)).unwrap().is_zero());
        let x = ab.a_basis(&alg, 1, 1, 1);
        let x2 = ab.a_basis(&alg, 1, 0, 1).add(&x);
        assert_eq!(abelian_class(&ab, &x).unwrap(), abelian_class(&ab, &x2).unwrap());
        assert!(gauge_equivalence(&ab, &x, &x2).unwrap().is_some());
        assert!(gauge_equivalence(&ab, &x, &AElem::zero(&alg)).unwrap().is_none());
    }

    #[test]
    fn nonabelian_orbit_test_at_order_two() {
        let g = endomorphism_fixture();
        let alg = eps(3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let x = gauge_act(&g, &random_elem(&mut rng, &g, 0, &alg), &AElem::zero(&alg)).unwrap();
            let y = random_elem(&mut rng, &g, 0, &alg);
            let x2 = gauge_act(&g, &y, &x).unwrap();
            let found = gauge_equivalence(&g, &x, &x2).unwrap().expect("same orbit");
            assert_eq!(gauge_act(&g, &found, &x).unwrap(), x2);
        }
    }

    #[test]
    fn obstruction_fixture_and_lifting_chain() {
        let g = aa_c_fixture();
        let (a3, a2) = (eps(3), eps(2));
        let ext = SmallExtension { hom: ArtinHom::by_labels(&a3, &a2).unwrap(), kernel_generator: AElem::basis_elem(&a3, 2, q(1)) };
        assert!(ext.check());
        let x = g.a_basis(&a2, 1, 0, 1);
        match obstruction_lift(&g, &ext, &x).unwrap() {
            LiftOutcome::Obstructed { residual, class } => {
                assert_eq!(residual, AElem::basis_elem(&a3, 2, vec![q(1) / q(2)]));
                assert_eq!(class, vec![q(1) / q(2)]);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(obstruction_lift(&g, &ext, &AElem::zero(&a2)).unwrap(), LiftOutcome::Lifted(AElem::zero(&a3)));

        let ground = Arc::new(ArtinAlgebra::ground());
        let chain = small_extension_chain(&ArtinHom::by_labels(&eps(4), &ground).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for g in [two_step_fixture(), abelian_fixture(), endomorphism_fixture()] {
            assert_eq!(g.complex().cohomology(2).unwrap().0, 0);
            for _ in 0..5 {
                let mut x: GElem = AElem::zero(&ground);
                for link in chain.iter().rev() {
                    x = match obstruction_lift(&g, link, &x).unwrap() {
                        LiftOutcome::Lifted(l) => l,
                        other => panic!("H² = 0 but {other:?}"),
                    };
                    let z = kernel(&g.complex().d_matrix(1));
                    if let Some(c) = z.get(rng.gen_range(0..z.len().max(1))) {
                        let e = &link.kernel_generator;
                        x = x.add(&AElem::from_comps(e.alg(), e.comps().iter().map(|(i, s)| (*i, c.scale(s)))));
                    }
                    assert!(mc_check(&g, &x).unwrap().is_mc);
                }
            }
        }
    }

    fn const_level(n: usize) -> Complex {
        Complex::concentrated(0, n)
    }

    #[test]
    fn totalization_examples() {
        let id = GradedMap::identity(&const_level(1));
        let v = SemiCx::new(vec![const_level(1), const_level(1)], vec![vec![id.clone(), id.clone()]]).unwrap();
        let (t, _) = tot(&v).unwrap();
        assert_eq!(t.cohomology(0).unwrap().0, 1);
        assert_eq!(t.cohomology(1).unwrap().0, 1);

        let p0 = ExactMatrix::from_rows(vec![vec![q(0), q(1)]]).unwrap();
        let p1 = ExactMatrix::from_rows(vec![vec![q(1), q(0)]]).unwrap();
        let cech = SemiCx::new(
            vec![const_level(2), const_level(1)],
            vec![vec![GradedMap::new(0, [(0, p0)].into()), GradedMap::new(0, [(0, p1)].into())]],
        )
        .unwrap();
        let (t, _) = tot(&cech).unwrap();
        assert_eq!((t.cohomology(0).unwrap().0, t.cohomology(1).unwrap().0), (1, 0));

        let single = SemiCx::new(vec![const_level(3)], vec![]).unwrap();
        assert_eq!(tot(&single).unwrap().0.dims(), const_level(3).dims());

        let bad = ExactMatrix::from_rows(vec![vec![q(2)]]).unwrap();
        let lv = vec![const_level(1), const_level(1), const_level(1)];
        let fam0 = vec![id.clone(), id.clone()];
        let fam1 = vec![id.clone(), id.clone(), GradedMap::new(0, [(0, bad)].into())];
        assert!(matches!(SemiCx::new(lv, vec![fam0, fam1]), Err(DglaError::Cosimplicial(_))));
    }

    #[test]
    fn totalization_is_functorial() {
        let p0 = ExactMatrix::from_rows(vec![vec![q(0), q(1)]]).unwrap();
        let p1 = ExactMatrix::from_rows(vec![vec![q(1), q(0)]]).unwrap();
        let mk = |n: usize| {
            let lift = |m: &ExactMatrix<Rational>| {
                let mut out = ExactMatrix::zeros(n, 2 * n);
                for i in 0..n {
                    for j in 0..2 {
                        out.set(i, j * n + i, m.get(0, j).clone());
                    }
                }
                GradedMap::new(0, [(0, out)].into())
            };
            SemiCx::new(vec![const_level(2 * n), const_level(n)], vec![vec![lift(&p0), lift(&p1)]]).unwrap()
        };
        let (a, b) = (mk(1), mk(2));
        let (ta, _) = tot(&a).unwrap();
        let (tb, _) = tot(&b).unwrap();
        let f0 = ExactMatrix::from_rows(vec![vec![q(1), q(0)], vec![q(3), q(0)], vec![q(0), q(1)], vec![q(0), q(3)]]).unwrap();
        let f1 = ExactMatrix::from_rows(vec![vec![q(1)], vec![q(3)]]).unwrap();
        assert_eq!(mat_mul(&tb.d_matrix(0), &f0), mat_mul(&f1, &ta.d_matrix(0)));
    }

    #[test]
    fn v_model_on_two_charts() {
        let (gc, brane) = standard_brane(1, 1, 1);
        let model = build_v(&brane, &gc, &NerveCover::two_chart(), 1).unwrap();
        assert!(model.total().d_squared_is_zero());
        let alg = model.algebras();
        assert!(alg.h_basis().len() <= alg.t_basis().len());
        let one = build_v(&brane, &gc, &NerveCover::single(), 1).unwrap();
        let b = one.layout().find(1, 1, 0).unwrap();
        assert_eq!(b.len, alg.t_basis().len());
        let frame = brane_frame(&brane, &gc).unwrap();
        let coh2 = frame.cohomology(2, 2).unwrap();
        let (h2, _) = h2_total(&model).unwrap();
        let (_, rank) = phi_matrix(&model, &frame, &coh2).unwrap();
        assert_eq!(rank, h2);
    }

    #[test]
    fn section_lie_algebras() {
        let (gc, brane) = standard_brane(1, 1, 1);
        let alg = SectionAlgebras::new(&brane, &gc, 1).unwrap();
        let f = brane.curvature().clone();
        assert!(spot_check_lie(&alg.k_basis()[..alg.k_basis().len().min(6)], |a, b| kkk_bracket(a, b, &f)).is_empty());
        assert!(spot_check_lie(&alg.t_basis()[..alg.t_basis().len().min(6)], |a, b| a.ghat_bracket(b)).is_empty());
        let amb = brane.sub().ambient().clone();
        let lin: Vec<QSection> = (0..amb.len())
            .flat_map(|i| (0..amb.len()).map(move |j| (i, j)))
            .map(|(i, j)| QSection::from_vf(crate::cartan::VectorField::coord(&amb, j).mul_fn(&QPoly::var(&amb, i))))
            .collect();
        let space = SectionSpace::new(&amb, 1);
        let flat = |x: &QSection| -> BTreeMap<usize, Rational> {
            space.coords(x).unwrap().into_iter().enumerate().filter(|(_, c)| *c != q(0)).collect()
        };
        let gl = lie_from_span(&lin, flat, |a, b| a.ghat_bracket(b)).unwrap();
        assert!(!gl.is_abelian());
        let quad = vec![QSection::from_vf(crate::cartan::VectorField::coord(&amb, 0).mul_fn(&QPoly::var(&amb, 0))), QSection::from_vf(crate::cartan::VectorField::coord(&amb, 0))];
        let space2 = SectionSpace::new(&amb, 2);
        let flat2 = |x: &QSection| -> BTreeMap<usize, Rational> {
            space2.coords(x).unwrap().into_iter().enumerate().filter(|(_, c)| *c != q(0)).collect()
        };
        let mut quad = quad;
        quad[0] = QSection::from_vf(crate::cartan::VectorField::coord(&amb, 0).mul_fn(&(&QPoly::var(&amb, 0) * &QPoly::var(&amb, 0))));
        assert!(matches!(lie_from_span(&quad, flat2, |a, b| a.ghat_bracket(b)), Err(DglaError::Truncation(_))));
    }

    #[test]
    fn deligne_descent_matches_deform_descent() {
        let (gc, brane) = standard_brane(1, 1, 1);
        let alg_s = SectionAlgebras::new(&brane, &gc, 1).unwrap();
        let alg = eps(2);
        let cover = NerveCover::two_chart();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let tc: Coords = (0..alg_s.t_basis().len()).map(|_| q(rng.gen_range(-2..=2))).collect();
            let kc: Coords = (0..alg_s.k_basis().len()).map(|_| q(rng.gen_range(-2..=2))).collect();
            let x1 = SymElement::exp(&AElem::basis_elem(&alg, 1, alg_s.t_element(&tc))).unwrap();
            let y = AElem::basis_elem(&alg, 1, alg_s.k_element(&kc));
            let x0 = chi(&y).unwrap().mul(&x1).unwrap();
            let dd = DeligneDescent { x: vec![x0, x1], y: [((0, 1), y)].into() };
            assert!(dd.violations(&brane, &gc, &cover).unwrap().is_empty());
            let data = dd.to_deform(&brane, &cover).unwrap();
            assert!(data.validate().is_empty());
            let back = DeligneDescent::from_deform(&brane, &dd.x, &data).unwrap();
            assert_eq!(back, dd);
            let again = back.to_deform(&brane, &cover).unwrap();
            assert_eq!(again, data);
            let _ = Equivalence::identity(&alg, 1);
        }
    }
}
