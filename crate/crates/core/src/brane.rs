// SPDX-License-Identifier: MIT OR Apache-2.0
//! Branes on coordinate subspaces: generalized tangent bundles, compatibility, the Lie algebroid `l`
//! and its degree-truncated cohomology.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::cartan::{increasing_tuples, CartanError, DiffForm, QForm, VectorField};
use crate::courant::{CSection, CourantError, GenSection, QSection};
use crate::gcs::{AlgebroidForm, GCStructure, GcsError};
use crate::ring::{
    gi, gq, monomials_up_to, q, CPoly, ExactMatrix, GaussianRational, Mono, Poly, QPoly, Rational, RingError, Scalar,
    Vars,
};

/// Errors raised by brane operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BraneError {
    #[error("coordinate index {0} is out of range")]
    IndexOutOfRange(usize),
    #[error("invalid cover: {0}")]
    Cover(String),
    #[error("a_J − a_I ≠ dc_IJ on edge {0:?}")]
    ConnectionMismatch(Vec<usize>),
    #[error("c is not an integral cocycle on triangle {0:?}")]
    NonIntegralCocycle(Vec<usize>),
    #[error("curvatures da_I disagree")]
    CurvatureMismatch,
    #[error("brane is not compatible with the GC structure")]
    Incompatible,
    #[error("operation needs constant-coefficient data")]
    NonConstant,
    #[error("Poisson rank jumps at sample point {0:?}")]
    Irregular(Vec<String>),
    #[error("degree filtration violated: {0}")]
    Filtration(String),
    #[error("algebroid degree {0} is out of range")]
    Degree(usize),
    #[error("form is not δ_l-closed")]
    NotClosed,
    #[error("eigenspace has dimension {got}, expected {expected}")]
    EigenDimension { expected: usize, got: usize },
    #[error(transparent)]
    Gcs(#[from] GcsError),
    #[error(transparent)]
    Courant(#[from] CourantError),
    #[error(transparent)]
    Cartan(#[from] CartanError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Coordinate subspace `Z = {y^I = 0}` of an ambient chart; the retained coordinates `x^i` chart `Z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordSubmanifold {
    ambient: Vars,
    retained: Vec<usize>,
    normal: Vec<usize>,
    zvars: Vars,
}

impl CoordSubmanifold {
    /// `Z` keeps the ambient coordinates listed in `retained`, in increasing order.
    pub fn new(ambient: &Vars, retained: &[usize]) -> Result<Self, BraneError> {
        let mut r = retained.to_vec();
        r.sort_unstable();
        r.dedup();
        if let Some(&bad) = r.iter().find(|&&i| i >= ambient.len()) {
            return Err(BraneError::IndexOutOfRange(bad));
        }
        let normal = (0..ambient.len()).filter(|i| !r.contains(i)).collect();
        let zvars = crate::ring::vars(&r.iter().map(|&i| ambient[i].clone()).collect::<Vec<_>>());
        Ok(CoordSubmanifold { ambient: ambient.clone(), retained: r, normal, zvars })
    }

    pub fn ambient(&self) -> &Vars {
        &self.ambient
    }

    pub fn zvars(&self) -> &Vars {
        &self.zvars
    }

    pub fn retained(&self) -> &[usize] {
        &self.retained
    }

    pub fn normal(&self) -> &[usize] {
        &self.normal
    }

    pub fn dim(&self) -> usize {
        self.retained.len()
    }

    /// `ρ(p) = p|_Z` in the coordinates of `Z`.
    pub fn restrict<K: Scalar>(&self, p: &Poly<K>) -> Poly<K> {
        let images: Vec<Poly<K>> = (0..self.ambient.len())
            .map(|i| match self.retained.iter().position(|&r| r == i) {
                Some(j) => Poly::var(&self.zvars, j),
                None => Poly::zero(&self.zvars),
            })
            .collect();
        p.substitute(&images, &self.zvars).expect("ambient polynomial")
    }

    /// `π^* p`, the `y`-independent extension of a function on `Z`.
    pub fn lift<K: Scalar>(&self, p: &Poly<K>) -> Poly<K> {
        let images: Vec<Poly<K>> = self.retained.iter().map(|&i| Poly::var(&self.ambient, i)).collect();
        p.substitute(&images, &self.ambient).expect("polynomial on Z")
    }

    /// Sets the `y^I` to zero while staying in the ambient chart.
    pub fn restrict_along<K: Scalar>(&self, p: &Poly<K>) -> Poly<K> {
        p.kill_vars(&self.normal)
    }

    /// Membership in `I^Z`, the ideal of functions vanishing on `Z`.
    pub fn vanishes_on<K: Scalar>(&self, p: &Poly<K>) -> bool {
        p.in_coordinate_ideal(&self.normal)
    }

    /// Whether `ξ` is tangent to `Z`, i.e. `ξ(y^I) ∈ I^Z`.
    pub fn is_tangent<K: Scalar>(&self, xi: &VectorField<K>) -> bool {
        self.normal.iter().all(|&i| self.vanishes_on(xi.comp(i)))
    }

    /// The vector field `ξ|_Z` on `Z` (tangent components only).
    pub fn restrict_vf<K: Scalar>(&self, xi: &VectorField<K>) -> VectorField<K> {
        let comps = self.retained.iter().map(|&i| self.restrict(xi.comp(i))).collect();
        VectorField::from_comps(&self.zvars, comps).expect("retained components")
    }

    /// `π^* ξ` for a vector field on `Z`, with no normal components.
    pub fn lift_vf<K: Scalar>(&self, xi: &VectorField<K>) -> VectorField<K> {
        let mut comps = vec![Poly::zero(&self.ambient); self.ambient.len()];
        for (j, &i) in self.retained.iter().enumerate() {
            comps[i] = self.lift(xi.comp(j));
        }
        VectorField::from_comps(&self.ambient, comps).expect("ambient components")
    }

    /// Pullback `i^* w` to `Z`.
    pub fn pullback<K: Scalar>(&self, w: &DiffForm<K>) -> DiffForm<K> {
        let mut out = DiffForm::zero(&self.zvars, w.degree());
        for (idx, c) in w.terms() {
            let pos: Option<Vec<usize>> = idx.iter().map(|i| self.retained.iter().position(|r| r == i)).collect();
            if let Some(p) = pos {
                out = out.add(&DiffForm::monomial(&self.restrict(c), &p));
            }
        }
        out
    }

    /// `π^* w` for a form on `Z`.
    pub fn lift_form<K: Scalar>(&self, w: &DiffForm<K>) -> DiffForm<K> {
        let mut out = DiffForm::zero(&self.ambient, w.degree());
        for (idx, c) in w.terms() {
            let amb: Vec<usize> = idx.iter().map(|&j| self.retained[j]).collect();
            out = out.add(&DiffForm::monomial(&self.lift(c), &amb));
        }
        out
    }

    /// The section `x|_Z`, written with `y`-independent ambient coefficients.
    pub fn restrict_section<K: Scalar>(&self, x: &GenSection<K>) -> GenSection<K> {
        GenSection { vf: x.vf.map(|c| self.restrict_along(c)), form: x.form.map(|c| self.restrict_along(c)) }
    }

    /// The ambient point with the given `Z` coordinates and `y = 0`.
    pub fn point_of(&self, z: &[Rational]) -> Vec<Rational> {
        let mut p = vec![q(0); self.ambient.len()];
        for (j, &i) in self.retained.iter().enumerate() {
            p[i] = z[j].clone();
        }
        p
    }
}

/// Abstract nerve of a cover: vertices `0..verts` and the increasing tuples of nonempty intersections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NerveCover {
    verts: usize,
    simplices: Vec<Vec<usize>>,
}

impl NerveCover {
    /// Builds a nerve, adding the vertices and checking that every face of a listed simplex is listed.
    pub fn new(verts: usize, simplices: Vec<Vec<usize>>) -> Result<Self, BraneError> {
        if verts == 0 {
            return Err(BraneError::Cover("a cover needs at least one chart".into()));
        }
        let mut all: Vec<Vec<usize>> = (0..verts).map(|v| vec![v]).collect();
        for s in simplices {
            if s.is_empty() || s.windows(2).any(|w| w[0] >= w[1]) {
                return Err(BraneError::Cover(format!("simplex {s:?} is not strictly increasing")));
            }
            if s.iter().any(|&v| v >= verts) {
                return Err(BraneError::Cover(format!("simplex {s:?} has an unknown vertex")));
            }
            if !all.contains(&s) {
                all.push(s);
            }
        }
        for s in &all {
            for r in 0..s.len() {
                let mut face = s.clone();
                face.remove(r);
                if !face.is_empty() && !all.contains(&face) {
                    return Err(BraneError::Cover(format!("face {face:?} of {s:?} is missing")));
                }
            }
        }
        all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Ok(NerveCover { verts, simplices: all })
    }

    /// A single chart.
    pub fn single() -> Self {
        Self::new(1, vec![]).expect("one vertex")
    }

    /// Two charts with nonempty overlap.
    pub fn two_chart() -> Self {
        Self::new(2, vec![vec![0, 1]]).expect("edge")
    }

    /// Three charts with a common triple intersection.
    pub fn triangle() -> Self {
        Self::new(3, vec![vec![0, 1, 2], vec![0, 1], vec![0, 2], vec![1, 2]]).expect("full triangle")
    }

    pub fn verts(&self) -> usize {
        self.verts
    }

    pub fn simplices(&self) -> &[Vec<usize>] {
        &self.simplices
    }

    /// Simplices with `p + 1` vertices.
    pub fn of_dim(&self, p: usize) -> Vec<Vec<usize>> {
        self.simplices.iter().filter(|s| s.len() == p + 1).cloned().collect()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.of_dim(1).into_iter().map(|s| (s[0], s[1])).collect()
    }

    pub fn triangles(&self) -> Vec<(usize, usize, usize)> {
        self.of_dim(2).into_iter().map(|s| (s[0], s[1], s[2])).collect()
    }

    pub fn contains(&self, s: &[usize]) -> bool {
        self.simplices.iter().any(|t| t == s)
    }

    pub fn to_json(&self) -> Value {
        let simplices: Vec<&Vec<usize>> = self.simplices.iter().filter(|s| s.len() > 1).collect();
        json!({"verts": self.verts, "simplices": simplices})
    }

    pub fn from_json(v: &Value) -> Result<Self, BraneError> {
        let verts = v.get("verts").and_then(Value::as_u64).ok_or_else(|| BraneError::Parse("cover needs `verts`".into()))?;
        let simplices = match v.get("simplices") {
            None => vec![],
            Some(s) => s
                .as_array()
                .ok_or_else(|| BraneError::Parse("`simplices` must be a list".into()))?
                .iter()
                .map(|t| index_list(t))
                .collect::<Result<_, _>>()?,
        };
        Self::new(verts as usize, simplices)
    }
}

pub(crate) fn index_list(v: &Value) -> Result<Vec<usize>, BraneError> {
    v.as_array()
        .ok_or_else(|| BraneError::Parse("expected an index list".into()))?
        .iter()
        .map(|i| i.as_u64().map(|i| i as usize).ok_or_else(|| BraneError::Parse("bad index".into())))
        .collect()
}

pub(crate) fn edge_key(i: usize, j: usize) -> String {
    format!("{i},{j}")
}

pub(crate) fn parse_edge_key(s: &str) -> Result<(usize, usize), BraneError> {
    let bad = || BraneError::Parse(format!("bad edge key `{s}`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

/// Cocycle data `({c_IJ}, {a_I})` of a Hermitian line bundle with connection on `Z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HermData {
    vars: Vars,
    cover: NerveCover,
    c: BTreeMap<(usize, usize), QPoly>,
    a: Vec<QForm>,
}

impl HermData {
    /// Validates `a_J − a_I = dc_IJ` on edges, integrality of `c` on triangles and equality of the `da_I`.
    pub fn new(
        vars: &Vars,
        cover: NerveCover,
        c: BTreeMap<(usize, usize), QPoly>,
        a: Vec<QForm>,
    ) -> Result<Self, BraneError> {
        if a.len() != cover.verts() {
            return Err(BraneError::Cover(format!("{} connection forms for {} charts", a.len(), cover.verts())));
        }
        for (i, j) in c.keys() {
            if !cover.contains(&[*i, *j]) {
                return Err(BraneError::Cover(format!("c given on non-edge ({i},{j})")));
            }
        }
        let h = HermData { vars: vars.clone(), cover, c, a };
        for (i, j) in h.cover.edges() {
            let diff = h.a[j].add(&h.a[i].neg());
            if diff != DiffForm::function(&h.c(i, j)).ext_d() {
                return Err(BraneError::ConnectionMismatch(vec![i, j]));
            }
        }
        for (i, j, k) in h.cover.triangles() {
            let s = &(&h.c(j, k) - &h.c(i, k)) + &h.c(i, j);
            let ok = s.degree().map_or(true, |d| d == 0) && s.constant_term().is_integer();
            if !ok {
                return Err(BraneError::NonIntegralCocycle(vec![i, j, k]));
            }
        }
        let f = h.a[0].ext_d();
        if h.a.iter().any(|w| w.ext_d() != f) {
            return Err(BraneError::CurvatureMismatch);
        }
        Ok(h)
    }

    /// Trivial bundle with `c = 0`, `a = 0`.
    pub fn trivial(vars: &Vars, cover: NerveCover) -> Self {
        let a = vec![DiffForm::zero(vars, 1); cover.verts()];
        HermData { vars: vars.clone(), cover, c: BTreeMap::new(), a }
    }

    /// One-chart data with connection form `a`.
    pub fn global(a: QForm) -> Result<Self, BraneError> {
        let vars = a.vars().clone();
        Self::new(&vars, NerveCover::single(), BTreeMap::new(), vec![a])
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn cover(&self) -> &NerveCover {
        &self.cover
    }

    /// `c_IJ` for `I < J`, zero when not recorded.
    pub fn c(&self, i: usize, j: usize) -> QPoly {
        self.c.get(&(i, j)).cloned().unwrap_or_else(|| QPoly::zero(&self.vars))
    }

    pub fn a(&self, i: usize) -> &QForm {
        &self.a[i]
    }

    pub fn connections(&self) -> &[QForm] {
        &self.a
    }

    /// The curvature `F = da_I`.
    pub fn curvature(&self) -> QForm {
        self.a[0].ext_d()
    }

    pub fn to_json(&self) -> Value {
        let mut c = Map::new();
        for ((i, j), p) in &self.c {
            c.insert(edge_key(*i, *j), p.to_json());
        }
        let mut a = Map::new();
        for (i, w) in self.a.iter().enumerate() {
            a.insert(i.to_string(), w.to_json());
        }
        json!({"cover": self.cover.to_json(), "c": c, "a": a})
    }

    pub fn from_json(v: &Value, vars: &Vars) -> Result<Self, BraneError> {
        let cover = match v.get("cover") {
            Some(c) => NerveCover::from_json(c)?,
            None => NerveCover::single(),
        };
        let mut c = BTreeMap::new();
        if let Some(obj) = v.get("c").and_then(Value::as_object) {
            for (k, p) in obj {
                c.insert(parse_edge_key(k)?, Poly::from_json_in(p, vars)?);
            }
        }
        let mut a = vec![DiffForm::zero(vars, 1); cover.verts()];
        if let Some(obj) = v.get("a").and_then(Value::as_object) {
            for (k, w) in obj {
                let i: usize = k.parse().map_err(|_| BraneError::Parse(format!("bad vertex key `{k}`")))?;
                if i >= a.len() {
                    return Err(BraneError::Cover(format!("connection on unknown chart {i}")));
                }
                a[i] = DiffForm::from_json(w, vars)?;
            }
        }
        Self::new(vars, cover, c, a)
    }
}

/// A rank-one brane `(Z, 𝓛)` with curvature `F`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Brane {
    sub: CoordSubmanifold,
    herm: HermData,
    f: QForm,
}

impl Brane {
    pub fn new(sub: CoordSubmanifold, herm: HermData) -> Result<Self, BraneError> {
        if herm.vars() != sub.zvars() {
            return Err(BraneError::Parse("bundle data must live on the coordinates of Z".into()));
        }
        let f = herm.curvature();
        Ok(Brane { sub, herm, f })
    }

    /// Brane with the trivial bundle on a one-chart cover.
    pub fn trivial(sub: CoordSubmanifold) -> Self {
        let herm = HermData::trivial(sub.zvars(), NerveCover::single());
        let f = herm.curvature();
        Brane { sub, herm, f }
    }

    pub fn sub(&self) -> &CoordSubmanifold {
        &self.sub
    }

    pub fn herm(&self) -> &HermData {
        &self.herm
    }

    pub fn curvature(&self) -> &QForm {
        &self.f
    }

    /// Whether the restriction of an ambient section lies in `𝕋(Z, F)`; this is membership in `K^𝓑`.
    pub fn in_kb(&self, x: &QSection) -> bool {
        gen_tangent_membership(&self.sub, &self.f, x)
    }

    /// Generators of `K^𝓑`: `(∂x^i, π^*ι(∂x^i)F)`, `(0, dy^I)` times monomials of degree `≤ deg`, and `y^I e_j`.
    pub fn kb_generators(&self, deg: u32) -> Vec<QSection> {
        let amb = self.sub.ambient().clone();
        let mut base = self.tb_frame();
        base.truncate(self.sub.dim() + self.sub.normal().len());
        let mut out = Vec::new();
        for m in monomials_up_to(amb.len(), deg) {
            let f = Poly::monomial(&amb, m, q(1));
            for b in &base {
                out.push(b.mul_fn(&f));
            }
        }
        for &y in self.sub.normal() {
            let fy = QPoly::var(&amb, y);
            for j in 0..2 * amb.len() {
                out.push(QSection::basis(&amb, j).mul_fn(&fy));
            }
        }
        out
    }

    /// Frame of `𝕋(Z,F)` as ambient sections: `(∂x^i, π^*ι(∂x^i)F)` followed by `(0, dy^I)`.
    pub fn tb_frame(&self) -> Vec<QSection> {
        let amb = self.sub.ambient().clone();
        let zv = self.sub.zvars().clone();
        let mut out = Vec::new();
        for j in 0..self.sub.dim() {
            let a = self.sub.lift_form(&self.f.contract(&VectorField::coord(&zv, j)));
            let x = self.sub.retained()[j];
            out.push(GenSection { vf: VectorField::coord(&amb, x), form: a });
        }
        for &y in self.sub.normal() {
            out.push(QSection::from_form(DiffForm::dx(&amb, y)));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.herm.to_json();
        v["z_coords"] = json!(self.sub.retained());
        v
    }

    /// Parses `{"z_coords", "cover", "c", "a"}` relative to an ambient chart.
    pub fn from_json(v: &Value, ambient: &Vars) -> Result<Self, BraneError> {
        let z = index_list(v.get("z_coords").ok_or_else(|| BraneError::Parse("brane needs `z_coords`".into()))?)?;
        let sub = CoordSubmanifold::new(ambient, &z)?;
        let herm = HermData::from_json(v, sub.zvars())?;
        Self::new(sub, herm)
    }
}

/// `x|_Z ∈ 𝕋(Z,F)`: `ξ` tangent to `Z` and `i^*a = ι(ξ|_Z)F`.
pub fn gen_tangent_membership(sub: &CoordSubmanifold, f: &QForm, x: &QSection) -> bool {
    if !sub.is_tangent(&x.vf) {
        return false;
    }
    let xi = sub.restrict_vf(&x.vf);
    sub.pullback(&x.form) == f.contract(&xi)
}

/// Outcome of a compatibility test; the witness is the first generator pair with `Q_J(k,k')|_Z ≠ 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Compatibility {
    pub compatible: bool,
    pub witness: Option<(usize, usize, QPoly)>,
}

/// Evaluates `Q_J(k, k') = ⟨Jk, k'⟩` on the generators of `K^𝓑`.
pub fn brane_compatible(brane: &Brane, gc: &GCStructure, deg: u32) -> Compatibility {
    let gens = brane.kb_generators(deg);
    let jg: Vec<QSection> = gens.iter().map(|k| gc.apply(k)).collect();
    for (a, jk) in jg.iter().enumerate() {
        for (b, k2) in gens.iter().enumerate() {
            let v = jk.pairing(k2);
            if !brane.sub().vanishes_on(&v) {
                return Compatibility { compatible: false, witness: Some((a, b, brane.sub().restrict(&v))) };
            }
        }
    }
    Compatibility { compatible: true, witness: None }
}

/// Whether `J` maps each generator of `K^𝓑` into `K^𝓑`.
pub fn j_preserves_tb(brane: &Brane, gc: &GCStructure) -> bool {
    brane.kb_generators(0).iter().all(|k| brane.in_kb(&gc.apply(k)))
}

/// Leaf-wise Lagrangian test at rational points of `Z`.
pub fn lwl_check(brane: &Brane, gc: &GCStructure, points: &[Vec<Rational>]) -> Result<bool, BraneError> {
    let sub = brane.sub();
    let n = sub.ambient().len();
    let p = gc.poisson();
    let mut rank0 = None;
    let mut ok = true;
    for z in points {
        let pt = sub.point_of(z);
        let mut pm = ExactMatrix::<Rational>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                pm.set(i, j, p[i][j].eval(&pt)?);
            }
        }
        let r = pm.rank();
        match rank0 {
            None => rank0 = Some(r),
            Some(r0) if r0 != r => {
                return Err(BraneError::Irregular(z.iter().map(crate::ring::fmt_rational).collect()));
            }
            _ => {}
        }
        let rows: Vec<Vec<Rational>> = sub.normal().iter().map(|&y| pm.row(y)).collect();
        let kernel = if rows.is_empty() { unit_vectors(n) } else { ExactMatrix::from_rows(rows)?.kernel_basis() };
        let w: Vec<Vec<Rational>> = kernel.iter().map(|a| pm.mul_vec(a)).collect::<Result<_, _>>()?;
        let dim_w = crate::ring::span_rank(&w, n)?;
        for a1 in &kernel {
            let pa1 = pm.mul_vec(a1)?;
            for a2 in &kernel {
                let v: Rational = a2.iter().zip(&pa1).map(|(x, y)| x * y).sum();
                if !num_traits::Zero::is_zero(&v) {
                    ok = false;
                }
            }
        }
        if 2 * dim_w != r {
            ok = false;
        }
    }
    Ok(ok)
}

/// Standard basis of `Kⁿ`.
pub(crate) fn unit_vectors<K: Scalar>(n: usize) -> Vec<Vec<K>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { K::one() } else { K::zero() }).collect()).collect()
}

/// Integer sample points `{−1, 0, 1, 2}^{dim Z}` of `Z`, truncated to at most 16 points.
pub fn sample_points(sub: &CoordSubmanifold) -> Vec<Vec<Rational>> {
    let vals = [q(0), q(1), q(-1), q(2)];
    let d = sub.dim();
    let mut out = Vec::new();
    for k in 0..16usize {
        let mut p = Vec::with_capacity(d);
        let mut r = k;
        for _ in 0..d {
            p.push(vals[r % 4].clone());
            r /= 4;
        }
        if !out.contains(&p) {
            out.push(p);
        }
        if d == 0 {
            break;
        }
    }
    out
}

/// Constant frames for `𝕋𝓑 ⊗ ℂ = l ⊕ l̄`, the anchors of `l` and a real complement realizing `𝓝𝓑`.
#[derive(Clone, Debug, PartialEq)]
pub struct BraneFrame {
    sub: CoordSubmanifold,
    tb: Vec<QSection>,
    l: Vec<CSection>,
    lbar: Vec<CSection>,
    split_inv: ExactMatrix<GaussianRational>,
    complement: Vec<QSection>,
    mu_inv: ExactMatrix<Rational>,
    anchors: Vec<VectorField<GaussianRational>>,
    structure: BTreeMap<(usize, usize), Vec<CPoly>>,
}

fn constant_matrix(gc: &GCStructure) -> Result<ExactMatrix<Rational>, BraneError> {
    gc.endo().constant_matrix().ok_or(BraneError::NonConstant)
}

fn section_coords<K: Scalar>(x: &GenSection<K>) -> Vec<K> {
    x.to_vec().iter().map(Poly::constant_term).collect()
}

/// Builds the frame; needs constant `J` and `F`.
pub fn brane_frame(brane: &Brane, gc: &GCStructure) -> Result<BraneFrame, BraneError> {
    let sub = brane.sub().clone();
    let amb = sub.ambient().clone();
    let n = amb.len();
    let jm = constant_matrix(gc)?;
    if brane.curvature().terms().any(|(_, c)| c.degree().map_or(false, |d| d > 0)) {
        return Err(BraneError::NonConstant);
    }
    if !j_preserves_tb(brane, gc) {
        return Err(BraneError::Incompatible);
    }
    let tb = brane.tb_frame();
    let coords_in_tb = |s: &QSection| -> Vec<Rational> {
        let mut v: Vec<Rational> = sub.retained().iter().map(|&i| s.vf.comp(i).constant_term()).collect();
        v.extend(sub.normal().iter().map(|&y| s.form.coeff(&[y]).constant_term()));
        v
    };
    let mut m = ExactMatrix::<GaussianRational>::zeros(n, n);
    for (k, t) in tb.iter().enumerate() {
        let jt = QSection::from_vec(&amb, &jm.mul_vec(&section_coords(t))?.iter().map(|c| QPoly::constant(&amb, c.clone())).collect::<Vec<_>>());
        let c = coords_in_tb(&jt);
        let back = tb.iter().zip(&c).fold(QSection::zero(&amb), |acc, (b, ci)| acc.add(&b.scale(ci)));
        if back != jt {
            return Err(BraneError::Incompatible);
        }
        for (j, cj) in c.iter().enumerate() {
            m.set(j, k, gq(cj.clone(), q(0)));
        }
    }
    for i in 0..n {
        let d = m.get(i, i).clone() - gi();
        m.set(i, i, d);
    }
    let ker = m.kernel_basis();
    if 2 * ker.len() != n {
        return Err(BraneError::EigenDimension { expected: n / 2, got: ker.len() });
    }
    let tbc: Vec<CSection> = tb.iter().map(GenSection::complexify).collect();
    let l: Vec<CSection> = ker
        .iter()
        .map(|v| tbc.iter().zip(v).fold(CSection::zero(&amb), |acc, (b, c)| acc.add(&b.scale(c))))
        .collect();
    let lbar: Vec<CSection> = l.iter().map(GenSection::conj).collect();
    let r = l.len();
    let mut split = ExactMatrix::<GaussianRational>::zeros(n, n);
    for (k, v) in ker.iter().enumerate() {
        for (j, c) in v.iter().enumerate() {
            split.set(j, k, c.clone());
            split.set(j, r + k, c.conj());
        }
    }
    let split_inv = split.inverse().ok_or(GcsError::Degenerate)?;
    let mut complement: Vec<QSection> = sub.normal().iter().map(|&y| QSection::from_vf(VectorField::coord(&amb, y))).collect();
    complement.extend(sub.retained().iter().map(|&x| QSection::from_form(DiffForm::dx(&amb, x))));
    let mut mu = ExactMatrix::<Rational>::zeros(n, n);
    for (c, rc) in complement.iter().enumerate() {
        let rcc = rc.complexify();
        for (k, lk) in l.iter().enumerate() {
            let v = rcc.pairing(lk).scale_q(&q(2)).constant_term();
            mu.set(k, c, v.re.clone());
            mu.set(r + k, c, v.im.clone());
        }
    }
    let mu_inv = mu.inverse().ok_or(GcsError::Degenerate)?;
    let zv = sub.zvars().clone();
    let anchors = l.iter().map(|v| sub.restrict_vf(&v.vf)).collect::<Vec<_>>();
    let anchors = anchors
        .into_iter()
        .map(|a| VectorField::from_comps(&zv, a.comps().to_vec()).expect("anchor on Z"))
        .collect();
    let mut frame = BraneFrame {
        sub,
        tb,
        l,
        lbar,
        split_inv,
        complement,
        mu_inv,
        anchors,
        structure: BTreeMap::new(),
    };
    for i in 0..r {
        for j in i + 1..r {
            let b = frame.brane_bracket(&frame.l[i].clone(), &frame.l[j].clone());
            let c = frame.l_coords(&b);
            if c.iter().any(|p| !p.is_zero()) {
                frame.structure.insert((i, j), c);
            }
        }
    }
    Ok(frame)
}

impl BraneFrame {
    pub fn sub(&self) -> &CoordSubmanifold {
        &self.sub
    }

    /// Real constant frame of `𝕋𝓑`.
    pub fn tb(&self) -> &[QSection] {
        &self.tb
    }

    /// Constant frame of `l`.
    pub fn l(&self) -> &[CSection] {
        &self.l
    }

    pub fn lbar(&self) -> &[CSection] {
        &self.lbar
    }

    pub fn rank(&self) -> usize {
        self.l.len()
    }

    /// Complement `R = span{(∂y,0), (0,dx)}` of `𝕋𝓑` in `𝕋X|_Z`.
    pub fn complement(&self) -> &[QSection] {
        &self.complement
    }

    /// Anchors `π(l_k)` as vector fields on `Z`.
    pub fn anchors(&self) -> &[VectorField<GaussianRational>] {
        &self.anchors
    }

    /// Nonzero structure functions: `⟦l_i, l_j⟧_𝓑 = Σ_m c^m_{ij} l_m`.
    pub fn structure(&self) -> &BTreeMap<(usize, usize), Vec<CPoly>> {
        &self.structure
    }

    /// `r(⟦x̃, ỹ⟧)` for lifts `x̃, ỹ` in the ambient chart.
    pub fn brane_bracket(&self, x: &CSection, y: &CSection) -> CSection {
        self.sub.restrict_section(&x.dorfman(y))
    }

    /// Coordinates on `Z` of a section of `l` given along `Z`, read off the `𝕋𝓑` frame.
    pub fn l_coords(&self, s: &CSection) -> Vec<CPoly> {
        let zv = self.sub.zvars().clone();
        let mut tb: Vec<CPoly> = self.sub.retained().iter().map(|&i| self.sub.restrict(s.vf.comp(i))).collect();
        tb.extend(self.sub.normal().iter().map(|&y| self.sub.restrict(&s.form.coeff(&[y]))));
        (0..self.rank())
            .map(|k| tb.iter().enumerate().fold(CPoly::zero(&zv), |acc, (j, p)| &acc + &p.scale(self.split_inv.get(k, j))))
            .collect()
    }

    /// The Chevalley–Eilenberg differential: anchor terms plus structure-function terms.
    pub fn delta(&self, alpha: &AlgebroidForm) -> Result<AlgebroidForm, BraneError> {
        let r = self.rank();
        let k = alpha.degree();
        if k >= r + 1 {
            return Err(BraneError::Degree(k));
        }
        let zv = self.sub.zvars().clone();
        let mut out = AlgebroidForm::zero(&zv, k + 1);
        let eval = |idx: &[usize]| -> CPoly {
            let mut v = idx.to_vec();
            let mut neg = false;
            for i in 0..v.len() {
                for j in 0..v.len().saturating_sub(1 + i) {
                    if v[j] > v[j + 1] {
                        v.swap(j, j + 1);
                        neg = !neg;
                    } else if v[j] == v[j + 1] {
                        return CPoly::zero(&zv);
                    }
                }
            }
            if v.windows(2).any(|w| w[0] == w[1]) {
                return CPoly::zero(&zv);
            }
            let c = alpha.coeff(&v);
            if neg {
                -c
            } else {
                c
            }
        };
        for tup in increasing_tuples(r, k + 1) {
            let mut acc = CPoly::zero(&zv);
            for (i, &ji) in tup.iter().enumerate() {
                let mut rest = tup.clone();
                rest.remove(i);
                let t = self.anchors[ji].apply(&eval(&rest));
                acc = if i % 2 == 0 { &acc + &t } else { &acc - &t };
            }
            for a in 0..tup.len() {
                for b in a + 1..tup.len() {
                    let Some(c) = self.structure.get(&(tup[a], tup[b])) else { continue };
                    let mut rest = tup.clone();
                    rest.remove(b);
                    rest.remove(a);
                    for (m, cm) in c.iter().enumerate() {
                        if cm.is_zero() {
                            continue;
                        }
                        let mut idx = vec![m];
                        idx.extend(&rest);
                        let t = cm * &eval(&idx);
                        acc = if (a + b) % 2 == 0 { &acc + &t } else { &acc - &t };
                    }
                }
            }
            out.add_term(tup, acc);
        }
        Ok(out)
    }

    /// `μ(q(x))(l_k) = 2⟨x, l_k⟩|_Z`.
    pub fn normal_mu(&self, x: &QSection) -> AlgebroidForm {
        let cx = x.complexify();
        let mut out = AlgebroidForm::zero(self.sub.zvars(), 1);
        for (k, v) in self.l.iter().enumerate() {
            out.add_term(vec![k], self.sub.restrict(&cx.pairing(v).scale_q(&q(2))));
        }
        out
    }

    /// The section of the complement `R`, with `y`-independent coefficients, whose `μ` is `α`.
    pub fn normal_mu_inverse(&self, alpha: &AlgebroidForm) -> Result<QSection, BraneError> {
        if alpha.degree() != 1 {
            return Err(BraneError::Degree(alpha.degree()));
        }
        let r = self.rank();
        let zv = self.sub.zvars().clone();
        let mut rhs: Vec<QPoly> = Vec::with_capacity(2 * r);
        for k in 0..r {
            rhs.push(alpha.coeff(&[k]).re_part());
        }
        for k in 0..r {
            rhs.push(alpha.coeff(&[k]).im_part());
        }
        let amb = self.sub.ambient().clone();
        let mut out = QSection::zero(&amb);
        for (c, rc) in self.complement.iter().enumerate() {
            let coef = (0..2 * r).fold(QPoly::zero(&zv), |acc, j| &acc + &rhs[j].scale(self.mu_inv.get(c, j)));
            out = out.add(&rc.mul_fn(&self.sub.lift(&coef)));
        }
        Ok(out)
    }

    /// `H^k` with polynomial coefficients of degree `≤ bound`, modulo `δ` of forms of degree `≤ bound + 1`.
    pub fn cohomology(&self, k: usize, bound: u32) -> Result<Cohomology, BraneError> {
        Cohomology::compute(self, k, bound)
    }
}

/// Basis of algebroid `k`-forms with coefficients of degree `≤ d`, indexed by (tuple, monomial).
#[derive(Clone, Debug, PartialEq)]
struct FormBasis {
    vars: Vars,
    k: usize,
    items: Vec<(Vec<usize>, Mono)>,
    index: BTreeMap<(Vec<usize>, Mono), usize>,
}

impl FormBasis {
    fn new(vars: &Vars, rank: usize, k: usize, d: u32) -> Self {
        let mut items = Vec::new();
        for t in increasing_tuples(rank, k) {
            for m in monomials_up_to(vars.len(), d) {
                items.push((t.clone(), m));
            }
        }
        let index = items.iter().cloned().enumerate().map(|(i, x)| (x, i)).collect();
        FormBasis { vars: vars.clone(), k, items, index }
    }

    fn len(&self) -> usize {
        self.items.len()
    }

    fn element(&self, i: usize) -> AlgebroidForm {
        let (t, m) = &self.items[i];
        let mut a = AlgebroidForm::zero(&self.vars, self.k);
        a.add_term(t.clone(), Poly::monomial(&self.vars, m.clone(), gq(q(1), q(0))));
        a
    }

    fn coords(&self, a: &AlgebroidForm) -> Option<Vec<GaussianRational>> {
        let mut v = vec![gq(q(0), q(0)); self.len()];
        for (t, c) in a.terms() {
            for (m, x) in c.terms() {
                v[*self.index.get(&(t.clone(), m.clone()))?] = x.clone();
            }
        }
        Some(v)
    }

    fn form(&self, v: &[GaussianRational]) -> AlgebroidForm {
        let mut a = AlgebroidForm::zero(&self.vars, self.k);
        for (i, c) in v.iter().enumerate() {
            if !num_traits::Zero::is_zero(c) {
                let (t, m) = &self.items[i];
                a.add_term(t.clone(), Poly::monomial(&self.vars, m.clone(), c.clone()));
            }
        }
        a
    }
}

/// Truncated Lie algebroid cohomology `H^k = Z^k_{≤D} / δ(C^{k−1}_{≤D+1})` with canonical representatives.
#[derive(Clone, Debug, PartialEq)]
pub struct Cohomology {
    k: usize,
    bound: u32,
    reps: Vec<AlgebroidForm>,
    cocycle_dim: usize,
    boundary_dim: usize,
    basis: FormBasis,
    solver: ExactMatrix<GaussianRational>,
    nbound: usize,
}

fn delta_matrix(frame: &BraneFrame, src: &FormBasis, dst: &FormBasis) -> Result<ExactMatrix<GaussianRational>, BraneError> {
    let mut cols = Vec::with_capacity(src.len());
    for i in 0..src.len() {
        let img = frame.delta(&src.element(i))?;
        cols.push(dst.coords(&img).ok_or_else(|| BraneError::Filtration("δ raises the coefficient degree".into()))?);
    }
    Ok(ExactMatrix::from_cols(dst.len(), &cols)?)
}

impl Cohomology {
    fn compute(frame: &BraneFrame, k: usize, bound: u32) -> Result<Self, BraneError> {
        let r = frame.rank();
        if k > r {
            return Err(BraneError::Degree(k));
        }
        let zv = frame.sub().zvars().clone();
        let ck = FormBasis::new(&zv, r, k, bound);
        let next = FormBasis::new(&zv, r, k + 1, bound);
        let zmat = delta_matrix(frame, &ck, &next)?;
        let cocycles = zmat.kernel_basis();
        let boundaries: Vec<Vec<GaussianRational>> = if k == 0 {
            vec![]
        } else {
            let prev = FormBasis::new(&zv, r, k - 1, bound + 1);
            let wide = FormBasis::new(&zv, r, k, bound + 1);
            let b = delta_matrix(frame, &prev, &wide)?;
            let high: Vec<usize> = (0..wide.len()).filter(|&i| wide.items[i].1.degree() > bound).collect();
            let mut hm = ExactMatrix::zeros(high.len(), prev.len());
            for (row, &i) in high.iter().enumerate() {
                for j in 0..prev.len() {
                    hm.set(row, j, b.get(i, j).clone());
                }
            }
            let combos = if high.is_empty() { unit_vectors(prev.len()) } else { hm.kernel_basis() };
            let mut out = Vec::new();
            for c in combos {
                let img = b.mul_vec(&c)?;
                let form = wide.form(&img);
                out.push(ck.coords(&form).expect("low-degree boundary"));
            }
            out
        };
        let (b_rank, b_basis) = independent(&boundaries, ck.len());
        let mut basis = b_basis.clone();
        let mut reps = Vec::new();
        let mut rank = b_rank;
        for z in &cocycles {
            basis.push(z.clone());
            let nr = crate::ring::span_rank(&basis, ck.len())?;
            if nr > rank {
                rank = nr;
                reps.push(z.clone());
            } else {
                basis.pop();
            }
        }
        let solver = ExactMatrix::from_cols(ck.len(), &basis)?;
        let reps_f = reps.iter().map(|v| ck.form(v)).collect();
        Ok(Cohomology {
            k,
            bound,
            reps: reps_f,
            cocycle_dim: cocycles.len(),
            boundary_dim: b_rank,
            basis: ck,
            solver,
            nbound: b_rank,
        })
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    /// Complex dimension.
    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    /// Real dimension of the underlying real vector space.
    pub fn dim_real(&self) -> usize {
        2 * self.reps.len()
    }

    pub fn cocycle_dim(&self) -> usize {
        self.cocycle_dim
    }

    pub fn boundary_dim(&self) -> usize {
        self.boundary_dim
    }

    /// Canonical representatives: cocycles completing the coboundary basis, in basis order.
    pub fn representatives(&self) -> &[AlgebroidForm] {
        &self.reps
    }

    /// Coordinates of the class of a cocycle in the representative basis.
    pub fn class_of(&self, frame: &BraneFrame, alpha: &AlgebroidForm) -> Result<Vec<GaussianRational>, BraneError> {
        if alpha.degree() != self.k {
            return Err(BraneError::Degree(alpha.degree()));
        }
        if !frame.delta(alpha)?.is_zero() {
            return Err(BraneError::NotClosed);
        }
        let v = self
            .basis
            .coords(alpha)
            .ok_or_else(|| BraneError::Filtration(format!("coefficients exceed degree {}", self.bound)))?;
        let sol = self.solver.solve(&v)?.ok_or(BraneError::NotClosed)?;
        Ok(sol[self.nbound..].to_vec())
    }

    /// The cocycle `Σ c_j r_j`.
    pub fn from_class(&self, c: &[GaussianRational]) -> AlgebroidForm {
        self.reps.iter().zip(c).fold(AlgebroidForm::zero(&self.basis.vars, self.k), |acc, (r, x)| acc.add(&r.scale(x)))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "k": self.k,
            "deg": self.bound,
            "dim": self.dim(),
            "dim_real": self.dim_real(),
            "representatives": self.reps.iter().map(AlgebroidForm::to_json).collect::<Vec<_>>(),
        })
    }
}

/// A maximal independent subfamily and its size.
fn independent<K: Scalar>(vecs: &[Vec<K>], dim: usize) -> (usize, Vec<Vec<K>>) {
    if vecs.is_empty() {
        return (0, vec![]);
    }
    let m = ExactMatrix::from_cols(dim, vecs).expect("consistent sizes");
    let (_, piv) = m.rref();
    (piv.len(), piv.iter().map(|&j| vecs[j].clone()).collect())
}

/// `Z₀^k ⊂ X₀^{m,n}`: keeps `s₁..s_m` and `t₁..t_{2k}`, with the trivial bundle.
pub fn standard_brane(m: usize, n: usize, k: usize) -> (GCStructure, Brane) {
    let gc = GCStructure::standard(m, n);
    let mut keep: Vec<usize> = (0..m).collect();
    keep.extend((0..2 * k).map(|j| 2 * m + j));
    let sub = CoordSubmanifold::new(gc.vars(), &keep).expect("standard indices");
    (gc, Brane::trivial(sub))
}

/// The line `{s₂ = 0}` in the symplectic plane.
pub fn lagrangian_line() -> (GCStructure, Brane) {
    standard_brane(1, 0, 0)
}

/// `{s₃ = s₄ = 0} ⊂ (ℝ⁴, ω)` with connection `s₁ ds₂`, hence `F = ds₁∧ds₂ ≠ 0`.
pub fn curved_lagrangian() -> (GCStructure, Brane) {
    let gc = GCStructure::standard_symplectic(2);
    let sub = CoordSubmanifold::new(gc.vars(), &[0, 1]).expect("indices");
    let zv = sub.zvars().clone();
    let a = DiffForm::monomial(&QPoly::var(&zv, 0), &[1]);
    let herm = HermData::global(a).expect("one chart");
    (gc, Brane::new(sub, herm).expect("brane"))
}

/// `ℂ×{0} ⊂ ℂ²` with connection `t₁ dt₂`, so `F = dt₁∧dt₂` of type `(1,1)`.
pub fn complex_brane() -> (GCStructure, Brane) {
    let gc = GCStructure::standard_complex(2);
    let sub = CoordSubmanifold::new(gc.vars(), &[0, 1]).expect("indices");
    let zv = sub.zvars().clone();
    let a = DiffForm::monomial(&QPoly::var(&zv, 0), &[1]);
    let herm = HermData::global(a).expect("one chart");
    (gc, Brane::new(sub, herm).expect("brane"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::vars;

    #[test]
    fn lift_and_restrict_are_inverse_on_z() {
        let amb = vars(&["x1", "x2", "y1"]);
        let sub = CoordSubmanifold::new(&amb, &[0, 1]).unwrap();
        let p = &QPoly::var(sub.zvars(), 0) * &QPoly::var(sub.zvars(), 1);
        assert_eq!(sub.restrict(&sub.lift(&p)), p);
        let y = QPoly::var(&amb, 2);
        assert!(sub.vanishes_on(&(&y * &QPoly::var(&amb, 0))));
        assert!(!sub.vanishes_on(&QPoly::var(&amb, 0)));
    }

    #[test]
    fn tangent_membership_examples() {
        let amb = vars(&["x1", "x2", "y1"]);
        let sub = CoordSubmanifold::new(&amb, &[0, 1]).unwrap();
        let f0 = DiffForm::zero(sub.zvars(), 2);
        let dx1 = QSection::from_vf(VectorField::coord(&amb, 0));
        let dy1 = QSection::from_vf(VectorField::coord(&amb, 2));
        assert!(gen_tangent_membership(&sub, &f0, &dx1));
        assert!(!gen_tangent_membership(&sub, &f0, &dy1));
        let zv = sub.zvars().clone();
        let f = DiffForm::dx(&zv, 0).wedge(&DiffForm::dx(&zv, 1));
        let x = GenSection { vf: VectorField::coord(&amb, 0), form: DiffForm::dx(&amb, 1) };
        assert!(gen_tangent_membership(&sub, &f, &x));
        let yy = dy1.mul_fn(&QPoly::var(&amb, 2));
        assert!(gen_tangent_membership(&sub, &f0, &yy));
    }

    #[test]
    fn compatibility_verdicts() {
        let (gc, b) = standard_brane(1, 1, 1);
        assert!(brane_compatible(&b, &gc, 1).compatible);
        let (gc, b) = standard_brane(2, 1, 0);
        assert!(brane_compatible(&b, &gc, 1).compatible);
        let (gc, b) = curved_lagrangian();
        let c = brane_compatible(&b, &gc, 1);
        assert!(!c.compatible && c.witness.is_some());
        assert!(!j_preserves_tb(&b, &gc));
        let (gc, b) = complex_brane();
        assert!(brane_compatible(&b, &gc, 1).compatible);
        assert!(j_preserves_tb(&b, &gc));
    }

    #[test]
    fn lwl_examples() {
        let (gc, b) = standard_brane(1, 1, 1);
        assert!(lwl_check(&b, &gc, &sample_points(b.sub())).unwrap());
        let gc = GCStructure::standard_symplectic(1);
        let whole = Brane::trivial(CoordSubmanifold::new(gc.vars(), &[0, 1]).unwrap());
        assert!(!lwl_check(&whole, &gc, &sample_points(whole.sub())).unwrap());
        let (gc, b) = complex_brane();
        assert!(lwl_check(&b, &gc, &sample_points(b.sub())).unwrap());
    }

    #[test]
    fn lagrangian_line_cohomology() {
        let (gc, b) = lagrangian_line();
        let fr = brane_frame(&b, &gc).unwrap();
        assert_eq!(fr.rank(), 1);
        assert_eq!(fr.cohomology(0, 3).unwrap().dim(), 1);
        assert_eq!(fr.cohomology(1, 3).unwrap().dim(), 0);
    }

    #[test]
    fn complex_brane_cohomology_counts_holomorphic_normal_sections() {
        let (gc, b) = complex_brane();
        let fr = brane_frame(&b, &gc).unwrap();
        assert_eq!(fr.rank(), 2);
        assert!(fr.structure().is_empty());
        for d in 0..3u32 {
            let h1 = fr.cohomology(1, d).unwrap();
            assert_eq!(h1.dim(), d as usize + 1);
            assert_eq!(h1.dim_real(), 2 * (d as usize + 1));
        }
        assert_eq!(fr.cohomology(0, 2).unwrap().dim(), 3);
    }

    #[test]
    fn delta_agrees_with_anchor_formula() {
        let (gc, b) = complex_brane();
        let fr = brane_frame(&b, &gc).unwrap();
        let cx = crate::gcs::AlgebroidComplex::from_anchors(fr.sub().zvars(), fr.anchors().to_vec());
        let zv = fr.sub().zvars().clone();
        let f = (&QPoly::var(&zv, 0) * &QPoly::var(&zv, 1)).complexify();
        let a0 = AlgebroidForm::function(&f);
        assert_eq!(fr.delta(&a0).unwrap(), cx.delta(&a0).unwrap());
        let d1 = fr.delta(&a0).unwrap();
        assert!(fr.delta(&d1).unwrap().is_zero());
    }

    #[test]
    fn normal_mu_round_trip_and_quotient() {
        let (gc, b) = complex_brane();
        let fr = brane_frame(&b, &gc).unwrap();
        for t in fr.tb() {
            assert!(fr.normal_mu(t).is_zero());
        }
        let zv = fr.sub().zvars().clone();
        let mut alpha = AlgebroidForm::zero(&zv, 1);
        alpha.add_term(vec![0], QPoly::var(&zv, 0).complexify().scale(&gi()));
        alpha.add_term(vec![1], QPoly::one(&zv).complexify());
        let x = fr.normal_mu_inverse(&alpha).unwrap();
        assert_eq!(fr.normal_mu(&x), alpha);
    }

    #[test]
    fn hamiltonian_restriction_lemma() {
        for (gc, b) in [lagrangian_line(), complex_brane(), standard_brane(1, 1, 0)] {
            let fr = brane_frame(&b, &gc).unwrap();
            let amb = gc.vars().clone();
            let f = (&QPoly::var(&amb, 0) * &QPoly::var(&amb, amb.len() - 1)).complexify()
                + QPoly::var(&amb, 0).pow(2).complexify().scale(&gi());
            let xf = gc.gen_hamiltonian(&f);
            let lhs = fr.normal_mu(&b.sub().restrict_section(&xf));
            let rhs = fr.delta(&AlgebroidForm::function(&b.sub().restrict(&f))).unwrap().scale(&-gi());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn brane_json_round_trip() {
        let (gc, b) = complex_brane();
        let v = b.to_json();
        assert_eq!(Brane::from_json(&v, gc.vars()).unwrap(), b);
    }

    #[test]
    fn herm_data_validation() {
        let zv = vars(&["x"]);
        let cover = NerveCover::two_chart();
        let mut c = BTreeMap::new();
        c.insert((0, 1), QPoly::var(&zv, 0));
        let a = vec![DiffForm::zero(&zv, 1), DiffForm::dx(&zv, 0)];
        assert!(HermData::new(&zv, cover.clone(), c.clone(), a).is_ok());
        let bad = vec![DiffForm::zero(&zv, 1), DiffForm::zero(&zv, 1)];
        assert_eq!(HermData::new(&zv, cover, c, bad), Err(BraneError::ConnectionMismatch(vec![0, 1])));
        assert!(NerveCover::new(3, vec![vec![0, 1, 2]]).is_err());
    }
}
