// SPDX-License-Identifier: MIT OR Apache-2.0
//! Formal deformations of branes over local Artin algebras: bundle and brane deformations, their
//! equivalences and group actions, compatibility with a GC structure, the first-order classification,
//! the Lie algebras `𝔯(Z)` and `𝒦(X)`, the functor `Σ`, descent data and transport functors.
//!
//! A deformation `ρ̂ = ρe^ξ` is stored through its values on the ambient coordinate functions. In the
//! nerve model every vertex of the cover of `Z` uses the full ambient chart as its ambient open set.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::artin::{bch, bilinear, exp_action, AElem, Artin, ArtinAlgebra, ArtinError, Module};
use crate::brane::{edge_key, parse_edge_key, Brane, BraneError, BraneFrame, Cohomology, CoordSubmanifold, HermData, NerveCover};
use crate::cartan::{CartanError, DiffForm, QForm, QVectorField, TimePoly, VectorField};
use crate::courant::{a_apply, a_pairing, aelem_from_json, aelem_json, CourantError, QSection, SymElement};
use crate::gcs::{AlgebroidForm, GCStructure, GcsError};
use crate::ring::{monomials_up_to, q, CPoly, ExactMatrix, GaussianRational, Mono, Poly, QPoly, Rational, RingError, Vars};

/// Errors raised by deformation operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeformError {
    #[error("ρ̂ does not reduce to the restriction map modulo m")]
    BadReduction,
    #[error("ρ̂ is not of the form ρe^ξ")]
    NotRealizable,
    #[error("invalid bundle deformation: {0}")]
    Bundle(String),
    #[error("cover mismatch: {0}")]
    Cover(String),
    #[error("linear system has no solution: {0}")]
    Insoluble(String),
    #[error("invalid equivalence: {0}")]
    Equivalence(String),
    #[error("morphisms are not composable: {0}")]
    NotComposable(String),
    #[error("x' differs from χ(y)x")]
    ChiMismatch,
    #[error("element is not in 𝒦(X): {0}")]
    NotInK(String),
    #[error("choice does not represent the deformation: {0}")]
    BadChoice(String),
    #[error("deformation is not compatible with the GC structure")]
    Incompatible,
    #[error("first-order operations need A = ℝ[ε]/ε²")]
    NotFirstOrder,
    #[error("invalid transport data: {0}")]
    Transport(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Artin(#[from] ArtinError),
    #[error(transparent)]
    Brane(#[from] BraneError),
    #[error(transparent)]
    Courant(#[from] CourantError),
    #[error(transparent)]
    Cartan(#[from] CartanError),
    #[error(transparent)]
    Gcs(#[from] GcsError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// A-valued functions.
pub type AFn = AElem<QPoly>;
/// A-valued forms.
pub type AForm = AElem<QForm>;
/// A-valued vector fields.
pub type AVf = AElem<QVectorField>;

/// Product of A-valued functions.
pub fn a_mul(f: &AFn, g: &AFn) -> Result<AFn, DeformError> {
    Ok(bilinear(f, g, |a, b| a * b)?)
}

/// `e^ξ f` for `ξ ∈ m ⊗ g`.
pub fn exp_fn(xi: &AVf, f: &AFn) -> Result<AFn, DeformError> {
    Ok(exp_action(xi, f, |x, p| x.apply(p))?)
}

/// `e^ξ w = Σ £(ξ)ⁿw / n!`.
pub fn exp_form(xi: &AVf, w: &AForm) -> Result<AForm, DeformError> {
    Ok(exp_action(xi, w, |x, a| a.lie_derivative(x))?)
}

/// `e^{tξ} f` as a polynomial in `t`.
pub fn fn_flow(xi: &AVf, f: &AFn) -> Result<TimePoly<AFn>, DeformError> {
    if !xi.is_in_m() {
        return Err(ArtinError::NotInMaximalIdeal.into());
    }
    let mut coeffs = vec![f.clone()];
    let mut term = f.clone();
    let mut n = 0i64;
    loop {
        n += 1;
        term = bilinear(xi, &term, |x, p| x.apply(p))?.scale(&(q(1) / q(n)));
        if term.is_zero() {
            return Ok(TimePoly::new(coeffs));
        }
        coeffs.push(term.clone());
    }
}

/// `∫₀¹ e^{tξ} k dt`.
pub fn fn_split(xi: &AVf, k: &AFn) -> Result<AFn, DeformError> {
    Ok(fn_flow(xi, k)?.time_integral())
}

/// The unique `k` with `∫₀¹ e^{tξ} k dt = g`.
pub fn fn_split_inverse(xi: &AVf, g: &AFn) -> Result<AFn, DeformError> {
    let mut k = g.clone();
    for _ in 0..g.alg().nilpotency_order() + 1 {
        let excess = fn_split(xi, &k)?.sub(&k);
        let next = g.sub(&excess);
        if next == k {
            return Ok(k);
        }
        k = next;
    }
    Ok(k)
}

/// `d` applied componentwise.
pub fn a_d(f: &AFn) -> AForm {
    f.map(|p| DiffForm::function(p).ext_d())
}

/// `ι(ξ)a` for an A-valued field and a fixed 1-form.
pub fn contract_fixed(a: &QForm, xi: &AVf) -> AFn {
    xi.map(|v| a.contract(v).as_function())
}

fn first_m_index(alg: &Artin) -> Result<usize, DeformError> {
    alg.maximal_ideal_basis().first().copied().ok_or(DeformError::NotFirstOrder)
}

fn require_m<V: Module>(x: &AElem<V>, what: &str) -> Result<(), DeformError> {
    if x.is_in_m() {
        Ok(())
    } else {
        Err(DeformError::Bundle(format!("{what} must lie in the maximal ideal")))
    }
}

fn check_alg(a: &Artin, b: &Artin) -> Result<(), DeformError> {
    if a == b {
        Ok(())
    } else {
        Err(ArtinError::AlgebraMismatch.into())
    }
}

/// `c_IJ` for any ordered pair of vertices, using `c_JI = −c_IJ`.
pub fn oriented_c(herm: &HermData, i: usize, j: usize) -> QPoly {
    match i.cmp(&j) {
        std::cmp::Ordering::Less => herm.c(i, j),
        std::cmp::Ordering::Greater => -&herm.c(j, i),
        std::cmp::Ordering::Equal => QPoly::zero(herm.vars()),
    }
}

/// The deformed restriction `ρ̂`, stored by its values on the ambient coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct RhoHat {
    sub: CoordSubmanifold,
    alg: Artin,
    images: Vec<AFn>,
}

impl RhoHat {
    /// The undeformed restriction `ρ`.
    pub fn identity(sub: &CoordSubmanifold, alg: &Artin) -> Self {
        let images = (0..sub.ambient().len())
            .map(|i| AElem::unit(alg, sub.restrict(&QPoly::var(sub.ambient(), i))))
            .collect();
        RhoHat { sub: sub.clone(), alg: alg.clone(), images }
    }

    /// Validates the reduction `ρ̂ ≡ ρ (mod m)` and realizability.
    pub fn from_images(sub: &CoordSubmanifold, alg: &Artin, images: Vec<AFn>) -> Result<Self, DeformError> {
        if images.len() != sub.ambient().len() {
            return Err(DeformError::Parse(format!("{} images for {} coordinates", images.len(), sub.ambient().len())));
        }
        for (i, im) in images.iter().enumerate() {
            check_alg(im.alg(), alg)?;
            if im.comps().values().any(|p| p.vars() != sub.zvars()) {
                return Err(DeformError::Parse("images must be functions on Z".into()));
            }
            let expected = sub.restrict(&QPoly::var(sub.ambient(), i));
            let unit = im.unit_part().cloned().unwrap_or_else(|| QPoly::zero(sub.zvars()));
            if unit != expected {
                return Err(DeformError::BadReduction);
            }
        }
        let rho = RhoHat { sub: sub.clone(), alg: alg.clone(), images };
        rho.realize()?;
        Ok(rho)
    }

    /// `ρe^ξ` for an ambient `ξ ∈ m ⊗ g(X)`.
    pub fn realized(sub: &CoordSubmanifold, xi: &AVf) -> Result<Self, DeformError> {
        let alg = xi.alg().clone();
        let images = (0..sub.ambient().len())
            .map(|i| {
                let e = exp_fn(xi, &AElem::unit(&alg, QPoly::var(sub.ambient(), i)))?;
                Ok(e.map(|p| sub.restrict(p)))
            })
            .collect::<Result<_, DeformError>>()?;
        Ok(RhoHat { sub: sub.clone(), alg, images })
    }

    pub fn sub(&self) -> &CoordSubmanifold {
        &self.sub
    }

    pub fn alg(&self) -> &Artin {
        &self.alg
    }

    /// `ρ̂(x^i)` for every ambient coordinate, in chart order.
    pub fn images(&self) -> &[AFn] {
        &self.images
    }

    /// `ρ̂(p)` for a real ambient polynomial.
    pub fn apply_poly(&self, p: &QPoly) -> AFn {
        let zv = self.sub.zvars();
        let mut out = AElem::zero(&self.alg);
        for (m, c) in p.terms() {
            let mut t = AElem::unit(&self.alg, QPoly::constant(zv, c.clone()));
            for (i, e) in m.0.iter().enumerate() {
                for _ in 0..*e {
                    t = a_mul(&t, &self.images[i]).expect("images share the algebra");
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// `ρ̂` on an A-valued ambient function.
    pub fn apply_fn(&self, f: &AFn) -> Result<AFn, DeformError> {
        check_alg(f.alg(), &self.alg)?;
        let mut out = AElem::zero(&self.alg);
        for (b, p) in f.comps() {
            out = out.add(&self.apply_poly(p).mul_basis(*b));
        }
        Ok(out)
    }

    /// `ρ̂(c dx^{i₁}∧…) = ρ̂(c) dρ̂(x^{i₁})∧…`.
    pub fn apply_form(&self, w: &AForm) -> Result<AForm, DeformError> {
        check_alg(w.alg(), &self.alg)?;
        let zv = self.sub.zvars();
        let mut out = AElem::zero(&self.alg);
        for (b, wb) in w.comps() {
            for (idx, c) in wb.terms() {
                let mut acc: AForm = self.apply_poly(c).map(DiffForm::function);
                for &i in idx {
                    acc = bilinear(&acc, &a_d(&self.images[i]), |x, y| x.wedge(y))?;
                }
                out = out.add(&acc.mul_basis(*b));
            }
            if wb.terms().next().is_none() && out.is_zero() {
                out.add_comp(*b, DiffForm::zero(zv, wb.degree()));
            }
        }
        Ok(out)
    }

    /// `ρ̂ ∘ e^ξ` for ambient `ξ`.
    pub fn then_exp(&self, xi: &AVf) -> Result<Self, DeformError> {
        check_alg(xi.alg(), &self.alg)?;
        let amb = self.sub.ambient();
        let images = (0..amb.len())
            .map(|i| self.apply_fn(&exp_fn(xi, &AElem::unit(&self.alg, QPoly::var(amb, i)))?))
            .collect::<Result<_, _>>()?;
        Ok(RhoHat { sub: self.sub.clone(), alg: self.alg.clone(), images })
    }

    /// `e^τ ∘ ρ̂` for `τ ∈ m ⊗ g(Z)`.
    pub fn exp_after(&self, tau: &AVf) -> Result<Self, DeformError> {
        check_alg(tau.alg(), &self.alg)?;
        let images = self.images.iter().map(|im| exp_fn(tau, im)).collect::<Result<_, _>>()?;
        Ok(RhoHat { sub: self.sub.clone(), alg: self.alg.clone(), images })
    }

    /// An ambient `ξ ∈ m ⊗ g(X)` with `ρe^ξ = ρ̂`, built order by order in `m`.
    pub fn realize(&self) -> Result<AVf, DeformError> {
        let amb = self.sub.ambient().clone();
        let mut xi: AVf = AElem::zero(&self.alg);
        for _ in 0..self.alg.nilpotency_order() + 2 {
            let cur = Self::realized(&self.sub, &xi)?;
            let resid: Vec<AFn> = self.images.iter().zip(&cur.images).map(|(a, b)| a.sub(b)).collect();
            if resid.iter().all(AElem::is_zero) {
                return Ok(xi);
            }
            if resid.iter().any(|r| !r.is_in_m()) {
                return Err(DeformError::BadReduction);
            }
            let mut corr: AVf = AElem::zero(&self.alg);
            for b in 0..self.alg.dim() {
                let comps: Vec<QPoly> = resid
                    .iter()
                    .map(|r| r.comp(b).map(|p| self.sub.lift(p)).unwrap_or_else(|| QPoly::zero(&amb)))
                    .collect();
                if comps.iter().any(|p| !p.is_zero()) {
                    corr.add_comp(b, VectorField::from_comps(&amb, comps)?);
                }
            }
            xi = xi.add(&corr);
        }
        Err(DeformError::NotRealizable)
    }
}

/// An A-deformation `L̂ = (c + f, a + u)` of cocycle data on `Z`.
#[derive(Clone, Debug, PartialEq)]
pub struct BundleDeformation {
    base: HermData,
    alg: Artin,
    f: BTreeMap<(usize, usize), AFn>,
    u: Vec<AForm>,
}

impl BundleDeformation {
    /// Validates `u_J − u_I = df_IJ` on edges and `f_JK − f_IK + f_IJ = 0` on triangles.
    pub fn new(base: &HermData, alg: &Artin, f: BTreeMap<(usize, usize), AFn>, u: Vec<AForm>) -> Result<Self, DeformError> {
        let cover = base.cover();
        if u.len() != cover.verts() {
            return Err(DeformError::Cover(format!("{} forms for {} charts", u.len(), cover.verts())));
        }
        for ((i, j), fij) in &f {
            if !cover.contains(&[*i, *j]) {
                return Err(DeformError::Cover(format!("f given on non-edge ({i},{j})")));
            }
            check_alg(fij.alg(), alg)?;
            require_m(fij, "f")?;
        }
        for ui in &u {
            check_alg(ui.alg(), alg)?;
            require_m(ui, "u")?;
        }
        let d = BundleDeformation { base: base.clone(), alg: alg.clone(), f, u };
        for (i, j) in cover.edges() {
            if d.u[j].sub(&d.u[i]) != a_d(&d.f(i, j)) {
                return Err(DeformError::Bundle(format!("u_J − u_I ≠ df_IJ on edge ({i},{j})")));
            }
        }
        for (i, j, k) in cover.triangles() {
            if !d.f(j, k).sub(&d.f(i, k)).add(&d.f(i, j)).is_zero() {
                return Err(DeformError::Bundle(format!("f is not a cocycle on triangle ({i},{j},{k})")));
            }
        }
        Ok(d)
    }

    /// The undeformed data `L̂ = L`.
    pub fn trivial(base: &HermData, alg: &Artin) -> Self {
        let u = vec![AElem::zero(alg); base.cover().verts()];
        BundleDeformation { base: base.clone(), alg: alg.clone(), f: BTreeMap::new(), u }
    }

    /// Rebuilds from the deformed data `(ĉ, â)`.
    pub fn from_hat(base: &HermData, alg: &Artin, hat_c: &BTreeMap<(usize, usize), AFn>, hat_a: &[AForm]) -> Result<Self, DeformError> {
        let mut f = BTreeMap::new();
        for ((i, j), c) in hat_c {
            let fij = c.sub(&AElem::unit(alg, base.c(*i, *j)));
            if !fij.is_zero() {
                f.insert((*i, *j), fij);
            }
        }
        let u = hat_a.iter().enumerate().map(|(i, a)| a.sub(&AElem::unit(alg, base.a(i).clone()))).collect();
        Self::new(base, alg, f, u)
    }

    pub fn base(&self) -> &HermData {
        &self.base
    }

    pub fn alg(&self) -> &Artin {
        &self.alg
    }

    /// `f_IJ` for any ordered pair, with `f_JI = −f_IJ`.
    pub fn f(&self, i: usize, j: usize) -> AFn {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.f.get(&(i, j)).cloned().unwrap_or_else(|| AElem::zero(&self.alg)),
            std::cmp::Ordering::Greater => self.f(j, i).neg(),
            std::cmp::Ordering::Equal => AElem::zero(&self.alg),
        }
    }

    pub fn u(&self, i: usize) -> &AForm {
        &self.u[i]
    }

    /// `ĉ_IJ = c_IJ + f_IJ`.
    pub fn hat_c(&self, i: usize, j: usize) -> AFn {
        AElem::unit(&self.alg, oriented_c(&self.base, i, j)).add(&self.f(i, j))
    }

    /// `â_I = a_I + u_I`.
    pub fn hat_a(&self, i: usize) -> AForm {
        AElem::unit(&self.alg, self.base.a(i).clone()).add(&self.u[i])
    }

    fn hat_c_map(&self) -> BTreeMap<(usize, usize), AFn> {
        self.base.cover().edges().into_iter().map(|(i, j)| ((i, j), self.hat_c(i, j))).collect()
    }

    pub fn to_json(&self) -> Value {
        let mut f = Map::new();
        for ((i, j), p) in &self.f {
            f.insert(edge_key(*i, *j), aelem_json(p, Poly::to_json));
        }
        let mut u = Map::new();
        for (i, w) in self.u.iter().enumerate() {
            if !w.is_zero() {
                u.insert(i.to_string(), aelem_json(w, DiffForm::to_json));
            }
        }
        json!({"f": f, "u": u})
    }

    pub fn from_json(v: &Value, base: &HermData, alg: &Artin) -> Result<Self, DeformError> {
        let zv = base.vars().clone();
        let mut f = BTreeMap::new();
        if let Some(obj) = v.get("f").and_then(Value::as_object) {
            for (k, p) in obj {
                let key = parse_edge_key(k)?;
                f.insert(key, aelem_from_json(p, alg, |x| Poly::from_json_in(x, &zv))?);
            }
        }
        let mut u = vec![AElem::zero(alg); base.cover().verts()];
        if let Some(obj) = v.get("u").and_then(Value::as_object) {
            for (k, w) in obj {
                let i: usize = k.parse().map_err(|_| DeformError::Parse(format!("bad vertex key `{k}`")))?;
                if i >= u.len() {
                    return Err(DeformError::Cover(format!("u on unknown chart {i}")));
                }
                u[i] = aelem_from_json(w, alg, |x| DiffForm::from_json(x, &zv))?;
            }
        }
        Self::new(base, alg, f, u)
    }
}

/// `(e^u e^τ)·L̂ = (e^τ ĉ, e^τ â − u)` for a formal symmetry of `Z`.
pub fn bundle_act(g: &SymElement<Rational>, lhat: &BundleDeformation) -> Result<BundleDeformation, DeformError> {
    check_alg(g.alg(), lhat.alg())?;
    let mut hat_c = BTreeMap::new();
    for (i, j) in lhat.base.cover().edges() {
        hat_c.insert((i, j), exp_fn(&g.xi, &lhat.hat_c(i, j))?);
    }
    let hat_a: Vec<AForm> = (0..lhat.u.len())
        .map(|i| Ok(exp_form(&g.xi, &lhat.hat_a(i))?.sub(&g.u)))
        .collect::<Result<_, DeformError>>()?;
    BundleDeformation::from_hat(&lhat.base, &lhat.alg, &hat_c, &hat_a)
}

/// Whether `{g_I}` is a morphism `src → tgt`: `ĉ' − ĉ = g_J − g_I` and `â' − â = dg_I`.
pub fn is_bundle_iso(g: &[AFn], src: &BundleDeformation, tgt: &BundleDeformation) -> bool {
    bundle_iso_violation(g, src, tgt).is_none()
}

fn bundle_iso_violation(g: &[AFn], src: &BundleDeformation, tgt: &BundleDeformation) -> Option<String> {
    if src.base.cover() != tgt.base.cover() || g.len() != src.u.len() || src.alg != tgt.alg {
        return Some("bundle data live on different covers or algebras".into());
    }
    for (i, j) in src.base.cover().edges() {
        if tgt.hat_c(i, j).sub(&src.hat_c(i, j)) != g[j].sub(&g[i]) {
            return Some(format!("ĉ' − ĉ ≠ g_J − g_I on edge ({i},{j})"));
        }
    }
    for (i, gi) in g.iter().enumerate() {
        if tgt.hat_a(i).sub(&src.hat_a(i)) != a_d(gi) {
            return Some(format!("â' − â ≠ dg_I on chart {i}"));
        }
    }
    None
}

/// Solves `g_J − g_I = f_IJ` with `g` vanishing at the least vertex of each component. Returns `{g_I}`
/// and the deformation with undeformed transition functions, together with the morphism
/// `{g_I}: normalized → L̂`.
pub fn normalize_transitions(lhat: &BundleDeformation) -> Result<(Vec<AFn>, BundleDeformation), DeformError> {
    let cover = lhat.base.cover();
    let n = cover.verts();
    let edges = cover.edges();
    let mut root: Vec<usize> = (0..n).collect();
    fn find(r: &mut Vec<usize>, x: usize) -> usize {
        let mut x = x;
        while r[x] != x {
            r[x] = r[r[x]];
            x = r[x];
        }
        x
    }
    for &(i, j) in &edges {
        let (a, b) = (find(&mut root, i), find(&mut root, j));
        root[a.max(b)] = a.min(b);
    }
    let anchors: Vec<usize> = (0..n).filter(|&v| find(&mut root, v) == v).collect();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for &(i, j) in &edges {
        let mut r = vec![q(0); n];
        r[j] = q(1);
        r[i] = q(-1);
        rows.push(r);
    }
    for &v in &anchors {
        let mut r = vec![q(0); n];
        r[v] = q(1);
        rows.push(r);
    }
    let zv = lhat.base.vars().clone();
    let mut keys: BTreeSet<(usize, Mono)> = BTreeSet::new();
    for &(i, j) in &edges {
        for (b, p) in lhat.f(i, j).comps() {
            for (m, _) in p.terms() {
                keys.insert((*b, m.clone()));
            }
        }
    }
    let mut g: Vec<AFn> = vec![AElem::zero(&lhat.alg); n];
    if !keys.is_empty() {
        let mat = ExactMatrix::from_rows(rows)?;
        for (b, m) in keys {
            let mut rhs: Vec<Rational> = edges.iter().map(|&(i, j)| lhat.f(i, j).comp(b).map(|p| p.coeff(&m)).unwrap_or_default()).collect();
            rhs.extend(anchors.iter().map(|_| q(0)));
            let sol = mat
                .solve(&rhs)?
                .ok_or_else(|| DeformError::Insoluble("f_IJ is not a coboundary on this cover".into()))?;
            for (v, c) in sol.into_iter().enumerate() {
                if c != q(0) {
                    g[v].add_comp(b, QPoly::monomial(&zv, m.clone(), c));
                }
            }
        }
    }
    let hat_c: BTreeMap<(usize, usize), AFn> =
        edges.iter().map(|&(i, j)| ((i, j), lhat.hat_c(i, j).sub(&g[j].sub(&g[i])))).collect();
    let hat_a: Vec<AForm> = (0..n).map(|i| lhat.hat_a(i).sub(&a_d(&g[i]))).collect();
    let normalized = BundleDeformation::from_hat(&lhat.base, &lhat.alg, &hat_c, &hat_a)?;
    debug_assert!(is_bundle_iso(&g, &normalized, lhat));
    Ok((g, normalized))
}

/// An A-deformation `B̂ = (ρ̂, L̂)` of a brane.
#[derive(Clone, Debug, PartialEq)]
pub struct BraneDeformation {
    brane: Brane,
    rho: RhoHat,
    bundle: BundleDeformation,
}

impl BraneDeformation {
    pub fn new(brane: &Brane, rho: RhoHat, bundle: BundleDeformation) -> Result<Self, DeformError> {
        check_alg(rho.alg(), bundle.alg())?;
        if rho.sub() != brane.sub() {
            return Err(DeformError::Parse("ρ̂ is defined for a different submanifold".into()));
        }
        if bundle.base() != brane.herm() {
            return Err(DeformError::Parse("bundle deformation has a different base".into()));
        }
        Ok(BraneDeformation { brane: brane.clone(), rho, bundle })
    }

    /// The undeformed brane regarded over `A`.
    pub fn trivial(brane: &Brane, alg: &Artin) -> Self {
        BraneDeformation {
            brane: brane.clone(),
            rho: RhoHat::identity(brane.sub(), alg),
            bundle: BundleDeformation::trivial(brane.herm(), alg),
        }
    }

    pub fn brane(&self) -> &Brane {
        &self.brane
    }

    pub fn rho(&self) -> &RhoHat {
        &self.rho
    }

    pub fn bundle(&self) -> &BundleDeformation {
        &self.bundle
    }

    pub fn alg(&self) -> &Artin {
        self.rho.alg()
    }

    /// `B̂·g = (ρ̂e^ξ, e^{−ρ̂(w)}·L̂)` for `g = e^{(0,w)}e^{(ξ,0)}` on `X`.
    pub fn act(&self, g: &SymElement<Rational>) -> Result<Self, DeformError> {
        check_alg(g.alg(), self.alg())?;
        let rho = self.rho.then_exp(&g.xi)?;
        let shift = self.rho.apply_form(&g.u)?;
        let u: Vec<AForm> = (0..self.bundle.u.len()).map(|i| self.bundle.u[i].add(&shift)).collect();
        let bundle = BundleDeformation::new(&self.bundle.base, &self.bundle.alg, self.bundle.f.clone(), u)?;
        Ok(BraneDeformation { brane: self.brane.clone(), rho, bundle })
    }

    /// Same `ρ̂`, different bundle deformation.
    pub fn with_bundle(&self, bundle: BundleDeformation) -> Result<Self, DeformError> {
        Self::new(&self.brane, self.rho.clone(), bundle)
    }

    pub fn to_json(&self) -> Value {
        let sub = self.brane.sub();
        let img = |i: &usize| aelem_json(&self.rho.images[*i], Poly::to_json);
        json!({
            "artin": self.alg().to_json(),
            "rho": {
                "x": sub.retained().iter().map(img).collect::<Vec<_>>(),
                "y": sub.normal().iter().map(img).collect::<Vec<_>>(),
            },
            "bundle": self.bundle.to_json(),
        })
    }

    /// Parses the JSON written by [`BraneDeformation::to_json`] for a given brane.
    pub fn from_json(v: &Value, brane: &Brane) -> Result<Self, DeformError> {
        let alg = std::sync::Arc::new(ArtinAlgebra::from_json(
            v.get("artin").ok_or_else(|| DeformError::Parse("deformation needs `artin`".into()))?,
        )?);
        let sub = brane.sub();
        let zv = sub.zvars().clone();
        let mut images: Vec<AFn> = RhoHat::identity(sub, &alg).images;
        if let Some(rho) = v.get("rho") {
            for (key, coords) in [("x", sub.retained()), ("y", sub.normal())] {
                if let Some(list) = rho.get(key).and_then(Value::as_array) {
                    if list.len() != coords.len() {
                        return Err(DeformError::Parse(format!("`rho.{key}` needs {} entries", coords.len())));
                    }
                    for (item, &i) in list.iter().zip(coords) {
                        images[i] = aelem_from_json(item, &alg, |p| Poly::from_json_in(p, &zv))?;
                    }
                }
            }
        }
        let rho = RhoHat::from_images(sub, &alg, images)?;
        let bundle = match v.get("bundle") {
            Some(b) => BundleDeformation::from_json(b, brane.herm(), &alg)?,
            None => BundleDeformation::trivial(brane.herm(), &alg),
        };
        Self::new(brane, rho, bundle)
    }
}

/// Per-vertex lifts `u_I` with `ρ(u_I) = â_I − a_I`.
pub fn default_lifts(bd: &BraneDeformation) -> Vec<AForm> {
    let sub = bd.brane.sub();
    bd.bundle.u.iter().map(|u| u.map(|w| sub.lift_form(w))).collect()
}

/// Compatibility using the choices `ρ̂ = ρe^ξ` and `g_I = e^{u_I}e^ξ`.
pub fn compatible_with_choices(bd: &BraneDeformation, gc: &GCStructure, xi: &AVf, lifts: &[AForm]) -> Result<bool, DeformError> {
    let sub = bd.brane.sub();
    if RhoHat::realized(sub, xi)? != bd.rho {
        return Err(DeformError::BadChoice("ρe^ξ ≠ ρ̂".into()));
    }
    if lifts.len() != bd.bundle.u.len() {
        return Err(DeformError::BadChoice("one lift per chart is needed".into()));
    }
    for (i, u) in lifts.iter().enumerate() {
        if u.map(|w| sub.pullback(w)) != bd.bundle.u[i] {
            return Err(DeformError::BadChoice(format!("ρ(u_I) ≠ â_I − a_I on chart {i}")));
        }
    }
    let alg = bd.alg().clone();
    let j = AElem::unit(&alg, gc.endo().clone());
    let gens: Vec<AElem<QSection>> = bd.brane.kb_generators(0).into_iter().map(|k| AElem::unit(&alg, k)).collect();
    for u in lifts {
        let g = SymElement::new(u.clone(), xi.clone())?;
        let gj = g.act_endo(&j)?;
        for k in &gens {
            let jk = a_apply(&gj, k)?;
            for k2 in &gens {
                let p = a_pairing(&jk, k2)?;
                if p.comps().values().any(|c| !sub.vanishes_on(c)) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Whether `B̂` is compatible with `𝕁`, using the canonical choices.
pub fn is_compatible_deformation(bd: &BraneDeformation, gc: &GCStructure) -> Result<bool, DeformError> {
    let xi = bd.rho.realize()?;
    compatible_with_choices(bd, gc, &xi, &default_lifts(bd))
}

/// A morphism `(ψ, z): B̂ → B̂'` with `ψ = (e^τ, {g_I}): B̂ → B̂'·z`; `z = 1` in the groupoid `˜Def`.
#[derive(Clone, Debug, PartialEq)]
pub struct Equivalence {
    pub tau: AVf,
    pub g: Vec<AFn>,
    pub z: SymElement<Rational>,
}

impl Equivalence {
    pub fn new(tau: AVf, g: Vec<AFn>, z: SymElement<Rational>) -> Result<Self, DeformError> {
        check_alg(tau.alg(), z.alg())?;
        if !tau.is_in_m() || g.iter().any(|x| !x.is_in_m()) {
            return Err(DeformError::Equivalence("τ and g_I must lie in the maximal ideal".into()));
        }
        for x in &g {
            check_alg(x.alg(), z.alg())?;
        }
        Ok(Equivalence { tau, g, z })
    }

    /// The identity of an object over `alg` with `verts` charts.
    pub fn identity(alg: &Artin, verts: usize) -> Self {
        Equivalence { tau: AElem::zero(alg), g: vec![AElem::zero(alg); verts], z: SymElement::identity(alg) }
    }

    pub fn alg(&self) -> &Artin {
        self.z.alg()
    }

    /// `self ∘ other = (e^{τ'}e^τ, {e^{τ'}g_I + g'_I}, z'z)`.
    pub fn compose(&self, other: &Self) -> Result<Self, DeformError> {
        if self.alg() != other.alg() || self.g.len() != other.g.len() {
            return Err(DeformError::NotComposable("different algebras or covers".into()));
        }
        let tau = bch(&self.tau, &other.tau, |a, b| a.lie_bracket(b))?;
        let g = other
            .g
            .iter()
            .zip(&self.g)
            .map(|(gi, gpi)| Ok(exp_fn(&self.tau, gi)?.add(gpi)))
            .collect::<Result<_, DeformError>>()?;
        let z = self.z.mul(&other.z)?;
        Ok(Equivalence { tau, g, z })
    }

    /// `(e^{−τ}, {−e^{−τ}g_I}, z⁻¹)`.
    pub fn inverse(&self) -> Result<Self, DeformError> {
        let tau = self.tau.neg();
        let g = self.g.iter().map(|gi| Ok(exp_fn(&tau, gi)?.neg())).collect::<Result<_, DeformError>>()?;
        Ok(Equivalence { tau, g, z: self.z.inverse()? })
    }

    /// Checks `ρ̂_T = e^τρ̂` and `{g_I}: L̂_T → e^τ·L̂` where `B̂_T = tgt·z`.
    pub fn check(&self, src: &BraneDeformation, tgt: &BraneDeformation) -> Result<(), DeformError> {
        if src.alg() != self.alg() || tgt.alg() != self.alg() {
            return Err(DeformError::Equivalence("algebra mismatch".into()));
        }
        if src.brane != tgt.brane {
            return Err(DeformError::Equivalence("deformations of different branes".into()));
        }
        let target = if self.z.is_identity() { tgt.clone() } else { tgt.act(&self.z)? };
        if target.rho != src.rho.exp_after(&self.tau)? {
            return Err(DeformError::Equivalence("ρ̂' ≠ e^τρ̂".into()));
        }
        let moved = bundle_act(&SymElement::diffeo(self.tau.clone()), &src.bundle)?;
        match bundle_iso_violation(&self.g, &target.bundle, &moved) {
            None => Ok(()),
            Some(msg) => Err(DeformError::Equivalence(msg)),
        }
    }

    pub fn is_valid(&self, src: &BraneDeformation, tgt: &BraneDeformation) -> bool {
        self.check(src, tgt).is_ok()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "tau": aelem_json(&self.tau, VectorField::to_json),
            "g": self.g.iter().map(|g| aelem_json(g, Poly::to_json)).collect::<Vec<_>>(),
            "z": self.z.to_json(),
        })
    }

    /// Parses the JSON written by [`Equivalence::to_json`]; missing parts are zero.
    pub fn from_json(v: &Value, brane: &Brane, alg: &Artin) -> Result<Self, DeformError> {
        let zv = brane.sub().zvars().clone();
        let tau = match v.get("tau") {
            None => AElem::zero(alg),
            Some(t) => aelem_from_json(t, alg, |f| VectorField::from_json(f, &zv))?,
        };
        let verts = brane.herm().cover().verts();
        let g = match v.get("g").and_then(Value::as_array) {
            None => vec![AElem::zero(alg); verts],
            Some(list) if list.len() == verts => list
                .iter()
                .map(|x| aelem_from_json(x, alg, |p| Poly::from_json_in(p, &zv)))
                .collect::<Result<_, _>>()?,
            Some(_) => return Err(DeformError::Parse(format!("`g` needs {verts} entries"))),
        };
        let z = match v.get("z") {
            None => SymElement::identity(alg),
            Some(z) => SymElement::from_json(z, alg, brane.sub().ambient())?,
        };
        Self::new(tau, g, z)
    }
}

/// `Ψ' ∘ Ψ`.
pub fn equiv_compose(psi2: &Equivalence, psi: &Equivalence) -> Result<Equivalence, DeformError> {
    psi2.compose(psi)
}

/// Whether the algebra is `ℝ[ε]/ε²`.
pub fn is_first_order(alg: &Artin) -> bool {
    alg.dim() == 2 && alg.nilpotency_order() == 2
}

/// The ambient section `x = (ξ̃, ũ)` along `Z` with `B̂ ≅ B^x`, after normalizing the transitions.
pub fn first_order_section(bd: &BraneDeformation) -> Result<QSection, DeformError> {
    let alg = bd.alg();
    if !is_first_order(alg) {
        return Err(DeformError::NotFirstOrder);
    }
    let e = first_m_index(alg)?;
    let sub = bd.brane.sub();
    let amb = sub.ambient().clone();
    let (_, normalized) = normalize_transitions(&bd.bundle)?;
    let xi = bd.rho.realize()?.comp(e).cloned().unwrap_or_else(|| VectorField::zero(&amb));
    let u = normalized.u[0].comp(e).map(|w| sub.lift_form(w)).unwrap_or_else(|| DiffForm::zero(&amb, 1));
    Ok(sub.restrict_section(&QSection { vf: xi, form: u }))
}

/// `B^x = B·e^{εx̃}` over `ℝ[ε]/ε²`.
pub fn induced_first_order(brane: &Brane, alg: &Artin, x: &QSection) -> Result<BraneDeformation, DeformError> {
    if !is_first_order(alg) {
        return Err(DeformError::NotFirstOrder);
    }
    let e = first_m_index(alg)?;
    let g = SymElement::exp(&AElem::basis_elem(alg, e, x.clone()))?;
    BraneDeformation::trivial(brane, alg).act(&g)
}

/// The class `[μq(x)] ∈ H¹(𝓑)` of a compatible first-order deformation.
pub fn first_order_class(bd: &BraneDeformation, frame: &BraneFrame, coh: &Cohomology) -> Result<Vec<GaussianRational>, DeformError> {
    let x = first_order_section(bd)?;
    match coh.class_of(frame, &frame.normal_mu(&x)) {
        Ok(c) => Ok(c),
        Err(BraneError::NotClosed) => Err(DeformError::Incompatible),
        Err(e) => Err(e.into()),
    }
}

/// A first-order deformation with the given class.
pub fn deformation_of_class(
    brane: &Brane,
    alg: &Artin,
    frame: &BraneFrame,
    coh: &Cohomology,
    class: &[GaussianRational],
) -> Result<BraneDeformation, DeformError> {
    let x = frame.normal_mu_inverse(&coh.from_class(class))?;
    induced_first_order(brane, alg, &x)
}

/// Solves `δ_l f = β` for a function `f` on `Z` with coefficients of degree `≤ bound`.
pub fn solve_delta_function(frame: &BraneFrame, beta: &AlgebroidForm, bound: u32) -> Result<Option<CPoly>, DeformError> {
    let zv = frame.sub().zvars().clone();
    let monos = monomials_up_to(zv.len(), bound);
    let images: Vec<AlgebroidForm> = monos
        .iter()
        .map(|m| frame.delta(&AlgebroidForm::function(&CPoly::monomial(&zv, m.clone(), GaussianRational::from(q(1))))))
        .collect::<Result<_, _>>()?;
    let mut keys: BTreeSet<(Vec<usize>, Mono)> = BTreeSet::new();
    for form in images.iter().chain(std::iter::once(beta)) {
        for (idx, c) in form.terms() {
            for (m, _) in c.terms() {
                keys.insert((idx.clone(), m.clone()));
            }
        }
    }
    let keys: Vec<(Vec<usize>, Mono)> = keys.into_iter().collect();
    let coord = |form: &AlgebroidForm| -> Vec<GaussianRational> { keys.iter().map(|(idx, m)| form.coeff(idx).coeff(m)).collect() };
    if keys.is_empty() {
        return Ok(Some(CPoly::zero(&zv)));
    }
    let cols: Vec<Vec<GaussianRational>> = images.iter().map(coord).collect();
    let mat = ExactMatrix::from_cols(keys.len(), &cols)?;
    Ok(mat.solve(&coord(beta))?.map(|sol| {
        let mut f = CPoly::zero(&zv);
        for (m, c) in monos.iter().zip(sol) {
            f.add_term(m.clone(), c);
        }
        f
    }))
}

/// An equivalence `B^x → B^{x'}` in `Def` when `[μq(x)] = [μq(x')]`: the Hamiltonian part is
/// `z = e^{εx_f̃}` with `−iδ_l f = μq(x) − μq(x')`, and `ψ = (e^{ετ}, {ει(τ)a_I})`.
pub fn first_order_equivalence(
    brane: &Brane,
    gc: &GCStructure,
    frame: &BraneFrame,
    bound: u32,
    alg: &Artin,
    x: &QSection,
    x2: &QSection,
) -> Result<Equivalence, DeformError> {
    if !is_first_order(alg) {
        return Err(DeformError::NotFirstOrder);
    }
    let e = first_m_index(alg)?;
    let sub = brane.sub();
    let i = GaussianRational::new(q(0), q(1));
    let beta = frame.normal_mu(x).add(&frame.normal_mu(x2).neg()).scale(&i);
    let f = solve_delta_function(frame, &beta, bound + 1)?
        .ok_or_else(|| DeformError::Insoluble("μq(x) − μq(x') is not δ-exact in the truncation".into()))?;
    let xf = gc.gen_hamiltonian(&sub.lift(&f));
    let x3 = sub.restrict_section(&x2.add(&xf));
    let diff = x3.sub(&sub.restrict_section(x));
    if !brane.in_kb(&diff) {
        return Err(DeformError::Insoluble("x'' − x is not a section of 𝕋𝓑".into()));
    }
    let tau_vf = sub.restrict_vf(&diff.vf);
    let tau = AElem::basis_elem(alg, e, tau_vf.clone());
    let g = (0..brane.herm().cover().verts())
        .map(|v| AElem::basis_elem(alg, e, brane.herm().a(v).contract(&tau_vf).as_function()))
        .collect();
    let z = SymElement::exp(&AElem::basis_elem(alg, e, xf))?;
    Equivalence::new(tau, g, z)
}

/// The constructive core of trivializability: for a first-order `B̂`, an `x` and an equivalence
/// `B̂ → B^x`, with `x = (Σ φ^I ∂y^I, π^*(u + ι(τ)F))` after straightening the `x^i`-images by `τ`.
pub fn trivialize_first_order(bd: &BraneDeformation) -> Result<(QSection, Equivalence), DeformError> {
    let alg = bd.alg().clone();
    if !is_first_order(&alg) {
        return Err(DeformError::NotFirstOrder);
    }
    let e = first_m_index(&alg)?;
    let brane = &bd.brane;
    let sub = brane.sub();
    let amb = sub.ambient().clone();
    let zv = sub.zvars().clone();
    let (gamma, normalized) = normalize_transitions(&bd.bundle)?;
    let eps = |p: &AFn| p.comp(e).cloned().unwrap_or_else(|| QPoly::zero(&zv));
    let tau_comps: Vec<QPoly> = sub.retained().iter().map(|&i| -&eps(&bd.rho.images[i])).collect();
    let tau_vf = VectorField::from_comps(&zv, tau_comps)?;
    let mut xi_comps = vec![QPoly::zero(&amb); amb.len()];
    for &y in sub.normal() {
        xi_comps[y] = sub.lift(&eps(&bd.rho.images[y]));
    }
    let u = normalized.u[0].comp(e).cloned().unwrap_or_else(|| DiffForm::zero(&zv, 1));
    let w = sub.lift_form(&u.add(&brane.curvature().contract(&tau_vf)));
    let x = QSection { vf: VectorField::from_comps(&amb, xi_comps)?, form: w };
    let target = induced_first_order(brane, &alg, &x)?;
    let g = (0..brane.herm().cover().verts())
        .map(|v| AElem::basis_elem(&alg, e, brane.herm().a(v).contract(&tau_vf).as_function()).add(&gamma[v]))
        .collect();
    let psi = Equivalence::new(AElem::basis_elem(&alg, e, tau_vf), g, SymElement::identity(&alg))?;
    psi.check(bd, &target)?;
    Ok((x, psi))
}

/// An element `(ξ, f)` of `𝔯(Z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RElement {
    pub xi: QVectorField,
    pub f: QPoly,
}

impl RElement {
    pub fn zero(vars: &Vars) -> Self {
        RElement { xi: VectorField::zero(vars), f: QPoly::zero(vars) }
    }
}

impl Module for RElement {
    fn add(&self, other: &Self) -> Self {
        RElement { xi: self.xi.add(&other.xi), f: &self.f + &other.f }
    }
    fn scale(&self, r: &Rational) -> Self {
        RElement { xi: self.xi.scale(r), f: self.f.scale(r) }
    }
    fn is_zero(&self) -> bool {
        self.xi.is_zero() && self.f.is_zero()
    }
}

/// `[(ξ,f),(η,g)] = ([ξ,η], ξ(g) − η(f) + ι(η)ι(ξ)F)`.
pub fn r_bracket(a: &RElement, b: &RElement, curvature: &QForm) -> RElement {
    let twist = curvature.contract(&a.xi).contract(&b.xi).as_function();
    RElement { xi: a.xi.lie_bracket(&b.xi), f: &(&a.xi.apply(&b.f) - &b.xi.apply(&a.f)) + &twist }
}

/// `μ(ξ,f) = (ξ, ι(ξ)F − df)`.
pub fn mu_r(a: &RElement, curvature: &QForm) -> QSection {
    QSection { vf: a.xi.clone(), form: curvature.contract(&a.xi).add(&DiffForm::function(&a.f).ext_d().neg()) }
}

/// An element `((ξ,w),(τ,h))` of `𝒦(X) = 𝒯^𝓑(X) ×_{g(Z)} 𝔯(Z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KKKElement {
    pub ambient: QSection,
    pub boundary: RElement,
}

impl Module for KKKElement {
    fn add(&self, other: &Self) -> Self {
        KKKElement { ambient: self.ambient.add(&other.ambient), boundary: self.boundary.add(&other.boundary) }
    }
    fn scale(&self, r: &Rational) -> Self {
        KKKElement { ambient: self.ambient.scale(r), boundary: Module::scale(&self.boundary, r) }
    }
    fn is_zero(&self) -> bool {
        self.ambient.is_zero() && Module::is_zero(&self.boundary)
    }
}

/// Componentwise bracket on `𝒦(X)`.
pub fn kkk_bracket(a: &KKKElement, b: &KKKElement, curvature: &QForm) -> KKKElement {
    KKKElement { ambient: a.ambient.ghat_bracket(&b.ambient), boundary: r_bracket(&a.boundary, &b.boundary, curvature) }
}

/// Violations of the fiber-product conditions `ρ(ξ) = τ`, `ρ(w) = ι(τ)F − dh`, and of holomorphy when
/// a GC structure is given.
pub fn kkk_violations(brane: &Brane, gc: Option<&GCStructure>, y: &KKKElement) -> Vec<String> {
    let sub = brane.sub();
    let mut out = Vec::new();
    if !sub.is_tangent(&y.ambient.vf) {
        out.push("ξ is not tangent to Z".into());
    } else if sub.restrict_vf(&y.ambient.vf) != y.boundary.xi {
        out.push("ρ(ξ) ≠ τ".into());
    }
    if sub.pullback(&y.ambient.form) != mu_r(&y.boundary, brane.curvature()).form {
        out.push("ρ(w) ≠ ι(τ)F − dh".into());
    }
    if let Some(j) = gc {
        if !crate::courant::GenEndo::inf_action(&y.ambient, j.endo()).is_zero() {
            out.push("(ξ,w) is not generalized holomorphic".into());
        }
    }
    out
}

/// `χ(e^Y) = e^{χ(Y)}`.
pub fn chi(y: &AElem<KKKElement>) -> Result<SymElement<Rational>, DeformError> {
    Ok(SymElement::exp(&y.map(|k| k.ambient.clone()))?)
}

/// `Σ(y): B·x → B·x'` with `g_I = ∫₀¹ e^{tτ}(ι(τ)a_I + h) dt`.
pub fn sigma_morphism(
    brane: &Brane,
    y: &AElem<KKKElement>,
    x: &SymElement<Rational>,
    x2: &SymElement<Rational>,
) -> Result<Equivalence, DeformError> {
    for (_, k) in y.comps() {
        let bad = kkk_violations(brane, None, k);
        if !bad.is_empty() {
            return Err(DeformError::NotInK(bad.join("; ")));
        }
    }
    if chi(y)?.mul(x)? != *x2 {
        return Err(DeformError::ChiMismatch);
    }
    let tau = y.map(|k| k.boundary.xi.clone());
    let h = y.map(|k| k.boundary.f.clone());
    let g = (0..brane.herm().cover().verts())
        .map(|v| fn_split(&tau, &contract_fixed(brane.herm().a(v), &tau).add(&h)))
        .collect::<Result<_, _>>()?;
    Equivalence::new(tau, g, SymElement::identity(y.alg()))
}

/// The `y ∈ e^{𝒦(X)}` with `Σ(y) = ψ` for a morphism `ψ: B·x → B·x'` in `˜Def`.
pub fn sigma_preimage(
    brane: &Brane,
    psi: &Equivalence,
    x: &SymElement<Rational>,
    x2: &SymElement<Rational>,
) -> Result<AElem<KKKElement>, DeformError> {
    if !psi.z.is_identity() {
        return Err(DeformError::Equivalence("Σ lands in the groupoid with trivial Hamiltonian part".into()));
    }
    let alg = psi.alg().clone();
    let sub = brane.sub();
    let amb = sub.ambient().clone();
    let zv = sub.zvars().clone();
    let ambient = x2.mul(&x.inverse()?)?.log()?;
    let mut hs = Vec::new();
    for (v, gv) in psi.g.iter().enumerate() {
        let k = fn_split_inverse(&psi.tau, gv)?;
        hs.push(k.sub(&contract_fixed(brane.herm().a(v), &psi.tau)));
    }
    if hs.windows(2).any(|w| w[0] != w[1]) {
        return Err(DeformError::NotInK("the functions h_I do not glue".into()));
    }
    let h = hs.into_iter().next().unwrap_or_else(|| AElem::zero(&alg));
    let mut out = AElem::zero(&alg);
    for b in 0..alg.dim() {
        let k = KKKElement {
            ambient: ambient.comp(b).cloned().unwrap_or_else(|| QSection::zero(&amb)),
            boundary: RElement {
                xi: psi.tau.comp(b).cloned().unwrap_or_else(|| VectorField::zero(&zv)),
                f: h.comp(b).cloned().unwrap_or_else(|| QPoly::zero(&zv)),
            },
        };
        if !Module::is_zero(&k) {
            let bad = kkk_violations(brane, None, &k);
            if !bad.is_empty() {
                return Err(DeformError::NotInK(bad.join("; ")));
            }
            out.add_comp(b, k);
        }
    }
    Ok(out)
}

/// A located failure of descent data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DescentViolation {
    pub simplex: Vec<usize>,
    pub reason: String,
}

/// Local deformations `B̂_α` on the charts of a cover of `X` with gluing `Ψ_αβ: B̂_β → B̂_α` for `α < β`.
#[derive(Clone, Debug, PartialEq)]
pub struct DescentData {
    cover: NerveCover,
    objects: Vec<BraneDeformation>,
    morphisms: BTreeMap<(usize, usize), Equivalence>,
}

impl DescentData {
    pub fn new(
        cover: NerveCover,
        objects: Vec<BraneDeformation>,
        morphisms: BTreeMap<(usize, usize), Equivalence>,
    ) -> Result<Self, DeformError> {
        if objects.len() != cover.verts() {
            return Err(DeformError::Cover(format!("{} objects for {} charts", objects.len(), cover.verts())));
        }
        let edges: BTreeSet<(usize, usize)> = cover.edges().into_iter().collect();
        if morphisms.keys().cloned().collect::<BTreeSet<_>>() != edges {
            return Err(DeformError::Cover("one gluing morphism per edge is required".into()));
        }
        Ok(DescentData { cover, objects, morphisms })
    }

    /// `R(B̂)`: the same deformation on every chart, glued by identities.
    pub fn restriction(global: &BraneDeformation, cover: &NerveCover) -> Self {
        let verts = global.brane().herm().cover().verts();
        let objects = vec![global.clone(); cover.verts()];
        let morphisms = cover.edges().into_iter().map(|e| (e, Equivalence::identity(global.alg(), verts))).collect();
        DescentData { cover: cover.clone(), objects, morphisms }
    }

    pub fn cover(&self) -> &NerveCover {
        &self.cover
    }

    pub fn objects(&self) -> &[BraneDeformation] {
        &self.objects
    }

    /// `Ψ_αβ: B̂_β → B̂_α` for any pair joined by an edge.
    pub fn morphism(&self, a: usize, b: usize) -> Result<Equivalence, DeformError> {
        match a.cmp(&b) {
            std::cmp::Ordering::Equal => {
                let o = &self.objects[a];
                Ok(Equivalence::identity(o.alg(), o.brane().herm().cover().verts()))
            }
            std::cmp::Ordering::Less => self.morphisms.get(&(a, b)).cloned().ok_or_else(|| DeformError::Cover(format!("no edge ({a},{b})"))),
            std::cmp::Ordering::Greater => self.morphism(b, a)?.inverse(),
        }
    }

    /// Every edge morphism must be an equivalence and `Ψ_αγ = Ψ_αβΨ_βγ` must hold on triangles.
    pub fn validate(&self) -> Vec<DescentViolation> {
        let mut out = Vec::new();
        for ((a, b), psi) in &self.morphisms {
            if let Err(e) = psi.check(&self.objects[*b], &self.objects[*a]) {
                out.push(DescentViolation { simplex: vec![*a, *b], reason: e.to_string() });
            }
        }
        for (a, b, c) in self.cover.triangles() {
            let lhs = &self.morphisms[&(a, c)];
            match self.morphisms[&(a, b)].compose(&self.morphisms[&(b, c)]) {
                Ok(rhs) if rhs == *lhs => {}
                Ok(_) => out.push(DescentViolation { simplex: vec![a, b, c], reason: "Ψ_αγ ≠ Ψ_αβΨ_βγ".into() }),
                Err(e) => out.push(DescentViolation { simplex: vec![a, b, c], reason: e.to_string() }),
            }
        }
        out
    }

    /// Violations of `Ψ'_αβ Φ_β = Φ_α Ψ_αβ` for a family `Φ_α: B̂_α → B̂'_α`.
    pub fn morphism_violations(&self, other: &DescentData, phis: &[Equivalence]) -> Vec<DescentViolation> {
        let mut out = Vec::new();
        if phis.len() != self.objects.len() || other.cover != self.cover {
            out.push(DescentViolation { simplex: vec![], reason: "families live on different covers".into() });
            return out;
        }
        for (v, phi) in phis.iter().enumerate() {
            if let Err(e) = phi.check(&self.objects[v], &other.objects[v]) {
                out.push(DescentViolation { simplex: vec![v], reason: e.to_string() });
            }
        }
        for ((a, b), psi) in &self.morphisms {
            let lhs = other.morphisms[&(*a, *b)].compose(&phis[*b]);
            let rhs = phis[*a].compose(psi);
            match (lhs, rhs) {
                (Ok(l), Ok(r)) if l == r => {}
                _ => out.push(DescentViolation { simplex: vec![*a, *b], reason: "Ψ'_αβΦ_β ≠ Φ_αΨ_αβ".into() }),
            }
        }
        out
    }

    /// A global deformation `B̂` and an isomorphism `R(B̂) → data`, built along a spanning tree from chart 0.
    pub fn reassemble(&self) -> Result<(BraneDeformation, Vec<Equivalence>), DeformError> {
        let bad = self.validate();
        if let Some(v) = bad.first() {
            return Err(DeformError::Cover(format!("descent data fail on {:?}: {}", v.simplex, v.reason)));
        }
        let n = self.objects.len();
        let global = self.objects[0].clone();
        let mut phis: Vec<Option<Equivalence>> = vec![None; n];
        phis[0] = Some(self.morphism(0, 0)?);
        let mut queue = VecDeque::from([0usize]);
        let edges = self.cover.edges();
        while let Some(p) = queue.pop_front() {
            for &(i, j) in &edges {
                let c = if i == p { j } else if j == p { i } else { continue };
                if phis[c].is_none() {
                    let phi_p = phis[p].clone().expect("visited");
                    phis[c] = Some(self.morphism(c, p)?.compose(&phi_p)?);
                    queue.push_back(c);
                }
            }
        }
        let phis: Vec<Equivalence> = phis
            .into_iter()
            .collect::<Option<_>>()
            .ok_or_else(|| DeformError::Cover("the nerve is not connected".into()))?;
        let restricted = DescentData::restriction(&global, &self.cover);
        let bad = restricted.morphism_violations(self, &phis);
        if let Some(v) = bad.first() {
            return Err(DeformError::Cover(format!("reassembly fails on {:?}: {}", v.simplex, v.reason)));
        }
        Ok((global, phis))
    }
}

/// Transport functors between deformation groupoids.
#[derive(Clone, Debug, PartialEq)]
pub enum Transport {
    /// An equivalence `γ = {γ_I}: L → L'`; `L' = (c + γ_J − γ_I, a + dγ_I)`.
    Gauge(Vec<QPoly>),
    /// A refinement `σ` from the charts of `cover` to the current charts.
    Refine { cover: NerveCover, map: Vec<usize> },
    /// A 1-form `u` on `X`, landing in deformations of `e^u·𝓑` for `e^u·𝕁`.
    BTransform(QForm),
}

/// The image of a deformation under a transport functor.
pub fn transport_deformation(bd: &BraneDeformation, mode: &Transport) -> Result<BraneDeformation, DeformError> {
    let brane = bd.brane();
    let herm = brane.herm();
    let alg = bd.alg().clone();
    match mode {
        Transport::Gauge(gamma) => {
            if gamma.len() != herm.cover().verts() || gamma.iter().any(|p| p.vars() != herm.vars()) {
                return Err(DeformError::Transport("γ needs one function on Z per chart".into()));
            }
            let mut c = BTreeMap::new();
            for (i, j) in herm.cover().edges() {
                let cij = &herm.c(i, j) + &(&gamma[j] - &gamma[i]);
                if !cij.is_zero() {
                    c.insert((i, j), cij);
                }
            }
            let a: Vec<QForm> = gamma.iter().enumerate().map(|(i, g)| herm.a(i).add(&DiffForm::function(g).ext_d())).collect();
            let herm2 = HermData::new(herm.vars(), herm.cover().clone(), c, a)?;
            let brane2 = Brane::new(brane.sub().clone(), herm2)?;
            let bundle = BundleDeformation::new(brane2.herm(), &alg, bd.bundle.f.clone(), bd.bundle.u.clone())?;
            BraneDeformation::new(&brane2, bd.rho.clone(), bundle)
        }
        Transport::Refine { cover, map } => {
            let old = herm.cover();
            if map.len() != cover.verts() || map.iter().any(|&v| v >= old.verts()) {
                return Err(DeformError::Transport("σ must send every new chart to an old chart".into()));
            }
            for s in cover.simplices() {
                let img: BTreeSet<usize> = s.iter().map(|&v| map[v]).collect();
                if !old.contains(&img.into_iter().collect::<Vec<_>>()) {
                    return Err(DeformError::Transport(format!("σ does not map simplex {s:?} to a simplex")));
                }
            }
            let mut c = BTreeMap::new();
            let mut f = BTreeMap::new();
            for (i, j) in cover.edges() {
                let cij = oriented_c(herm, map[i], map[j]);
                if !cij.is_zero() {
                    c.insert((i, j), cij);
                }
                let fij = bd.bundle.f(map[i], map[j]);
                if !fij.is_zero() {
                    f.insert((i, j), fij);
                }
            }
            let a: Vec<QForm> = map.iter().map(|&v| herm.a(v).clone()).collect();
            let u: Vec<AForm> = map.iter().map(|&v| bd.bundle.u[v].clone()).collect();
            let herm2 = HermData::new(herm.vars(), cover.clone(), c, a)?;
            let brane2 = Brane::new(brane.sub().clone(), herm2)?;
            let bundle = BundleDeformation::new(brane2.herm(), &alg, f, u)?;
            BraneDeformation::new(&brane2, bd.rho.clone(), bundle)
        }
        Transport::BTransform(u) => {
            if u.degree() != 1 || u.vars() != brane.sub().ambient() {
                return Err(DeformError::Transport("u must be an ambient 1-form".into()));
            }
            let sub = brane.sub();
            let pu = sub.pullback(u);
            let mut c = BTreeMap::new();
            for (i, j) in herm.cover().edges() {
                let cij = herm.c(i, j);
                if !cij.is_zero() {
                    c.insert((i, j), cij);
                }
            }
            let a: Vec<QForm> = herm.connections().iter().map(|w| w.add(&pu.neg())).collect();
            let herm2 = HermData::new(herm.vars(), herm.cover().clone(), c, a)?;
            let brane2 = Brane::new(sub.clone(), herm2)?;
            let shift = bd.rho.apply_form(&AElem::unit(&alg, u.clone()))?;
            let hat_a: Vec<AForm> = (0..herm.cover().verts()).map(|i| bd.bundle.hat_a(i).sub(&shift)).collect();
            let bundle = BundleDeformation::from_hat(brane2.herm(), &alg, &bd.bundle.hat_c_map(), &hat_a)?;
            BraneDeformation::new(&brane2, bd.rho.clone(), bundle)
        }
    }
}

/// The image `(e^τ, {g_I + e^τγ_I − γ_I})` of an equivalence under the gauge functor `Φ^γ`.
pub fn transport_equivalence_gauge(psi: &Equivalence, gamma: &[QPoly]) -> Result<Equivalence, DeformError> {
    let alg = psi.alg().clone();
    let g = psi
        .g
        .iter()
        .zip(gamma)
        .map(|(gi, ga)| {
            let ga = AElem::unit(&alg, ga.clone());
            Ok(gi.add(&exp_fn(&psi.tau, &ga)?).sub(&ga))
        })
        .collect::<Result<_, DeformError>>()?;
    Equivalence::new(psi.tau.clone(), g, psi.z.clone())
}

/// The GC structure `e^u·𝕁`.
pub fn b_transformed_structure(gc: &GCStructure, u: &QForm) -> Result<GCStructure, DeformError> {
    Ok(gc.b_transform(&u.ext_d())?)
}

/// The standard brane `ℝ × ℂ ⊂ ℝ² × ℂ` on two charts with `c₀₁ = s₁`, `a₀ = 0` and `a₁ = ds₁`.
pub fn two_chart_brane() -> (GCStructure, Brane) {
    let (gc, b) = crate::brane::standard_brane(1, 1, 1);
    let zv = b.sub().zvars().clone();
    let s1 = QPoly::var(&zv, 0);
    let mut c = BTreeMap::new();
    c.insert((0, 1), s1.clone());
    let a = vec![DiffForm::zero(&zv, 1), DiffForm::function(&s1).ext_d()];
    let herm = HermData::new(&zv, NerveCover::two_chart(), c, a).expect("transitions match");
    (gc, Brane::new(b.sub().clone(), herm).expect("brane"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brane::{complex_brane, lagrangian_line, standard_brane};
    use crate::cartan::{random_form, random_vf};
    use crate::ring::random_poly;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn eps(n: u32) -> Artin {
        Arc::new(ArtinAlgebra::truncated("e", n).unwrap())
    }

    fn random_sym(rng: &mut ChaCha8Rng, alg: &Artin, vars: &Vars) -> SymElement<Rational> {
        let mut u = AElem::zero(alg);
        let mut xi = AElem::zero(alg);
        for b in alg.maximal_ideal_basis() {
            u.add_comp(b, random_form(rng, vars, 1, 1, 2, 0.6));
            xi.add_comp(b, random_vf(rng, vars, 1, 2, 0.6));
        }
        SymElement::new(u, xi).unwrap()
    }

    #[test]
    fn bundle_action_law_and_identity() {
        let (_, brane) = two_chart_brane();
        let alg = eps(3);
        let zv = brane.sub().zvars().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let triv = BundleDeformation::trivial(brane.herm(), &alg);
        let g1 = random_sym(&mut rng, &alg, &zv);
        let g2 = random_sym(&mut rng, &alg, &zv);
        let l = bundle_act(&g1, &triv).unwrap();
        assert_eq!(bundle_act(&SymElement::identity(&alg), &l).unwrap(), l);
        let lhs = bundle_act(&g2.mul(&g1).unwrap(), &triv).unwrap();
        let rhs = bundle_act(&g2, &l).unwrap();
        assert_eq!(lhs, rhs);
        let u = AElem::basis_elem(&alg, 1, DiffForm::dx(&zv, 0));
        let shifted = bundle_act(&SymElement::b_field(u.clone()), &triv).unwrap();
        assert_eq!(shifted.u(1), &u.neg());
    }

    #[test]
    fn normalization_solves_two_chart_system() {
        let (_, brane) = two_chart_brane();
        let alg = eps(2);
        let zv = brane.sub().zvars().clone();
        let h = AElem::basis_elem(&alg, 1, &QPoly::var(&zv, 0) * &QPoly::var(&zv, 1));
        let mut f = BTreeMap::new();
        f.insert((0, 1), h.clone());
        let u = vec![AElem::zero(&alg), a_d(&h)];
        let l = BundleDeformation::new(brane.herm(), &alg, f, u).unwrap();
        let (g, n) = normalize_transitions(&l).unwrap();
        assert!(g[0].is_zero());
        assert_eq!(g[1], h);
        assert!(n.f(0, 1).is_zero());
        assert!(is_bundle_iso(&g, &n, &l));
    }

    #[test]
    fn brane_action_is_a_right_action() {
        let (_, brane) = complex_brane();
        let alg = eps(3);
        let amb = brane.sub().ambient().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g1 = random_sym(&mut rng, &alg, &amb);
        let g2 = random_sym(&mut rng, &alg, &amb);
        let b = BraneDeformation::trivial(&brane, &alg);
        let lhs = b.act(&g1).unwrap().act(&g2).unwrap();
        let rhs = b.act(&g1.mul(&g2).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(b.act(&SymElement::identity(&alg)).unwrap(), b);
        let xi = lhs.rho().realize().unwrap();
        assert_eq!(RhoHat::realized(brane.sub(), &xi).unwrap(), *lhs.rho());
    }

    #[test]
    fn json_round_trip() {
        let (_, brane) = complex_brane();
        let alg = eps(3);
        let amb = brane.sub().ambient().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let b = BraneDeformation::trivial(&brane, &alg).act(&random_sym(&mut rng, &alg, &amb)).unwrap();
        let back = BraneDeformation::from_json(&b.to_json(), &brane).unwrap();
        assert_eq!(back, b);
    }

    #[test]
    fn compatibility_verdicts() {
        let (gc, brane) = complex_brane();
        let alg = eps(2);
        let amb = brane.sub().ambient().clone();
        let triv = BraneDeformation::trivial(&brane, &alg);
        assert!(is_compatible_deformation(&triv, &gc).unwrap());
        let f = (&QPoly::var(&amb, 0) * &QPoly::var(&amb, 2)).complexify();
        let x = gc.gen_hamiltonian(&f);
        let bx = induced_first_order(&brane, &alg, &x).unwrap();
        assert!(is_compatible_deformation(&bx, &gc).unwrap());
        let bad = QSection::from_vf(VectorField::coord(&amb, 2).mul_fn(&QPoly::var(&amb, 1)));
        let by = induced_first_order(&brane, &alg, &bad).unwrap();
        assert!(!is_compatible_deformation(&by, &gc).unwrap());
    }

    #[test]
    fn compatibility_is_choice_independent() {
        let (gc, brane) = complex_brane();
        let alg = eps(3);
        let amb = brane.sub().ambient().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let f = random_poly(&mut rng, &amb, 2, 3, 0.7).complexify();
        let x = AElem::basis_elem(&alg, 1, gc.gen_hamiltonian(&f));
        let bd = BraneDeformation::trivial(&brane, &alg).act(&SymElement::exp(&x).unwrap()).unwrap();
        let xi = bd.rho().realize().unwrap();
        let y = QPoly::var(&amb, 2);
        let zeta = AElem::basis_elem(&alg, 1, random_vf(&mut rng, &amb, 1, 2, 0.6).mul_fn(&y));
        let xi2 = bch(&zeta, &xi, |a, b| a.lie_bracket(b)).unwrap();
        let beta = AElem::basis_elem(&alg, 2, random_form(&mut rng, &amb, 1, 1, 2, 0.6).mul_fn(&y));
        let lifts: Vec<AForm> = default_lifts(&bd).iter().map(|u| u.add(&beta)).collect();
        let a = compatible_with_choices(&bd, &gc, &xi, &default_lifts(&bd)).unwrap();
        let b = compatible_with_choices(&bd, &gc, &xi2, &lifts).unwrap();
        assert!(a && b);
    }

    #[test]
    fn first_order_round_trip_on_complex_brane() {
        let (gc, brane) = complex_brane();
        let frame = crate::brane::brane_frame(&brane, &gc).unwrap();
        let coh = frame.cohomology(1, 2).unwrap();
        let alg = eps(2);
        let triv = BraneDeformation::trivial(&brane, &alg);
        assert!(first_order_class(&triv, &frame, &coh).unwrap().iter().all(|c| *c == GaussianRational::from(q(0))));
        for j in 0..coh.dim() {
            let mut c = vec![GaussianRational::from(q(0)); coh.dim()];
            c[j] = GaussianRational::new(q(1), q(2));
            let bd = deformation_of_class(&brane, &alg, &frame, &coh, &c).unwrap();
            assert!(is_compatible_deformation(&bd, &gc).unwrap());
            assert_eq!(first_order_class(&bd, &frame, &coh).unwrap(), c);
        }
    }

    #[test]
    fn hamiltonian_modification_is_equivalent() {
        let (gc, brane) = complex_brane();
        let frame = crate::brane::brane_frame(&brane, &gc).unwrap();
        let coh = frame.cohomology(1, 2).unwrap();
        let alg = eps(2);
        let amb = brane.sub().ambient().clone();
        let x = QSection::from_vf(VectorField::coord(&amb, 2));
        let f = (&QPoly::var(&amb, 0) * &QPoly::var(&amb, 3)).complexify();
        let x2 = x.add(&brane.sub().restrict_section(&gc.gen_hamiltonian(&f)));
        let b1 = induced_first_order(&brane, &alg, &x).unwrap();
        let b2 = induced_first_order(&brane, &alg, &x2).unwrap();
        let c1 = first_order_class(&b1, &frame, &coh).unwrap();
        assert!(c1.iter().any(|c| *c != GaussianRational::from(q(0))));
        assert_eq!(c1, first_order_class(&b2, &frame, &coh).unwrap());
        let psi = first_order_equivalence(&brane, &gc, &frame, 2, &alg, &x, &x2).unwrap();
        psi.check(&b1, &b2).unwrap();
    }

    #[test]
    fn lagrangian_line_has_no_first_order_classes() {
        let (gc, brane) = lagrangian_line();
        let frame = crate::brane::brane_frame(&brane, &gc).unwrap();
        let coh = frame.cohomology(1, 3).unwrap();
        assert_eq!(coh.dim(), 0);
        let alg = eps(2);
        let amb = brane.sub().ambient().clone();
        let f = (&QPoly::var(&amb, 0) * &QPoly::var(&amb, 1)).complexify();
        let bd = induced_first_order(&brane, &alg, &gc.gen_hamiltonian(&f)).unwrap();
        assert!(first_order_class(&bd, &frame, &coh).unwrap().is_empty());
    }

    #[test]
    fn equivalence_groupoid_laws() {
        let (_, brane) = two_chart_brane();
        let alg = eps(3);
        let zv = brane.sub().zvars().clone();
        let amb = brane.sub().ambient().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let make = |rng: &mut ChaCha8Rng| {
            let mut tau = AElem::zero(&alg);
            let mut g = vec![AElem::zero(&alg), AElem::zero(&alg)];
            for b in alg.maximal_ideal_basis() {
                tau.add_comp(b, random_vf(rng, &zv, 1, 2, 0.6));
                for gi in g.iter_mut() {
                    gi.add_comp(b, random_poly(rng, &zv, 2, 2, 0.6));
                }
            }
            Equivalence::new(tau, g, random_sym(rng, &alg, &amb)).unwrap()
        };
        let (a, b, c) = (make(&mut rng), make(&mut rng), make(&mut rng));
        let id = Equivalence::identity(&alg, 2);
        assert_eq!(id.compose(&a).unwrap(), a);
        assert_eq!(a.compose(&id).unwrap(), a);
        assert_eq!(a.compose(&b).unwrap().compose(&c).unwrap(), a.compose(&b.compose(&c).unwrap()).unwrap());
        assert_eq!(a.compose(&a.inverse().unwrap()).unwrap(), id);
        assert_eq!(a.inverse().unwrap().compose(&a).unwrap(), id);
    }

    #[test]
    fn equivalences_move_with_the_action() {
        let (_, brane) = two_chart_brane();
        let alg = eps(3);
        let amb = brane.sub().ambient().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = random_sym(&mut rng, &alg, &amb);
        let y = random_sym(&mut rng, &alg, &amb);
        let b = BraneDeformation::trivial(&brane, &alg);
        let bx = b.act(&x).unwrap();
        let bxy = b.act(&x.mul(&y).unwrap()).unwrap();
        let psi = Equivalence::new(AElem::zero(&alg), vec![AElem::zero(&alg); 2], y).unwrap();
        psi.check(&bxy, &bx).unwrap();
        psi.check(&bx, &bx).unwrap_err();
        let back = Equivalence::new(AElem::zero(&alg), vec![AElem::zero(&alg); 2], psi.z.inverse().unwrap()).unwrap();
        back.check(&bx, &bxy).unwrap();
    }

    #[test]
    fn r_bracket_reduces_and_mu_is_a_homomorphism() {
        let zv = crate::ring::vars(&["x1", "x2"]);
        let f = DiffForm::dx(&zv, 0).wedge(&DiffForm::dx(&zv, 1));
        let a = RElement { xi: VectorField::coord(&zv, 0), f: QPoly::zero(&zv) };
        let b = RElement { xi: VectorField::coord(&zv, 1), f: QPoly::zero(&zv) };
        assert_eq!(r_bracket(&a, &b, &f).f, QPoly::constant(&zv, q(1)));
        assert_eq!(r_bracket(&a, &b, &DiffForm::zero(&zv, 2)).f, QPoly::zero(&zv));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let fc = DiffForm::function(&random_poly(&mut rng, &zv, 2, 3, 0.7)).ext_d().ext_d().add(&f.mul_fn(&QPoly::var(&zv, 0)));
        for _ in 0..10 {
            let a = RElement { xi: random_vf(&mut rng, &zv, 2, 3, 0.6), f: random_poly(&mut rng, &zv, 2, 3, 0.6) };
            let b = RElement { xi: random_vf(&mut rng, &zv, 2, 3, 0.6), f: random_poly(&mut rng, &zv, 2, 3, 0.6) };
            assert_eq!(mu_r(&r_bracket(&a, &b, &fc), &fc), mu_r(&a, &fc).ghat_bracket(&mu_r(&b, &fc)));
        }
    }

    fn sample_kkk(brane: &Brane, alg: &Artin, shift: i64) -> AElem<KKKElement> {
        let sub = brane.sub();
        let zv = sub.zvars().clone();
        let tau = VectorField::coord(&zv, 0).mul_fn(&QPoly::var(&zv, 1));
        let h = &QPoly::var(&zv, 0) + &QPoly::constant(&zv, q(shift));
        let boundary = RElement { xi: tau.clone(), f: h };
        let w = sub.lift_form(&mu_r(&boundary, brane.curvature()).form);
        let ambient = QSection { vf: sub.lift_vf(&tau), form: w };
        AElem::basis_elem(alg, 1, KKKElement { ambient, boundary })
    }

    #[test]
    fn sigma_is_functorial_and_fully_faithful() {
        let (_, brane) = two_chart_brane();
        let alg = eps(3);
        let amb = brane.sub().ambient().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = random_sym(&mut rng, &alg, &amb);
        let y1 = sample_kkk(&brane, &alg, 1);
        let y2 = sample_kkk(&brane, &alg, 2).mul_basis(1);
        let x1 = chi(&y1).unwrap().mul(&x).unwrap();
        let x2 = chi(&y2).unwrap().mul(&x1).unwrap();
        let s1 = sigma_morphism(&brane, &y1, &x, &x1).unwrap();
        let s2 = sigma_morphism(&brane, &y2, &x1, &x2).unwrap();
        let b = BraneDeformation::trivial(&brane, &alg);
        s1.check(&b.act(&x).unwrap(), &b.act(&x1).unwrap()).unwrap();
        let f = brane.curvature().clone();
        let y21 = bch(&y2, &y1, |a, c| kkk_bracket(a, c, &f)).unwrap();
        assert_eq!(s2.compose(&s1).unwrap(), sigma_morphism(&brane, &y21, &x, &x2).unwrap());
        assert_eq!(sigma_preimage(&brane, &s1, &x, &x1).unwrap(), y1);
        let y1b = sample_kkk(&brane, &alg, 5);
        assert_ne!(sigma_morphism(&brane, &y1b, &x, &x1).unwrap(), s1);
        assert_eq!(sigma_morphism(&brane, &sigma_preimage(&brane, &s1, &x, &x1).unwrap(), &x, &x1).unwrap(), s1);
        let id = sigma_morphism(&brane, &AElem::zero(&alg), &x, &x).unwrap();
        assert_eq!(id, Equivalence::identity(&alg, 2));
    }

    #[test]
    fn descent_fixtures() {
        let (gc, brane) = two_chart_brane();
        let alg = eps(2);
        let amb = brane.sub().ambient().clone();
        let f = (&QPoly::var(&amb, 0) * &QPoly::var(&amb, 2)).complexify();
        let global = induced_first_order(&brane, &alg, &gc.gen_hamiltonian(&f)).unwrap();
        assert!(DescentData::restriction(&global, &NerveCover::triangle()).validate().is_empty());

        let zv = brane.sub().zvars().clone();
        let mut aut = Equivalence::identity(&alg, 2);
        aut.g = vec![AElem::basis_elem(&alg, 1, QPoly::constant(&zv, q(1))); 2];
        aut.check(&global, &global).unwrap();
        let mut morph = BTreeMap::new();
        morph.insert((0, 1), Equivalence::identity(&alg, 2));
        morph.insert((1, 2), Equivalence::identity(&alg, 2));
        morph.insert((0, 2), aut);
        let broken = DescentData::new(NerveCover::triangle(), vec![global.clone(); 3], morph).unwrap();
        let bad = broken.validate();
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].simplex, vec![0, 1, 2]);
        assert!(broken.reassemble().is_err());

        let frame = crate::brane::brane_frame(&brane, &gc).unwrap();
        let x = QSection::from_vf(VectorField::coord(&amb, 1));
        let g = (&QPoly::var(&amb, 0) * &QPoly::var(&amb, 1)).complexify();
        let x2 = x.add(&brane.sub().restrict_section(&gc.gen_hamiltonian(&g)));
        let b0 = induced_first_order(&brane, &alg, &x).unwrap();
        let b1 = induced_first_order(&brane, &alg, &x2).unwrap();
        let psi = first_order_equivalence(&brane, &gc, &frame, 2, &alg, &x2, &x).unwrap();
        let mut morph = BTreeMap::new();
        morph.insert((0, 1), psi);
        let glued = DescentData::new(NerveCover::two_chart(), vec![b0.clone(), b1], morph).unwrap();
        assert!(glued.validate().is_empty());
        let (g0, phis) = glued.reassemble().unwrap();
        assert_eq!(g0, b0);
        assert_eq!(phis.len(), 2);
    }

    /// The target `T` with `ψ: src → T`, `z = 1`.
    fn target_of(psi: &Equivalence, src: &BraneDeformation) -> BraneDeformation {
        let rho = src.rho().exp_after(&psi.tau).unwrap();
        let moved = bundle_act(&SymElement::diffeo(psi.tau.clone()), src.bundle()).unwrap();
        let hat_c = moved.hat_c_map().into_iter().map(|((i, j), c)| ((i, j), c.sub(&psi.g[j].sub(&psi.g[i])))).collect();
        let hat_a: Vec<AForm> = (0..psi.g.len()).map(|i| moved.hat_a(i).sub(&a_d(&psi.g[i]))).collect();
        let bundle = BundleDeformation::from_hat(moved.base(), moved.alg(), &hat_c, &hat_a).unwrap();
        BraneDeformation::new(src.brane(), rho, bundle).unwrap()
    }

    #[test]
    fn transport_functors() {
        let (gc, brane) = two_chart_brane();
        let alg = eps(2);
        let zv = brane.sub().zvars().clone();
        let amb = brane.sub().ambient().clone();
        let f = (&QPoly::var(&amb, 0) * &QPoly::var(&amb, 2)).complexify();
        let bd = induced_first_order(&brane, &alg, &gc.gen_hamiltonian(&f)).unwrap();
        let zero = vec![QPoly::zero(&zv); 2];
        assert_eq!(transport_deformation(&bd, &Transport::Gauge(zero)).unwrap(), bd);
        let gamma = vec![QPoly::var(&zv, 0), QPoly::zero(&zv)];
        let moved = transport_deformation(&bd, &Transport::Gauge(gamma.clone())).unwrap();
        assert!(is_compatible_deformation(&moved, &gc).unwrap());
        let mut aut = Equivalence::identity(&alg, 2);
        aut.tau = AElem::basis_elem(&alg, 1, VectorField::coord(&zv, 1).mul_fn(&QPoly::var(&zv, 0)));
        aut.g = vec![AElem::basis_elem(&alg, 1, QPoly::var(&zv, 2)), AElem::basis_elem(&alg, 1, QPoly::var(&zv, 1))];
        let target = target_of(&aut, &bd);
        aut.check(&bd, &target).unwrap();
        let t2 = transport_deformation(&target, &Transport::Gauge(gamma.clone())).unwrap();
        transport_equivalence_gauge(&aut, &gamma).unwrap().check(&moved, &t2).unwrap();

        let u = DiffForm::monomial(&QPoly::var(&amb, 0), &[2]);
        let gc2 = b_transformed_structure(&gc, &u).unwrap();
        assert_ne!(&gc2, &gc);
        let bu = transport_deformation(&bd, &Transport::BTransform(u.clone())).unwrap();
        assert!(is_compatible_deformation(&bu, &gc2).unwrap());
        let bad = induced_first_order(&brane, &alg, &QSection::from_vf(VectorField::coord(&amb, 1).mul_fn(&QPoly::var(&amb, 2)))).unwrap();
        assert!(!is_compatible_deformation(&bad, &gc).unwrap());
        let bad_u = transport_deformation(&bad, &Transport::BTransform(u)).unwrap();
        assert!(!is_compatible_deformation(&bad_u, &gc2).unwrap());

        let (gc1, b1) = complex_brane();
        let frame = crate::brane::brane_frame(&b1, &gc1).unwrap();
        let coh = frame.cohomology(1, 2).unwrap();
        let c = vec![GaussianRational::new(q(1), q(-1)); coh.dim()];
        let bd1 = deformation_of_class(&b1, &alg, &frame, &coh, &c).unwrap();
        let refined = transport_deformation(&bd1, &Transport::Refine { cover: NerveCover::two_chart(), map: vec![0, 0] }).unwrap();
        let frame2 = crate::brane::brane_frame(refined.brane(), &gc1).unwrap();
        let coh2 = frame2.cohomology(1, 2).unwrap();
        assert_eq!(first_order_class(&refined, &frame2, &coh2).unwrap(), c);
    }

    #[test]
    fn trivialization_on_standard_fixtures() {
        for (gc, brane) in [standard_brane(1, 1, 0), standard_brane(0, 2, 1), lagrangian_line()] {
            let alg = eps(2);
            let amb = brane.sub().ambient().clone();
            let mut rng = ChaCha8Rng::seed_from_u64(31);
            for _ in 0..3 {
                let f = random_poly(&mut rng, &amb, 2, 3, 0.7).complexify();
                let bd = induced_first_order(&brane, &alg, &gc.gen_hamiltonian(&f)).unwrap();
                let (x, psi) = trivialize_first_order(&bd).unwrap();
                assert!(crate::courant::GenEndo::inf_action(&x, gc.endo()).is_zero());
                psi.check(&bd, &induced_first_order(&brane, &alg, &x).unwrap()).unwrap();
            }
        }
    }
}
