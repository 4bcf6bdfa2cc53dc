// SPDX-License-Identifier: MIT OR Apache-2.0
//! The standard Courant algebroid `TX ⊕ T*X` and its formal symmetry group `e^{ĝ_A(X)}`.

use serde_json::{json, Value};
use thiserror::Error;

use crate::artin::{bilinear, exp_action, AElem, Artin, ArtinError, Module};
use crate::cartan::{CartanError, DiffForm, TimePoly, VectorField};
use crate::ring::{q, qf, GaussianRational, Poly, Rational, RingError, Scalar, Vars};

/// Errors raised by Courant-algebroid operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CourantError {
    #[error("chart mismatch")]
    ChartMismatch,
    #[error("B-field is not closed")]
    NotClosed,
    #[error("expected a {expected}-form, got a {got}-form")]
    WrongDegree { expected: usize, got: usize },
    #[error("endomorphism has size {got}, expected {expected}")]
    WrongSize { expected: usize, got: usize },
    #[error(transparent)]
    Artin(#[from] ArtinError),
    #[error(transparent)]
    Cartan(#[from] CartanError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Section `(ξ, a)` of `TX ⊕ T*X`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenSection<K: Scalar> {
    pub vf: VectorField<K>,
    pub form: DiffForm<K>,
}

/// Rational section.
pub type QSection = GenSection<Rational>;
/// Complexified section.
pub type CSection = GenSection<GaussianRational>;
/// Section with coefficients in an Artin algebra.
pub type ASection<K> = AElem<GenSection<K>>;

impl<K: Scalar> GenSection<K> {
    pub fn new(vf: VectorField<K>, form: DiffForm<K>) -> Result<Self, CourantError> {
        if vf.vars() != form.vars() {
            return Err(CourantError::ChartMismatch);
        }
        if form.degree() != 1 && !form.is_zero() {
            return Err(CourantError::WrongDegree { expected: 1, got: form.degree() });
        }
        let form = if form.is_zero() { DiffForm::zero(vf.vars(), 1) } else { form };
        Ok(GenSection { vf, form })
    }

    pub fn zero(vars: &Vars) -> Self {
        GenSection { vf: VectorField::zero(vars), form: DiffForm::zero(vars, 1) }
    }

    /// `(ξ, 0)`.
    pub fn from_vf(vf: VectorField<K>) -> Self {
        let form = DiffForm::zero(vf.vars(), 1);
        GenSection { vf, form }
    }

    /// `(0, a)`.
    pub fn from_form(form: DiffForm<K>) -> Self {
        GenSection { vf: VectorField::zero(form.vars()), form }
    }

    /// Constant frame: `(∂_j, 0)` for `j < n`, then `(0, dx^{j−n})`.
    pub fn basis(vars: &Vars, j: usize) -> Self {
        let n = vars.len();
        if j < n {
            Self::from_vf(VectorField::coord(vars, j))
        } else {
            Self::from_form(DiffForm::dx(vars, j - n))
        }
    }

    /// Components `(ξ¹..ξⁿ, a₁..aₙ)`.
    pub fn to_vec(&self) -> Vec<Poly<K>> {
        let mut v = self.vf.comps().to_vec();
        v.extend(self.form.one_form_comps());
        v
    }

    pub fn from_vec(vars: &Vars, v: &[Poly<K>]) -> Self {
        let n = vars.len();
        GenSection {
            vf: VectorField::from_comps(vars, v[..n].to_vec()).expect("component count"),
            form: DiffForm::one_form(vars, &v[n..]),
        }
    }

    pub fn vars(&self) -> &Vars {
        self.vf.vars()
    }

    pub fn is_zero(&self) -> bool {
        self.vf.is_zero() && self.form.is_zero()
    }

    /// The anchor `π(ξ, a) = ξ`.
    pub fn anchor(&self) -> &VectorField<K> {
        &self.vf
    }

    pub fn add(&self, other: &Self) -> Self {
        GenSection { vf: self.vf.add(&other.vf), form: self.form.add(&other.form) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        GenSection { vf: self.vf.neg(), form: self.form.neg() }
    }

    pub fn scale(&self, k: &K) -> Self {
        GenSection { vf: self.vf.scale(k), form: self.form.scale(k) }
    }

    pub fn mul_fn(&self, f: &Poly<K>) -> Self {
        GenSection { vf: self.vf.mul_fn(f), form: self.form.mul_fn(f) }
    }

    pub fn map_coeffs<L: Scalar, F: Fn(&K) -> L + Copy>(&self, f: F) -> GenSection<L> {
        GenSection { vf: self.vf.map_coeffs(f), form: self.form.map_coeffs(f) }
    }

    pub fn complexify(&self) -> CSection {
        GenSection { vf: self.vf.complexify(), form: self.form.complexify() }
    }

    pub fn re_part(&self) -> QSection {
        GenSection { vf: self.vf.re_part(), form: self.form.re_part() }
    }

    pub fn im_part(&self) -> QSection {
        GenSection { vf: self.vf.im_part(), form: self.form.im_part() }
    }

    pub fn conj(&self) -> Self {
        GenSection { vf: self.vf.conj(), form: self.form.conj() }
    }

    fn check(&self, other: &Self) -> Result<(), CourantError> {
        if self.vars() == other.vars() {
            Ok(())
        } else {
            Err(CourantError::ChartMismatch)
        }
    }

    /// `⟨(ξ,a),(η,b)⟩ = ½(ι(ξ)b + ι(η)a)`.
    pub fn pairing(&self, other: &Self) -> Poly<K> {
        let s = &other.form.contract(&self.vf).as_function() + &self.form.contract(&other.vf).as_function();
        s.scale_q(&qf(1, 2))
    }

    pub fn checked_pairing(&self, other: &Self) -> Result<Poly<K>, CourantError> {
        self.check(other)?;
        Ok(self.pairing(other))
    }

    /// `⟦(ξ,a),(η,b)⟧ = ([ξ,η], £(ξ)b − ι(η)da)`; also the infinitesimal action of `ĝ` on sections.
    pub fn dorfman(&self, other: &Self) -> Self {
        GenSection {
            vf: self.vf.lie_bracket(&other.vf),
            form: other.form.lie_derivative(&self.vf).add(&self.form.ext_d().contract(&other.vf).neg()),
        }
    }

    pub fn checked_dorfman(&self, other: &Self) -> Result<Self, CourantError> {
        self.check(other)?;
        Ok(self.dorfman(other))
    }

    /// Skew-symmetrized bracket `⟦x,y⟧ − (0, d⟨x,y⟩)`.
    pub fn courant(&self, other: &Self) -> Self {
        let d = DiffForm::function(&self.pairing(other)).ext_d();
        let mut out = self.dorfman(other);
        out.form = out.form.add(&d.neg());
        out
    }

    pub fn checked_courant(&self, other: &Self) -> Result<Self, CourantError> {
        self.check(other)?;
        Ok(self.courant(other))
    }

    /// Bracket of `ĝ(X) = g(X) ⋉ Ω¹(X)`: `([ξ,η], £(ξ)b − £(η)a)`.
    pub fn ghat_bracket(&self, other: &Self) -> Self {
        GenSection {
            vf: self.vf.lie_bracket(&other.vf),
            form: other.form.lie_derivative(&self.vf).add(&self.form.lie_derivative(&other.vf).neg()),
        }
    }

    /// Infinitesimal action of `(ξ,a) ∈ ĝ` on a section: `([ξ,τ], £(ξ)c − ι(τ)da)`.
    pub fn act(&self, alpha: &Self) -> Self {
        self.dorfman(alpha)
    }

    /// `e^B (ξ, a) = (ξ, a − ι(ξ)B)` for a closed 2-form `B`.
    pub fn b_transform(&self, b: &DiffForm<K>) -> Result<Self, CourantError> {
        if b.degree() != 2 && !b.is_zero() {
            return Err(CourantError::WrongDegree { expected: 2, got: b.degree() });
        }
        if b.vars() != self.vars() {
            return Err(CourantError::ChartMismatch);
        }
        if !b.ext_d().is_zero() {
            return Err(CourantError::NotClosed);
        }
        Ok(GenSection { vf: self.vf.clone(), form: self.form.add(&b.contract(&self.vf).neg()) })
    }

    pub fn to_json(&self) -> Value {
        let form: Vec<Value> = self.form.one_form_comps().iter().map(Poly::to_json).collect();
        json!({"vf": self.vf.to_json(), "form": form})
    }

    pub fn from_json(v: &Value, vars: &Vars) -> Result<Self, CourantError> {
        let vf = VectorField::from_json(v.get("vf").ok_or_else(|| CourantError::Parse("section needs `vf`".into()))?, vars)?;
        let comps: Vec<Poly<K>> = v
            .get("form")
            .and_then(Value::as_array)
            .ok_or_else(|| CourantError::Parse("section needs `form`".into()))?
            .iter()
            .map(|p| Poly::from_json_in(p, vars))
            .collect::<Result<_, _>>()?;
        if comps.len() != vars.len() {
            return Err(RingError::DimensionMismatch { expected: vars.len(), got: comps.len() }.into());
        }
        Ok(GenSection { vf, form: DiffForm::one_form(vars, &comps) })
    }
}

impl<K: Scalar> Module for GenSection<K> {
    fn add(&self, other: &Self) -> Self {
        GenSection::add(self, other)
    }
    fn scale(&self, r: &Rational) -> Self {
        GenSection { vf: Module::scale(&self.vf, r), form: Module::scale(&self.form, r) }
    }
    fn is_zero(&self) -> bool {
        GenSection::is_zero(self)
    }
}

/// A-valued Dorfman bracket.
pub fn a_dorfman<K: Scalar>(x: &ASection<K>, y: &ASection<K>) -> Result<ASection<K>, CourantError> {
    Ok(bilinear(x, y, |a, b| a.dorfman(b))?)
}

/// A-valued Courant bracket.
pub fn a_courant<K: Scalar>(x: &ASection<K>, y: &ASection<K>) -> Result<ASection<K>, CourantError> {
    Ok(bilinear(x, y, |a, b| a.courant(b))?)
}

/// A-valued pairing.
pub fn a_pairing<K: Scalar>(x: &ASection<K>, y: &ASection<K>) -> Result<AElem<Poly<K>>, CourantError> {
    Ok(bilinear(x, y, |a, b| a.pairing(b))?)
}

/// A-valued `ĝ` bracket.
pub fn a_ghat<K: Scalar>(x: &ASection<K>, y: &ASection<K>) -> Result<ASection<K>, CourantError> {
    Ok(bilinear(x, y, |a, b| a.ghat_bracket(b))?)
}

/// `e^x · α` for `x ∈ m ⊗ ĝ`.
pub fn exp_act_section<K: Scalar>(x: &ASection<K>, alpha: &ASection<K>) -> Result<ASection<K>, CourantError> {
    Ok(exp_action(x, alpha, |a, b| a.act(b))?)
}

/// `e^{tx}·α` as a polynomial in `t`.
pub fn exp_flow<K: Scalar>(x: &ASection<K>, alpha: &ASection<K>) -> Result<TimePoly<ASection<K>>, CourantError> {
    let mut coeffs = vec![alpha.clone()];
    let mut term = alpha.clone();
    let mut n = 0i64;
    loop {
        n += 1;
        term = a_dorfman(x, &term)?.scale(&(q(1) / q(n)));
        if term.is_zero() {
            return Ok(TimePoly::new(coeffs));
        }
        coeffs.push(term.clone());
    }
}

/// Function-linear endomorphism of `TX ⊕ T*X`, a `2n × 2n` matrix in the constant frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenEndo<K: Scalar> {
    vars: Vars,
    entries: Vec<Poly<K>>,
}

/// Rational endomorphism.
pub type QEndo = GenEndo<Rational>;

impl<K: Scalar> GenEndo<K> {
    pub fn zero(vars: &Vars) -> Self {
        let m = 2 * vars.len();
        GenEndo { vars: vars.clone(), entries: vec![Poly::zero(vars); m * m] }
    }

    pub fn identity(vars: &Vars) -> Self {
        let mut e = Self::zero(vars);
        for i in 0..2 * vars.len() {
            e.set(i, i, Poly::one(vars));
        }
        e
    }

    pub fn from_rows(vars: &Vars, rows: Vec<Vec<Poly<K>>>) -> Result<Self, CourantError> {
        let m = 2 * vars.len();
        if rows.len() != m || rows.iter().any(|r| r.len() != m) {
            return Err(CourantError::WrongSize { expected: m, got: rows.len() });
        }
        Ok(GenEndo { vars: vars.clone(), entries: rows.into_iter().flatten().collect() })
    }

    /// Assembles `[[J, P], [σ, K]]` from `n × n` blocks.
    pub fn from_blocks(
        vars: &Vars,
        j: &[Vec<Poly<K>>],
        p: &[Vec<Poly<K>>],
        s: &[Vec<Poly<K>>],
        k: &[Vec<Poly<K>>],
    ) -> Self {
        let n = vars.len();
        let mut e = Self::zero(vars);
        for a in 0..n {
            for b in 0..n {
                e.set(a, b, j[a][b].clone());
                e.set(a, n + b, p[a][b].clone());
                e.set(n + a, b, s[a][b].clone());
                e.set(n + a, n + b, k[a][b].clone());
            }
        }
        e
    }

    /// The endomorphism sending `basis(j)` to `cols[j]`.
    pub fn from_columns(vars: &Vars, cols: &[GenSection<K>]) -> Self {
        let m = 2 * vars.len();
        let mut e = Self::zero(vars);
        for (j, c) in cols.iter().enumerate().take(m) {
            for (i, p) in c.to_vec().into_iter().enumerate() {
                e.set(i, j, p);
            }
        }
        e
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn size(&self) -> usize {
        2 * self.vars.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly<K> {
        &self.entries[i * self.size() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Poly<K>) {
        let m = self.size();
        self.entries[i * m + j] = p;
    }

    /// Block `(r, c)` with `r, c ∈ {0, 1}`: `J = (0,0)`, `P = (0,1)`, `σ = (1,0)`, `K = (1,1)`.
    pub fn block(&self, r: usize, c: usize) -> Vec<Vec<Poly<K>>> {
        let n = self.vars.len();
        (0..n).map(|a| (0..n).map(|b| self.get(r * n + a, c * n + b).clone()).collect()).collect()
    }

    pub fn column(&self, j: usize) -> GenSection<K> {
        let v: Vec<Poly<K>> = (0..self.size()).map(|i| self.get(i, j).clone()).collect();
        GenSection::from_vec(&self.vars, &v)
    }

    pub fn apply(&self, x: &GenSection<K>) -> GenSection<K> {
        let v = x.to_vec();
        let m = self.size();
        let out: Vec<Poly<K>> = (0..m)
            .map(|i| {
                (0..m).fold(Poly::zero(&self.vars), |acc, j| {
                    let e = self.get(i, j);
                    if e.is_zero() || v[j].is_zero() {
                        acc
                    } else {
                        &acc + &(e * &v[j])
                    }
                })
            })
            .collect();
        GenSection::from_vec(&self.vars, &out)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let cols: Vec<GenSection<K>> = (0..self.size()).map(|j| self.apply(&other.column(j))).collect();
        Self::from_columns(&self.vars, &cols)
    }

    pub fn add(&self, other: &Self) -> Self {
        GenEndo { vars: self.vars.clone(), entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect() }
    }

    pub fn neg(&self) -> Self {
        self.map(|p| -p)
    }

    pub fn scale(&self, k: &K) -> Self {
        self.map(|p| p.scale(k))
    }

    pub fn map<F: Fn(&Poly<K>) -> Poly<K>>(&self, f: F) -> Self {
        GenEndo { vars: self.vars.clone(), entries: self.entries.iter().map(f).collect() }
    }

    pub fn complexify(&self) -> GenEndo<GaussianRational> {
        GenEndo { vars: self.vars.clone(), entries: self.entries.iter().map(Poly::complexify).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Poly::is_zero)
    }

    /// Whether all entries are constants.
    pub fn is_constant(&self) -> bool {
        self.entries.iter().all(|p| p.degree().map_or(true, |d| d == 0))
    }

    /// Constant entries as a scalar matrix, if constant.
    pub fn constant_matrix(&self) -> Option<crate::ring::ExactMatrix<K>> {
        if !self.is_constant() {
            return None;
        }
        let m = self.size();
        let mut out = crate::ring::ExactMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                out.set(i, j, self.get(i, j).constant_term());
            }
        }
        Some(out)
    }

    /// Infinitesimal action `(x·F)(y) = x·(F y) − F(x·y)`, read off on the constant frame.
    pub fn inf_action(x: &GenSection<K>, f: &Self) -> Self {
        let cols: Vec<GenSection<K>> = (0..f.size())
            .map(|j| {
                let e = GenSection::basis(&f.vars, j);
                x.act(&f.apply(&e)).sub(&f.apply(&x.act(&e)))
            })
            .collect();
        Self::from_columns(&f.vars, &cols)
    }

    pub fn to_json(&self) -> Value {
        let m = self.size();
        let rows: Vec<Value> = (0..m).map(|i| Value::Array((0..m).map(|j| self.get(i, j).to_json()).collect())).collect();
        json!({"vars": *self.vars, "rows": rows})
    }

    pub fn from_json(v: &Value, vars: &Vars) -> Result<Self, CourantError> {
        let rows = v
            .get("rows")
            .and_then(Value::as_array)
            .ok_or_else(|| CourantError::Parse("endomorphism needs `rows`".into()))?;
        let rows: Vec<Vec<Poly<K>>> = rows
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| CourantError::Parse("row must be a list".into()))?
                    .iter()
                    .map(|p| Poly::from_json_in(p, vars).map_err(CourantError::from))
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        Self::from_rows(vars, rows)
    }
}

impl<K: Scalar> Module for GenEndo<K> {
    fn add(&self, other: &Self) -> Self {
        GenEndo::add(self, other)
    }
    fn scale(&self, r: &Rational) -> Self {
        self.map(|p| p.scale_q(r))
    }
    fn is_zero(&self) -> bool {
        GenEndo::is_zero(self)
    }
}

/// A-valued endomorphism.
pub type AEndo<K> = AElem<GenEndo<K>>;

/// Applies an A-valued endomorphism to an A-valued section.
pub fn a_apply<K: Scalar>(f: &AEndo<K>, x: &ASection<K>) -> Result<ASection<K>, CourantError> {
    Ok(bilinear(f, x, |e, s| e.apply(s))?)
}

/// A-valued infinitesimal action on endomorphisms.
pub fn a_inf_action<K: Scalar>(x: &ASection<K>, f: &AEndo<K>) -> Result<AEndo<K>, CourantError> {
    Ok(bilinear(x, f, GenEndo::inf_action)?)
}

/// Assembles an A-valued endomorphism from its A-valued columns.
pub fn a_from_columns<K: Scalar>(alg: &Artin, vars: &Vars, cols: &[ASection<K>]) -> AEndo<K> {
    let mut out = AElem::zero(alg);
    for b in 0..alg.dim() {
        let these: Vec<GenSection<K>> = cols
            .iter()
            .map(|c| c.comp(b).cloned().unwrap_or_else(|| GenSection::zero(vars)))
            .collect();
        out.add_comp(b, GenEndo::from_columns(vars, &these));
    }
    out
}

/// Formal symmetry `g = e^{(0,u)} e^{(ξ,0)}` with `u, ξ ∈ m ⊗ (·)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymElement<K: Scalar> {
    pub u: AElem<DiffForm<K>>,
    pub xi: AElem<VectorField<K>>,
}

impl<K: Scalar> SymElement<K> {
    pub fn new(u: AElem<DiffForm<K>>, xi: AElem<VectorField<K>>) -> Result<Self, CourantError> {
        u.same_alg(&AElem::zero(xi.alg()))?;
        if !u.is_in_m() || !xi.is_in_m() {
            return Err(ArtinError::NotInMaximalIdeal.into());
        }
        Ok(SymElement { u, xi })
    }

    pub fn identity(alg: &Artin) -> Self {
        SymElement { u: AElem::zero(alg), xi: AElem::zero(alg) }
    }

    /// `e^{(0,u)}`.
    pub fn b_field(u: AElem<DiffForm<K>>) -> Self {
        let xi = AElem::zero(u.alg());
        SymElement { u, xi }
    }

    /// `e^{(ξ,0)}`.
    pub fn diffeo(xi: AElem<VectorField<K>>) -> Self {
        let u = AElem::zero(xi.alg());
        SymElement { u, xi }
    }

    /// `e^{(ξ,a)}` in factored form.
    pub fn exp(x: &ASection<K>) -> Result<Self, CourantError> {
        let xi = x.map(|s| s.vf.clone());
        let a = x.map(|s| s.form.clone());
        let (u, xi) = exp_split(&xi, &a)?;
        Self::new(u, xi)
    }

    /// The `(ξ, a) ∈ m ⊗ ĝ` with `e^{(ξ,a)} = self`.
    pub fn log(&self) -> Result<ASection<K>, CourantError> {
        let a = exp_split_inverse(&self.xi, &self.u)?;
        pair(&self.xi, &a)
    }

    pub fn alg(&self) -> &Artin {
        self.xi.alg()
    }

    pub fn is_identity(&self) -> bool {
        self.u.is_zero() && self.xi.is_zero()
    }

    /// `g · α`.
    pub fn act_section(&self, alpha: &ASection<K>) -> Result<ASection<K>, CourantError> {
        let xi0 = self.xi.map(|v| GenSection::from_vf(v.clone()));
        let moved = exp_act_section(&xi0, alpha)?;
        let du = self.u.map(DiffForm::ext_d);
        let corr = bilinear(&du, &moved, |b, s| GenSection::from_form(b.contract(&s.vf).neg()))?;
        Ok(moved.add(&corr))
    }

    /// `g · F = g ∘ F ∘ g⁻¹`.
    pub fn act_endo(&self, f: &AEndo<K>) -> Result<AEndo<K>, CourantError> {
        let inv = self.inverse()?;
        let vars = f
            .comps()
            .values()
            .next()
            .map(|e| e.vars().clone())
            .ok_or_else(|| CourantError::Parse("cannot act on the zero endomorphism without a chart".into()))?;
        let alg = self.alg().clone();
        let cols: Vec<ASection<K>> = (0..2 * vars.len())
            .map(|j| {
                let e = AElem::unit(&alg, GenSection::basis(&vars, j));
                let y = inv.act_section(&e)?;
                self.act_section(&a_apply(f, &y)?)
            })
            .collect::<Result<_, _>>()?;
        Ok(a_from_columns(&alg, &vars, &cols))
    }

    /// Group product `self · other = e^{u + e^ξ u'} e^{bch(ξ, ξ')}`.
    pub fn mul(&self, other: &Self) -> Result<Self, CourantError> {
        let moved = exp_action(&self.xi, &other.u, |x, a| a.lie_derivative(x))?;
        let u = self.u.checked_add(&moved)?;
        let xi = crate::artin::bch(&self.xi, &other.xi, |a, b| a.lie_bracket(b))?;
        Ok(SymElement { u, xi })
    }

    /// `(e^u e^ξ)⁻¹ = e^{−e^{−ξ}u} e^{−ξ}`.
    pub fn inverse(&self) -> Result<Self, CourantError> {
        let mxi = self.xi.neg();
        let moved = exp_action(&mxi, &self.u, |x, a| a.lie_derivative(x))?;
        Ok(SymElement { u: moved.neg(), xi: mxi })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "u": aelem_json(&self.u, |f| Value::Array(f.one_form_comps().iter().map(Poly::to_json).collect())),
            "xi": aelem_json(&self.xi, VectorField::to_json),
        })
    }

    /// Parses the JSON written by [`SymElement::to_json`]; missing parts are zero.
    pub fn from_json(v: &Value, alg: &Artin, vars: &Vars) -> Result<Self, CourantError> {
        let u = match v.get("u") {
            None => AElem::zero(alg),
            Some(u) => aelem_from_json(u, alg, |w| -> Result<DiffForm<K>, CourantError> {
                let comps = w.as_array().ok_or_else(|| CourantError::Parse("`u` components must be lists".into()))?;
                let comps: Vec<Poly<K>> = comps.iter().map(|p| Poly::from_json_in(p, vars)).collect::<Result<_, _>>()?;
                if comps.len() != vars.len() {
                    return Err(CourantError::Parse(format!("`u` needs {} components", vars.len())));
                }
                Ok(DiffForm::one_form(vars, &comps))
            })?,
        };
        let xi = match v.get("xi") {
            None => AElem::zero(alg),
            Some(x) => aelem_from_json(x, alg, |f| VectorField::from_json(f, vars))?,
        };
        Self::new(u, xi)
    }
}

/// JSON list `[{"mono": label, "value": ..}]` for an A-valued element.
pub fn aelem_json<V: Module, F: Fn(&V) -> Value>(x: &AElem<V>, f: F) -> Value {
    Value::Array(
        x.comps()
            .iter()
            .map(|(i, v)| json!({"mono": x.alg().basis_label(*i), "value": f(v)}))
            .collect(),
    )
}

/// Parses the list written by [`aelem_json`].
pub fn aelem_from_json<V: Module, E, F: Fn(&Value) -> Result<V, E>>(v: &Value, alg: &Artin, f: F) -> Result<AElem<V>, CourantError>
where
    CourantError: From<E>,
{
    let mut out = AElem::zero(alg);
    let arr = v.as_array().ok_or_else(|| CourantError::Parse("expected a list of monomial components".into()))?;
    for item in arr {
        let label = item.get("mono").and_then(Value::as_str).ok_or_else(|| CourantError::Parse("component needs `mono`".into()))?;
        let idx = (0..alg.dim())
            .find(|&i| alg.basis_label(i) == label)
            .ok_or_else(|| CourantError::Parse(format!("unknown monomial `{label}`")))?;
        let val = f(item.get("value").ok_or_else(|| CourantError::Parse("component needs `value`".into()))?)?;
        out.add_comp(idx, val);
    }
    Ok(out)
}

/// Zips vector-field and form parts into sections.
pub fn pair<K: Scalar>(xi: &AElem<VectorField<K>>, a: &AElem<DiffForm<K>>) -> Result<ASection<K>, CourantError> {
    if xi.alg() != a.alg() {
        return Err(ArtinError::AlgebraMismatch.into());
    }
    let alg = xi.alg();
    let vars = xi
        .comps()
        .values()
        .next()
        .map(|v| v.vars().clone())
        .or_else(|| a.comps().values().next().map(|f| f.vars().clone()));
    let Some(vars) = vars else {
        return Ok(AElem::zero(alg));
    };
    let mut out = AElem::zero(alg);
    for b in 0..alg.dim() {
        let v = xi.comp(b).cloned().unwrap_or_else(|| VectorField::zero(&vars));
        let f = a.comp(b).cloned().unwrap_or_else(|| DiffForm::zero(&vars, 1));
        out.add_comp(b, GenSection { vf: v, form: f });
    }
    Ok(out)
}

/// `e^{tξ}a` as a polynomial in `t`.
pub fn exp_lie_flow<K: Scalar>(xi: &AElem<VectorField<K>>, a: &AElem<DiffForm<K>>) -> Result<TimePoly<AElem<DiffForm<K>>>, CourantError> {
    let mut coeffs = vec![a.clone()];
    let mut term = a.clone();
    let mut n = 0i64;
    loop {
        n += 1;
        term = bilinear(xi, &term, |x, w| w.lie_derivative(x))?.scale(&(q(1) / q(n)));
        if term.is_zero() {
            return Ok(TimePoly::new(coeffs));
        }
        coeffs.push(term.clone());
    }
}

/// `a^ξ = ∫₀¹ e^{tξ}(a) dt`, returning `(a^ξ, ξ)` with `e^{(ξ,a)} = e^{(0,a^ξ)} e^{(ξ,0)}`.
#[allow(clippy::type_complexity)]
pub fn exp_split<K: Scalar>(
    xi: &AElem<VectorField<K>>,
    a: &AElem<DiffForm<K>>,
) -> Result<(AElem<DiffForm<K>>, AElem<VectorField<K>>), CourantError> {
    xi.same_alg(&AElem::zero(a.alg()))?;
    if !xi.is_in_m() || !a.is_in_m() {
        return Err(ArtinError::NotInMaximalIdeal.into());
    }
    Ok((exp_lie_flow(xi, a)?.time_integral(), xi.clone()))
}

/// Inverse of `a ↦ a^ξ`: the unique `a` with `a^ξ = u`.
pub fn exp_split_inverse<K: Scalar>(xi: &AElem<VectorField<K>>, u: &AElem<DiffForm<K>>) -> Result<AElem<DiffForm<K>>, CourantError> {
    let mut a = u.clone();
    for _ in 0..u.alg().nilpotency_order() + 1 {
        let (img, _) = exp_split(xi, &a)?;
        let excess = img.checked_add(&a.neg())?;
        let next = u.checked_add(&excess.neg())?;
        if next == a {
            return Ok(a);
        }
        a = next;
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::artin::ArtinAlgebra;
    use crate::cartan::QForm;
    use crate::ring::{vars, QPoly};
    use std::sync::Arc;

    fn xy() -> Vars {
        vars(&["x", "y"])
    }

    #[test]
    fn pairing_values() {
        let v = xy();
        let ex = QSection::basis(&v, 0);
        let dx = QSection::basis(&v, 2);
        assert_eq!(ex.pairing(&dx), QPoly::constant(&v, qf(1, 2)));
        assert!(ex.pairing(&QSection::basis(&v, 1)).is_zero());
        assert_eq!(ex.add(&dx).pairing(&ex.add(&dx)), QPoly::one(&v));
    }

    #[test]
    fn bracket_values() {
        let v = xy();
        let ex = QSection::basis(&v, 0);
        assert!(ex.dorfman(&QSection::basis(&v, 2)).is_zero());
        let x = QPoly::var(&v, 0);
        let b = QSection::from_form(QForm::dx(&v, 0).mul_fn(&x));
        let c = ex.courant(&b);
        assert_eq!(c, QSection::from_form(QForm::dx(&v, 0).scale(&qf(1, 2))));
        assert!(b.add(&ex).courant(&b.add(&ex)).is_zero());
    }

    #[test]
    fn b_transform_values() {
        let v = xy();
        let b = QForm::monomial(&QPoly::one(&v), &[0, 1]);
        let ex = QSection::basis(&v, 0);
        assert_eq!(ex.b_transform(&b).unwrap(), GenSection::new(ex.vf.clone(), QForm::dx(&v, 1).neg()).unwrap());
        assert_eq!(ex.b_transform(&DiffForm::zero(&v, 2)).unwrap(), ex);
        let open = QForm::monomial(&QPoly::var(&v, 0), &[0, 1]);
        let r3 = vars(&["x", "y", "z"]);
        let open3 = QForm::monomial(&QPoly::var(&r3, 2), &[0, 1]);
        assert!(ex.b_transform(&open).is_ok());
        assert_eq!(QSection::basis(&r3, 0).b_transform(&open3), Err(CourantError::NotClosed));
    }

    #[test]
    fn exp_split_two_terms() {
        let v = xy();
        let a3 = Arc::new(ArtinAlgebra::truncated("eps", 3).unwrap());
        let x = QPoly::var(&v, 0);
        let xi = AElem::basis_elem(&a3, 1, crate::cartan::QVectorField::coord(&v, 0));
        let a = AElem::basis_elem(&a3, 1, QForm::dx(&v, 0).mul_fn(&x));
        let (ax, _) = exp_split(&xi, &a).unwrap();
        let expect = a.add(&AElem::basis_elem(&a3, 2, QForm::dx(&v, 0).scale(&qf(1, 2))));
        assert_eq!(ax, expect);
        assert_eq!(exp_split_inverse(&xi, &ax).unwrap(), a);
        let (same, _) = exp_split(&AElem::zero(&a3), &a).unwrap();
        assert_eq!(same, a);
    }

    #[test]
    fn b_field_action() {
        let v = xy();
        let a2 = Arc::new(ArtinAlgebra::truncated("eps", 2).unwrap());
        let y = QPoly::var(&v, 1);
        let u = AElem::basis_elem(&a2, 1, QForm::dx(&v, 0).mul_fn(&y));
        let g = SymElement::b_field(u.clone());
        let x = AElem::unit(&a2, QSection::basis(&v, 1));
        let got = g.act_section(&x).unwrap();
        let du = u.map(DiffForm::ext_d);
        let expect = x.add(&du.map(|b| QSection::from_form(b.contract(&crate::cartan::QVectorField::coord(&v, 1)).neg())));
        assert_eq!(got, expect);
        assert_eq!(SymElement::identity(&a2).act_section(&x).unwrap(), x);
    }
}
