// SPDX-License-Identifier: MIT OR Apache-2.0
//! Polynomial exterior calculus on ℝⁿ: vector fields, forms, d, ι, £, ∧ and the formal time integral.

use std::collections::BTreeMap;

use rand::Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::artin::Module;
use crate::ring::{q, random_poly, CPoly, Poly, QPoly, Rational, RingError, Scalar, Vars};

/// Errors raised by the exterior calculus.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CartanError {
    #[error("chart mismatch")]
    ChartMismatch,
    #[error("cannot contract a 0-form")]
    ContractZeroForm,
    #[error("form degree {0} exceeds dimension {1}")]
    DegreeTooLarge(usize, usize),
    #[error("duplicate coordinate label `{0}`")]
    DuplicateLabel(String),
    #[error("ring error: {0}")]
    Ring(#[from] RingError),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Coordinate chart on ℝⁿ, with an optional split into `x` and `y` coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    vars: Vars,
    split: Option<(Vec<usize>, Vec<usize>)>,
}

impl Chart {
    pub fn new<S: AsRef<str>>(labels: &[S]) -> Result<Self, CartanError> {
        let v = crate::ring::vars(labels);
        for (i, a) in v.iter().enumerate() {
            if v[..i].contains(a) {
                return Err(CartanError::DuplicateLabel(a.clone()));
            }
        }
        Ok(Chart { vars: v, split: None })
    }

    /// Records which coordinates are `x^i` and which are `y^I`.
    pub fn with_split(mut self, x: Vec<usize>, y: Vec<usize>) -> Self {
        self.split = Some((x, y));
        self
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn split(&self) -> Option<&(Vec<usize>, Vec<usize>)> {
        self.split.as_ref()
    }
}

fn same_vars(a: &Vars, b: &Vars) -> Result<(), CartanError> {
    if std::sync::Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(CartanError::ChartMismatch)
    }
}

/// Vector field `Σ ξ^i ∂_i` with polynomial components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField<K: Scalar> {
    vars: Vars,
    comps: Vec<Poly<K>>,
}

impl<K: Scalar> VectorField<K> {
    pub fn zero(vars: &Vars) -> Self {
        VectorField { vars: vars.clone(), comps: vec![Poly::zero(vars); vars.len()] }
    }

    /// The coordinate field `∂_i`.
    pub fn coord(vars: &Vars, i: usize) -> Self {
        let mut v = Self::zero(vars);
        v.comps[i] = Poly::one(vars);
        v
    }

    pub fn from_comps(vars: &Vars, comps: Vec<Poly<K>>) -> Result<Self, CartanError> {
        if comps.len() != vars.len() {
            return Err(RingError::DimensionMismatch { expected: vars.len(), got: comps.len() }.into());
        }
        for c in &comps {
            same_vars(c.vars(), vars)?;
        }
        Ok(VectorField { vars: vars.clone(), comps })
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn comps(&self) -> &[Poly<K>] {
        &self.comps
    }

    pub fn comp(&self, i: usize) -> &Poly<K> {
        &self.comps[i]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Poly::is_zero)
    }

    /// Derivative of a function along the field.
    pub fn apply(&self, f: &Poly<K>) -> Poly<K> {
        let mut out = Poly::zero(&self.vars);
        for (i, c) in self.comps.iter().enumerate() {
            if !c.is_zero() {
                out = &out + &(c * &f.partial(i));
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        VectorField {
            vars: self.vars.clone(),
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.map(|c| -c)
    }

    pub fn scale(&self, k: &K) -> Self {
        self.map(|c| c.scale(k))
    }

    pub fn mul_fn(&self, f: &Poly<K>) -> Self {
        self.map(|c| c * f)
    }

    pub fn map<F: Fn(&Poly<K>) -> Poly<K>>(&self, f: F) -> Self {
        VectorField { vars: self.vars.clone(), comps: self.comps.iter().map(f).collect() }
    }

    pub fn map_coeffs<L: Scalar, F: Fn(&K) -> L + Copy>(&self, f: F) -> VectorField<L> {
        VectorField { vars: self.vars.clone(), comps: self.comps.iter().map(|c| c.map_coeffs(f)).collect() }
    }

    pub fn complexify(&self) -> VectorField<crate::ring::GaussianRational> {
        self.map_coeffs(|c| crate::ring::gq(c.re_part(), c.im_part()))
    }

    pub fn re_part(&self) -> VectorField<Rational> {
        self.map_coeffs(|c| c.re_part())
    }

    pub fn im_part(&self) -> VectorField<Rational> {
        self.map_coeffs(|c| c.im_part())
    }

    pub fn conj(&self) -> Self {
        self.map(Poly::conj)
    }

    pub fn checked_lie_bracket(&self, other: &Self) -> Result<Self, CartanError> {
        same_vars(&self.vars, &other.vars)?;
        Ok(self.lie_bracket(other))
    }

    /// Jacobi–Lie bracket `[ξ,η]^i = ξ(η^i) − η(ξ^i)`.
    pub fn lie_bracket(&self, other: &Self) -> Self {
        VectorField {
            vars: self.vars.clone(),
            comps: (0..self.vars.len())
                .map(|i| &self.apply(&other.comps[i]) - &other.apply(&self.comps[i]))
                .collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.comps.iter().map(Poly::to_json).collect())
    }

    pub fn from_json(v: &Value, vars: &Vars) -> Result<Self, CartanError> {
        let arr = v.as_array().ok_or_else(|| CartanError::Parse("vector field must be a list".into()))?;
        let comps = arr.iter().map(|p| Poly::from_json_in(p, vars)).collect::<Result<_, _>>()?;
        Self::from_comps(vars, comps)
    }
}

impl<K: Scalar> Module for VectorField<K> {
    fn add(&self, other: &Self) -> Self {
        VectorField::add(self, other)
    }
    fn scale(&self, r: &Rational) -> Self {
        self.map(|c| c.scale_q(r))
    }
    fn is_zero(&self) -> bool {
        VectorField::is_zero(self)
    }
}

/// Differential `k`-form; only strictly increasing index tuples are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffForm<K: Scalar> {
    vars: Vars,
    deg: usize,
    terms: BTreeMap<Vec<usize>, Poly<K>>,
}

/// Sign of the permutation sorting `idx`, or `None` if an index repeats.
fn sort_sign(idx: &[usize]) -> Option<(Vec<usize>, bool)> {
    let mut v = idx.to_vec();
    let mut neg = false;
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                neg = !neg;
            } else if v[j] == v[j + 1] {
                return None;
            }
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, neg))
}

impl<K: Scalar> DiffForm<K> {
    pub fn zero(vars: &Vars, deg: usize) -> Self {
        DiffForm { vars: vars.clone(), deg, terms: BTreeMap::new() }
    }

    /// A function regarded as a 0-form.
    pub fn function(f: &Poly<K>) -> Self {
        let mut w = Self::zero(f.vars(), 0);
        w.add_term(vec![], f.clone());
        w
    }

    /// The coordinate 1-form `dx^i`.
    pub fn dx(vars: &Vars, i: usize) -> Self {
        let mut w = Self::zero(vars, 1);
        w.add_term(vec![i], Poly::one(vars));
        w
    }

    /// `f dx^{i₁}∧⋯∧dx^{i_k}` for any index order.
    pub fn monomial(f: &Poly<K>, idx: &[usize]) -> Self {
        let mut w = Self::zero(f.vars(), idx.len());
        if let Some((sorted, neg)) = sort_sign(idx) {
            w.add_term(sorted, if neg { -f } else { f.clone() });
        }
        w
    }

    /// The 1-form `Σ c_i dx^i`.
    pub fn one_form(vars: &Vars, comps: &[Poly<K>]) -> Self {
        let mut w = Self::zero(vars, 1);
        for (i, c) in comps.iter().enumerate() {
            w.add_term(vec![i], c.clone());
        }
        w
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn degree(&self) -> usize {
        self.deg
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Poly<K>)> {
        self.terms.iter()
    }

    pub fn coeff(&self, idx: &[usize]) -> Poly<K> {
        self.terms.get(idx).cloned().unwrap_or_else(|| Poly::zero(&self.vars))
    }

    /// Components `a_i` of a 1-form.
    pub fn one_form_comps(&self) -> Vec<Poly<K>> {
        (0..self.vars.len()).map(|i| self.coeff(&[i])).collect()
    }

    /// The function underlying a 0-form.
    pub fn as_function(&self) -> Poly<K> {
        self.coeff(&[])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, idx: Vec<usize>, c: Poly<K>) {
        if c.is_zero() {
            return;
        }
        let v = match self.terms.remove(&idx) {
            Some(old) => &old + &c,
            None => c,
        };
        if !v.is_zero() {
            self.terms.insert(idx, v);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.deg, other.deg, "adding forms of different degree");
        let mut out = self.clone();
        for (i, c) in &other.terms {
            out.add_term(i.clone(), c.clone());
        }
        out
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, CartanError> {
        same_vars(&self.vars, &other.vars)?;
        if self.deg != other.deg && !self.is_zero() && !other.is_zero() {
            return Err(CartanError::Parse(format!("adding a {}-form to a {}-form", self.deg, other.deg)));
        }
        let mut out = if self.is_zero() { Self::zero(&self.vars, other.deg) } else { self.clone() };
        for (i, c) in &other.terms {
            out.add_term(i.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        self.map(|c| -c)
    }

    pub fn scale(&self, k: &K) -> Self {
        self.map(|c| c.scale(k))
    }

    pub fn mul_fn(&self, f: &Poly<K>) -> Self {
        self.map(|c| c * f)
    }

    pub fn map<F: Fn(&Poly<K>) -> Poly<K>>(&self, f: F) -> Self {
        let mut out = Self::zero(&self.vars, self.deg);
        for (i, c) in &self.terms {
            out.add_term(i.clone(), f(c));
        }
        out
    }

    pub fn map_coeffs<L: Scalar, F: Fn(&K) -> L + Copy>(&self, f: F) -> DiffForm<L> {
        let mut out = DiffForm::zero(&self.vars, self.deg);
        for (i, c) in &self.terms {
            out.add_term(i.clone(), c.map_coeffs(f));
        }
        out
    }

    pub fn complexify(&self) -> DiffForm<crate::ring::GaussianRational> {
        self.map_coeffs(|c| crate::ring::gq(c.re_part(), c.im_part()))
    }

    pub fn re_part(&self) -> DiffForm<Rational> {
        self.map_coeffs(|c| c.re_part())
    }

    pub fn im_part(&self) -> DiffForm<Rational> {
        self.map_coeffs(|c| c.im_part())
    }

    pub fn conj(&self) -> Self {
        self.map(Poly::conj)
    }

    /// Exterior product.
    pub fn wedge(&self, other: &Self) -> Self {
        let mut out = Self::zero(&self.vars, self.deg + other.deg);
        for (i, a) in &self.terms {
            for (j, b) in &other.terms {
                let mut idx = i.clone();
                idx.extend(j);
                if let Some((sorted, neg)) = sort_sign(&idx) {
                    let p = a * b;
                    out.add_term(sorted, if neg { -p } else { p });
                }
            }
        }
        out
    }

    /// Exterior derivative.
    pub fn ext_d(&self) -> Self {
        let mut out = Self::zero(&self.vars, self.deg + 1);
        for (idx, c) in &self.terms {
            for j in 0..self.vars.len() {
                if idx.contains(&j) {
                    continue;
                }
                let dc = c.partial(j);
                if dc.is_zero() {
                    continue;
                }
                let mut full = vec![j];
                full.extend(idx);
                if let Some((sorted, neg)) = sort_sign(&full) {
                    out.add_term(sorted, if neg { -dc } else { dc });
                }
            }
        }
        out
    }

    /// Contraction into the first slot; a 0-form contracts to zero.
    pub fn contract(&self, xi: &VectorField<K>) -> Self {
        if self.deg == 0 {
            return Self::zero(&self.vars, 0);
        }
        let mut out = Self::zero(&self.vars, self.deg - 1);
        for (idx, c) in &self.terms {
            for (r, &i) in idx.iter().enumerate() {
                let xi_i = xi.comp(i);
                if xi_i.is_zero() {
                    continue;
                }
                let mut rest = idx.clone();
                rest.remove(r);
                let p = c * xi_i;
                out.add_term(rest, if r % 2 == 1 { -p } else { p });
            }
        }
        out
    }

    /// Contraction that rejects 0-forms.
    pub fn checked_contract(&self, xi: &VectorField<K>) -> Result<Self, CartanError> {
        same_vars(&self.vars, xi.vars())?;
        if self.deg == 0 {
            return Err(CartanError::ContractZeroForm);
        }
        Ok(self.contract(xi))
    }

    /// `£(ξ) = dι(ξ) + ι(ξ)d`.
    pub fn lie_derivative(&self, xi: &VectorField<K>) -> Self {
        if self.deg == 0 {
            return Self::function(&xi.apply(&self.as_function()));
        }
        self.contract(xi).ext_d().add(&self.ext_d().contract(xi))
    }

    /// Value on a list of vector fields, `ω(v₁,…,v_k)`.
    pub fn evaluate(&self, vs: &[VectorField<K>]) -> Poly<K> {
        let mut w = self.clone();
        for v in vs {
            w = w.contract(v);
        }
        w.as_function()
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self.terms.iter().map(|(i, c)| json!({"idx": i, "coef": c.to_json()})).collect();
        json!({"deg": self.deg, "terms": terms})
    }

    pub fn from_json(v: &Value, vars: &Vars) -> Result<Self, CartanError> {
        let bad = |m: &str| CartanError::Parse(m.to_string());
        let deg = v.get("deg").and_then(Value::as_u64).ok_or_else(|| bad("form needs `deg`"))? as usize;
        if deg > vars.len() {
            return Err(CartanError::DegreeTooLarge(deg, vars.len()));
        }
        let mut w = Self::zero(vars, deg);
        for t in v.get("terms").and_then(Value::as_array).ok_or_else(|| bad("form needs `terms`"))? {
            let idx: Vec<usize> = t
                .get("idx")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("term needs `idx`"))?
                .iter()
                .map(|i| i.as_u64().map(|i| i as usize).ok_or_else(|| bad("bad index")))
                .collect::<Result<_, _>>()?;
            if idx.len() != deg || idx.iter().any(|&i| i >= vars.len()) {
                return Err(bad("index tuple does not match degree"));
            }
            let c = Poly::from_json_in(t.get("coef").ok_or_else(|| bad("term needs `coef`"))?, vars)?;
            let m = Self::monomial(&c, &idx);
            w = w.add(&m);
        }
        Ok(w)
    }
}

impl<K: Scalar> Module for DiffForm<K> {
    fn add(&self, other: &Self) -> Self {
        self.checked_add(other).expect("form degree or chart mismatch")
    }
    fn scale(&self, r: &Rational) -> Self {
        self.map(|c| c.scale_q(r))
    }
    fn is_zero(&self) -> bool {
        DiffForm::is_zero(self)
    }
}

/// Finite polynomial in a formal time variable `t` with coefficients in a vector space.
#[derive(Clone, Debug, PartialEq)]
pub struct TimePoly<V: Module> {
    coeffs: Vec<V>,
}

impl<V: Module> TimePoly<V> {
    /// Coefficients in increasing powers of `t`; at least the constant term is required.
    pub fn new(coeffs: Vec<V>) -> Self {
        assert!(!coeffs.is_empty(), "a time polynomial needs a constant term");
        TimePoly { coeffs }
    }

    pub fn coeffs(&self) -> &[V] {
        &self.coeffs
    }

    /// `∫₀¹ Σ bₙ tⁿ dt = Σ bₙ/(n+1)`.
    pub fn time_integral(&self) -> V {
        let mut acc = self.coeffs[0].clone();
        for (n, b) in self.coeffs.iter().enumerate().skip(1) {
            acc = acc.add(&b.scale(&(q(1) / q(n as i64 + 1))));
        }
        acc
    }

    /// Formal `d/dt`.
    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return TimePoly { coeffs: vec![self.coeffs[0].scale(&q(0))] };
        }
        TimePoly {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(n, b)| b.scale(&q(n as i64)))
                .collect(),
        }
    }

    /// Value at a rational time.
    pub fn eval(&self, t: &Rational) -> V {
        let mut acc = self.coeffs[self.coeffs.len() - 1].clone();
        for b in self.coeffs.iter().rev().skip(1) {
            acc = acc.scale(t).add(b);
        }
        acc
    }
}

/// Random vector field with integer coefficients.
pub fn random_vf<R: Rng + ?Sized>(rng: &mut R, vars: &Vars, deg: u32, c: i64, density: f64) -> VectorField<Rational> {
    VectorField { vars: vars.clone(), comps: (0..vars.len()).map(|_| random_poly(rng, vars, deg, c, density)).collect() }
}

/// Random `k`-form with integer coefficients.
pub fn random_form<R: Rng + ?Sized>(rng: &mut R, vars: &Vars, k: usize, deg: u32, c: i64, density: f64) -> DiffForm<Rational> {
    let mut w = DiffForm::zero(vars, k);
    for idx in increasing_tuples(vars.len(), k) {
        w.add_term(idx, random_poly(rng, vars, deg, c, density));
    }
    w
}

/// All strictly increasing `k`-tuples from `0..n`.
pub fn increasing_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Rational vector field.
pub type QVectorField = VectorField<Rational>;
/// Rational form.
pub type QForm = DiffForm<Rational>;

/// Lifts a rational function to ℚ[i].
pub fn complexify_poly(p: &QPoly) -> CPoly {
    p.complexify()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{qf, vars};

    fn xy() -> Vars {
        vars(&["x", "y"])
    }

    #[test]
    fn brackets() {
        let v = xy();
        let (dx, dy) = (QVectorField::coord(&v, 0), QVectorField::coord(&v, 1));
        assert!(dx.lie_bracket(&dy).is_zero());
        let (x, y) = (QPoly::var(&v, 0), QPoly::var(&v, 1));
        let a = dy.mul_fn(&x);
        let b = dx.mul_fn(&y);
        assert_eq!(a.lie_bracket(&b), dx.mul_fn(&x).add(&dy.mul_fn(&y).neg()));
        assert!(a.lie_bracket(&a).is_zero());
    }

    #[test]
    fn exterior_derivative() {
        let v = xy();
        let x = QPoly::var(&v, 0);
        assert_eq!(QForm::function(&x).ext_d(), QForm::dx(&v, 0));
        let w = QForm::dx(&v, 1).mul_fn(&x);
        assert_eq!(w.ext_d(), QForm::monomial(&QPoly::one(&v), &[0, 1]));
        assert!(QForm::monomial(&QPoly::one(&v), &[0, 1]).ext_d().is_zero());
    }

    #[test]
    fn contraction_signs() {
        let v = xy();
        let (ex, ey) = (QVectorField::coord(&v, 0), QVectorField::coord(&v, 1));
        assert_eq!(QForm::dx(&v, 0).contract(&ex).as_function(), QPoly::one(&v));
        let dxdy = QForm::monomial(&QPoly::one(&v), &[0, 1]);
        assert_eq!(dxdy.contract(&ex), QForm::dx(&v, 1));
        let x = QPoly::var(&v, 0);
        let dydx = QForm::monomial(&QPoly::one(&v), &[1, 0]);
        // Oracle: (dy∧dx)(ξ,η) = dy(ξ)dx(η) − dx(ξ)dy(η) with ξ = x∂y.
        let xi = ey.mul_fn(&x);
        assert_eq!(dydx.contract(&xi), QForm::dx(&v, 0).mul_fn(&x));
        assert_eq!(QForm::function(&x).checked_contract(&xi), Err(CartanError::ContractZeroForm));
    }

    #[test]
    fn lie_derivatives() {
        let v = xy();
        let (ex, x) = (QVectorField::coord(&v, 0), QPoly::var(&v, 0));
        let w = QForm::dx(&v, 1).mul_fn(&x);
        assert_eq!(w.lie_derivative(&ex), QForm::dx(&v, 1));
        assert!(QForm::dx(&v, 1).lie_derivative(&ex).is_zero());
        assert_eq!(QForm::dx(&v, 0).lie_derivative(&ex.mul_fn(&x)), QForm::dx(&v, 0));
    }

    #[test]
    fn time_integrals() {
        let b = q(6);
        assert_eq!(TimePoly::new(vec![b.clone()]).time_integral(), q(6));
        assert_eq!(TimePoly::new(vec![q(0), b.clone()]).time_integral(), q(3));
        assert_eq!(TimePoly::new(vec![q(1), q(0), b]).time_integral(), q(1) + qf(6, 3));
    }

    #[test]
    fn json_round_trip() {
        let v = xy();
        let w = QForm::monomial(&QPoly::var(&v, 1).scale_q(&qf(2, 3)), &[1, 0]);
        assert_eq!(QForm::from_json(&w.to_json(), &v).unwrap(), w);
        let xi = QVectorField::coord(&v, 1).mul_fn(&QPoly::var(&v, 0));
        assert_eq!(QVectorField::from_json(&xi.to_json(), &v).unwrap(), xi);
    }
}
