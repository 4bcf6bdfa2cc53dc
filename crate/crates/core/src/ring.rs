// SPDX-License-Identifier: MIT OR Apache-2.0
//! Exact scalars, multivariate polynomials and linear algebra over ℚ and ℚ[i].

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde_json::{json, Value};
use thiserror::Error;

/// Exact rational number, always in lowest terms with positive denominator.
pub type Rational = BigRational;

/// Exact element of ℚ[i].
pub type GaussianRational = Complex<Rational>;

/// Errors raised by the arithmetic substrate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("variable context mismatch: {left:?} vs {right:?}")]
    VarMismatch { left: Vec<String>, right: Vec<String> },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("image span is not contained in kernel span")]
    NotContained,
    #[error("parse error: {0}")]
    Parse(String),
}

/// Integer as a rational.
pub fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// The fraction `n/d`.
pub fn qf(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Renders a rational as `p/q`, or `p` when integral.
pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p/q` or `p` text.
pub fn parse_rational(s: &str) -> Result<Rational, RingError> {
    let s = s.trim();
    let bad = || RingError::Parse(format!("invalid rational `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// A coefficient field: ℚ or ℚ[i].
pub trait Scalar:
    Clone
    + PartialEq
    + Eq
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Embeds a rational.
    fn from_rational(r: &Rational) -> Self;
    /// Complex conjugate (identity on ℚ).
    fn conj(&self) -> Self;
    /// Real part.
    fn re_part(&self) -> Rational;
    /// Imaginary part.
    fn im_part(&self) -> Rational;
    /// JSON text form.
    fn to_json(&self) -> Value;
    /// Inverse of [`Scalar::to_json`].
    fn from_json(v: &Value) -> Result<Self, RingError>;

    fn from_i64(n: i64) -> Self {
        Self::from_rational(&q(n))
    }
}

impl Scalar for Rational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn re_part(&self) -> Rational {
        self.clone()
    }
    fn im_part(&self) -> Rational {
        Rational::zero()
    }
    fn to_json(&self) -> Value {
        Value::String(fmt_rational(self))
    }
    fn from_json(v: &Value) -> Result<Self, RingError> {
        match v {
            Value::String(s) => parse_rational(s),
            Value::Number(n) => parse_rational(&n.to_string()),
            _ => Err(RingError::Parse(format!("expected rational, got {v}"))),
        }
    }
}

impl Scalar for GaussianRational {
    fn from_rational(r: &Rational) -> Self {
        Complex::new(r.clone(), Rational::zero())
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn re_part(&self) -> Rational {
        self.re.clone()
    }
    fn im_part(&self) -> Rational {
        self.im.clone()
    }
    fn to_json(&self) -> Value {
        json!({"re": fmt_rational(&self.re), "im": fmt_rational(&self.im)})
    }
    fn from_json(v: &Value) -> Result<Self, RingError> {
        match v {
            Value::Object(m) => {
                let part = |k: &str| match m.get(k) {
                    Some(x) => Rational::from_json(x),
                    None => Ok(Rational::zero()),
                };
                Ok(Complex::new(part("re")?, part("im")?))
            }
            _ => Ok(Self::from_rational(&Rational::from_json(v)?)),
        }
    }
}

/// The imaginary unit.
pub fn gi() -> GaussianRational {
    Complex::new(Rational::zero(), Rational::one())
}

/// The Gaussian rational `re + i·im`.
pub fn gq(re: Rational, im: Rational) -> GaussianRational {
    Complex::new(re, im)
}

/// Exponent vector, ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn one(n: usize) -> Self {
        Mono(vec![0; n])
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Mono(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Whether `other` divides `self`.
    pub fn divisible_by(&self, other: &Mono) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shared ordered list of coordinate labels.
pub type Vars = Arc<Vec<String>>;

/// Builds a variable context from labels.
pub fn vars<S: AsRef<str>>(labels: &[S]) -> Vars {
    Arc::new(labels.iter().map(|s| s.as_ref().to_string()).collect())
}

/// Multivariate polynomial with exact coefficients in `K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly<K: Scalar> {
    vars: Vars,
    terms: BTreeMap<Mono, K>,
}

/// Rational polynomial.
pub type QPoly = Poly<Rational>;
/// Gaussian-rational polynomial.
pub type CPoly = Poly<GaussianRational>;

impl<K: Scalar> Poly<K> {
    pub fn zero(vars: &Vars) -> Self {
        Poly { vars: vars.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(vars: &Vars, c: K) -> Self {
        Self::monomial(vars, Mono::one(vars.len()), c)
    }

    pub fn one(vars: &Vars) -> Self {
        Self::constant(vars, K::one())
    }

    /// The coordinate function with index `i`.
    pub fn var(vars: &Vars, i: usize) -> Self {
        Self::monomial(vars, Mono::var(vars.len(), i), K::one())
    }

    /// The coordinate function named `label`.
    pub fn var_named(vars: &Vars, label: &str) -> Result<Self, RingError> {
        let i = index_of(vars, label)?;
        Ok(Self::var(vars, i))
    }

    pub fn monomial(vars: &Vars, m: Mono, c: K) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { vars: vars.clone(), terms }
    }

    /// Builds from (exponent, coefficient) pairs, summing repeats.
    pub fn from_terms<I: IntoIterator<Item = (Mono, K)>>(vars: &Vars, it: I) -> Self {
        let mut p = Self::zero(vars);
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &K)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Mono) -> K {
        self.terms.get(m).cloned().unwrap_or_else(K::zero)
    }

    pub fn constant_term(&self) -> K {
        self.coeff(&Mono::one(self.nvars()))
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Mono::degree).max()
    }

    pub fn add_term(&mut self, m: Mono, c: K) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&m) {
            Some(old) => {
                let s = old + c;
                if !s.is_zero() {
                    self.terms.insert(m, s);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    fn same_context(&self, other: &Self) -> Result<(), RingError> {
        if Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars {
            Ok(())
        } else {
            Err(RingError::VarMismatch {
                left: self.vars.to_vec(),
                right: other.vars.to_vec(),
            })
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, RingError> {
        self.same_context(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, RingError> {
        self.checked_add(&other.neg_ref())
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, RingError> {
        self.same_context(other)?;
        let mut out = Self::zero(&self.vars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1.clone() * c2.clone());
            }
        }
        Ok(out)
    }

    fn neg_ref(&self) -> Self {
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }

    pub fn scale(&self, k: &K) -> Self {
        if k.is_zero() {
            return Self::zero(&self.vars);
        }
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.clone() * k.clone())).collect(),
        }
    }

    pub fn scale_q(&self, r: &Rational) -> Self {
        self.scale(&K::from_rational(r))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one(&self.vars);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Partial derivative in the variable with index `i`.
    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero(&self.vars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.0[i] -= 1;
            out.add_term(m2, c.clone() * K::from_i64(e as i64));
        }
        out
    }

    /// Partial derivative in the named variable.
    pub fn partial_named(&self, label: &str) -> Result<Self, RingError> {
        Ok(self.partial(index_of(&self.vars, label)?))
    }

    /// Evaluates at a point.
    pub fn eval(&self, point: &[K]) -> Result<K, RingError> {
        if point.len() != self.nvars() {
            return Err(RingError::DimensionMismatch { expected: self.nvars(), got: point.len() });
        }
        let mut acc = K::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, e) in point.iter().zip(&m.0) {
                for _ in 0..*e {
                    t = t * x.clone();
                }
            }
            acc = acc + t;
        }
        Ok(acc)
    }

    /// Substitutes `images[i]` for variable `i`; the result lives in the images' context.
    pub fn substitute(&self, images: &[Poly<K>], target: &Vars) -> Result<Poly<K>, RingError> {
        if images.len() != self.nvars() {
            return Err(RingError::DimensionMismatch { expected: self.nvars(), got: images.len() });
        }
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut t = Poly::constant(target, c.clone());
            for (img, e) in images.iter().zip(&m.0) {
                if *e > 0 {
                    t = t.checked_mul(&img.pow(*e))?;
                }
            }
            out = out.checked_add(&t)?;
        }
        Ok(out)
    }

    /// Sets every variable in `zeroed` to 0, keeping the context.
    pub fn kill_vars(&self, zeroed: &[usize]) -> Self {
        Poly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| zeroed.iter().all(|&i| m.0[i] == 0))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Whether every term involves some variable of `set`, i.e. membership in the ideal they generate.
    pub fn in_coordinate_ideal(&self, set: &[usize]) -> bool {
        self.kill_vars(set).is_zero()
    }

    /// Drops terms of total degree above `d`.
    pub fn truncate(&self, d: u32) -> Self {
        Poly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() <= d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn map_coeffs<L: Scalar, F: Fn(&K) -> L>(&self, f: F) -> Poly<L> {
        Poly::from_terms(&self.vars, self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    pub fn conj(&self) -> Self {
        self.map_coeffs(|c| c.conj())
    }

    pub fn complexify(&self) -> CPoly {
        self.map_coeffs(|c| gq(c.re_part(), c.im_part()))
    }

    pub fn re_part(&self) -> QPoly {
        self.map_coeffs(|c| c.re_part())
    }

    pub fn im_part(&self) -> QPoly {
        self.map_coeffs(|c| c.im_part())
    }

    /// JSON form `{"vars":[..],"terms":[{"exp":[..],"coef":..}]}`.
    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .rev()
            .map(|(m, c)| json!({"exp": m.0, "coef": c.to_json()}))
            .collect();
        json!({"vars": *self.vars, "terms": terms})
    }

    pub fn from_json(v: &Value) -> Result<Self, RingError> {
        let labels: Vec<String> = v
            .get("vars")
            .and_then(Value::as_array)
            .ok_or_else(|| RingError::Parse("polynomial needs `vars`".into()))?
            .iter()
            .map(|x| x.as_str().map(str::to_string).ok_or_else(|| RingError::Parse("bad var".into())))
            .collect::<Result<_, _>>()?;
        let ctx = Arc::new(labels);
        Self::from_json_in(v, &ctx)
    }

    /// Parses the `terms` of a JSON polynomial into a known context.
    pub fn from_json_in(v: &Value, ctx: &Vars) -> Result<Self, RingError> {
        if let Some(vs) = v.get("vars").and_then(Value::as_array) {
            let given: Vec<String> = vs.iter().filter_map(|x| x.as_str().map(str::to_string)).collect();
            if given != **ctx {
                return Err(RingError::VarMismatch { left: given, right: ctx.to_vec() });
            }
        }
        let mut p = Self::zero(ctx);
        let terms = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| RingError::Parse("polynomial needs `terms`".into()))?;
        for t in terms {
            let exp: Vec<u32> = t
                .get("exp")
                .and_then(Value::as_array)
                .ok_or_else(|| RingError::Parse("term needs `exp`".into()))?
                .iter()
                .map(|e| e.as_u64().map(|e| e as u32).ok_or_else(|| RingError::Parse("bad exponent".into())))
                .collect::<Result<_, _>>()?;
            if exp.len() != ctx.len() {
                return Err(RingError::DimensionMismatch { expected: ctx.len(), got: exp.len() });
            }
            let c = K::from_json(t.get("coef").ok_or_else(|| RingError::Parse("term needs `coef`".into()))?)?;
            p.add_term(Mono(exp), c);
        }
        Ok(p)
    }
}

/// Index of a label in a context.
pub fn index_of(vars: &Vars, label: &str) -> Result<usize, RingError> {
    vars.iter()
        .position(|v| v == label)
        .ok_or_else(|| RingError::UnknownVariable(label.to_string()))
}

impl<K: Scalar> fmt::Display for Poly<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})", scalar_text(c))?;
            for (i, e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*{}", self.vars[i])?,
                    _ => write!(f, "*{}^{}", self.vars[i], e)?,
                }
            }
        }
        Ok(())
    }
}

/// Text form of a scalar, `a` or `a+bi`.
pub fn scalar_text<K: Scalar>(c: &K) -> String {
    let (re, im) = (c.re_part(), c.im_part());
    if im.is_zero() {
        fmt_rational(&re)
    } else if re.is_zero() {
        format!("{}i", fmt_rational(&im))
    } else if im.is_negative() {
        format!("{}-{}i", fmt_rational(&re), fmt_rational(&-im))
    } else {
        format!("{}+{}i", fmt_rational(&re), fmt_rational(&im))
    }
}

macro_rules! poly_binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl<'a, K: Scalar> $tr<&'a Poly<K>> for &'a Poly<K> {
            type Output = Poly<K>;
            /// Panics on a variable-context mismatch; use the `checked_` form to recover.
            fn $m(self, rhs: &'a Poly<K>) -> Poly<K> {
                self.$checked(rhs).expect("polynomial context mismatch")
            }
        }
        impl<K: Scalar> $tr for Poly<K> {
            type Output = Poly<K>;
            fn $m(self, rhs: Poly<K>) -> Poly<K> {
                self.$checked(&rhs).expect("polynomial context mismatch")
            }
        }
    };
}

poly_binop!(Add, add, checked_add);
poly_binop!(Sub, sub, checked_sub);
poly_binop!(Mul, mul, checked_mul);

impl<K: Scalar> Neg for Poly<K> {
    type Output = Poly<K>;
    fn neg(self) -> Poly<K> {
        self.neg_ref()
    }
}

impl<K: Scalar> Neg for &Poly<K> {
    type Output = Poly<K>;
    fn neg(self) -> Poly<K> {
        self.neg_ref()
    }
}

/// Random polynomial with integer coefficients in `[-c, c]` and total degree at most `deg`.
pub fn random_poly<R: Rng + ?Sized>(rng: &mut R, vars: &Vars, deg: u32, c: i64, density: f64) -> QPoly {
    let mut p = QPoly::zero(vars);
    for m in monomials_up_to(vars.len(), deg) {
        if rng.gen_bool(density) {
            p.add_term(m, q(rng.gen_range(-c..=c)));
        }
    }
    p
}

/// All exponent vectors in `n` variables of total degree at most `deg`, ascending.
pub fn monomials_up_to(n: usize, deg: u32) -> Vec<Mono> {
    let mut out = Vec::new();
    for d in 0..=deg {
        monomials_of_degree(n, d, &mut vec![0; n], 0, &mut out);
    }
    out.sort();
    out
}

fn monomials_of_degree(n: usize, d: u32, cur: &mut Vec<u32>, i: usize, out: &mut Vec<Mono>) {
    if n == 0 {
        if d == 0 {
            out.push(Mono(vec![]));
        }
        return;
    }
    if i == n - 1 {
        cur[i] = d;
        out.push(Mono(cur.clone()));
        cur[i] = 0;
        return;
    }
    for e in 0..=d {
        cur[i] = e;
        monomials_of_degree(n, d - e, cur, i + 1, out);
    }
    cur[i] = 0;
}

/// Dense matrix with exact entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactMatrix<K: Scalar> {
    rows: usize,
    cols: usize,
    data: Vec<K>,
}

impl<K: Scalar> ExactMatrix<K> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExactMatrix { rows, cols, data: vec![K::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, K::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<K>>) -> Result<Self, RingError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(RingError::DimensionMismatch { expected: c, got: row.len() });
            }
            data.extend(row);
        }
        Ok(ExactMatrix { rows: r, cols: c, data })
    }

    /// Matrix whose columns are the given vectors of length `rows`.
    pub fn from_cols(rows: usize, cols: &[Vec<K>]) -> Result<Self, RingError> {
        let mut m = Self::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            if col.len() != rows {
                return Err(RingError::DimensionMismatch { expected: rows, got: col.len() });
            }
            for (i, x) in col.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &K {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: K) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<K> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<K> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[K]) -> Result<Vec<K>, RingError> {
        if v.len() != self.cols {
            return Err(RingError::DimensionMismatch { expected: self.cols, got: v.len() });
        }
        Ok((0..self.rows)
            .map(|i| {
                (0..self.cols).fold(K::zero(), |acc, j| {
                    if v[j].is_zero() {
                        acc
                    } else {
                        acc + self.get(i, j).clone() * v[j].clone()
                    }
                })
            })
            .collect())
    }

    pub fn mul_mat(&self, other: &Self) -> Result<Self, RingError> {
        if self.cols != other.rows {
            return Err(RingError::DimensionMismatch { expected: self.cols, got: other.rows });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let v = out.get(i, j).clone() + a.clone() * b.clone();
                        out.set(i, j, v);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Reduced row-echelon form and pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..m.cols {
                    m.data.swap(p * m.cols + j, r * m.cols + j);
                }
            }
            let inv = K::one() / m.get(r, c).clone();
            for j in c..m.cols {
                let v = m.get(r, j).clone() * inv.clone();
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r || m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c).clone();
                for j in c..m.cols {
                    let pj = m.get(r, j);
                    if !pj.is_zero() {
                        let v = m.get(i, j).clone() - f.clone() * pj.clone();
                        m.set(i, j, v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Null-space basis: one vector per free column, read off the RREF.
    pub fn kernel_basis(&self) -> Vec<Vec<K>> {
        let (r, pivots) = self.rref();
        let mut out = Vec::new();
        for free in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![K::zero(); self.cols];
            v[free] = K::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -r.get(row, free).clone();
            }
            out.push(v);
        }
        out
    }

    /// Some solution of `self · x = b`, or `None` if inconsistent.
    pub fn solve(&self, b: &[K]) -> Result<Option<Vec<K>>, RingError> {
        if b.len() != self.rows {
            return Err(RingError::DimensionMismatch { expected: self.rows, got: b.len() });
        }
        let mut aug = Self::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = vec![K::zero(); self.cols];
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = r.get(row, self.cols).clone();
        }
        Ok(Some(x))
    }

    pub fn inverse(&self) -> Option<Self> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, K::one());
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, r.get(i, n + j).clone());
            }
        }
        Some(inv)
    }
}

/// Rank of the span of a list of vectors.
pub fn span_rank<K: Scalar>(vecs: &[Vec<K>], dim: usize) -> Result<usize, RingError> {
    Ok(ExactMatrix::from_cols(dim, vecs)?.rank())
}

/// Dimension of span(ker)/span(im) with representatives completing an im-basis to a ker-basis.
pub fn quotient_dim<K: Scalar>(
    im_gens: &[Vec<K>],
    ker_gens: &[Vec<K>],
    dim: usize,
) -> Result<(usize, Vec<Vec<K>>), RingError> {
    let ker_rank = span_rank(ker_gens, dim)?;
    let mut both: Vec<Vec<K>> = ker_gens.to_vec();
    both.extend_from_slice(im_gens);
    if span_rank(&both, dim)? != ker_rank {
        return Err(RingError::NotContained);
    }
    let mut basis: Vec<Vec<K>> = im_gens.to_vec();
    let mut rank = span_rank(&basis, dim)?;
    let im_rank = rank;
    let mut reps = Vec::new();
    for k in ker_gens {
        basis.push(k.clone());
        let r = span_rank(&basis, dim)?;
        if r > rank {
            rank = r;
            reps.push(k.clone());
        } else {
            basis.pop();
        }
    }
    Ok((ker_rank - im_rank, reps))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Vars {
        vars(&["x", "y"])
    }

    #[test]
    fn difference_of_squares() {
        let v = ctx();
        let x = QPoly::var(&v, 0);
        let one = QPoly::one(&v);
        let p = &(&x + &one) * &(&x - &one);
        assert_eq!(p, &(&x * &x) - &one);
    }

    #[test]
    fn binomial_square() {
        let v = ctx();
        let (x, y) = (QPoly::var(&v, 0), QPoly::var(&v, 1));
        let s = (&x + &y).pow(2);
        let expect = QPoly::from_terms(
            &v,
            [(Mono(vec![2, 0]), q(1)), (Mono(vec![1, 1]), q(2)), (Mono(vec![0, 2]), q(1))],
        );
        assert_eq!(s, expect);
        assert!((&s * &QPoly::zero(&v)).is_zero());
    }

    #[test]
    fn partials() {
        let v = ctx();
        let p = QPoly::monomial(&v, Mono(vec![2, 1]), q(1));
        assert_eq!(p.partial_named("x").unwrap(), QPoly::monomial(&v, Mono(vec![1, 1]), q(2)));
        let x2 = QPoly::monomial(&v, Mono(vec![2, 0]), q(1));
        assert!(x2.partial(1).is_zero());
        let s = (&QPoly::var(&v, 0) + &QPoly::var(&v, 1)).pow(3);
        let expect = (&QPoly::var(&v, 0) + &QPoly::var(&v, 1)).pow(2).scale_q(&q(3));
        assert_eq!(s.partial(0), expect);
        assert_eq!(p.partial_named("z"), Err(RingError::UnknownVariable("z".into())));
    }

    #[test]
    fn context_mismatch() {
        let p = QPoly::var(&ctx(), 0);
        let r = QPoly::var(&vars(&["u"]), 0);
        assert!(matches!(p.checked_mul(&r), Err(RingError::VarMismatch { .. })));
    }

    #[test]
    fn kernels() {
        let id = ExactMatrix::<Rational>::identity(2);
        assert!(id.kernel_basis().is_empty());
        assert_eq!(ExactMatrix::<Rational>::zeros(2, 3).kernel_basis().len(), 3);
        let m = ExactMatrix::from_rows(vec![vec![q(1), q(2)], vec![q(2), q(4)]]).unwrap();
        assert_eq!(m.kernel_basis(), vec![vec![q(-2), q(1)]]);
    }

    #[test]
    fn quotients() {
        let e1 = vec![q(1), q(0)];
        assert_eq!(quotient_dim(&[e1.clone()], &[e1.clone()], 2).unwrap().0, 0);
        assert_eq!(quotient_dim::<Rational>(&[], &[e1.clone()], 2).unwrap().0, 1);
        let e2 = vec![q(0), q(1)];
        assert_eq!(quotient_dim(&[e2], &[e1], 2), Err(RingError::NotContained));
    }

    #[test]
    fn rational_text_round_trip() {
        for s in ["3/4", "-7", "0", "12/5"] {
            assert_eq!(fmt_rational(&parse_rational(s).unwrap()), s);
        }
        assert_eq!(fmt_rational(&parse_rational("6/8").unwrap()), "3/4");
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn poly_json_round_trip() {
        let v = ctx();
        let p = QPoly::from_terms(&v, [(Mono(vec![1, 2]), qf(-3, 7)), (Mono(vec![0, 0]), q(2))]);
        assert_eq!(QPoly::from_json(&p.to_json()).unwrap(), p);
        let c = p.complexify().scale(&gq(q(1), q(2)));
        assert_eq!(CPoly::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn gaussian_norm() {
        let z = gq(qf(3, 2), q(-2));
        let n = z.clone() * Scalar::conj(&z);
        assert_eq!(n.im, q(0));
        assert_eq!(n.re, qf(9, 4) + q(4));
    }
}
