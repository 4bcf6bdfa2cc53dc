// SPDX-License-Identifier: MIT OR Apache-2.0
//! Local Artin algebras with monomial presentations, nilpotent coefficients and BCH.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::ring::{fmt_rational, q, ExactMatrix, GaussianRational, Mono, Poly, Rational, Scalar};

/// Errors raised by Artin-algebra operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArtinError {
    #[error("generator `{0}` is not nilpotent modulo the relations: the quotient basis is infinite")]
    InfiniteBasis(String),
    #[error("the relations contain 1")]
    UnitInIdeal,
    #[error("relation has {got} exponents but there are {expected} generators")]
    BadRelation { expected: usize, got: usize },
    #[error("elements belong to different Artin algebras")]
    AlgebraMismatch,
    #[error("element has a nonzero unit component")]
    NotInMaximalIdeal,
    #[error("homomorphism is not surjective")]
    NotSurjective,
    #[error("not a homomorphism: {0}")]
    NotAHomomorphism(String),
    #[error("kernel is not spanned by basis monomials")]
    NonMonomialKernel,
    #[error("one-parameter family exceeds degree bound {0}")]
    DegreeBound(usize),
    #[error("parse error: {0}")]
    Parse(String),
}

/// A vector space over ℚ in which nilpotent coefficients can live.
pub trait Module: Clone + PartialEq + fmt::Debug {
    fn add(&self, other: &Self) -> Self;
    fn scale(&self, r: &Rational) -> Self;
    fn is_zero(&self) -> bool;

    fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
}

impl Module for Rational {
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, r: &Rational) -> Self {
        self * r
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

impl Module for GaussianRational {
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, r: &Rational) -> Self {
        self * GaussianRational::from_rational(r)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

impl<K: Scalar> Module for Poly<K> {
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, r: &Rational) -> Self {
        self.scale_q(r)
    }
    fn is_zero(&self) -> bool {
        Poly::is_zero(self)
    }
}

impl<V: Module> Module for Vec<V> {
    fn add(&self, other: &Self) -> Self {
        self.iter().zip(other).map(|(a, b)| a.add(b)).collect()
    }
    fn scale(&self, r: &Rational) -> Self {
        self.iter().map(|a| a.scale(r)).collect()
    }
    fn is_zero(&self) -> bool {
        self.iter().all(Module::is_zero)
    }
}

/// Local Artin ℚ-algebra `ℚ[ε₁..ε_k]/(monomials)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArtinAlgebra {
    gens: Vec<String>,
    relations: Vec<Mono>,
    basis: Vec<Mono>,
    index: BTreeMap<Mono, usize>,
    table: Vec<Vec<Option<usize>>>,
}

impl ArtinAlgebra {
    /// Builds the algebra, minimizing the relations and enumerating the standard monomials.
    pub fn new<S: AsRef<str>>(gens: &[S], relations: &[Vec<u32>]) -> Result<Self, ArtinError> {
        let k = gens.len();
        let mut rels: Vec<Mono> = Vec::new();
        for r in relations {
            if r.len() != k {
                return Err(ArtinError::BadRelation { expected: k, got: r.len() });
            }
            rels.push(Mono(r.clone()));
        }
        if rels.iter().any(|r| r.degree() == 0) {
            return Err(ArtinError::UnitInIdeal);
        }
        for (i, g) in gens.iter().enumerate() {
            let pure = rels.iter().any(|r| r.0[i] > 0 && r.0.iter().enumerate().all(|(j, e)| j == i || *e == 0));
            if !pure {
                return Err(ArtinError::InfiniteBasis(g.as_ref().to_string()));
            }
        }
        rels.sort();
        rels.dedup();
        let minimal: Vec<Mono> = rels
            .iter()
            .filter(|r| !rels.iter().any(|s| s != *r && r.divisible_by(s)))
            .cloned()
            .collect();
        let in_ideal = |m: &Mono| minimal.iter().any(|r| m.divisible_by(r));
        let mut seen = BTreeSet::new();
        let mut frontier = vec![Mono::one(k)];
        seen.insert(Mono::one(k));
        while let Some(m) = frontier.pop() {
            for i in 0..k {
                let n = m.mul(&Mono::var(k, i));
                if !in_ideal(&n) && seen.insert(n.clone()) {
                    frontier.push(n);
                }
            }
        }
        let basis: Vec<Mono> = seen.into_iter().collect();
        let index: BTreeMap<Mono, usize> = basis.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let table = basis
            .iter()
            .map(|a| basis.iter().map(|b| index.get(&a.mul(b)).copied()).collect())
            .collect();
        Ok(ArtinAlgebra {
            gens: gens.iter().map(|g| g.as_ref().to_string()).collect(),
            relations: minimal,
            basis,
            index,
            table,
        })
    }

    /// `ℚ[ε]/(ε^n)`.
    pub fn truncated(label: &str, n: u32) -> Result<Self, ArtinError> {
        Self::new(&[label], &[vec![n]])
    }

    /// The field ℚ itself, with no generators.
    pub fn ground() -> Self {
        Self::new::<&str>(&[], &[]).expect("the ground field is Artinian")
    }

    pub fn gens(&self) -> &[String] {
        &self.gens
    }

    pub fn relations(&self) -> &[Mono] {
        &self.relations
    }

    pub fn basis(&self) -> &[Mono] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Basis indices of the maximal ideal.
    pub fn maximal_ideal_basis(&self) -> Vec<usize> {
        (1..self.dim()).collect()
    }

    /// Least `N` with `m^N = 0`.
    pub fn nilpotency_order(&self) -> usize {
        self.basis.iter().map(|m| m.degree() as usize).max().unwrap_or(0) + 1
    }

    pub fn index_of(&self, m: &Mono) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// Product of basis elements, `None` when it lies in the ideal.
    pub fn mul_index(&self, i: usize, j: usize) -> Option<usize> {
        self.table[i][j]
    }

    /// Index of the generator `ε_i`, if it survives.
    pub fn gen_index(&self, i: usize) -> Option<usize> {
        self.index_of(&Mono::var(self.gens.len(), i))
    }

    pub fn degree_of(&self, i: usize) -> u32 {
        self.basis[i].degree()
    }

    /// Label of a basis monomial, e.g. `eps^2*del`.
    pub fn basis_label(&self, i: usize) -> String {
        let m = &self.basis[i];
        if m.degree() == 0 {
            return "1".into();
        }
        let parts: Vec<String> = m
            .0
            .iter()
            .enumerate()
            .filter(|(_, e)| **e > 0)
            .map(|(j, e)| if *e == 1 { self.gens[j].clone() } else { format!("{}^{}", self.gens[j], e) })
            .collect();
        parts.join("*")
    }

    /// JSON form `{"gens":[..],"relations":[[..]]}`.
    pub fn to_json(&self) -> Value {
        let rels: Vec<&Vec<u32>> = self.relations.iter().map(|m| &m.0).collect();
        json!({"gens": self.gens, "relations": rels})
    }

    pub fn from_json(v: &Value) -> Result<Self, ArtinError> {
        let bad = |m: &str| ArtinError::Parse(m.to_string());
        let gens: Vec<String> = v
            .get("gens")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("algebra needs `gens`"))?
            .iter()
            .map(|g| g.as_str().map(str::to_string).ok_or_else(|| bad("bad generator")))
            .collect::<Result<_, _>>()?;
        let rels: Vec<Vec<u32>> = v
            .get("relations")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("algebra needs `relations`"))?
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| bad("relation must be an exponent vector"))?
                    .iter()
                    .map(|e| e.as_u64().map(|e| e as u32).ok_or_else(|| bad("bad exponent")))
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        Self::new(&gens, &rels)
    }
}

/// Shared handle to an algebra.
pub type Artin = Arc<ArtinAlgebra>;

/// Element of `A ⊗ V`, stored by basis monomial of `A`.
#[derive(Clone, Debug)]
pub struct AElem<V: Module> {
    alg: Artin,
    comps: BTreeMap<usize, V>,
}

/// An element of `m ⊗ V`; the maximal-ideal condition is checked where it matters.
pub type MElement<V> = AElem<V>;

/// Element of the algebra itself.
pub type AScalar = AElem<Rational>;

impl<V: Module> PartialEq for AElem<V> {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.alg, &other.alg) || self.alg == other.alg) && self.comps == other.comps
    }
}

impl<V: Module> AElem<V> {
    pub fn zero(alg: &Artin) -> Self {
        AElem { alg: alg.clone(), comps: BTreeMap::new() }
    }

    /// `b_i ⊗ v`.
    pub fn basis_elem(alg: &Artin, i: usize, v: V) -> Self {
        let mut e = Self::zero(alg);
        e.add_comp(i, v);
        e
    }

    /// `1 ⊗ v`.
    pub fn unit(alg: &Artin, v: V) -> Self {
        Self::basis_elem(alg, 0, v)
    }

    pub fn from_comps<I: IntoIterator<Item = (usize, V)>>(alg: &Artin, it: I) -> Self {
        let mut e = Self::zero(alg);
        for (i, v) in it {
            e.add_comp(i, v);
        }
        e
    }

    pub fn alg(&self) -> &Artin {
        &self.alg
    }

    pub fn comps(&self) -> &BTreeMap<usize, V> {
        &self.comps
    }

    pub fn comp(&self, i: usize) -> Option<&V> {
        self.comps.get(&i)
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// No component along `1`.
    pub fn is_in_m(&self) -> bool {
        !self.comps.contains_key(&0)
    }

    pub fn unit_part(&self) -> Option<&V> {
        self.comps.get(&0)
    }

    pub fn m_part(&self) -> Self {
        let mut e = self.clone();
        e.comps.remove(&0);
        e
    }

    pub fn add_comp(&mut self, i: usize, v: V) {
        if v.is_zero() {
            return;
        }
        match self.comps.remove(&i) {
            Some(old) => {
                let s = old.add(&v);
                if !s.is_zero() {
                    self.comps.insert(i, s);
                }
            }
            None => {
                self.comps.insert(i, v);
            }
        }
    }

    pub fn same_alg(&self, other: &Self) -> Result<(), ArtinError> {
        same_alg(&self.alg, &other.alg)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, ArtinError> {
        self.same_alg(other)?;
        let mut out = self.clone();
        for (i, v) in &other.comps {
            out.add_comp(*i, v.clone());
        }
        Ok(out)
    }

    /// Applies a ℚ-linear map componentwise.
    pub fn map<W: Module, F: Fn(&V) -> W>(&self, f: F) -> AElem<W> {
        AElem::from_comps(&self.alg, self.comps.iter().map(|(i, v)| (*i, f(v))))
    }

    /// Fallible version of [`AElem::map`].
    pub fn try_map<W: Module, E, F: Fn(&V) -> Result<W, E>>(&self, f: F) -> Result<AElem<W>, E> {
        let mut out = AElem::zero(&self.alg);
        for (i, v) in &self.comps {
            out.add_comp(*i, f(v)?);
        }
        Ok(out)
    }

    /// Multiplies by an algebra element.
    pub fn mul_scalar(&self, a: &AScalar) -> Result<Self, ArtinError> {
        bilinear(a, self, |c, v| v.scale(c))
    }

    /// Multiplies by the basis monomial with index `j`.
    pub fn mul_basis(&self, j: usize) -> Self {
        let mut out = Self::zero(&self.alg);
        for (i, v) in &self.comps {
            if let Some(k) = self.alg.mul_index(*i, j) {
                out.add_comp(k, v.clone());
            }
        }
        out
    }

    /// Sum of the components weighted by the values of the basis at `ε = 0`, i.e. the reduction to ℚ.
    pub fn reduce(&self) -> Option<V> {
        self.unit_part().cloned()
    }
}

impl<V: Module> Module for AElem<V> {
    fn add(&self, other: &Self) -> Self {
        self.checked_add(other).expect("Artin algebra mismatch")
    }
    fn scale(&self, r: &Rational) -> Self {
        if Zero::is_zero(r) {
            return Self::zero(&self.alg);
        }
        self.map(|v| v.scale(r))
    }
    fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }
}

fn same_alg(a: &Artin, b: &Artin) -> Result<(), ArtinError> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(ArtinError::AlgebraMismatch)
    }
}

/// Extends a ℚ-bilinear operation to `A ⊗ V × A ⊗ W → A ⊗ U`.
pub fn bilinear<V: Module, W: Module, U: Module, F: Fn(&V, &W) -> U>(
    x: &AElem<V>,
    y: &AElem<W>,
    f: F,
) -> Result<AElem<U>, ArtinError> {
    same_alg(&x.alg, &y.alg)?;
    let mut out = AElem::zero(&x.alg);
    for (i, a) in &x.comps {
        for (j, b) in &y.comps {
            if let Some(k) = x.alg.mul_index(*i, *j) {
                out.add_comp(k, f(a, b));
            }
        }
    }
    Ok(out)
}

/// Fallible version of [`bilinear`].
pub fn try_bilinear<V: Module, W: Module, U: Module, E, F>(
    x: &AElem<V>,
    y: &AElem<W>,
    f: F,
) -> Result<AElem<U>, E>
where
    F: Fn(&V, &W) -> Result<U, E>,
    E: From<ArtinError>,
{
    same_alg(&x.alg, &y.alg)?;
    let mut out = AElem::zero(&x.alg);
    for (i, a) in &x.comps {
        for (j, b) in &y.comps {
            if let Some(k) = x.alg.mul_index(*i, *j) {
                out.add_comp(k, f(a, b)?);
            }
        }
    }
    Ok(out)
}

impl AScalar {
    /// The algebra element `ε_i`.
    pub fn generator(alg: &Artin, i: usize) -> Self {
        match alg.gen_index(i) {
            Some(k) => Self::basis_elem(alg, k, q(1)),
            None => Self::zero(alg),
        }
    }

    pub fn one(alg: &Artin) -> Self {
        Self::unit(alg, q(1))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, ArtinError> {
        bilinear(self, other, |a, b| a * b)
    }

    pub fn to_json(&self) -> Value {
        let m: serde_json::Map<String, Value> = self
            .comps
            .iter()
            .map(|(i, c)| (self.alg.basis_label(*i), Value::String(fmt_rational(c))))
            .collect();
        Value::Object(m)
    }
}

/// Unital algebra homomorphism given by images of generators.
#[derive(Clone, Debug, PartialEq)]
pub struct ArtinHom {
    source: Artin,
    target: Artin,
    images: Vec<AScalar>,
}

impl ArtinHom {
    /// Checks that each image lies in the target's maximal ideal and that every relation maps to 0.
    pub fn new(source: &Artin, target: &Artin, images: Vec<AScalar>) -> Result<Self, ArtinError> {
        if images.len() != source.gens().len() {
            return Err(ArtinError::NotAHomomorphism(format!(
                "{} generator images for {} generators",
                images.len(),
                source.gens().len()
            )));
        }
        for im in &images {
            same_alg(im.alg(), target)?;
            if !im.is_in_m() {
                return Err(ArtinError::NotAHomomorphism("generator image outside the maximal ideal".into()));
            }
        }
        let h = ArtinHom { source: source.clone(), target: target.clone(), images };
        for r in source.relations() {
            if !h.image_of_mono(r)?.is_zero() {
                return Err(ArtinError::NotAHomomorphism("a relation does not map to zero".into()));
            }
        }
        Ok(h)
    }

    /// Sends each generator to the generator with the same label, or to 0.
    pub fn by_labels(source: &Artin, target: &Artin) -> Result<Self, ArtinError> {
        let images = source
            .gens()
            .iter()
            .map(|g| match target.gens().iter().position(|h| h == g) {
                Some(j) => AScalar::generator(target, j),
                None => AScalar::zero(target),
            })
            .collect();
        Self::new(source, target, images)
    }

    pub fn identity(alg: &Artin) -> Self {
        let images = (0..alg.gens().len()).map(|i| AScalar::generator(alg, i)).collect();
        ArtinHom { source: alg.clone(), target: alg.clone(), images }
    }

    pub fn source(&self) -> &Artin {
        &self.source
    }

    pub fn target(&self) -> &Artin {
        &self.target
    }

    pub fn images(&self) -> &[AScalar] {
        &self.images
    }

    fn image_of_mono(&self, m: &Mono) -> Result<AScalar, ArtinError> {
        let mut acc = AScalar::one(&self.target);
        for (g, e) in self.images.iter().zip(&m.0) {
            for _ in 0..*e {
                acc = acc.mul(g)?;
            }
        }
        Ok(acc)
    }

    /// Image of the basis monomial with index `i`.
    pub fn image_of_basis(&self, i: usize) -> AScalar {
        self.image_of_mono(&self.source.basis()[i]).expect("images live in the target")
    }

    /// Pushes `A' ⊗ V` forward to `A ⊗ V`.
    pub fn apply<V: Module>(&self, x: &AElem<V>) -> Result<AElem<V>, ArtinError> {
        same_alg(x.alg(), &self.source)?;
        let mut out = AElem::zero(&self.target);
        for (i, v) in x.comps() {
            for (j, c) in self.image_of_basis(*i).comps() {
                out.add_comp(*j, v.scale(c));
            }
        }
        Ok(out)
    }

    /// Matrix of the underlying linear map in the monomial bases.
    pub fn matrix(&self) -> ExactMatrix<Rational> {
        let mut m = ExactMatrix::zeros(self.target.dim(), self.source.dim());
        for i in 0..self.source.dim() {
            for (j, c) in self.image_of_basis(i).comps() {
                m.set(*j, i, c.clone());
            }
        }
        m
    }

    pub fn is_surjective(&self) -> bool {
        self.matrix().rank() == self.target.dim()
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &ArtinHom) -> Result<ArtinHom, ArtinError> {
        same_alg(&self.target, &other.source)?;
        let images = self.images.iter().map(|x| other.apply(x)).collect::<Result<_, _>>()?;
        Ok(ArtinHom { source: self.source.clone(), target: other.target.clone(), images })
    }
}

/// Surjection whose kernel is principal and annihilated by the maximal ideal.
#[derive(Clone, Debug, PartialEq)]
pub struct SmallExtension {
    pub hom: ArtinHom,
    pub kernel_generator: AScalar,
}

impl SmallExtension {
    /// Verifies surjectivity, that the kernel is spanned by the generator, and `m · I = 0`.
    pub fn check(&self) -> bool {
        let src = self.hom.source();
        let m = self.hom.matrix();
        let kernel_dim = src.dim() - m.rank();
        let gen_vec: Vec<Rational> =
            (0..src.dim()).map(|i| self.kernel_generator.comp(i).cloned().unwrap_or_default()).collect();
        let in_kernel = m.mul_vec(&gen_vec).map(|v| v.iter().all(Zero::is_zero)).unwrap_or(false);
        let annihilated = src
            .maximal_ideal_basis()
            .into_iter()
            .all(|i| self.kernel_generator.mul_basis(i).is_zero());
        self.hom.is_surjective() && kernel_dim == 1 && in_kernel && !self.kernel_generator.is_zero() && annihilated
    }
}

/// Factors a surjection into small extensions by killing kernel monomials from the top degree down.
pub fn small_extension_chain(hom: &ArtinHom) -> Result<Vec<SmallExtension>, ArtinError> {
    if !hom.is_surjective() {
        return Err(ArtinError::NotSurjective);
    }
    let src = hom.source().clone();
    let mut killed: Vec<usize> = (0..src.dim()).filter(|&i| hom.image_of_basis(i).is_zero()).collect();
    if killed.len() != src.dim() - hom.target().dim() {
        return Err(ArtinError::NonMonomialKernel);
    }
    killed.sort_by(|a, b| src.basis()[*b].cmp(&src.basis()[*a]));
    let mut chain = Vec::new();
    let mut current = src.clone();
    let mut rels: Vec<Vec<u32>> = src.relations().iter().map(|m| m.0.clone()).collect();
    for (step, &k) in killed.iter().enumerate() {
        let mono = src.basis()[k].clone();
        let gen = AScalar::basis_elem(&current, current.index_of(&mono).expect("not yet killed"), q(1));
        let link = if step + 1 == killed.len() {
            let images = hom.images().to_vec();
            ArtinHom::new(&current, hom.target(), images)?
        } else {
            rels.push(mono.0.clone());
            let next = Arc::new(ArtinAlgebra::new(src.gens(), &rels)?);
            let h = ArtinHom::by_labels(&current, &next)?;
            current = next;
            h
        };
        chain.push(SmallExtension { hom: link, kernel_generator: gen });
    }
    Ok(chain)
}

/// Composite of a chain of small extensions, starting from `start`.
pub fn compose_chain(start: &Artin, chain: &[SmallExtension]) -> Result<ArtinHom, ArtinError> {
    let mut acc = ArtinHom::identity(start);
    for link in chain {
        acc = acc.then(&link.hom)?;
    }
    Ok(acc)
}

type Word = Vec<u8>;
type WordSeries = BTreeMap<Word, Rational>;

fn series_mul(a: &WordSeries, b: &WordSeries, max_len: usize) -> WordSeries {
    let mut out = WordSeries::new();
    for (u, x) in a {
        for (v, y) in b {
            if u.len() + v.len() > max_len {
                continue;
            }
            let mut w = u.clone();
            w.extend(v);
            let e = out.entry(w).or_insert_with(Rational::zero);
            *e += x * y;
        }
    }
    out.retain(|_, c| !Zero::is_zero(c));
    out
}

fn series_add(a: &mut WordSeries, b: &WordSeries, s: &Rational) {
    for (w, c) in b {
        let e = a.entry(w.clone()).or_insert_with(Rational::zero);
        *e += c * s;
    }
    a.retain(|_, c| !Zero::is_zero(c));
}

fn series_exp(letter: u8, max_len: usize) -> WordSeries {
    let mut out = WordSeries::new();
    let mut fact = q(1);
    for n in 0..=max_len {
        if n > 0 {
            fact *= q(n as i64);
        }
        out.insert(vec![letter; n], q(1) / fact.clone());
    }
    out
}

/// Coefficients of `log(e^X e^Y)` in the free associative algebra, words up to `max_len` letters.
pub fn bch_word_series(max_len: usize) -> BTreeMap<Vec<u8>, Rational> {
    let p = series_mul(&series_exp(0, max_len), &series_exp(1, max_len), max_len);
    let mut z = p;
    z.remove(&Vec::new());
    let mut log = WordSeries::new();
    let mut power = z.clone();
    for k in 1..=max_len {
        let sign = if k % 2 == 1 { q(1) } else { q(-1) };
        series_add(&mut log, &power, &(sign / q(k as i64)));
        power = series_mul(&power, &z, max_len);
    }
    log
}

/// Lie-algebra element `z` with `e^z = e^x e^y`, for `x, y` in `m ⊗ g`.
pub fn bch<V: Module, F: Fn(&V, &V) -> V>(x: &AElem<V>, y: &AElem<V>, bracket: F) -> Result<AElem<V>, ArtinError> {
    x.same_alg(y)?;
    if !x.is_in_m() || !y.is_in_m() {
        return Err(ArtinError::NotInMaximalIdeal);
    }
    let max_len = x.alg().nilpotency_order().saturating_sub(1);
    let br = |a: &AElem<V>, b: &AElem<V>| bilinear(a, b, &bracket).expect("same algebra");
    let letters = [x, y];
    let mut out = AElem::zero(x.alg());
    for (w, c) in bch_word_series(max_len) {
        let mut acc = letters[w[0] as usize].clone();
        for l in &w[1..] {
            if acc.is_zero() {
                break;
            }
            acc = br(&acc, letters[*l as usize]);
        }
        out = out.add(&acc.scale(&(c / q(w.len() as i64))));
    }
    Ok(out)
}

/// `e^x v = Σ xⁿ·v / n!` for an action of `g` on `W`; terminates by nilpotency.
pub fn exp_action<V: Module, W: Module, F: Fn(&V, &W) -> W>(
    x: &AElem<V>,
    v: &AElem<W>,
    action: F,
) -> Result<AElem<W>, ArtinError> {
    x.same_alg(&AElem::<V>::zero(v.alg()))?;
    if !x.is_in_m() {
        return Err(ArtinError::NotInMaximalIdeal);
    }
    let mut out = v.clone();
    let mut term = v.clone();
    let mut n = 0i64;
    loop {
        n += 1;
        term = bilinear(x, &term, &action)?.scale(&(q(1) / q(n)));
        if term.is_zero() {
            return Ok(out);
        }
        out = out.add(&term);
    }
}

/// Recovers `x` from a one-parameter family `t ↦ log φ(t)` of polynomial degree at most `degree_bound`.
pub fn one_param_decompose<V: Module, F: Fn(&Rational) -> AElem<V>>(
    log_phi: F,
    degree_bound: usize,
) -> Result<AElem<V>, ArtinError> {
    let d = degree_bound.max(1);
    let samples: Vec<AElem<V>> = (0..=d).map(|t| log_phi(&q(t as i64))).collect();
    let mut vander = ExactMatrix::zeros(d + 1, d + 1);
    for t in 0..=d {
        let mut p = q(1);
        for k in 0..=d {
            vander.set(t, k, p.clone());
            p *= q(t as i64);
        }
    }
    let inv = vander.inverse().expect("Vandermonde on distinct nodes is invertible");
    let coeff = |k: usize| {
        samples
            .iter()
            .enumerate()
            .fold(AElem::zero(samples[0].alg()), |acc, (t, s)| acc.add(&s.scale(inv.get(k, t))))
    };
    let check_t = q(d as i64 + 1);
    let mut predicted = AElem::zero(samples[0].alg());
    let mut p = q(1);
    let coeffs: Vec<AElem<V>> = (0..=d).map(coeff).collect();
    for c in &coeffs {
        predicted = predicted.add(&c.scale(&p));
        p *= check_t.clone();
    }
    if predicted != log_phi(&check_t) {
        return Err(ArtinError::DegreeBound(degree_bound));
    }
    if !coeffs[0].is_zero() {
        return Err(ArtinError::NotAHomomorphism("φ(0) is not the identity".into()));
    }
    if coeffs[2..].iter().any(|c| !c.is_zero()) {
        return Err(ArtinError::NotAHomomorphism("log φ(t) is not linear in t".into()));
    }
    if !coeffs[1].is_in_m() {
        return Err(ArtinError::NotInMaximalIdeal);
    }
    Ok(coeffs[1].clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eps(n: u32) -> Artin {
        Arc::new(ArtinAlgebra::truncated("eps", n).unwrap())
    }

    #[test]
    fn bases() {
        assert_eq!(eps(2).dim(), 2);
        assert_eq!(eps(2).nilpotency_order(), 2);
        assert_eq!(eps(4).dim(), 4);
        let a = ArtinAlgebra::new(&["e", "d"], &[vec![2, 0], vec![0, 2], vec![1, 1]]).unwrap();
        assert_eq!(a.dim(), 3);
        assert!(matches!(ArtinAlgebra::new(&["e", "d"], &[vec![2, 0]]), Err(ArtinError::InfiniteBasis(_))));
        assert_eq!(ArtinAlgebra::new(&["e"], &[vec![0]]), Err(ArtinError::UnitInIdeal));
    }

    #[test]
    fn chains() {
        let a = eps(3);
        let r = Arc::new(ArtinAlgebra::ground());
        let h = ArtinHom::new(&a, &r, vec![AScalar::zero(&r)]).unwrap();
        let chain = small_extension_chain(&h).unwrap();
        assert_eq!(chain.len(), 2);
        assert_eq!(chain[0].hom.target().dim(), 2);
        assert!(chain.iter().all(SmallExtension::check));
        assert_eq!(compose_chain(&a, &chain).unwrap(), h);
        assert!(small_extension_chain(&ArtinHom::identity(&a)).unwrap().is_empty());
    }

    #[test]
    fn chain_two_generators() {
        let a = Arc::new(ArtinAlgebra::new(&["e", "d"], &[vec![2, 0], vec![0, 2]]).unwrap());
        let b = Arc::new(ArtinAlgebra::new(&["e"], &[vec![2]]).unwrap());
        let h = ArtinHom::by_labels(&a, &b).unwrap();
        let chain = small_extension_chain(&h).unwrap();
        assert_eq!(chain.len(), 2);
        assert!(chain.iter().all(SmallExtension::check));
        assert_eq!(compose_chain(&a, &chain).unwrap(), h);
    }

    #[test]
    fn non_surjective_rejected() {
        let a = eps(2);
        let h = ArtinHom::new(&a, &a, vec![AScalar::zero(&a)]).unwrap();
        assert_eq!(small_extension_chain(&h), Err(ArtinError::NotSurjective));
    }

    fn vec_bracket(a: &Vec<Rational>, b: &Vec<Rational>) -> Vec<Rational> {
        vec![
            &a[1] * &b[2] - &a[2] * &b[1],
            &a[2] * &b[0] - &a[0] * &b[2],
            &a[0] * &b[1] - &a[1] * &b[0],
        ]
    }

    #[test]
    fn bch_second_order() {
        let a = eps(3);
        let x = AElem::basis_elem(&a, 1, vec![q(1), q(0), q(0)]);
        let y = AElem::basis_elem(&a, 1, vec![q(0), q(1), q(0)]);
        let z = bch(&x, &y, vec_bracket).unwrap();
        let expect = AElem::from_comps(&a, [(1, vec![q(1), q(1), q(0)]), (2, vec![q(0), q(0), crate::ring::qf(1, 2)])]);
        assert_eq!(z, expect);
        let a2 = eps(2);
        let x2 = AElem::basis_elem(&a2, 1, vec![q(1), q(0), q(0)]);
        let y2 = AElem::basis_elem(&a2, 1, vec![q(0), q(1), q(0)]);
        assert_eq!(bch(&x2, &y2, vec_bracket).unwrap(), x2.add(&y2));
    }

    #[test]
    fn word_series_low_order() {
        let s = bch_word_series(2);
        assert_eq!(s[&vec![0]], q(1));
        assert_eq!(s[&vec![0, 1]], crate::ring::qf(1, 2));
        assert_eq!(s[&vec![1, 0]], crate::ring::qf(-1, 2));
        assert!(!s.contains_key(&vec![0, 0]));
    }

    #[test]
    fn adjoint_exponential() {
        let a = eps(3);
        let x = AElem::basis_elem(&a, 1, vec![q(1), q(0), q(0)]);
        let v = AElem::basis_elem(&a, 1, vec![q(0), q(1), q(0)]);
        let e = exp_action(&x, &v, vec_bracket).unwrap();
        assert_eq!(e, v.add(&AElem::basis_elem(&a, 2, vec![q(0), q(0), q(1)])));
        assert_eq!(exp_action(&AElem::zero(&a), &v, vec_bracket).unwrap(), v);
    }

    #[test]
    fn one_param() {
        let a = eps(3);
        let x = AElem::basis_elem(&a, 1, vec![q(2), q(0), q(-1)]);
        let got = one_param_decompose(|t| x.scale(t), 3).unwrap();
        assert_eq!(got, x);
        let zero = one_param_decompose(|_| AElem::<Vec<Rational>>::zero(&a), 2).unwrap();
        assert!(zero.is_zero());
        let bad = one_param_decompose(|t| x.scale(&(t * t)), 3);
        assert!(matches!(bad, Err(ArtinError::NotAHomomorphism(_))));
    }
}
