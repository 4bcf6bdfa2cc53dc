// SPDX-License-Identifier: MIT OR Apache-2.0
//! Generalized complex structures, their `+i` eigenbundle, Dolbeault operator and symmetries.

use std::collections::BTreeMap;

use serde_json::{json, Value};
use thiserror::Error;

use crate::cartan::{increasing_tuples, DiffForm, QForm, QVectorField, VectorField};
use crate::courant::{CSection, CourantError, GenEndo, GenSection, QEndo, QSection};
use crate::ring::{gi, gq, q, CPoly, ExactMatrix, GaussianRational, Poly, QPoly, Rational, RingError, Scalar, Vars};

/// Errors raised by GC-structure operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GcsError {
    #[error("J does not square to −1")]
    NotAlmostComplex,
    #[error("J does not preserve the pairing")]
    NotOrthogonal,
    #[error("ω is degenerate")]
    Degenerate,
    #[error("ω is not skew-symmetric")]
    NotSkew,
    #[error("operation needs constant coefficients")]
    NonConstant,
    #[error("eigenspace has dimension {got}, expected {expected}")]
    EigenDimension { expected: usize, got: usize },
    #[error("algebroid frame is not closed under the bracket")]
    FrameNotAbelian,
    #[error("degree {0} is out of range")]
    Degree(usize),
    #[error(transparent)]
    Courant(#[from] CourantError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Generalized almost complex structure with polynomial entries, `J = [[J, P], [σ, K]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GCStructure {
    endo: QEndo,
}

fn qpoly_matrix(vars: &Vars, m: &ExactMatrix<Rational>) -> Vec<Vec<QPoly>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| QPoly::constant(vars, m.get(i, j).clone())).collect()).collect()
}

fn zero_block(vars: &Vars) -> Vec<Vec<QPoly>> {
    let n = vars.len();
    vec![vec![QPoly::zero(vars); n]; n]
}

fn mat_mul_poly(a: &[Vec<QPoly>], b: &[Vec<QPoly>], vars: &Vars) -> Vec<Vec<QPoly>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(QPoly::zero(vars), |acc, k| &acc + &(&a[i][k] * &b[k][j])))
                .collect()
        })
        .collect()
}

impl GCStructure {
    /// Wraps an endomorphism after checking `J² = −1` and that `J` is orthogonal.
    pub fn new(endo: QEndo) -> Result<Self, GcsError> {
        let vars = endo.vars().clone();
        let sq = endo.compose(&endo);
        if sq != GenEndo::identity(&vars).neg() {
            return Err(GcsError::NotAlmostComplex);
        }
        let m = endo.size();
        for i in 0..m {
            for j in i..m {
                let (ei, ej) = (QSection::basis(&vars, i), QSection::basis(&vars, j));
                if endo.apply(&ei).pairing(&endo.apply(&ej)) != ei.pairing(&ej) {
                    return Err(GcsError::NotOrthogonal);
                }
            }
        }
        Ok(GCStructure { endo })
    }

    /// `J_J = diag(−J, J∨)` from `jcx[i][j]` = the `∂_i` component of `J(∂_j)`.
    pub fn complex(vars: &Vars, jcx: &[Vec<QPoly>]) -> Result<Self, GcsError> {
        let n = vars.len();
        if jcx.len() != n || jcx.iter().any(|r| r.len() != n) {
            return Err(RingError::DimensionMismatch { expected: n, got: jcx.len() }.into());
        }
        let sq = mat_mul_poly(jcx, jcx, vars);
        for (i, row) in sq.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                let want = if i == j { QPoly::constant(vars, q(-1)) } else { QPoly::zero(vars) };
                if *e != want {
                    return Err(GcsError::NotAlmostComplex);
                }
            }
        }
        let neg: Vec<Vec<QPoly>> = jcx.iter().map(|r| r.iter().map(|p| -p).collect()).collect();
        let tr: Vec<Vec<QPoly>> = (0..n).map(|i| (0..n).map(|j| jcx[j][i].clone()).collect()).collect();
        Self::new(GenEndo::from_blocks(vars, &neg, &zero_block(vars), &zero_block(vars), &tr))
    }

    /// `J_ω = [[0, −ω⁻¹], [ω, 0]]` from `w[i][j] = ω(∂_i, ∂_j)`, with `ω(ξ) = ι(ξ)ω`.
    pub fn symplectic(vars: &Vars, w: &ExactMatrix<Rational>) -> Result<Self, GcsError> {
        let n = vars.len();
        if w.rows() != n || w.cols() != n {
            return Err(RingError::DimensionMismatch { expected: n, got: w.rows() }.into());
        }
        if *w != w.transpose().map_neg() {
            return Err(GcsError::NotSkew);
        }
        let flat = w.transpose();
        let inv = flat.inverse().ok_or(GcsError::Degenerate)?;
        let p = qpoly_matrix(vars, &inv.map_neg());
        let s = qpoly_matrix(vars, &flat);
        Self::new(GenEndo::from_blocks(vars, &zero_block(vars), &p, &s, &zero_block(vars)))
    }

    /// Symplectic structure from a constant 2-form.
    pub fn symplectic_form(omega: &QForm) -> Result<Self, GcsError> {
        let vars = omega.vars().clone();
        if omega.degree() != 2 {
            return Err(GcsError::Degree(omega.degree()));
        }
        let n = vars.len();
        let mut w = ExactMatrix::zeros(n, n);
        for (idx, c) in omega.terms() {
            if c.degree().unwrap_or(0) > 0 {
                return Err(GcsError::NonConstant);
            }
            w.set(idx[0], idx[1], c.constant_term());
            w.set(idx[1], idx[0], -c.constant_term());
        }
        Self::symplectic(&vars, &w)
    }

    /// Product structure on the concatenated chart.
    pub fn product(a: &GCStructure, b: &GCStructure) -> Result<Self, GcsError> {
        let (va, vb) = (a.vars().clone(), b.vars().clone());
        let labels: Vec<String> = va.iter().chain(vb.iter()).cloned().collect();
        let vars = crate::ring::vars(&labels);
        let (na, nb) = (va.len(), vb.len());
        let nn = na + nb;
        let embed_a: Vec<QPoly> = (0..na).map(|i| QPoly::var(&vars, i)).collect();
        let embed_b: Vec<QPoly> = (0..nb).map(|i| QPoly::var(&vars, na + i)).collect();
        let mut e = GenEndo::zero(&vars);
        let map_a = |i: usize| if i < na { i } else { nn + (i - na) };
        let map_b = |i: usize| if i < nb { na + i } else { nn + na + (i - nb) };
        for i in 0..2 * na {
            for j in 0..2 * na {
                e.set(map_a(i), map_a(j), a.endo.get(i, j).substitute(&embed_a, &vars)?);
            }
        }
        for i in 0..2 * nb {
            for j in 0..2 * nb {
                e.set(map_b(i), map_b(j), b.endo.get(i, j).substitute(&embed_b, &vars)?);
            }
        }
        Self::new(e)
    }

    /// Standard symplectic structure `ω = Σ ds_{m+i} ∧ ds_i` on `ℝ^{2m}`.
    pub fn standard_symplectic(m: usize) -> Self {
        let labels: Vec<String> = (1..=2 * m).map(|i| format!("s{i}")).collect();
        let vars = crate::ring::vars(&labels);
        let mut w = ExactMatrix::zeros(2 * m, 2 * m);
        for i in 0..m {
            w.set(m + i, i, q(1));
            w.set(i, m + i, q(-1));
        }
        Self::symplectic(&vars, &w).expect("standard ω is symplectic")
    }

    /// Standard complex structure `J(∂t_{2j−1}) = ∂t_{2j}` on `ℝ^{2n}`.
    pub fn standard_complex(n: usize) -> Self {
        let labels: Vec<String> = (1..=2 * n).map(|i| format!("t{i}")).collect();
        let vars = crate::ring::vars(&labels);
        let mut j = zero_block(&vars);
        for k in 0..n {
            j[2 * k + 1][2 * k] = QPoly::one(&vars);
            j[2 * k][2 * k + 1] = QPoly::constant(&vars, q(-1));
        }
        Self::complex(&vars, &j).expect("standard J is complex")
    }

    /// `X₀^{m,n} = J_ω × J_J` on `ℝ^{2m+2n}` with coordinates `s₁..s_{2m}, t₁..t_{2n}`.
    pub fn standard(m: usize, n: usize) -> Self {
        match (m, n) {
            (_, 0) => Self::standard_symplectic(m),
            (0, _) => Self::standard_complex(n),
            _ => Self::product(&Self::standard_symplectic(m), &Self::standard_complex(n)).expect("product of GC structures"),
        }
    }

    /// Conjugate `e^B J e^{−B}` by a closed 2-form.
    pub fn b_transform(&self, b: &QForm) -> Result<Self, GcsError> {
        if b.degree() != 2 && !b.is_zero() {
            return Err(CourantError::WrongDegree { expected: 2, got: b.degree() }.into());
        }
        if !b.ext_d().is_zero() {
            return Err(CourantError::NotClosed.into());
        }
        let vars = self.vars().clone();
        let m = self.endo.size();
        let cols_fwd: Vec<QSection> = (0..m).map(|j| QSection::basis(&vars, j).b_transform(b)).collect::<Result<_, _>>()?;
        let nb = b.neg();
        let cols_back: Vec<QSection> = (0..m).map(|j| QSection::basis(&vars, j).b_transform(&nb)).collect::<Result<_, _>>()?;
        let fwd = GenEndo::from_columns(&vars, &cols_fwd);
        let back = GenEndo::from_columns(&vars, &cols_back);
        Self::new(fwd.compose(&self.endo).compose(&back))
    }

    pub fn endo(&self) -> &QEndo {
        &self.endo
    }

    pub fn vars(&self) -> &Vars {
        self.endo.vars()
    }

    pub fn dim(&self) -> usize {
        self.vars().len()
    }

    pub fn apply(&self, x: &QSection) -> QSection {
        self.endo.apply(x)
    }

    pub fn apply_c(&self, x: &CSection) -> CSection {
        self.endo.complexify().apply(x)
    }

    /// The Poisson block `P = J₁₂`.
    pub fn poisson(&self) -> Vec<Vec<QPoly>> {
        self.endo.block(0, 1)
    }

    /// Whether `P` is skew: `a(P b) = −b(P a)`.
    pub fn poisson_is_skew(&self) -> bool {
        let p = self.poisson();
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| p[i][j] == -&p[j][i]))
    }

    /// `dim/2 − ½ rank P` at a rational point.
    pub fn type_at(&self, point: &[Rational]) -> Result<usize, GcsError> {
        let n = self.dim();
        let p = self.poisson();
        let mut m = ExactMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, p[i][j].eval(point)?);
            }
        }
        Ok(n / 2 - m.rank() / 2)
    }

    /// Whether the type is constant over a grid of rational points.
    pub fn is_regular_on(&self, points: &[Vec<Rational>]) -> Result<bool, GcsError> {
        let types: Vec<usize> = points.iter().map(|p| self.type_at(p)).collect::<Result<_, _>>()?;
        Ok(types.windows(2).all(|w| w[0] == w[1]))
    }

    /// `N(A,B) = [JA,JB]_C − J[JA,B]_C − J[A,JB]_C − [A,B]_C`.
    pub fn nijenhuis(&self, a: &QSection, b: &QSection) -> QSection {
        let (ja, jb) = (self.apply(a), self.apply(b));
        ja.courant(&jb)
            .sub(&self.apply(&ja.courant(b)))
            .sub(&self.apply(&a.courant(&jb)))
            .sub(&a.courant(b))
    }

    /// Nonzero values of the Nijenhuis tensor on pairs of frame sections.
    pub fn nijenhuis_residuals(&self) -> Vec<(usize, usize, QSection)> {
        let vars = self.vars().clone();
        let m = self.endo.size();
        let mut out = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                let r = self.nijenhuis(&QSection::basis(&vars, i), &QSection::basis(&vars, j));
                if !r.is_zero() {
                    out.push((i, j, r));
                }
            }
        }
        out
    }

    pub fn is_integrable(&self) -> bool {
        self.nijenhuis_residuals().is_empty()
    }

    /// Exact `ℚ[i]` frame of `L = ker(J − i)` and its conjugate.
    pub fn l_frame(&self) -> Result<LFrame, GcsError> {
        let jm = self.endo.constant_matrix().ok_or(GcsError::NonConstant)?;
        let m = jm.rows();
        let mut shifted: ExactMatrix<GaussianRational> = ExactMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                let mut v = gq(jm.get(i, j).clone(), q(0));
                if i == j {
                    v = v - gi();
                }
                shifted.set(i, j, v);
            }
        }
        let ker = shifted.kernel_basis();
        if ker.len() != m / 2 {
            return Err(GcsError::EigenDimension { expected: m / 2, got: ker.len() });
        }
        let vars = self.vars().clone();
        let l: Vec<CSection> = ker
            .iter()
            .map(|v| {
                let polys: Vec<CPoly> = v.iter().map(|c| CPoly::constant(&vars, c.clone())).collect();
                GenSection::from_vec(&vars, &polys)
            })
            .collect();
        LFrame::new(&vars, l)
    }

    /// `J(0, df_R) + (0, df_I)`, i.e. `Re(J(0,df) − (0, i df))`.
    pub fn gen_hamiltonian(&self, f: &CPoly) -> QSection {
        let (fr, fi) = (f.re_part(), f.im_part());
        let dfr = DiffForm::function(&fr).ext_d();
        let dfi = DiffForm::function(&fi).ext_d();
        self.apply(&QSection::from_form(dfr)).add(&QSection::from_form(dfi))
    }

    /// `h` with `[x_f, x_g] = x_h` under the `ĝ` bracket; for real `f, g` it is `ι(Pdf)dg + iι(Pdf)Kdg`.
    pub fn hamiltonian_bracket_witness(&self, f: &CPoly, g: &CPoly) -> CPoly {
        let (fr, fi, gr, gi_) = (f.re_part(), f.im_part(), g.re_part(), g.im_part());
        let d = |p: &QPoly| DiffForm::function(p).ext_d();
        let pd = |p: &QPoly| self.apply(&QSection::from_form(d(p)));
        let (pfr, pgr) = (pd(&fr), pd(&gr));
        let real = d(&gr).contract(&pfr.vf).as_function();
        let imag = pgr.form.contract(&pfr.vf).as_function();
        let mixed_fg = d(&gi_).contract(&pfr.vf).as_function();
        let mixed_gf = d(&fi).contract(&pgr.vf).as_function();
        let im_total = &(&imag + &mixed_fg) - &mixed_gf;
        let ctx = f.vars();
        Poly::from_terms(ctx, real.complexify().terms().map(|(m, c)| (m.clone(), c.clone())))
            + im_total.complexify().scale(&gi())
    }

    /// `δ_L μ(x)` together with `x·J`, which vanish together.
    pub fn holomorphy(&self, x: &QSection) -> Result<HolomorphyWitness, GcsError> {
        let frame = self.l_frame()?;
        let cx = x.complexify();
        let delta_mu = frame.complex().delta(&frame.mu(&cx))?;
        let x_dot_j = GenEndo::inf_action(x, &self.endo);
        Ok(HolomorphyWitness { delta_mu, x_dot_j })
    }

    pub fn to_json(&self) -> Value {
        json!({"kind": "matrix", "data": self.endo.to_json()})
    }

    /// Parses `{"kind": "symplectic"|"complex"|"product"|"standard"|"matrix", "data": ..}`.
    pub fn from_json(v: &Value) -> Result<Self, GcsError> {
        let bad = |m: &str| GcsError::Parse(m.to_string());
        let kind = v.get("kind").and_then(Value::as_str).ok_or_else(|| bad("structure needs `kind`"))?;
        let data = v.get("data").ok_or_else(|| bad("structure needs `data`"))?;
        let labels = |d: &Value| -> Result<Vars, GcsError> {
            let vs: Vec<String> = d
                .get("vars")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("data needs `vars`"))?
                .iter()
                .map(|s| s.as_str().map(str::to_string).ok_or_else(|| bad("bad label")))
                .collect::<Result<_, _>>()?;
            Ok(crate::ring::vars(&vs))
        };
        let rat_matrix = |d: &Value, key: &str| -> Result<ExactMatrix<Rational>, GcsError> {
            let rows = d.get(key).and_then(Value::as_array).ok_or_else(|| bad("missing matrix"))?;
            let rows: Vec<Vec<Rational>> = rows
                .iter()
                .map(|r| {
                    r.as_array()
                        .ok_or_else(|| bad("row must be a list"))?
                        .iter()
                        .map(|x| Rational::from_json(x).map_err(GcsError::from))
                        .collect()
                })
                .collect::<Result<_, _>>()?;
            Ok(ExactMatrix::from_rows(rows)?)
        };
        match kind {
            "standard" => {
                let m = data.get("m").and_then(Value::as_u64).ok_or_else(|| bad("standard needs `m`"))? as usize;
                let n = data.get("n").and_then(Value::as_u64).ok_or_else(|| bad("standard needs `n`"))? as usize;
                Ok(Self::standard(m, n))
            }
            "symplectic" => {
                let vars = labels(data)?;
                Self::symplectic(&vars, &rat_matrix(data, "omega")?)
            }
            "complex" => {
                let vars = labels(data)?;
                let rows = data.get("J").and_then(Value::as_array).ok_or_else(|| bad("complex needs `J`"))?;
                let j: Vec<Vec<QPoly>> = rows
                    .iter()
                    .map(|r| {
                        r.as_array()
                            .ok_or_else(|| bad("row must be a list"))?
                            .iter()
                            .map(|p| match p {
                                Value::Object(_) => QPoly::from_json_in(p, &vars).map_err(GcsError::from),
                                _ => Ok(QPoly::constant(&vars, Rational::from_json(p)?)),
                            })
                            .collect()
                    })
                    .collect::<Result<_, _>>()?;
                Self::complex(&vars, &j)
            }
            "product" => {
                let parts = data.as_array().ok_or_else(|| bad("product needs a list"))?;
                let mut it = parts.iter();
                let mut acc = Self::from_json(it.next().ok_or_else(|| bad("empty product"))?)?;
                for p in it {
                    acc = Self::product(&acc, &Self::from_json(p)?)?;
                }
                Ok(acc)
            }
            "matrix" => {
                let vars = labels(data)?;
                Self::new(GenEndo::from_json(data, &vars)?)
            }
            other => Err(bad(&format!("unknown structure kind `{other}`"))),
        }
    }
}

trait MapNeg {
    fn map_neg(&self) -> Self;
}

impl MapNeg for ExactMatrix<Rational> {
    fn map_neg(&self) -> Self {
        let mut m = self.clone();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                m.set(i, j, -m.get(i, j).clone());
            }
        }
        m
    }
}

/// Almost complex structure `A J₀ A⁻¹` on `ℝ⁴` with the shear `A = 1 + t₁E₁₃`, which is not integrable.
pub fn sheared_complex() -> GCStructure {
    let v = GCStructure::standard_complex(2).vars().clone();
    let mut j0 = zero_block(&v);
    for k in 0..2 {
        j0[2 * k + 1][2 * k] = QPoly::one(&v);
        j0[2 * k][2 * k + 1] = QPoly::constant(&v, q(-1));
    }
    let t1 = QPoly::var(&v, 0);
    let mut a = zero_block(&v);
    let mut ai = zero_block(&v);
    for i in 0..4 {
        a[i][i] = QPoly::one(&v);
        ai[i][i] = QPoly::one(&v);
    }
    a[0][2] = t1.clone();
    ai[0][2] = -&t1;
    let j = mat_mul_poly(&mat_mul_poly(&a, &j0, &v), &ai, &v);
    GCStructure::complex(&v, &j).expect("conjugate of a complex structure")
}

/// Result of a holomorphy test.
#[derive(Clone, Debug, PartialEq)]
pub struct HolomorphyWitness {
    pub delta_mu: AlgebroidForm,
    pub x_dot_j: QEndo,
}

impl HolomorphyWitness {
    pub fn is_holomorphic(&self) -> bool {
        self.x_dot_j.is_zero()
    }

    /// Whether the two criteria agree.
    pub fn consistent(&self) -> bool {
        self.delta_mu.is_zero() == self.x_dot_j.is_zero()
    }
}

/// Constant frame of `L` with its conjugate and the dual pairing.
#[derive(Clone, Debug, PartialEq)]
pub struct LFrame {
    vars: Vars,
    l: Vec<CSection>,
    lbar: Vec<CSection>,
    pairing: ExactMatrix<GaussianRational>,
    pairing_inv: ExactMatrix<GaussianRational>,
}

impl LFrame {
    /// Builds from sections of `L`, verifying isotropy and nondegeneracy against `L̄`.
    pub fn new(vars: &Vars, l: Vec<CSection>) -> Result<Self, GcsError> {
        let lbar: Vec<CSection> = l.iter().map(GenSection::conj).collect();
        let n = l.len();
        let mut pairing = ExactMatrix::zeros(n, n);
        for (j, b) in lbar.iter().enumerate() {
            for (k, a) in l.iter().enumerate() {
                pairing.set(j, k, b.pairing(a).scale_q(&q(2)).constant_term());
            }
            for a in &l {
                if !l[j].pairing(a).is_zero() {
                    return Err(GcsError::EigenDimension { expected: n, got: 0 });
                }
            }
        }
        let pairing_inv = pairing.inverse().ok_or(GcsError::Degenerate)?;
        Ok(LFrame { vars: vars.clone(), l, lbar, pairing, pairing_inv })
    }

    pub fn l(&self) -> &[CSection] {
        &self.l
    }

    pub fn lbar(&self) -> &[CSection] {
        &self.lbar
    }

    pub fn rank(&self) -> usize {
        self.l.len()
    }

    /// Matrix `2⟨l̄_j, l_k⟩`.
    pub fn pairing_matrix(&self) -> &ExactMatrix<GaussianRational> {
        &self.pairing
    }

    /// `μ(x)(l_k) = 2⟨x, l_k⟩`.
    pub fn mu(&self, x: &CSection) -> AlgebroidForm {
        let mut out = AlgebroidForm::zero(&self.vars, 1);
        for (k, v) in self.l.iter().enumerate() {
            out.add_term(vec![k], x.pairing(v).scale_q(&q(2)));
        }
        out
    }

    /// The real section `x` with `μ(x) = α`.
    pub fn mu_inverse(&self, alpha: &AlgebroidForm) -> Result<QSection, GcsError> {
        if alpha.degree() != 1 {
            return Err(GcsError::Degree(alpha.degree()));
        }
        let n = self.rank();
        let mut x01 = CSection::zero(&self.vars);
        for j in 0..n {
            let mut c = CPoly::zero(&self.vars);
            for k in 0..n {
                c = &c + &alpha.coeff(&[k]).scale(self.pairing_inv.get(k, j));
            }
            x01 = x01.add(&self.lbar[j].mul_fn(&c));
        }
        Ok(x01.re_part().scale(&q(2)))
    }

    /// The Lie algebroid complex of `L` with anchors `π(l_k)`.
    pub fn complex(&self) -> AlgebroidComplex {
        AlgebroidComplex { vars: self.vars.clone(), anchors: self.l.iter().map(|v| v.vf.clone()).collect() }
    }
}

/// Chevalley–Eilenberg complex of a Lie algebroid with a constant abelian frame.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebroidComplex {
    vars: Vars,
    anchors: Vec<VectorField<GaussianRational>>,
}

impl AlgebroidComplex {
    /// Builds the complex after checking that the frame sections pairwise bracket to zero.
    pub fn from_frame(vars: &Vars, frame: &[CSection]) -> Result<Self, GcsError> {
        for a in frame {
            for b in frame {
                if !a.dorfman(b).is_zero() {
                    return Err(GcsError::FrameNotAbelian);
                }
            }
        }
        Ok(AlgebroidComplex { vars: vars.clone(), anchors: frame.iter().map(|v| v.vf.clone()).collect() })
    }

    /// Complex with the given constant anchors.
    pub fn from_anchors(vars: &Vars, anchors: Vec<VectorField<GaussianRational>>) -> Self {
        AlgebroidComplex { vars: vars.clone(), anchors }
    }

    pub fn rank(&self) -> usize {
        self.anchors.len()
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn anchors(&self) -> &[VectorField<GaussianRational>] {
        &self.anchors
    }

    /// `δ(f θ^I) = Σ_j π(v_j)(f) θ^j ∧ θ^I`.
    pub fn delta(&self, alpha: &AlgebroidForm) -> Result<AlgebroidForm, GcsError> {
        let r = self.rank();
        if alpha.degree() > r {
            return Err(GcsError::Degree(alpha.degree()));
        }
        let mut out = AlgebroidForm::zero(&self.vars, alpha.degree() + 1);
        for (idx, c) in &alpha.terms {
            for (j, a) in self.anchors.iter().enumerate() {
                if idx.contains(&j) {
                    continue;
                }
                let dc = a.apply(c);
                if dc.is_zero() {
                    continue;
                }
                let pos = idx.iter().filter(|&&i| i < j).count();
                let mut full = idx.clone();
                full.insert(pos, j);
                out.add_term(full, if pos % 2 == 1 { -dc } else { dc });
            }
        }
        Ok(out)
    }
}

/// Section of `Λ^k` of the dual of an algebroid frame, stored on sorted index tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebroidForm {
    vars: Vars,
    deg: usize,
    terms: BTreeMap<Vec<usize>, CPoly>,
}

impl AlgebroidForm {
    pub fn zero(vars: &Vars, deg: usize) -> Self {
        AlgebroidForm { vars: vars.clone(), deg, terms: BTreeMap::new() }
    }

    pub fn function(f: &CPoly) -> Self {
        let mut a = Self::zero(f.vars(), 0);
        a.add_term(vec![], f.clone());
        a
    }

    pub fn degree(&self) -> usize {
        self.deg
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &CPoly)> {
        self.terms.iter()
    }

    pub fn coeff(&self, idx: &[usize]) -> CPoly {
        self.terms.get(idx).cloned().unwrap_or_else(|| CPoly::zero(&self.vars))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c` at a sorted index tuple.
    pub fn add_term(&mut self, idx: Vec<usize>, c: CPoly) {
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
        let mut out = self.clone();
        for (i, c) in &other.terms {
            out.add_term(i.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, k: &GaussianRational) -> Self {
        let mut out = Self::zero(&self.vars, self.deg);
        for (i, c) in &self.terms {
            out.add_term(i.clone(), c.scale(k));
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&gq(q(-1), q(0)))
    }

    /// Applies a map to every coefficient.
    pub fn map<F: Fn(&CPoly) -> CPoly>(&self, f: F) -> Self {
        let mut out = Self::zero(&self.vars, self.deg);
        for (i, c) in &self.terms {
            out.add_term(i.clone(), f(c));
        }
        out
    }

    /// Moves coefficients into another chart.
    pub fn with_vars(&self, vars: &Vars, f: impl Fn(&CPoly) -> CPoly) -> Self {
        let mut out = Self::zero(vars, self.deg);
        for (i, c) in &self.terms {
            out.add_term(i.clone(), f(c));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self.terms.iter().map(|(i, c)| json!({"idx": i, "coef": c.to_json()})).collect();
        json!({"deg": self.deg, "terms": terms})
    }
}

impl crate::artin::Module for AlgebroidForm {
    fn add(&self, other: &Self) -> Self {
        AlgebroidForm::add(self, other)
    }
    fn scale(&self, r: &Rational) -> Self {
        AlgebroidForm::scale(self, &gq(r.clone(), q(0)))
    }
    fn is_zero(&self) -> bool {
        AlgebroidForm::is_zero(self)
    }
}

/// Dimension of the space of algebroid `k`-forms whose coefficients have degree at most `d`.
pub fn form_space_dim(nvars: usize, rank: usize, k: usize, d: u32) -> usize {
    increasing_tuples(rank, k).len() * crate::ring::monomials_up_to(nvars, d).len()
}

/// `ι(ξ)ω` as a map on vector fields, for tests that need `ω♭`.
pub fn flat(omega: &QForm, xi: &QVectorField) -> QForm {
    omega.contract(xi)
}

/// `∂̄ f` for the standard complex structure on `ℝ^{2n}`: the `(0,1)` part `Σ ½(∂_{2j−1} + i∂_{2j}) f dz̄_j`.
pub fn dbar_standard(f: &CPoly) -> DiffForm<GaussianRational> {
    let vars = f.vars().clone();
    let n = vars.len() / 2;
    let half = gq(crate::ring::qf(1, 2), q(0));
    let mut out = DiffForm::zero(&vars, 1);
    for j in 0..n {
        let (a, b) = (2 * j, 2 * j + 1);
        let coef = (&f.partial(a) + &f.partial(b).scale(&gi())).scale(&half);
        let dzbar = DiffForm::dx(&vars, a).add(&DiffForm::dx(&vars, b).scale(&-gi()));
        out = out.add(&dzbar.mul_fn(&coef));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::vars;

    #[test]
    fn standard_models_are_integrable() {
        for (m, n) in [(1, 0), (0, 1), (1, 1), (2, 0), (0, 2)] {
            let j = GCStructure::standard(m, n);
            assert!(j.is_integrable(), "({m},{n})");
            assert!(j.poisson_is_skew());
            let origin = vec![q(0); j.dim()];
            assert_eq!(j.type_at(&origin).unwrap(), n);
        }
    }

    #[test]
    fn symplectic_table() {
        let j = GCStructure::standard(1, 0);
        let v = j.vars().clone();
        let (ex, ey, dx, dy) = (QSection::basis(&v, 0), QSection::basis(&v, 1), QSection::basis(&v, 2), QSection::basis(&v, 3));
        assert_eq!(j.apply(&ex), dy.neg());
        assert_eq!(j.apply(&ey), dx);
        assert_eq!(j.apply(&dx), ey.neg());
        assert_eq!(j.apply(&dy), ex);
    }

    #[test]
    fn symplectic_l_is_graph() {
        let j = GCStructure::standard(1, 0);
        let frame = j.l_frame().unwrap();
        let v = j.vars().clone();
        for s in frame.l() {
            // L = {(ξ, −iι(ξ)ω)} with ω = ds₂ ∧ ds₁.
            let w = QForm::monomial(&QPoly::one(&v), &[1, 0]).complexify();
            assert_eq!(s.form, w.contract(&s.vf).scale(&-gi()));
        }
    }

    #[test]
    fn complex_l_components() {
        let j = GCStructure::standard(0, 1);
        let frame = j.l_frame().unwrap();
        for s in frame.l() {
            // vector part in T^{0,1}: proportional to ∂₁ + i∂₂; form part in T*^{1,0}: proportional to dt₁ + i dt₂.
            let (a, b) = (s.vf.comp(0).constant_term(), s.vf.comp(1).constant_term());
            assert_eq!(b, a.clone() * gi());
            let (c, d) = (s.form.coeff(&[0]).constant_term(), s.form.coeff(&[1]).constant_term());
            assert_eq!(d, c.clone() * gi());
        }
    }

    #[test]
    fn rejects_bad_input() {
        let v = vars(&["a", "b"]);
        let id = vec![vec![QPoly::one(&v), QPoly::zero(&v)], vec![QPoly::zero(&v), QPoly::one(&v)]];
        assert_eq!(GCStructure::complex(&v, &id), Err(GcsError::NotAlmostComplex));
        let w = ExactMatrix::zeros(2, 2);
        assert_eq!(GCStructure::symplectic(&v, &w), Err(GcsError::Degenerate));
    }

    fn random_cpoly(rng: &mut rand_chacha::ChaCha8Rng, v: &Vars, deg: u32) -> CPoly {
        let re = crate::ring::random_poly(rng, v, deg, 3, 0.5);
        let im = crate::ring::random_poly(rng, v, deg, 3, 0.5);
        &re.complexify() + &im.complexify().scale(&gi())
    }

    #[test]
    fn hamiltonian_closure_standard() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let j = GCStructure::standard(1, 1);
        let v = j.vars().clone();
        for _ in 0..20 {
            let (f, g) = (random_cpoly(&mut rng, &v, 3), random_cpoly(&mut rng, &v, 3));
            let lhs = j.gen_hamiltonian(&f).ghat_bracket(&j.gen_hamiltonian(&g));
            let h = j.hamiltonian_bracket_witness(&f, &g);
            assert_eq!(lhs, j.gen_hamiltonian(&h));
        }
    }

    #[test]
    fn hamiltonian_is_dolbeault() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let j = GCStructure::standard(1, 1);
        let v = j.vars().clone();
        let frame = j.l_frame().unwrap();
        for _ in 0..10 {
            let f = random_cpoly(&mut rng, &v, 3);
            let mu = frame.mu(&j.gen_hamiltonian(&f).complexify());
            let df = frame.complex().delta(&AlgebroidForm::function(&f)).unwrap();
            assert_eq!(mu, df.scale(&-gi()));
        }
    }

    #[test]
    fn complex_hamiltonian_matches_dbar() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let j = GCStructure::standard(0, 1);
        let v = j.vars().clone();
        for _ in 0..10 {
            let f = random_cpoly(&mut rng, &v, 3);
            let x = j.gen_hamiltonian(&f);
            assert!(x.vf.is_zero());
            let want = dbar_standard(&f).scale(&gi()).re_part().scale(&q(-2));
            assert_eq!(x.form, want);
        }
    }

    #[test]
    fn mu_inverse_roundtrip() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(10);
        let j = GCStructure::standard(1, 1);
        let v = j.vars().clone();
        let frame = j.l_frame().unwrap();
        for _ in 0..10 {
            let x = QSection::new(
                crate::cartan::random_vf(&mut rng, &v, 2, 3, 0.5),
                crate::cartan::random_form(&mut rng, &v, 1, 2, 3, 0.5),
            )
            .unwrap();
            assert_eq!(frame.mu_inverse(&frame.mu(&x.complexify())).unwrap(), x);
        }
    }

    #[test]
    fn holomorphy_criteria_agree() {
        let j = GCStructure::standard(0, 1);
        let v = j.vars().clone();
        let t1 = QPoly::var(&v, 0);
        let t2 = QPoly::var(&v, 1);
        // ∂₁ is holomorphic; t₁∂₁ is not.
        let hol = QSection::basis(&v, 0);
        let w = j.holomorphy(&hol).unwrap();
        assert!(w.is_holomorphic() && w.consistent());
        let non = QSection::from_vf(VectorField::coord(&v, 0).mul_fn(&t1));
        let w = j.holomorphy(&non).unwrap();
        assert!(!w.is_holomorphic() && w.consistent());
        // z∂_z + z̄∂_z̄ = t₁∂₁ + t₂∂₂ is holomorphic.
        let euler = QSection::from_vf(VectorField::from_comps(&v, vec![t1, t2]).unwrap());
        assert!(j.holomorphy(&euler).unwrap().is_holomorphic());
    }

    #[test]
    fn b_transforms_stay_integrable() {
        let j = GCStructure::standard(1, 1);
        let v = j.vars().clone();
        let u = QForm::one_form(&v, &[QPoly::var(&v, 2).pow(2), QPoly::var(&v, 0) * QPoly::var(&v, 3), QPoly::zero(&v), QPoly::var(&v, 1)]);
        let jb = j.b_transform(&u.ext_d()).unwrap();
        assert!(jb.is_integrable());
        assert_ne!(jb, j);
    }

    fn apply_jcx(j: &[Vec<QPoly>], x: &QVectorField) -> QVectorField {
        let v = x.vars().clone();
        let comps = (0..j.len())
            .map(|i| (0..j.len()).fold(QPoly::zero(&v), |acc, k| &acc + &(&j[i][k] * x.comp(k))))
            .collect();
        VectorField::from_comps(&v, comps).unwrap()
    }

    #[test]
    fn sheared_structure_is_not_integrable() {
        let g = sheared_complex();
        let res = g.nijenhuis_residuals();
        assert_eq!(res.len(), 13);
        let v = g.vars().clone();
        let (e1, e3) = (QSection::basis(&v, 0), QSection::basis(&v, 2));
        assert_eq!(g.nijenhuis(&e1, &e3), e1.neg());
        // On vector fields the generalized tensor reduces to the classical one.
        let j: Vec<Vec<QPoly>> = g.endo().block(0, 0).iter().map(|r| r.iter().map(|p| -p).collect()).collect();
        for a in 0..4 {
            for b in 0..4 {
                let (x, y) = (VectorField::coord(&v, a), VectorField::coord(&v, b));
                let (jx, jy) = (apply_jcx(&j, &x), apply_jcx(&j, &y));
                let classical = jx
                    .lie_bracket(&jy)
                    .add(&apply_jcx(&j, &jx.lie_bracket(&y)).neg())
                    .add(&apply_jcx(&j, &x.lie_bracket(&jy)).neg())
                    .add(&x.lie_bracket(&y).neg());
                let n = g.nijenhuis(&QSection::from_vf(x), &QSection::from_vf(y));
                assert_eq!(n.vf, classical);
                assert!(n.form.is_zero());
            }
        }
    }
}
