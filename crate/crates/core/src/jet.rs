//! Jet curves of hypersurfaces along the line `l = {x_1 = … = x_n = 0}`,
//! the matrix `A_C`, the Euler index and discriminant membership.

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exactalg::rational::{self, serde_rational, Rational};
use crate::exactalg::{bf_gcd_all, det_exact, kernel_exact, BinaryForm, RatMatrix};

/// One monomial `c · u^{e_u} v^{e_v} x_1^{e_1} ⋯ x_n^{e_n}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub exps: Vec<u32>,
    #[serde(with = "serde_rational")]
    pub c: Rational,
}

/// A real hypersurface of degree `2n - 1` in `P^{n+1}` with coordinates
/// `(u, v, x_1, …, x_n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawHypersurface")]
pub struct Hypersurface {
    n: usize,
    terms: Vec<Term>,
}

#[derive(Deserialize)]
struct RawHypersurface {
    n: usize,
    terms: Vec<Term>,
}

impl TryFrom<RawHypersurface> for Hypersurface {
    type Error = Error;
    fn try_from(raw: RawHypersurface) -> Result<Self> {
        Hypersurface::new(raw.n, raw.terms)
    }
}

impl Hypersurface {
    /// Validates arity and degree and merges repeated monomials.
    pub fn new(n: usize, terms: Vec<Term>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("n must be at least 2, got {n}")));
        }
        let deg = (2 * n - 1) as u32;
        let mut merged: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
        for t in terms {
            if t.exps.len() != n + 2 {
                return Err(Error::InvalidInput(format!(
                    "monomial {:?} has {} exponents, expected {}",
                    t.exps,
                    t.exps.len(),
                    n + 2
                )));
            }
            let total: u32 = t.exps.iter().sum();
            if total != deg {
                return Err(Error::InvalidInput(format!(
                    "monomial {:?} has degree {total}, expected {deg}",
                    t.exps
                )));
            }
            *merged.entry(t.exps).or_insert_with(Rational::zero) += t.c;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(exps, c)| Term { exps, c })
            .collect();
        Ok(Hypersurface { n, terms })
    }

    /// Builds `Σ x_k p_k(u, v)` from a jet curve (no higher-order part).
    pub fn from_jet(c: &JetCurve) -> Self {
        let n = c.n();
        let d = 2 * n - 2;
        let mut terms = Vec::new();
        for (k, p) in c.p().iter().enumerate() {
            for (j, coef) in p.coeffs().iter().enumerate() {
                if coef.is_zero() {
                    continue;
                }
                let mut exps = vec![0u32; n + 2];
                exps[0] = (d - j) as u32;
                exps[1] = j as u32;
                exps[2 + k] = 1;
                terms.push(Term { exps, c: coef.clone() });
            }
        }
        Hypersurface::new(n, terms).expect("well-formed by construction")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_vars(&self) -> usize {
        self.n + 2
    }

    pub fn degree(&self) -> usize {
        2 * self.n - 1
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn add_term(&self, exps: Vec<u32>, c: Rational) -> Result<Self> {
        let mut terms = self.terms.clone();
        terms.push(Term { exps, c });
        Hypersurface::new(self.n, terms)
    }

    /// True when no monomial is a pure `(u, v)`-monomial.
    pub fn contains_standard_line(&self) -> bool {
        self.terms.iter().all(|t| t.exps[2..].iter().any(|&e| e > 0))
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.terms
            .iter()
            .map(|t| {
                t.exps
                    .iter()
                    .zip(x)
                    .fold(t.c.clone(), |acc, (&e, xi)| acc * num_traits::pow(xi.clone(), e as usize))
            })
            .sum()
    }

    /// Coefficients as doubles with exponent vectors, for numeric evaluation.
    pub fn to_f64_terms(&self) -> Vec<(Vec<u32>, f64)> {
        self.terms
            .iter()
            .map(|t| (t.exps.clone(), rational::to_f64(&t.c)))
            .collect()
    }
}

/// `C = [p_1 : … : p_n]`, `n` binary forms of degree `2n - 2` without a common root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawJet")]
pub struct JetCurve {
    n: usize,
    p: Vec<BinaryForm>,
}

#[derive(Deserialize)]
struct RawJet {
    n: usize,
    p: Vec<BinaryForm>,
}

impl TryFrom<RawJet> for JetCurve {
    type Error = Error;
    fn try_from(raw: RawJet) -> Result<Self> {
        if raw.n != raw.p.len() {
            return Err(Error::InvalidInput(format!(
                "n = {} but {} components given",
                raw.n,
                raw.p.len()
            )));
        }
        let p = raw.p.into_iter().map(BinaryForm::checked).collect::<Result<Vec<_>>>()?;
        JetCurve::new(p)
    }
}

impl JetCurve {
    pub fn new(p: Vec<BinaryForm>) -> Result<Self> {
        let n = p.len();
        if n < 2 {
            return Err(Error::InvalidInput(format!("a jet curve needs n >= 2 components, got {n}")));
        }
        let d = 2 * n - 2;
        if let Some(bad) = p.iter().find(|f| f.degree() != d) {
            return Err(Error::InvalidInput(format!(
                "component {bad} has degree {}, expected {d}",
                bad.degree()
            )));
        }
        if p.iter().all(BinaryForm::is_zero) {
            return Err(Error::SingularAlongLine("all components vanish".into()));
        }
        let g = bf_gcd_all(&p)?;
        if g.degree() > 0 {
            return Err(Error::SingularAlongLine(g.to_string()));
        }
        Ok(JetCurve { n, p })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Result<Self> {
        Self::new(rows.iter().map(|r| BinaryForm::from_i64(r)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        2 * self.n - 2
    }

    pub fn p(&self) -> &[BinaryForm] {
        &self.p
    }

    /// `λ · p = Σ λ_i p_i` for a rational covector.
    pub fn dot(&self, lambda: &[Rational]) -> BinaryForm {
        let mut acc = BinaryForm::zero(self.degree());
        for (l, f) in lambda.iter().zip(&self.p) {
            if !l.is_zero() {
                acc = acc.add(&f.scale(l)).expect("equal degrees");
            }
        }
        acc
    }

    /// `n × (2n - 1)` coefficient matrix, row `k` holding the coefficients of `p_k`.
    pub fn coefficient_matrix(&self) -> RatMatrix {
        RatMatrix::from_rows(self.p.iter().map(|f| f.coeffs().to_vec()).collect())
            .expect("equal degrees")
    }

    pub fn coefficients_f64(&self) -> Vec<Vec<f64>> {
        self.p.iter().map(BinaryForm::to_f64).collect()
    }

    /// Point `C(u, v) ∈ C^n`.
    pub fn eval_c(&self, u: Complex64, v: Complex64) -> Vec<Complex64> {
        self.coefficients_f64()
            .iter()
            .map(|c| {
                let cc: Vec<Complex64> = c.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                crate::exactalg::fform::eval_form_c(&cc, u, v)
            })
            .collect()
    }

    pub fn eval(&self, u: &Rational, v: &Rational) -> Vec<Rational> {
        self.p.iter().map(|f| f.eval(u, v)).collect()
    }

    /// Coordinate change `p ↦ M p` in `P^{n-1}`.
    pub fn transform_x(&self, m: &RatMatrix) -> Result<Self> {
        if m.rows() != self.n || m.cols() != self.n {
            return Err(Error::InvalidInput("coordinate change has wrong size".into()));
        }
        let p = (0..self.n)
            .map(|i| self.dot(m.row(i)))
            .collect();
        JetCurve::new(p)
    }

    /// Reparameterization `(u, v) ↦ (a u + b v, c u + d v)`.
    pub fn reparameterize(&self, a: &Rational, b: &Rational, c: &Rational, d: &Rational) -> Result<Self> {
        JetCurve::new(self.p.iter().map(|f| f.substitute_linear(a, b, c, d)).collect())
    }

    /// `(1 - t) C0 + t C1`.
    pub fn interpolate(c0: &JetCurve, c1: &JetCurve, t: &Rational) -> Result<Self> {
        if c0.n != c1.n {
            return Err(Error::InvalidInput("curves of different n".into()));
        }
        let s = Rational::one() - t;
        let p = c0
            .p
            .iter()
            .zip(&c1.p)
            .map(|(a, b)| a.scale(&s).add(&b.scale(t)).expect("equal degrees"))
            .collect();
        JetCurve::new(p)
    }
}

/// Discriminant membership of a jet curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscriminantFlags {
    /// `det A_C = 0`
    #[serde(rename = "in_DP")]
    pub in_dp: bool,
    /// the components `p_i` are linearly dependent
    #[serde(rename = "in_DP1")]
    pub in_dp1: bool,
    /// an `(n-4)`-dimensional `(2n-4)`-secant was detected (numeric, advisory)
    #[serde(rename = "in_Dinf1")]
    pub in_dinf1: bool,
    pub balanced: bool,
}

/// `p_k` = coefficient form of `x_k` in the part of `F` linear in `x`; the
/// part of higher order in `x` is dropped.
pub fn extract_jet(x: &Hypersurface) -> Result<JetCurve> {
    if !x.contains_standard_line() {
        return Err(Error::InvalidInput(
            "the line {x_1 = ... = x_n = 0} does not lie on the hypersurface".into(),
        ));
    }
    let n = x.n();
    let d = 2 * n - 2;
    let mut coeffs = vec![vec![Rational::zero(); d + 1]; n];
    for t in x.terms() {
        let xs = &t.exps[2..];
        if xs.iter().sum::<u32>() != 1 {
            continue;
        }
        let k = xs.iter().position(|&e| e == 1).expect("one linear variable");
        let j = t.exps[1] as usize;
        coeffs[k][j] += &t.c;
    }
    let p = coeffs
        .into_iter()
        .map(BinaryForm::new)
        .collect::<Result<Vec<_>>>()?;
    JetCurve::new(p)
}

/// The `2n × 2n` matrix whose columns `2j, 2j+1` (0-based) are the coefficient
/// vectors of `u·p_j` and `v·p_j` in the basis `u^{2n-1}, u^{2n-2}v, …, v^{2n-1}`.
pub fn build_ac(c: &JetCurve) -> RatMatrix {
    let n = c.n();
    let mut a = RatMatrix::zeros(2 * n, 2 * n);
    for (j, p) in c.p().iter().enumerate() {
        for (k, coef) in p.coeffs().iter().enumerate() {
            a.set(k, 2 * j, coef.clone());
            a.set(k + 1, 2 * j + 1, coef.clone());
        }
    }
    a
}

pub fn det_ac(c: &JetCurve) -> Rational {
    det_exact(&build_ac(c)).expect("square by construction")
}

/// `sgn det A_C`.
pub fn euler_index(c: &JetCurve) -> Result<i32> {
    match rational::sign(&det_ac(c)) {
        0 => Err(Error::Degenerate),
        s => Ok(s),
    }
}

/// Linear forms `L_1, …, L_n`, not all zero, with `Σ p_i L_i ≡ 0`, when
/// `det A_C = 0`.
pub fn syzygy(c: &JetCurve) -> Option<Vec<BinaryForm>> {
    let kernel = kernel_exact(&build_ac(c));
    let w = kernel.into_iter().next()?;
    let l: Vec<BinaryForm> = w
        .chunks(2)
        .map(|pair| BinaryForm::new(pair.to_vec()).expect("two coefficients"))
        .collect();
    debug_assert!(syzygy_residual(c, &l).is_zero());
    Some(l)
}

/// `Σ p_i L_i`.
pub fn syzygy_residual(c: &JetCurve, l: &[BinaryForm]) -> BinaryForm {
    c.p().iter()
        .zip(l)
        .fold(BinaryForm::zero(c.degree() + 1), |acc, (p, li)| {
            acc.add(&p.mul(li)).expect("equal degrees")
        })
}

/// Exact `Δ^P` / `Δ^{P,1}` membership; `Δ^{∞,1}` left unset (see
/// [`classify_discriminants_with`]).
pub fn classify_discriminants_exact(c: &JetCurve) -> DiscriminantFlags {
    let in_dp = det_ac(c).is_zero();
    let in_dp1 = c.coefficient_matrix().rank() < c.n();
    DiscriminantFlags { in_dp, in_dp1, in_dinf1: false, balanced: !in_dp }
}

/// Exact flags plus the numeric `Δ^{∞,1}` heuristic from a secant report: a
/// secant whose divisor points span only an `(n-4)`-plane.
pub fn classify_discriminants_with(
    c: &JetCurve,
    report: Option<&crate::secants::SecantReport>,
) -> DiscriminantFlags {
    let mut flags = classify_discriminants_exact(c);
    if let Some(r) = report {
        flags.in_dinf1 = c.n() >= 4 && r.secants.iter().any(|s| s.points_rank(c) + 3 <= c.n());
    }
    flags
}

/// All discriminant flags. For `n >= 4` outside `Δ^{P,1}` this runs a
/// numeric secant search with the default solver configuration.
pub fn classify_discriminants(c: &JetCurve) -> DiscriminantFlags {
    let exact = classify_discriminants_exact(c);
    if c.n() < 4 || exact.in_dp1 {
        return exact;
    }
    let cfg = crate::newton::SolverConfig::default();
    match crate::secants::secants_numeric_report(c, &cfg) {
        Ok(rep) => classify_discriminants_with(c, Some(&rep)),
        Err(_) => exact,
    }
}
