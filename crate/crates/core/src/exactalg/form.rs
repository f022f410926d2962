//! Exact binary forms `f(u, v) = Σ c_k u^{d-k} v^k`.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

use super::matrix::RatMatrix;
use super::rational::{rat, serde_rational, Rational};
use super::unipoly::{count_real_roots, UniPoly};
use crate::error::{Error, Result};

/// Homogeneous polynomial in `(u, v)` with rational coefficients.
///
/// `coeffs[k]` is the coefficient of `u^{d-k} v^k`. The zero form keeps its
/// formal degree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryForm {
    degree: usize,
    #[serde(with = "serde_rational::vec")]
    coeffs: Vec<Rational>,
}

impl BinaryForm {
    pub fn new(coeffs: Vec<Rational>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("a binary form needs at least one coefficient".into()));
        }
        Ok(BinaryForm { degree: coeffs.len() - 1, coeffs })
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        BinaryForm {
            degree: coeffs.len() - 1,
            coeffs: coeffs.iter().map(|&c| rat(c)).collect(),
        }
    }

    pub fn zero(degree: usize) -> Self {
        BinaryForm { degree, coeffs: vec![Rational::zero(); degree + 1] }
    }

    pub fn one() -> Self {
        BinaryForm { degree: 0, coeffs: vec![Rational::one()] }
    }

    /// `c · u^a v^b`
    pub fn monomial(c: Rational, a: usize, b: usize) -> Self {
        let mut f = Self::zero(a + b);
        f.coeffs[b] = c;
        f
    }

    /// The linear form `b·u − a·v` vanishing at `[a : b]`.
    pub fn vanishing_at(a: &Rational, b: &Rational) -> Self {
        BinaryForm { degree: 1, coeffs: vec![b.clone(), -a.clone()] }
    }

    /// Validates the JSON invariant `coeffs.len() == degree + 1`.
    pub fn checked(self) -> Result<Self> {
        if self.coeffs.len() != self.degree + 1 {
            return Err(Error::InvalidInput(format!(
                "binary form of degree {} has {} coefficients",
                self.degree,
                self.coeffs.len()
            )));
        }
        Ok(self)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &Rational {
        &self.coeffs[k]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn eval(&self, u: &Rational, v: &Rational) -> Rational {
        let d = self.degree;
        let mut upow = vec![Rational::one(); d + 1];
        for k in 1..=d {
            upow[k] = &upow[k - 1] * u;
        }
        let mut sum = Rational::zero();
        let mut vpow = Rational::one();
        for (k, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                sum += c * &upow[d - k] * &vpow;
            }
            vpow *= v;
        }
        sum
    }

    pub fn eval_f64(&self, u: f64, v: f64) -> f64 {
        let c = self.to_f64();
        crate::exactalg::fform::eval_form(&c, u, v)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(super::rational::to_f64).collect()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.degree != other.degree {
            return Err(Error::InvalidInput(format!(
                "cannot add forms of degrees {} and {}",
                self.degree, other.degree
            )));
        }
        Ok(BinaryForm {
            degree: self.degree,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        BinaryForm {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![Rational::zero(); self.degree + other.degree + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        BinaryForm { degree: self.degree + other.degree, coeffs: out }
    }

    pub fn pow(&self, e: usize) -> Self {
        (0..e).fold(Self::one(), |acc, _| acc.mul(self))
    }

    /// `∂f/∂u`
    pub fn d_du(&self) -> Self {
        if self.degree == 0 {
            return Self::zero(0);
        }
        let d = self.degree;
        BinaryForm {
            degree: d - 1,
            coeffs: (0..d).map(|k| &self.coeffs[k] * rat((d - k) as i64)).collect(),
        }
    }

    /// `∂f/∂v`
    pub fn d_dv(&self) -> Self {
        if self.degree == 0 {
            return Self::zero(0);
        }
        let d = self.degree;
        BinaryForm {
            degree: d - 1,
            coeffs: (1..=d).map(|k| &self.coeffs[k] * rat(k as i64)).collect(),
        }
    }

    /// Multiplicity of the root `[1 : 0]`, i.e. the number of leading zero
    /// coefficients. `None` for the zero form.
    pub fn infinity_multiplicity(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// `f(x, 1)` as a univariate polynomial in `x`.
    pub fn dehomogenize(&self) -> UniPoly {
        UniPoly::new(self.coeffs.iter().rev().cloned().collect())
    }

    /// Inverse of [`dehomogenize`](Self::dehomogenize) at a prescribed degree.
    pub fn homogenize(p: &UniPoly, degree: usize) -> Result<Self> {
        let pd = p.degree().unwrap_or(0);
        if !p.is_zero() && pd > degree {
            return Err(Error::InvalidInput(format!(
                "cannot homogenize a degree-{pd} polynomial to degree {degree}"
            )));
        }
        let mut coeffs = vec![Rational::zero(); degree + 1];
        for (i, c) in p.coeffs().iter().enumerate() {
            coeffs[degree - i] = c.clone();
        }
        Ok(BinaryForm { degree, coeffs })
    }

    /// Scale so the first nonzero coefficient is 1 (zero form unchanged).
    pub fn normalized(&self) -> Self {
        match self.coeffs.iter().find(|c| !c.is_zero()) {
            None => self.clone(),
            Some(lead) => self.scale(&(Rational::one() / lead)),
        }
    }

    fn split_infinity(&self) -> (usize, UniPoly) {
        let m = self.infinity_multiplicity().unwrap_or(0);
        (m, self.dehomogenize())
    }

    /// Exact division; `None` when `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        if divisor.is_zero() || divisor.degree > self.degree {
            return None;
        }
        let qd = self.degree - divisor.degree;
        if self.is_zero() {
            return Some(Self::zero(qd));
        }
        // divisor = v^mg · g with g(1, 0) != 0; long division in descending powers of u
        let mg = divisor.infinity_multiplicity()?;
        if self.infinity_multiplicity()? < mg {
            return None;
        }
        let g = &divisor.coeffs[mg..];
        let mut rem: Vec<Rational> = self.coeffs[mg..].to_vec();
        let mut quot = vec![Rational::zero(); qd + 1];
        for k in 0..=qd {
            let c = &rem[k] / &g[0];
            if !c.is_zero() {
                for (j, b) in g.iter().enumerate() {
                    rem[k + j] -= &c * b;
                }
            }
            quot[k] = c;
        }
        if rem.iter().any(|c| !c.is_zero()) {
            return None;
        }
        Some(BinaryForm { degree: qd, coeffs: quot })
    }

    /// Quotient and remainder of the dehomogenized forms, remainder homogenized
    /// to degree `divisor.degree() - 1`. Requires the divisor to have no root at `[1:0]`.
    pub fn rem_affine(&self, divisor: &Self) -> Result<Self> {
        if divisor.coeffs[0].is_zero() {
            return Err(Error::InvalidInput("divisor vanishes at [1:0]".into()));
        }
        let (_, r) = self.dehomogenize().div_rem(&divisor.dehomogenize());
        Self::homogenize(&r, divisor.degree.saturating_sub(1))
    }

    /// Substitute `(u, v) ↦ (a u + b v, c u + d v)`.
    pub fn substitute_linear(&self, a: &Rational, b: &Rational, c: &Rational, d: &Rational) -> Self {
        let lu = BinaryForm { degree: 1, coeffs: vec![a.clone(), b.clone()] };
        let lv = BinaryForm { degree: 1, coeffs: vec![c.clone(), d.clone()] };
        let deg = self.degree;
        let mut acc = Self::zero(deg);
        for (k, coef) in self.coeffs.iter().enumerate() {
            if coef.is_zero() {
                continue;
            }
            let term = lu.pow(deg - k).mul(&lv.pow(k)).scale(coef);
            acc = acc.add(&term).expect("same degree");
        }
        acc
    }

    /// Discriminant of a binary quadratic `a u^2 + b uv + c v^2`: `b^2 - 4ac`.
    pub fn quadratic_discriminant(&self) -> Result<Rational> {
        if self.degree != 2 {
            return Err(Error::InvalidInput(format!(
                "discriminant requested for a degree-{} form",
                self.degree
            )));
        }
        let (a, b, c) = (&self.coeffs[0], &self.coeffs[1], &self.coeffs[2]);
        Ok(b * b - rat(4) * a * c)
    }
}

impl fmt::Display for BinaryForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.degree;
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mono = match (d - k, k) {
                (0, 0) => String::new(),
                (a, 0) => pow_str("u", a),
                (0, b) => pow_str("v", b),
                (a, b) => format!("{}{}", pow_str("u", a), pow_str("v", b)),
            };
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{mag}{mono}")?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn pow_str(var: &str, e: usize) -> String {
    if e == 1 {
        var.to_string()
    } else {
        format!("{var}^{e}")
    }
}

/// Evaluate at the rational point `(u, v)`.
pub fn bf_eval(f: &BinaryForm, point: (&Rational, &Rational)) -> Rational {
    f.eval(point.0, point.1)
}

/// Monic gcd (first nonzero coefficient 1); degree 0 means coprime.
pub fn bf_gcd(f: &BinaryForm, g: &BinaryForm) -> Result<BinaryForm> {
    match (f.is_zero(), g.is_zero()) {
        (true, true) => Err(Error::InvalidInput("gcd of two zero forms".into())),
        (true, false) => Ok(g.normalized()),
        (false, true) => Ok(f.normalized()),
        (false, false) => {
            let (mf, pf) = f.split_infinity();
            let (mg, pg) = g.split_infinity();
            let m = mf.min(mg);
            let h = pf.gcd(&pg);
            let hd = h.degree().unwrap_or(0);
            let aff = BinaryForm::homogenize(&h, hd)?;
            let vpow = BinaryForm::monomial(Rational::one(), 0, m);
            Ok(aff.mul(&vpow).normalized())
        }
    }
}

/// gcd of a list of nonzero-in-total forms.
pub fn bf_gcd_all(forms: &[BinaryForm]) -> Result<BinaryForm> {
    let mut acc: Option<BinaryForm> = None;
    for f in forms {
        acc = Some(match acc {
            None => f.clone(),
            Some(a) if a.is_zero() => f.clone(),
            Some(a) if f.is_zero() => a,
            Some(a) => bf_gcd(&a, f)?,
        });
    }
    match acc {
        Some(a) if !a.is_zero() => Ok(a.normalized()),
        _ => Err(Error::InvalidInput("gcd of zero forms".into())),
    }
}

/// Sylvester matrix of `(f, g)` using formal degrees `m = deg f`, `k = deg g`:
/// the first `k` rows carry shifted coefficients of `f`, the next `m` rows those
/// of `g`, columns ordered from `u^{m+k-1}` to `v^{m+k-1}`.
pub fn sylvester_matrix(f: &BinaryForm, g: &BinaryForm) -> RatMatrix {
    let m = f.degree();
    let k = g.degree();
    let size = m + k;
    let mut mat = RatMatrix::zeros(size, size);
    for r in 0..k {
        for (j, c) in f.coeffs().iter().enumerate() {
            mat.set(r, r + j, c.clone());
        }
    }
    for r in 0..m {
        for (j, c) in g.coeffs().iter().enumerate() {
            mat.set(k + r, r + j, c.clone());
        }
    }
    mat
}

/// Homogeneous Sylvester resultant; zero iff the forms share a root on `P^1`.
pub fn resultant(f: &BinaryForm, g: &BinaryForm) -> Result<Rational> {
    if f.is_zero() || g.is_zero() {
        return Err(Error::InvalidInput("resultant of a zero form".into()));
    }
    if f.degree() + g.degree() == 0 {
        return Ok(Rational::one());
    }
    super::matrix::det_exact(&sylvester_matrix(f, g))
}

/// Distinct real roots on `P^1`; the root `[1:0]` is detected from the
/// leading coefficient. With `squarefree` asserted the form must have no
/// repeated root.
pub fn sturm_real_root_count(f: &BinaryForm, squarefree: bool) -> Result<usize> {
    if f.is_zero() {
        return Err(Error::InvalidInput("root count of the zero form".into()));
    }
    if squarefree && !is_squarefree(f) {
        return Err(Error::InvalidInput(format!("{f} is not squarefree")));
    }
    let at_infinity = usize::from(f.coeffs[0].is_zero());
    Ok(count_real_roots(&f.dehomogenize()) + at_infinity)
}

/// No repeated root on `P^1` (including `[1:0]`).
pub fn is_squarefree(f: &BinaryForm) -> bool {
    if f.is_zero() {
        return false;
    }
    let m = f.infinity_multiplicity().unwrap_or(0);
    if m >= 2 {
        return false;
    }
    let p = f.dehomogenize();
    if p.degree().unwrap_or(0) == 0 {
        return true;
    }
    p.gcd(&p.derivative()).degree() == Some(0)
}
