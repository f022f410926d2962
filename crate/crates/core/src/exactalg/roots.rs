//! Numeric roots of binary forms on `P^1` (Aberth–Ehrlich iteration with a
//! Newton polish and a posteriori inclusion radii).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::form::BinaryForm;
use crate::error::{Error, Result};

/// A numeric point of `P^1`: `[re + i·im : 1]`, or `[1 : 0]` when `at_infinity`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoint {
    pub re: f64,
    pub im: f64,
    /// Distance bound to a true root (affine coordinate), when produced by
    /// [`complex_roots`].
    pub certified_radius: f64,
    #[serde(default)]
    pub at_infinity: bool,
}

impl ComplexPoint {
    pub fn affine(z: Complex64) -> Self {
        ComplexPoint { re: z.re, im: z.im, certified_radius: 0.0, at_infinity: false }
    }

    pub fn infinity() -> Self {
        ComplexPoint { re: 0.0, im: 0.0, certified_radius: 0.0, at_infinity: true }
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// Homogeneous coordinates `(u, v)`.
    pub fn homogeneous(&self) -> (Complex64, Complex64) {
        if self.at_infinity {
            (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
        } else {
            (self.z(), Complex64::new(1.0, 0.0))
        }
    }

    pub fn conj(&self) -> Self {
        ComplexPoint { im: -self.im, ..*self }
    }

    pub fn is_real(&self) -> bool {
        self.at_infinity || self.im == 0.0
    }

    /// Chordal distance on the Riemann sphere (bounded by 1).
    pub fn chordal_distance(&self, other: &ComplexPoint) -> f64 {
        let (a0, a1) = self.homogeneous();
        let (b0, b1) = other.homogeneous();
        let num = (a0 * b1 - a1 * b0).norm();
        let den = (a0.norm_sqr() + a1.norm_sqr()).sqrt() * (b0.norm_sqr() + b1.norm_sqr()).sqrt();
        num / den
    }

    /// Angle of a real point on the circle `RP^1`, in `(-π, π]`: `[x : 1] ↦ 2·atan(x)`,
    /// `[1 : 0] ↦ π`.
    pub fn circle_angle(&self) -> f64 {
        if self.at_infinity {
            std::f64::consts::PI
        } else {
            2.0 * self.re.atan()
        }
    }
}

const MAX_ITER: usize = 600;

/// All roots of a real or complex univariate polynomial given in descending
/// order `c[0] x^d + … + c[d]` with `c[0] != 0`.
fn aberth(c: &[Complex64], tol: f64) -> Result<Vec<Complex64>> {
    let d = c.len() - 1;
    if d == 0 {
        return Ok(Vec::new());
    }
    let lead = c[0];
    let monic: Vec<Complex64> = c.iter().map(|x| x / lead).collect();
    if d == 1 {
        return Ok(vec![-monic[1]]);
    }
    // Fujiwara-type bound for the initial circle
    let bound = (1..=d)
        .map(|k| monic[k].norm().powf(1.0 / k as f64))
        .fold(0.0, f64::max)
        * 2.0;
    let radius = bound.max(1e-3);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64) / (d as f64) + 0.4;
            Complex64::from_polar(radius * 0.5, theta)
        })
        .collect();
    let eval = |x: Complex64| -> (Complex64, Complex64) {
        let mut p = monic[0];
        let mut dp = Complex64::new(0.0, 0.0);
        for coef in &monic[1..] {
            dp = dp * x + p;
            p = p * x + coef;
        }
        (p, dp)
    };
    let mut converged = false;
    for _ in 0..MAX_ITER {
        let mut max_step: f64 = 0.0;
        for i in 0..d {
            let (p, dp) = eval(z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..d {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm() > 0.0 {
                        s += 1.0 / diff;
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - ratio * s;
            let step = if denom.norm() > 0.0 && ratio.is_finite() { ratio / denom } else { ratio };
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if max_step < tol * 1e-3 {
            converged = true;
            break;
        }
    }
    if !converged {
        // Multiple roots converge linearly; accept if residuals are small anyway.
        let ok = z.iter().all(|&x| {
            let (p, _) = eval(x);
            let scale: f64 = monic.iter().enumerate().map(|(k, m)| m.norm() * x.norm().powi((d - k) as i32)).sum();
            p.norm() <= 1e-6 * scale.max(1.0)
        });
        if !ok {
            return Err(Error::NumericFailure(format!(
                "root iteration did not converge for a degree-{d} polynomial"
            )));
        }
    }
    // Newton polish (harmless near multiple roots: guarded by residual decrease)
    for x in z.iter_mut() {
        for _ in 0..4 {
            let (p, dp) = eval(*x);
            if dp.norm() == 0.0 {
                break;
            }
            let cand = *x - p / dp;
            if eval(cand).0.norm() < p.norm() {
                *x = cand;
            } else {
                break;
            }
        }
    }
    Ok(z)
}

/// Inclusion radius for a root near `x` of the polynomial with descending coefficients `c`.
fn inclusion_radius(c: &[Complex64], x: Complex64) -> f64 {
    let d = c.len() - 1;
    let mut p = c[0];
    let mut dp = Complex64::new(0.0, 0.0);
    let mut mag = c[0].norm();
    for coef in &c[1..] {
        dp = dp * x + p;
        p = p * x + coef;
        mag = mag * x.norm() + coef.norm();
    }
    // rounding error of Horner evaluation
    let err = p.norm() + 4.0 * (d as f64) * f64::EPSILON * mag;
    let by_newton = if dp.norm() > 0.0 { d as f64 * err / dp.norm() } else { f64::INFINITY };
    let by_product = (err / c[0].norm()).powf(1.0 / d as f64);
    by_newton.min(by_product)
}

/// Roots (with multiplicity) of a form with complex coefficients in
/// `u^{d-k} v^k` order. Roots at `[1:0]` come from leading zeros.
pub fn complex_roots_c(coeffs: &[Complex64], tol: f64) -> Result<Vec<ComplexPoint>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("root tolerance must be positive".into()));
    }
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::InvalidInput("roots of the zero form".into()));
    }
    let m = coeffs.iter().position(|c| c.norm() > 0.0).unwrap_or(0);
    let affine: Vec<Complex64> = coeffs[m..].iter().map(|c| c / scale).collect();
    let zs = aberth(&affine, tol)?;
    let mut out: Vec<ComplexPoint> = zs
        .into_iter()
        .map(|z| ComplexPoint {
            re: z.re,
            im: z.im,
            certified_radius: inclusion_radius(&affine, z),
            at_infinity: false,
        })
        .collect();
    out.extend((0..m).map(|_| ComplexPoint::infinity()));
    Ok(out)
}

/// Roots of a real form; conjugate pairs are returned exactly conjugate and
/// roots within their inclusion radius of the real axis are snapped onto it.
pub fn complex_roots_f64(coeffs: &[f64], tol: f64) -> Result<Vec<ComplexPoint>> {
    let c: Vec<Complex64> = coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let roots = complex_roots_c(&c, tol)?;
    Ok(conjugate_closure(roots, tol))
}

fn conjugate_closure(roots: Vec<ComplexPoint>, tol: f64) -> Vec<ComplexPoint> {
    let mut finite: Vec<ComplexPoint> = roots.iter().filter(|r| !r.at_infinity).copied().collect();
    let infinite: Vec<ComplexPoint> = roots.iter().filter(|r| r.at_infinity).copied().collect();
    let mut used = vec![false; finite.len()];
    let mut out = Vec::with_capacity(roots.len());
    // upper half-plane roots first, each matched to its nearest lower partner
    let mut order: Vec<usize> = (0..finite.len()).collect();
    order.sort_by(|&a, &b| finite[b].im.total_cmp(&finite[a].im));
    for &i in &order {
        if used[i] {
            continue;
        }
        let r = finite[i];
        let near_real = r.im.abs() <= (r.certified_radius).max(tol * (1.0 + r.re.abs()));
        if r.im > 0.0 && !near_real {
            let partner = (0..finite.len())
                .filter(|&j| !used[j] && j != i && finite[j].im < 0.0)
                .min_by(|&a, &b| {
                    let da = (finite[a].z() - r.z().conj()).norm();
                    let db = (finite[b].z() - r.z().conj()).norm();
                    da.total_cmp(&db)
                });
            if let Some(j) = partner {
                used[i] = true;
                used[j] = true;
                let zbar = (r.z() + finite[j].z().conj()) / 2.0;
                let rad = r.certified_radius.max(finite[j].certified_radius)
                    + (r.z() - finite[j].z().conj()).norm() / 2.0;
                out.push(ComplexPoint { re: zbar.re, im: zbar.im, certified_radius: rad, at_infinity: false });
                out.push(ComplexPoint { re: zbar.re, im: -zbar.im, certified_radius: rad, at_infinity: false });
                continue;
            }
        }
        if near_real {
            used[i] = true;
            finite[i].im = 0.0;
            out.push(finite[i]);
        }
    }
    // anything left over (unpaired lower half-plane roots) is kept as is
    for (i, r) in finite.iter().enumerate() {
        if !used[i] {
            out.push(*r);
        }
    }
    out.extend(infinite);
    out
}

/// Roots of an exact form, with multiplicity, as points of `P^1`.
pub fn complex_roots(f: &BinaryForm, tol: f64) -> Result<Vec<ComplexPoint>> {
    if f.is_zero() {
        return Err(Error::InvalidInput("roots of the zero form".into()));
    }
    complex_roots_f64(&f.to_f64(), tol)
}
