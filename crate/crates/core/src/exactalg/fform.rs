//! Floating-point companions of the exact types: real and complex binary
//! forms stored in the same `u^{d-k} v^k` order, plus small dense helpers.

use num_complex::Complex64;

/// Evaluate `Σ c_k u^{d-k} v^k` in double precision.
pub fn eval_form(c: &[f64], u: f64, v: f64) -> f64 {
    let d = c.len() - 1;
    let mut acc = 0.0;
    let mut vpow = 1.0;
    for (k, ck) in c.iter().enumerate() {
        acc += ck * u.powi((d - k) as i32) * vpow;
        vpow *= v;
    }
    acc
}

pub fn eval_form_c(c: &[Complex64], u: Complex64, v: Complex64) -> Complex64 {
    let d = c.len() - 1;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut vpow = Complex64::new(1.0, 0.0);
    for (k, ck) in c.iter().enumerate() {
        acc += ck * u.powi((d - k) as i32) * vpow;
        vpow *= v;
    }
    acc
}

pub fn mul_forms(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn mul_forms_c(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Long division in descending powers of `u` (divisor must have `g[0] != 0`).
/// Returns `(quotient, remainder)`; the remainder has `g.len() - 1` entries.
pub fn divrem_forms_c(f: &[Complex64], g: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let dg = g.len() - 1;
    if f.len() <= dg {
        return (vec![Complex64::new(0.0, 0.0)], f.to_vec());
    }
    let qd = f.len() - 1 - dg;
    let mut rem = f.to_vec();
    let mut quot = vec![Complex64::new(0.0, 0.0); qd + 1];
    for k in 0..=qd {
        let c = rem[k] / g[0];
        for (j, b) in g.iter().enumerate() {
            rem[k + j] -= c * b;
        }
        quot[k] = c;
    }
    (quot, rem[qd + 1..].to_vec())
}

pub fn divrem_forms(f: &[f64], g: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let fc: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let gc: Vec<Complex64> = g.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let (q, r) = divrem_forms_c(&fc, &gc);
    (q.iter().map(|z| z.re).collect(), r.iter().map(|z| z.re).collect())
}

/// Substitute `(u, v) ↦ (a u + b v, c u + d v)` into a complex form.
pub fn substitute_linear_c(f: &[Complex64], a: f64, b: f64, c: f64, d: f64) -> Vec<Complex64> {
    let deg = f.len() - 1;
    let lu = [Complex64::new(a, 0.0), Complex64::new(b, 0.0)];
    let lv = [Complex64::new(c, 0.0), Complex64::new(d, 0.0)];
    let mut out = vec![Complex64::new(0.0, 0.0); deg + 1];
    for (k, coef) in f.iter().enumerate() {
        let mut term = vec![*coef];
        for _ in 0..deg - k {
            term = mul_forms_c(&term, &lu);
        }
        for _ in 0..k {
            term = mul_forms_c(&term, &lv);
        }
        for (o, t) in out.iter_mut().zip(&term) {
            *o += t;
        }
    }
    out
}

/// The monic-in-`u` form `Π (u - z_i v)` for affine roots, or with factor
/// `v` for a root at infinity. Input points as homogeneous pairs.
pub fn form_from_roots_c(points: &[(Complex64, Complex64)]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for &(pu, pv) in points {
        // b u - a v vanishes at [a : b]
        out = mul_forms_c(&out, &[pv, -pu]);
    }
    out
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn norm_c(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Scale so the entry of largest modulus becomes 1.
pub fn normalize_max_c(v: &[Complex64]) -> Vec<Complex64> {
    let piv = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(Complex64::new(1.0, 0.0));
    if piv.norm() == 0.0 {
        return v.to_vec();
    }
    v.iter().map(|x| x / piv).collect()
}

/// Scale so the first entry whose modulus exceeds `tol · max` becomes 1.
pub fn normalize_first_c(v: &[Complex64], tol: f64) -> Vec<Complex64> {
    let m = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    match v.iter().find(|x| x.norm() > tol * m) {
        Some(&p) => v.iter().map(|x| x / p).collect(),
        None => v.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_round_trip() {
        // (u^2 + v^2)(u - 2v) / (u^2 + v^2)
        let a = [1.0, 0.0, 1.0];
        let b = [1.0, -2.0];
        let f = mul_forms(&a, &b);
        let (q, r) = divrem_forms(&f, &a);
        assert!((q[0] - 1.0).abs() < 1e-15 && (q[1] + 2.0).abs() < 1e-15);
        assert!(r.iter().all(|x| x.abs() < 1e-15));
        assert_eq!(eval_form(&a, 1.0, 2.0), 5.0);
    }
}
