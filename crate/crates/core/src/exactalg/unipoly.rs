//! Dense univariate polynomials over the rationals, ascending coefficient order.
//!
//! Used for dehomogenized binary forms, Sturm sequences and the univariate
//! determinant polynomials of wall-crossing paths.

use num_traits::{One, Signed, Zero};

use super::rational::{sign, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UniPoly {
    /// `coeffs[i]` multiplies `x^i`; no trailing zeros.
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// `x - a`
    pub fn linear_root(a: Rational) -> Self {
        Self::new(vec![-a, Rational::one()])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let z = Rational::zero();
        Self::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&z) + other.coeffs.get(i).unwrap_or(&z))
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rational::from_integer((i as i64).into()))
                .collect(),
        )
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by zero polynomial");
        let lead = d.coeffs[dd].clone();
        let mut rem = self.coeffs.clone();
        let Some(nd) = self.degree() else {
            return (Self::zero(), Self::zero());
        };
        if nd < dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![Rational::zero(); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let c = &rem[k + dd] / &lead;
            if !c.is_zero() {
                for (j, b) in d.coeffs.iter().enumerate() {
                    rem[k + j] -= &c * b;
                }
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            None => Self::zero(),
            Some(l) => self.scale(&(Rational::one() / l)),
        }
    }

    /// Monic gcd; gcd(0, 0) = 0.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    pub fn squarefree_part(&self) -> Self {
        if self.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0
    }

    /// Composition `self(a*x + b)`.
    pub fn compose_affine(&self, a: &Rational, b: &Rational) -> Self {
        let lin = Self::new(vec![b.clone(), a.clone()]);
        let mut acc = Self::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&lin).add(&Self::constant(c.clone()));
        }
        acc
    }

    /// Interpolating polynomial through `(xs[i], ys[i])` (Newton form, exact).
    pub fn interpolate(xs: &[Rational], ys: &[Rational]) -> Self {
        assert_eq!(xs.len(), ys.len());
        let n = xs.len();
        let mut dd: Vec<Rational> = ys.to_vec();
        for j in 1..n {
            for i in (j..n).rev() {
                dd[i] = (&dd[i] - &dd[i - 1]) / (&xs[i] - &xs[i - j]);
            }
        }
        let mut acc = Self::constant(dd[n - 1].clone());
        for i in (0..n - 1).rev() {
            acc = acc
                .mul(&Self::linear_root(xs[i].clone()))
                .add(&Self::constant(dd[i].clone()));
        }
        acc
    }
}

/// Canonical Sturm sequence `f, f', -rem(...)`.
pub fn sturm_sequence(f: &UniPoly) -> Vec<UniPoly> {
    let mut seq = vec![f.clone()];
    if f.degree().unwrap_or(0) == 0 {
        return seq;
    }
    seq.push(f.derivative());
    loop {
        let n = seq.len();
        let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
        if r.is_zero() {
            break;
        }
        seq.push(r.scale(&-Rational::one()));
    }
    seq
}

fn sign_changes(signs: impl IntoIterator<Item = i32>) -> usize {
    let mut last = 0;
    let mut changes = 0;
    for s in signs {
        if s == 0 {
            continue;
        }
        if last != 0 && s != last {
            changes += 1;
        }
        last = s;
    }
    changes
}

fn changes_at(seq: &[UniPoly], x: &Rational) -> usize {
    sign_changes(seq.iter().map(|p| sign(&p.eval(x))))
}

fn changes_at_infinity(seq: &[UniPoly], positive: bool) -> usize {
    sign_changes(seq.iter().map(|p| match (p.degree(), p.leading()) {
        (Some(d), Some(l)) => {
            let s = if l.is_positive() { 1 } else { -1 };
            if positive || d % 2 == 0 {
                s
            } else {
                -s
            }
        }
        _ => 0,
    }))
}

/// Number of distinct real roots of `f` (any multiplicities) on the whole line.
pub fn count_real_roots(f: &UniPoly) -> usize {
    if f.degree().unwrap_or(0) == 0 {
        return 0;
    }
    let seq = sturm_sequence(f);
    changes_at_infinity(&seq, false) - changes_at_infinity(&seq, true)
}

/// Number of distinct real roots in the half-open interval `(a, b]`.
pub fn count_roots_in(f: &UniPoly, a: &Rational, b: &Rational) -> usize {
    if f.degree().unwrap_or(0) == 0 {
        return 0;
    }
    let seq = sturm_sequence(f);
    changes_at(&seq, a).saturating_sub(changes_at(&seq, b))
}

/// Disjoint isolating intervals `[lo, hi]` for the distinct real roots of `f`
/// inside the open interval `(a, b)`, each of width at most `width`. Endpoints
/// are never roots, except that exact rational roots hit during bisection are
/// returned as degenerate intervals `lo == hi`.
pub fn isolate_roots(
    f: &UniPoly,
    a: &Rational,
    b: &Rational,
    width: &Rational,
) -> Vec<(Rational, Rational)> {
    if f.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    let seq = sturm_sequence(&f.squarefree_part());
    let sq = seq[0].clone();
    // roots in the open interval (lo, hi)
    let open_count = |lo: &Rational, hi: &Rational| -> usize {
        let c = changes_at(&seq, lo).saturating_sub(changes_at(&seq, hi));
        if sq.eval(hi).is_zero() {
            c.saturating_sub(1)
        } else {
            c
        }
    };
    let two = Rational::from_integer(2.into());
    let mut out = Vec::new();
    let mut stack = vec![(a.clone(), b.clone())];
    while let Some((lo, hi)) = stack.pop() {
        let count = open_count(&lo, &hi);
        if count == 0 {
            continue;
        }
        let clean = !sq.eval(&lo).is_zero() && !sq.eval(&hi).is_zero();
        if count == 1 && clean && (&hi - &lo) <= *width {
            out.push((lo, hi));
            continue;
        }
        let mid = (&lo + &hi) / &two;
        if sq.eval(&mid).is_zero() {
            out.push((mid.clone(), mid.clone()));
            // step off the root until the gap is root-free
            let mut eps = (&hi - &lo) / Rational::from_integer(8.into());
            while open_count(&(&mid - &eps), &mid) > 0
                || open_count(&mid, &(&mid + &eps)) > 0
                || sq.eval(&(&mid - &eps)).is_zero()
                || sq.eval(&(&mid + &eps)).is_zero()
            {
                eps /= &two;
            }
            stack.push((lo.clone(), &mid - &eps));
            stack.push((&mid + &eps, hi.clone()));
            // roots sitting exactly on lo/hi are not inside (lo, hi)
            continue;
        }
        stack.push((lo, mid.clone()));
        stack.push((mid, hi));
    }
    out.sort_by(|x, y| x.0.cmp(&y.0));
    out
}
