//! `(n-3)`-dimensional `(2n-4)`-secants of a jet curve: the three nodes of a
//! plane quartic by elimination (`n = 3`) and a numeric multistart solver for
//! any `n >= 3`, certified by the Castelnuovo count `C(n, 2)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactalg::fform::{
    divrem_forms_c, eval_form_c, form_from_roots_c, mul_forms_c, normalize_max_c,
};
use crate::exactalg::rational::{self, rat, serde_rational, Rational};
use crate::exactalg::unipoly::{count_real_roots, UniPoly};
use crate::exactalg::{
    bf_gcd, complex_roots_c, complex_roots_f64, det_exact, is_squarefree, kernel_exact, resultant, BinaryForm,
    ComplexPoint, RatMatrix,
};
use crate::jet::{det_ac, JetCurve};
use crate::newton::{multistart_c, newton_c, newton_r, NewtonOutcome, SolverConfig};

const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const C1: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivisorKind {
    Exact,
    Numeric,
}

/// The divisor `D = M·C` of a secant: its form `f_D` (exact when known) and
/// numeric support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Divisor {
    pub degree: usize,
    pub kind: DivisorKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub form: Option<BinaryForm>,
    /// `f_D` in `u^{k-j} v^j` order, scaled so the largest coefficient is 1.
    pub coeffs: Vec<Complex64>,
    pub points: Vec<ComplexPoint>,
}

/// Rational covectors spanning the hyperplanes through an exact secant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactPlane {
    #[serde(with = "serde_rational::vec")]
    pub a: Vec<Rational>,
    #[serde(with = "serde_rational::vec")]
    pub b: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Secant {
    pub lambda_a: Vec<Complex64>,
    pub lambda_b: Vec<Complex64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exact: Option<ExactPlane>,
    pub divisor: Divisor,
    pub multiplicity: usize,
    pub is_real: bool,
    /// The Newton Jacobian was numerically singular at this solution.
    #[serde(default)]
    pub singular: bool,
}

impl Secant {
    /// Real covectors, when the secant is real.
    pub fn real_covectors(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        self.is_real.then(|| {
            (
                self.lambda_a.iter().map(|z| z.re).collect(),
                self.lambda_b.iter().map(|z| z.re).collect(),
            )
        })
    }

    /// Numeric rank of the images `C(t_i)` of the distinct divisor points.
    pub fn points_rank(&self, c: &JetCurve) -> usize {
        let mut cols: Vec<Vec<Complex64>> = Vec::new();
        for p in &self.divisor.points {
            if cols.is_empty()
                || self.divisor.points.iter().take_while(|q| *q != p).all(|q| q.chordal_distance(p) > 1e-6)
            {
                let (u, v) = p.homogeneous();
                cols.push(normalize_max_c(&c.eval_c(u, v)));
            }
        }
        if cols.is_empty() {
            return 0;
        }
        let m = DMatrix::from_fn(c.n(), cols.len(), |i, j| cols[j][i]);
        let s = m.singular_values();
        let max = s.max();
        s.iter().filter(|&&x| x > 1e-7 * max).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecantReport {
    pub n: usize,
    pub method: String,
    pub secants: Vec<Secant>,
    pub total_with_multiplicity: usize,
    pub certificate_ok: bool,
    pub warnings: Vec<String>,
    #[serde(default)]
    pub starts_used: usize,
}

impl SecantReport {
    fn new(n: usize, method: &str, secants: Vec<Secant>, warnings: Vec<String>, starts_used: usize) -> Self {
        let total: usize = secants.iter().map(|s| s.multiplicity).sum();
        SecantReport {
            n,
            method: method.to_string(),
            certificate_ok: total == crate::castelnuovo_count(n),
            total_with_multiplicity: total,
            secants,
            warnings,
            starts_used,
        }
    }

    pub fn real_secants(&self) -> impl Iterator<Item = &Secant> {
        self.secants.iter().filter(|s| s.is_real)
    }
}

/// A pair of random rational changes of coordinates: `x ↦ T x` on `P^{n-1}`
/// and `(u, v) ↦ g (u, v)` on the source line.
#[derive(Debug, Clone)]
struct Placement {
    t: RatMatrix,
    g: [i64; 4],
    /// Applied before `g`: `(u, v) ↦ (r u + c v, v)`, moving the parameters of
    /// interest near the unit disc.
    shift: (Rational, Rational),
}

impl Placement {
    fn random(n: usize, rng: &mut ChaCha8Rng, identity_x: bool) -> Self {
        let t = if identity_x {
            RatMatrix::identity(n)
        } else {
            loop {
                let m = RatMatrix::from_rows(
                    (0..n).map(|_| (0..n).map(|_| rat(rng.random_range(-3..=3))).collect()).collect(),
                )
                .expect("square");
                if !det_exact(&m).expect("square").is_zero() {
                    break m;
                }
            }
        };
        let g = loop {
            let g = [
                rng.random_range(1..=4),
                rng.random_range(-4..=4),
                rng.random_range(-4..=4),
                rng.random_range(1..=4),
            ];
            if g[0] * g[3] - g[1] * g[2] != 0 {
                break g;
            }
        };
        Placement { t, g, shift: (Rational::one(), Rational::zero()) }
    }

    /// Recenters the parameter line on the roots of the components: the
    /// median root becomes 0 and the median distance from it becomes 1.
    fn centered(mut self, c: &JetCurve) -> Self {
        let mut roots: Vec<Complex64> = Vec::new();
        for f in c.coefficients_f64() {
            if let Ok(r) = complex_roots_f64(&f, 1e-10) {
                roots.extend(r.iter().filter(|z| !z.at_infinity).map(ComplexPoint::z));
            }
        }
        if roots.is_empty() {
            return self;
        }
        let median = |mut v: Vec<f64>| {
            v.sort_by(f64::total_cmp);
            v[v.len() / 2]
        };
        let center = median(roots.iter().map(|z| z.re).collect());
        let radius = median(roots.iter().map(|z| (z - center).norm()).collect()).max(1e-3);
        self.shift = (rational::dyadic_round(radius, 20), rational::dyadic_round(center, 20));
        if self.shift.0.is_zero() {
            self.shift.0 = Rational::one();
        }
        self
    }

    fn reparameterized(&self, c: &JetCurve) -> Result<JetCurve> {
        let [a, b, cc, d] = self.g;
        let (r, m) = &self.shift;
        c.reparameterize(r, m, &Rational::zero(), &Rational::one())?
            .reparameterize(&rat(a), &rat(b), &rat(cc), &rat(d))
    }

    fn apply(&self, c: &JetCurve) -> Result<JetCurve> {
        self.reparameterized(c)?.transform_x(&self.t)
    }

    /// Source parameter `g·s` of a transformed parameter `s`.
    fn map_point(&self, s: ComplexPoint) -> ComplexPoint {
        let [a, b, c, d] = self.g.map(|x| x as f64);
        let (su, sv) = s.homogeneous();
        let wu = su * a + sv * b;
        let wv = su * c + sv * d;
        let (r, m) = (rational::to_f64(&self.shift.0), rational::to_f64(&self.shift.1));
        homogeneous_to_point(wu * r + wv * m, wv)
    }

    /// Original covector `Tᵀ λ'`.
    fn covector_back(&self, l: &[Complex64]) -> Vec<Complex64> {
        let n = l.len();
        (0..n)
            .map(|j| (0..n).map(|i| l[i] * rational::to_f64(self.t.get(i, j))).sum())
            .collect()
    }
}

fn homogeneous_to_point(u: Complex64, v: Complex64) -> ComplexPoint {
    if v.norm() <= 1e-13 * u.norm() {
        ComplexPoint::infinity()
    } else {
        ComplexPoint::affine(u / v)
    }
}

fn to_complex(c: &[f64]) -> Vec<Complex64> {
    c.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

fn placement_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ 0x5ec_a47)
}

fn check_preconditions(c: &JetCurve) -> Result<()> {
    if c.n() < 3 {
        return Err(Error::InvalidInput(format!("secants need n >= 3, got n = {}", c.n())));
    }
    if c.coefficient_matrix().rank() < c.n() {
        return Err(Error::InvalidInput("the curve lies in a hyperplane (Δ^{P,1})".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// nodes of a plane quartic

/// `h(s0, t) = (p_i(s0) p_j(t) - p_j(s0) p_i(t)) / (t - s0)` as a cubic in `t`.
fn node_section(pi: &UniPoly, pj: &UniPoly, s0: &Rational) -> BinaryForm {
    let a = pj.scale(&pi.eval(s0)).sub(&pi.scale(&pj.eval(s0)));
    let (q, r) = a.div_rem(&UniPoly::linear_root(s0.clone()));
    debug_assert!(r.is_zero());
    BinaryForm::homogenize(&q, 3).expect("degree at most 3")
}

/// The sextic whose roots are the node parameters, for a curve with no
/// relevant points at `[1:0]`. `None` when the elimination is not clean in
/// this placement.
fn node_polynomial(c: &JetCurve) -> Option<UniPoly> {
    let p: Vec<UniPoly> = c.p().iter().map(BinaryForm::dehomogenize).collect();
    if p[0].degree() != Some(4) {
        return None;
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut s0 = 0i64;
    while xs.len() < 20 && s0 < 200 {
        let s = rat(s0 - 7);
        s0 += 1;
        let h12 = node_section(&p[0], &p[1], &s);
        let h13 = node_section(&p[0], &p[2], &s);
        let Ok(r) = resultant(&h12, &h13) else { continue };
        xs.push(s);
        ys.push(r);
    }
    if xs.len() < 20 {
        return None;
    }
    let r = UniPoly::interpolate(&xs[..19], &ys[..19]);
    if r.eval(&xs[19]) != ys[19] || r.is_zero() {
        return None;
    }
    let p1cube = p[0].mul(&p[0]).mul(&p[0]);
    let (nq, rem) = r.div_rem(&p1cube);
    if !rem.is_zero() || nq.degree() != Some(6) {
        return None;
    }
    Some(nq.monic())
}

/// Wedge norm `|a ∧ b| / (|a| |b|)`.
fn projective_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut w = 0.0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            w += (a[i] * b[j] - a[j] * b[i]).norm_sqr();
        }
    }
    let na: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    w.sqrt() / (na * nb)
}

/// All perfect matchings of `0..2m`.
fn perfect_matchings(items: &[usize]) -> Vec<Vec<(usize, usize)>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let first = items[0];
    let mut out = Vec::new();
    for k in 1..items.len() {
        let rest: Vec<usize> = items[1..].iter().copied().filter(|&x| x != items[k]).collect();
        for mut m in perfect_matchings(&rest) {
            m.insert(0, (first, items[k]));
            out.push(m);
        }
    }
    out
}

/// Polish a node parameter pair with Newton on `C(s) = μ C(t)` (affine `s, t`).
fn refine_node(coeffs: &[Vec<Complex64>], s: Complex64, t: Complex64) -> (Complex64, Complex64) {
    let eval = |f: &[Complex64], x: Complex64| eval_form_c(f, x, C1);
    let deriv = |f: &[Complex64], x: Complex64| {
        let d = f.len() - 1;
        // d/dx of Σ f_k x^{d-k}
        f.iter()
            .enumerate()
            .take(d)
            .map(|(k, c)| c * ((d - k) as f64) * x.powu((d - k - 1) as u32))
            .sum::<Complex64>()
    };
    let n = coeffs.len();
    let ct: Vec<Complex64> = coeffs.iter().map(|f| eval(f, t)).collect();
    let piv = (0..n).max_by(|&a, &b| ct[a].norm().total_cmp(&ct[b].norm())).unwrap_or(0);
    let mu0 = coeffs.iter().map(|f| eval(f, s)).nth(piv).unwrap_or(C1) / ct[piv];
    let sys = |z: &[Complex64]| {
        let (s, t, mu) = (z[0], z[1], z[2]);
        let f = DVector::from_iterator(n, coeffs.iter().map(|p| eval(p, s) - mu * eval(p, t)));
        let j = DMatrix::from_fn(n, 3, |i, k| match k {
            0 => deriv(&coeffs[i], s),
            1 => -mu * deriv(&coeffs[i], t),
            _ => -eval(&coeffs[i], t),
        });
        (f, j)
    };
    let out = newton_c(&sys, vec![s, t, mu0], 1e-13);
    if out.residual.is_finite() && (out.x[0] - s).norm() < 1e-3 * (1.0 + s.norm()) {
        (out.x[0], out.x[1])
    } else {
        (s, t)
    }
}

/// Exact remainder matrix: column `j` holds `p_j mod f` (`f` without root at `[1:0]`).
fn remainder_matrix(c: &JetCurve, f: &BinaryForm) -> Result<RatMatrix> {
    let rems: Vec<BinaryForm> = c.p().iter().map(|p| p.rem_affine(f)).collect::<Result<_>>()?;
    let rows = f.degree();
    let mut m = RatMatrix::zeros(rows, c.n());
    for (j, r) in rems.iter().enumerate() {
        for i in 0..rows {
            m.set(i, j, r.coeff(i).clone());
        }
    }
    Ok(m)
}

/// Try to recognise a numeric parameter pair as the roots of a rational
/// quadratic factor of the node polynomial.
fn exact_pair_form(nodes: &UniPoly, s: Complex64, t: Complex64) -> Option<BinaryForm> {
    let sum = s + t;
    let prod = s * t;
    if sum.im.abs() > 1e-9 * (1.0 + sum.norm()) || prod.im.abs() > 1e-9 * (1.0 + prod.norm()) {
        return None;
    }
    let sum_q = rational::rationalize(sum.re, 1_000_000, 1e-9 * (1.0 + sum.re.abs()))?;
    let prod_q = rational::rationalize(prod.re, 1_000_000, 1e-9 * (1.0 + prod.re.abs()))?;
    let quad = UniPoly::new(vec![prod_q, -sum_q, Rational::one()]);
    let (_, r) = nodes.div_rem(&quad);
    if !r.is_zero() {
        return None;
    }
    BinaryForm::homogenize(&quad, 2).ok()
}

/// Covectors `P × e_i`, `P × e_j` for the two coordinates where `P` is smallest.
fn covectors_through_point(p: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| p[a].norm().total_cmp(&p[b].norm()));
    let cross = |k: usize| {
        let mut e = [C0; 3];
        e[k] = C1;
        vec![
            p[1] * e[2] - p[2] * e[1],
            p[2] * e[0] - p[0] * e[2],
            p[0] * e[1] - p[1] * e[0],
        ]
    };
    (normalize_max_c(&cross(idx[0])), normalize_max_c(&cross(idx[1])))
}

/// Real orthonormal basis of the span of two real vectors.
fn orthonormal_pair(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let e1: Vec<f64> = a.iter().map(|x| x / na).collect();
    let d: f64 = e1.iter().zip(b).map(|(x, y)| x * y).sum();
    let r: Vec<f64> = b.iter().zip(&e1).map(|(y, x)| y - d * x).collect();
    let nr = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    (e1, r.iter().map(|x| x / nr).collect())
}

fn exact_covectors_to_c(v: &[Rational]) -> Vec<Complex64> {
    v.iter().map(|q| Complex64::new(rational::to_f64(q), 0.0)).collect()
}

/// The three nodes of a plane quartic `C` (`n = 3`), by eliminating `t` from
/// `C(s) ∥ C(t)`.
pub fn nodes_exact_n3(c: &JetCurve) -> Result<SecantReport> {
    if c.n() != 3 {
        return Err(Error::InvalidInput(format!("nodes need n = 3, got n = {}", c.n())));
    }
    check_preconditions(c)?;
    if det_ac(c).is_zero() {
        return Err(Error::NonGenericCurve(
            "det A_C = 0: the curve has a triple point (3-secant point)".into(),
        ));
    }
    let mut rng = placement_rng(0);
    let mut found = None;
    for attempt in 0..12 {
        let place = Placement::random(3, &mut rng, attempt < 4);
        let ct = place.apply(c)?;
        if let Some(np) = node_polynomial(&ct) {
            found = Some((place, ct, np));
            break;
        }
    }
    let Some((place, ct, npoly)) = found else {
        return Err(Error::NonGenericCurve("node elimination did not produce a clean sextic".into()));
    };
    let nform = BinaryForm::homogenize(&npoly, 6)?;
    if !is_squarefree(&nform) {
        return Err(Error::NonGenericCurve(
            "node parameters are not distinct (tacnode, cusp or triple point)".into(),
        ));
    }
    let real_params = count_real_roots(&npoly);
    let roots = crate::exactalg::complex_roots(&nform, 1e-12)?;
    let cg = place.reparameterized(c)?;
    let coeffs: Vec<Vec<Complex64>> = cg.coefficients_f64().iter().map(|f| to_complex(f)).collect();
    let image = |s: Complex64| -> Vec<Complex64> {
        coeffs.iter().map(|f| eval_form_c(f, s, C1)).collect()
    };
    // the pairing of the six parameters into three nodes
    let zs: Vec<Complex64> = roots.iter().map(ComplexPoint::z).collect();
    let mut scored: Vec<(f64, Vec<(usize, usize)>)> = perfect_matchings(&[0, 1, 2, 3, 4, 5])
        .into_iter()
        .map(|m| {
            let cost = m
                .iter()
                .map(|&(i, j)| projective_distance(&image(zs[i]), &image(zs[j])))
                .fold(0.0, f64::max);
            (cost, m)
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    // root errors are amplified on ill-scaled curves, so the gate is relative and each
    // chosen pair is checked again after refinement
    if scored[0].0 > 1e-2 || scored[1].0 < 100.0 * scored[0].0.max(1e-5) {
        return Err(Error::NonGenericCurve(format!(
            "node parameters do not pair up cleanly (best {:.2e}, next {:.2e})",
            scored[0].0, scored[1].0
        )));
    }
    let mut secants = Vec::new();
    let mut numeric_real = 0;
    for &(i, j) in &scored[0].1 {
        let (s, t) = refine_node(&coeffs, zs[i], zs[j]);
        let gap = projective_distance(&image(s), &image(t));
        if gap > 1e-6 {
            return Err(Error::NonGenericCurve(format!("node pair does not refine to a node (gap {gap:.2e})")));
        }
        let (s_pt, t_pt) = (roots[i], roots[j]);
        let is_cross = s_pt.is_real() && t_pt.is_real();
        let is_solitary = !is_cross && (s - t.conj()).norm() < 1e-6 * (1.0 + s.norm());
        numeric_real += 2 * usize::from(is_cross);
        let is_real = is_cross || is_solitary;
        let snap = |z: Complex64, real: bool| if real { Complex64::new(z.re, 0.0) } else { z };
        let (s, t) = if is_cross {
            (snap(s, true), snap(t, true))
        } else if is_solitary {
            (s, s.conj())
        } else {
            (s, t)
        };
        let points: Vec<ComplexPoint> = [s, t]
            .iter()
            .map(|&z| {
                let mut p = ComplexPoint::affine(z);
                if is_cross {
                    p.im = 0.0;
                }
                place.map_point(p)
            })
            .collect();
        let exact_t = exact_pair_form(&npoly, s, t);
        let (divisor, exact, lambda_a, lambda_b) = if let Some(ft) = exact_t {
            let m = remainder_matrix(&cg, &ft)?;
            let ker = kernel_exact(&m);
            if ker.len() != 2 {
                return Err(Error::NonGenericCurve(format!(
                    "node pair {ft} cuts a {}-dimensional family of lines",
                    ker.len()
                )));
            }
            let [a, b, cc, d] = place.g.map(rat);
            // f_D(w) = f_t(g^{-1} w), with g^{-1} ∝ (d, -b; -c, a)
            let fd = ft.substitute_linear(&d, &-b, &-cc, &a).normalized();
            let coeffs_c = normalize_max_c(&to_complex(&fd.to_f64()));
            let la = exact_covectors_to_c(&ker[0]);
            let lb = exact_covectors_to_c(&ker[1]);
            (
                Divisor { degree: 2, kind: DivisorKind::Exact, form: Some(fd), coeffs: coeffs_c, points },
                Some(ExactPlane { a: ker[0].clone(), b: ker[1].clone() }),
                la,
                lb,
            )
        } else {
            let hp: Vec<(Complex64, Complex64)> = points.iter().map(ComplexPoint::homogeneous).collect();
            let fd = normalize_max_c(&form_from_roots_c(&hp));
            let node = normalize_max_c(&image(s));
            let (mut la, mut lb) = covectors_through_point(&node);
            if is_real {
                let ra: Vec<f64> = la.iter().map(|z| z.re).collect();
                let rb: Vec<f64> = lb.iter().map(|z| z.re).collect();
                let (ea, eb) = orthonormal_pair(&ra, &rb);
                la = to_complex(&ea);
                lb = to_complex(&eb);
            }
            (
                Divisor { degree: 2, kind: DivisorKind::Numeric, form: None, coeffs: fd, points },
                None,
                la,
                lb,
            )
        };
        secants.push(Secant { lambda_a, lambda_b, exact, divisor, multiplicity: 1, is_real, singular: false });
    }
    if numeric_real != real_params {
        return Err(Error::NumericFailure(format!(
            "{numeric_real} numerically real node parameters, Sturm count {real_params}"
        )));
    }
    sort_secants(&mut secants);
    let _ = ct;
    Ok(SecantReport::new(3, "exact-nodes", secants, Vec::new(), 0))
}

fn secant_sort_key(s: &Secant) -> (u8, Vec<i64>) {
    let class = match s.divisor.points.iter().filter(|p| p.is_real()).count() {
        n if n == s.divisor.points.len() => 0,
        _ if s.is_real => 1,
        _ => 2,
    };
    let key = s
        .divisor
        .coeffs
        .iter()
        .flat_map(|z| [z.re, z.im])
        .map(|x| (x * 1e6).round() as i64)
        .collect();
    (class, key)
}

fn sort_secants(secants: &mut [Secant]) {
    secants.sort_by(|a, b| secant_sort_key(a).cmp(&secant_sort_key(b)));
}

// ---------------------------------------------------------------------------
// numeric secants

/// Residuals of `λ_a·p, λ_b·p mod f` in the unknowns
/// `z = (f_1..f_k, a_2..a_{n-1}, b_2..b_{n-1})`, `f = u^k + f_1 u^{k-1}v + …`,
/// `λ_a = (1, 0, a)`, `λ_b = (0, 1, b)`, with the analytic Jacobian.
fn secant_system(p: &[Vec<Complex64>], z: &[Complex64]) -> (DVector<Complex64>, DMatrix<Complex64>) {
    let n = p.len();
    let k = 2 * n - 4;
    let m = n - 2;
    let mut f = Vec::with_capacity(k + 1);
    f.push(C1);
    f.extend_from_slice(&z[..k]);
    let qr: Vec<(Vec<Complex64>, Vec<Complex64>)> = p.iter().map(|pj| divrem_forms_c(pj, &f)).collect();
    let mut la = vec![C0; n];
    let mut lb = vec![C0; n];
    la[0] = C1;
    lb[1] = C1;
    la[2..].copy_from_slice(&z[k..k + m]);
    lb[2..].copy_from_slice(&z[k + m..k + 2 * m]);
    let combine = |l: &[Complex64], which: usize| -> Vec<Complex64> {
        let len = if which == 0 { 3 } else { k };
        let mut out = vec![C0; len];
        for (lj, (q, r)) in l.iter().zip(&qr) {
            let src = if which == 0 { q } else { r };
            for (o, x) in out.iter_mut().zip(src) {
                *o += lj * x;
            }
        }
        out
    };
    let (qa, ra) = (combine(&la, 0), combine(&la, 1));
    let (qb, rb) = (combine(&lb, 0), combine(&lb, 1));
    let mut res = DVector::zeros(2 * k);
    for i in 0..k {
        res[i] = ra[i];
        res[k + i] = rb[i];
    }
    let mut jac = DMatrix::zeros(2 * k, 2 * k);
    for (block, q) in [(0usize, &qa), (1, &qb)] {
        for i in 1..=k {
            // -(q · u^{k-i} v^i) mod f
            let mut e = vec![C0; k + 1];
            e[i] = C1;
            let prod = mul_forms_c(q, &e);
            let (_, r) = divrem_forms_c(&prod, &f);
            for row in 0..k {
                jac[(block * k + row, i - 1)] = -r[row];
            }
        }
        for j in 0..m {
            let r = &qr[j + 2].1;
            for row in 0..k {
                jac[(block * k + row, k + block * m + j)] = r[row];
            }
        }
    }
    (res, jac)
}

#[derive(Debug, Clone)]
struct RawSolution {
    z: Vec<Complex64>,
    real: bool,
    singular: bool,
}

fn dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn scale(a: &[Complex64]) -> f64 {
    1.0 + a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

const SINGULAR_COND: f64 = 1e-9;

/// Classify a converged complex solution as real (re-polished in real
/// arithmetic) or not.
fn finish_solution<F, G>(sys_c: &F, sys_r: &G, out: &NewtonOutcome<Complex64>, tol: f64) -> RawSolution
where
    F: Fn(&[Complex64]) -> (DVector<Complex64>, DMatrix<Complex64>),
    G: Fn(&[f64]) -> (DVector<f64>, DMatrix<f64>),
{
    let z = &out.x;
    let s = scale(z);
    let im = z.iter().map(|x| x.im * x.im).sum::<f64>().sqrt();
    if im < 1e-6 * s {
        let re: Vec<f64> = z.iter().map(|x| x.re).collect();
        let polished = newton_r(sys_r, re.clone(), tol);
        let moved = polished.x.iter().zip(&re).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if polished.converged && moved < 1e-6 * s {
            return RawSolution {
                z: polished.x.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
                real: true,
                singular: polished.conditioning < SINGULAR_COND,
            };
        }
    }
    let _ = sys_c;
    RawSolution { z: z.clone(), real: false, singular: out.conditioning < SINGULAR_COND }
}

/// Estimated multiplicity of a singular solution: the number of distinct
/// solutions of a slightly perturbed system found near it.
fn perturbation_cluster(p: &[Vec<Complex64>], z: &[Complex64], cfg: &SolverConfig) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9);
    let eps = 1e-7;
    let perturbed: Vec<Vec<Complex64>> = p
        .iter()
        .map(|f| {
            f.iter()
                .map(|c| c + Complex64::new(rng.random_range(-eps..eps), rng.random_range(-eps..eps)))
                .collect()
        })
        .collect();
    let sys = |x: &[Complex64]| secant_system(&perturbed, x);
    let radius = 1e-2 * scale(z);
    let mut found: Vec<Vec<Complex64>> = Vec::new();
    for _ in 0..96 {
        let x0: Vec<Complex64> = z
            .iter()
            .map(|c| c + Complex64::new(rng.random_range(-1e-3..1e-3), rng.random_range(-1e-3..1e-3)))
            .collect();
        let out = newton_c(&sys, x0, cfg.tol);
        if out.converged && dist(&out.x, z) < radius && !found.iter().any(|w| dist(w, &out.x) < 1e-7 * scale(w)) {
            found.push(out.x);
        }
    }
    found.len().max(1)
}

/// Numeric `(2n-4)`-secants with the Castelnuovo certificate; the report is
/// returned whether or not the certificate holds.
///
/// Each placement is a fresh random choice of coordinates; a secant that sits
/// far out in one chart is usually reachable in another.
pub fn secants_numeric_report(c: &JetCurve, cfg: &SolverConfig) -> Result<SecantReport> {
    check_preconditions(c)?;
    let mut rng = placement_rng(cfg.seed);
    let mut best: Option<SecantReport> = None;
    let mut starts = 0;
    for attempt in 0..PLACEMENT_ATTEMPTS {
        let place = Placement::random(c.n(), &mut rng, false).centered(c);
        let mut report = secants_in_placement(c, cfg, &place, attempt << 40)?;
        starts += report.starts_used;
        report.starts_used = starts;
        if attempt > 0 {
            report.warnings.push(format!("certified in placement {}", attempt + 1));
        }
        if report.certificate_ok {
            return Ok(report);
        }
        if best.as_ref().is_none_or(|b| report.total_with_multiplicity > b.total_with_multiplicity) {
            best = Some(report);
        }
    }
    let mut report = best.expect("at least one placement");
    report.starts_used = starts;
    report.warnings.retain(|w| !w.starts_with("certified in placement"));
    report.warnings.push(format!("no certificate in {PLACEMENT_ATTEMPTS} placements"));
    Ok(report)
}

const PLACEMENT_ATTEMPTS: usize = 4;

fn secants_in_placement(c: &JetCurve, cfg: &SolverConfig, place: &Placement, offset: usize) -> Result<SecantReport> {
    let n = c.n();
    let k = 2 * n - 4;
    let m = n - 2;
    let dim = 2 * k;
    let expected = crate::castelnuovo_count(n);
    let ct = place.apply(c)?;
    let raw = ct.coefficients_f64();
    let big = raw.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
    let p: Vec<Vec<Complex64>> = raw.iter().map(|f| f.iter().map(|x| Complex64::new(x / big, 0.0)).collect()).collect();
    let sys_c = |z: &[Complex64]| secant_system(&p, z);
    let sys_r = |x: &[f64]| {
        let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let (f, j) = secant_system(&p, &z);
        (f.map(|v| v.re), j.map(|v| v.re))
    };

    let mut sols: Vec<RawSolution> = Vec::new();
    let mut warnings = Vec::new();
    let mut starts_used = 0;
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for round in 0..cfg.max_rounds.max(1) {
        let count = cfg.starts << round;
        starts_used += count;
        let outs = multistart_c(&sys_c, dim, 1.5, cfg, round, offset, count);
        for o in &outs {
            let sol = finish_solution(&sys_c, &sys_r, o, cfg.tol);
            let mut cands = vec![sol.clone()];
            if !sol.real {
                cands.push(RawSolution { z: sol.z.iter().map(|x| x.conj()).collect(), ..sol });
            }
            for cand in cands {
                let tol = if cand.singular { 1e-4 } else { cfg.dedupe_tol() };
                if !sols.iter().any(|s| dist(&s.z, &cand.z) < tol * scale(&s.z)) {
                    sols.push(cand);
                }
            }
        }
        // group solutions by plane (the chart coordinates a, b)
        groups.clear();
        for (i, s) in sols.iter().enumerate() {
            let plane = &s.z[k..k + 2 * m];
            match groups.iter_mut().find(|g| {
                let q = &sols[g[0]].z[k..k + 2 * m];
                dist(plane, q) < 1e-6 * scale(q)
            }) {
                Some(g) => g.push(i),
                None => groups.push(vec![i]),
            }
        }
        let total: usize = groups.iter().map(Vec::len).sum();
        if groups.iter().any(|g| g.len() > 4 * n) {
            warnings.push("a secant carries a continuum of divisors (positive-dimensional solution set)".into());
            break;
        }
        if total == expected {
            break;
        }
    }

    let mut secants = Vec::new();
    for g in &groups {
        let first = &sols[g[0]];
        let multiplicity = if g.len() == 1 && first.singular {
            let est = perturbation_cluster(&p, &first.z, cfg);
            warnings.push(format!("singular secant solution; multiplicity {est} estimated by perturbation"));
            est
        } else {
            g.len()
        };
        let z = &first.z;
        let mut la_t = vec![C0; n];
        let mut lb_t = vec![C0; n];
        la_t[0] = C1;
        lb_t[1] = C1;
        la_t[2..].copy_from_slice(&z[k..k + m]);
        lb_t[2..].copy_from_slice(&z[k + m..k + 2 * m]);
        let la = place.covector_back(&la_t);
        let lb = place.covector_back(&lb_t);
        let is_real = g.iter().all(|&i| sols[i].real);
        let (la, lb) = if is_real {
            let (a, b) = orthonormal_pair(
                &la.iter().map(|x| x.re).collect::<Vec<_>>(),
                &lb.iter().map(|x| x.re).collect::<Vec<_>>(),
            );
            (to_complex(&a), to_complex(&b))
        } else {
            (normalize_max_c(&la), normalize_max_c(&lb))
        };
        // the divisor of the first solution in the group; for a secant with
        // more than 2n-4 intersections it is one of several sub-divisors
        let mut f = vec![C1];
        f.extend_from_slice(&z[..k]);
        let roots = complex_roots_c(&f, 1e-12)?;
        let mut points: Vec<ComplexPoint> = roots
            .into_iter()
            .map(|r| {
                let mut r = r;
                if first.real && r.im.abs() <= r.certified_radius.max(1e-12) {
                    r.im = 0.0;
                }
                place.map_point(r)
            })
            .collect();
        points.sort_by(|a, b| (a.at_infinity, a.re, a.im).partial_cmp(&(b.at_infinity, b.re, b.im)).unwrap());
        let hp: Vec<(Complex64, Complex64)> = points.iter().map(ComplexPoint::homogeneous).collect();
        let coeffs = normalize_max_c(&form_from_roots_c(&hp));
        secants.push(Secant {
            lambda_a: la,
            lambda_b: lb,
            exact: None,
            divisor: Divisor { degree: k, kind: DivisorKind::Numeric, form: None, coeffs, points },
            multiplicity,
            is_real,
            singular: first.singular,
        });
    }
    sort_secants(&mut secants);
    let report = SecantReport::new(n, "numeric", secants, warnings, starts_used);
    Ok(report)
}

/// Numeric secants; errors with `IncompleteEnumeration` when the Castelnuovo
/// certificate fails after all escalation rounds.
pub fn secants_numeric(c: &JetCurve, cfg: &SolverConfig) -> Result<SecantReport> {
    let report = secants_numeric_report(c, cfg)?;
    if !report.certificate_ok {
        return Err(Error::IncompleteEnumeration(format!(
            "found total multiplicity {} of {} secants after {} starts",
            report.total_with_multiplicity,
            crate::castelnuovo_count(c.n()),
            report.starts_used
        )));
    }
    Ok(report)
}

/// Best available secants: exact nodes for `n = 3`, numeric otherwise.
pub fn find_secants(c: &JetCurve, cfg: &SolverConfig) -> Result<SecantReport> {
    if c.n() == 3 {
        nodes_exact_n3(c)
    } else {
        secants_numeric(c, cfg)
    }
}

/// Rational covectors of a secant: the exact ones, or the real numeric ones
/// rationalized (scaled to largest entry 1, denominators ≤ 10^4, within 1e-11).
pub fn rational_covectors(m: &Secant) -> Result<(Vec<Rational>, Vec<Rational>)> {
    if let Some(e) = &m.exact {
        return Ok((e.a.clone(), e.b.clone()));
    }
    let conv = |l: &[Complex64]| -> Result<Vec<Rational>> {
        if l.iter().any(|z| z.im.abs() > 1e-12) {
            return Err(Error::NumericFailure("complex covector cannot be rationalized".into()));
        }
        let piv = l.iter().map(|z| z.re).fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
        l.iter()
            .map(|z| {
                rational::rationalize(z.re / piv, 10_000, 1e-11)
                    .ok_or_else(|| Error::NumericFailure(format!("covector entry {} is not rational", z.re / piv)))
            })
            .collect()
    };
    Ok((conv(&m.lambda_a)?, conv(&m.lambda_b)?))
}

/// `deg gcd(λ_a·p, λ_b·p)`, the degree of `M·C`.
pub fn verify_secant(c: &JetCurve, m: &Secant) -> Result<usize> {
    let (a, b) = rational_covectors(m)?;
    verify_plane(c, &a, &b)
}

pub fn verify_plane(c: &JetCurve, a: &[Rational], b: &[Rational]) -> Result<usize> {
    let pair = RatMatrix::from_rows(vec![a.to_vec(), b.to_vec()])?;
    if pair.rank() < 2 {
        return Err(Error::InvalidInput("secant covectors are dependent".into()));
    }
    let fa = c.dot(a);
    let fb = c.dot(b);
    if fa.is_zero() || fb.is_zero() {
        return Err(Error::InvalidInput("a covector contains the whole curve".into()));
    }
    Ok(bf_gcd(&fa, &fb)?.degree())
}

/// The secant of an exact plane, for callers that supply covectors directly.
pub fn secant_from_plane(c: &JetCurve, a: Vec<Rational>, b: Vec<Rational>) -> Result<Secant> {
    let fa = c.dot(&a);
    let fb = c.dot(&b);
    let fd = bf_gcd(&fa, &fb)?;
    let coeffs = normalize_max_c(&to_complex(&fd.to_f64()));
    let points = crate::exactalg::complex_roots(&fd, 1e-12).unwrap_or_default();
    Ok(Secant {
        lambda_a: exact_covectors_to_c(&a),
        lambda_b: exact_covectors_to_c(&b),
        exact: Some(ExactPlane { a, b }),
        divisor: Divisor { degree: fd.degree(), kind: DivisorKind::Exact, form: Some(fd), coeffs, points },
        multiplicity: 1,
        is_real: true,
        singular: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rational::rat;

    fn cstar() -> JetCurve {
        JetCurve::from_i64(&[&[0, 2, 0, 2, 0], &[1, 0, 0, 0, -1], &[0, 2, 0, -2, 0]]).unwrap()
    }

    fn syzygy_curve() -> JetCurve {
        let u2 = BinaryForm::from_i64(&[1, 0, 0]);
        let a = BinaryForm::from_i64(&[1, -1]);
        let p1 = u2.mul(&a).mul(&BinaryForm::from_i64(&[1, -2]));
        let p2 = u2.mul(&a).mul(&BinaryForm::from_i64(&[1, -3]));
        JetCurve::new(vec![p1, p2, BinaryForm::from_i64(&[0, 0, 0, 0, 1])]).unwrap()
    }

    fn e(i: usize, n: usize) -> Vec<Rational> {
        (0..n).map(|j| rat(i64::from(i == j))).collect()
    }

    #[test]
    fn cstar_nodes_exact() {
        let r = nodes_exact_n3(&cstar()).unwrap();
        assert!(r.certificate_ok);
        assert_eq!(r.secants.len(), 3);
        let forms: Vec<BinaryForm> = r.secants.iter().map(|s| s.divisor.form.clone().unwrap()).collect();
        for expected in [[1, 0, -1], [0, 1, 0], [1, 0, 1]] {
            assert!(forms.contains(&BinaryForm::from_i64(&expected)), "{expected:?} missing");
        }
        for s in &r.secants {
            assert!(s.is_real);
            assert_eq!(verify_secant(&cstar(), s).unwrap(), 2);
            let ex = s.exact.as_ref().unwrap();
            // hyperplanes through a coordinate point are spanned by the other two axes
            let support: Vec<usize> = (0..3).filter(|&j| !ex.a[j].is_zero() || !ex.b[j].is_zero()).collect();
            assert_eq!(support.len(), 2);
        }
        // the node cut by x_2 = x_3 = 0 is [1:0:0] with f_D = u^2 - v^2
        let s = r.secants.iter().find(|s| s.divisor.form == Some(BinaryForm::from_i64(&[1, 0, -1]))).unwrap();
        assert_eq!(s.exact.as_ref().unwrap().a, e(1, 3));
        assert_eq!(s.exact.as_ref().unwrap().b, e(2, 3));
    }

    #[test]
    fn syzygy_curve_is_not_generic() {
        assert!(matches!(nodes_exact_n3(&syzygy_curve()), Err(Error::NonGenericCurve(_))));
    }

    #[test]
    fn verify_secant_examples() {
        let c = cstar();
        assert_eq!(verify_plane(&c, &e(1, 3), &e(2, 3)).unwrap(), 2);
        assert_eq!(verify_plane(&syzygy_curve(), &e(0, 3), &e(1, 3)).unwrap(), 3);
        let a = vec![rat(1), rat(2), rat(-3)];
        let b = vec![rat(5), rat(-1), rat(7)];
        assert_eq!(verify_plane(&c, &a, &b).unwrap(), 0);
    }

    #[test]
    fn numeric_agrees_with_exact_on_cstar() {
        let cfg = SolverConfig { starts: 60, ..Default::default() };
        let num = secants_numeric(&cstar(), &cfg).unwrap();
        assert_eq!(num.total_with_multiplicity, 3);
        let exact = nodes_exact_n3(&cstar()).unwrap();
        for s in &exact.secants {
            let close = num.secants.iter().any(|t| {
                dist(&normalize_max_c(&t.divisor.coeffs), &normalize_max_c(&s.divisor.coeffs)) < 1e-6
            });
            assert!(close);
        }
        assert!(num.secants.iter().all(|s| s.is_real && s.multiplicity == 1));
    }

    #[test]
    fn castelnuovo_for_one_example_perturbation_n4() {
        let c = JetCurve::from_i64(&[
            &[1, 0, 1, 0, 0, 2, 0],
            &[0, 1, 0, 1, 1, 0, 0],
            &[0, 0, 1, 0, 1, 0, 1],
            &[1, 0, 0, 1, 0, 0, 1],
        ])
        .unwrap();
        let cfg = SolverConfig { starts: 200, ..Default::default() };
        let r = secants_numeric(&c, &cfg).unwrap();
        assert_eq!(r.total_with_multiplicity, 6);
        // conjugation is a perfect matching fixing the real secants
        for s in r.secants.iter().filter(|s| !s.is_real) {
            let conj: Vec<Complex64> = s.divisor.coeffs.iter().map(|z| z.conj()).collect();
            assert!(r.secants.iter().any(|t| !t.is_real && dist(&t.divisor.coeffs, &conj) < 1e-6));
        }
    }

    #[test]
    fn discriminant_curve_has_secant_of_multiplicity_three() {
        // p1, p2 share the cubic (u - v)(u + 2v)(u - 3v): a triple point at [0:0:1]
        let l = BinaryForm::from_i64(&[1, -1]).mul(&BinaryForm::from_i64(&[1, 2])).mul(&BinaryForm::from_i64(&[1, -3]));
        let c = JetCurve::new(vec![
            l.mul(&BinaryForm::from_i64(&[1, 1])),
            l.mul(&BinaryForm::from_i64(&[2, -1])),
            BinaryForm::from_i64(&[1, 3, 0, 1, -1]),
        ])
        .unwrap();
        assert!(det_ac(&c).is_zero());
        let cfg = SolverConfig { starts: 200, ..Default::default() };
        let r = secants_numeric(&c, &cfg).unwrap();
        assert_eq!(r.secants.len(), 1);
        assert_eq!(r.secants[0].multiplicity, 3);
        assert!(r.secants[0].is_real);
    }

    #[test]
    fn preconditions() {
        let flat = JetCurve::from_i64(&[&[1, 0, 0, 0, 0], &[0, 0, 0, 0, 1], &[1, 0, 0, 0, 1]]).unwrap();
        assert!(matches!(nodes_exact_n3(&flat), Err(Error::InvalidInput(_))));
        let c2 = JetCurve::from_i64(&[&[1, 0, 0], &[0, 0, 1]]).unwrap();
        assert!(secants_numeric(&c2, &SolverConfig::default()).is_err());
    }
}
