//! Residual pencils of `(2n-4)`-secants, Segre points and weights, the
//! Segre index, and the chord-diagram formula for plane quartics.

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactalg::fform::{divrem_forms, norm};
use crate::exactalg::rational::{self, Rational};
use crate::exactalg::{bf_gcd, BinaryForm, ComplexPoint};
use crate::jet::{classify_discriminants_with, det_ac, JetCurve};
use crate::secants::{rational_covectors, Secant, SecantReport};

/// Two binary quadratics spanning the residual pencil `{D^r_t}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualPencil {
    pub q0: BinaryForm,
    pub q1: BinaryForm,
}

/// The Jacobian quadratic of a pencil, whose roots are the Segre points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegrePoints {
    pub jacobian: BinaryForm,
    pub disc_sign: i32,
}

/// Floating-point residual pencil, for secants known only numerically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericPencil {
    pub q0: Vec<f64>,
    pub q1: Vec<f64>,
    /// Relative size of the division remainders.
    pub remainder: f64,
}

/// `q0 = (λ_a·p)/f_D`, `q1 = (λ_b·p)/f_D` from exact data.
pub fn residual_pencil_exact(
    c: &JetCurve,
    a: &[Rational],
    b: &[Rational],
    fd: &BinaryForm,
) -> Result<ResidualPencil> {
    let k = 2 * c.n() - 4;
    let fa = c.dot(a);
    let fb = c.dot(b);
    if fa.is_zero() || fb.is_zero() {
        return Err(Error::InvalidSecant("a covector vanishes on the whole curve".into()));
    }
    let g = bf_gcd(&fa, &fb)?;
    if g.degree() > k {
        return Err(Error::DegenerateOnWall(format!(
            "the secant meets the curve in degree {} > {k}",
            g.degree()
        )));
    }
    if fd.degree() != k {
        return Err(Error::InvalidSecant(format!("divisor of degree {} instead of {k}", fd.degree())));
    }
    let (Some(q0), Some(q1)) = (fa.div_exact(fd), fb.div_exact(fd)) else {
        return Err(Error::InvalidSecant(format!("{fd} does not divide both hyperplane sections")));
    };
    Ok(ResidualPencil { q0, q1 })
}

/// Exact residual pencil of a secant with exact (or rationalizable) covectors.
pub fn residual_pencil(c: &JetCurve, m: &Secant) -> Result<ResidualPencil> {
    let (a, b) = rational_covectors(m)?;
    let fd = match &m.divisor.form {
        Some(f) => f.clone(),
        None => bf_gcd(&c.dot(&a), &c.dot(&b))?,
    };
    residual_pencil_exact(c, &a, &b, &fd)
}

/// `∂_u q0 · ∂_v q1 - ∂_v q0 · ∂_u q1`.
pub fn jacobian_form(q0: &BinaryForm, q1: &BinaryForm) -> BinaryForm {
    let a = q0.d_du().mul(&q1.d_dv());
    let b = q0.d_dv().mul(&q1.d_du());
    a.sub(&b).expect("equal degrees")
}

pub fn segre_points(p: &ResidualPencil) -> Result<SegrePoints> {
    if p.q0.degree() != 2 || p.q1.degree() != 2 {
        return Err(Error::InvalidInput("a residual pencil consists of quadratics".into()));
    }
    let jacobian = jacobian_form(&p.q0, &p.q1);
    if jacobian.is_zero() {
        return Err(Error::InvalidInput("the pencil members are proportional".into()));
    }
    let disc_sign = rational::sign(&jacobian.quadratic_discriminant()?);
    Ok(SegrePoints { jacobian, disc_sign })
}

/// `+1` for a hyperbolic pencil (real Segre points), `-1` for an elliptic one.
pub fn segre_weight(p: &ResidualPencil) -> Result<i32> {
    match segre_points(p)?.disc_sign {
        0 => Err(Error::DegenerateOnWall("the residual pencil has a base point".into())),
        s => Ok(s),
    }
}

const PLACEMENTS: [[f64; 4]; 6] = [
    [1.0, 0.0, 0.0, 1.0],
    [1.0, 1.0, -1.0, 1.0],
    [2.0, -1.0, 1.0, 3.0],
    [1.0, -3.0, 2.0, 1.0],
    [3.0, 2.0, -1.0, 2.0],
    [1.0, 5.0, -4.0, 1.0],
];

fn substitute_real(f: &[f64], g: &[f64; 4]) -> Vec<f64> {
    let c: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    crate::exactalg::fform::substitute_linear_c(&c, g[0], g[1], g[2], g[3])
        .into_iter()
        .map(|z| z.re)
        .collect()
}

/// Residual pencil of a real secant in floating point. The parameter line is
/// first moved so that `f_D` has no root near `[1:0]`; the Segre sign is
/// unaffected by a real reparameterization.
pub fn residual_pencil_numeric(c: &JetCurve, m: &Secant) -> Result<NumericPencil> {
    let Some((la, lb)) = m.real_covectors() else {
        return Err(Error::InvalidInput("residual pencils are taken for real secants only".into()));
    };
    let fd: Vec<f64> = m.divisor.coeffs.iter().map(|z| z.re).collect();
    let p = c.coefficients_f64();
    let dot = |l: &[f64]| -> Vec<f64> {
        (0..p[0].len()).map(|k| l.iter().zip(&p).map(|(x, f)| x * f[k]).sum()).collect()
    };
    let (pa, pb) = (dot(&la), dot(&lb));
    let g = PLACEMENTS
        .iter()
        .max_by(|a, b| {
            let la = substitute_real(&fd, a);
            let lb = substitute_real(&fd, b);
            (la[0].abs() / norm(&la)).total_cmp(&(lb[0].abs() / norm(&lb)))
        })
        .expect("non-empty");
    let f = substitute_real(&fd, g);
    let (q0, r0) = divrem_forms(&substitute_real(&pa, g), &f);
    let (q1, r1) = divrem_forms(&substitute_real(&pb, g), &f);
    let remainder = (norm(&r0) / norm(&substitute_real(&pa, g))).max(norm(&r1) / norm(&substitute_real(&pb, g)));
    if !(remainder < 1e-6) {
        return Err(Error::InvalidSecant(format!("f_D leaves a remainder of relative size {remainder:.1e}")));
    }
    Ok(NumericPencil { q0, q1, remainder })
}

fn jacobian_f64(q0: &[f64], q1: &[f64]) -> [f64; 3] {
    // q = a u^2 + b uv + c v^2: ∂u q = 2a u + b v, ∂v q = b u + 2c v
    let (a0, b0, c0) = (q0[0], q0[1], q0[2]);
    let (a1, b1, c1) = (q1[0], q1[1], q1[2]);
    let du0 = [2.0 * a0, b0];
    let dv0 = [b0, 2.0 * c0];
    let du1 = [2.0 * a1, b1];
    let dv1 = [b1, 2.0 * c1];
    let m = |x: [f64; 2], y: [f64; 2]| [x[0] * y[0], x[0] * y[1] + x[1] * y[0], x[1] * y[1]];
    let p = m(du0, dv1);
    let q = m(dv0, du1);
    [p[0] - q[0], p[1] - q[1], p[2] - q[2]]
}

/// Weight of a numeric pencil; the discriminant must clear a relative margin.
pub fn segre_weight_numeric(p: &NumericPencil) -> Result<i32> {
    let j = jacobian_f64(&p.q0, &p.q1);
    let disc = j[1] * j[1] - 4.0 * j[0] * j[2];
    let scale = (norm(&p.q0) * norm(&p.q1)).powi(2);
    let margin = 1e-7_f64.max(1e3 * p.remainder) * scale;
    if disc.abs() <= margin {
        return Err(Error::NumericFailure(format!(
            "Segre discriminant {disc:.3e} within the margin {margin:.1e}"
        )));
    }
    Ok(if disc > 0.0 { 1 } else { -1 })
}

/// Per-secant contribution to the Segre index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegreFactor {
    pub multiplicity: usize,
    pub weight: i32,
    /// `exact` or `numeric`
    pub route: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pencil: Option<ResidualPencil>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub segre_points: Option<SegrePoints>,
}

/// Local weight of one real secant, exactly when its data are rational.
pub fn secant_weight(c: &JetCurve, m: &Secant) -> Result<SegreFactor> {
    if m.exact.is_some() {
        let p = residual_pencil(c, m)?;
        let pts = segre_points(&p)?;
        let weight = segre_weight(&p)?;
        return Ok(SegreFactor {
            multiplicity: m.multiplicity,
            weight,
            route: "exact".into(),
            pencil: Some(p),
            segre_points: Some(pts),
        });
    }
    let p = residual_pencil_numeric(c, m)?;
    Ok(SegreFactor {
        multiplicity: m.multiplicity,
        weight: segre_weight_numeric(&p)?,
        route: "numeric".into(),
        pencil: None,
        segre_points: None,
    })
}

/// All factors of the Segre index, one per real secant.
pub fn segre_factors(c: &JetCurve, report: &SecantReport) -> Result<Vec<SegreFactor>> {
    if det_ac(c).is_zero() {
        return Err(Error::Degenerate);
    }
    if !report.certificate_ok {
        return Err(Error::IncompleteEnumeration(format!(
            "secant total {} differs from {}",
            report.total_with_multiplicity,
            crate::castelnuovo_count(c.n())
        )));
    }
    if classify_discriminants_with(c, Some(report)).in_dinf1 {
        return Err(Error::DegenerateOnWall("a secant of lower dimension was detected".into()));
    }
    report.real_secants().map(|m| secant_weight(c, m)).collect()
}

/// `S^P(C) = Π S^loc(C, M, M·C)^{m(M)}` over the real secants.
pub fn segre_index(c: &JetCurve, report: &SecantReport) -> Result<i32> {
    Ok(segre_factors(c, report)?
        .iter()
        .map(|f| if f.multiplicity % 2 == 0 { 1 } else { f.weight })
        .product())
}

/// For `n = 2` the only secant is empty and the residual pencil is spanned
/// by `p_1, p_2` themselves.
pub fn segre_index_n2(c: &JetCurve) -> Result<i32> {
    if c.n() != 2 {
        return Err(Error::InvalidInput("the pencil of the jet is used for n = 2 only".into()));
    }
    if det_ac(c).is_zero() {
        return Err(Error::Degenerate);
    }
    segre_weight(&ResidualPencil { q0: c.p()[0].clone(), q1: c.p()[1].clone() })
}

/// Segre index by the best available route: the jet pencil for `n = 2`,
/// exact nodes for `n = 3`, certified numeric secants otherwise.
pub fn segre_index_auto(c: &JetCurve, cfg: &crate::newton::SolverConfig) -> Result<i32> {
    if c.n() == 2 {
        return segre_index_n2(c);
    }
    let report = crate::secants::find_secants(c, cfg)?;
    segre_index(c, &report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    /// both parameters real
    CrossLike,
    /// complex-conjugate parameters
    Solitary,
    /// non-real node, parameters in the same half of `P^1 ∖ RP^1`
    Essential,
    /// non-real node, parameters in opposite halves
    Inessential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChordDiagram {
    pub kinds: Vec<NodeKind>,
    pub interlaced: usize,
    /// pairs of conjugate essential nodes
    pub essential_pairs: usize,
    pub index: i32,
}

const IM_TOL: f64 = 1e-9;

fn classify_node(s: &ComplexPoint, t: &ComplexPoint) -> Result<NodeKind> {
    let ambiguous = |p: &ComplexPoint| !p.at_infinity && p.im != 0.0 && p.im.abs() < IM_TOL * (1.0 + p.re.abs());
    if ambiguous(s) || ambiguous(t) {
        return Err(Error::NumericFailure("node parameter too close to the real line".into()));
    }
    Ok(match (s.is_real(), t.is_real()) {
        (true, true) => NodeKind::CrossLike,
        (true, false) | (false, true) => {
            return Err(Error::NumericFailure("node with one real and one non-real parameter".into()))
        }
        _ if s.chordal_distance(&t.conj()) < 1e-6 => NodeKind::Solitary,
        _ if s.im * t.im > 0.0 => NodeKind::Essential,
        _ => NodeKind::Inessential,
    })
}

/// Two chords of the circle interlace when exactly one endpoint of the second
/// lies strictly inside the arc cut by the first.
fn interlace(a: (f64, f64), b: (f64, f64)) -> bool {
    let (lo, hi) = if a.0 < a.1 { (a.0, a.1) } else { (a.1, a.0) };
    let inside = |x: f64| lo < x && x < hi;
    inside(b.0) != inside(b.1)
}

/// The chord diagram of a plane quartic's nodes.
pub fn chord_diagram(report: &SecantReport) -> Result<ChordDiagram> {
    if report.n != 3 {
        return Err(Error::InvalidInput("chord diagrams are defined for n = 3".into()));
    }
    if report.secants.len() != 3 || report.secants.iter().any(|s| s.multiplicity != 1 || s.divisor.points.len() != 2) {
        return Err(Error::NonGenericCurve("chord diagrams need three simple nodes".into()));
    }
    let kinds: Vec<NodeKind> = report
        .secants
        .iter()
        .map(|s| classify_node(&s.divisor.points[0], &s.divisor.points[1]))
        .collect::<Result<_>>()?;
    let chords: Vec<(f64, f64)> = report
        .secants
        .iter()
        .zip(&kinds)
        .filter(|(_, k)| **k == NodeKind::CrossLike)
        .map(|(s, _)| (s.divisor.points[0].circle_angle(), s.divisor.points[1].circle_angle()))
        .collect();
    let mut interlaced = 0;
    for i in 0..chords.len() {
        for j in i + 1..chords.len() {
            interlaced += usize::from(interlace(chords[i], chords[j]));
        }
    }
    let essential = kinds.iter().filter(|k| **k == NodeKind::Essential).count();
    if essential % 2 != 0 {
        return Err(Error::NumericFailure("essential nodes do not pair up under conjugation".into()));
    }
    let essential_pairs = essential / 2;
    let index = if (interlaced + essential_pairs) % 2 == 0 { 1 } else { -1 };
    Ok(ChordDiagram { kinds, interlaced, essential_pairs, index })
}

/// `(-1)^{ind(C) + ind_im(C)}` from the chord diagram of the nodes.
pub fn chord_diagram_index_n3(c: &JetCurve, report: &SecantReport) -> Result<i32> {
    if c.n() != 3 {
        return Err(Error::InvalidInput("chord diagrams are defined for n = 3".into()));
    }
    Ok(chord_diagram(report)?.index)
}

/// Species label of a line by its index.
pub fn species(index: i32) -> &'static str {
    if index > 0 {
        "hyperbolic"
    } else {
        "elliptic"
    }
}

/// Is `x` within the real locus (all imaginary parts zero)?
pub fn is_real_vector(x: &[Complex64]) -> bool {
    x.iter().all(|z| z.im.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rational::rat;
    use crate::secants::{nodes_exact_n3, secants_numeric};
    use crate::SolverConfig;

    fn cstar() -> JetCurve {
        JetCurve::from_i64(&[&[0, 2, 0, 2, 0], &[1, 0, 0, 0, -1], &[0, 2, 0, -2, 0]]).unwrap()
    }

    fn e(i: usize) -> Vec<Rational> {
        (0..3).map(|j| rat(i64::from(i == j))).collect()
    }

    fn bf(c: &[i64]) -> BinaryForm {
        BinaryForm::from_i64(c)
    }

    fn pencil(a: &[i64], b: &[i64]) -> ResidualPencil {
        ResidualPencil { q0: bf(a), q1: bf(b) }
    }

    #[test]
    fn cstar_pencils() {
        let c = cstar();
        let p = residual_pencil_exact(&c, &e(0), &e(1), &bf(&[1, 0, 1])).unwrap();
        assert_eq!(p, pencil(&[0, 2, 0], &[1, 0, -1]));
        let p = residual_pencil_exact(&c, &e(1), &e(2), &bf(&[1, 0, -1])).unwrap();
        assert_eq!(p, pencil(&[1, 0, 1], &[0, 2, 0]));
        let p = residual_pencil_exact(&c, &e(0), &e(2), &bf(&[0, 1, 0])).unwrap();
        assert_eq!(p, pencil(&[2, 0, 2], &[2, 0, -2]));
        assert!(matches!(
            residual_pencil_exact(&c, &e(0), &e(1), &bf(&[1, 0, -1])),
            Err(Error::InvalidSecant(_))
        ));
    }

    #[test]
    fn segre_point_examples() {
        let s = segre_points(&pencil(&[0, 2, 0], &[1, 0, -1])).unwrap();
        assert_eq!(s.jacobian, bf(&[-4, 0, -4]));
        assert_eq!(s.disc_sign, -1);
        let s = segre_points(&pencil(&[1, 0, 1], &[0, 2, 0])).unwrap();
        assert_eq!(s.jacobian, bf(&[4, 0, -4]));
        assert_eq!(s.disc_sign, 1);
        let s = segre_points(&pencil(&[1, 0, 1], &[1, 0, -1])).unwrap();
        assert_eq!(s.jacobian, bf(&[0, -8, 0]));
        assert_eq!(s.disc_sign, 1);
        assert!(segre_points(&pencil(&[1, 0, 1], &[2, 0, 2])).is_err());
    }

    #[test]
    fn weights() {
        assert_eq!(segre_weight(&pencil(&[0, 2, 0], &[1, 0, -1])).unwrap(), -1);
        assert_eq!(segre_weight(&pencil(&[1, 0, 1], &[0, 2, 0])).unwrap(), 1);
        assert_eq!(segre_weight(&pencil(&[1, 0, 0], &[0, 0, 1])).unwrap(), 1);
        // a shared root u = 0 is a base point
        assert!(matches!(
            segre_weight(&pencil(&[0, 1, 0], &[0, 1, 1])),
            Err(Error::DegenerateOnWall(_))
        ));
    }

    #[test]
    fn cstar_index_and_chords() {
        let c = cstar();
        let r = nodes_exact_n3(&c).unwrap();
        assert_eq!(segre_index(&c, &r).unwrap(), -1);
        let d = chord_diagram(&r).unwrap();
        let mut kinds = d.kinds.clone();
        kinds.sort_by_key(|k| *k as u8);
        assert_eq!(kinds, vec![NodeKind::CrossLike, NodeKind::CrossLike, NodeKind::Solitary]);
        assert_eq!(d.interlaced, 1);
        assert_eq!(d.index, -1);
        assert_eq!(chord_diagram_index_n3(&c, &r).unwrap(), -1);
    }

    #[test]
    fn numeric_route_matches_exact_on_cstar() {
        let c = cstar();
        let cfg = SolverConfig { starts: 60, ..Default::default() };
        let r = secants_numeric(&c, &cfg).unwrap();
        for m in r.real_secants() {
            let p = residual_pencil_numeric(&c, m).unwrap();
            let w = segre_weight_numeric(&p).unwrap();
            let exact = nodes_exact_n3(&c).unwrap();
            let twin = exact
                .secants
                .iter()
                .find(|s| crate::exactalg::fform::norm_c(
                    &s.divisor.coeffs.iter().zip(&m.divisor.coeffs).map(|(a, b)| a - b).collect::<Vec<_>>(),
                ) < 1e-6)
                .unwrap();
            assert_eq!(w, secant_weight(&c, twin).unwrap().weight);
        }
        assert_eq!(segre_index(&c, &r).unwrap(), -1);
    }

    #[test]
    fn perturbed_one_example_is_hyperbolic() {
        // (u^4, u^2 v^2, v^4) plus a small real perturbation
        let c = JetCurve::from_i64(&[&[100, 1, 0, 0, 0], &[0, 0, 100, 1, 0], &[1, 0, 0, 1, 100]]).unwrap();
        let r = nodes_exact_n3(&c).unwrap();
        assert_eq!(segre_index(&c, &r).unwrap(), 1);
        assert_eq!(crate::jet::euler_index(&c).unwrap(), 1);
    }

    #[test]
    fn interlacing() {
        use std::f64::consts::PI;
        assert!(interlace((PI / 2.0, -PI / 2.0), (PI, 0.0)));
        assert!(!interlace((0.1, 0.2), (0.3, 0.4)));
        assert!(!interlace((0.1, 0.4), (0.2, 0.3)));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn quad() -> impl Strategy<Value = [i64; 3]> {
            prop::array::uniform3(-6i64..=6)
        }

        /// Sign of the discriminant of `t ↦ disc(q0 + t q1)`: real branch
        /// parameters give real double roots.
        fn branch_route_sign(q0: &[i64; 3], q1: &[i64; 3]) -> Option<i32> {
            let d = |a: i64, b: i64, c: i64| (a, b, c);
            let (a0, b0, c0) = d(q0[0], q0[1], q0[2]);
            let (a1, b1, c1) = d(q1[0], q1[1], q1[2]);
            // disc(q0 + t q1) = A t^2 + B t + C
            let big_a = b1 * b1 - 4 * a1 * c1;
            let big_b = 2 * b0 * b1 - 4 * (a0 * c1 + a1 * c0);
            let big_c = b0 * b0 - 4 * a0 * c0;
            if big_a == 0 && big_b == 0 {
                return None;
            }
            if big_a == 0 {
                // one finite real root plus t = ∞
                return Some(1);
            }
            let disc = big_b * big_b - 4 * big_a * big_c;
            Some(disc.signum() as i32)
        }

        proptest! {
            #[test]
            fn jacobian_matches_branch_points(q0 in quad(), q1 in quad()) {
                let p = pencil(&q0, &q1);
                if let Ok(s) = segre_points(&p) {
                    if let Some(b) = branch_route_sign(&q0, &q1) {
                        prop_assert_eq!(s.disc_sign, b);
                    }
                }
            }

            #[test]
            fn weight_invariant_under_basis_change(
                q0 in quad(), q1 in quad(), g in prop::array::uniform4(-4i64..=4),
            ) {
                prop_assume!(g[0] * g[3] - g[1] * g[2] != 0);
                let p = pencil(&q0, &q1);
                let Ok(s) = segre_points(&p) else { return Ok(()) };
                let r0 = p.q0.scale(&rat(g[0])).add(&p.q1.scale(&rat(g[1]))).unwrap();
                let r1 = p.q0.scale(&rat(g[2])).add(&p.q1.scale(&rat(g[3]))).unwrap();
                let t = segre_points(&ResidualPencil { q0: r0, q1: r1 }).unwrap();
                prop_assert_eq!(t.jacobian, s.jacobian.scale(&rat(g[0] * g[3] - g[1] * g[2])));
                prop_assert_eq!(t.disc_sign, s.disc_sign);
            }

            #[test]
            fn n2_pencil_weight_is_euler_index(q0 in quad(), q1 in quad()) {
                let Ok(c) = JetCurve::from_i64(&[&q0, &q1]) else { return Ok(()) };
                let Ok(e) = crate::jet::euler_index(&c) else { return Ok(()) };
                prop_assert_eq!(segre_index_n2(&c).unwrap(), e);
            }
        }
    }
}
