//! Welschinger weight of a balanced jet curve: the frame loop induced by the
//! degree-2 syzygy sections and its class in `π_1(SO_n)`, for `n ∈ {2, 3}`.

use nalgebra::{Matrix3, Rotation3, UnitQuaternion};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exactalg::rational::rat;
use crate::exactalg::{kernel_exact, BinaryForm, RatMatrix};
use crate::jet::JetCurve;

/// A basis of `{q ∈ (quadratic forms)^n : Σ p_j q_j = 0}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplittingSections {
    pub sections: Vec<Vec<BinaryForm>>,
}

impl SplittingSections {
    /// `v_i(θ) = q^{(i)}(cos θ, sin θ)`.
    pub fn eval(&self, theta: f64) -> Vec<Vec<f64>> {
        let (u, v) = (theta.cos(), theta.sin());
        self.sections
            .iter()
            .map(|q| q.iter().map(|f| f.eval_f64(u, v)).collect())
            .collect()
    }

    /// The sections recombined by a square rational matrix (row `i` gives
    /// the coefficients of the `i`-th new section).
    pub fn recombine(&self, m: &RatMatrix) -> Result<SplittingSections> {
        if m.rows() != self.sections.len() || m.cols() != self.sections.len() {
            return Err(Error::InvalidInput("recombination matrix has the wrong size".into()));
        }
        let n = self.sections.first().map_or(0, Vec::len);
        let sections = (0..m.rows())
            .map(|i| {
                (0..n)
                    .map(|j| {
                        self.sections.iter().zip(m.row(i)).fold(BinaryForm::zero(2), |acc, (s, c)| {
                            acc.add(&s[j].scale(c)).expect("quadratics")
                        })
                    })
                    .collect()
            })
            .collect();
        Ok(SplittingSections { sections })
    }
}

/// The sampled frame loop over `θ ∈ [0, π]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameLoop {
    pub thetas: Vec<f64>,
    /// Row-major `n × n` rotation matrices, columns = frame vectors.
    pub frames: Vec<Vec<f64>>,
    /// Largest rotation angle between consecutive samples.
    pub max_step_angle: f64,
    /// Lifted endpoint (quaternion `w, x, y, z`), `n = 3`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub endpoint_quaternion: Option<[f64; 4]>,
    /// Winding number of the frame, `n = 2`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub winding: Option<i64>,
    pub weight: i32,
}

/// Exact kernel of `q ↦ Σ p_j q_j` on `n`-tuples of forms of degree `k`.
fn syzygies_of_degree(c: &JetCurve, k: usize) -> Vec<Vec<crate::exactalg::Rational>> {
    let n = c.n();
    let d = c.degree();
    let mut m = RatMatrix::zeros(d + k + 1, (k + 1) * n);
    for (j, p) in c.p().iter().enumerate() {
        for i in 0..=k {
            for (e, coef) in p.coeffs().iter().enumerate() {
                let v = m.get(e + i, (k + 1) * j + i) + coef;
                m.set(e + i, (k + 1) * j + i, v);
            }
        }
    }
    kernel_exact(&m)
}

/// Basis of the quadratic syzygies. The normal bundle is balanced exactly
/// when there is no linear syzygy, and then this space has dimension `n - 1`.
pub fn splitting_sections(c: &JetCurve) -> Result<SplittingSections> {
    let n = c.n();
    let linear = syzygies_of_degree(c, 1).len();
    let ker = syzygies_of_degree(c, 2);
    if linear > 0 || ker.len() != n - 1 {
        return Err(Error::NotBalanced { found: ker.len() + linear, expected: n - 1 });
    }
    let sections = ker
        .into_iter()
        .map(|w| {
            w.chunks(3)
                .map(|c| BinaryForm::new(c.to_vec()).expect("three coefficients"))
                .collect()
        })
        .collect();
    Ok(SplittingSections { sections })
}

/// `Σ p_j q_j`, which vanishes for every splitting section.
pub fn section_residual(c: &JetCurve, q: &[BinaryForm]) -> BinaryForm {
    c.p().iter()
        .zip(q)
        .fold(BinaryForm::zero(c.degree() + 2), |acc, (p, qj)| acc.add(&p.mul(qj)).expect("equal degrees"))
}

const DEGENERACY: f64 = 1e-10;
const MAX_SAMPLES: usize = 1 << 16;

/// Rotation completing the sections at `θ` to an oriented orthonormal frame.
fn frame_at(s: &SplittingSections, theta: f64) -> Result<Vec<f64>> {
    let vs = s.eval(theta);
    let n = vs[0].len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    let scale = vs.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs())).max(f64::MIN_POSITIVE);
    for v in &vs {
        let mut w: Vec<f64> = v.iter().map(|x| x / scale).collect();
        for b in &basis {
            let d: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= d * bi;
            }
        }
        let nw = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nw < DEGENERACY {
            return Err(Error::NumericFailure(format!("sections are dependent at θ = {theta}")));
        }
        basis.push(w.iter().map(|x| x / nw).collect());
    }
    let last = match n {
        2 => vec![-basis[0][1], basis[0][0]],
        3 => {
            let (a, b) = (&basis[0], &basis[1]);
            vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
        }
        _ => return Err(Error::Unsupported(format!("frame loops for n = {n}"))),
    };
    basis.push(last);
    // row-major matrix whose columns are the frame vectors
    Ok((0..n).flat_map(|r| basis.iter().map(move |b| b[r])).collect())
}

fn rotation_angle(a: &[f64], b: &[f64], n: usize) -> f64 {
    // angle of aᵀ b
    let tr: f64 = (0..n).map(|i| (0..n).map(|k| a[k * n + i] * b[k * n + i]).sum::<f64>()).sum();
    match n {
        2 => (tr / 2.0).clamp(-1.0, 1.0).acos(),
        _ => ((tr - 1.0) / 2.0).clamp(-1.0, 1.0).acos(),
    }
}

/// Samples the frame loop, bisecting until consecutive frames differ by less
/// than `π/2`.
pub fn frame_loop_samples(s: &SplittingSections, initial: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>, f64)> {
    let n = s.sections[0].len();
    let mut thetas: Vec<f64> = (0..=initial).map(|i| PI * i as f64 / initial as f64).collect();
    let mut frames: Vec<Vec<f64>> = thetas.iter().map(|&t| frame_at(s, t)).collect::<Result<_>>()?;
    loop {
        let mut out_t = vec![thetas[0]];
        let mut out_f = vec![frames[0].clone()];
        let mut refined = false;
        for i in 1..thetas.len() {
            if rotation_angle(&frames[i - 1], &frames[i], n) >= PI / 2.0 {
                let mid = 0.5 * (thetas[i - 1] + thetas[i]);
                out_t.push(mid);
                out_f.push(frame_at(s, mid)?);
                refined = true;
            }
            out_t.push(thetas[i]);
            out_f.push(frames[i].clone());
        }
        thetas = out_t;
        frames = out_f;
        if !refined {
            break;
        }
        if thetas.len() > MAX_SAMPLES {
            return Err(Error::NumericFailure("frame loop does not resolve below π/2 steps".into()));
        }
    }
    let max_step = (1..thetas.len())
        .map(|i| rotation_angle(&frames[i - 1], &frames[i], n))
        .fold(0.0, f64::max);
    Ok((thetas, frames, max_step))
}

/// Frame loop and weight for given sections, starting from `initial` steps.
pub fn frame_loop(s: &SplittingSections, initial: usize) -> Result<FrameLoop> {
    let n = s.sections.first().map_or(0, Vec::len);
    if !(2..=3).contains(&n) {
        return Err(Error::Unsupported(format!("Welschinger weight for n = {n}")));
    }
    let (thetas, frames, max_step_angle) = frame_loop_samples(s, initial.max(2))?;
    if n == 2 {
        // unwrap the angle of the first frame vector
        let mut total = 0.0;
        for w in frames.windows(2) {
            let a0 = w[0][2].atan2(w[0][0]);
            let a1 = w[1][2].atan2(w[1][0]);
            let mut d = a1 - a0;
            while d > PI {
                d -= 2.0 * PI;
            }
            while d < -PI {
                d += 2.0 * PI;
            }
            total += d;
        }
        let winding = (total / (2.0 * PI)).round() as i64;
        let weight = if winding % 2 == 0 { 1 } else { -1 };
        return Ok(FrameLoop { thetas, frames, max_step_angle, endpoint_quaternion: None, winding: Some(winding), weight });
    }
    let quat = |f: &[f64]| {
        let m = Matrix3::from_row_slice(f);
        UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(m))
    };
    let q0 = quat(&frames[0]);
    let mut q = q0;
    for f in &frames[1..] {
        let mut next = quat(f);
        if next.coords.dot(&q.coords) < 0.0 {
            next = UnitQuaternion::new_unchecked(-next.into_inner());
        }
        q = next;
    }
    let closes = q.coords.dot(&q0.coords);
    if closes.abs() < 0.5 {
        return Err(Error::NumericFailure("frame loop does not close".into()));
    }
    let weight = if closes > 0.0 { 1 } else { -1 };
    let c = q.into_inner();
    Ok(FrameLoop {
        thetas,
        frames,
        max_step_angle,
        endpoint_quaternion: Some([c.w, c.i, c.j, c.k]),
        winding: None,
        weight,
    })
}

/// `W = (-1)^{[s̃]}` for `n ∈ {2, 3}`.
pub fn welschinger_weight(c: &JetCurve) -> Result<i32> {
    Ok(welschinger_loop(c)?.weight)
}

pub fn welschinger_loop(c: &JetCurve) -> Result<FrameLoop> {
    if c.n() > 3 {
        return Err(Error::Unsupported(format!("Welschinger weight for n = {}", c.n())));
    }
    let s = splitting_sections(c)?;
    frame_loop(&s, 64)
}

/// Identity matrix as a recombination, for callers building their own.
pub fn identity_recombination(k: usize) -> RatMatrix {
    let mut m = RatMatrix::zeros(k, k);
    for i in 0..k {
        m.set(i, i, rat(1));
    }
    m
}

/// True when every section satisfies `Σ p_j q_j = 0` exactly.
pub fn sections_are_syzygies(c: &JetCurve, s: &SplittingSections) -> bool {
    s.sections.iter().all(|q| section_residual(c, q).is_zero())
}
