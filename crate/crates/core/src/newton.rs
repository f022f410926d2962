//! Solver configuration and damped Newton iteration for square systems, in
//! complex and real arithmetic, with a seeded multistart driver.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Newton starts per round (per chart for line enumeration).
    pub starts: usize,
    /// Escalation rounds; the number of starts doubles each round.
    pub max_rounds: usize,
    pub tol: f64,
    pub dedupe_digits: u32,
    pub seed: u64,
    /// Rounds with an unchanged line set needed to call an enumeration stable.
    pub stability_rounds: usize,
    /// Grassmannian charts to scan; all of them when empty.
    pub charts: Vec<(usize, usize)>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            starts: 500,
            max_rounds: 4,
            tol: 1e-10,
            dedupe_digits: 8,
            seed: 42,
            stability_rounds: 2,
            charts: Vec::new(),
        }
    }
}

impl SolverConfig {
    pub fn dedupe_tol(&self) -> f64 {
        10f64.powi(-(self.dedupe_digits as i32))
    }

    /// Independent random stream for start `index` of round `round`.
    pub fn rng(&self, round: usize, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(((round as u64) << 40) | index as u64);
        rng
    }
}

/// Outcome of one Newton run.
#[derive(Debug, Clone)]
pub struct NewtonOutcome<T> {
    pub x: Vec<T>,
    pub residual: f64,
    pub converged: bool,
    /// Smallest singular value of the Jacobian at the final point, relative
    /// to the largest.
    pub conditioning: f64,
}

const MAX_ITER: usize = 80;
const BLOWUP: f64 = 1e8;
const STALL_WINDOW: usize = 8;

/// Damped Newton for `F(x) = 0`, `F: C^m → C^m`; `system` returns the value
/// and the Jacobian.
pub fn newton_c<F>(system: &F, x0: Vec<Complex64>, tol: f64) -> NewtonOutcome<Complex64>
where
    F: Fn(&[Complex64]) -> (DVector<Complex64>, DMatrix<Complex64>),
{
    let mut x = DVector::from_vec(x0);
    let (mut f, mut jac) = system(x.as_slice());
    let mut nf = f.norm();
    let mut polish = 0;
    for _ in 0..MAX_ITER {
        if !nf.is_finite() || x.norm() > BLOWUP {
            break;
        }
        let Some(step) = jac.clone().lu().solve(&(-&f)) else { break };
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-4 {
            let trial = &x + &step * Complex64::new(lambda, 0.0);
            let (ft, jt) = system(trial.as_slice());
            let nt = ft.norm();
            if nt < nf || (nf < tol && nt <= nf * 4.0) {
                x = trial;
                f = ft;
                jac = jt;
                nf = nt;
                accepted = true;
                break;
            }
            lambda /= 2.0;
        }
        if !accepted {
            break;
        }
        if nf < tol {
            // a couple of extra full steps drive the residual to rounding level
            polish += 1;
            if polish > 2 || step.norm() < 1e-15 * (1.0 + x.norm()) {
                break;
            }
        }
    }
    let conditioning = relative_sigma_min_c(&jac);
    NewtonOutcome { x: x.as_slice().to_vec(), residual: nf, converged: nf < tol && nf.is_finite(), conditioning }
}

/// Real counterpart of [`newton_c`].
pub fn newton_r<F>(system: &F, x0: Vec<f64>, tol: f64) -> NewtonOutcome<f64>
where
    F: Fn(&[f64]) -> (DVector<f64>, DMatrix<f64>),
{
    let mut x = DVector::from_vec(x0);
    let (mut f, mut jac) = system(x.as_slice());
    let mut nf = f.norm();
    let mut polish = 0;
    let mut checkpoint = nf;
    for it in 0..MAX_ITER {
        if !nf.is_finite() || x.norm() > BLOWUP {
            break;
        }
        // a start that is converging gains far more than this every few steps
        if it > 0 && it % STALL_WINDOW == 0 {
            if nf > tol && nf > checkpoint * 0.5 {
                break;
            }
            checkpoint = nf;
        }
        let Some(step) = jac.clone().lu().solve(&(-&f)) else { break };
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-4 {
            let trial = &x + &step * lambda;
            let (ft, jt) = system(trial.as_slice());
            let nt = ft.norm();
            if nt < nf || (nf < tol && nt <= nf * 4.0) {
                x = trial;
                f = ft;
                jac = jt;
                nf = nt;
                accepted = true;
                break;
            }
            lambda /= 2.0;
        }
        if !accepted {
            break;
        }
        if nf < tol {
            polish += 1;
            if polish > 2 || step.norm() < 1e-15 * (1.0 + x.norm()) {
                break;
            }
        }
    }
    let conditioning = relative_sigma_min_r(&jac);
    NewtonOutcome { x: x.as_slice().to_vec(), residual: nf, converged: nf < tol && nf.is_finite(), conditioning }
}

fn relative_sigma_min_c(j: &DMatrix<Complex64>) -> f64 {
    if j.is_empty() {
        return 1.0;
    }
    let s = j.clone().singular_values();
    let max = s.max();
    if max == 0.0 { 0.0 } else { s.min() / max }
}

fn relative_sigma_min_r(j: &DMatrix<f64>) -> f64 {
    if j.is_empty() {
        return 1.0;
    }
    let s = j.clone().singular_values();
    let max = s.max();
    if max == 0.0 { 0.0 } else { s.min() / max }
}

/// Runs `count` complex Newton starts in parallel. Start `i` draws its initial
/// point from `cfg.rng(round, offset + i)`, coordinates uniform in the square
/// `[-r, r] + i[-r, r]`. Converged outcomes are returned in start order.
pub fn multistart_c<F>(
    system: &F,
    dim: usize,
    radius: f64,
    cfg: &SolverConfig,
    round: usize,
    offset: usize,
    count: usize,
) -> Vec<NewtonOutcome<Complex64>>
where
    F: Fn(&[Complex64]) -> (DVector<Complex64>, DMatrix<Complex64>) + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = cfg.rng(round, offset + i);
            let x0 = (0..dim)
                .map(|_| Complex64::new(rng.random_range(-radius..radius), rng.random_range(-radius..radius)))
                .collect();
            newton_c(system, x0, cfg.tol)
        })
        .filter(|o| o.converged)
        .collect()
}

/// Real multistart; see [`multistart_c`].
pub fn multistart_r<F>(
    system: &F,
    dim: usize,
    radius: f64,
    cfg: &SolverConfig,
    round: usize,
    offset: usize,
    count: usize,
) -> Vec<NewtonOutcome<f64>>
where
    F: Fn(&[f64]) -> (DVector<f64>, DMatrix<f64>) + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = cfg.rng(round, offset + i);
            let x0 = (0..dim).map(|_| rng.random_range(-radius..radius)).collect();
            newton_r(system, x0, cfg.tol)
        })
        .filter(|o| o.converged)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle_line(x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        // x^2 + y^2 = 1, x = y
        let f = DVector::from_vec(vec![x[0] * x[0] + x[1] * x[1] - 1.0, x[0] - x[1]]);
        let j = DMatrix::from_row_slice(2, 2, &[2.0 * x[0], 2.0 * x[1], 1.0, -1.0]);
        (f, j)
    }

    #[test]
    fn real_newton_finds_both_points() {
        let cfg = SolverConfig { tol: 1e-12, ..Default::default() };
        let sols = multistart_r(&circle_line, 2, 3.0, &cfg, 0, 0, 64);
        assert!(!sols.is_empty());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(sols.iter().all(|s| (s.x[0].abs() - h).abs() < 1e-12));
        assert!(sols.iter().any(|s| s.x[0] > 0.0) && sols.iter().any(|s| s.x[0] < 0.0));
    }

    #[test]
    fn complex_newton_solves_sum_of_squares() {
        // z^2 + 1 = 0
        let sys = |z: &[Complex64]| {
            (
                DVector::from_vec(vec![z[0] * z[0] + 1.0]),
                DMatrix::from_element(1, 1, z[0] * 2.0),
            )
        };
        let cfg = SolverConfig::default();
        let sols = multistart_c(&sys, 1, 2.0, &cfg, 0, 0, 16);
        assert!(sols.iter().all(|s| (s.x[0].im.abs() - 1.0).abs() < 1e-12 && s.x[0].re.abs() < 1e-12));
    }

    #[test]
    fn multistart_is_reproducible() {
        let cfg = SolverConfig { seed: 7, ..Default::default() };
        let a: Vec<_> = multistart_r(&circle_line, 2, 3.0, &cfg, 1, 0, 32).into_iter().map(|o| o.x).collect();
        let b: Vec<_> = multistart_r(&circle_line, 2, 3.0, &cfg, 1, 0, 32).into_iter().map(|o| o.x).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn config_json_defaults() {
        let cfg: SolverConfig = serde_json::from_str(r#"{"starts": 10}"#).unwrap();
        assert_eq!(cfg.starts, 10);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.dedupe_digits, 8);
    }
}
