//! Real lines on a real hypersurface of degree `2n - 1` in `P^{n+1}`: chart
//! parameterization, multistart enumeration, and the signed count.

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactalg::rational::{self, dyadic_round, rat, rationalize, serde_rational, Rational};
use crate::exactalg::BinaryForm;
use crate::generators::{index_triple, IndexTriple};
use crate::jet::{det_ac, euler_index, Hypersurface, JetCurve, Term};
use crate::newton::{multistart_r, newton_r, SolverConfig};

/// A line spanned by the rows of a `2 × (n+2)` matrix in row-reduced form:
/// the identity in the pivot columns, free parameters elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealLine {
    /// Pivot columns, 1-based.
    pub chart: [usize; 2],
    /// Non-pivot block, `2 × n`.
    pub params: Vec<Vec<f64>>,
    /// The same block as exact rationals, when the line is rational.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_matrix")]
    pub exact: Option<Vec<Vec<Rational>>>,
    /// Unit Plücker vector, sign fixed by its first clearly nonzero entry,
    /// rounded.
    pub plucker_key: Vec<f64>,
    /// Largest coefficient of the restricted form, relative to the largest
    /// coefficient of the hypersurface.
    pub residual: f64,
}

mod opt_matrix {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Row(#[serde(with = "serde_rational::vec")] Vec<Rational>);

    pub fn serialize<S: Serializer>(v: &Option<Vec<Vec<Rational>>>, s: S) -> std::result::Result<S::Ok, S::Error> {
        v.as_ref().map(|m| m.iter().map(|r| Row(r.clone())).collect::<Vec<_>>()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<Vec<Rational>>>, D::Error> {
        Ok(Option::<Vec<Row>>::deserialize(d)?.map(|m| m.into_iter().map(|r| r.0).collect()))
    }
}

fn non_pivots(num_vars: usize, chart: [usize; 2]) -> Vec<usize> {
    (0..num_vars).filter(|&c| c != chart[0] && c != chart[1]).collect()
}

/// Spanning rows from a 0-based chart and the non-pivot block.
fn rows_from<T: Clone + Zero + One>(num_vars: usize, chart: [usize; 2], block: &[Vec<T>]) -> [Vec<T>; 2] {
    let mut r = [vec![T::zero(); num_vars], vec![T::zero(); num_vars]];
    r[0][chart[0]] = T::one();
    r[1][chart[1]] = T::one();
    for (k, c) in non_pivots(num_vars, chart).into_iter().enumerate() {
        r[0][c] = block[0][k].clone();
        r[1][c] = block[1][k].clone();
    }
    r
}

impl RealLine {
    fn chart0(&self) -> [usize; 2] {
        [self.chart[0] - 1, self.chart[1] - 1]
    }

    /// Spanning rows in floating point.
    pub fn rows(&self) -> [Vec<f64>; 2] {
        rows_from(self.plucker_key_len_vars(), self.chart0(), &self.params)
    }

    pub fn exact_rows(&self) -> Option<[Vec<Rational>; 2]> {
        self.exact.as_ref().map(|b| rows_from(self.plucker_key_len_vars(), self.chart0(), b))
    }

    fn plucker_key_len_vars(&self) -> usize {
        self.params.first().map_or(0, Vec::len) + 2
    }

    /// A line from exact rational spanning rows (any two independent rows).
    pub fn from_exact_rows(rows: [Vec<Rational>; 2]) -> Result<RealLine> {
        let f: [Vec<f64>; 2] = [
            rows[0].iter().map(rational::to_f64).collect(),
            rows[1].iter().map(rational::to_f64).collect(),
        ];
        let chart = best_chart(&f).ok_or_else(|| Error::InvalidInput("the rows do not span a line".into()))?;
        let reduced = reduce_exact(&rows, chart).ok_or_else(|| Error::InvalidInput("the rows do not span a line".into()))?;
        let params: Vec<Vec<f64>> = reduced.iter().map(|r| r.iter().map(rational::to_f64).collect()).collect();
        Ok(RealLine {
            chart: [chart[0] + 1, chart[1] + 1],
            plucker_key: plucker_key(&rows_from(f[0].len(), chart, &params), 12),
            params,
            exact: Some(reduced),
            residual: 0.0,
        })
    }
}

fn plucker(rows: &[Vec<f64>; 2]) -> Vec<f64> {
    let m = rows[0].len();
    let mut out = Vec::with_capacity(m * (m - 1) / 2);
    for i in 0..m {
        for j in i + 1..m {
            out.push(rows[0][i] * rows[1][j] - rows[0][j] * rows[1][i]);
        }
    }
    out
}

fn normalized_plucker(rows: &[Vec<f64>; 2]) -> Vec<f64> {
    let p = plucker(rows);
    let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
    // first entry that is clearly nonzero decides the sign
    let lead = p.iter().copied().find(|x| x.abs() > 1e-3 * norm).unwrap_or(1.0);
    let s = if lead < 0.0 { -norm } else { norm };
    p.iter().map(|x| x / s).collect()
}

fn plucker_key(rows: &[Vec<f64>; 2], digits: u32) -> Vec<f64> {
    let scale = 10f64.powi(digits as i32);
    normalized_plucker(rows).iter().map(|x| (x * scale).round() / scale + 0.0).collect()
}

/// Chart with the largest pivot minor, so that all parameters are at most 1
/// in absolute value.
fn best_chart(rows: &[Vec<f64>; 2]) -> Option<[usize; 2]> {
    let m = rows[0].len();
    let mut best = None;
    let mut big = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            let d = (rows[0][i] * rows[1][j] - rows[0][j] * rows[1][i]).abs();
            if d > big {
                big = d;
                best = Some([i, j]);
            }
        }
    }
    best
}

fn reduce_f64(rows: &[Vec<f64>; 2], chart: [usize; 2]) -> Vec<Vec<f64>> {
    let (a, b, c, d) = (rows[0][chart[0]], rows[0][chart[1]], rows[1][chart[0]], rows[1][chart[1]]);
    let det = a * d - b * c;
    let np = non_pivots(rows[0].len(), chart);
    // inverse of [[a, b], [c, d]] applied from the left
    let r0: Vec<f64> = np.iter().map(|&k| (d * rows[0][k] - b * rows[1][k]) / det).collect();
    let r1: Vec<f64> = np.iter().map(|&k| (-c * rows[0][k] + a * rows[1][k]) / det).collect();
    vec![r0, r1]
}

fn reduce_exact(rows: &[Vec<Rational>; 2], chart: [usize; 2]) -> Option<Vec<Vec<Rational>>> {
    let (a, b, c, d) = (&rows[0][chart[0]], &rows[0][chart[1]], &rows[1][chart[0]], &rows[1][chart[1]]);
    let det = a * d - b * c;
    if det.is_zero() {
        return None;
    }
    let np = non_pivots(rows[0].len(), chart);
    let r0 = np.iter().map(|&k| (d * &rows[0][k] - b * &rows[1][k]) / &det).collect();
    let r1 = np.iter().map(|&k| (-c * &rows[0][k] + a * &rows[1][k]) / &det).collect();
    Some(vec![r0, r1])
}

/// `F(u·r_1 + v·r_2)` as a binary form of degree `2n - 1`.
pub fn restrict_to_line(x: &Hypersurface, rows: &[Vec<Rational>; 2]) -> Result<BinaryForm> {
    if rows[0].len() != x.num_vars() || rows[1].len() != x.num_vars() {
        return Err(Error::InvalidInput(format!("line rows need {} coordinates", x.num_vars())));
    }
    let lin: Vec<BinaryForm> =
        (0..x.num_vars()).map(|c| BinaryForm::new(vec![rows[0][c].clone(), rows[1][c].clone()])).collect::<Result<_>>()?;
    restrict_terms(x.terms(), &lin, x.degree())
}

fn restrict_terms(terms: &[Term], lin: &[BinaryForm], degree: usize) -> Result<BinaryForm> {
    let mut out = BinaryForm::zero(degree);
    for t in terms {
        let f = t.exps.iter().zip(lin).fold(BinaryForm::monomial(t.c.clone(), 0, 0), |acc, (&e, l)| acc.mul(&l.pow(e as usize)));
        out = out.add(&f)?;
    }
    Ok(out)
}

/// Floating-point terms with their partial derivatives.
struct NumericSurface {
    num_vars: usize,
    degree: usize,
    terms: Vec<(Vec<u32>, f64)>,
    partials: Vec<Vec<(Vec<u32>, f64)>>,
}

impl NumericSurface {
    fn new(x: &Hypersurface) -> Self {
        let raw = x.to_f64_terms();
        let big = raw.iter().fold(0.0f64, |a, t| a.max(t.1.abs())).max(f64::MIN_POSITIVE);
        let terms: Vec<(Vec<u32>, f64)> = raw.into_iter().map(|(e, c)| (e, c / big)).collect();
        let partials = (0..x.num_vars())
            .map(|k| {
                terms
                    .iter()
                    .filter(|(e, _)| e[k] > 0)
                    .map(|(e, c)| {
                        let mut e2 = e.clone();
                        e2[k] -= 1;
                        (e2, c * e[k] as f64)
                    })
                    .collect()
            })
            .collect();
        NumericSurface { num_vars: x.num_vars(), degree: x.degree(), terms, partials }
    }

    /// Coefficients of `Σ c x^e` restricted to the line with linear forms
    /// `x_k = α_k u + β_k v`.
    fn restrict(terms: &[(Vec<u32>, f64)], lin: &[(f64, f64)], degree: usize) -> Vec<f64> {
        let mut out = vec![0.0; degree + 1];
        let mut buf = vec![0.0; degree + 1];
        for (e, c) in terms {
            buf.iter_mut().for_each(|b| *b = 0.0);
            buf[0] = *c;
            let mut d = 0;
            for (k, &ek) in e.iter().enumerate() {
                let (a, b) = lin[k];
                for _ in 0..ek {
                    for i in (0..=d + 1).rev() {
                        let hi = if i <= d { buf[i] * a } else { 0.0 };
                        let lo = if i > 0 { buf[i - 1] * b } else { 0.0 };
                        buf[i] = hi + lo;
                    }
                    d += 1;
                }
            }
            for (o, b) in out.iter_mut().zip(&buf) {
                *o += b;
            }
        }
        out
    }

    fn linear_forms(&self, chart: [usize; 2], z: &[f64]) -> Vec<(f64, f64)> {
        let n = self.num_vars - 2;
        let mut lin = vec![(0.0, 0.0); self.num_vars];
        lin[chart[0]] = (1.0, 0.0);
        lin[chart[1]] = (0.0, 1.0);
        for (k, c) in non_pivots(self.num_vars, chart).into_iter().enumerate() {
            lin[c] = (z[k], z[n + k]);
        }
        lin
    }

    /// Residual and Jacobian in the chart unknowns `(a_1..a_n, b_1..b_n)`.
    fn system(&self, chart: [usize; 2], z: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.num_vars - 2;
        let lin = self.linear_forms(chart, z);
        let f = Self::restrict(&self.terms, &lin, self.degree);
        let mut jac = DMatrix::zeros(2 * n, 2 * n);
        for (k, c) in non_pivots(self.num_vars, chart).into_iter().enumerate() {
            let g = Self::restrict(&self.partials[c], &lin, self.degree - 1);
            for (i, gi) in g.iter().enumerate() {
                jac[(i, k)] = *gi; // u · g
                jac[(i + 1, n + k)] = *gi; // v · g
            }
        }
        (DVector::from_vec(f), jac)
    }

    /// The jet along a line in floating point: the partials in the non-pivot
    /// directions restricted to the line.
    fn jet(&self, chart: [usize; 2], z: &[f64]) -> Vec<Vec<f64>> {
        let lin = self.linear_forms(chart, z);
        non_pivots(self.num_vars, chart)
            .into_iter()
            .map(|c| Self::restrict(&self.partials[c], &lin, self.degree - 1))
            .collect()
    }
}

/// Outcome of [`find_real_lines`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSearch {
    pub lines: Vec<RealLine>,
    /// The line set was unchanged over the last `stability_rounds` rounds.
    pub stable: bool,
    /// Number of lines after each round.
    pub counts: Vec<usize>,
    pub starts_used: usize,
    /// Lines at which the system is singular (the Fano scheme is not
    /// reduced there, or the hypersurface is not generic).
    pub singular: usize,
}

const PARAM_BOUND: f64 = 1.5;
const KEY_TOL: f64 = 1e-6;
const SINGULAR: f64 = 1e-9;
const RATIONAL_DEN: u64 = 10_000;
const RATIONAL_TOL: f64 = 1e-10;

struct Found {
    line: RealLine,
    normalized: Vec<f64>,
    conditioning: f64,
}

fn charts_for(num_vars: usize, cfg: &SolverConfig) -> Result<Vec<[usize; 2]>> {
    if cfg.charts.is_empty() {
        let mut out = Vec::new();
        for i in 0..num_vars {
            for j in i + 1..num_vars {
                out.push([i, j]);
            }
        }
        return Ok(out);
    }
    cfg.charts
        .iter()
        .map(|&(i, j)| {
            if i == 0 || j == 0 || i > num_vars || j > num_vars || i == j {
                Err(Error::InvalidInput(format!("chart ({i}, {j}) is not a pair of distinct columns in 1..={num_vars}")))
            } else {
                Ok([i.min(j) - 1, i.max(j) - 1])
            }
        })
        .collect()
}

/// Re-expresses a solution in its best chart, polishes it there and tries
/// to make it exact.
fn canonical_line(x: &Hypersurface, surf: &NumericSurface, chart: [usize; 2], z: &[f64], cfg: &SolverConfig) -> Option<Found> {
    let n = surf.num_vars - 2;
    let block = vec![z[..n].to_vec(), z[n..].to_vec()];
    let rows = rows_from(surf.num_vars, chart, &block);
    let best = best_chart(&rows)?;
    let reduced = reduce_f64(&rows, best);
    let z0: Vec<f64> = reduced.concat();
    let sys = |w: &[f64]| surf.system(best, w);
    let out = newton_r(&sys, z0, cfg.tol);
    if !out.converged || out.x.iter().any(|v| v.abs() > 1.0 + 1e-6) {
        return None;
    }
    let mut params = vec![out.x[..n].to_vec(), out.x[n..].to_vec()];
    let exact = params
        .iter()
        .map(|r| r.iter().map(|&v| rationalize(v, RATIONAL_DEN, RATIONAL_TOL)).collect::<Option<Vec<_>>>())
        .collect::<Option<Vec<_>>>()
        .filter(|b| {
            let er = rows_from(surf.num_vars, best, b);
            restrict_to_line(x, &er).map(|f| f.is_zero()).unwrap_or(false)
        });
    let residual = if let Some(b) = &exact {
        params = b.iter().map(|r| r.iter().map(rational::to_f64).collect()).collect();
        0.0
    } else {
        out.residual
    };
    let frows = rows_from(surf.num_vars, best, &params);
    Some(Found {
        normalized: normalized_plucker(&frows),
        line: RealLine {
            chart: [best[0] + 1, best[1] + 1],
            plucker_key: plucker_key(&frows, cfg.dedupe_digits),
            params,
            exact,
            residual,
        },
        conditioning: out.conditioning,
    })
}

/// Distance between unit Plücker vectors up to sign.
fn key_distance(a: &[f64], b: &[f64]) -> f64 {
    let plus = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let minus = a.iter().zip(b).map(|(x, y)| (x + y).abs()).fold(0.0, f64::max);
    plus.min(minus)
}

/// Real lines by multistart Newton over the chart atlas, escalating the
/// number of starts until the line set is stable or the budget is spent.
pub fn find_real_lines(x: &Hypersurface, cfg: &SolverConfig) -> Result<LineSearch> {
    let surf = NumericSurface::new(x);
    let charts = charts_for(x.num_vars(), cfg)?;
    let dim = 2 * x.n();
    let mut found: Vec<Found> = Vec::new();
    let mut counts = Vec::new();
    let mut starts_used = 0;
    let mut stable = false;
    let tol = KEY_TOL.max(cfg.dedupe_tol());
    for round in 0..cfg.max_rounds.max(1) {
        let count = cfg.starts << round;
        for (ci, &chart) in charts.iter().enumerate() {
            let sys = |z: &[f64]| surf.system(chart, z);
            let sols = multistart_r(&sys, dim, PARAM_BOUND, cfg, round, ci << 32, count);
            starts_used += count;
            for s in sols {
                if s.x.iter().any(|v| v.abs() > 1e3) {
                    continue;
                }
                let raw = normalized_plucker(&rows_from(surf.num_vars, chart, &[s.x[..dim / 2].to_vec(), s.x[dim / 2..].to_vec()]));
                if found.iter().any(|g| key_distance(&g.normalized, &raw) < tol) {
                    continue;
                }
                let Some(f) = canonical_line(x, &surf, chart, &s.x, cfg) else { continue };
                if !found.iter().any(|g| key_distance(&g.normalized, &f.normalized) < tol) {
                    found.push(f);
                }
            }
        }
        counts.push(found.len());
        let s = cfg.stability_rounds;
        if counts.len() > s && counts[counts.len() - 1 - s..].iter().all(|&c| c == found.len()) {
            stable = true;
            break;
        }
    }
    found.sort_by(|a, b| a.line.plucker_key.partial_cmp(&b.line.plucker_key).unwrap_or(std::cmp::Ordering::Equal));
    let singular = found.iter().filter(|f| f.conditioning < SINGULAR).count();
    Ok(LineSearch { lines: found.into_iter().map(|f| f.line).collect(), stable, counts, starts_used, singular })
}

/// [`find_real_lines`], failing unless the enumeration is stable and every
/// line is a regular solution.
pub fn find_real_lines_certified(x: &Hypersurface, cfg: &SolverConfig) -> Result<LineSearch> {
    let s = find_real_lines(x, cfg)?;
    if !s.stable {
        return Err(Error::IncompleteEnumeration(format!(
            "line counts {:?} did not stabilize within {} rounds",
            s.counts, cfg.max_rounds
        )));
    }
    if s.singular > 0 {
        return Err(Error::IncompleteEnumeration(format!("{} lines are singular solutions", s.singular)));
    }
    Ok(s)
}

const JET_BITS: u32 = 40;
/// Minimum of `|det A| / Π ‖column‖` for the sign of a rounded jet to count.
const JET_MARGIN: f64 = 1e-7;

/// The jet curve of `X` along the line, in coordinates where the line is
/// standard. Exact for rational lines; otherwise the floating-point jet is
/// rounded to `2^-40` and accepted only when `det A_C` is far from zero.
pub fn line_jet(x: &Hypersurface, line: &RealLine) -> Result<JetCurve> {
    let chart = line.chart0();
    if let Some(rows) = line.exact_rows() {
        // partials in the non-pivot directions, restricted exactly
        let lin: Vec<BinaryForm> = (0..x.num_vars())
            .map(|c| BinaryForm::new(vec![rows[0][c].clone(), rows[1][c].clone()]))
            .collect::<Result<_>>()?;
        let p = non_pivots(x.num_vars(), chart)
            .into_iter()
            .map(|c| {
                let partial: Vec<Term> = x
                    .terms()
                    .iter()
                    .filter(|t| t.exps[c] > 0)
                    .map(|t| {
                        let mut e = t.exps.clone();
                        e[c] -= 1;
                        Term { exps: e, c: &t.c * rat(i64::from(t.exps[c])) }
                    })
                    .collect();
                restrict_terms(&partial, &lin, x.degree() - 1)
            })
            .collect::<Result<Vec<_>>>()?;
        return JetCurve::new(p);
    }
    let surf = NumericSurface::new(x);
    let z: Vec<f64> = line.params.concat();
    let jet = surf.jet(chart, &z);
    let big = jet.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let p = jet
        .iter()
        .map(|f| BinaryForm::new(f.iter().map(|v| dyadic_round(v / big, JET_BITS)).collect()))
        .collect::<Result<Vec<_>>>()?;
    let c = JetCurve::new(p)?;
    let a = crate::jet::build_ac(&c).to_f64();
    let colnorm: f64 = a.column_iter().map(|col| col.norm()).product();
    let rel = rational::to_f64(&det_ac(&c)).abs() / colnorm.max(f64::MIN_POSITIVE);
    if rel < JET_MARGIN {
        return Err(Error::NumericFailure(format!("det A_C of a numeric line is too close to zero ({rel:e})")));
    }
    Ok(c)
}

/// Per-line data for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineIndex {
    pub line: RealLine,
    pub jet: JetCurve,
    #[serde(with = "serde_rational")]
    pub det: Rational,
    pub indices: IndexTriple,
    pub species: String,
}

pub fn line_index(x: &Hypersurface, line: &RealLine, cfg: &SolverConfig) -> Result<LineIndex> {
    let jet = line_jet(x, line)?;
    let det = det_ac(&jet);
    if det.is_zero() {
        return Err(Error::Degenerate);
    }
    let indices = index_triple(&jet, cfg)?;
    Ok(LineIndex {
        line: line.clone(),
        det,
        species: crate::segre::species(indices.euler).to_string(),
        jet,
        indices,
    })
}

/// `Σ euler_index` over the given lines.
pub fn signed_count(x: &Hypersurface, lines: &[RealLine]) -> Result<i64> {
    let mut sum = 0i64;
    for l in lines {
        let jet = line_jet(x, l)?;
        sum += i64::from(euler_index(&jet)?);
    }
    Ok(sum)
}

// ---------------------------------------------------------------------------
// hypersurfaces

fn term(exps: Vec<u32>, c: Rational) -> Term {
    Term { exps, c }
}

/// `Σ x_i^{2n-1}` over all `n + 2` coordinates.
pub fn fermat(n: usize) -> Result<Hypersurface> {
    let m = n + 2;
    let d = (2 * n - 1) as u32;
    Hypersurface::new(
        n,
        (0..m)
            .map(|i| {
                let mut e = vec![0; m];
                e[i] = d;
                term(e, rat(1))
            })
            .collect(),
    )
}

/// All exponent vectors of length `m` and total degree `d`.
pub fn monomials(m: usize, d: u32) -> Vec<Vec<u32>> {
    if m == 1 {
        return vec![vec![d]];
    }
    let mut out = Vec::new();
    for e in (0..=d).rev() {
        for mut rest in monomials(m - 1, d - e) {
            rest.insert(0, e);
            out.push(rest);
        }
    }
    out
}

fn multinomial(e: &[u32]) -> i64 {
    let total: u32 = e.iter().sum();
    let fact = |k: u32| (1..=i64::from(k)).product::<i64>();
    e.iter().fold(fact(total), |acc, &k| acc / fact(k))
}

/// The Clebsch diagonal cubic `Σ_{i=0}^{3} x_i^3 - (x_0 + x_1 + x_2 + x_3)^3`.
pub fn clebsch_cubic() -> Result<Hypersurface> {
    let mut terms: Vec<Term> = monomials(4, 3).into_iter().map(|e| {
        let c = rat(-multinomial(&e));
        term(e, c)
    }).collect();
    for i in 0..4 {
        let mut e = vec![0; 4];
        e[i] = 3;
        terms.push(term(e, rat(1)));
    }
    Hypersurface::new(2, terms)
}

/// Random hypersurface with integer coefficients in `[-h, h]` on every
/// monomial.
pub fn random_hypersurface(n: usize, h: i64, seed: u64) -> Result<Hypersurface> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms = monomials(n + 2, (2 * n - 1) as u32)
        .into_iter()
        .map(|e| term(e, rat(rng.random_range(-h..=h))))
        .collect();
    Hypersurface::new(n, terms)
}
