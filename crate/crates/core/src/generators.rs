//! Jet curves with known indices: the monomial family, curves cut on a conic
//! by plane curves through a base set (the blow-up construction), and
//! straight-line paths across the discriminant.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactalg::rational::{format_rational, rat, serde_rational, sign};
use crate::exactalg::unipoly::{count_roots_in, isolate_roots};
use crate::exactalg::{det_exact, kernel_exact, BinaryForm, RatMatrix, Rational, UniPoly};
use crate::jet::{det_ac, euler_index, JetCurve};
use crate::newton::SolverConfig;
use crate::segre::segre_index_auto;
use crate::welsch::welschinger_weight;

/// `p_k = u^{2n-2k} v^{2k-2}`, with `det A_C = 1`.
pub fn one_example(n: usize) -> Result<JetCurve> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("n must be at least 2, got {n}")));
    }
    let d = 2 * n - 2;
    JetCurve::new((0..n).map(|k| BinaryForm::monomial(Rational::one(), d - 2 * k, 2 * k)).collect())
}

/// A point of the base set: rational, or a pair of complex-conjugate points
/// `re ± i·im`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasePoint {
    Real(#[serde(with = "serde_rational::vec")] Vec<Rational>),
    ConjugatePair {
        #[serde(with = "serde_rational::vec")]
        re: Vec<Rational>,
        #[serde(with = "serde_rational::vec")]
        im: Vec<Rational>,
    },
}

impl BasePoint {
    pub fn real(x: [i64; 3]) -> Self {
        BasePoint::Real(x.iter().map(|&c| rat(c)).collect())
    }

    pub fn pair(re: [i64; 3], im: [i64; 3]) -> Self {
        BasePoint::ConjugatePair {
            re: re.iter().map(|&c| rat(c)).collect(),
            im: im.iter().map(|&c| rat(c)).collect(),
        }
    }

    /// Number of points of `P^2` this entry stands for.
    pub fn count(&self) -> usize {
        match self {
            BasePoint::Real(_) => 1,
            BasePoint::ConjugatePair { .. } => 2,
        }
    }
}

/// Base set `B` of `C(n, 2)` points and a real conic `Q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaneConfig {
    pub points: Vec<BasePoint>,
    /// Symmetric `3 × 3` matrix of the conic.
    pub conic: RatMatrix,
    /// A rational point of `Q`, searched for when absent.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_point")]
    pub conic_point: Option<Vec<Rational>>,
    /// Explicit quadratic parameterization of `Q`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameterization: Option<Vec<BinaryForm>>,
}

mod opt_point {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct P(#[serde(with = "serde_rational::vec")] Vec<Rational>);

    pub fn serialize<S: Serializer>(v: &Option<Vec<Rational>>, s: S) -> std::result::Result<S::Ok, S::Error> {
        v.clone().map(P).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<Rational>>, D::Error> {
        Ok(Option::<P>::deserialize(d)?.map(|p| p.0))
    }
}

/// Output of [`cremona_generate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generated {
    pub curve: JetCurve,
    /// `(-1)^{int(B, Q)}`
    pub ground_truth: i32,
    /// Real base points strictly inside the conic.
    pub inside: usize,
    /// Basis of the plane curves of degree `n - 1` through `B`.
    pub plane_forms: Vec<Vec<String>>,
}

/// `a + b i` over the rationals.
#[derive(Debug, Clone, PartialEq)]
struct Gauss(Rational, Rational);

impl Gauss {
    fn one() -> Self {
        Gauss(Rational::one(), Rational::zero())
    }

    fn mul(&self, o: &Gauss) -> Gauss {
        Gauss(&self.0 * &o.0 - &self.1 * &o.1, &self.0 * &o.1 + &self.1 * &o.0)
    }

    fn pow(&self, e: usize) -> Gauss {
        (0..e).fold(Gauss::one(), |acc, _| acc.mul(self))
    }
}

/// Exponents `(a, b, c)` of `x^a y^b z^c` with `a + b + c = d`, ordered by
/// increasing `a + b`, then by `a`.
pub fn plane_monomials(d: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for k in 0..=d {
        for a in 0..=k {
            out.push([a, k - a, d - k]);
        }
    }
    out
}

fn quad_form(q: &RatMatrix, x: &[Rational], y: &[Rational]) -> Rational {
    let mut s = Rational::zero();
    for i in 0..3 {
        for j in 0..3 {
            s += q.get(i, j) * &x[i] * &y[j];
        }
    }
    s
}

fn check_conic(q: &RatMatrix) -> Result<Rational> {
    if q.rows() != 3 || q.cols() != 3 || q.transpose() != *q {
        return Err(Error::DegenerateConfig("the conic must be a symmetric 3 × 3 matrix".into()));
    }
    let det = det_exact(q)?;
    if det.is_zero() {
        return Err(Error::DegenerateConfig("the conic is degenerate".into()));
    }
    Ok(det)
}

/// Small-height search for a rational point of `Q`.
pub fn find_conic_point(q: &RatMatrix, height: i64) -> Option<Vec<Rational>> {
    for h in 1..=height {
        for x in -h..=h {
            for y in -h..=h {
                for z in -h..=h {
                    if x.abs().max(y.abs()).max(z.abs()) != h {
                        continue;
                    }
                    let p = [rat(x), rat(y), rat(z)];
                    if quad_form(q, &p, &p).is_zero() {
                        return Some(p.to_vec());
                    }
                }
            }
        }
    }
    None
}

/// Quadratic parameterization by lines through the rational point `p`:
/// `X(u, v) = Q(D) p - 2 B(p, D) D` with `D = u e_1 + v e_2`.
pub fn conic_parameterization(q: &RatMatrix, p: &[Rational]) -> Result<Vec<BinaryForm>> {
    if p.len() != 3 || p.iter().all(Zero::is_zero) || !quad_form(q, p, p).is_zero() {
        return Err(Error::DegenerateConfig("the supplied point does not lie on the conic".into()));
    }
    let polar = q.mul_vec(p);
    let e = |i: usize| -> Vec<Rational> { (0..3).map(|j| if i == j { rat(1) } else { rat(0) }).collect() };
    let e2 = (0..3).map(e).find(|v| !quad_form(q, p, v).is_zero()).expect("nondegenerate conic");
    let tangent = kernel_exact(&RatMatrix::from_rows(vec![polar]).expect("one row"));
    let e1 = tangent
        .into_iter()
        .find(|v| RatMatrix::from_rows(vec![v.clone(), p.to_vec()]).expect("rows").rank() == 2)
        .expect("tangent line has a second point");
    // Q(D) = Q(e1) u^2 + 2B(e1,e2) uv + Q(e2) v^2, B(p, D) = B(p,e2) v since B(p,e1) = 0
    let qd = BinaryForm::new(vec![quad_form(q, &e1, &e1), rat(2) * quad_form(q, &e1, &e2), quad_form(q, &e2, &e2)])?;
    let bp = quad_form(q, p, &e2);
    Ok((0..3)
        .map(|i| {
            let lin = BinaryForm::new(vec![e1[i].clone(), e2[i].clone()]).expect("linear");
            let corr = BinaryForm::monomial(rat(-2) * &bp, 0, 1).mul(&lin);
            qd.scale(&p[i]).add(&corr).expect("quadratics")
        })
        .collect())
}

/// Real base points strictly inside the disc bounded by `Q`: after scaling
/// `Q` so that `det Q < 0`, the interior is where the form is negative.
pub fn inside_count(cfg: &PlaneConfig) -> Result<usize> {
    let det = check_conic(&cfg.conic)?;
    let s = if det.is_negative() { rat(1) } else { rat(-1) };
    let mut count = 0;
    for b in &cfg.points {
        if let BasePoint::Real(x) = b {
            let v = &s * quad_form(&cfg.conic, x, x);
            if v.is_zero() {
                return Err(Error::DegenerateConfig("a base point lies on the conic".into()));
            }
            count += usize::from(v.is_negative());
        }
    }
    Ok(count)
}

fn plane_system(points: &[BasePoint], d: usize) -> Result<RatMatrix> {
    let mons = plane_monomials(d);
    let mut rows = Vec::new();
    for b in points {
        match b {
            BasePoint::Real(x) => {
                if x.len() != 3 || x.iter().all(Zero::is_zero) {
                    return Err(Error::DegenerateConfig("base points need three coordinates, not all zero".into()));
                }
                rows.push(
                    mons.iter()
                        .map(|m| (0..3).fold(rat(1), |acc, i| acc * num_traits::pow(x[i].clone(), m[i])))
                        .collect(),
                );
            }
            BasePoint::ConjugatePair { re, im } => {
                if re.len() != 3 || im.len() != 3 {
                    return Err(Error::DegenerateConfig("base points need three coordinates".into()));
                }
                if RatMatrix::from_rows(vec![re.clone(), im.clone()])?.rank() < 2 {
                    return Err(Error::DegenerateConfig("a conjugate pair must consist of non-real points".into()));
                }
                let vals: Vec<Gauss> = mons
                    .iter()
                    .map(|m| {
                        (0..3).fold(Gauss::one(), |acc, i| {
                            acc.mul(&Gauss(re[i].clone(), im[i].clone()).pow(m[i]))
                        })
                    })
                    .collect();
                rows.push(vals.iter().map(|g| g.0.clone()).collect());
                rows.push(vals.iter().map(|g| g.1.clone()).collect());
            }
        }
    }
    RatMatrix::from_rows(rows)
}

fn check_disjoint(cfg: &PlaneConfig) -> Result<()> {
    for b in &cfg.points {
        let on = match b {
            BasePoint::Real(x) => quad_form(&cfg.conic, x, x).is_zero(),
            BasePoint::ConjugatePair { re, im } => {
                let r = quad_form(&cfg.conic, re, re) - quad_form(&cfg.conic, im, im);
                r.is_zero() && quad_form(&cfg.conic, re, im).is_zero()
            }
        };
        if on {
            return Err(Error::DegenerateConfig("a base point lies on the conic".into()));
        }
    }
    Ok(())
}

/// The curve cut on `Q` by the plane curves of degree `n - 1` through `B`,
/// with its ground-truth Segre index `(-1)^{int(B, Q)}`.
pub fn cremona_generate(cfg: &PlaneConfig, n: usize) -> Result<Generated> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("n must be at least 2, got {n}")));
    }
    check_conic(&cfg.conic)?;
    let total: usize = cfg.points.iter().map(BasePoint::count).sum();
    if total != crate::castelnuovo_count(n) {
        return Err(Error::DegenerateConfig(format!(
            "{total} base points given, {} needed",
            crate::castelnuovo_count(n)
        )));
    }
    check_disjoint(cfg)?;
    let inside = inside_count(cfg)?;
    let d = n - 1;
    let mons = plane_monomials(d);
    let basis = if cfg.points.is_empty() {
        (0..mons.len()).map(|i| (0..mons.len()).map(|j| rat(i64::from(i == j))).collect()).collect()
    } else {
        kernel_exact(&plane_system(&cfg.points, d)?)
    };
    if basis.len() != n {
        return Err(Error::DegenerateConfig(format!(
            "the linear system through B has dimension {}, expected {n}",
            basis.len()
        )));
    }
    let param = match &cfg.parameterization {
        Some(p) => {
            if p.len() != 3 || p.iter().any(|f| f.degree() != 2) {
                return Err(Error::DegenerateConfig("the parameterization must be three quadratics".into()));
            }
            p.clone()
        }
        None => {
            let point = match &cfg.conic_point {
                Some(p) => p.clone(),
                None => find_conic_point(&cfg.conic, 12).ok_or(Error::SupplyPointRequired)?,
            };
            conic_parameterization(&cfg.conic, &point)?
        }
    };
    // Q ∘ param ≡ 0
    let mut on_conic = BinaryForm::zero(4);
    for i in 0..3 {
        for j in 0..3 {
            on_conic = on_conic.add(&param[i].mul(&param[j]).scale(cfg.conic.get(i, j)))?;
        }
    }
    if !on_conic.is_zero() {
        return Err(Error::DegenerateConfig("the parameterization does not lie on the conic".into()));
    }
    let mono_forms: Vec<BinaryForm> =
        mons.iter().map(|m| param[0].pow(m[0]).mul(&param[1].pow(m[1])).mul(&param[2].pow(m[2]))).collect();
    let p: Vec<BinaryForm> = basis
        .iter()
        .map(|g| {
            g.iter().zip(&mono_forms).fold(BinaryForm::zero(2 * d), |acc, (c, f)| acc.add(&f.scale(c)).expect("degree"))
        })
        .collect();
    let curve = JetCurve::new(p).map_err(|e| Error::DegenerateConfig(format!("generated curve is invalid: {e}")))?;
    if det_ac(&curve).is_zero() {
        return Err(Error::DegenerateConfig("generated curve has det A_C = 0".into()));
    }
    Ok(Generated {
        curve,
        ground_truth: if inside % 2 == 0 { 1 } else { -1 },
        inside,
        plane_forms: basis.iter().map(|g| g.iter().map(format_rational).collect()).collect(),
    })
}

/// Random configuration for `n`: integer base points (one conjugate pair when
/// `with_pair` and there is room) and the conic `Mᵀ diag(1, 1, -1) M`.
pub fn random_config(n: usize, rng: &mut ChaCha8Rng, with_pair: bool) -> PlaneConfig {
    let k = crate::castelnuovo_count(n);
    loop {
        let m: Vec<Vec<i64>> = (0..3).map(|_| (0..3).map(|_| rng.random_range(-3..=3)).collect()).collect();
        let mm = RatMatrix::from_rows(m.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect()).expect("3 × 3");
        let Ok(det) = det_exact(&mm) else { continue };
        if det.is_zero() {
            continue;
        }
        let j = RatMatrix::from_i64(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, -1]]);
        let conic = mm.transpose().mul(&j).and_then(|x| x.mul(&mm)).expect("3 × 3");
        // M p = (1, 0, 1) lies on the standard cone
        let inv_col = solve3(&mm, &[rat(1), rat(0), rat(1)]);
        let mut vec3 = || -> [i64; 3] {
            loop {
                let v = [rng.random_range(-5..=5), rng.random_range(-5..=5), rng.random_range(-5..=5)];
                if v != [0, 0, 0] {
                    return v;
                }
            }
        };
        let mut points = Vec::new();
        let mut count = 0;
        if with_pair && k >= 2 {
            points.push(BasePoint::pair(vec3(), vec3()));
            count += 2;
        }
        while count < k {
            points.push(BasePoint::real(vec3()));
            count += 1;
        }
        let cfg = PlaneConfig { points, conic, conic_point: inv_col, parameterization: None };
        if cremona_generate(&cfg, n).is_ok() {
            return cfg;
        }
    }
}

fn solve3(m: &RatMatrix, b: &[Rational]) -> Option<Vec<Rational>> {
    let mut rows: Vec<Vec<Rational>> = (0..3).map(|i| m.row(i).to_vec()).collect();
    for (r, bi) in rows.iter_mut().zip(b) {
        r.push(-bi.clone());
    }
    let ker = kernel_exact(&RatMatrix::from_rows(rows).ok()?);
    let v = ker.into_iter().find(|v| !v[3].is_zero())?;
    Some(v[..3].iter().map(|x| x / &v[3]).collect())
}

/// Seeded stream of random configurations.
pub fn random_configs(n: usize, count: usize, seed: u64, with_pairs: bool) -> Vec<PlaneConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|i| random_config(n, &mut rng, with_pairs && i % 2 == 1)).collect()
}

// ---------------------------------------------------------------------------
// wall crossing

/// Euler index, Segre index and (for `n ≤ 3`) Welschinger weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexTriple {
    pub euler: i32,
    pub segre: i32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub welschinger: Option<i32>,
}

impl IndexTriple {
    pub fn agree(&self) -> bool {
        self.euler == self.segre && self.welschinger.is_none_or(|w| w == self.euler)
    }
}

pub fn index_triple(c: &JetCurve, cfg: &SolverConfig) -> Result<IndexTriple> {
    let euler = euler_index(c)?;
    let segre = segre_index_auto(c, cfg)?;
    let welschinger = if c.n() <= 3 { Some(welschinger_weight(c)?) } else { None };
    Ok(IndexTriple { euler, segre, welschinger })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crossing {
    /// Isolating interval of the zero of `det A_{C_t}`.
    #[serde(with = "serde_rational")]
    pub lo: Rational,
    #[serde(with = "serde_rational")]
    pub hi: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideSample {
    #[serde(with = "serde_rational")]
    pub t: Rational,
    #[serde(with = "serde_rational")]
    pub det: Rational,
    pub indices: IndexTriple,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossingReport {
    /// Coefficients of `det A_{C_t}` in increasing powers of `t`.
    #[serde(with = "serde_rational::vec")]
    pub det_polynomial: Vec<Rational>,
    pub crossings: Vec<Crossing>,
    /// Samples per chamber, chambers in increasing `t`.
    pub chambers: Vec<Vec<SideSample>>,
    /// No crossing on the segment.
    pub constant: bool,
    /// The three indices agree at every sample.
    pub agree: bool,
    /// All indices flip at every crossing and are constant within chambers.
    pub flips: bool,
    /// `euler(C1) = euler(C0) · (-1)^{#crossings}`.
    pub parity: bool,
}

fn det_polynomial(c0: &JetCurve, c1: &JetCurve) -> Result<UniPoly> {
    let deg = 2 * c0.n();
    let ts: Vec<Rational> = (0..=deg as i64).map(rat).collect();
    let ys = ts
        .iter()
        .map(|t| Ok(det_ac(&JetCurve::interpolate(c0, c1, t).map_err(|e| Error::NonGenericPath(e.to_string()))?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(UniPoly::interpolate(&ts, &ys))
}

/// Indices at a sample point in `(a, b)`; a few candidates are tried in case
/// one of them hits a non-generic curve.
fn chamber_sample(
    c0: &JetCurve,
    c1: &JetCurve,
    a: &Rational,
    b: &Rational,
    fraction: &Rational,
    cfg: &SolverConfig,
) -> Result<SideSample> {
    let mut last = Error::NonGenericPath("no usable sample point".into());
    for shift in [rat(0), crate::exactalg::ratio(1, 7), crate::exactalg::ratio(-1, 11), crate::exactalg::ratio(2, 13)] {
        let f = fraction + &shift * fraction * (Rational::one() - fraction);
        let t = a + (b - a) * &f;
        let curve = match JetCurve::interpolate(c0, c1, &t) {
            Ok(c) => c,
            Err(e) => {
                last = e;
                continue;
            }
        };
        match index_triple(&curve, cfg) {
            Ok(indices) => return Ok(SideSample { det: det_ac(&curve), t, indices }),
            Err(e @ (Error::NonGenericCurve(_) | Error::SingularAlongLine(_) | Error::InvalidInput(_))) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

fn endpoint_sample(
    c0: &JetCurve,
    c1: &JetCurve,
    a: &Rational,
    b: &Rational,
    fraction: &Rational,
    cfg: &SolverConfig,
) -> Result<Option<SideSample>> {
    match chamber_sample(c0, c1, a, b, fraction, cfg) {
        Ok(s) => Ok(Some(s)),
        Err(Error::NonGenericCurve(_) | Error::InvalidInput(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Wall crossings of `det A` along `C_t = (1 - t) C0 + t C1`, with the index
/// triple at `steps` sample points in every chamber.
pub fn wallcross_path(c0: &JetCurve, c1: &JetCurve, steps: usize, cfg: &SolverConfig) -> Result<CrossingReport> {
    if c0.n() != c1.n() {
        return Err(Error::InvalidInput("curves of different n".into()));
    }
    let det = det_polynomial(c0, c1)?;
    if det.is_zero() {
        return Err(Error::NonGenericPath("det A_{C_t} vanishes identically".into()));
    }
    let (zero, one) = (rat(0), rat(1));
    if det.eval(&zero).is_zero() || det.eval(&one).is_zero() {
        return Err(Error::Degenerate);
    }
    let multiple = det.gcd(&det.derivative());
    if count_roots_in(&multiple, &zero, &one) > 0 {
        return Err(Error::NonGenericPath("det A_{C_t} has a multiple zero on the segment".into()));
    }
    let crossings: Vec<Crossing> = isolate_roots(&det, &zero, &one, &crate::exactalg::ratio(1, 1 << 20))
        .into_iter()
        .map(|(lo, hi)| Crossing { lo, hi })
        .collect();
    let mut bounds = vec![zero.clone()];
    for c in &crossings {
        bounds.push(c.lo.clone());
        bounds.push(c.hi.clone());
    }
    bounds.push(one.clone());
    let steps = steps.max(1);
    let mut chambers = Vec::new();
    for (ci, w) in bounds.chunks(2).enumerate() {
        let (a, b) = (&w[0], &w[1]);
        let mut samples = Vec::new();
        // the endpoints of the segment are sampled themselves
        // the end curves are sampled too, unless they are themselves non-generic
        if ci == 0 {
            samples.extend(endpoint_sample(c0, c1, a, b, &zero, cfg)?);
        }
        for s in 1..=steps {
            let f = Rational::new((s as i64).into(), (steps as i64 + 1).into());
            samples.push(chamber_sample(c0, c1, a, b, &f, cfg)?);
        }
        if ci == crossings.len() {
            samples.extend(endpoint_sample(c0, c1, a, b, &one, cfg)?);
        }
        chambers.push(samples);
    }
    let agree = chambers.iter().flatten().all(|s| s.indices.agree());
    let mut flips = chambers.iter().all(|ch| ch.iter().all(|s| s.indices == ch[0].indices));
    for w in chambers.windows(2) {
        let (x, y) = (w[0][0].indices, w[1][0].indices);
        flips &= x.euler == -y.euler
            && x.segre == -y.segre
            && x.welschinger.zip(y.welschinger).is_none_or(|(p, q)| p == -q);
        flips &= sign(&w[0][0].det) == -sign(&w[1][0].det);
    }
    let e0 = euler_index(c0)?;
    let e1 = euler_index(c1)?;
    let parity = e1 == if crossings.len() % 2 == 0 { e0 } else { -e0 };
    Ok(CrossingReport {
        det_polynomial: det.coeffs().to_vec(),
        constant: crossings.is_empty(),
        crossings,
        chambers,
        agree,
        flips,
        parity,
    })
}

/// Random integer jet curve with coefficients in `[-h, h]`, not on `Δ^P`.
pub fn random_curve(n: usize, h: i64, rng: &mut ChaCha8Rng) -> JetCurve {
    loop {
        let rows: Vec<Vec<i64>> =
            (0..n).map(|_| (0..=2 * n - 2).map(|_| rng.random_range(-h..=h)).collect()).collect();
        let refs: Vec<&[i64]> = rows.iter().map(Vec::as_slice).collect();
        if let Ok(c) = JetCurve::from_i64(&refs) {
            if !det_ac(&c).is_zero() {
                return c;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segre::{chord_diagram_index_n3, segre_index};
    use crate::secants::nodes_exact_n3;

    fn cstar() -> JetCurve {
        JetCurve::from_i64(&[&[0, 2, 0, 2, 0], &[1, 0, 0, 0, -1], &[0, 2, 0, -2, 0]]).unwrap()
    }

    fn coordinate_config(conic: &[&[i64]]) -> PlaneConfig {
        PlaneConfig {
            points: vec![BasePoint::real([1, 0, 0]), BasePoint::real([0, 1, 0]), BasePoint::real([0, 0, 1])],
            conic: RatMatrix::from_i64(conic),
            conic_point: None,
            parameterization: None,
        }
    }

    #[test]
    fn monomial_family() {
        let c = one_example(3).unwrap();
        assert_eq!(c.p()[1], BinaryForm::from_i64(&[0, 0, 1, 0, 0]));
        let c2 = one_example(2).unwrap();
        assert_eq!(c2.p(), &[BinaryForm::from_i64(&[1, 0, 0]), BinaryForm::from_i64(&[0, 0, 1])]);
        for n in 2..=6 {
            assert_eq!(det_ac(&one_example(n).unwrap()), rat(1), "n = {n}");
        }
        assert!(one_example(1).is_err());
    }

    #[test]
    fn cremona_reproduces_cstar() {
        let mut cfg = coordinate_config(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, -1]]);
        cfg.parameterization =
            Some(vec![BinaryForm::from_i64(&[1, 0, -1]), BinaryForm::from_i64(&[0, 2, 0]), BinaryForm::from_i64(&[1, 0, 1])]);
        let g = cremona_generate(&cfg, 3).unwrap();
        assert_eq!(g.curve, cstar());
        assert_eq!(g.inside, 1);
        assert_eq!(g.ground_truth, -1);

        // searched point, different parameterization, same index
        cfg.parameterization = None;
        let g = cremona_generate(&cfg, 3).unwrap();
        assert_eq!(g.ground_truth, -1);
        assert_eq!(segre_index(&g.curve, &nodes_exact_n3(&g.curve).unwrap()).unwrap(), -1);
    }

    #[test]
    fn shifted_conic_has_everything_outside() {
        let cfg = coordinate_config(&[&[1, 0, -3], &[0, 1, -3], &[-3, -3, 17]]);
        let g = cremona_generate(&cfg, 3).unwrap();
        assert_eq!(g.inside, 0);
        assert_eq!(g.ground_truth, 1);
        assert_eq!(euler_index(&g.curve).unwrap(), 1);
    }

    #[test]
    fn inside_is_independent_of_conic_scaling() {
        let mut cfg = coordinate_config(&[&[-1, 0, 0], &[0, -1, 0], &[0, 0, 1]]);
        assert_eq!(inside_count(&cfg).unwrap(), 1);
        cfg.conic = RatMatrix::from_i64(&[&[3, 0, 0], &[0, 3, 0], &[0, 0, -3]]);
        assert_eq!(inside_count(&cfg).unwrap(), 1);
    }

    #[test]
    fn config_errors() {
        let mut cfg = coordinate_config(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, -1]]);
        cfg.points[0] = BasePoint::real([1, 0, 1]);
        assert!(matches!(cremona_generate(&cfg, 3), Err(Error::DegenerateConfig(_))));
        // x^2 + y^2 - 3 z^2 has no rational point
        let cfg = coordinate_config(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, -3]]);
        assert_eq!(cremona_generate(&cfg, 3), Err(Error::SupplyPointRequired));
        // three collinear points impose only two conditions on conics
        let mut cfg = coordinate_config(&[&[1, 0, -3], &[0, 1, -3], &[-3, -3, 17]]);
        cfg.points = vec![BasePoint::real([1, 0, 0]), BasePoint::real([0, 1, 0]), BasePoint::real([1, 1, 0])];
        assert!(matches!(cremona_generate(&cfg, 3), Err(Error::DegenerateConfig(_))));
    }

    #[test]
    fn config_json_roundtrip() {
        let mut cfg = coordinate_config(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, -1]]);
        cfg.points.push(BasePoint::pair([1, 2, 0], [0, 1, 1]));
        cfg.conic_point = Some(vec![rat(1), rat(0), rat(1)]);
        let s = serde_json::to_string(&cfg).unwrap();
        assert!(s.contains(r#"{"real":["1","0","0"]}"#), "{s}");
        let back: PlaneConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn random_n3_configs_match_ground_truth() {
        for (i, cfg) in random_configs(3, 30, 5, true).iter().enumerate() {
            let g = cremona_generate(cfg, 3).unwrap();
            let Ok(report) = nodes_exact_n3(&g.curve) else { continue };
            let s = segre_index(&g.curve, &report).unwrap();
            assert_eq!(s, g.ground_truth, "config {i}");
            assert_eq!(euler_index(&g.curve).unwrap(), g.ground_truth, "config {i}");
            assert_eq!(chord_diagram_index_n3(&g.curve, &report).unwrap(), s, "config {i}");
        }
    }

    #[test]
    fn n4_config_gives_degree_six() {
        let cfg = random_configs(4, 1, 9, false).remove(0);
        let g = cremona_generate(&cfg, 4).unwrap();
        assert_eq!(g.curve.degree(), 6);
        assert_eq!(euler_index(&g.curve).unwrap(), g.ground_truth);
    }

    #[test]
    fn wallcross_examples() {
        let cfg = SolverConfig::default();
        let same = wallcross_path(&cstar(), &cstar(), 1, &cfg).unwrap();
        assert!(same.constant && same.crossings.is_empty() && same.parity && same.agree);

        let r = wallcross_path(&one_example(3).unwrap(), &cstar(), 1, &cfg).unwrap();
        assert_eq!(r.crossings.len() % 2, 1);
        assert!(r.agree && r.flips && r.parity);

        // a tiny perturbation stays in the chamber
        let eps = crate::exactalg::ratio(1, 50);
        let p: Vec<BinaryForm> = one_example(3)
            .unwrap()
            .p()
            .iter()
            .zip(cstar().p())
            .map(|(a, b)| a.add(&b.scale(&eps)).unwrap())
            .collect();
        let near = JetCurve::new(p).unwrap();
        let r = wallcross_path(&one_example(3).unwrap(), &near, 2, &cfg).unwrap();
        assert!(r.constant && r.agree);
    }

    #[test]
    fn wallcross_random_segments() {
        let cfg = SolverConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..8 {
            let (a, b) = (random_curve(3, 6, &mut rng), random_curve(3, 6, &mut rng));
            match wallcross_path(&a, &b, 1, &cfg) {
                Ok(r) => assert!(r.agree && r.flips && r.parity, "{r:?}"),
                Err(Error::NonGenericPath(_) | Error::NonGenericCurve(_)) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }
}
