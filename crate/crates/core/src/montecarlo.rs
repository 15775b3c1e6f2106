//! Random node sets, the discretization defect `L^q_z` and Marcinkiewicz
//! constants, certified for `q = 2` and ensemble-based otherwise.

use std::f64::consts::TAU;
use std::io::Write;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::indexset::IndexSet;
use crate::linalg::{gram_matrix, hermitian_eigen, DEFAULT_GRAM_CAP};
use crate::pointset::PointSet;
use crate::polynomial::{
    exponential_matrix, lq_norm, lq_norm_estimate, random_polynomial, Ensemble, Exponent, NormSpec,
    TrigPolynomial,
};
use crate::rng::{derive_seed, stream};

/// One evaluation of `L^q_z(f)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectSample {
    pub q: f64,
    pub m: usize,
    pub defect: f64,
    pub f_id: u64,
    pub z_id: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportKind {
    CertifiedL2,
    Empirical,
    Weighted,
}

/// Constants `C₁ ≤ C₂` of a discretization, with provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationReport {
    pub kind: ReportKind,
    pub q: f64,
    pub d: usize,
    pub n: Option<u32>,
    #[serde(rename = "Q_size")]
    pub q_size: usize,
    pub m: usize,
    pub lower: f64,
    pub upper: f64,
    pub eta: Option<f64>,
    pub trials: usize,
    pub attempts: usize,
    pub seeds: Vec<u64>,
    pub runtime_ms: u64,
    pub success: Option<bool>,
    /// Largest eigen residual for certified reports.
    pub eigen_residual: Option<f64>,
    /// Largest `|L^q_z(f)|` over the ensemble for empirical reports.
    pub max_defect: Option<f64>,
    pub version: String,
    #[serde(default)]
    pub config: serde_json::Value,
}

impl DiscretizationReport {
    pub fn new(kind: ReportKind, q: f64, set: &IndexSet, m: usize) -> Self {
        Self {
            kind,
            q,
            d: set.dim(),
            n: None,
            q_size: set.len(),
            m,
            lower: 0.0,
            upper: 0.0,
            eta: None,
            trials: 0,
            attempts: 0,
            seeds: Vec::new(),
            runtime_ms: 0,
            success: None,
            eigen_residual: None,
            max_defect: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: serde_json::Value::Null,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidArgument(e.to_string()))
    }
}

fn require_equal_weights(z: &PointSet) -> Result<()> {
    if z.is_empty() || !z.is_equal_weight() {
        return Err(Error::InvalidArgument(
            "node set must carry equal weights 1/m".into(),
        ));
    }
    Ok(())
}

fn q_norm_power(f: &TrigPolynomial, q: f64) -> Result<f64> {
    if q == 2.0 {
        return Ok(f.l2_norm().powi(2));
    }
    Ok(lq_norm(f, NormSpec::q(q)?)?.powf(q))
}

/// `L^q_z(f) = (1/m) Σ_j |f(x^j)|^q − ‖f‖_q^q`.
pub fn discretization_defect(f: &TrigPolynomial, q: f64, z: &PointSet) -> Result<f64> {
    require_equal_weights(z)?;
    NormSpec::q(q)?;
    let vals = f.evaluate_at(z)?;
    let mean = vals.iter().map(|v| v.norm().powf(q)).sum::<f64>() / z.len() as f64;
    Ok(mean - q_norm_power(f, q)?)
}

pub fn defect_sample(
    f: &TrigPolynomial,
    q: f64,
    z: &PointSet,
    f_id: u64,
    z_id: u64,
) -> Result<DefectSample> {
    Ok(DefectSample {
        q,
        m: z.len(),
        defect: discretization_defect(f, q, z)?,
        f_id,
        z_id,
    })
}

/// `m` i.i.d. uniform nodes on `[0, 2π)^d`, weights `1/m`.
pub fn random_nodes(m: usize, d: usize, seed: u64) -> Result<PointSet> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    let mut rng = stream(seed, 0);
    let coords: Vec<f64> = (0..m * d).map(|_| rng.gen_range(0.0..TAU)).collect();
    Ok(PointSet::from_flat(d, coords, vec![1.0 / m as f64; m]))
}

/// Extreme eigenvalues of the weighted Gram matrix `V*WV` over `T(Q)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct L2Constants {
    pub lower: f64,
    pub upper: f64,
    pub residual: f64,
}

/// The sharp constants of the `q = 2` two-sided inequality for `z`.
pub fn certify_l2_constants(q: &IndexSet, z: &PointSet) -> Result<L2Constants> {
    certify_l2_constants_capped(q, z, DEFAULT_GRAM_CAP)
}

pub fn certify_l2_constants_capped(q: &IndexSet, z: &PointSet, cap: usize) -> Result<L2Constants> {
    let g = gram_matrix(q, z, cap)?;
    let e = hermitian_eigen(&g)?;
    Ok(L2Constants {
        lower: e.min(),
        upper: e.max(),
        residual: e.residual,
    })
}

/// A fixed family of polynomials normalized to `‖f‖_q = 1/2`, evaluated in
/// bulk through the exponential matrix.
pub struct UnitEnsemble {
    q: f64,
    set: IndexSet,
    coeffs: DMatrix<Complex64>,
    /// `‖f‖_q^q` of every member.
    norms: Vec<f64>,
}

impl UnitEnsemble {
    pub fn new(set: &IndexSet, q: f64, size: usize, seed: u64) -> Result<Self> {
        NormSpec::q(q)?;
        if size == 0 {
            return Err(Error::InvalidArgument(
                "ensemble size must be at least 1".into(),
            ));
        }
        let mut coeffs = DMatrix::zeros(set.len(), size);
        let mut norms = Vec::with_capacity(size);
        for i in 0..size {
            let f = random_polynomial(
                set,
                derive_seed(seed, i as u64),
                Ensemble::UnitLqNormalized(q),
                false,
            )?;
            coeffs.column_mut(i).copy_from_slice(f.coeffs());
            norms.push(q_norm_power(&f, q)?);
        }
        Ok(Self {
            q,
            set: set.clone(),
            coeffs,
            norms,
        })
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    pub fn member(&self, i: usize) -> TrigPolynomial {
        TrigPolynomial::from_coeffs(
            self.set.clone(),
            self.coeffs.column(i).iter().copied().collect(),
        )
        .expect("ensemble column matches its support")
    }

    /// Weighted means `Σ_j w_j |f(x^j)|^q` for every member.
    pub fn discrete_means(&self, z: &PointSet) -> Result<Vec<f64>> {
        let v = exponential_matrix(&self.set, z)?;
        let vals = v * &self.coeffs;
        let w = z.weights();
        Ok((0..self.len())
            .map(|i| {
                vals.column(i)
                    .iter()
                    .zip(w)
                    .map(|(v, w)| w * v.norm().powf(self.q))
                    .sum()
            })
            .collect())
    }

    /// `L^q_z(f)` for every member.
    pub fn defects(&self, z: &PointSet) -> Result<Vec<f64>> {
        require_equal_weights(z)?;
        Ok(self
            .discrete_means(z)?
            .iter()
            .zip(&self.norms)
            .map(|(a, b)| a - b)
            .collect())
    }

    /// `Σ_j w_j |f(x^j)|^q / ‖f‖_q^q` for every member.
    pub fn ratios(&self, z: &PointSet) -> Result<Vec<f64>> {
        Ok(self
            .discrete_means(z)?
            .iter()
            .zip(&self.norms)
            .map(|(a, b)| a / b)
            .collect())
    }
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

/// Ensemble minimum and maximum of `Σ_j w_j |f(x^j)|^q / ‖f‖_q^q`.
pub fn empirical_constants(
    set: &IndexSet,
    q: f64,
    z: &PointSet,
    trials: usize,
    seed: u64,
) -> Result<DiscretizationReport> {
    let start = Instant::now();
    if z.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            got: z.dim(),
        });
    }
    let ens = UnitEnsemble::new(set, q, trials, seed)?;
    let ratios = ens.ratios(z)?;
    let (lower, upper) = min_max(&ratios);
    let mut report = DiscretizationReport::new(ReportKind::Empirical, q, set, z.len());
    report.lower = lower;
    report.upper = upper;
    report.trials = trials;
    report.seeds = vec![seed];
    if z.is_equal_weight() {
        let defects = ens.defects(z)?;
        report.max_defect = Some(defects.iter().map(|d| d.abs()).fold(0.0, f64::max));
    }
    report.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// Outcome of [`marcinkiewicz_search`]; failure is a result, not an error.
#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub points: Option<PointSet>,
    pub report: DiscretizationReport,
}

impl SearchOutcome {
    pub fn success(&self) -> bool {
        self.points.is_some()
    }
}

/// Seed of the ensemble used by a search with base `seed`.
pub fn ensemble_seed(seed: u64) -> u64 {
    derive_seed(seed, u64::MAX)
}

/// Draws up to `attempts` random node sets of size `m` and accepts the first
/// one passing the test: for `q = 2`, `1 − 2η ≤ λ_min` and `λ_max ≤ 1 + 2η`;
/// otherwise `|L^q_z(f)| ≤ η` over `trials` members of the unit ensemble.
#[allow(clippy::too_many_arguments)]
pub fn marcinkiewicz_search(
    set: &IndexSet,
    q: f64,
    m: usize,
    attempts: usize,
    eta: f64,
    trials: usize,
    seed: u64,
) -> Result<SearchOutcome> {
    let start = Instant::now();
    NormSpec::q(q)?;
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eta = {eta} must be positive"
        )));
    }
    if attempts == 0 {
        return Err(Error::InvalidArgument("attempts must be at least 1".into()));
    }
    let certified = q == 2.0;
    let kind = if certified {
        ReportKind::CertifiedL2
    } else {
        ReportKind::Empirical
    };
    let mut report = DiscretizationReport::new(kind, q, set, m);
    report.eta = Some(eta);
    report.trials = if certified { 0 } else { trials };
    let ensemble = if certified {
        None
    } else {
        Some(UnitEnsemble::new(set, q, trials, ensemble_seed(seed))?)
    };
    let mut accepted = None;
    for attempt in 0..attempts {
        let node_seed = derive_seed(seed, attempt as u64);
        report.seeds.push(node_seed);
        report.attempts = attempt + 1;
        let z = random_nodes(m, set.dim(), node_seed)?;
        let pass = match &ensemble {
            None => {
                let c = certify_l2_constants(set, &z)?;
                report.lower = c.lower;
                report.upper = c.upper;
                report.eigen_residual = Some(c.residual);
                c.lower >= 1.0 - 2.0 * eta && c.upper <= 1.0 + 2.0 * eta
            }
            Some(ens) => {
                let means = ens.discrete_means(&z)?;
                let mut worst = 0.0f64;
                let mut ratios = Vec::with_capacity(means.len());
                for (a, b) in means.iter().zip(&ens.norms) {
                    worst = worst.max((a - b).abs());
                    ratios.push(a / b);
                }
                let (lo, hi) = min_max(&ratios);
                report.lower = lo;
                report.upper = hi;
                report.max_defect = Some(worst);
                worst <= eta
            }
        };
        if pass {
            accepted = Some(z);
            break;
        }
    }
    report.success = Some(accepted.is_some());
    report.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(SearchOutcome {
        points: accepted,
        report,
    })
}

/// `⌈|Q_n| n^{7/2}⌉`, the `L₁` point count with unit constant.
pub fn l1_point_count(q_size: usize, n: u32) -> usize {
    (q_size as f64 * (n as f64).powf(3.5)).ceil() as usize
}

/// `⌈|Q_n| n^{d/2+3}⌉`, the `L₁` point count for general `d` with unit constant.
pub fn l1_point_count_d(q_size: usize, n: u32, d: usize) -> usize {
    (q_size as f64 * (n as f64).powf(d as f64 / 2.0 + 3.0)).ceil() as usize
}

/// `⌈C |Q| log₂|Q|⌉`.
pub fn l2_point_count(q_size: usize, c: f64) -> usize {
    (c * q_size as f64 * (q_size as f64).log2()).ceil() as usize
}

/// Mean-zero test variables with certified norms.
#[derive(Clone, Debug)]
pub enum VariableFamily {
    /// `a` with probability `b/(a+b)`, `−b` with probability `a/(a+b)`.
    TwoPoint { a: f64, b: f64 },
    /// `σZ` clipped to `[−c, c]`.
    ClippedGaussian { sigma: f64, clip: f64 },
    /// `g(x) = |f₁(x)| − ‖f₁‖₁ − (|f₂(x)| − ‖f₂‖₁)` at a uniform random `x`.
    PolynomialPair(Box<PolynomialPair>),
}

#[derive(Clone, Debug)]
pub struct PolynomialPair {
    pub f1: TrigPolynomial,
    pub f2: TrigPolynomial,
    pub l1: (f64, f64),
    /// Certified upper bound on `‖f₁ − f₂‖_∞`.
    pub delta: f64,
}

/// Oversampling used for the `L₁` norms that center the pair variables.
const PAIR_OVERSAMPLING: usize = 32;

impl VariableFamily {
    pub fn two_point(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "two-point values {a}, {b} must be positive"
            )));
        }
        Ok(VariableFamily::TwoPoint { a, b })
    }

    pub fn clipped_gaussian(sigma: f64, clip: f64) -> Result<Self> {
        if !(sigma > 0.0 && clip > 0.0 && sigma.is_finite() && clip.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "invalid clipped gaussian ({sigma}, {clip})"
            )));
        }
        Ok(VariableFamily::ClippedGaussian { sigma, clip })
    }

    /// Requires `‖f_j‖₁ ≤ 1/2` (within quadrature tolerance).
    pub fn polynomial_pair(f1: TrigPolynomial, f2: TrigPolynomial) -> Result<Self> {
        let spec = NormSpec::new(Exponent::Finite(1.0), PAIR_OVERSAMPLING)?;
        let e1 = lq_norm_estimate(&f1, spec)?;
        let e2 = lq_norm_estimate(&f2, spec)?;
        for e in [&e1, &e2] {
            if e.value - e.tolerance > 0.5 {
                return Err(Error::InvalidArgument(format!(
                    "‖f‖₁ = {} exceeds 1/2",
                    e.value
                )));
            }
        }
        let diff = f1.sub(&f2)?;
        let sup = lq_norm_estimate(&diff, NormSpec::new(Exponent::Inf, PAIR_OVERSAMPLING)?)?;
        let delta = sup.upper_bound.unwrap_or(f64::INFINITY);
        if !(delta > 0.0) {
            return Err(Error::InvalidArgument(
                "the two polynomials coincide".into(),
            ));
        }
        Ok(VariableFamily::PolynomialPair(Box::new(PolynomialPair {
            f1,
            f2,
            l1: (e1.value, e2.value),
            delta,
        })))
    }

    /// Upper bound on `‖g‖₁`.
    pub fn l1_norm(&self) -> f64 {
        match self {
            VariableFamily::TwoPoint { a, b } => 2.0 * a * b / (a + b),
            VariableFamily::ClippedGaussian { sigma, clip } => {
                let n = Normal::new(0.0, 1.0).expect("standard normal");
                let h = clip / sigma;
                2.0 * sigma * (n.pdf(0.0) - n.pdf(h)) + 2.0 * clip * n.sf(h)
            }
            VariableFamily::PolynomialPair(_) => 2.0,
        }
    }

    /// Upper bound on `‖g‖₂`.
    pub fn l2_norm(&self) -> f64 {
        match self {
            VariableFamily::TwoPoint { a, b } => (a * b).sqrt(),
            VariableFamily::ClippedGaussian { sigma, clip } => {
                let n = Normal::new(0.0, 1.0).expect("standard normal");
                let h = clip / sigma;
                let inner = sigma * sigma * (2.0 * n.cdf(h) - 1.0 - 2.0 * h * n.pdf(h));
                (inner + 2.0 * clip * clip * n.sf(h)).sqrt()
            }
            VariableFamily::PolynomialPair(p) => (2.0 * 2.0 * p.delta).sqrt(),
        }
    }

    /// Upper bound on `‖g‖_∞`.
    pub fn sup_norm(&self) -> f64 {
        match self {
            VariableFamily::TwoPoint { a, b } => a.max(*b),
            VariableFamily::ClippedGaussian { clip, .. } => *clip,
            VariableFamily::PolynomialPair(p) => 2.0 * p.delta,
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R, x: &mut [f64]) -> f64 {
        match self {
            VariableFamily::TwoPoint { a, b } => {
                if rng.gen::<f64>() < b / (a + b) {
                    *a
                } else {
                    -b
                }
            }
            VariableFamily::ClippedGaussian { sigma, clip } => {
                let z: f64 = rng.sample(StandardNormal);
                (sigma * z).clamp(-clip, *clip)
            }
            VariableFamily::PolynomialPair(p) => {
                for c in x.iter_mut() {
                    *c = rng.gen_range(0.0..TAU);
                }
                let v1 = p.f1.evaluate(x).expect("dimension checked").norm();
                let v2 = p.f2.evaluate(x).expect("dimension checked").norm();
                v1 - p.l1.0 - (v2 - p.l1.1)
            }
        }
    }

    fn dim(&self) -> usize {
        match self {
            VariableFamily::PolynomialPair(p) => p.f1.dim(),
            _ => 0,
        }
    }
}

/// Which concentration bound is checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailVariant {
    /// `‖g‖₁ ≤ 2`, `‖g‖_∞ ≤ M`: `2exp(−mη²/(8M))`, `η ∈ (0, 1)`.
    L1Style,
    /// `‖g‖₂ ≤ 2`, `‖g‖_∞ ≤ M`: `2exp(−mη²/8)` for `η ≤ 4/M`, else `2exp(−mη/(2M))`.
    L2Style,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailCheck {
    pub observed: f64,
    pub bound: f64,
    /// Three binomial standard errors at the bound.
    pub margin: f64,
    pub sup_norm: f64,
    pub pass: bool,
}

/// The tail bound for `m` variables with `‖g‖_∞ ≤ M`.
pub fn tail_bound(variant: TailVariant, sup_norm: f64, m: usize, eta: f64) -> f64 {
    let m = m as f64;
    match variant {
        TailVariant::L1Style => 2.0 * (-m * eta * eta / (8.0 * sup_norm)).exp(),
        TailVariant::L2Style if eta <= 4.0 / sup_norm => 2.0 * (-m * eta * eta / 8.0).exp(),
        TailVariant::L2Style => 2.0 * (-m * eta / (2.0 * sup_norm)).exp(),
    }
}

/// Empirical frequency of `|Σ_{j≤m} g_j| ≥ mη` over `trials` runs, compared
/// with the bound plus three binomial standard errors.
pub fn concentration_tail_check(
    family: &VariableFamily,
    m: usize,
    eta: f64,
    trials: usize,
    seed: u64,
    variant: TailVariant,
) -> Result<TailCheck> {
    if m == 0 || trials == 0 {
        return Err(Error::InvalidArgument(
            "m and trials must be positive".into(),
        ));
    }
    let slack = 1e-12;
    match variant {
        TailVariant::L1Style => {
            if family.l1_norm() > 2.0 + slack {
                return Err(Error::InvalidArgument(format!(
                    "‖g‖₁ = {} exceeds 2",
                    family.l1_norm()
                )));
            }
            if !(eta > 0.0 && eta < 1.0) {
                return Err(Error::InvalidArgument(format!("η = {eta} outside (0, 1)")));
            }
        }
        TailVariant::L2Style => {
            if family.l2_norm() > 2.0 + slack {
                return Err(Error::InvalidArgument(format!(
                    "‖g‖₂ = {} exceeds 2",
                    family.l2_norm()
                )));
            }
            if !(eta > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "η = {eta} must be positive"
                )));
            }
        }
    }
    let sup_norm = family.sup_norm();
    let bound = tail_bound(variant, sup_norm, m, eta);
    let mut x = vec![0.0; family.dim()];
    let threshold = m as f64 * eta;
    let mut hits = 0usize;
    for trial in 0..trials {
        let mut rng = stream(seed, trial as u64);
        let s: f64 = (0..m).map(|_| family.sample(&mut rng, &mut x)).sum();
        if s.abs() >= threshold {
            hits += 1;
        }
    }
    let observed = hits as f64 / trials as f64;
    let b = bound.min(1.0);
    let margin = 3.0 * (b * (1.0 - b) / trials as f64).sqrt();
    Ok(TailCheck {
        observed,
        bound,
        margin,
        sup_norm,
        pass: bound >= 1.0 || observed <= bound + margin,
    })
}

/// One row of an `m`-ladder: the median certified `λ_min` over seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub n: u32,
    pub m: usize,
    pub median_lambda_min: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len()) as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Median certified `λ_min` over `seeds` random node sets of size `m`.
pub fn ladder_row(set: &IndexSet, n: u32, m: usize, seeds: &[u64]) -> Result<LadderRow> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument(
            "ladder needs at least one seed".into(),
        ));
    }
    // Order-preserving collect keeps the median independent of the pool size.
    let lows = seeds
        .par_iter()
        .map(|&s| Ok(certify_l2_constants(set, &random_nodes(m, set.dim(), s)?)?.lower))
        .collect::<Result<Vec<f64>>>()?;
    Ok(LadderRow {
        n,
        m,
        median_lambda_min: median(lows),
    })
}

/// CSV with header `n,m,median_lambda_min`.
pub fn write_ladder_csv<W: Write>(rows: &[LadderRow], mut w: W) -> Result<()> {
    writeln!(w, "n,m,median_lambda_min")?;
    for r in rows {
        writeln!(w, "{},{},{:.12e}", r.n, r.m, r.median_lambda_min)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grids::full_grid;
    use crate::indexset::{box_set, hyperbolic_cross};
    use crate::korobov::exact_discretization;

    #[test]
    fn defect_examples() {
        let z = random_nodes(17, 2, 3).unwrap();
        let c = TrigPolynomial::constant(2, Complex64::new(1.5, 0.5)).unwrap();
        for q in [1.0, 2.0, 3.0] {
            assert!(discretization_defect(&c, q, &z).unwrap().abs() < 1e-12);
        }
        let e = TrigPolynomial::exponential(&[1, 0]).unwrap();
        assert!(discretization_defect(&e, 1.0, &z).unwrap().abs() < 1e-12);

        let q = hyperbolic_cross(2, 2).unwrap();
        let f = random_polynomial(&q, 2, Ensemble::GaussianCoeffs, false).unwrap();
        let z = random_nodes(5, 2, 9).unwrap();
        // Direct-summation oracle.
        let mut s = 0.0;
        for x in z.nodes() {
            let mut v = Complex64::new(0.0, 0.0);
            for (k, c) in f.terms() {
                v += c * Complex64::cis(k[0] as f64 * x[0] + k[1] as f64 * x[1]);
            }
            s += v.norm_sqr();
        }
        let oracle = s / 5.0 - f.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>();
        assert!((discretization_defect(&f, 2.0, &z).unwrap() - oracle).abs() < 1e-12);
        let weighted = PointSet::new(1, &[[0.0], [1.0]], vec![0.3, 0.7]).unwrap();
        assert!(
            discretization_defect(&TrigPolynomial::exponential(&[1]).unwrap(), 1.0, &weighted)
                .is_err()
        );
    }

    #[test]
    fn random_node_examples() {
        assert_eq!(
            random_nodes(10, 2, 5).unwrap(),
            random_nodes(10, 2, 5).unwrap()
        );
        assert_eq!(random_nodes(1, 3, 0).unwrap().len(), 1);
        let m = 100_000;
        let mut failures = 0;
        for seed in 0..20 {
            let z = random_nodes(m, 1, seed).unwrap();
            let mean: Complex64 =
                z.nodes().map(|x| Complex64::cis(x[0])).sum::<Complex64>() / m as f64;
            if mean.norm() > 4.0 / (m as f64).sqrt() {
                failures += 1;
            }
        }
        assert!(failures <= 1);
    }

    #[test]
    fn certified_constants_examples() {
        let q = hyperbolic_cross(2, 2).unwrap();
        let (_, z) = exact_discretization(&q).unwrap();
        let c = certify_l2_constants(&q, &z).unwrap();
        assert!((c.lower - 1.0).abs() < 1e-9 && (c.upper - 1.0).abs() < 1e-9);

        let small = random_nodes(q.len() - 1, 2, 1).unwrap();
        assert!(certify_l2_constants(&q, &small).unwrap().lower.abs() < 1e-10);

        let n = [2u32, 1];
        let c = certify_l2_constants(&box_set(&n).unwrap(), &full_grid(&n).unwrap()).unwrap();
        assert!((c.lower - 1.0).abs() < 1e-10 && (c.upper - 1.0).abs() < 1e-10);
    }

    #[test]
    fn empirical_examples() {
        let q = hyperbolic_cross(2, 2).unwrap();
        let z = random_nodes(40, 2, 4).unwrap();
        let c = certify_l2_constants(&q, &z).unwrap();
        let r = empirical_constants(&q, 2.0, &z, 50, 1).unwrap();
        assert!(r.lower >= c.lower - 1e-9 && r.upper <= c.upper + 1e-9);

        let (_, kz) = exact_discretization(&q).unwrap();
        let r = empirical_constants(&q, 2.0, &kz, 30, 2).unwrap();
        assert!((r.lower - 1.0).abs() < 1e-6 && (r.upper - 1.0).abs() < 1e-6);

        let same = PointSet::equal_weight(2, &vec![[0.7, 2.1]; 8]).unwrap();
        let r = empirical_constants(&q, 1.0, &same, 100, 3).unwrap();
        assert!(r.upper / r.lower > 2.0);
    }

    #[test]
    fn search_examples() {
        let q = hyperbolic_cross(2, 2).unwrap();
        let out = marcinkiewicz_search(&q, 2.0, q.len() - 1, 3, 0.25, 0, 0).unwrap();
        assert!(!out.success());
        assert_eq!(out.report.attempts, 3);

        let m = l2_point_count(q.len(), 10.0);
        let out = marcinkiewicz_search(&q, 2.0, m, 5, 0.25, 0, 7).unwrap();
        assert!(out.success());
        assert!(out.report.lower >= 0.5);

        let a = marcinkiewicz_search(&q, 1.0, 100, 2, 0.25, 20, 11).unwrap();
        let b = marcinkiewicz_search(&q, 1.0, 100, 2, 0.25, 20, 11).unwrap();
        let (mut ra, mut rb) = (a.report.clone(), b.report.clone());
        ra.runtime_ms = 0;
        rb.runtime_ms = 0;
        assert_eq!(ra.to_json().unwrap(), rb.to_json().unwrap());
    }

    #[test]
    fn report_json_field_names() {
        let q = hyperbolic_cross(1, 2).unwrap();
        let out = marcinkiewicz_search(&q, 2.0, 50, 1, 0.25, 0, 0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.report.to_json().unwrap()).unwrap();
        for key in [
            "kind",
            "q",
            "d",
            "n",
            "Q_size",
            "m",
            "lower",
            "upper",
            "eta",
            "trials",
            "attempts",
            "seeds",
            "runtime_ms",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["kind"], "certified-l2");
    }

    #[test]
    fn lipschitz_property_of_defect() {
        let q = hyperbolic_cross(2, 2).unwrap();
        for seed in 0..10u64 {
            let f1 = random_polynomial(&q, seed, Ensemble::UnitL1Normalized, false).unwrap();
            let g = random_polynomial(&q, seed + 100, Ensemble::UnitL1Normalized, false).unwrap();
            let f2 = f1
                .scale(Complex64::new(0.9, 0.0))
                .add(&g.scale(Complex64::new(0.1, 0.0)))
                .unwrap();
            let fam = VariableFamily::polynomial_pair(f1.clone(), f2.clone()).unwrap();
            let VariableFamily::PolynomialPair(p) = &fam else {
                unreachable!()
            };
            let z = random_nodes(64, 2, seed).unwrap();
            let l1 = discretization_defect(&f1, 1.0, &z).unwrap();
            let l2 = discretization_defect(&f2, 1.0, &z).unwrap();
            assert!((l1 - l2).abs() <= 2.0 * p.delta);
        }
    }

    #[test]
    fn clipped_gaussian_norms_match_simulation() {
        let fam = VariableFamily::clipped_gaussian(1.0, 1.5).unwrap();
        let mut rng = stream(99, 0);
        let n = 400_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        let mut x = [];
        for _ in 0..n {
            let g = fam.sample(&mut rng, &mut x);
            s1 += g.abs();
            s2 += g * g;
        }
        assert!((s1 / n as f64 - fam.l1_norm()).abs() < 5e-3);
        assert!(((s2 / n as f64).sqrt() - fam.l2_norm()).abs() < 5e-3);
    }

    #[test]
    fn tail_examples() {
        let pm = VariableFamily::two_point(1.0, 1.0).unwrap();
        let r = concentration_tail_check(&pm, 200, 0.5, 10_000, 1, TailVariant::L1Style).unwrap();
        assert!((r.bound - 2.0 * (-200.0f64 * 0.25 / 8.0).exp()).abs() < 1e-15);
        assert!(r.pass, "{r:?}");
        let r = concentration_tail_check(&pm, 10, 0.1, 1000, 1, TailVariant::L1Style).unwrap();
        assert!(r.bound >= 1.0 && r.pass);
        let wide = VariableFamily::two_point(3.0, 3.0).unwrap();
        assert!(concentration_tail_check(&wide, 10, 0.5, 10, 0, TailVariant::L1Style).is_err());
        assert!(concentration_tail_check(&wide, 10, 0.5, 10, 0, TailVariant::L2Style).is_err());
    }

    #[test]
    fn ladder_csv_format() {
        let q = hyperbolic_cross(1, 2).unwrap();
        let rows = vec![
            ladder_row(&q, 1, 20, &[1, 2, 3]).unwrap(),
            ladder_row(&q, 1, 40, &[1, 2, 3]).unwrap(),
        ];
        let mut out = Vec::new();
        write_ladder_csv(&rows, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("n,m,median_lambda_min\n1,20,"));
        assert_eq!(text.lines().count(), 3);
    }
}
