//! Frequency-localized orthonormal system `{v_k}` built from a Meyer-type
//! window, its tensor products on `T^d`, and the associated norm bounds.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::indexset::{hyperbolic_cross, IndexSet};
use crate::polynomial::{
    mode_product, Exponent, TrigPolynomial, DEFAULT_OVERSAMPLING, MAX_GRID_POINTS,
};
use crate::rng::stream;

pub const DEFAULT_DELTA: f64 = 1.0 / 6.0;
pub const DEFAULT_SMOOTHNESS: u32 = 3;

/// Even window `φ̂` equal to 1 on `|λ| ≤ (1−δ)/2` and 0 beyond `(1+δ)/2`,
/// with a `cos(π/2·β(u))` transition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowProfile {
    delta: f64,
    smoothness: u32,
}

/// `β_r(u) = u^{r+1} Σ_{j=0}^{r} C(r+j, j)(1−u)^j`, so `β(u) + β(1−u) = 1`.
fn beta(r: u32, u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    let mut binom = 1.0;
    let mut sum = 0.0;
    let mut pw = 1.0;
    for j in 0..=r {
        if j > 0 {
            binom *= (r + j) as f64 / j as f64;
            pw *= 1.0 - u;
        }
        sum += binom * pw;
    }
    u.powi(r as i32 + 1) * sum
}

pub fn build_window(delta: f64, smoothness: u32) -> Result<WindowProfile> {
    if !(delta > 0.0 && delta <= 1.0 / 3.0) {
        return Err(Error::InvalidArgument(format!(
            "delta = {delta} outside (0, 1/3]"
        )));
    }
    Ok(WindowProfile { delta, smoothness })
}

impl Default for WindowProfile {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            smoothness: DEFAULT_SMOOTHNESS,
        }
    }
}

impl WindowProfile {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn smoothness(&self) -> u32 {
        self.smoothness
    }

    pub fn beta(&self, u: f64) -> f64 {
        beta(self.smoothness, u)
    }

    /// `φ̂(λ) = cos(angle(λ))`.
    fn angle(&self, lambda: f64) -> f64 {
        let a = lambda.abs();
        let lo = (1.0 - self.delta) / 2.0;
        let hi = (1.0 + self.delta) / 2.0;
        if a <= lo {
            0.0
        } else if a >= hi {
            FRAC_PI_2
        } else {
            FRAC_PI_2 * self.beta((a - lo) / self.delta)
        }
    }

    pub fn phi_hat(&self, lambda: f64) -> f64 {
        let a = self.angle(lambda);
        if a == FRAC_PI_2 {
            0.0
        } else {
            a.cos()
        }
    }

    /// `(φ̂(λ/2)² − φ̂(λ)²)^{1/2}`, evaluated as `(sin(a−b)·sin(a+b))^{1/2}`
    /// with `φ̂(λ) = cos a`, `φ̂(λ/2) = cos b`.
    pub fn theta(&self, lambda: f64) -> f64 {
        let a = self.angle(lambda);
        let b = self.angle(lambda / 2.0);
        ((a - b).sin() * (a + b).sin()).max(0.0).sqrt()
    }

    /// `|Σ_k φ̂(λ+k)² − 1|`.
    pub fn partition_residual(&self, lambda: f64) -> f64 {
        let base = lambda.floor();
        let s: f64 = (-2..=2)
            .map(|k| self.phi_hat(lambda - base + k as f64).powi(2))
            .sum();
        (s - 1.0).abs()
    }
}

pub fn theta(window: &WindowProfile, lambda: f64) -> f64 {
    window.theta(lambda)
}

/// Nonzero coefficients `(ν, 2^{−n/2} θ(ν/2^n))` of `Ψ_n`, `ν` ascending.
fn psi_coefficients(window: &WindowProfile, n: u32) -> Vec<(i64, f64)> {
    let scale = (1u64 << n) as f64;
    let reach = (scale * (1.0 + window.delta)).ceil() as i64;
    let norm = scale.sqrt().recip();
    (-reach..=reach)
        .filter_map(|nu| {
            let t = window.theta(nu as f64 / scale);
            (t > 0.0).then_some((nu, norm * t))
        })
        .collect()
}

/// `Ψ_n` in the `2π`-periodic convention: coefficient of `e^{iνx}` is
/// `2^{−n/2} θ(ν 2^{−n})`.
pub fn psi(window: &WindowProfile, n: u32) -> TrigPolynomial {
    let terms = psi_coefficients(window, n)
        .into_iter()
        .map(|(nu, c)| ([nu], Complex64::new(c, 0.0)));
    TrigPolynomial::from_terms(1, terms).expect("univariate terms")
}

/// `k = 2^n + j` with `0 ≤ j < 2^n`; `None` for `k = 0`.
pub fn decode_index(k: u64) -> Option<(u32, u64)> {
    if k == 0 {
        return None;
    }
    let n = 63 - k.leading_zeros();
    Some((n, k - (1u64 << n)))
}

/// Nonzero coefficients of `v_k`; the translate by `(j+1/2)2^{−n}` becomes
/// the phase `e^{−2πiν(j+1/2)/2^n}`.
pub fn basis_coefficients(window: &WindowProfile, k: u64) -> Vec<(i64, Complex64)> {
    let Some((n, j)) = decode_index(k) else {
        return vec![(0, Complex64::new(1.0, 0.0))];
    };
    let period = 1u64 << (n + 1);
    let shift = 2 * j + 1;
    psi_coefficients(window, n)
        .into_iter()
        .map(|(nu, c)| {
            // Reduce ν(2j+1) modulo 2^{n+1} before forming the angle.
            let r = (nu as i128 * shift as i128).rem_euclid(period as i128) as f64;
            (nu, Complex64::from_polar(c, -TAU * r / period as f64))
        })
        .collect()
}

pub fn basis_element(window: &WindowProfile, k: u64) -> TrigPolynomial {
    let terms = basis_coefficients(window, k)
        .into_iter()
        .map(|(nu, c)| ([nu], c));
    TrigPolynomial::from_terms(1, terms).expect("univariate terms")
}

/// Tensor product `v_k(x) = Π_i v_{k_i}(x_i)`.
pub fn tensor_basis_element(window: &WindowProfile, k: &[u64]) -> Result<TrigPolynomial> {
    if k.is_empty() {
        return Err(Error::ZeroDimension);
    }
    let factors: Vec<Vec<(i64, Complex64)>> =
        k.iter().map(|&ki| basis_coefficients(window, ki)).collect();
    let mut terms: Vec<(Vec<i64>, Complex64)> = vec![(Vec::new(), Complex64::new(1.0, 0.0))];
    for f in &factors {
        terms = terms
            .iter()
            .flat_map(|(nu, c)| {
                f.iter().map(move |(v, fc)| {
                    let mut nu = nu.clone();
                    nu.push(*v);
                    (nu, c * fc)
                })
            })
            .collect();
    }
    TrigPolynomial::from_terms(k.len(), terms)
}

fn inner(a: &TrigPolynomial, b: &TrigPolynomial) -> Complex64 {
    a.terms().map(|(k, c)| c * b.coeff(k).conj()).sum()
}

fn gram_defect(elems: &[TrigPolynomial]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in elems.iter().enumerate() {
        for (j, b) in elems.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((inner(a, b) - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// `max |⟨v_k, v_l⟩ − δ_{kl}|` over `0 ≤ k, l ≤ kmax`.
pub fn orthonormality_check(window: &WindowProfile, kmax: u64) -> Result<f64> {
    if kmax < 1 {
        return Err(Error::InvalidArgument("kmax must be at least 1".into()));
    }
    let elems: Vec<TrigPolynomial> = (0..=kmax).map(|k| basis_element(window, k)).collect();
    Ok(gram_defect(&elems))
}

/// Same check for the tensor system `{v_k}` with `k ∈ [0, kmax]^d`.
pub fn tensor_orthonormality_check(window: &WindowProfile, kmax: u64, d: usize) -> Result<f64> {
    let mut elems = Vec::new();
    let side = kmax + 1;
    for code in 0..side.pow(d as u32) {
        let mut c = code;
        let k: Vec<u64> = (0..d)
            .map(|_| {
                let v = c % side;
                c /= side;
                v
            })
            .collect();
        elems.push(tensor_basis_element(window, &k)?);
    }
    Ok(gram_defect(&elems))
}

/// Oversampling of the decay grid relative to the scale `2^{−n}`.
const DECAY_RESOLUTION: usize = 32;

/// `max_x |Ψ_n(x)|·2^{−n/2}·(2^n|sin πx| + 1)^κ` over a grid of step
/// `2^{−n}/32` on the 1-periodic half line `[0, 1/2]`.
pub fn decay_check(window: &WindowProfile, n: u32, kappa: f64) -> f64 {
    let coeffs = psi_coefficients(window, n);
    let scale = (1u64 << n) as f64;
    let steps = DECAY_RESOLUTION * (1usize << n) / 2;
    let mut worst = 0.0f64;
    for u in 0..=steps {
        let x = u as f64 / (DECAY_RESOLUTION as f64 * scale);
        // Ψ_n is real and even, so only the cosine series is needed.
        let v: f64 = coeffs
            .iter()
            .map(|&(nu, c)| c * (TAU * nu as f64 * x).cos())
            .sum();
        let w = (scale * (PI * x).sin() + 1.0).powf(kappa);
        worst = worst.max(v.abs() * w / scale.sqrt());
    }
    worst
}

/// Nonnegative indices of `ρ⁺(s)`: `k_i = 0` when `s_i = 0`, otherwise
/// `2^{s_i−1} ≤ k_i < 2^{s_i}`, in lexicographic order.
pub fn rho_plus(s: &[u32]) -> Vec<Vec<u64>> {
    let ranges: Vec<(u64, u64)> = s
        .iter()
        .map(|&si| {
            if si == 0 {
                (0, 1)
            } else {
                (1u64 << (si - 1), 1u64 << si)
            }
        })
        .collect();
    let mut out = vec![Vec::new()];
    for &(lo, hi) in &ranges {
        out = out
            .into_iter()
            .flat_map(|p: Vec<u64>| {
                (lo..hi).map(move |k| {
                    let mut p = p.clone();
                    p.push(k);
                    p
                })
            })
            .collect();
    }
    out
}

/// `Q_n⁺`: the nonnegative part of the hyperbolic cross.
pub fn q_plus(n: u32, d: usize) -> Result<IndexSet> {
    Ok(hyperbolic_cross(n, d)?.positive_part())
}

/// `f = Σ_k f_k v_k` with real coefficients over nonnegative multi-indices.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveletExpansion {
    indices: IndexSet,
    coeffs: Vec<f64>,
}

impl WaveletExpansion {
    pub fn new(indices: IndexSet, coeffs: Vec<f64>) -> Result<Self> {
        if indices.len() != coeffs.len() {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients for {} indices",
                coeffs.len(),
                indices.len()
            )));
        }
        if indices.iter().any(|k| k.iter().any(|&c| c < 0)) {
            return Err(Error::InvalidArgument(
                "basis indices must be nonnegative".into(),
            ));
        }
        Ok(Self { indices, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.indices.dim()
    }

    pub fn indices(&self) -> &IndexSet {
        &self.indices
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `Σ_k |f_k|`.
    pub fn coefficient_l1(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    pub fn nonzeros(&self) -> usize {
        self.coeffs.iter().filter(|&&c| c != 0.0).count()
    }

    /// Expansion in exponentials.
    pub fn to_polynomial(&self, window: &WindowProfile) -> Result<TrigPolynomial> {
        let mut acc = TrigPolynomial::zero(self.dim())?;
        for (k, &c) in self.indices.iter().zip(&self.coeffs) {
            if c == 0.0 {
                continue;
            }
            let k: Vec<u64> = k.iter().map(|&x| x as u64).collect();
            acc = acc.add(&tensor_basis_element(window, &k)?.scale(Complex64::new(c, 0.0)))?;
        }
        Ok(acc)
    }

    /// Largest frequency reached along each axis.
    fn frequency_reach(&self, window: &WindowProfile) -> Vec<usize> {
        let kmax = self.indices.max_abs_per_axis();
        kmax.iter()
            .map(|&k| match decode_index(k as u64) {
                None => 0,
                Some((n, _)) => basis_coefficients(window, (1u64 << (n + 1)) - 1)
                    .last()
                    .map_or(0, |(nu, _)| *nu as usize),
            })
            .collect()
    }

    /// Values on the tensor grid `x_j = 2πg_j/G_j`, axis 0 slowest.
    pub fn grid_values(&self, window: &WindowProfile, grid: &[usize]) -> Result<Vec<f64>> {
        let d = self.dim();
        if grid.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: grid.len(),
            });
        }
        let total = grid
            .iter()
            .try_fold(1usize, |a, &g| a.checked_mul(g))
            .unwrap_or(usize::MAX);
        if total > MAX_GRID_POINTS {
            return Err(Error::CapExceeded {
                what: "grid points",
                size: total,
                cap: MAX_GRID_POINTS,
            });
        }
        let kmax: Vec<usize> = self
            .indices
            .max_abs_per_axis()
            .iter()
            .map(|&k| k as usize)
            .collect();
        let mut shape: Vec<usize> = kmax.iter().map(|k| k + 1).collect();
        let mut data = vec![0.0f64; shape.iter().product()];
        for (k, &c) in self.indices.iter().zip(&self.coeffs) {
            let mut idx = 0;
            for j in 0..d {
                idx = idx * shape[j] + k[j] as usize;
            }
            data[idx] += c;
        }
        for j in 0..d {
            let g = grid[j];
            let n = shape[j];
            let mut table = vec![0.0f64; g * n];
            for k in 0..n {
                let coeffs = basis_coefficients(window, k as u64);
                for gi in 0..g {
                    // v_k is real: only the real part of the sum survives.
                    let mut v = 0.0;
                    for &(nu, c) in &coeffs {
                        let r = (nu * gi as i64).rem_euclid(g as i64) as f64;
                        let (s, co) = (TAU * r / g as f64).sin_cos();
                        v += c.re * co - c.im * s;
                    }
                    table[gi * n + k] = v;
                }
            }
            data = mode_product(&data, &shape, j, &table, g);
            shape[j] = g;
        }
        Ok(data)
    }

    /// `‖f‖_p` by grid quadrature; exact for even integer `p`.
    pub fn lq_norm(&self, window: &WindowProfile, p: Exponent, oversampling: usize) -> Result<f64> {
        if oversampling < 2 {
            return Err(Error::InvalidArgument(format!(
                "oversampling {oversampling} < 2"
            )));
        }
        let reach = self.frequency_reach(window);
        let grid: Vec<usize> = reach
            .iter()
            .map(|&k| {
                let base = oversampling * (2 * k + 1);
                match p {
                    Exponent::Finite(q) if q.fract() == 0.0 && (q as u64) % 2 == 0 => {
                        base.max(q as usize * k + 1)
                    }
                    _ => base,
                }
            })
            .collect();
        let vals = self.grid_values(window, &grid)?;
        Ok(match p {
            Exponent::Inf => vals.iter().fold(0.0f64, |a, v| a.max(v.abs())),
            Exponent::Finite(q) => {
                if !(q >= 1.0) {
                    return Err(Error::InvalidArgument(format!("q = {q} < 1")));
                }
                (vals.iter().map(|v| v.abs().powf(q)).sum::<f64>() / vals.len() as f64)
                    .powf(1.0 / q)
            }
        })
    }
}

/// `‖Σ_{k∈ρ⁺(s)} a_k v_k‖_∞ / (2^{‖s‖₁/2} max|a_k|)`; `coeffs` follow the
/// order of [`rho_plus`].
pub fn block_sup_bound(window: &WindowProfile, s: &[u32], coeffs: &[f64]) -> Result<f64> {
    let d = s.len();
    if d == 0 || d > 3 {
        return Err(Error::InvalidArgument(format!(
            "dimension {d} outside 1..=3"
        )));
    }
    if s.iter().sum::<u32>() > 10 {
        return Err(Error::InvalidArgument("‖s‖₁ must not exceed 10".into()));
    }
    let idx = rho_plus(s);
    if coeffs.len() != idx.len() {
        return Err(Error::InvalidArgument(format!(
            "{} coefficients for |ρ⁺(s)| = {}",
            coeffs.len(),
            idx.len()
        )));
    }
    let amax = coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    if amax > 1.0 {
        return Err(Error::InvalidArgument(
            "coefficients must be bounded by 1".into(),
        ));
    }
    if amax == 0.0 {
        return Ok(0.0);
    }
    let rows: Vec<Vec<i64>> = idx
        .iter()
        .map(|k| k.iter().map(|&x| x as i64).collect())
        .collect();
    let set = IndexSet::new(d, &rows)?;
    // Both orders are lexicographic.
    let f = WaveletExpansion::new(set, coeffs.to_vec())?;
    let sup = f.lq_norm(window, Exponent::Inf, DEFAULT_OVERSAMPLING)?;
    let ss: u32 = s.iter().sum();
    Ok(sup / (2f64.powf(ss as f64 / 2.0) * amax))
}

/// Values of `Σ|f_k| / (n^{(d−1)/2}|Q_n|^{1/2}‖f‖₁)` and, for `d = 2`, the
/// sharper `Σ|f_k| / (|Q_n|^{1/2}‖f‖₁)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct L1Ratio {
    pub ratio: f64,
    pub sharp_ratio: Option<f64>,
    pub l1_norm: f64,
}

pub fn coefficient_l1_ratio(
    window: &WindowProfile,
    f: &WaveletExpansion,
    n: u32,
    oversampling: usize,
) -> Result<L1Ratio> {
    let d = f.dim();
    let l1 = f.lq_norm(window, Exponent::Finite(1.0), oversampling)?;
    if !(l1 > 0.0) {
        return Err(Error::ZeroPolynomial("coefficient ratio"));
    }
    let qn = hyperbolic_cross(n, d)?.len() as f64;
    let num = f.coefficient_l1();
    let ratio = num / ((n as f64).powf((d as f64 - 1.0) / 2.0) * qn.sqrt() * l1);
    let sharp_ratio = (d == 2).then(|| num / (qn.sqrt() * l1));
    Ok(L1Ratio {
        ratio,
        sharp_ratio,
        l1_norm: l1,
    })
}

/// `L_p` error of keeping the `m` largest coefficients (ties to the lower
/// index); an upper bound for the best `m`-term error.
pub fn mterm_approx(window: &WindowProfile, f: &WaveletExpansion, m: usize, p: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    if !(p >= 2.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!("p = {p} outside [2, ∞)")));
    }
    if m >= f.nonzeros() {
        return Ok(0.0);
    }
    let mut order: Vec<usize> = (0..f.coeffs.len()).collect();
    order.sort_by(|&a, &b| {
        f.coeffs[b]
            .abs()
            .total_cmp(&f.coeffs[a].abs())
            .then(a.cmp(&b))
    });
    let mut rest = f.coeffs.clone();
    for &i in &order[..m] {
        rest[i] = 0.0;
    }
    let r = WaveletExpansion {
        indices: f.indices.clone(),
        coeffs: rest,
    };
    if p == 2.0 {
        return Ok(r.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt());
    }
    r.lq_norm(window, Exponent::Finite(p), DEFAULT_OVERSAMPLING)
}

/// `n^{(d−1)/2}(|Q_n|/m)^{1−1/p}`.
pub fn mterm_rate(n: u32, d: usize, q_size: usize, m: usize, p: f64) -> f64 {
    (n as f64).powf((d as f64 - 1.0) / 2.0) * (q_size as f64 / m as f64).powf(1.0 - 1.0 / p)
}

/// Test populations in `V(Q_n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpansionEnsemble {
    /// i.i.d. standard normal coefficients on `Q_n⁺`.
    Gaussian,
    /// Random signs on one random block `ρ⁺(s)`, `‖s‖₁ ≤ n`.
    BlockSigns,
    /// `f_k = v_k(x₀)` at a random point: the reproducing kernel of `V(Q_n)`.
    Kernel,
    /// Uniform on the unit `ℓ₁` sphere of coefficients.
    UnitL1,
}

pub fn random_expansion(
    window: &WindowProfile,
    n: u32,
    d: usize,
    seed: u64,
    kind: ExpansionEnsemble,
) -> Result<WaveletExpansion> {
    let set = q_plus(n, d)?;
    let mut rng = stream(seed, 0);
    let coeffs: Vec<f64> = match kind {
        ExpansionEnsemble::Gaussian => (0..set.len()).map(|_| rng.sample(StandardNormal)).collect(),
        ExpansionEnsemble::UnitL1 => {
            let e: Vec<f64> = (0..set.len())
                .map(|_| {
                    let mag = -(1.0 - rng.gen::<f64>()).ln();
                    if rng.gen::<bool>() {
                        mag
                    } else {
                        -mag
                    }
                })
                .collect();
            let total: f64 = e.iter().map(|x| x.abs()).sum();
            e.iter().map(|x| x / total).collect()
        }
        ExpansionEnsemble::BlockSigns => {
            let levels = crate::indexset::levels_up_to(n, d);
            let s = &levels[rng.gen_range(0..levels.len())];
            let block: Vec<Vec<i64>> = rho_plus(s)
                .into_iter()
                .map(|k| k.into_iter().map(|x| x as i64).collect())
                .collect();
            set.iter()
                .map(|k| {
                    if block.iter().any(|b| b.as_slice() == k) {
                        if rng.gen::<bool>() {
                            1.0
                        } else {
                            -1.0
                        }
                    } else {
                        0.0
                    }
                })
                .collect()
        }
        ExpansionEnsemble::Kernel => {
            let x0: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..TAU)).collect();
            let kmax = set.max_abs() as u64;
            let values: Vec<Vec<f64>> = (0..d)
                .map(|j| {
                    (0..=kmax)
                        .map(|k| {
                            basis_coefficients(window, k)
                                .iter()
                                .map(|&(nu, c)| (c * Complex64::cis(nu as f64 * x0[j])).re)
                                .sum()
                        })
                        .collect()
                })
                .collect();
            set.iter()
                .map(|k| {
                    k.iter()
                        .enumerate()
                        .map(|(j, &kj)| values[j][kj as usize])
                        .product()
                })
                .collect()
        }
    };
    WaveletExpansion::new(set, coeffs)
}
