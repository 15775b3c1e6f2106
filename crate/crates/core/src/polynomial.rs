//! Trigonometric polynomials `t(x) = Σ_{k∈Q} c_k e^{i⟨k,x⟩}` on `T^d`,
//! their evaluation and `L_q` norms with respect to the normalized Lebesgue
//! measure.

use std::f64::consts::{PI, TAU};
use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::indexset::{parse_header, IndexSet};
use crate::pointset::PointSet;
use crate::rng;

/// Hard cap on the number of tensor-grid points used by norm quadrature.
pub const MAX_GRID_POINTS: usize = 40_000_000;

/// Default per-axis oversampling for non-even `q` and for the sup norm.
pub const DEFAULT_OVERSAMPLING: usize = 8;

/// Coefficients stored densely over a canonical [`IndexSet`].
#[derive(Clone, Debug)]
pub struct TrigPolynomial {
    support: IndexSet,
    coeffs: Vec<Complex64>,
}

impl PartialEq for TrigPolynomial {
    /// Equality after pruning zero coefficients.
    fn eq(&self, other: &Self) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let a: Vec<_> = self
            .terms()
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .collect();
        let b: Vec<_> = other
            .terms()
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .collect();
        a == b
    }
}

impl TrigPolynomial {
    /// Coefficients aligned with the canonical order of `support`.
    pub fn from_coeffs(support: IndexSet, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != support.len() {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients for a support of size {}",
                coeffs.len(),
                support.len()
            )));
        }
        Ok(Self { support, coeffs })
    }

    /// Builds a polynomial from `(k, c_k)` pairs; repeated frequencies add up.
    pub fn from_terms<I, V>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (V, Complex64)>,
        V: AsRef<[i64]>,
    {
        let mut acc: std::collections::BTreeMap<Vec<i64>, Complex64> = Default::default();
        for (k, c) in terms {
            let k = k.as_ref();
            if k.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: k.len(),
                });
            }
            *acc.entry(k.to_vec()).or_default() += c;
        }
        let support = IndexSet::new(dim, acc.keys())?;
        Ok(Self {
            support,
            coeffs: acc.into_values().collect(),
        })
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Ok(Self {
            support: IndexSet::empty(dim)?,
            coeffs: Vec::new(),
        })
    }

    pub fn constant(dim: usize, c: Complex64) -> Result<Self> {
        Self::from_terms(dim, [(vec![0; dim], c)])
    }

    /// `e^{i⟨k,x⟩}`.
    pub fn exponential(k: &[i64]) -> Result<Self> {
        Self::from_terms(k.len(), [(k, Complex64::new(1.0, 0.0))])
    }

    pub fn dim(&self) -> usize {
        self.support.dim()
    }

    pub fn support(&self) -> &IndexSet {
        &self.support
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[i64], Complex64)> + '_ {
        self.support.iter().zip(self.coeffs.iter().copied())
    }

    pub fn coeff(&self, k: &[i64]) -> Complex64 {
        self.support
            .position(k)
            .map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm_sqr() == 0.0)
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        Self {
            support: self.support.clone(),
            coeffs: self.coeffs.iter().map(|c| c * alpha).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let terms = self.terms().chain(other.terms());
        Self::from_terms(self.dim(), terms)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Direct summation of `Σ c_k e^{i⟨k,x⟩}`.
    pub fn evaluate(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let tables = AxisTables::new(&self.support.max_abs_per_axis());
        let mut buf = tables.buffer();
        tables.fill(x, &mut buf);
        Ok(tables.dot(&self.support, &self.coeffs, &buf))
    }

    /// Values at every node of `z`, in node order.
    pub fn evaluate_at(&self, z: &PointSet) -> Result<Vec<Complex64>> {
        if z.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: z.dim(),
            });
        }
        let tables = AxisTables::new(&self.support.max_abs_per_axis());
        let mut buf = tables.buffer();
        Ok(z.nodes()
            .map(|x| {
                tables.fill(x, &mut buf);
                tables.dot(&self.support, &self.coeffs, &buf)
            })
            .collect())
    }

    /// Parseval: `(Σ |c_k|²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .map(Complex64::norm_sqr)
            .sum::<f64>()
            .sqrt()
    }

    /// Coefficient file: header `dim=<d> count=<m>`, then `k_1 ... k_d re im`.
    pub fn to_text(&self) -> String {
        let mut s = format!("dim={} count={}\n", self.dim(), self.support.len());
        for (k, c) in self.terms() {
            for kj in k {
                s.push_str(&format!("{kj} "));
            }
            s.push_str(&format!("{:.16e} {:.16e}\n", c.re, c.im));
        }
        s
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let header = parse_header(&header?, 1)?;
        let dim = header.get_usize("dim", 1)?;
        let count = header.get_usize("count", 1)?;
        let mut terms = Vec::with_capacity(count);
        for (i, line) in lines {
            let line = line?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            if toks.len() != dim + 2 {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected {} columns, found {}", dim + 2, toks.len()),
                });
            }
            let perr = |e: String| Error::Parse {
                line: i + 1,
                msg: e,
            };
            let k: Vec<i64> = toks[..dim]
                .iter()
                .map(|t| t.parse::<i64>().map_err(|e| perr(e.to_string())))
                .collect::<Result<_>>()?;
            let re: f64 = toks[dim]
                .parse()
                .map_err(|e: std::num::ParseFloatError| perr(e.to_string()))?;
            let im: f64 = toks[dim + 1]
                .parse()
                .map_err(|e: std::num::ParseFloatError| perr(e.to_string()))?;
            terms.push((k, Complex64::new(re, im)));
        }
        if terms.len() != count {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header declares {count} terms, found {}", terms.len()),
            });
        }
        Self::from_terms(dim, terms)
    }
}

/// Per-axis tables of `e^{ikx_j}`, `|k| ≤ K_j`, for one point at a time.
pub(crate) struct AxisTables {
    max: Vec<i64>,
    offsets: Vec<usize>,
}

impl AxisTables {
    pub(crate) fn new(max: &[i64]) -> Self {
        let mut offsets = Vec::with_capacity(max.len());
        let mut off = 0;
        for &k in max {
            offsets.push(off);
            off += 2 * k as usize + 1;
        }
        Self {
            max: max.to_vec(),
            offsets,
        }
    }

    pub(crate) fn buffer(&self) -> Vec<Complex64> {
        let n = self.max.iter().map(|&k| 2 * k as usize + 1).sum();
        vec![Complex64::new(0.0, 0.0); n]
    }

    pub(crate) fn fill(&self, x: &[f64], buf: &mut [Complex64]) {
        for (j, (&kmax, &off)) in self.max.iter().zip(&self.offsets).enumerate() {
            for k in -kmax..=kmax {
                buf[off + (k + kmax) as usize] = Complex64::cis(k as f64 * x[j]);
            }
        }
    }

    #[inline]
    pub(crate) fn entry(&self, buf: &[Complex64], k: &[i64]) -> Complex64 {
        let mut e = buf[self.offsets[0] + (k[0] + self.max[0]) as usize];
        for j in 1..k.len() {
            e *= buf[self.offsets[j] + (k[j] + self.max[j]) as usize];
        }
        e
    }

    pub(crate) fn dot(
        &self,
        support: &IndexSet,
        coeffs: &[Complex64],
        buf: &[Complex64],
    ) -> Complex64 {
        support
            .iter()
            .zip(coeffs)
            .map(|(k, c)| c * self.entry(buf, k))
            .sum()
    }
}

/// `V_{ν,k} = e^{i⟨k,ξ^ν⟩}`, rows in node order and columns in the canonical
/// order of `q`.
pub fn exponential_matrix(q: &IndexSet, z: &PointSet) -> Result<DMatrix<Complex64>> {
    if q.dim() != z.dim() {
        return Err(Error::DimensionMismatch {
            expected: q.dim(),
            got: z.dim(),
        });
    }
    let tables = AxisTables::new(&q.max_abs_per_axis());
    let mut buf = tables.buffer();
    let mut v = DMatrix::zeros(z.len(), q.len());
    for (row, x) in z.nodes().enumerate() {
        tables.fill(x, &mut buf);
        for (col, k) in q.iter().enumerate() {
            v[(row, col)] = tables.entry(&buf, k);
        }
    }
    Ok(v)
}

/// `D_Q(x) = Σ_{k∈Q} e^{i⟨k,x⟩}`.
pub fn dirichlet_kernel(q: &IndexSet) -> TrigPolynomial {
    TrigPolynomial {
        support: q.clone(),
        coeffs: vec![Complex64::new(1.0, 0.0); q.len()],
    }
}

/// Exponent of an `L_q` norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Inf,
}

impl Exponent {
    fn even_integer(self) -> Option<u32> {
        match self {
            Exponent::Finite(q)
                if q.fract() == 0.0 && q >= 2.0 && (q as u64) % 2 == 0 && q <= 64.0 =>
            {
                Some(q as u32)
            }
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormSpec {
    pub q: Exponent,
    pub oversampling: usize,
}

impl NormSpec {
    pub fn new(q: Exponent, oversampling: usize) -> Result<Self> {
        if let Exponent::Finite(q) = q {
            if !(q >= 1.0) || !q.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "q = {q} must lie in [1, ∞)"
                )));
            }
        }
        if oversampling < 2 {
            return Err(Error::InvalidArgument(format!(
                "oversampling {oversampling} < 2"
            )));
        }
        Ok(Self { q, oversampling })
    }

    pub fn q(q: f64) -> Result<Self> {
        Self::new(Exponent::Finite(q), DEFAULT_OVERSAMPLING)
    }

    pub fn inf() -> Self {
        Self {
            q: Exponent::Inf,
            oversampling: DEFAULT_OVERSAMPLING,
        }
    }
}

/// A norm value together with how it was obtained.
#[derive(Clone, Debug, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    /// Grid points per axis.
    pub grid: Vec<usize>,
    /// True when the quadrature is exact up to roundoff (even integer `q`).
    pub exact: bool,
    /// Declared absolute accuracy of `value`.
    pub tolerance: f64,
    /// For the sup norm: a certified upper bound from Bernstein's inequality.
    pub upper_bound: Option<f64>,
}

/// `‖t‖_q`; see [`lq_norm_estimate`].
pub fn lq_norm(t: &TrigPolynomial, spec: NormSpec) -> Result<f64> {
    lq_norm_estimate(t, spec).map(|e| e.value)
}

/// `‖t‖_q` by tensor-grid quadrature.
///
/// Even integer `q`: `|t|^q` has per-axis degree `≤ qK_j`, so the rectangle
/// rule on `qK_j + 1` points per axis is exact. Otherwise the rectangle rule
/// (or grid maximum for `q = ∞`) on `oversampling·(2K_j + 1)` points.
pub fn lq_norm_estimate(t: &TrigPolynomial, spec: NormSpec) -> Result<NormEstimate> {
    let spec = NormSpec::new(spec.q, spec.oversampling)?;
    if t.support.is_empty() {
        return Ok(NormEstimate {
            value: 0.0,
            grid: vec![1; t.dim()],
            exact: true,
            tolerance: 0.0,
            upper_bound: Some(0.0),
        });
    }
    let kmax = t.support.max_abs_per_axis();
    if let Some(q) = spec.q.even_integer() {
        let grid: Vec<usize> = kmax.iter().map(|&k| q as usize * k as usize + 1).collect();
        let vals = grid_values(t, &grid)?;
        let mean = vals
            .iter()
            .map(|v| v.norm_sqr().powi(q as i32 / 2))
            .sum::<f64>()
            / vals.len() as f64;
        let value = mean.powf(1.0 / q as f64);
        return Ok(NormEstimate {
            value,
            grid,
            exact: true,
            tolerance: 1e-12 * value,
            upper_bound: None,
        });
    }
    let grid: Vec<usize> = kmax
        .iter()
        .map(|&k| spec.oversampling * (2 * k as usize + 1))
        .collect();
    let vals = grid_values(t, &grid)?;
    match spec.q {
        Exponent::Inf => {
            let value = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let slack: f64 = kmax
                .iter()
                .zip(&grid)
                .map(|(&k, &g)| PI * k as f64 / g as f64)
                .sum();
            let upper_bound = (slack < 1.0).then(|| value / (1.0 - slack));
            let tolerance = upper_bound.map_or(f64::INFINITY, |u| u - value);
            Ok(NormEstimate {
                value,
                grid,
                exact: false,
                tolerance,
                upper_bound,
            })
        }
        Exponent::Finite(q) => {
            let mean = vals.iter().map(|v| v.norm().powf(q)).sum::<f64>() / vals.len() as f64;
            let value = mean.powf(1.0 / q);
            let os = spec.oversampling as f64;
            Ok(NormEstimate {
                value,
                grid,
                exact: false,
                tolerance: 0.25 * value / (os * os),
                upper_bound: None,
            })
        }
    }
}

/// Values of `t` on the tensor grid `x_j = 2πg_j/G_j`, `0 ≤ g_j < G_j`,
/// flattened with axis 0 slowest.
///
/// Computed axis by axis from the dense coefficient box, which costs
/// `O(Π G_j · Σ (2K_j + 1))` instead of `O(Π G_j · |Q|)`.
pub fn grid_values(t: &TrigPolynomial, grid: &[usize]) -> Result<Vec<Complex64>> {
    let d = t.dim();
    if grid.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: grid.len(),
        });
    }
    if grid.iter().any(|&g| g == 0) {
        return Err(Error::InvalidArgument("empty grid axis".into()));
    }
    let total = grid
        .iter()
        .try_fold(1usize, |acc, &g| acc.checked_mul(g))
        .unwrap_or(usize::MAX);
    if total > MAX_GRID_POINTS {
        return Err(Error::CapExceeded {
            what: "grid points",
            size: total,
            cap: MAX_GRID_POINTS,
        });
    }
    let kmax = t.support.max_abs_per_axis();
    let mut shape: Vec<usize> = kmax.iter().map(|&k| 2 * k as usize + 1).collect();
    let mut data = vec![Complex64::new(0.0, 0.0); shape.iter().product()];
    for (k, c) in t.terms() {
        let mut idx = 0;
        for j in 0..d {
            idx = idx * shape[j] + (k[j] + kmax[j]) as usize;
        }
        data[idx] += c;
    }
    for j in 0..d {
        let g = grid[j];
        let n = shape[j];
        let roots: Vec<Complex64> = (0..g)
            .map(|r| Complex64::cis(TAU * r as f64 / g as f64))
            .collect();
        let mut e = vec![Complex64::new(0.0, 0.0); g * n];
        for gi in 0..g {
            for ki in 0..n {
                let k = ki as i64 - kmax[j];
                e[gi * n + ki] = roots[(k * gi as i64).rem_euclid(g as i64) as usize];
            }
        }
        data = mode_product(&data, &shape, j, &e, g);
        shape[j] = g;
    }
    Ok(data)
}

/// `out[a, g, b] = Σ_k mat[g, k] · input[a, k, b]` along `axis`.
pub(crate) fn mode_product<T>(
    input: &[T],
    shape: &[usize],
    axis: usize,
    mat: &[T],
    rows: usize,
) -> Vec<T>
where
    T: Copy + Default + std::ops::Mul<Output = T> + std::ops::AddAssign,
{
    let pre: usize = shape[..axis].iter().product();
    let n = shape[axis];
    let post: usize = shape[axis + 1..].iter().product();
    let mut out = vec![T::default(); pre * rows * post];
    for a in 0..pre {
        let inp = &input[a * n * post..(a + 1) * n * post];
        let outp = &mut out[a * rows * post..(a + 1) * rows * post];
        for g in 0..rows {
            let orow = &mut outp[g * post..(g + 1) * post];
            let mrow = &mat[g * n..(g + 1) * n];
            for (k, &m) in mrow.iter().enumerate() {
                let irow = &inp[k * post..(k + 1) * post];
                for (o, &i) in orow.iter_mut().zip(irow) {
                    *o += m * i;
                }
            }
        }
    }
    out
}

/// `‖t‖_∞ / ‖t‖_q`, both by grid quadrature with the default oversampling.
pub fn nikolskii_ratio(t: &TrigPolynomial, q: f64) -> Result<f64> {
    if t.is_zero() {
        return Err(Error::ZeroPolynomial("Nikol'skii ratio"));
    }
    let sup = lq_norm(t, NormSpec::inf())?;
    let lq = lq_norm(t, NormSpec::q(q)?)?;
    Ok(sup / lq)
}

/// Random coefficient ensembles used as test populations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ensemble {
    /// i.i.d. complex Gaussian coefficients with `E|c_k|² = 1`.
    GaussianCoeffs,
    /// Gaussian coefficients rescaled so that `‖t‖₁ = 1/2`.
    UnitL1Normalized,
    /// Gaussian coefficients rescaled so that `‖t‖_q = 1/2`.
    UnitLqNormalized(f64),
}

/// Deterministic in `seed`. With `real = true` the coefficients satisfy
/// `c_{−k} = conj(c_k)` whenever both `k` and `−k` lie in `q`.
pub fn random_polynomial(
    q: &IndexSet,
    seed: u64,
    ensemble: Ensemble,
    real: bool,
) -> Result<TrigPolynomial> {
    if q.is_empty() {
        return Err(Error::InvalidArgument(
            "random polynomial on an empty set".into(),
        ));
    }
    let target_q = match ensemble {
        Ensemble::GaussianCoeffs => None,
        Ensemble::UnitL1Normalized => Some(1.0),
        Ensemble::UnitLqNormalized(p) => Some(p),
    };
    // Normalization can only fail on a probability-zero draw; move on to the
    // next seed when it does.
    for attempt in 0..16u64 {
        let t = gaussian_polynomial(q, seed.wrapping_add(attempt), real);
        let Some(p) = target_q else { return Ok(t) };
        let norm = lq_norm(&t, NormSpec::q(p)?)?;
        if norm > 0.0 && norm.is_finite() {
            return Ok(t.scale(Complex64::new(0.5 / norm, 0.0)));
        }
    }
    Err(Error::ZeroPolynomial("normalization of random polynomial"))
}

fn gaussian_polynomial(q: &IndexSet, seed: u64, real: bool) -> TrigPolynomial {
    let mut rng = rng::stream(seed, 0);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut coeffs: Vec<Complex64> = (0..q.len())
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * s, im * s)
        })
        .collect();
    if real {
        for i in 0..q.len() {
            let k = q.get(i);
            let neg: Vec<i64> = k.iter().map(|c| -c).collect();
            match q.position(&neg) {
                Some(j) if j == i => coeffs[i] = Complex64::new(coeffs[i].norm(), 0.0),
                Some(j) if j < i => coeffs[i] = coeffs[j].conj(),
                _ => {}
            }
        }
    }
    TrigPolynomial {
        support: q.clone(),
        coeffs,
    }
}
