//! Korobov lattices `ξ^ν = 2π({ν a^{j−1}/p})_j` giving exact `L₂`
//! discretization on an arbitrary frequency set.

use std::f64::consts::TAU;
use std::io::BufRead;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::indexset::{parse_header, IndexSet};
use crate::linalg::weighted_exponential_sums;
use crate::pointset::PointSet;
use crate::polynomial::{exponential_matrix, grid_values, TrigPolynomial};

/// Tolerance for the cubature identity.
pub const CUBATURE_TOL: f64 = 1e-10;

/// Projection checks are refused above this many nodes.
pub const PROJECTION_MAX_P: u64 = 2000;

/// Prime `p`, generator `a` and the dimension they serve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KorobovParams {
    pub p: u64,
    pub a: u64,
    pub dim: usize,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut f = 3;
    while f * f <= n {
        if n % f == 0 {
            return false;
        }
        f += 2;
    }
    true
}

/// Smallest prime strictly greater than `n`.
pub fn next_prime(n: u64) -> u64 {
    let mut c = n + 1;
    while !is_prime(c) {
        c += 1;
    }
    c
}

/// Smallest prime with `lambda_size < (p − 1)/d`, i.e. `p > d·lambda_size + 1`.
pub fn smallest_admissible_prime(lambda_size: usize, d: usize) -> Result<u64> {
    if lambda_size == 0 {
        return Err(Error::InvalidArgument(
            "lambda_size must be at least 1".into(),
        ));
    }
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    Ok(next_prime((d * lambda_size + 1) as u64))
}

/// `Σ_j a^{j−1} m_j mod p` by Horner's rule.
fn residue(m: &[i64], a: u64, p: u64) -> u64 {
    let p128 = p as i128;
    let mut acc: i128 = 0;
    for &mj in m.iter().rev() {
        acc = (acc * a as i128 + mj as i128).rem_euclid(p128);
    }
    acc as u64
}

fn check_coordinates(lambda: &IndexSet, p: u64) -> Result<()> {
    if lambda.max_abs() >= p as i64 {
        return Err(Error::InvalidArgument(format!(
            "|m_j| = {} is not below p = {p}",
            lambda.max_abs()
        )));
    }
    Ok(())
}

/// Number of nonzero `m ∈ Λ` with `Σ_j a^{j−1} m_j ≡ 0 (mod p)`.
pub fn count_violations(lambda: &IndexSet, p: u64, a: u64) -> usize {
    lambda
        .iter()
        .filter(|m| m.iter().any(|&c| c != 0) && residue(m, a, p) == 0)
        .count()
}

/// Smallest `a ∈ [1, p)` for which no nonzero `m ∈ Λ` satisfies the
/// congruence `m_1 + a m_2 + … + a^{d−1} m_d ≡ 0 (mod p)`.
pub fn find_generator(lambda: &IndexSet, p: u64) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not prime")));
    }
    check_coordinates(lambda, p)?;
    let nonzero: Vec<&[i64]> = lambda
        .iter()
        .filter(|m| m.iter().any(|&c| c != 0))
        .collect();
    // The last offender of the previous candidate is tried first; bad
    // candidates usually fail on the same few vectors.
    let mut hot = 0usize;
    'candidates: for a in 1..p {
        if !nonzero.is_empty() && residue(nonzero[hot], a, p) == 0 {
            continue;
        }
        for (i, m) in nonzero.iter().enumerate() {
            if residue(m, a, p) == 0 {
                hot = i;
                continue 'candidates;
            }
        }
        return Ok(a);
    }
    Err(Error::NoGenerator { p })
}

/// Number of `a ∈ [1, p)` solving `Σ_j a^{j−1} m_j ≡ 0 (mod p)`.
pub fn root_count(m: &[i64], p: u64) -> usize {
    (1..p).filter(|&a| residue(m, a, p) == 0).count()
}

/// `p` nodes with weights `1/p`; node `ν = 1..p` has coordinates
/// `2π·((ν a^{j−1} mod p)/p)`.
pub fn korobov_nodes(params: KorobovParams) -> Result<PointSet> {
    let KorobovParams { p, a, dim } = params;
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    if !is_prime(p) || a == 0 || a >= p {
        return Err(Error::InvalidArgument(format!(
            "invalid Korobov parameters p={p} a={a}"
        )));
    }
    let mut powers = Vec::with_capacity(dim);
    let mut pw = 1u64;
    for _ in 0..dim {
        powers.push(pw);
        pw = ((pw as u128 * a as u128) % p as u128) as u64;
    }
    let mut coords = Vec::with_capacity(p as usize * dim);
    for nu in 1..=p {
        for &pj in &powers {
            let r = ((nu as u128 * pj as u128) % p as u128) as u64;
            coords.push(TAU * r as f64 / p as f64);
        }
    }
    Ok(PointSet::from_flat(
        dim,
        coords,
        vec![1.0 / p as f64; p as usize],
    ))
}

/// `max_{m∈Λ} |Σ_ν w_ν e^{i⟨m,ξ^ν⟩} − [m = 0]|`.
pub fn cubature_exactness(lambda: &IndexSet, nodes: &PointSet) -> Result<f64> {
    let sums = weighted_exponential_sums(lambda, nodes)?;
    Ok(lambda
        .iter()
        .zip(sums)
        .map(|(m, s)| {
            let target = if m.iter().all(|&c| c == 0) { 1.0 } else { 0.0 };
            (s - Complex64::new(target, 0.0)).norm()
        })
        .fold(0.0, f64::max))
}

fn require_certified(q: &IndexSet, nodes: &PointSet) -> Result<()> {
    if !nodes.is_equal_weight() {
        return Err(Error::Uncertified("nodes are not equally weighted".into()));
    }
    let defect = cubature_exactness(&q.difference_set(), nodes)?;
    if !(defect <= CUBATURE_TOL) {
        return Err(Error::Uncertified(format!(
            "cubature defect {defect:e} on Λ(Q)"
        )));
    }
    Ok(())
}

/// Coefficients of `T(t) = (1/p) Σ_ν t(ξ^ν) D_Q(· − ξ^ν)` on `Q`.
pub fn reproduce_coefficients(
    t: &TrigPolynomial,
    nodes: &PointSet,
    q: &IndexSet,
) -> Result<TrigPolynomial> {
    let vals = t.evaluate_at(nodes)?;
    let v = exponential_matrix(q, nodes)?;
    let w = nodes.weights();
    let coeffs: Vec<Complex64> = (0..q.len())
        .map(|k| {
            (0..nodes.len())
                .map(|nu| v[(nu, k)].conj() * vals[nu] * w[nu])
                .sum()
        })
        .collect();
    TrigPolynomial::from_coeffs(q.clone(), coeffs)
}

/// Maximum of `|T(t, x) − t(x)|` over a grid with `2K_j + 1` points per axis
/// of the spectrum of the difference.
pub fn reproduce(t: &TrigPolynomial, nodes: &PointSet, q: &IndexSet) -> Result<f64> {
    if t.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: q.dim(),
            got: t.dim(),
        });
    }
    for (k, c) in t.terms() {
        if c.norm_sqr() != 0.0 && !q.contains(k) {
            return Err(Error::SpectrumViolation(format!("{k:?} not in Q")));
        }
    }
    require_certified(q, nodes)?;
    let diff = reproduce_coefficients(t, nodes, q)?.sub(t)?;
    if diff.support().is_empty() {
        return Ok(0.0);
    }
    let grid: Vec<usize> = diff
        .support()
        .max_abs_per_axis()
        .iter()
        .map(|&k| 2 * k as usize + 1)
        .collect();
    Ok(grid_values(&diff, &grid)?
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max))
}

/// `D_{ν′,ν} = (1/p) D_Q(ξ^{ν′} − ξ^ν)`.
pub fn projection_matrix(nodes: &PointSet, q: &IndexSet) -> Result<DMatrix<Complex64>> {
    if nodes.len() as u64 > PROJECTION_MAX_P {
        return Err(Error::CapExceeded {
            what: "p",
            size: nodes.len(),
            cap: PROJECTION_MAX_P as usize,
        });
    }
    require_certified(q, nodes)?;
    let v = exponential_matrix(q, nodes)?;
    Ok((&v * v.adjoint()).scale(1.0 / nodes.len() as f64))
}

/// `Λ(Q)`, then the smallest admissible prime (advanced until every
/// coordinate of `Λ` is below it), its generator and the nodes.
pub fn exact_discretization(q: &IndexSet) -> Result<(KorobovParams, PointSet)> {
    if q.is_empty() {
        return Err(Error::InvalidArgument("empty frequency set".into()));
    }
    let lambda = q.difference_set();
    let mut p = smallest_admissible_prime(lambda.len(), q.dim())?;
    while lambda.max_abs() >= p as i64 {
        p = next_prime(p);
    }
    let a = find_generator(&lambda, p)?;
    let params = KorobovParams { p, a, dim: q.dim() };
    Ok((params, korobov_nodes(params)?))
}

/// Binds Korobov parameters to the canonical serialization of `Λ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub params: KorobovParams,
    pub lambda_hash: String,
}

impl Certificate {
    pub fn new(params: KorobovParams, lambda: &IndexSet) -> Self {
        Self {
            params,
            lambda_hash: lambda.canonical_hash(),
        }
    }

    pub fn to_text(&self) -> String {
        let KorobovParams { p, a, dim } = self.params;
        format!("p={p} a={a} dim={dim} lambda_hash={}\n", self.lambda_hash)
    }

    pub fn read_from<R: BufRead>(mut r: R) -> Result<Self> {
        let mut line = String::new();
        r.read_line(&mut line)?;
        let h = parse_header(line.trim(), 1)?;
        let num = |key: &str| -> Result<u64> {
            h.get(key, 1)?
                .parse()
                .map_err(|e: std::num::ParseIntError| Error::Parse {
                    line: 1,
                    msg: format!("{key}: {e}"),
                })
        };
        Ok(Self {
            params: KorobovParams {
                p: num("p")?,
                a: num("a")?,
                dim: h.get_usize("dim", 1)?,
            },
            lambda_hash: h.get("lambda_hash", 1)?.to_string(),
        })
    }

    /// Checks the hash, the generator and that `nodes` are exact on `Λ(Q)`.
    pub fn verify(&self, q: &IndexSet, nodes: &PointSet) -> Result<f64> {
        let lambda = q.difference_set();
        if lambda.canonical_hash() != self.lambda_hash {
            return Err(Error::Uncertified("lambda hash does not match".into()));
        }
        if self.params.dim != q.dim() || nodes.dim() != q.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.params.dim,
                got: q.dim(),
            });
        }
        if lambda.max_abs() >= self.params.p as i64 {
            return Err(Error::Uncertified("coordinates of Λ not below p".into()));
        }
        let v = count_violations(&lambda, self.params.p, self.params.a);
        if v > 0 {
            return Err(Error::Uncertified(format!("{v} congruence violations")));
        }
        if nodes.len() as u64 != self.params.p || !nodes.is_equal_weight() {
            return Err(Error::Uncertified(
                "node count or weights do not match p".into(),
            ));
        }
        let defect = cubature_exactness(&lambda, nodes)?;
        if !(defect <= CUBATURE_TOL) {
            return Err(Error::Uncertified(format!("cubature defect {defect:e}")));
        }
        Ok(defect)
    }
}
