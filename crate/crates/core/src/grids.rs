//! Classical tensor grids for the box `Π(N)`.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::polynomial::TrigPolynomial;

pub use crate::pointset::PointSet;

/// Relative tolerance of the exact `L₂` grid identity.
pub const EXACT_L2_TOL: f64 = 1e-10;

/// Number of nodes of `full_grid(N)`: `ϑ(N) = Π (2N_j + 1)`.
pub fn full_grid_size(n: &[u32]) -> usize {
    n.iter().map(|&k| 2 * k as usize + 1).product()
}

/// Number of nodes of `oversampled_grid(N)`: `ν(4N) = Π max(4N_j, 1)`.
pub fn oversampled_grid_size(n: &[u32]) -> usize {
    n.iter().map(|&k| (4 * k as usize).max(1)).product()
}

/// Tensor product of per-axis coordinate lists, last axis fastest.
fn tensor(axes: &[Vec<f64>]) -> PointSet {
    let d = axes.len();
    let total: usize = axes.iter().map(Vec::len).product();
    let mut coords = Vec::with_capacity(total * d);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        for j in 0..d {
            coords.push(axes[j][idx[j]]);
        }
        for j in (0..d).rev() {
            idx[j] += 1;
            if idx[j] < axes[j].len() {
                break;
            }
            idx[j] = 0;
        }
    }
    PointSet::from_flat(d, coords, vec![1.0 / total as f64; total])
}

/// Nodes `x^n = (2πn_j/(2N_j+1))_j`, `0 ≤ n_j ≤ 2N_j`, weights `1/ϑ(N)`.
pub fn full_grid(n: &[u32]) -> Result<PointSet> {
    if n.is_empty() {
        return Err(Error::ZeroDimension);
    }
    let axes: Vec<Vec<f64>> = n
        .iter()
        .map(|&k| {
            let g = 2 * k as usize + 1;
            (0..g).map(|i| TAU * i as f64 / g as f64).collect()
        })
        .collect();
    Ok(tensor(&axes))
}

/// Nodes `x(n) = (πn_j/(2N_j))_j`, `1 ≤ n_j ≤ 4N_j` (coordinate 0 when
/// `N_j = 0`), weights `1/ν(4N)`. The node `2π` is reduced to 0 and kept.
pub fn oversampled_grid(n: &[u32]) -> Result<PointSet> {
    if n.is_empty() {
        return Err(Error::ZeroDimension);
    }
    let axes: Vec<Vec<f64>> = n
        .iter()
        .map(|&k| {
            if k == 0 {
                vec![0.0]
            } else {
                (1..=4 * k as usize)
                    .map(|i| crate::pointset::reduce_angle(PI * i as f64 / (2.0 * k as f64)))
                    .collect()
            }
        })
        .collect();
    Ok(tensor(&axes))
}

/// `|Σ_ν w_ν |t(x^ν)|² − ‖t‖₂²|` on `grid = full_grid(N)`.
///
/// Rejects `t` whose spectrum leaves `Π(N)`, where the grid aliases.
pub fn exact_l2_check(t: &TrigPolynomial, n: &[u32], grid: &PointSet) -> Result<f64> {
    if t.dim() != n.len() || grid.dim() != n.len() {
        return Err(Error::DimensionMismatch {
            expected: n.len(),
            got: t.dim().min(grid.dim()),
        });
    }
    if grid.len() != full_grid_size(n) {
        return Err(Error::InvalidArgument(format!(
            "grid has {} nodes, full grid for N={n:?} has {}",
            grid.len(),
            full_grid_size(n)
        )));
    }
    for (k, c) in t.terms() {
        if c.norm_sqr() != 0.0 && k.iter().zip(n).any(|(kj, &nj)| kj.abs() > nj as i64) {
            return Err(Error::SpectrumViolation(format!("{k:?} outside Π({n:?})")));
        }
    }
    let vals = t.evaluate_at(grid)?;
    let disc: f64 = vals
        .iter()
        .zip(grid.weights())
        .map(|(v, w)| w * v.norm_sqr())
        .sum();
    Ok((disc - t.l2_norm().powi(2)).abs())
}
