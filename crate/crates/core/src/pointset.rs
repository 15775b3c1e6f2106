use std::f64::consts::TAU;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::indexset::parse_header;

/// Nodes on the torus `[0, 2π)^d` with nonnegative weights.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    dim: usize,
    /// Flat storage, `dim` coordinates per node.
    coords: Vec<f64>,
    weights: Vec<f64>,
}

/// Reduces an angle into `[0, 2π)`.
pub fn reduce_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl PointSet {
    pub fn new<V: AsRef<[f64]>>(dim: usize, nodes: &[V], weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if nodes.len() != weights.len() {
            return Err(Error::InvalidArgument(format!(
                "{} nodes but {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidArgument(format!("invalid weight {w}")));
        }
        let mut coords = Vec::with_capacity(nodes.len() * dim);
        for x in nodes {
            let x = x.as_ref();
            if x.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: x.len(),
                });
            }
            coords.extend(x.iter().map(|&c| reduce_angle(c)));
        }
        Ok(Self {
            dim,
            coords,
            weights,
        })
    }

    /// Equal weights `1/m`.
    pub fn equal_weight<V: AsRef<[f64]>>(dim: usize, nodes: &[V]) -> Result<Self> {
        let m = nodes.len();
        Self::new(dim, nodes, vec![1.0 / m.max(1) as f64; m])
    }

    pub(crate) fn from_flat(dim: usize, coords: Vec<f64>, weights: Vec<f64>) -> Self {
        debug_assert_eq!(coords.len(), dim * weights.len());
        Self {
            dim,
            coords,
            weights,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights sum to one.
    pub fn is_normalized(&self) -> bool {
        let s: f64 = self.weights.iter().sum();
        (s - 1.0).abs() <= 1e-12 * (self.len().max(1) as f64)
    }

    /// All weights equal `1/m`.
    pub fn is_equal_weight(&self) -> bool {
        let m = self.len() as f64;
        self.weights.iter().all(|w| (w * m - 1.0).abs() <= 1e-12)
    }

    /// Same nodes, new weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        let nodes: Vec<&[f64]> = self.nodes().collect();
        Self::new(self.dim, &nodes, weights)
    }

    /// Text format: header `dim=<d> count=<m> normalized=<bool>`, then one
    /// line `w x_1 ... x_d` per node with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "dim={} count={} normalized={}\n",
            self.dim,
            self.len(),
            self.is_normalized()
        );
        for (w, x) in self.weights.iter().zip(self.nodes()) {
            s.push_str(&format!("{w:.16e}"));
            for c in x {
                s.push_str(&format!(" {c:.16e}"));
            }
            s.push('\n');
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
        let mut nodes = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(str::parse::<f64>)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse {
                    line: i + 1,
                    msg: e.to_string(),
                })?;
            if vals.len() != dim + 1 {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected {} columns, found {}", dim + 1, vals.len()),
                });
            }
            weights.push(vals[0]);
            nodes.push(vals[1..].to_vec());
        }
        if nodes.len() != count {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header declares {count} nodes, found {}", nodes.len()),
            });
        }
        PointSet::new(dim, &nodes, weights)
    }
}
