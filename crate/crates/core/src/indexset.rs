//! Finite frequency sets in `Z^d`: dyadic blocks, step hyperbolic crosses,
//! boxes and difference sets.
//!
//! An [`IndexSet`] is stored as an explicit, lexicographically sorted list of
//! integer vectors. The ordering is canonical, so the text serialization (and
//! any hash of it) is reproducible across runs.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A finite set of frequency vectors of a fixed dimension.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IndexSet {
    dim: usize,
    /// Flat storage, `dim` components per vector, lexicographically sorted.
    data: Vec<i64>,
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IndexSet")
            .field("dim", &self.dim)
            .field("len", &self.len())
            .finish()
    }
}

impl IndexSet {
    /// Builds a set from arbitrary vectors; duplicates are removed and the
    /// result is put in canonical order.
    pub fn new<I, V>(dim: usize, vectors: I) -> Result<Self>
    where
        I: IntoIterator<Item = V>,
        V: AsRef<[i64]>,
    {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut rows: Vec<Vec<i64>> = Vec::new();
        for v in vectors {
            let v = v.as_ref();
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            rows.push(v.to_vec());
        }
        Ok(Self::from_rows_unchecked(dim, rows))
    }

    /// The empty set in dimension `dim`.
    pub fn empty(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self {
            dim,
            data: Vec::new(),
        })
    }

    fn from_rows_unchecked(dim: usize, mut rows: Vec<Vec<i64>>) -> Self {
        rows.sort_unstable();
        rows.dedup();
        let data = rows.into_iter().flatten().collect();
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// The `i`-th vector in canonical order.
    pub fn get(&self, i: usize) -> &[i64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[i64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    /// Position of `k` in canonical order, if present.
    pub fn position(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dim {
            return None;
        }
        let (mut lo, mut hi) = (0usize, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.get(mid).cmp(k) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub fn contains(&self, k: &[i64]) -> bool {
        self.position(k).is_some()
    }

    /// Largest `|k_j|` over all vectors and components (0 for the empty set).
    pub fn max_abs(&self) -> i64 {
        self.data.iter().map(|x| x.abs()).max().unwrap_or(0)
    }

    /// Per-axis maximum of `|k_j|`.
    pub fn max_abs_per_axis(&self) -> Vec<i64> {
        let mut out = vec![0; self.dim];
        for k in self.iter() {
            for (o, &c) in out.iter_mut().zip(k) {
                *o = (*o).max(c.abs());
            }
        }
        out
    }

    pub fn is_subset_of(&self, other: &IndexSet) -> bool {
        self.dim == other.dim && self.iter().all(|k| other.contains(k))
    }

    pub fn union(&self, other: &IndexSet) -> Result<IndexSet> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let rows = self
            .iter()
            .chain(other.iter())
            .map(<[i64]>::to_vec)
            .collect();
        Ok(Self::from_rows_unchecked(self.dim, rows))
    }

    /// Restriction to vectors with all components nonnegative (`Q^+`).
    pub fn positive_part(&self) -> IndexSet {
        let data = self
            .iter()
            .filter(|k| k.iter().all(|&c| c >= 0))
            .flatten()
            .copied()
            .collect();
        IndexSet {
            dim: self.dim,
            data,
        }
    }

    /// `Λ(Q) = {m − k : m, k ∈ Q}`.
    pub fn difference_set(&self) -> IndexSet {
        let mut seen: HashSet<Vec<i64>> = HashSet::with_capacity(self.len() * 4);
        for m in self.iter() {
            for k in self.iter() {
                seen.insert(m.iter().zip(k).map(|(a, b)| a - b).collect());
            }
        }
        Self::from_rows_unchecked(self.dim, seen.into_iter().collect())
    }

    /// Canonical text serialization: header `dim=<d> count=<m>` followed by
    /// one space-separated vector per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("dim={} count={}\n", self.dim, self.len());
        for k in self.iter() {
            let line: Vec<String> = k.iter().map(i64::to_string).collect();
            s.push_str(&line.join(" "));
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
        let mut rows = Vec::with_capacity(count);
        for (i, line) in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row: Vec<i64> = line
                .split_whitespace()
                .map(|t| t.parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse {
                    line: i + 1,
                    msg: e.to_string(),
                })?;
            if row.len() != dim {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected {dim} components, found {}", row.len()),
                });
            }
            rows.push(row);
        }
        if rows.len() != count {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header declares {count} vectors, found {}", rows.len()),
            });
        }
        IndexSet::new(dim, rows)
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn canonical_hash(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// `ρ(s) = {k : [2^{s_j−1}] ≤ |k_j| < 2^{s_j}}`.
pub fn dyadic_block(s: &[u32]) -> Result<IndexSet> {
    if s.is_empty() {
        return Err(Error::ZeroDimension);
    }
    let axes: Vec<Vec<i64>> = s.iter().map(|&sj| dyadic_axis(sj)).collect::<Result<_>>()?;
    Ok(IndexSet::from_rows_unchecked(s.len(), cartesian(&axes)))
}

fn dyadic_axis(s: u32) -> Result<Vec<i64>> {
    if s > 40 {
        return Err(Error::InvalidArgument(format!(
            "dyadic level {s} too large"
        )));
    }
    if s == 0 {
        return Ok(vec![0]);
    }
    let lo = 1i64 << (s - 1);
    let hi = 1i64 << s;
    Ok((lo..hi).flat_map(|k| [-k, k]).collect())
}

fn cartesian(axes: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut rows: Vec<Vec<i64>> = vec![Vec::with_capacity(axes.len())];
    for axis in axes {
        let mut next = Vec::with_capacity(rows.len() * axis.len());
        for r in &rows {
            for &c in axis {
                let mut v = r.clone();
                v.push(c);
                next.push(v);
            }
        }
        rows = next;
    }
    rows
}

/// All `s ∈ Z_+^d` with `s_1 + … + s_d ≤ n`, in lexicographic order.
pub fn levels_up_to(n: u32, d: usize) -> Vec<Vec<u32>> {
    fn rec(n: u32, d: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == d {
            out.push(prefix.clone());
            return;
        }
        let used: u32 = prefix.iter().sum();
        for s in 0..=(n - used) {
            prefix.push(s);
            rec(n, d, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if d > 0 {
        rec(n, d, &mut Vec::with_capacity(d), &mut out);
    }
    out
}

/// Step hyperbolic cross `Q_n = ∪_{‖s‖₁ ≤ n} ρ(s)`.
pub fn hyperbolic_cross(n: u32, d: usize) -> Result<IndexSet> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    let mut rows = Vec::new();
    for s in levels_up_to(n, d) {
        let axes: Vec<Vec<i64>> = s.iter().map(|&sj| dyadic_axis(sj)).collect::<Result<_>>()?;
        rows.extend(cartesian(&axes));
    }
    Ok(IndexSet::from_rows_unchecked(d, rows))
}

/// Full box `Π(N) = [−N_1, N_1] × … × [−N_d, N_d]`.
pub fn box_set(n: &[u32]) -> Result<IndexSet> {
    if n.is_empty() {
        return Err(Error::ZeroDimension);
    }
    let axes: Vec<Vec<i64>> = n
        .iter()
        .map(|&nj| (-(nj as i64)..=nj as i64).collect())
        .collect();
    Ok(IndexSet::from_rows_unchecked(n.len(), cartesian(&axes)))
}

/// `ϑ(N) = ∏ (2N_j + 1)`.
pub fn box_cardinality(n: &[u32]) -> usize {
    n.iter().map(|&nj| 2 * nj as usize + 1).product()
}

pub(crate) struct Header(Vec<(String, String)>);

impl Header {
    pub(crate) fn get(&self, key: &str, line: usize) -> Result<&str> {
        self.0
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| Error::Parse {
                line,
                msg: format!("missing `{key}` in header"),
            })
    }

    pub(crate) fn get_usize(&self, key: &str, line: usize) -> Result<usize> {
        self.get(key, line)?.parse().map_err(|e| Error::Parse {
            line,
            msg: format!("`{key}`: {e}"),
        })
    }
}

/// Parses `key=value key=value ...`.
pub(crate) fn parse_header(line: &str, lineno: usize) -> Result<Header> {
    let mut out = Vec::new();
    for tok in line.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| Error::Parse {
            line: lineno,
            msg: format!("bad header token `{tok}`"),
        })?;
        out.push((k.to_string(), v.to_string()));
    }
    Ok(Header(out))
}
