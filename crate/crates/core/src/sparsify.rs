//! Weighted subsampling of tight frames: the barrier-potential sparsifier
//! and a toy-scale exhaustive subset search.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::indexset::IndexSet;
use crate::linalg::hermitian_eigen;
use crate::pointset::PointSet;
use crate::polynomial::exponential_matrix;
use crate::rng::stream;

/// Tolerance of the tight-frame and equal-norm invariants.
pub const FRAME_TOL: f64 = 1e-10;

/// Largest frame handled by the exhaustive subset search.
pub const EXHAUSTIVE_MAX: usize = 20;

/// Largest frame handled by the greedy subset search.
pub const GREEDY_MAX: usize = 200;

#[derive(Clone, Debug, PartialEq)]
pub enum FrameSource {
    /// `v_j = M^{−1/2}(e^{i⟨k,x^j⟩})_{k∈Q}`.
    Grid {
        set: IndexSet,
        nodes: PointSet,
    },
    Explicit,
}

/// `M` vectors in `C^N` with `Σ_j v_j v_j* = I`.
#[derive(Clone, Debug)]
pub struct FrameSystem {
    /// `N × M`, one frame vector per column.
    vectors: DMatrix<Complex64>,
    equal_norm: bool,
    source: FrameSource,
}

impl FrameSystem {
    /// Rejects systems whose frame operator differs from `I` by more than
    /// [`FRAME_TOL`] in Frobenius norm.
    pub fn new(vectors: DMatrix<Complex64>, source: FrameSource) -> Result<Self> {
        let (n, m) = vectors.shape();
        if n == 0 || m == 0 {
            return Err(Error::InvalidArgument("empty frame".into()));
        }
        let s = &vectors * vectors.adjoint();
        let residual = (s - DMatrix::<Complex64>::identity(n, n)).norm();
        if !(residual <= FRAME_TOL) {
            return Err(Error::NotTightFrame { residual });
        }
        let target = n as f64 / m as f64;
        let equal_norm = vectors
            .column_iter()
            .all(|c| (c.norm_squared() - target).abs() <= FRAME_TOL);
        Ok(Self {
            vectors,
            equal_norm,
            source,
        })
    }

    pub fn n(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn m(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn vectors(&self) -> &DMatrix<Complex64> {
        &self.vectors
    }

    /// All `‖v_j‖² = N/M`.
    pub fn equal_norm(&self) -> bool {
        self.equal_norm
    }

    pub fn source(&self) -> &FrameSource {
        &self.source
    }

    /// `Σ_j c_j v_j v_j*`.
    pub fn weighted_operator(&self, c: &[f64]) -> DMatrix<Complex64> {
        let mut scaled = self.vectors.clone();
        for (j, &w) in c.iter().enumerate() {
            scaled.column_mut(j).scale_mut(w);
        }
        scaled * self.vectors.adjoint()
    }
}

/// Frame of normalized exponentials sampled at an equally weighted grid.
pub fn frame_from_grid(set: &IndexSet, grid: &PointSet) -> Result<FrameSystem> {
    if !grid.is_equal_weight() {
        return Err(Error::InvalidArgument(
            "grid must carry equal weights".into(),
        ));
    }
    let v = exponential_matrix(set, grid)?;
    let scaled = v.transpose().scale(1.0 / (grid.len() as f64).sqrt());
    FrameSystem::new(
        scaled,
        FrameSource::Grid {
            set: set.clone(),
            nodes: grid.clone(),
        },
    )
}

/// The rows of a random `M × N` matrix with orthonormal columns, conjugated.
pub fn random_tight_frame(n: usize, m: usize, seed: u64) -> Result<FrameSystem> {
    if n == 0 || m < n {
        return Err(Error::InvalidArgument(format!(
            "need 1 ≤ N ≤ M, got N={n}, M={m}"
        )));
    }
    let mut rng = stream(seed, 0);
    let a = DMatrix::from_fn(m, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    let q = a.qr().q();
    FrameSystem::new(q.adjoint(), FrameSource::Explicit)
}

/// `(d + 1 + 2√d)/(d + 1 − 2√d)`.
pub fn bss_ratio_bound(oversample: f64) -> f64 {
    let s = oversample.sqrt();
    (oversample + 1.0 + 2.0 * s) / (oversample + 1.0 - 2.0 * s)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BssResult {
    /// `s_j/λ_min`, so that `I ≤ Σ_j w_j v_j v_j* ≤ κI`.
    pub weights: Vec<f64>,
    pub kappa: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub steps: usize,
}

impl BssResult {
    pub fn nonzeros(&self) -> usize {
        self.weights.iter().filter(|&&w| w != 0.0).count()
    }

    /// For grid frames: node weights `w_j/M`, which satisfy
    /// `‖f‖₂² ≤ Σ_j w_j|f(x^j)|²/M ≤ κ‖f‖₂²` on the frequency set.
    pub fn weighted_points(&self, frame: &FrameSystem) -> Option<Result<PointSet>> {
        match frame.source() {
            FrameSource::Grid { nodes, .. } => {
                let m = frame.m() as f64;
                Some(nodes.with_weights(self.weights.iter().map(|w| w / m).collect()))
            }
            FrameSource::Explicit => None,
        }
    }
}

/// Barrier-potential sparsification with `⌈dN⌉` rank-one steps.
///
/// Each step picks the vector with the largest margin `L_A(v) − U_A(v)`
/// (lowest index on ties) and adds it with weight `2/(U_A(v) + L_A(v))`.
pub fn bss_sparsify(frame: &FrameSystem, oversample: f64) -> Result<BssResult> {
    if !(oversample > 1.0) || !oversample.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "oversample {oversample} must exceed 1"
        )));
    }
    let n = frame.n();
    let m = frame.m();
    let nf = n as f64;
    let sd = oversample.sqrt();
    let delta_l = 1.0;
    let delta_u = (sd + 1.0) / (sd - 1.0);
    let eps_l = 1.0 / sd;
    let eps_u = (sd - 1.0) / (oversample + sd);
    let mut l = -nf / eps_l;
    let mut u = nf / eps_u;
    let steps = (oversample * nf - 1e-9).ceil() as usize;

    let v = frame.vectors();
    let mut s = vec![0.0f64; m];
    let mut a = DMatrix::<Complex64>::zeros(n, n);
    for step in 0..steps {
        let eig = hermitian_eigen(&a)?;
        let (u1, l1) = (u + delta_u, l + delta_l);
        let phi_u: f64 = eig.values.iter().map(|x| 1.0 / (u - x)).sum();
        let phi_u1: f64 = eig.values.iter().map(|x| 1.0 / (u1 - x)).sum();
        let phi_l: f64 = eig.values.iter().map(|x| 1.0 / (x - l)).sum();
        let phi_l1: f64 = eig.values.iter().map(|x| 1.0 / (x - l1)).sum();
        let (du, dl) = (phi_u - phi_u1, phi_l1 - phi_l);
        if !(du > 0.0 && dl > 0.0) {
            return Err(Error::BarrierStall {
                step,
                detail: format!("potential gaps {du:e}, {dl:e}"),
            });
        }
        let w = eig.vectors.adjoint() * v;
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..m {
            let (mut ru1, mut ru2, mut rl1, mut rl2) = (0.0, 0.0, 0.0, 0.0);
            for (i, &x) in eig.values.iter().enumerate() {
                let c = w[(i, j)].norm_sqr();
                let iu = 1.0 / (u1 - x);
                let il = 1.0 / (x - l1);
                ru1 += c * iu;
                ru2 += c * iu * iu;
                rl1 += c * il;
                rl2 += c * il * il;
            }
            let up = ru2 / du + ru1;
            let lo = rl2 / dl - rl1;
            let margin = lo - up;
            if up > 0.0 && margin >= 0.0 && best.map_or(true, |(_, bm, _)| margin > bm) {
                best = Some((j, margin, 2.0 / (up + lo)));
            }
        }
        let Some((j, _, t)) = best else {
            return Err(Error::BarrierStall {
                step,
                detail: "no vector with U ≤ L".into(),
            });
        };
        s[j] += t;
        let col = v.column(j);
        a += (&col * col.adjoint()).scale(t);
        u = u1;
        l = l1;
    }
    let eig = hermitian_eigen(&frame.weighted_operator(&s))?;
    let (lambda_min, lambda_max) = (eig.min(), eig.max());
    if !(lambda_min > 0.0) {
        return Err(Error::BarrierStall {
            step: steps,
            detail: format!("λ_min = {lambda_min:e}"),
        });
    }
    Ok(BssResult {
        weights: s.iter().map(|x| x / lambda_min).collect(),
        kappa: lambda_max / lambda_min,
        lambda_min: 1.0,
        lambda_max: lambda_max / lambda_min,
        steps,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubsetResult {
    pub subset: Vec<usize>,
    /// Extreme eigenvalues of `(M/N) Σ_{j∈J} v_j v_j*`.
    pub c0: f64,
    #[doc(alias = "C0")]
    pub c0_upper: f64,
    /// False when the greedy fallback produced the subset.
    pub exhaustive: bool,
}

fn subset_constants(frame: &FrameSystem, subset: &[usize]) -> Result<(f64, f64)> {
    let scale = frame.m() as f64 / frame.n() as f64;
    let mut c = vec![0.0; frame.m()];
    for &j in subset {
        c[j] = scale;
    }
    let e = hermitian_eigen(&frame.weighted_operator(&c))?;
    Ok((e.min(), e.max()))
}

/// Better: smaller `κ = C₀/c₀`, then smaller `|J|`.
fn improves(cand: (f64, f64, usize), best: Option<(f64, f64, usize)>) -> bool {
    let Some(best) = best else { return true };
    let (ka, kb) = (cand.1 / cand.0, best.1 / best.0);
    if (ka - kb).abs() > 1e-12 * kb {
        return ka < kb;
    }
    cand.2 < best.2
}

/// Subset `J` with `|J| ≤ target_fraction·M` minimizing the condition number
/// of the rescaled restriction `(M/N) Σ_{j∈J} v_j v_j*`.
///
/// Exhaustive for `M ≤ 20`, greedy (flagged) for `M ≤ 200`. `Ok(None)` when
/// no admissible subset has `λ_min > 0`.
pub fn brute_force_subset(
    frame: &FrameSystem,
    target_fraction: f64,
) -> Result<Option<SubsetResult>> {
    let (n, m) = (frame.n(), frame.m());
    if m > GREEDY_MAX {
        return Err(Error::CapExceeded {
            what: "M",
            size: m,
            cap: GREEDY_MAX,
        });
    }
    if !(target_fraction > 0.0 && target_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "target fraction {target_fraction} outside (0, 1]"
        )));
    }
    let max_size = ((target_fraction * m as f64) + 1e-9).floor() as usize;
    if max_size < n {
        return Ok(None);
    }
    let tol = 1e-10;
    if m <= EXHAUSTIVE_MAX {
        let mut best: Option<(f64, f64, usize)> = None;
        let mut best_mask = 0u32;
        for mask in 1u32..(1u32 << m) {
            let size = mask.count_ones() as usize;
            if size < n || size > max_size {
                continue;
            }
            let subset: Vec<usize> = (0..m).filter(|&j| mask >> j & 1 == 1).collect();
            let (lo, hi) = subset_constants(frame, &subset)?;
            if lo > tol && improves((lo, hi, size), best) {
                best = Some((lo, hi, size));
                best_mask = mask;
            }
        }
        return Ok(best.map(|(lo, hi, _)| SubsetResult {
            subset: (0..m).filter(|&j| best_mask >> j & 1 == 1).collect(),
            c0: lo,
            c0_upper: hi,
            exhaustive: true,
        }));
    }
    // Greedy: grow by the vector that most raises λ_min until full rank,
    // then keep adding while the condition number improves.
    let mut chosen: Vec<usize> = Vec::new();
    let mut current: Option<(f64, f64, usize)> = None;
    while chosen.len() < max_size {
        let mut step_best: Option<(usize, f64, f64)> = None;
        for j in (0..m).filter(|j| !chosen.contains(j)) {
            let mut trial = chosen.clone();
            trial.push(j);
            let (lo, hi) = subset_constants(frame, &trial)?;
            let better = match step_best {
                None => true,
                Some((_, blo, bhi)) if chosen.len() + 1 < n => {
                    // Below full rank compare by the trace gained.
                    lo + hi > blo + bhi + 1e-12
                }
                Some((_, blo, bhi)) => hi / lo < bhi / blo,
            };
            if better && (chosen.len() + 1 < n || lo > tol) {
                step_best = Some((j, lo, hi));
            }
        }
        let Some((j, lo, hi)) = step_best else { break };
        if chosen.len() + 1 >= n {
            let cand = (lo, hi, chosen.len() + 1);
            if current.is_some() && !improves(cand, current) {
                break;
            }
            current = Some(cand);
        }
        chosen.push(j);
    }
    chosen.sort_unstable();
    Ok(current.map(|(lo, hi, _)| SubsetResult {
        subset: chosen,
        c0: lo,
        c0_upper: hi,
        exhaustive: false,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grids::full_grid;
    use crate::indexset::{box_set, hyperbolic_cross};
    use crate::korobov::exact_discretization;
    use crate::montecarlo::random_nodes;

    #[test]
    fn grid_frames() {
        let f = frame_from_grid(&box_set(&[1]).unwrap(), &full_grid(&[1]).unwrap()).unwrap();
        assert_eq!((f.m(), f.n()), (3, 3));
        assert!(f.equal_norm());
        let f = frame_from_grid(
            &hyperbolic_cross(1, 2).unwrap(),
            &full_grid(&[1, 1]).unwrap(),
        )
        .unwrap();
        assert_eq!((f.m(), f.n()), (9, 5));
        let q = hyperbolic_cross(2, 2).unwrap();
        let (params, z) = exact_discretization(&q).unwrap();
        let f = frame_from_grid(&q, &z).unwrap();
        assert_eq!((f.m(), f.n()), (params.p as usize, q.len()));
        let bad = random_nodes(40, 2, 0).unwrap();
        assert!(matches!(
            frame_from_grid(&q, &bad),
            Err(Error::NotTightFrame { .. })
        ));
    }

    #[test]
    fn bss_square_frame() {
        let f = frame_from_grid(&box_set(&[2]).unwrap(), &full_grid(&[2]).unwrap()).unwrap();
        let r = bss_sparsify(&f, 4.0).unwrap();
        assert!(r.kappa <= bss_ratio_bound(4.0) + 1e-9);
        assert!(r.nonzeros() <= 5);
        assert!((bss_ratio_bound(4.0) - 9.0).abs() < 1e-12);
        assert!(bss_sparsify(&f, 1.0).is_err());
    }

    #[test]
    fn bss_random_frame() {
        let f = random_tight_frame(10, 60, 5).unwrap();
        let r = bss_sparsify(&f, 4.0).unwrap();
        assert!(r.nonzeros() <= 40);
        let e = hermitian_eigen(&f.weighted_operator(&r.weights)).unwrap();
        assert!(e.max() / e.min() <= 9.0 + 1e-9);
        assert!((e.min() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bss_weighted_points_on_grid_frame() {
        let q = hyperbolic_cross(2, 2).unwrap();
        let f = frame_from_grid(&q, &full_grid(&[3, 3]).unwrap()).unwrap();
        let r = bss_sparsify(&f, 2.0).unwrap();
        let z = r.weighted_points(&f).unwrap().unwrap();
        let g = crate::linalg::gram_matrix_direct(&q, &z).unwrap();
        let e = hermitian_eigen(&g).unwrap();
        assert!(e.min() >= 1.0 - 1e-9 && e.max() <= r.kappa + 1e-9);
    }

    #[test]
    fn subset_examples() {
        let f = frame_from_grid(&box_set(&[1]).unwrap(), &full_grid(&[1]).unwrap()).unwrap();
        let r = brute_force_subset(&f, 1.0).unwrap().unwrap();
        assert_eq!(r.subset, vec![0, 1, 2]);
        assert!((r.c0 - 1.0).abs() < 1e-12 && (r.c0_upper - 1.0).abs() < 1e-12);

        let f = frame_from_grid(
            &hyperbolic_cross(1, 2).unwrap(),
            &full_grid(&[1, 1]).unwrap(),
        )
        .unwrap();
        let r = brute_force_subset(&f, 7.0 / 9.0).unwrap().unwrap();
        assert!(r.subset.len() <= 7 && r.c0 > 0.0 && r.exhaustive);
        let nf = f.n() as f64;
        let size = r.subset.len() as f64;
        assert!(r.c0 * nf <= size + 1e-9 && size <= r.c0_upper * nf + 1e-9);

        assert!(brute_force_subset(&f, 4.0 / 9.0).unwrap().is_none());
    }

    #[test]
    fn greedy_subset_is_flagged() {
        let f = random_tight_frame(4, 30, 2).unwrap();
        let r = brute_force_subset(&f, 0.5).unwrap().unwrap();
        assert!(!r.exhaustive);
        assert!(r.subset.len() >= 4 && r.subset.len() <= 15 && r.c0 > 0.0);
    }
}
