//! Tensor-ring (TR) format: generation, contraction and rank-bound checks.
//!
//! Core `G_k` has shape `(r_{k-1}, I_k, r_k)` with `r_0 = r_N`, stored as a
//! [`DenseTensor`] (first index fastest). Element `(i_1, ..., i_N)` of the
//! represented tensor is `Tr(G_1(i_1) G_2(i_2) ... G_N(i_N))`, where `G_k(i)`
//! is the `r_{k-1} x r_k` lateral slice.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg;
use crate::tensor::{circular_unfold, CircularUnfolding, DenseTensor};

/// Relative singular-value threshold for the rank-bound check. Looser than
/// [`linalg::RANK_RTOL`] so contraction roundoff is not counted as rank.
pub const TR_RANK_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct TrFormat {
    cores: Vec<DenseTensor>,
}

impl TrFormat {
    pub fn new(cores: Vec<DenseTensor>) -> Result<Self> {
        if cores.len() < 2 {
            return Err(Error::Shape(format!(
                "a tensor ring needs at least 2 cores, got {}",
                cores.len()
            )));
        }
        for (k, core) in cores.iter().enumerate() {
            if core.order() != 3 {
                return Err(Error::Shape(format!(
                    "core {} has order {}, expected 3",
                    k + 1,
                    core.order()
                )));
            }
        }
        let n = cores.len();
        for k in 0..n {
            let next = (k + 1) % n;
            if cores[k].shape()[2] != cores[next].shape()[0] {
                return Err(Error::Shape(format!(
                    "rank chain broken between core {} (right rank {}) and core {} (left rank {})",
                    k + 1,
                    cores[k].shape()[2],
                    next + 1,
                    cores[next].shape()[0]
                )));
            }
        }
        Ok(Self { cores })
    }

    pub fn cores(&self) -> &[DenseTensor] {
        &self.cores
    }

    pub fn order(&self) -> usize {
        self.cores.len()
    }

    /// `(r_1, ..., r_N)`; `r_0` is `r_N`.
    pub fn ranks(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.shape()[2]).collect()
    }

    /// `(I_1, ..., I_N)`.
    pub fn shape(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.shape()[1]).collect()
    }

    /// Lateral slice `G_k(i)` for a 0-based core index `k`.
    pub fn slice(&self, k: usize, i: usize) -> DMatrix<f64> {
        let core = &self.cores[k];
        let (left, _, right) = (core.shape()[0], core.shape()[1], core.shape()[2]);
        DMatrix::from_fn(left, right, |a, b| core.get(&[a, i, b]))
    }

    /// One element by the trace of the ordered slice product.
    pub fn element(&self, index: &[usize]) -> f64 {
        assert_eq!(index.len(), self.order());
        let product = index
            .iter()
            .enumerate()
            .skip(1)
            .fold(self.slice(0, index[0]), |acc, (k, &i)| acc * self.slice(k, i));
        product.trace()
    }

    /// Scales core `k` (0-based) in place.
    pub fn scale_core(&mut self, k: usize, factor: f64) {
        self.cores[k].scale(factor);
    }
}

/// Full tensor by sequential contraction of the cores.
pub fn tr_contract(tr: &TrFormat) -> DenseTensor {
    let first = &tr.cores[0];
    let r0 = first.shape()[0];
    // partial product stored as (r_0, I_1...I_k, r_k)
    let mut partial = DMatrix::from_column_slice(
        r0 * first.shape()[1],
        first.shape()[2],
        first.data(),
    );
    let mut span = first.shape()[1];
    for core in &tr.cores[1..] {
        let (left, width, right) = (core.shape()[0], core.shape()[1], core.shape()[2]);
        let g = DMatrix::from_column_slice(left, width * right, core.data());
        let next = &partial * g;
        span *= width;
        partial = DMatrix::from_column_slice(r0 * span, right, next.as_slice());
    }
    let p = partial.as_slice();
    let data = (0..span)
        .map(|j| (0..r0).map(|a| p[a + r0 * (j + span * a)]).sum())
        .collect();
    DenseTensor::new(tr.shape(), data).expect("contraction preserves shape")
}

/// Full tensor evaluated element by element with [`TrFormat::element`].
pub fn tr_contract_naive(tr: &TrFormat) -> DenseTensor {
    DenseTensor::from_fn(tr.shape(), |idx| tr.element(idx)).expect("valid ring shape")
}

/// Cores with i.i.d. standard normal entries drawn from a ChaCha8 stream
/// seeded with `seed`, filled core by core in storage order.
pub fn random_tr(shape: &[usize], ranks: &[usize], seed: u64) -> Result<TrFormat> {
    if shape.len() != ranks.len() {
        return Err(Error::Argument(format!(
            "shape has {} modes but {} ranks were given",
            shape.len(),
            ranks.len()
        )));
    }
    if ranks.contains(&0) {
        return Err(Error::Argument(format!("ranks must be >= 1, got {ranks:?}")));
    }
    let n = shape.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cores = (0..n)
        .map(|k| {
            let left = ranks[(k + n - 1) % n];
            let core_shape = vec![left, shape[k], ranks[k]];
            let len = left * shape[k] * ranks[k];
            let data = (0..len).map(|_| StandardNormal.sample(&mut rng)).collect();
            DenseTensor::new(core_shape, data)
        })
        .collect::<Result<Vec<_>>>()?;
    TrFormat::new(cores)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankBoundRow {
    /// 1-based mode ending the row group.
    pub k: usize,
    /// 1-based start mode.
    pub t: usize,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    /// `r_k * r_{t-1}`
    pub bound: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankBoundReport {
    pub d: usize,
    pub ranks: Vec<usize>,
    pub rows: Vec<RankBoundRow>,
}

impl RankBoundReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// `r_k * r_{t-1}` for 1-based `k`, `t`, with `r_0 = r_N`.
pub fn rank_bound(ranks: &[usize], k: usize, t: usize) -> usize {
    let n = ranks.len();
    let r_k = ranks[k - 1];
    let r_before_t = if t == 1 { ranks[n - 1] } else { ranks[t - 2] };
    r_k * r_before_t
}

/// Contracts `tr` and compares the numerical rank of every `X<k,d>` with
/// `r_k * r_{t-1}`.
pub fn check_rank_bound(tr: &TrFormat, d: usize) -> Result<RankBoundReport> {
    let n = tr.order();
    let x = tr_contract(tr);
    let ranks = tr.ranks();
    let rows = (1..=n)
        .into_par_iter()
        .map(|k| {
            let spec = CircularUnfolding::new(k, d, n)?;
            let m = circular_unfold(&x, &spec)?;
            let rank = linalg::numerical_rank(&m, TR_RANK_RTOL)?;
            let bound = rank_bound(&ranks, k, spec.t());
            Ok(RankBoundRow {
                k,
                t: spec.t(),
                rows: m.rows(),
                cols: m.cols(),
                rank,
                bound,
                pass: rank <= bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RankBoundReport { d, ranks, rows })
}
