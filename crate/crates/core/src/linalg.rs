//! Thin SVD, singular value thresholding and the nuclear norm.
//!
//! The factorization itself is delegated to `nalgebra`'s Golub-Kahan SVD.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tensor::DenseMatrix;

/// Relative threshold below which singular values count as zero when
/// reporting a numerical rank.
pub const RANK_RTOL: f64 = 1e-12;

/// Economy-size SVD `a = u * diag(s) * vt`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `rows x p`, `p = min(rows, cols)`
    pub u: DenseMatrix,
    /// Non-increasing, non-negative.
    pub s: Vec<f64>,
    /// `p x cols`
    pub vt: DenseMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> DenseMatrix {
        scaled_product(&self.u, &self.s, &self.vt)
    }
}

fn to_nalgebra(a: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_column_slice(a.rows(), a.cols(), a.data())
}

fn from_nalgebra(m: DMatrix<f64>) -> DenseMatrix {
    let (rows, cols) = m.shape();
    DenseMatrix::new(rows, cols, m.data.into()).expect("nalgebra matrix is well formed")
}

fn check_finite(a: &DenseMatrix) -> Result<()> {
    if a.data().iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Argument(format!(
            "{}x{} matrix has non-finite entries",
            a.rows(),
            a.cols()
        )))
    }
}

pub fn svd(a: &DenseMatrix) -> Result<Svd> {
    check_finite(a)?;
    let (rows, cols) = (a.rows(), a.cols());
    let decomposed = to_nalgebra(a)
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or(Error::Numerical { rows, cols })?;
    // nalgebra leaves singular values unordered
    let order = {
        let mut order: Vec<usize> = (0..decomposed.singular_values.len()).collect();
        order.sort_by(|&i, &j| {
            decomposed.singular_values[j].total_cmp(&decomposed.singular_values[i])
        });
        order
    };
    let u = decomposed.u.ok_or(Error::Numerical { rows, cols })?;
    let vt = decomposed.v_t.ok_or(Error::Numerical { rows, cols })?;
    let p = order.len();
    let s = order.iter().map(|&i| decomposed.singular_values[i]).collect();
    let u = DenseMatrix::from_fn(rows, p, |r, c| u[(r, order[c])]);
    let vt = DenseMatrix::from_fn(p, cols, |r, c| vt[(order[r], c)]);
    Ok(Svd { u, s, vt })
}

/// Singular values only, non-increasing.
pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    check_finite(a)?;
    let mut s: Vec<f64> = to_nalgebra(a)
        .try_svd(false, false, f64::EPSILON, 0)
        .ok_or(Error::Numerical {
            rows: a.rows(),
            cols: a.cols(),
        })?
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// `u * diag(s) * vt`, skipping zero singular values.
fn scaled_product(u: &DenseMatrix, s: &[f64], vt: &DenseMatrix) -> DenseMatrix {
    let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] != 0.0).collect();
    if keep.is_empty() {
        return DenseMatrix::zeros(u.rows(), vt.cols());
    }
    let us = DMatrix::from_fn(u.rows(), keep.len(), |r, c| u.get(r, keep[c]) * s[keep[c]]);
    let v = DMatrix::from_fn(keep.len(), vt.cols(), |r, c| vt.get(keep[r], c));
    from_nalgebra(us * v)
}

/// Thresholding result: the shrunk matrix and its singular values.
#[derive(Debug, Clone)]
pub struct Shrunk {
    pub matrix: DenseMatrix,
    pub singular_values: Vec<f64>,
}

/// `D_tau(a) = U max(S - tau I, 0) V^T`.
pub fn svt(a: &DenseMatrix, tau: f64) -> Result<DenseMatrix> {
    svt_with_values(a, tau).map(|s| s.matrix)
}

/// [`svt`] that also returns the shrunk singular values.
pub fn svt_with_values(a: &DenseMatrix, tau: f64) -> Result<Shrunk> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::Argument(format!(
            "threshold must be finite and >= 0, got {tau}"
        )));
    }
    let Svd { u, s, vt } = svd(a)?;
    let shrunk: Vec<f64> = s.iter().map(|&v| (v - tau).max(0.0)).collect();
    Ok(Shrunk {
        matrix: scaled_product(&u, &shrunk, &vt),
        singular_values: shrunk,
    })
}

/// Sum of singular values.
pub fn nuclear_norm(a: &DenseMatrix) -> Result<f64> {
    Ok(singular_values(a)?.iter().sum())
}

/// Number of singular values above `rtol * s_max`.
pub fn numerical_rank(a: &DenseMatrix, rtol: f64) -> Result<usize> {
    let s = singular_values(a)?;
    Ok(rank_of(&s, rtol))
}

pub(crate) fn rank_of(s: &[f64], rtol: f64) -> usize {
    let max = s.first().copied().unwrap_or(0.0);
    if max == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rtol * max).count()
}
