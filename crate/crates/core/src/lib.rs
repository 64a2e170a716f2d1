//! Low-rank tensor completion by tensor-ring nuclear norm minimization.
//!
//! A tensor is completed by minimizing the weighted sum of nuclear norms of
//! its circular unfoldings `X<k,d>`, `k = 1..N`, subject to agreement with the
//! observed entries. The rank of `X<k,d>` is bounded by `r_k * r_{t-1}` for a
//! tensor with tensor-ring ranks `(r_1, ..., r_N)`, so the sum is a convex
//! surrogate for TR rank.
//!
//! Modules:
//! - [`tensor`]: dense tensors, matrices and circular (un)folding
//! - [`linalg`]: SVD, singular value thresholding, nuclear norm
//! - [`ring`]: tensor-ring cores, contraction, rank-bound checks
//! - [`solver`]: the ADMM completion solver
//! - [`data`]: pixmap I/O, masks, tensorization and RSE

pub mod data;
pub mod error;
pub mod linalg;
pub mod ring;
pub mod solver;
pub mod tensor;

pub use error::{Error, Result};
pub use ring::{check_rank_bound, random_tr, tr_contract, TrFormat};
pub use solver::{trnnm_solve, ObservationSet, SolverConfig, SolverReport};
pub use tensor::{circular_fold, circular_unfold, CircularUnfolding, DenseMatrix, DenseTensor};
