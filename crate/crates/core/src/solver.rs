//! ADMM solver for tensor-ring nuclear norm minimization.
//!
//! Solves
//!
//! ```text
//! min_X  sum_k alpha_k ||X<k,d>||_*   subject to  X_Ω = T_Ω
//! ```
//!
//! by splitting `X` into copies `M(k) = X`, one per circular unfolding, with
//! duals `Y(k)`. One iteration performs, in order:
//!
//! 1. `M(k) = fold_k(D_τ(unfold_k(X + Y(k)/ρ)))` with `τ = alpha_k / ρ`,
//! 2. `X = mean_k(M(k) - Y(k)/ρ)` off Ω and `X = T` on Ω,
//! 3. `Y(k) += ρ (X - M(k))`,
//! 4. `ρ = min(ρ * rho_growth, rho_max)`,
//!
//! and stops once `||X - X_prev||_F / ||X_prev||_F <= tol`.
//!
//! The `M` updates are independent and run on the rayon pool; everything
//! is deterministic for fixed inputs.
//!
//! When `alpha_k / ρ` exceeds every singular value the shrinkage returns
//! zero for every `k`, the unobserved entries never move and the relative
//! change is exactly zero. That state is not reported as convergence.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg;
use crate::tensor::{circular_fold, circular_unfold, CircularUnfolding, DenseTensor};

/// Observed entries `T_Ω` together with the mask `Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    values: DenseTensor,
    mask: Vec<bool>,
}

impl ObservationSet {
    /// `mask[i]` marks flat entry `i` as observed. Unobserved values are
    /// zeroed.
    pub fn new(mut values: DenseTensor, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != values.len() {
            return Err(Error::Shape(format!(
                "mask has {} entries, tensor has {}",
                mask.len(),
                values.len()
            )));
        }
        if !mask.iter().any(|&m| m) {
            return Err(Error::Argument("no observed entries".into()));
        }
        for (v, &m) in values.data_mut().iter_mut().zip(&mask) {
            if !m {
                *v = 0.0;
            }
        }
        Ok(Self { values, mask })
    }

    pub fn shape(&self) -> &[usize] {
        self.values.shape()
    }

    /// Zero-filled observed tensor `T`.
    pub fn values(&self) -> &DenseTensor {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn observed_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_fully_observed(&self) -> bool {
        self.mask.iter().all(|&m| m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Step-length; `None` means `floor(N / 2)`.
    pub d: Option<usize>,
    /// Per-unfolding weights; `None` means uniform `1 / N`.
    pub alphas: Option<Vec<f64>>,
    /// Initial penalty ρ.
    pub rho: f64,
    pub tol: f64,
    pub max_iters: usize,
    /// Multiplier applied to ρ after every iteration.
    pub rho_growth: f64,
    /// Upper bound for ρ under growth.
    pub rho_max: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            d: None,
            alphas: None,
            rho: 1e-5,
            tol: 1e-5,
            max_iters: 300,
            rho_growth: 1.1,
            rho_max: 1e10,
        }
    }
}

impl SolverConfig {
    pub fn with_d(mut self, d: usize) -> Self {
        self.d = Some(d);
        self
    }

    pub fn step_length(&self, order: usize) -> usize {
        self.d.unwrap_or(order / 2)
    }

    pub fn weights(&self, order: usize) -> Vec<f64> {
        match &self.alphas {
            Some(a) => a.clone(),
            None => vec![1.0 / order as f64; order],
        }
    }

    /// Checks every parameter against a tensor of the given order.
    pub fn validate(&self, order: usize) -> Result<()> {
        let d = self.step_length(order);
        if d == 0 || d >= order {
            return Err(Error::Argument(format!(
                "step-length d={d} must satisfy 1 <= d < {order}"
            )));
        }
        if let Some(a) = &self.alphas {
            if a.len() != order {
                return Err(Error::Argument(format!(
                    "expected {order} weights, got {}",
                    a.len()
                )));
            }
            if a.iter().any(|&v| !(v.is_finite() && v >= 0.0)) {
                return Err(Error::Argument(format!(
                    "weights must be finite and >= 0, got {a:?}"
                )));
            }
        }
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(Error::Argument(format!("rho must be > 0, got {}", self.rho)));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::Argument(format!("tol must be >= 0, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::Argument("max_iters must be positive".into()));
        }
        if !(self.rho_growth.is_finite() && self.rho_growth >= 1.0) {
            return Err(Error::Argument(format!(
                "rho_growth must be >= 1, got {}",
                self.rho_growth
            )));
        }
        if self.rho_max.is_nan() || self.rho_max < self.rho {
            return Err(Error::Argument(format!(
                "rho_max {} is below rho {}",
                self.rho_max, self.rho
            )));
        }
        Ok(())
    }
}

/// Iterates of one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub x: DenseTensor,
    pub m: Vec<DenseTensor>,
    pub y: Vec<DenseTensor>,
    /// Current penalty.
    pub rho: f64,
    pub iter: usize,
}

impl SolverState {
    /// Zero-filled start with the observed entries copied into `X` and
    /// every `M(k)`; duals at zero.
    pub fn initial(obs: &ObservationSet, cfg: &SolverConfig) -> Self {
        let n = obs.shape().len();
        let x = obs.values().clone();
        let zero = DenseTensor::zeros(obs.shape().to_vec()).expect("observation shape is valid");
        Self {
            m: vec![x.clone(); n],
            y: vec![zero; n],
            x,
            rho: cfg.rho,
            iter: 0,
        }
    }
}

/// Diagnostics of one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub rel_change: f64,
    /// `max_k ||X - M(k)||_F`
    pub primal_residual: f64,
    /// `sum_k alpha_k ||X<k,d>||_*` at the new `X`.
    pub objective: f64,
    /// Penalty used during this iteration.
    pub rho: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverReport {
    pub iterations: usize,
    pub rel_change: Vec<f64>,
    pub primal_residuals: Vec<f64>,
    pub objective: Vec<f64>,
    pub converged: bool,
}

impl SolverReport {
    fn push(&mut self, r: &IterationRecord) {
        self.iterations = r.iter;
        self.rel_change.push(r.rel_change);
        self.primal_residuals.push(r.primal_residual);
        self.objective.push(r.objective);
    }
}

fn unfolding(k: usize, order: usize, cfg: &SolverConfig) -> Result<CircularUnfolding> {
    CircularUnfolding::new(k, cfg.step_length(order), order)
}

fn check_mode(k: usize, state: &SolverState) -> Result<()> {
    if k == 0 || k > state.m.len() {
        return Err(Error::Argument(format!(
            "mode k={k} outside 1..={}",
            state.m.len()
        )));
    }
    Ok(())
}

/// New `M(k)` for the 1-based mode `k`: the proximal point of
/// `alpha_k ||.<k,d>||_*` at `X + Y(k)/ρ`.
pub fn update_m(state: &SolverState, k: usize, cfg: &SolverConfig) -> Result<DenseTensor> {
    check_mode(k, state)?;
    let order = state.x.order();
    let alpha = cfg.weights(order)[k - 1];
    let spec = unfolding(k, order, cfg)?;
    let mut z = state.x.clone();
    z.add_scaled(1.0 / state.rho, &state.y[k - 1]);
    let shrunk = linalg::svt(&circular_unfold(&z, &spec)?, alpha / state.rho)?;
    circular_fold(&shrunk, &spec, state.x.shape())
}

/// New `X`: the average of `M(k) - Y(k)/ρ` off Ω and `T` on Ω.
pub fn update_x(state: &SolverState, obs: &ObservationSet, _cfg: &SolverConfig) -> DenseTensor {
    let n = state.m.len();
    let inv_rho = 1.0 / state.rho;
    let mut x = state.x.clone();
    let t = obs.values().data();
    for (i, (v, &observed)) in x.data_mut().iter_mut().zip(obs.mask()).enumerate() {
        if observed {
            *v = t[i];
        } else {
            let sum: f64 = state
                .m
                .iter()
                .zip(&state.y)
                .map(|(m, y)| m.data()[i] - inv_rho * y.data()[i])
                .sum();
            *v = sum / n as f64;
        }
    }
    x
}

/// New `Y(k) = Y(k) + ρ (X - M(k))` for the 1-based mode `k`.
pub fn update_y(state: &SolverState, k: usize, _cfg: &SolverConfig) -> Result<DenseTensor> {
    check_mode(k, state)?;
    let mut y = state.y[k - 1].clone();
    y.add_scaled(state.rho, &state.x);
    y.add_scaled(-state.rho, &state.m[k - 1]);
    Ok(y)
}

/// Weighted sum of the nuclear norms of all `N` circular unfoldings.
pub fn objective(x: &DenseTensor, cfg: &SolverConfig) -> Result<f64> {
    let order = x.order();
    let weights = cfg.weights(order);
    let norms = (1..=order)
        .into_par_iter()
        .map(|k| {
            if weights[k - 1] == 0.0 {
                return Ok(0.0);
            }
            let spec = unfolding(k, order, cfg)?;
            linalg::nuclear_norm(&circular_unfold(x, &spec)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(norms.iter().zip(&weights).map(|(n, a)| a * n).sum())
}

/// Step-by-step driver around [`SolverState`].
#[derive(Debug)]
pub struct Solver<'a> {
    obs: &'a ObservationSet,
    cfg: SolverConfig,
    state: SolverState,
    report: SolverReport,
}

impl<'a> Solver<'a> {
    pub fn new(obs: &'a ObservationSet, cfg: SolverConfig) -> Result<Self> {
        let order = obs.shape().len();
        cfg.validate(order)?;
        let observed = obs.mask().iter().zip(obs.values().data());
        if observed.clone().all(|(&m, _)| !m) {
            return Err(Error::Argument("no observed entries".into()));
        }
        if observed.filter(|(&m, _)| m).any(|(_, v)| !v.is_finite()) {
            return Err(Error::Argument("observed values must be finite".into()));
        }
        let state = SolverState::initial(obs, &cfg);
        Ok(Self {
            obs,
            cfg,
            state,
            report: SolverReport::default(),
        })
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn report(&self) -> &SolverReport {
        &self.report
    }

    /// Runs one full ADMM iteration.
    pub fn step(&mut self) -> Result<IterationRecord> {
        let n = self.state.m.len();
        let previous_norm = self.state.x.frobenius_norm();
        let previous = self.state.x.clone();

        let m = (1..=n)
            .into_par_iter()
            .map(|k| update_m(&self.state, k, &self.cfg))
            .collect::<Result<Vec<_>>>()?;
        self.state.m = m;
        self.state.x = update_x(&self.state, self.obs, &self.cfg);
        let y = (1..=n)
            .map(|k| update_y(&self.state, k, &self.cfg))
            .collect::<Result<Vec<_>>>()?;
        self.state.y = y;

        let rho = self.state.rho;
        self.state.rho = (rho * self.cfg.rho_growth).min(self.cfg.rho_max);
        self.state.iter += 1;

        let change = self.state.x.distance(&previous);
        let rel_change = if previous_norm == 0.0 {
            f64::INFINITY
        } else {
            change / previous_norm
        };
        let primal_residual = self
            .state
            .m
            .iter()
            .map(|m| self.state.x.distance(m))
            .fold(0.0, f64::max);
        let record = IterationRecord {
            iter: self.state.iter,
            rel_change,
            primal_residual,
            objective: objective(&self.state.x, &self.cfg)?,
            rho,
        };
        self.report.push(&record);
        Ok(record)
    }

    /// True when `record` meets the stopping rule for the current state.
    fn is_converged(&self, record: &IterationRecord) -> bool {
        if record.rel_change.is_nan() || record.rel_change > self.cfg.tol {
            return false;
        }
        let frozen = !self.obs.is_fully_observed()
            && self
                .state
                .m
                .iter()
                .all(|m| m.data().iter().all(|&v| v == 0.0));
        !frozen
    }

    /// Iterates until convergence or `max_iters`, calling `observe` after
    /// every iteration.
    pub fn run_with<F>(mut self, mut observe: F) -> Result<(DenseTensor, SolverReport)>
    where
        F: FnMut(&SolverState, &IterationRecord),
    {
        while self.state.iter < self.cfg.max_iters {
            let record = self.step()?;
            observe(&self.state, &record);
            if self.is_converged(&record) {
                self.report.converged = true;
                break;
            }
        }
        Ok((self.state.x, self.report))
    }

    pub fn run(self) -> Result<(DenseTensor, SolverReport)> {
        self.run_with(|_, _| {})
    }
}

/// Completes `obs` and returns the estimate with its per-iteration report.
pub fn trnnm_solve(obs: &ObservationSet, cfg: &SolverConfig) -> Result<(DenseTensor, SolverReport)> {
    Solver::new(obs, cfg.clone())?.run()
}
