use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use trnnm::data::{MaskKind, StripeAxis};
use trnnm::SolverConfig;

#[derive(Debug, Parser)]
#[command(name = "trnnm", version, about = "Tensor-ring nuclear norm completion experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mask an image (or a directory of frames), complete it and score the result.
    Complete(CompleteArgs),
    /// Complete a random tensor-ring tensor.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct CompleteArgs {
    /// PPM/PGM image, or a directory of equally sized frames.
    #[arg(long)]
    pub input: PathBuf,

    /// Tensorization shape, e.g. 4x4x4x4x4x4x4x4x3. Defaults to (C, W, H[, F]).
    #[arg(long, value_parser = parse_dims)]
    pub shape: Option<std::vec::Vec<usize>>,

    #[arg(long, value_enum, default_value_t = MaskArg::Stripes)]
    pub mask: MaskArg,

    #[arg(long, value_enum, default_value_t = AxisArg::Columns)]
    pub stripe_axis: AxisArg,

    /// Draw stripes independently for every frame.
    #[arg(long)]
    pub per_frame_stripes: bool,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Tensor shape, e.g. 4x4x4x4.
    #[arg(long, value_parser = parse_dims)]
    pub shape: std::vec::Vec<usize>,

    /// Tensor-ring ranks (r_1, ..., r_N), e.g. 2x2x2x2.
    #[arg(long, value_parser = parse_dims)]
    pub ranks: std::vec::Vec<usize>,

    /// Print the rank-versus-bound table for every circular unfolding.
    #[arg(long)]
    pub check_rank_bound: bool,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Missing ratio in [0, 1).
    #[arg(long, default_value_t = 0.3, value_parser = parse_ratio)]
    pub mr: f64,

    /// Step-length; defaults to floor(N / 2).
    #[arg(long)]
    pub d: Option<usize>,

    /// Comma-separated unfolding weights; defaults to 1/N each.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,

    #[arg(long, default_value_t = SolverConfig::default().rho)]
    pub rho: f64,

    #[arg(long, default_value_t = SolverConfig::default().rho_growth)]
    pub rho_growth: f64,

    #[arg(long, default_value_t = SolverConfig::default().rho_max)]
    pub rho_max: f64,

    #[arg(long, default_value_t = SolverConfig::default().tol)]
    pub tol: f64,

    #[arg(long, default_value_t = SolverConfig::default().max_iters)]
    pub max_iters: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,

    /// Print per-iteration diagnostics to stderr.
    #[arg(long, short)]
    pub verbose: bool,
}

impl CommonArgs {
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            d: self.d,
            alphas: self.alphas.clone(),
            rho: self.rho,
            tol: self.tol,
            max_iters: self.max_iters,
            rho_growth: self.rho_growth,
            rho_max: self.rho_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MaskArg {
    Random,
    Stripes,
}

impl From<MaskArg> for MaskKind {
    fn from(m: MaskArg) -> Self {
        match m {
            MaskArg::Random => MaskKind::RandomEntries,
            MaskArg::Stripes => MaskKind::Stripes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    Columns,
    Rows,
}

impl From<AxisArg> for StripeAxis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::Columns => StripeAxis::Columns,
            AxisArg::Rows => StripeAxis::Rows,
        }
    }
}

/// Parses `x`-separated positive integers such as `4x4x3`.
pub fn parse_dims(s: &str) -> Result<Vec<usize>, String> {
    let dims = s
        .split(['x', 'X'])
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| format!("'{p}' is not a positive integer"))
                .and_then(|v| {
                    if v == 0 {
                        Err("dimensions must be positive".to_string())
                    } else {
                        Ok(v)
                    }
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if dims.len() < 2 {
        return Err(format!("'{s}' needs at least two x-separated entries"));
    }
    Ok(dims)
}

fn parse_ratio(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_nan() || v < 0.0 {
        return Err("missing ratio must be >= 0".into());
    }
    if v >= 1.0 {
        return Err("missing ratio must be < 1".into());
    }
    Ok(v)
}
