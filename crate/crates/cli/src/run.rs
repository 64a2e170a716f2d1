use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use trnnm::data::{
    detensorize, frames_layout, load_image, make_mask, random_entries, rse, save_image,
    tensorize_frames, trace_csv, ImageBuffer, MaskKind, MaskSpec, Summary,
};
use trnnm::solver::{IterationRecord, Solver, SolverState};
use trnnm::{
    check_rank_bound, random_tr, tr_contract, DenseTensor, ObservationSet, SolverConfig,
    SolverReport,
};

use crate::args::{CommonArgs, CompleteArgs, SynthArgs};

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or flag combinations; exit 2.
    Usage(String),
    /// Anything that went wrong while running; exit 1.
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<trnnm::Error> for CliError {
    fn from(e: trnnm::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaskManifest {
    pub kind: String,
    pub missing_ratio: f64,
    pub seed: u64,
    pub stripe_axis: String,
    pub per_frame: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverManifest {
    pub d: usize,
    pub alphas: Vec<f64>,
    pub rho: f64,
    pub rho_growth: f64,
    pub rho_max: f64,
    pub tol: f64,
    pub max_iters: usize,
}

impl SolverManifest {
    fn new(cfg: &SolverConfig, order: usize) -> Self {
        Self {
            d: cfg.step_length(order),
            alphas: cfg.weights(order),
            rho: cfg.rho,
            rho_growth: cfg.rho_growth,
            rho_max: cfg.rho_max,
            tol: cfg.tol,
            max_iters: cfg.max_iters,
        }
    }
}

/// Everything needed to repeat a run, written next to its outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranks: Option<Vec<usize>>,
    pub mask: MaskManifest,
    pub shape: Vec<usize>,
    pub solver: SolverManifest,
    pub seed: u64,
    pub outputs: Vec<PathBuf>,
    pub seconds: f64,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn validate_solver(cfg: &SolverConfig, order: usize) -> Result<(), CliError> {
    cfg.validate(order).map_err(|e| usage(e.to_string()))
}

fn solve(
    obs: &ObservationSet,
    cfg: SolverConfig,
    verbose: bool,
) -> anyhow::Result<(DenseTensor, SolverReport)> {
    let log = |_: &SolverState, r: &IterationRecord| {
        if verbose {
            eprintln!(
                "iter {:>4}  rel_change {:.3e}  primal {:.3e}  objective {:.6e}  rho {:.3e}",
                r.iter, r.rel_change, r.primal_residual, r.objective, r.rho
            );
        }
    };
    Ok(Solver::new(obs, cfg)?.run_with(log)?)
}

fn image_paths(input: &Path) -> anyhow::Result<Vec<PathBuf>> {
    if !input.is_dir() {
        return Ok(vec![input.to_path_buf()]);
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(input)
        .with_context(|| format!("reading {}", input.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    paths.retain(|p| {
        matches!(
            p.extension().and_then(|e| e.to_str()),
            Some("ppm" | "pgm" | "pnm")
        )
    });
    paths.sort();
    anyhow::ensure!(!paths.is_empty(), "no .ppm/.pgm frames in {}", input.display());
    Ok(paths)
}

fn extension(img: &ImageBuffer) -> &'static str {
    if img.channels() == 1 {
        "pgm"
    } else {
        "ppm"
    }
}

pub fn complete(args: &CompleteArgs) -> Result<Summary, CliError> {
    let common = &args.common;
    let start = Instant::now();
    let paths = image_paths(&args.input)?;
    let frames = paths
        .iter()
        .map(|p| load_image(p).with_context(|| format!("loading {}", p.display())))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let layout = frames_layout(&frames).map_err(|e| usage(e.to_string()))?;
    let shape = args.shape.clone().unwrap_or_else(|| layout.natural_shape());
    if shape.len() < 2 {
        return Err(usage("tensor shape needs at least two modes; pass --shape"));
    }
    let count: usize = shape.iter().product();
    if count != layout.len() {
        return Err(usage(format!(
            "--shape {shape:?} holds {count} values but the input has {}",
            layout.len()
        )));
    }
    let cfg = common.solver_config();
    validate_solver(&cfg, shape.len())?;

    let mask_spec = MaskSpec {
        kind: args.mask.into(),
        missing_ratio: common.mr,
        seed: common.seed,
        stripe_axis: args.stripe_axis.into(),
        per_frame: args.per_frame_stripes,
    };
    let truth = tensorize_frames(&frames, &shape)?;
    let mask = make_mask(&layout, &mask_spec).map_err(|e| usage(e.to_string()))?;
    let obs = ObservationSet::new(truth.clone(), mask)?;
    let (x, report) = solve(&obs, cfg.clone(), common.verbose)?;

    fs::create_dir_all(&common.out)
        .with_context(|| format!("creating {}", common.out.display()))?;
    let completed = detensorize(&x, &layout)?;
    let observed = detensorize(obs.values(), &layout)?;
    let mut outputs = Vec::new();
    if paths.len() == 1 {
        let ext = extension(&completed[0]);
        for (name, img) in [("completed", &completed[0]), ("observed", &observed[0])] {
            let path = common.out.join(format!("{name}.{ext}"));
            save_image(img, &path).with_context(|| format!("writing {}", path.display()))?;
            outputs.push(path);
        }
    } else {
        for dir in ["completed", "observed"] {
            let path = common.out.join(dir);
            fs::create_dir_all(&path).with_context(|| format!("creating {}", path.display()))?;
        }
        for (i, path) in paths.iter().enumerate() {
            let name = path.file_name().expect("frame paths have file names");
            for (dir, img) in [("completed", &completed[i]), ("observed", &observed[i])] {
                let out = common.out.join(dir).join(name).with_extension(extension(img));
                save_image(img, &out).with_context(|| format!("writing {}", out.display()))?;
                outputs.push(out);
            }
        }
    }

    // score what was written: the 8-bit output against the input
    let written: Vec<ImageBuffer> = completed
        .iter()
        .map(|img| ImageBuffer::from_bytes(img.height(), img.width(), img.channels(), &img.to_bytes()))
        .collect::<trnnm::Result<_>>()
        ?;
    let written = tensorize_frames(&written, &shape)?;
    let summary = Summary {
        rse: rse(&written, &truth)?,
        iterations: report.iterations,
        converged: report.converged,
        seconds: start.elapsed().as_secs_f64(),
        rse_unquantized: Some(rse(&x, &truth)?),
    };
    finish(
        common,
        &report,
        &summary,
        RunManifest {
            command: "complete".into(),
            inputs: paths,
            ranks: None,
            mask: mask_manifest(&mask_spec),
            shape: shape.clone(),
            solver: SolverManifest::new(&cfg, shape.len()),
            seed: common.seed,
            outputs,
            seconds: summary.seconds,
        },
    )?;
    Ok(summary)
}

fn mask_manifest(spec: &MaskSpec) -> MaskManifest {
    MaskManifest {
        kind: format!("{:?}", spec.kind),
        missing_ratio: spec.missing_ratio,
        seed: spec.seed,
        stripe_axis: format!("{:?}", spec.stripe_axis),
        per_frame: spec.per_frame,
    }
}

/// Writes trace.csv, summary.json and manifest.json.
fn finish(
    common: &CommonArgs,
    report: &SolverReport,
    summary: &Summary,
    mut manifest: RunManifest,
) -> anyhow::Result<()> {
    let trace = common.out.join("trace.csv");
    let summary_path = common.out.join("summary.json");
    write_text(&trace, &trace_csv(report))?;
    write_json(&summary_path, summary)?;
    manifest.outputs.extend([trace, summary_path]);
    write_json(&common.out.join("manifest.json"), &manifest)?;
    println!(
        "rse {:.6e}  iterations {}  converged {}  seconds {:.2}",
        summary.rse, summary.iterations, summary.converged, summary.seconds
    );
    Ok(())
}

pub fn synth(args: &SynthArgs) -> Result<Summary, CliError> {
    let common = &args.common;
    let start = Instant::now();
    if args.ranks.len() != args.shape.len() {
        return Err(usage(format!(
            "--ranks has {} entries but --shape has {}",
            args.ranks.len(),
            args.shape.len()
        )));
    }
    let cfg = common.solver_config();
    let order = args.shape.len();
    validate_solver(&cfg, order)?;

    let tr = random_tr(&args.shape, &args.ranks, common.seed).map_err(|e| usage(e.to_string()))?;
    if args.check_rank_bound {
        let report = check_rank_bound(&tr, cfg.step_length(order))?;
        println!("   k    t       size   rank  bound  pass");
        for row in &report.rows {
            println!(
                "{:>4} {:>4} {:>10} {:>6} {:>6}  {}",
                row.k,
                row.t,
                format!("{}x{}", row.rows, row.cols),
                row.rank,
                row.bound,
                if row.pass { "yes" } else { "NO" }
            );
        }
        println!(
            "rank bound: {}",
            if report.all_pass() { "all pass" } else { "VIOLATED" }
        );
    }

    let truth = tr_contract(&tr);
    let mask = random_entries(truth.len(), common.mr, common.seed).map_err(|e| usage(e.to_string()))?;
    let obs = ObservationSet::new(truth.clone(), mask)?;
    let (x, report) = solve(&obs, cfg.clone(), common.verbose)?;

    fs::create_dir_all(&common.out)
        .with_context(|| format!("creating {}", common.out.display()))?;
    let summary = Summary {
        rse: rse(&x, &truth)?,
        iterations: report.iterations,
        converged: report.converged,
        seconds: start.elapsed().as_secs_f64(),
        rse_unquantized: None,
    };
    let spec = MaskSpec::new(MaskKind::RandomEntries, common.mr, common.seed);
    finish(
        common,
        &report,
        &summary,
        RunManifest {
            command: "synth".into(),
            inputs: Vec::new(),
            ranks: Some(args.ranks.clone()),
            mask: mask_manifest(&spec),
            shape: args.shape.clone(),
            solver: SolverManifest::new(&cfg, order),
            seed: common.seed,
            outputs: Vec::new(),
            seconds: summary.seconds,
        },
    )?;
    Ok(summary)
}
