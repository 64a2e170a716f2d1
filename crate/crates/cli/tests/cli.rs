use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use trnnm::data::{load_image, rse, save_image, tensorize, ImageBuffer, Summary};

fn trnnm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trnnm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/astronaut_256.ppm")
}

/// Top-left 32x32 crop of the fixture, written into `dir`.
fn small_image(dir: &Path) -> PathBuf {
    let img = load_image(fixture()).unwrap();
    let (w, c) = (img.width(), img.channels());
    let bytes = img.to_bytes();
    let crop: Vec<u8> = (0..32)
        .flat_map(|r| bytes[r * w * c..(r * w + 32) * c].iter().copied())
        .collect();
    let path = dir.join("small.ppm");
    save_image(&ImageBuffer::from_bytes(32, 32, c, &crop).unwrap(), &path).unwrap();
    path
}

fn complete(input: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "complete",
        "--input",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--max-iters",
        "40",
    ];
    args.extend_from_slice(extra);
    trnnm(&args)
}

fn summary(dir: &Path) -> Summary {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn complete_writes_artifacts() {
    let tmp = TempDir::new().unwrap();
    let input = small_image(tmp.path());
    let out = tmp.path().join("run");
    let o = complete(&input, &out, &["--shape", "4x8x4x8x3", "--mr", "0.2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["completed.ppm", "observed.ppm", "trace.csv", "summary.json", "manifest.json"] {
        assert!(out.join(name).is_file(), "missing {name}");
    }
    let trace = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    let s = summary(&out);
    assert_eq!(trace.lines().count(), s.iterations + 1);
    assert!(trace.starts_with("iter,rel_change,primal_residual,objective\n"));
    assert!(String::from_utf8_lossy(&o.stdout).contains("rse "));
}

#[test]
fn summary_rse_matches_written_output() {
    let tmp = TempDir::new().unwrap();
    let input = small_image(tmp.path());
    let out = tmp.path().join("run");
    let o = complete(&input, &out, &["--mask", "random", "--mr", "0.4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let shape = [3, 32, 32];
    let truth = tensorize(&load_image(&input).unwrap(), &shape).unwrap();
    let written = tensorize(&load_image(out.join("completed.ppm")).unwrap(), &shape).unwrap();
    let recomputed = rse(&written, &truth).unwrap();
    assert!((summary(&out).rse - recomputed).abs() <= 1e-12);
}

#[test]
fn repeated_runs_are_identical() {
    let tmp = TempDir::new().unwrap();
    let input = small_image(tmp.path());
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = complete(&input, dir, &["--seed", "7"]);
        assert!(o.status.success());
    }
    for name in ["completed.ppm", "observed.ppm", "trace.csv"] {
        assert_eq!(
            std::fs::read(a.join(name)).unwrap(),
            std::fs::read(b.join(name)).unwrap(),
            "{name} differs"
        );
    }
}

#[test]
fn full_missing_ratio_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let input = small_image(tmp.path());
    let o = complete(&input, tmp.path(), &["--mr", "1.0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing ratio must be < 1"));
}

#[test]
fn mismatched_shape_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let input = small_image(tmp.path());
    let o = complete(&input, tmp.path(), &["--shape", "4x4x3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_input_is_a_runtime_error() {
    let tmp = TempDir::new().unwrap();
    let o = complete(&tmp.path().join("nope.ppm"), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn synth_requires_ranks() {
    let o = trnnm(&["synth", "--shape", "4x4x4x4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn synth_reports_rse_and_rank_bound() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = trnnm(&[
        "synth", "--shape", "6x6x6x6", "--ranks", "2x2x2x2", "--mr", "0.3", "--seed", "3",
        "--check-rank-bound", "--out", out,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("rank bound: all pass"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("summary.json")).unwrap())
            .unwrap();
    assert!(json["rse"].as_f64().unwrap() < 1e-2);
}

#[test]
fn frame_directories_round_trip() {
    let tmp = TempDir::new().unwrap();
    let frames = tmp.path().join("frames");
    std::fs::create_dir(&frames).unwrap();
    let img = load_image(small_image(tmp.path())).unwrap();
    for i in 0..3 {
        save_image(&img, frames.join(format!("f{i}.ppm"))).unwrap();
    }
    let out = tmp.path().join("run");
    let o = complete(&frames, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for i in 0..3 {
        assert!(out.join("completed").join(format!("f{i}.ppm")).is_file());
    }
}
