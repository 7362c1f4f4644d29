//! End-to-end CLI checks: flags, outputs, exit codes, and file-backed
//! weights.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_biparam-harness"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("biparam-cli-{tag}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn martingale_run_writes_reports() {
    let dir = temp_dir("mart");
    let out = dir.join("out");
    let status = bin()
        .args([
            "martingale-domination",
            "--depth",
            "4,4",
            "--trials",
            "5",
            "--seed",
            "3",
            "--beta",
            "0.75",
            "--c",
            "4",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert!(csv.starts_with("# biparam-sweep schema=v1"));
    assert_eq!(csv.lines().count(), 2 + 5); // comment + header + rows
    assert!(out.join("report.json").exists());
    assert!(out.join("plotdata/ratio_vs_depth.csv").exists());
    assert!(out.join("plotdata/ratio_vs_complexity.csv").exists());
    assert!(out.join("plotdata/ratio_vs_a2.csv").exists());
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn cli_runs_are_byte_identical() {
    let dir = temp_dir("det");
    let (a, b) = (dir.join("a"), dir.join("b"));
    for out in [&a, &b] {
        let status = bin()
            .args(["shift-domination", "--depth", "4,4", "--trials", "9", "--seed", "5", "--out"])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert_eq!(fs::read(a.join("sweep.csv")).unwrap(), fs::read(b.join("sweep.csv")).unwrap());
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn invalid_config_exits_two() {
    let status = bin()
        .args(["martingale-domination", "--beta", "0.4", "--trials", "1"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let status = bin()
        .args(["martingale-domination", "--c", "1.0", "--trials", "1"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn missing_baseline_exits_one() {
    let status = bin()
        .args([
            "weak-type",
            "--depth",
            "5",
            "--trials",
            "2",
            "--baseline",
            "/nonexistent/baseline.json",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn freeze_then_compare_passes() {
    let dir = temp_dir("freeze");
    let baseline = dir.join("base.json");
    let run = |freeze: bool| {
        let mut cmd = bin();
        cmd.args(["weak-type", "--depth", "6", "--trials", "4", "--seed", "9", "--baseline"]);
        cmd.arg(&baseline);
        if freeze {
            cmd.arg("--freeze-baseline");
        }
        cmd.status().unwrap()
    };
    assert!(run(true).success());
    assert!(run(false).success());
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn weight_file_round_trips_through_cli() {
    use biparam_sparse::gridfn::GridFunction;
    use biparam_sparse::ProductGrid;
    let dir = temp_dir("wfile");
    let grid = ProductGrid::standard(4, 4);
    let w = GridFunction::from_cell_centers(grid, |x, y| 1.0 + x + y);
    let wpath = dir.join("weight.json");
    fs::write(&wpath, w.to_json()).unwrap();
    let out = dir.join("out");
    let status = bin()
        .args(["weighted-norm", "--depth", "4,4", "--trials", "2", "--weight"])
        .arg(&wpath)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert!(csv.contains("weight"), "csv: {csv}");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_file_drives_run_and_flags_override() {
    let dir = temp_dir("cfg");
    let cfg_path = dir.join("config.json");
    let cfg = biparam_harness::config::ExperimentConfig {
        trials: 3,
        depth_x: 4,
        depth_y: 4,
        seed: 11,
        ..Default::default()
    };
    fs::write(&cfg_path, cfg.to_json()).unwrap();
    let out = dir.join("out");
    let status = bin()
        .args(["martingale-domination", "--config"])
        .arg(&cfg_path)
        .args(["--trials", "2", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2 + 2, "flag overrides config trials");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn weights_manifest_lists_corpus() {
    let output = bin().arg("weights-manifest").output().unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    let names: Vec<&str> =
        parsed.as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"const_1"));
    assert!(names.contains(&"power_0.9_0.9"));
    assert!(names.contains(&"step_x_2_1"));
}

#[test]
fn thread_cap_env_changes_nothing_observable() {
    let dir = temp_dir("threads");
    let (a, b) = (dir.join("a"), dir.join("b"));
    for (out, threads) in [(&a, "1"), (&b, "8")] {
        let status = bin()
            .env("BIPARAM_SPARSE_THREADS", threads)
            .args(["covering", "--depth", "4,4", "--trials", "4", "--seed", "2", "--out"])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert_eq!(fs::read(a.join("sweep.csv")).unwrap(), fs::read(b.join("sweep.csv")).unwrap());
    fs::remove_dir_all(&dir).ok();
}
