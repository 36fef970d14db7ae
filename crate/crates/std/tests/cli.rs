use std::fs;
use std::path::Path;
use std::process::Command;

use besov_robust::density::DensityModel;
use besov_robust::estimators::{estimate_thresholded, EstimatorConfig};
use besov_robust::wavelet::WaveletFamily;
use besov_robust_std::config::{preset, Command as Cmd, ExperimentConfig, PRESET_NAMES};
use besov_robust_std::io::{points_to_csv, read_points, tree_from_jsonl, tree_to_jsonl, Outputs};
use besov_robust_std::sweep::run_sweep;
use besov_robust_std::{run, RunOptions};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_besov-robust"))
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn presets_exist_and_validate() {
    for name in PRESET_NAMES {
        let cfg = preset(name).unwrap();
        cfg.validate().unwrap();
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg, "{name}");
    }
    assert!(preset("nope").is_err());
    let out = bin().arg("presets").output().unwrap();
    let listed = String::from_utf8(out.stdout).unwrap();
    assert_eq!(listed.lines().collect::<Vec<_>>(), PRESET_NAMES.to_vec());
}

#[test]
fn rate_check_passes_and_fails_with_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ok");
    let st = bin()
        .args(["rate-check", "--preset", "holder1-tv-uncontaminated", "--trials", "6", "--jobs", "2", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    for f in ["trials.csv", "cells.csv", "report.json", "risk.svg", "verdict.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let fail = dir.path().join("fail");
    let o = bin()
        .args(["rate-check", "--preset", "holder1-tv-uncontaminated", "--trials", "3", "--tolerance", "1e-9", "--out"])
        .arg(&fail)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("FAIL"));
    let verdict: serde_json::Value = serde_json::from_slice(&fs::read(fail.join("verdict.json")).unwrap()).unwrap();
    assert_eq!(verdict["pass"], false);
}

#[test]
fn malformed_config_exits_2_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, "{\"command\": \"risk-sweep\", \"label\": 3}").unwrap();
    let out = dir.path().join("out");
    let o = bin().args(["risk-sweep", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(err["error"]["kind"], "config");
    assert!(!out.exists());

    let mut good = preset("holder1-tv-uncontaminated").unwrap();
    good.grid.eps = vec![1.5];
    fs::write(&cfg, good.to_json()).unwrap();
    let o = bin().args(["risk-sweep", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("eps 1.5"));
    assert!(!out.exists());

    let o = bin()
        .args(["rate-check", "--preset", "holder1-tv-uncontaminated", "--regime", "sparse", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(err["error"]["variant"], "RegimeMismatch");
    assert!(!out.exists());
}

#[test]
fn reruns_are_byte_identical_across_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut dirs = Vec::new();
    for (i, jobs) in ["1", "3", "3"].iter().enumerate() {
        let out = dir.path().join(format!("run{i}"));
        let st = bin()
            .args(["risk-sweep", "--preset", "structured-eps", "--trials", "4", "--n", "2048", "--jobs", jobs, "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert_eq!(st.code(), Some(0));
        dirs.push(read_dir_sorted(&out));
    }
    assert_eq!(dirs[0], dirs[1]);
    assert_eq!(dirs[1], dirs[2]);
    let out = dir.path().join("run2");
    let st = bin()
        .args(["risk-sweep", "--preset", "structured-eps", "--trials", "4", "--n", "2048", "--out"])
        .arg(&out)
        .env("BESOV_ROBUST_JOBS", "2")
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    assert_eq!(read_dir_sorted(&out), dirs[0]);
}

#[test]
fn adversary_and_breakdown_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("adv");
    let o = bin().args(["adversary", "--preset", "sparse", "--eps", "0.0625", "--out"]).arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("PASS"));
    let pairs: serde_json::Value = serde_json::from_slice(&fs::read(out.join("pairs.json")).unwrap()).unwrap();
    let p: DensityModel = serde_json::from_value(pairs[0]["p_tilde"].clone()).unwrap();
    assert_eq!(p.dim(), 1);
    let out = dir.path().join("bd");
    assert_eq!(bin().args(["breakdown", "--out"]).arg(&out).status().unwrap().code(), Some(0));
    let svg = fs::read_to_string(out.join("breakdown.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("polyline"));
    let csv = fs::read_to_string(out.join("breakdown.csv")).unwrap();
    assert!(csv.lines().next().unwrap().contains("breakdown_exponent"));
}

#[test]
fn estimate_from_sample_file() {
    let dir = tempfile::tempdir().unwrap();
    let x = besov_robust::density::sample(&DensityModel::uniform(1), 500, 3).unwrap();
    let path = dir.path().join("x.csv");
    fs::write(&path, points_to_csv(&x)).unwrap();
    assert_eq!(read_points(&path, 1).unwrap(), x);
    let out = dir.path().join("est");
    let st = bin()
        .args(["estimate", "--estimator", "thresholded", "--j0", "1", "--j1", "4", "--K", "0.5", "--samples"])
        .arg(&path)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let tree = tree_from_jsonl(&fs::read_to_string(out.join("tree.jsonl")).unwrap()).unwrap();
    let want = estimate_thresholded(&x, &WaveletFamily::haar(), &EstimatorConfig::thresholded(1, 4, 0.5)).unwrap();
    assert_eq!(tree, want);
    assert!(!out.join("samples.csv").exists());
    fs::write(&path, "0.1\n0.2,0.3\n").unwrap();
    let o = bin().args(["estimate", "--samples"]).arg(&path).arg("--out").arg(dir.path().join("e2")).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tree_jsonl_round_trip() {
    for f in [WaveletFamily::haar(), WaveletFamily::daubechies(3).unwrap()] {
        let x = besov_robust::density::sample(&DensityModel::uniform(2), 300, 8).unwrap();
        let t = estimate_thresholded(&x, &f, &EstimatorConfig::thresholded(0, 3, 0.2)).unwrap();
        let text = tree_to_jsonl(&t);
        assert_eq!(tree_from_jsonl(&text).unwrap(), t);
        assert_eq!(text.lines().count(), t.nnz() + 1);
    }
    assert!(tree_from_jsonl("").is_err());
    assert!(tree_from_jsonl("{\"format\":\"other\"}").is_err());
}

#[test]
fn outputs_commit_is_all_or_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let mut o = Outputs::default();
    o.add("a.txt", "1");
    o.add("sub/b.txt", "2");
    assert!(o.commit(dir.path()).is_err());
    assert!(fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn library_runs_match_report_determinism() {
    let mut cfg = preset("structured-eps").unwrap();
    cfg.grid.trials = 3;
    cfg.grid.n = vec![1024];
    cfg.command = Cmd::RiskSweep;
    let a = run_sweep(&cfg, Some(1)).unwrap();
    let b = run_sweep(&cfg, Some(4)).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let out = run(&cfg, &RunOptions { jobs: Some(2) }).unwrap();
    assert!(out.verdict.is_none());
    assert!(out.outputs.names().any(|n| n == "report.json"));
}
