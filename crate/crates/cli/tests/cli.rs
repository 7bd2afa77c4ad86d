//! End-to-end tests that drive the compiled `cpdp` binary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cpdp::data::METRIC_NAMES;

fn cpdp_cmd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cpdp"))
}

fn run(args: &[&str]) -> Output {
    cpdp_cmd()
        .args(args)
        .output()
        .expect("the cpdp binary should be runnable")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Deterministic synthetic dataset: every third row is defective and sits
/// in a different region of metric space than the clean rows.
fn dataset_csv(salt: usize) -> String {
    let mut csv = String::from("name");
    for m in METRIC_NAMES {
        write!(csv, ",{m}").unwrap();
    }
    csv.push_str(",bug\n");
    for i in 0..20 {
        let defective = i % 3 == 0;
        write!(csv, "class{i}").unwrap();
        for j in 0..METRIC_NAMES.len() {
            let base = if defective { 3.0 } else { 0.5 };
            let jitter = ((i * 31 + j * 17 + salt * 7) % 23) as f64 / 23.0;
            write!(csv, ",{:.4}", base + j as f64 * 0.1 + jitter).unwrap();
        }
        writeln!(csv, ",{}", u32::from(defective)).unwrap();
    }
    csv
}

fn write_corpus(dir: &Path) -> PathBuf {
    let mut manifest = String::new();
    for (salt, (project, version)) in [
        ("alpha", "1"),
        ("alpha", "2"),
        ("beta", "1"),
        ("beta", "2"),
        ("gamma", "1"),
    ]
    .into_iter()
    .enumerate()
    {
        let file = format!("{project}-{version}.csv");
        std::fs::write(dir.join(&file), dataset_csv(salt)).unwrap();
        writeln!(manifest, "{file} {project} {version}").unwrap();
    }
    let path = dir.join("manifest.txt");
    std::fs::write(&path, manifest).unwrap();
    path
}

#[test]
fn compare_writes_artifacts_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_corpus(dir.path());
    let manifest = manifest.to_str().unwrap();

    let compare = |out: &str| -> Output {
        run(&[
            "compare",
            "--manifest",
            manifest,
            "--out",
            dir.path().join(out).to_str().unwrap(),
            "--seed",
            "5",
            "--methods",
            "orig_nb,2009Turhan_nb,2012Ma_nb",
        ])
    };
    let first = compare("out1");
    assert!(
        first.status.success(),
        "compare failed: {}",
        stderr_of(&first)
    );
    let text = stdout_of(&first);
    assert!(text.contains("cells.csv"), "stdout should list artifacts: {text}");
    for file in ["cells.csv", "summary.csv", "stats.md"] {
        assert!(
            dir.path().join("out1").join(file).is_file(),
            "{file} missing after compare"
        );
    }

    let second = compare("out2");
    assert!(second.status.success(), "rerun failed: {}", stderr_of(&second));
    let a = std::fs::read(dir.path().join("out1/cells.csv")).unwrap();
    let b = std::fs::read(dir.path().join("out2/cells.csv")).unwrap();
    assert_eq!(a, b, "same seed must reproduce cells.csv byte for byte");

    let cells = String::from_utf8(a).unwrap();
    assert_eq!(
        cells.lines().next(),
        Some("dataset,method,auc,seed,wall_ms"),
        "cells.csv header"
    );
    assert_eq!(cells.lines().count(), 1 + 5 * 3, "5 datasets x 3 methods");
}

#[test]
fn stats_recomputes_reports_from_a_cell_table() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_corpus(dir.path());
    let out = run(&[
        "compare",
        "--manifest",
        manifest.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
        "--methods",
        "orig_nb,orig_rf,2009Cruz_nb",
    ]);
    assert!(out.status.success(), "compare failed: {}", stderr_of(&out));

    let report = dir.path().join("restats.md");
    let out = run(&[
        "stats",
        "--cells",
        dir.path().join("out/cells.csv").to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stats failed: {}", stderr_of(&out));
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(
        text.contains("orig_nb") && text.contains("2009Cruz_nb"),
        "report should mention every method: {text}"
    );
}

#[test]
fn extract_features_writes_one_row_per_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_corpus(dir.path());
    let out = run(&[
        "extract-features",
        "--manifest",
        manifest.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
        "--meta-set",
        "dist",
    ]);
    assert!(out.status.success(), "extract failed: {}", stderr_of(&out));
    let table = std::fs::read_to_string(dir.path().join("out/features_dist.csv")).unwrap();
    let mut lines = table.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("dataset,"), "header: {header}");
    assert!(header.contains("dam_med"), "header: {header}");
    assert_eq!(header.split(',').count(), 1 + 101, "one column per feature");
    assert_eq!(lines.count(), 5, "one row per dataset");
}

#[test]
fn meta_then_recommend_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_corpus(dir.path());
    let out_dir = dir.path().join("out");
    let out = run(&[
        "meta",
        "--manifest",
        manifest.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--seed",
        "3",
        "--meta-set",
        "uns",
    ]);
    assert!(out.status.success(), "meta failed: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(
        text.contains("recommendation accuracy"),
        "meta should report its accuracy: {text}"
    );
    for file in [
        "cells.csv",
        "meta_subsets.csv",
        "meta_recommendations.csv",
        "meta_summary.md",
        "meta_model.json",
    ] {
        assert!(out_dir.join(file).is_file(), "{file} missing after meta");
    }

    let out = run(&[
        "recommend",
        "--model",
        out_dir.join("meta_model.json").to_str().unwrap(),
        "--target",
        dir.path().join("alpha-1.csv").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "recommend failed: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(
        text.starts_with("alpha-1: use "),
        "recommendation line: {text}"
    );
    let label = text.lines().next().unwrap().trim_start_matches("alpha-1: use ");
    assert!(
        ["2012Ma_nb", "2013He_rf", "2009Turhan_nb", "2013He_svm"].contains(&label),
        "label outside the universe: {label}"
    );
}

#[test]
fn usage_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_corpus(dir.path());
    let manifest = manifest.to_str().unwrap();

    // Unknown method id.
    let out = run(&[
        "compare",
        "--manifest",
        manifest,
        "--out",
        dir.path().join("o1").to_str().unwrap(),
        "--methods",
        "orig_nb,no_such_method",
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("error:"));

    // Missing manifest file.
    let out = run(&[
        "compare",
        "--manifest",
        dir.path().join("absent.txt").to_str().unwrap(),
        "--out",
        dir.path().join("o2").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));

    // Dataset CSV with a metric column missing.
    let broken = dataset_csv(0).replace(",wmc", ",not_wmc");
    std::fs::write(dir.path().join("broken-1.csv"), broken).unwrap();
    std::fs::write(dir.path().join("broken.txt"), "broken-1.csv broken 1\nalpha-1.csv alpha 1\n")
        .unwrap();
    let out = run(&[
        "compare",
        "--manifest",
        dir.path().join("broken.txt").to_str().unwrap(),
        "--out",
        dir.path().join("o3").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("wmc"), "stderr: {}", stderr_of(&out));

    // Corrupted model file.
    std::fs::write(dir.path().join("model.json"), "{\"format\":\"wrong\"}").unwrap();
    let out = run(&[
        "recommend",
        "--model",
        dir.path().join("model.json").to_str().unwrap(),
        "--target",
        dir.path().join("alpha-1.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
}

#[test]
fn runtime_failures_exit_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    // "solo" has no defective rows at all, so any fold that trains on it
    // alone cannot fit a two-class model.
    let clean = dataset_csv(1).replace(",1\n", ",0\n");
    std::fs::write(dir.path().join("solo-1.csv"), clean).unwrap();
    std::fs::write(dir.path().join("mix-1.csv"), dataset_csv(2)).unwrap();
    std::fs::write(
        dir.path().join("manifest.txt"),
        "solo-1.csv solo 1\nmix-1.csv mix 1\n",
    )
    .unwrap();

    let out = run(&[
        "compare",
        "--manifest",
        dir.path().join("manifest.txt").to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
        "--methods",
        "orig_nb",
    ]);
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("error:"));
}
