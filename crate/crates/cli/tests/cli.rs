//! End-to-end command-line tests: simulate -> register -> evaluate round
//! trips on both scenarios, format checks on the emitted files, and exit
//! codes on malformed inputs.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_phasesep"))
}

fn read_csv_columns(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let cols = header.split(',').count();
    let mut columns = vec![Vec::new(); cols];
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        for (i, field) in line.split(',').enumerate() {
            columns[i].push(field.parse::<f64>().unwrap());
        }
    }
    (header, columns)
}

fn assert_nondecreasing(values: &[f64], what: &str) {
    for w in values.windows(2) {
        assert!(w[1] >= w[0] - 1e-12, "{what} is not monotone");
    }
}

#[test]
fn round_trip_both_scenarios() {
    for scenario in ["bimodal", "triangular"] {
        let dir = tempfile::tempdir().unwrap();
        let sim = dir.path().join("sim");
        let reg = dir.path().join("reg");
        let ev = dir.path().join("ev");

        let status = bin()
            .args(["simulate", "--scenario", scenario, "--n", "8", "--tau", "25", "--seed", "7"])
            .args(["--grid", "513", "--out"])
            .arg(&sim)
            .status()
            .unwrap();
        assert!(status.success());

        let status = bin()
            .args(["register", "--alpha", "0.2", "--grid", "513", "--input"])
            .arg(sim.join("patterns_warped.json"))
            .arg("--out")
            .arg(&reg)
            .status()
            .unwrap();
        assert!(status.success());

        let status = bin()
            .args(["evaluate", "--study", "rate", "--scenario", scenario, "--seed", "3"])
            .args(["--n-list", "4,6", "--replicates", "2", "--grid", "257", "--out"])
            .arg(&ev)
            .status()
            .unwrap();
        assert!(status.success());

        // emitted CSVs parse back and respect their monotonicity contracts
        let (header, cols) = read_csv_columns(&sim.join("truth_lambda.csv"));
        assert_eq!(header, "x,F");
        assert_nondecreasing(&cols[0], "truth grid");
        assert_nondecreasing(&cols[1], "truth CDF");
        assert_eq!(*cols[1].last().unwrap(), 1.0);

        let (header, cols) = read_csv_columns(&reg.join("lambda_hat.csv"));
        assert_eq!(header, "x,F");
        assert_nondecreasing(&cols[1], "lambda_hat CDF");

        let (_, cols) = read_csv_columns(&sim.join("warps_true.csv"));
        for (i, col) in cols.iter().enumerate().skip(1) {
            assert_nondecreasing(col, &format!("true warp {i}"));
        }

        let (header, cols) = read_csv_columns(&reg.join("warps").join("warp_000.csv"));
        assert_eq!(header, "x,T(x)");
        assert_nondecreasing(&cols[1], "estimated warp");

        assert!(ev.join("study_report.json").exists());
        assert!(ev.join("cells.csv").exists());

        // registered patterns preserve counts
        let warped: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(sim.join("patterns_warped.json")).unwrap(),
        )
        .unwrap();
        let registered: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(reg.join("patterns_registered.json")).unwrap(),
        )
        .unwrap();
        let count = |v: &serde_json::Value| -> Vec<usize> {
            v["processes"].as_array().unwrap().iter().map(|p| p.as_array().unwrap().len()).collect()
        };
        assert_eq!(count(&warped), count(&registered));
    }
}

#[test]
fn reproduce_emits_figure_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rep");
    let status = bin()
        .args(["reproduce", "--scenario", "triangular", "--seed", "1", "--n", "10"])
        .args(["--tau", "40", "--grid", "513", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    for file in [
        "cdf_comparison.csv",
        "density_comparison.csv",
        "warps_estimated.csv",
        "arithmetic_mean.csv",
        "slopes.csv",
        "summary.json",
    ] {
        assert!(out.join(file).exists(), "{file} missing");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!(summary["slope_pearson_r"].as_f64().unwrap() > 0.5);
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(
        &cfg_path,
        r#"{"scenario": "bimodal", "n": 5, "tau": 20.0, "seed": 9, "grid": 257}"#,
    )
    .unwrap();
    let out = dir.path().join("sim");
    // the flag overrides the config's n = 5
    let status = bin()
        .args(["simulate", "--n", "3", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["n"], 3);
    assert_eq!(summary["tau"], 20.0);
    assert_eq!(summary["seed"], 9);
}

#[test]
fn exit_codes_classify_failures() {
    // usage: unknown scenario value
    let status = bin().args(["simulate", "--scenario", "nope", "--seed", "1"]).output().unwrap();
    assert_eq!(status.status.code(), Some(2));

    // usage: missing seed
    let status = bin().args(["simulate", "--scenario", "bimodal"]).output().unwrap();
    assert_eq!(status.status.code(), Some(2));

    // I/O: missing input file
    let status = bin().args(["register", "--input", "/nonexistent/x.json"]).output().unwrap();
    assert_eq!(status.status.code(), Some(4));

    // validation: malformed JSON (with line context in the message)
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  broken\n}").unwrap();
    let out = bin().args(["register", "--input"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    // validation: non-positive parameter
    let status = bin()
        .args(["simulate", "--scenario", "bimodal", "--seed", "1", "--tau=-5"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(3));
}

#[test]
fn simulation_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let status = bin()
            .args(["simulate", "--scenario", "triangular", "--n", "4", "--tau", "15"])
            .args(["--seed", "11", "--grid", "257", "--out"])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    for file in ["patterns_warped.json", "truth_lambda.csv", "warps_true.csv"] {
        let x = std::fs::read(a.join(file)).unwrap();
        let y = std::fs::read(b.join(file)).unwrap();
        assert_eq!(x, y, "{file} differs between identical seeds");
    }
}
