use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use imitanet::CliError;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_imitanet"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(cmd: &str, cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().arg(cmd).arg("--config").arg(cfg).arg("--out").arg(out).args(extra).output().unwrap()
}

/// Every file under `root`, keyed by its path relative to `root`.
fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                files.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    files
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL_SWEEP: &str = r#"{
  "graph": {"kind": "barabasi_albert", "n": 30, "m": 2},
  "sweep": {
    "graphs": 2,
    "params": {"r": 1.0, "s": -1.0, "t": 3.0, "p": 2.0, "beta": 0.9},
    "seed_vertices": {"every": 3},
    "betas": [0.5, 0.8, 0.95],
    "alphas": [0.1, 0.25, 0.5],
    "horizon": 2000,
    "models": "both"
  },
  "seed": 11
}"#;

#[test]
fn same_seed_same_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let sweep = write_config(tmp.path(), "sweep.json", SMALL_SWEEP);
    let cases = [
        ("simulate", config("simulate_rps.json")),
        ("coevolve", config("coevolve_pd.json")),
        ("trend", config("trend_complete.json")),
        ("analyze", config("analyze_stag_hunt.json")),
        ("sweep", sweep),
    ];
    for (cmd, cfg) in cases {
        let a = tmp.path().join(format!("{cmd}_a"));
        let b = tmp.path().join(format!("{cmd}_b"));
        for out in [&a, &b] {
            let o = run(cmd, &cfg, out, &["--seed", "5"]);
            assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        }
        let (sa, sb) = (snapshot(&a), snapshot(&b));
        assert!(!sa.is_empty());
        assert_eq!(sa.keys().collect::<Vec<_>>(), sb.keys().collect::<Vec<_>>(), "{cmd}");
        for (name, bytes) in &sa {
            assert!(bytes == &sb[name], "{cmd}: {name} differs between runs");
        }
    }
}

#[test]
fn seed_flag_changes_random_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("simulate_rps.json");
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(run("simulate", &cfg, &a, &["--seed", "1"]).status.success());
    assert!(run("simulate", &cfg, &b, &["--seed", "2"]).status.success());
    assert_ne!(fs::read(a.join("trajectory.csv")).unwrap(), fs::read(b.join("trajectory.csv")).unwrap());
}

#[test]
fn manifest_lists_every_file() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("trend");
    assert!(run("trend", &config("trend_complete.json"), &out, &[]).status.success());
    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["command"], "trend");
    let listed: Vec<String> =
        manifest["files"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    let mut on_disk: Vec<String> = snapshot(&out).into_keys().filter(|k| k != "manifest.json").collect();
    on_disk.sort();
    assert_eq!(listed, on_disk);
    assert!(listed.iter().any(|f| f == "beta_0.85_alpha_0.1/summary.json"));
    assert!(manifest["config"]["out"].is_null());
}

#[test]
fn output_defaults_to_command_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin()
        .current_dir(tmp.path())
        .args(["analyze", "--config"])
        .arg(config("analyze_stag_hunt.json"))
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(tmp.path().join("out/analyze/analysis.json").exists());
}

#[test]
fn input_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let missing = tmp.path().join("nope.json");
    assert_eq!(run("simulate", &missing, &out, &[]).status.code(), Some(1));

    let unknown = write_config(tmp.path(), "unknown.json", r#"{"graph": {"kind": "karate_club"}, "colour": 1}"#);
    assert_eq!(run("simulate", &unknown, &out, &[]).status.code(), Some(1));

    let malformed = write_config(tmp.path(), "bad.json", "{ not json");
    assert_eq!(run("simulate", &malformed, &out, &[]).status.code(), Some(1));

    let unseeded = write_config(
        tmp.path(),
        "unseeded.json",
        r#"{"graph": {"kind": "karate_club"}, "game": {"kind": "stag_hunt"}, "profile": {"preset": "random-with-seed"}}"#,
    );
    let o = run("simulate", &unseeded, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
    assert!(run("simulate", &unseeded, &out, &["--seed", "3"]).status.success());

    let wrong_command = config("trend_complete.json");
    assert_eq!(run("simulate", &wrong_command, &out, &[]).status.code(), Some(1));

    let bad_alpha = write_config(
        tmp.path(),
        "alpha.json",
        r#"{"graph": {"kind": "path", "n": 3}, "game": {"kind": "chicken"}, "profile": {"preset": "random-with-seed"},
            "sim": {"alpha": 1.5}, "seed": 1}"#,
    );
    assert_eq!(run("simulate", &bad_alpha, &out, &[]).status.code(), Some(1));
}

#[test]
fn numeric_failures_map_to_two() {
    let numeric: CliError = imitanet_core::Error::Numeric("drift".into()).into();
    assert_eq!(numeric.exit_code(), 2);
    let domain: CliError = imitanet_core::Error::Domain("bad".into()).into();
    assert_eq!(domain.exit_code(), 1);
    assert_eq!(CliError::Io("disk".into()).exit_code(), 1);
}

fn r_squared(y: &[f64], residuals: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ssr: f64 = residuals.iter().map(|r| r * r).sum();
    1.0 - ssr / sst
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn regression_r_squared_matches_residuals() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "sweep.json", SMALL_SWEEP);
    let out = tmp.path().join("sweep");
    assert!(run("sweep", &cfg, &out, &[]).status.success());
    let report = read_json(&out.join("regression.json"));

    let csv = fs::read_to_string(out.join("saturation.csv")).unwrap();
    let y: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(5).unwrap().parse::<f64>().unwrap())
        .filter(|&p| p < 1.0 - 1e-9)
        .map(|p| (1.0 - p).ln())
        .collect();
    let degree = &report["degree_model"];
    let res = floats(&degree["residuals"]);
    assert_eq!(res.len(), y.len());
    assert!((r_squared(&y, &res) - degree["r_squared"].as_f64().unwrap()).abs() < 1e-9);

    let cells = fs::read_to_string(out.join("mean_saturation.csv")).unwrap();
    let means: Vec<f64> = cells.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(means.len(), 9);
    let mean = &report["mean_model"];
    let res = floats(&mean["residuals"]);
    assert!((r_squared(&means, &res) - mean["r_squared"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn constant_saturation_has_zero_r_squared() {
    let tmp = tempfile::tempdir().unwrap();
    // Ten isolated players: nobody ever adopts beyond the seed.
    fs::write(tmp.path().join("isolated.edges"), "").unwrap();
    let cfg = write_config(
        tmp.path(),
        "sweep.json",
        r#"{"graph": {"kind": "edge_list", "path": "isolated.edges", "n": 10},
            "sweep": {"graphs": 1, "params": {"r": 1.0, "s": -1.0, "t": 3.0, "p": 2.0, "beta": 0.9},
                      "seed_vertices": "all", "betas": [0.5, 0.9], "alphas": [0.1, 0.3], "horizon": 50,
                      "models": "both"},
            "seed": 1}"#,
    );
    let out = tmp.path().join("sweep");
    let o = run("sweep", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&out.join("regression.json"));
    for model in ["degree_model", "mean_model"] {
        assert_eq!(report[model]["r_squared"], 0.0, "{model}");
        assert_eq!(report[model]["degenerate"], true, "{model}");
    }
}
