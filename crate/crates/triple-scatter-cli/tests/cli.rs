use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_triple-scatter"))
}

fn run(sub: &str, config: &str, dir: &Path, extra: &[&str]) -> i32 {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    bin()
        .arg(sub)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .status()
        .unwrap()
        .code()
        .unwrap()
}

#[test]
fn zero_kappa_scan_gives_identity_rows() {
    let dir = TempDir::new().unwrap();
    let code = run(
        "scan",
        r#"{"model": {"kind": "star_graph", "n": 2}, "kappa": "zero", "k_grid": {"min": 0.5, "max": 4, "count": 8}}"#,
        dir.path(),
        &[],
    );
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(dir.path().join("out/scattering.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[0], "k");
    assert_eq!(*header.last().unwrap(), "reason");
    let re = |i, j| header.iter().position(|h| *h == format!("sigma_re_{i}_{j}")).unwrap();
    let im = |i, j| header.iter().position(|h| *h == format!("sigma_im_{i}_{j}")).unwrap();
    let mut rows = 0;
    for line in lines {
        let f: Vec<f64> = line.split(',').take(header.len() - 2).map(|x| x.parse().unwrap()).collect();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((f[re(i, j)] - want).abs() < 1e-12);
                assert!(f[im(i, j)].abs() < 1e-12);
            }
        }
        rows += 1;
    }
    assert_eq!(rows, 8);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/scattering.json")).unwrap()).unwrap();
    assert_eq!(json["samples"].as_array().unwrap().len(), 8);
    assert_eq!(json["samples"][0]["sigma_hat"][1][1], serde_json::json!([1.0, 0.0]));
}

#[test]
fn pole_on_grid_is_skipped_with_reason() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"model": {"kind": "lead_rational", "w": [[[1,0]]], "v": [[[0,0]]],
        "poles": [{"lambda": 2.0, "residue": [[[1,0]]]}]},
        "k_grid": {"min": 1, "max": 3, "count": 5}}"#;
    assert_eq!(run("scan", cfg, dir.path(), &[]), 2);
    let csv = std::fs::read_to_string(dir.path().join("out/scattering.csv")).unwrap();
    let skipped: Vec<&str> = csv.lines().filter(|l| l.ends_with("AtPole")).collect();
    assert_eq!(skipped.len(), 1);
    assert!(skipped[0].starts_with("2.0"));
}

#[test]
fn non_square_kappa_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"model": {"kind": "star_graph", "n": 2}, "kappa": [[[1,0],[0,0]]]}"#;
    assert_eq!(run("scan", cfg, dir.path(), &[]), 1);
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_field_only_fails_in_strict_mode() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"model": {"kind": "star_graph", "n": 1}, "kapa": "zero", "k_grid": {"count": 3}}"#;
    assert_eq!(run("scan", cfg, dir.path(), &["--strict"]), 1);
    assert_eq!(run("scan", cfg, dir.path(), &[]), 0);
}

#[test]
fn empty_suites_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"model": {"kind": "star_graph", "n": 2}, "suites": []}"#;
    assert_eq!(run("verify", cfg, dir.path(), &[]), 1);
    assert!(!dir.path().join("out").exists());
}

#[test]
fn corrupted_kappa_sign_fails_the_oracle_check() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"model": {"kind": "star_graph", "n": 2}, "kappa": "diag:[1,-1]", "suites": ["oracle-equivalence"]}"#;
    assert_eq!(run("verify", cfg, dir.path(), &[]), 0);
    assert_eq!(run("verify", cfg, dir.path(), &["--debug-flip-kappa-sign"]), 3);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    let check = report["suites"][0]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["tag"] == "sigma-vs-oracle")
        .unwrap();
    assert_eq!(check["pass"], false);
    let r = check["residual"].as_f64().unwrap();
    assert!(r > 0.1 && r < 10.0, "{r}");
    assert_eq!(report["pass"], false);
}

#[test]
fn verify_report_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"model": {"kind": "star_graph", "n": 2}, "kappa": "random",
        "suites": ["oracle-equivalence", "weight-identity", "theta-identities"]}"#;
    assert_eq!(run("verify", cfg, dir.path(), &["--seed", "11"]), 0);
    let first = std::fs::read(dir.path().join("out/report.json")).unwrap();
    assert_eq!(run("verify", cfg, dir.path(), &["--seed", "11"]), 0);
    let second = std::fs::read(dir.path().join("out/report.json")).unwrap();
    assert_eq!(first, second);
    let report: serde_json::Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(report["environment"]["seed"], 11);
    assert!(std::fs::read_to_string(dir.path().join("out/report.txt")).unwrap().contains("overall: PASS"));
}

#[test]
fn corpus_round_trips_through_import() {
    use std::sync::Arc;
    use triple_scatter::hardy::measures::Setup;
    use triple_scatter::hardy::{ExportedVector, Grid, ModelVector, SymbolTrack};

    let dir = TempDir::new().unwrap();
    let cfg = r#"{"model": {"kind": "star_graph", "n": 1}, "hardy": {"N": 1024, "L": 50}}"#;
    assert_eq!(run("corpus", cfg, dir.path(), &[]), 0);
    let text = std::fs::read_to_string(dir.path().join("out/corpus.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    let entries = json["entries"].as_array().unwrap();
    assert!(entries.len() >= 4);

    let setup = Setup::standard();
    let grid = Arc::new(Grid::new(50.0, 1024).unwrap());
    let track = Arc::new(SymbolTrack::from_model(grid, &setup.ext, &setup.model).unwrap());
    for e in entries {
        let data: ExportedVector = serde_json::from_value(e["smooth"].clone()).unwrap();
        let v = ModelVector::import(track.clone(), &data).unwrap();
        assert_eq!(serde_json::to_value(v.export()).unwrap(), e["smooth"]);
    }
}

#[test]
fn schema_lists_every_suite() {
    let out = bin().arg("schema").output().unwrap();
    assert!(out.status.success());
    let schema: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let names = schema["properties"]["suites"]["items"]["enum"].as_array().unwrap();
    for s in triple_scatter_cli::suites::SUITES {
        assert!(names.iter().any(|n| n == s));
    }
}
