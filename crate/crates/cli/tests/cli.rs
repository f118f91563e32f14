use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use tempfile::TempDir;

const SQUARE: &str = r#"
[domain]
kind = "rectangle"
x0 = -1.0
x1 = 1.0
y0 = -1.0
y1 = 1.0
"#;

fn run(cmd: &str, dir: &TempDir, config: &str) -> (i32, PathBuf, String) {
    let path = dir.path().join("exp.toml");
    std::fs::write(&path, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_holozeros")).arg(cmd).arg(&path).output().unwrap();
    let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
    (out.status.code().unwrap(), dir.path().join("out"), stderr)
}

fn csv_column(path: &Path, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let k = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[k].to_string()).collect()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn cosh_counts_match_the_closed_form() {
    let dir = TempDir::new().unwrap();
    let (code, out, err) = run("count", &dir, &format!("h_grid = [0.1, 0.05]\n[family]\nkind = \"cosh\"\n{SQUARE}\n[output]\nplot = true\n"));
    assert_eq!(code, 0, "{err}");
    let expected: Vec<String> = [0.1f64, 0.05].iter().map(|h| (2 * (1.0 / (PI * h) + 0.5).floor() as i64).to_string()).collect();
    assert_eq!(csv_column(&out.join("count.csv"), "count"), expected);
    let hashes = csv_column(&out.join("count.csv"), "config_hash");
    assert!(hashes.iter().all(|h| h.len() == 64 && *h == hashes[0]));
    assert_eq!(json(&out.join("count.json"))["config_hash"], hashes[0].as_str());
    assert!(std::fs::read_to_string(out.join("zeros_1.svg")).unwrap().matches("<circle").count() == 12);
}

#[test]
fn bad_configs_exit_64() {
    let dir = TempDir::new().unwrap();
    let missing = Command::new(env!("CARGO_BIN_EXE_holozeros")).args(["count", "/nonexistent/exp.toml"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(64));
    let (code, _, err) = run("count", &dir, &format!("h_grid = [0.1]\n[family]\nkind = \"model_file\"\npath = \"nowhere.toml\"\n{SQUARE}"));
    assert_eq!(code, 64, "{err}");
    assert!(err.contains("nowhere.toml"), "{err}");
    let (code, _, _) = run("count", &dir, &format!("h_grid = [0.1]\nbogus = 1\n[family]\nkind = \"cosh\"\n{SQUARE}"));
    assert_eq!(code, 64);
    let (code, _, _) = run("count", &dir, &format!("h_grid = []\n[family]\nkind = \"cosh\"\n{SQUARE}"));
    assert_eq!(code, 64);
}

#[test]
fn model_files_are_resolved_next_to_the_config() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("model.json"), r#"{"n": 2, "phases": [[[0.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]]]}"#).unwrap();
    let (code, out, err) = run("count", &dir, &format!("h_grid = [0.1]\n[family]\nkind = \"model_file\"\npath = \"model.json\"\n{SQUARE}"));
    assert_eq!(code, 0, "{err}");
    assert_eq!(csv_column(&out.join("count.csv"), "count"), ["6"]);
}

#[test]
fn certify_fits_c2_and_sabotage_fails() {
    let dir = TempDir::new().unwrap();
    let base = format!("h_grid = [0.1, 0.05]\n[family]\nkind = \"cosh\"\n{SQUARE}\n[geometry]\nr = 0.2\n");
    let (code, out, err) = run("certify", &dir, &base);
    assert_eq!(code, 0, "{err}");
    let report = json(&out.join("certificates.json"));
    assert_eq!(report["c2_fitted"], true);
    assert!(report["c2"].as_f64().unwrap() > 0.0 && report["c2"].as_f64().unwrap() <= 10.0);
    assert_eq!(csv_column(&out.join("certify.csv"), "satisfied"), ["true", "true"]);

    let (code, out, _) = run("certify", &dir, &format!("{base}c2 = 0.0\n"));
    assert_eq!(code, 1);
    let report = json(&out.join("certificates.json"));
    assert_eq!(report["all_satisfied"], false);
    assert_eq!(report["certificates"].as_array().unwrap().len(), 2);
}

#[test]
fn triple_tie_family_is_an_assumption_violation() {
    let dir = TempDir::new().unwrap();
    let phases = "phases = [[[0.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]";
    let (code, out, err) = run("certify", &dir, &format!("h_grid = [0.1]\n[family]\nkind = \"exp_sum\"\n{phases}\n{SQUARE}"));
    assert_eq!(code, 3, "{err}");
    let diag = json(&out.join("diagnostics.json"));
    assert_eq!(diag["errors"][0]["kind"], "TripleTie");
    assert!(diag["errors"][0]["message"].as_str().unwrap().contains("more than two phases"));
}

const SINE: &str = "r_grid = [10.0, 20.0, 40.0, 80.0]\n[family]\nkind = \"sine\"\n";

#[test]
fn sine_sector_residual_decays() {
    let dir = TempDir::new().unwrap();
    let q = PI / 4.0;
    let (code, out, err) = run("sector", &dir, &format!("{SINE}[sector]\ntheta = {}\nvartheta = {q}\nprofile = {{ kind = \"abs_sin\" }}\n[output]\nplot = true\n", -q));
    assert_eq!(code, 0, "{err}");
    assert_eq!(csv_column(&out.join("sector.csv"), "count"), ["3", "6", "12", "25"]);
    let res: Vec<f64> = csv_column(&out.join("sector.csv"), "normalized_residual").iter().map(|s| s.parse().unwrap()).collect();
    assert!(res[3].abs() <= 0.5 * res[0].abs());
    assert!(out.join("sector_residual.svg").exists());
}

#[test]
fn sector_edge_on_an_atom_exits_3() {
    // |sin| has a kink at angle 0, an atom of the angular measure
    let dir = TempDir::new().unwrap();
    let (code, out, err) = run("sector", &dir, &format!("{SINE}[sector]\ntheta = 0.0\nvartheta = {}\nprofile = {{ kind = \"abs_sin\" }}\n", PI / 4.0));
    assert_eq!(code, 3, "{err}");
    assert_eq!(json(&out.join("diagnostics.json"))["errors"][0]["kind"], "BoundaryCharge");
}

#[test]
fn disk_green_benchmark_passes() {
    let dir = TempDir::new().unwrap();
    let (code, out, err) = run("green", &dir, "[family]\nkind = \"cosh\"\n[green]\nbenchmark = \"disk\"\n[output]\nplot = true\n");
    assert_eq!(code, 0, "{err}");
    let err: f64 = csv_column(&out.join("green.csv"), "value")[0].parse().unwrap();
    assert!(err <= 0.02);
    assert!(std::fs::read_to_string(out.join("green_heatmap.svg")).unwrap().contains("<rect"));
}

#[test]
fn tiny_strip_has_insufficient_data() {
    let dir = TempDir::new().unwrap();
    let (code, _, err) = run("green", &dir, "[family]\nkind = \"cosh\"\n[green]\nbenchmark = \"strip\"\nwidth = 0.1\nlength = 0.2\nspacing = 0.02\n");
    assert_eq!(code, 3, "{err}");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let config = format!("h_grid = [0.1, 0.05]\n[family]\nkind = \"cosh\"\n{SQUARE}\n[output]\nplot = true\n");
    let files = ["count.csv", "count.json", "zeros_0.svg", "zeros_1.svg"];
    let (_, out, _) = run("count", &dir, &config);
    let first: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(out.join(f)).unwrap()).collect();
    std::fs::remove_dir_all(&out).unwrap();
    let (_, out, _) = run("count", &dir, &config);
    for (f, bytes) in files.iter().zip(first) {
        assert_eq!(std::fs::read(out.join(f)).unwrap(), bytes, "{f}");
    }
}
