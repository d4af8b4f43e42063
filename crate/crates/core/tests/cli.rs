use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hairy_cantor::hair::HairJson;
use hairy_cantor::rational::int;
use hairy_cantor::LengthModel;
use tempfile::TempDir;

fn hairy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hairy")).args(args).output().unwrap()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

fn read_model(p: &str) -> LengthModel {
    let json: HairJson = serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap();
    LengthModel::from_json(&json).unwrap()
}

fn write_model(p: &str, model: &LengthModel) {
    fs::write(p, serde_json::to_string(&model.to_json()).unwrap()).unwrap();
}

#[test]
fn usage_errors_exit_2_and_help_exits_0() {
    assert_eq!(hairy(&[]).status.code(), Some(2));
    assert_eq!(hairy(&["bogus"]).status.code(), Some(2));
    assert_eq!(hairy(&["example", "--depth", "x", "--out", "a.svg"]).status.code(), Some(2));
    assert_eq!(hairy(&["--help"]).status.code(), Some(0));
    assert_eq!(hairy(&["--version"]).status.code(), Some(0));
}

#[test]
fn example_outputs_by_extension() {
    let dir = TempDir::new().unwrap();
    let svg = path(&dir, "f.svg");
    assert!(hairy(&["example", "--depth", "4", "--out", &svg]).status.success());
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<line ").count(), 105);

    let uniform = path(&dir, "u.svg");
    assert!(hairy(&["example", "--depth", "4", "--out", &uniform, "--layout", "uniform"]).status.success());
    assert_ne!(fs::read_to_string(&uniform).unwrap(), text);

    let csv = path(&dir, "h.csv");
    assert!(hairy(&["example", "--depth", "4", "--out", &csv]).status.success());
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 106);

    let json = path(&dir, "m.json");
    assert!(hairy(&["example", "--depth", "3", "--out", &json]).status.success());
    assert_eq!(read_model(&json), LengthModel::canonical(3).unwrap());

    let bad = path(&dir, "m.txt");
    assert_eq!(hairy(&["example", "--depth", "3", "--out", &bad]).status.code(), Some(1));
    assert!(!Path::new(&bad).exists());
}

#[test]
fn heights_matches_example_csv() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (path(&dir, "a.csv"), path(&dir, "b.csv"));
    assert!(hairy(&["heights", "--depth", "4", "--out", &a]).status.success());
    assert!(hairy(&["example", "--depth", "4", "--out", &b]).status.success());
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert!(text.lines().nth(1).unwrap().ends_with(",0.041667,1/24"));
}

#[test]
fn perturb_match_and_check() {
    let dir = TempDir::new().unwrap();
    let (x, y, pair) = (path(&dir, "x.json"), path(&dir, "y.json"), path(&dir, "pair.json"));
    assert!(hairy(&["example", "--depth", "5", "--out", &x]).status.success());
    assert!(hairy(&["perturb", "--in", &x, "--level", "2", "--seed", "4", "--out", &y]).status.success());
    let (lx, ly) = (read_model(&x), read_model(&y));
    assert_ne!(lx, ly);
    for (a, b) in lx.values().iter().zip(ly.values()) {
        let f = b / a;
        assert!(f >= hairy_cantor::rational::rat(9, 10) && f <= hairy_cantor::rational::rat(11, 10));
    }

    let out = hairy(&["match", "--x", &x, "--y", &y, "--levels", "4", "--out", &pair]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&pair).unwrap()).unwrap();
    assert_eq!(json["levels"].as_array().unwrap().len(), 5);

    let out = hairy(&["check", "--in", &x]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["usc_failures"].as_array().unwrap().len(), 0);
}

#[test]
fn check_names_the_failing_witness() {
    let dir = TempDir::new().unwrap();
    let bad = path(&dir, "bad.json");
    let model = LengthModel::canonical(5).unwrap();
    let mut values = model.values().to_vec();
    values[0] = int(1);
    write_model(&bad, &model.with_values(values).unwrap());
    let out = hairy(&["check", "--in", &bad]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("(ii) fails"), "{stderr}");
    assert!(stderr.contains("(1,1"), "{stderr}");

    let missing = path(&dir, "missing.json");
    assert_eq!(hairy(&["check", "--in", &missing]).status.code(), Some(1));
}

#[test]
fn random_then_uniformize() {
    let dir = TempDir::new().unwrap();
    let (r, cert, out) = (path(&dir, "r.json"), path(&dir, "cert.json"), path(&dir, "u.json"));
    assert!(hairy(&["random", "--depth", "8", "--seed", "3", "--out", &r]).status.success());
    let o = hairy(&["uniformize", "--in", &r, "--stages", "3", "--certificate", &cert, "--out", &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let c: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(c["levels"], serde_json::json!([0, 1, 2, 3]));
    assert_eq!(read_model(&out).values().len(), 256);

    let canonical = path(&dir, "c.json");
    assert!(hairy(&["example", "--depth", "4", "--out", &canonical]).status.success());
    let o = hairy(&["uniformize", "--in", &canonical, "--stages", "1", "--certificate", &cert]);
    assert_eq!(o.status.code(), Some(1));
}
