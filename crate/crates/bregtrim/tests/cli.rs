use std::path::Path;
use std::process::{Command, Output};

use bregtrim::io::{parse_divergence, read_dataset};
use bregtrim::report::FitResultFile;

fn bregtrim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bregtrim"))
        .current_dir(dir)
        .env_remove("BREGTRIM_THREADS")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = bregtrim(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fails_with(dir: &Path, args: &[&str], code: i32) -> String {
    let out = bregtrim(dir, args);
    assert_eq!(out.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stderr).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["generate", "--preset", "gamma,small", "--seed", "3", "--out", "a.csv"]);
    ok(d, &["generate", "--preset", "gamma,small", "--seed", "3", "--out", "b.csv"]);
    ok(d, &["generate", "--preset", "gamma,small", "--seed", "4", "--out", "c.csv"]);
    let a = std::fs::read(d.join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(d.join("b.csv")).unwrap());
    assert_ne!(a, std::fs::read(d.join("c.csv")).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("x1,x2,label\n"));
    assert_eq!(text.lines().count(), 121);
}

#[test]
fn generate_rejects_unknown_preset() {
    let dir = tempfile::tempdir().unwrap();
    fails_with(dir.path(), &["generate", "--preset", "weibull,small", "--out", "a.csv"], 2);
    assert!(!dir.path().join("a.csv").exists());
}

#[test]
fn generate_from_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(
        d,
        "spec.json",
        r#"{"components": [{"laws": [{"law": "poisson", "lambda": 5}], "weight": 1}],
            "n_signal": 30, "n_noise": 5, "noise_box": [[0, 50]], "dim": 1}"#,
    );
    ok(d, &["generate", "--spec", "spec.json", "--seed", "1", "--out", "s.csv"]);
    let data = read_dataset(&d.join("s.csv")).unwrap();
    assert_eq!(data.data.len(), 35);
    assert_eq!(data.data.labels().unwrap().iter().filter(|&&l| l == 0).count(), 5);
    write(d, "bad.json", r#"{"components": [], "dim": 1}"#);
    fails_with(d, &["generate", "--spec", "bad.json", "--out", "t.csv"], 2);
}

#[test]
fn fit_toy_example() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "toy.csv", "0\n0\n10\n10\n1000\n");
    let stdout = ok(d, &["fit", "--in", "toy.csv", "--k", "2", "--q", "4", "--out", "fit.json"]);
    assert!(stdout.starts_with("cost 0\n"));
    let file = FitResultFile::from_json(&std::fs::read_to_string(d.join("fit.json")).unwrap()).unwrap();
    assert_eq!(file.labels, vec![1, 1, 2, 2, 0]);
    assert_eq!(file.codebook, vec![vec![0.0], vec![10.0]]);
    assert_eq!((file.k, file.q, file.n, file.d), (2, 4, 5, 1));
}

#[test]
fn fit_result_round_trips_cost() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["generate", "--preset", "binomial,small", "--seed", "5", "--out", "data.csv"]);
    ok(d, &[
        "fit", "--in", "data.csv", "--divergence", "binomial:100", "--k", "3", "--q", "110", "--out", "fit.json",
    ]);
    let file = FitResultFile::from_json(&std::fs::read_to_string(d.join("fit.json")).unwrap()).unwrap();
    let data = read_dataset(&d.join("data.csv")).unwrap();
    let div = parse_divergence(&file.divergence).unwrap();
    let cost = file.recompute_cost(&div, &data.data).unwrap();
    assert!((cost - file.cost).abs() <= 1e-9 * file.cost.max(1.0), "{cost} vs {}", file.cost);
    assert_eq!(file.labels.iter().filter(|&&l| l != 0).count(), 110);
}

#[test]
fn fit_rejects_bad_parameters_and_domains() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "toy.csv", "0\n0\n10\n10\n1000\n");
    fails_with(d, &["fit", "--in", "toy.csv", "--k", "2", "--q", "6"], 2);
    fails_with(d, &["fit", "--in", "toy.csv", "--k", "0", "--q", "3"], 2);
    fails_with(d, &["fit", "--in", "toy.csv", "--divergence", "nope", "--k", "1", "--q", "3"], 2);
    let err = fails_with(d, &["fit", "--in", "toy.csv", "--divergence", "gamma:2", "--k", "1", "--q", "3"], 2);
    assert!(err.contains("line 1") && err.contains("x1"), "{err}");
    fails_with(d, &["fit", "--in", "missing.csv", "--k", "1", "--q", "1"], 3);
}

#[test]
fn malformed_numbers_are_reported_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "bad.csv", "a,b\n1,2\n3,oops\n");
    let err = fails_with(d, &["fit", "--in", "bad.csv", "--k", "1", "--q", "1"], 2);
    assert!(err.contains("line 3") && err.contains('b'), "{err}");
}

#[test]
fn label_column_is_optional() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "with.csv", "x,label,y\n0,1,0\n0,1,1\n9,2,9\n9,2,8\n");
    write(d, "without.csv", "0,0\n0,1\n9,9\n9,8\n");
    ok(d, &["fit", "--in", "with.csv", "--k", "2", "--q", "4", "--out", "a.json"]);
    ok(d, &["fit", "--in", "without.csv", "--k", "2", "--q", "4", "--out", "b.json"]);
    let a = FitResultFile::from_json(&std::fs::read_to_string(d.join("a.json")).unwrap()).unwrap();
    let b = FitResultFile::from_json(&std::fs::read_to_string(d.join("b.json")).unwrap()).unwrap();
    assert_eq!(a.d, 2);
    assert_eq!((a.codebook.clone(), a.labels.clone()), (b.codebook, b.labels));
    assert_eq!(ok(d, &["eval", "--labels-a", "with.csv", "--labels-b", "a.json"]), "1.0\n");
}

#[test]
fn eval_worked_examples() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "a.csv", "label\n1\n1\n2\n2\n");
    write(d, "b.csv", "label\n1\n2\n1\n2\n");
    write(d, "c.csv", "label\n1\n1\n1\n1\n");
    write(d, "short.csv", "label\n1\n2\n");
    assert_eq!(ok(d, &["eval", "--labels-a", "a.csv", "--labels-b", "a.csv"]), "1.0\n");
    assert_eq!(ok(d, &["eval", "--labels-a", "a.csv", "--labels-b", "b.csv"]), "0.0\n");
    assert_eq!(ok(d, &["eval", "--labels-a", "c.csv", "--labels-b", "b.csv"]), "0.0\n");
    fails_with(d, &["eval", "--labels-a", "a.csv", "--labels-b", "short.csv"], 2);
}

#[test]
fn sweep_outputs_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["generate", "--preset", "poisson,small", "--seed", "2", "--out", "data.csv"]);
    let table = ok(d, &[
        "sweep", "--in", "data.csv", "--divergence", "poisson", "--k-grid", "3", "--q-grid", "110",
        "--out-curves", "one.csv",
    ]);
    assert!(table.starts_with("rank"));
    let one = std::fs::read_to_string(d.join("one.csv")).unwrap();
    assert_eq!(one.lines().count(), 2);
    assert!(one.starts_with("k,q,cost,score\n3,110,"));

    ok(d, &[
        "sweep", "--in", "data.csv", "--divergence", "poisson", "--k-grid", "1..3", "--q-grid", "80..120:4",
        "--starts", "4", "--out-curves", "curves.csv", "--out-svg", "curves.svg",
    ]);
    let curves = std::fs::read_to_string(d.join("curves.csv")).unwrap();
    assert_eq!(curves.lines().count(), 1 + 3 * 11);
    // kept averages never decrease in q
    for k in 1..=3 {
        let avgs: Vec<f64> = curves
            .lines()
            .skip(1)
            .map(|l| l.split(',').collect::<Vec<_>>())
            .filter(|f| f[0] == k.to_string())
            .map(|f| f[2].parse::<f64>().unwrap() * 120.0 / f[1].parse::<f64>().unwrap())
            .collect();
        assert!(avgs.windows(2).all(|w| w[1] >= w[0] - 1e-12 * w[0].max(1.0)), "{avgs:?}");
    }
    assert!(std::fs::read_to_string(d.join("curves.svg")).unwrap().contains("<svg"));

    fails_with(d, &["sweep", "--in", "data.csv", "--k-grid", ""], 2);
    fails_with(d, &["sweep", "--in", "data.csv", "--k-grid", "0..2"], 2);
    fails_with(d, &["sweep", "--in", "data.csv", "--k-grid", "2", "--q-grid", "500"], 2);
}

#[test]
fn breakdown_command() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &[
        "breakdown", "--p", "0.4", "--h", "0.9", "--gamma", "0.15", "--N-list", "10,100,1000", "--out", "a.json",
    ]);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("a.json")).unwrap()).unwrap();
    let mags: Vec<f64> = json["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["max_magnitude"].as_f64().unwrap())
        .collect();
    assert!(mags.windows(2).all(|w| w[1] > w[0]), "{mags:?}");
    assert!(mags[2] > 500.0);

    ok(d, &["breakdown", "--p", "0.4", "--h", "0.9", "--gamma", "0", "--n-list", "10,100,1000", "--out", "c.json"]);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("c.json")).unwrap()).unwrap();
    for r in json["rows"].as_array().unwrap() {
        assert!((r["max_magnitude"].as_f64().unwrap() - 1.0).abs() <= 0.05);
    }
    fails_with(d, &["breakdown", "--p", "0.4", "--h", "0.5", "--gamma", "0.1", "--N-list", "10"], 2);
}

#[test]
fn thread_count_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_bregtrim"))
        .current_dir(dir.path())
        .env("BREGTRIM_THREADS", "zero")
        .args(["breakdown", "--p", "0.4", "--h", "0.9", "--gamma", "0", "--N-list", "10"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
