use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use levy_invert::json::measure_from_json;
use levy_invert::measure::{Atom, LevyMeasure, MeasureRepr};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levy-invert"))
        .args(args)
        .env("LEVY_INVERT_THREADS", "1")
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const STABLE_12: &str = r#"{"kind":"stable","eta":1.2,"sigma":[{"u":[1.0],"w":0.5},{"u":[-1.0],"w":0.5}]}"#;

#[test]
fn kconst_reduces_to_one() {
    let out = bin(&["kconst", "--eta", "1.5", "--alpha", "0.5", "--p", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "1.0");
}

#[test]
fn inverting_stable_maps_the_index() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("stable_eta1.2.json");
    let output = dir.path().join("out.json");
    fs::write(&input, STABLE_12).unwrap();
    let out = bin(&["invert", "--measure", path(&input), "--beta", "0", "--out", path(&output)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m = measure_from_json(&fs::read_to_string(&output).unwrap()).unwrap();
    let MeasureRepr::Stable { eta, sigma } = m.repr() else { panic!("not stable") };
    assert!((eta - 0.8).abs() < 1e-15);
    assert_eq!(sigma.total(), 1.0);
}

#[test]
fn inverted_atomic_measures_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let atoms = vec![
        Atom::new(vec![0.3, -2.0], 1.5),
        Atom::new(vec![1e-3, 4e2], 0.25),
        Atom::new(vec![-7.0, 0.1], 3.0),
    ];
    let m = LevyMeasure::atomic(atoms, None).unwrap();
    let input = dir.path().join("m.json");
    let once = dir.path().join("once.json");
    let twice = dir.path().join("twice.json");
    fs::write(&input, levy_invert::json::measure_to_json(&m)).unwrap();
    for (from, to) in [(&input, &once), (&once, &twice)] {
        let out = bin(&["invert", "--measure", path(from), "--beta", "0.7", "--out", path(to)]);
        assert_eq!(out.status.code(), Some(0));
    }
    let written = fs::read_to_string(&once).unwrap();
    let reparsed = measure_from_json(&written).unwrap();
    assert_eq!(levy_invert::json::measure_to_json(&reparsed).trim(), written.trim());
    let back = measure_from_json(&fs::read_to_string(&twice).unwrap()).unwrap();
    let (MeasureRepr::Atomic { atoms: a }, MeasureRepr::Atomic { atoms: b }) = (m.repr(), back.repr()) else {
        panic!("not atomic")
    };
    for (x, y) in a.iter().zip(b) {
        assert!((x.w - y.w).abs() <= 1e-12 * x.w);
        for (u, v) in x.x.iter().zip(&y.x) {
            assert!((u - v).abs() <= 1e-12 * u.abs());
        }
    }
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let law = dir.path().join("law.json");
    fs::write(&law, format!(r#"{{"measure":{STABLE_12},"shift":[0.1]}}"#)).unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = bin(&[
            "simulate", "--law", path(&law), "--t", "0.5", "--n", "500", "--eps", "1e-3", "--seed", "42", "--out",
            path(&out),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(&out).unwrap()
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("sample_id,x_1\n"));
    assert_eq!(text.lines().count(), 501);
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 42);
    assert_eq!(meta["eps"], 1e-3);
    assert!(meta["bias_bound"].as_f64().unwrap() > 0.0);
}

#[test]
fn malformed_spec_points_at_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"kind":"stable","eta":"x","sigma":[]}"#).unwrap();
    let out = bin(&["invert", "--measure", path(&bad), "--beta", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eta"));
}

#[test]
fn exit_codes() {
    assert_eq!(bin(&["kconst", "--eta", "1.5"]).status.code(), Some(2));
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(2));
    // η must exceed γ = α ∨ 0
    assert_eq!(bin(&["kconst", "--eta", "0.4", "--alpha", "0.5", "--p", "1"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    fs::write(&m, STABLE_12).unwrap();
    let ok = bin(&["prop2", "--measure", path(&m), "--beta", "0", "--rho", "-0.8"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    // the wrong index gives ratios far from 1
    let wrong = bin(&["prop2", "--measure", path(&m), "--beta", "0", "--rho", "-1.0"]);
    assert_eq!(wrong.status.code(), Some(1));
    let csv = dir.path().join("rv.csv");
    let regvar = bin(&["regvar", "--measure", path(&m), "--endpoint", "zero", "--out", path(&csv)]);
    assert_eq!(regvar.status.code(), Some(0));
    let table = fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("r,tail,cap_id,ratio,prediction\n"));
    // symmetric σ: each half-line carries half of every tail
    for line in table.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert!((f[3] - 0.5).abs() < 1e-12 && (f[4] - 0.5).abs() < 1e-12);
    }
    let report: serde_json::Value = serde_json::from_slice(&regvar.stdout).unwrap();
    assert!((report["rho_hat"].as_f64().unwrap() + 1.2).abs() < 1e-6);
}

#[test]
fn limit_check_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let law = dir.path().join("law.json");
    fs::write(&law, format!(r#"{{"measure":{STABLE_12}}}"#)).unwrap();
    let args = |eta: &str, threshold: &str| {
        bin(&[
            "limit-check", "--law", path(&law), "--eta", eta, "--mode", "long", "--t-grid", "geom:10:1000:2", "--n",
            "2000", "--seed", "3", "--threshold", threshold,
        ])
    };
    assert_eq!(args("1.2", "0.05").status.code(), Some(0));
    // no sample of 2000 is within 1e-4 of the target
    assert_eq!(args("1.2", "1e-4").status.code(), Some(1));
    // the law is not in the domain of attraction of a 0.6-stable law
    assert_eq!(args("0.6", "0.05").status.code(), Some(2));
}

#[test]
fn sequence_directory() {
    let dir = tempfile::tempdir().unwrap();
    let atom = |x: f64| format!(r#"{{"kind":"atomic","atoms":[{{"x":[{x}],"w":1.0}}]}}"#);
    fs::write(dir.path().join("limit.json"), atom(1.0)).unwrap();
    for n in 1..=12 {
        let x = 1.0 + 1.0 / (n as f64).powi(3);
        fs::write(dir.path().join(format!("term_{n:03}.json")), atom(x)).unwrap();
    }
    let out = bin(&["seq-check", "--sequence", path(dir.path()), "--mode", "id0"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    fs::write(dir.path().join("term_013.json"), atom(5e3)).unwrap();
    let out = bin(&["seq-check", "--sequence", path(dir.path()), "--mode", "id0"]);
    assert_eq!(out.status.code(), Some(1));
    let missing = tempfile::tempdir().unwrap();
    assert_eq!(bin(&["seq-check", "--sequence", path(missing.path()), "--mode", "ts"]).status.code(), Some(2));
}

#[test]
fn run_returns_the_exit_code() {
    assert_eq!(levy_invert_cli::run(["levy-invert", "kconst", "--eta", "1.5", "--alpha", "0.5", "--p", "1"]), 0);
    assert_eq!(levy_invert_cli::run(["levy-invert", "kconst", "--eta", "1.5", "--alpha", "0.5", "--p", "-1"]), 2);
}
