use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn kummer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kummer")).args(args).output().expect("binary runs")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).display().to_string()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn analyze_ellipsoid_matches_the_focal_formula() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = kummer(&["analyze", "--shape", "ellipsoid", "--p", "1", "--ecc", "0.5", "--n", "2", "--L", "32", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    // second focus of ρ = 1/(1 − ½ cos θ) sits at 2ep/(1 − e²) = 4/3 on the axis
    let a = [0.0, 0.0, 4.0 / 3.0];
    let mut rdr = csv::Reader::from_path(dir.path().join("spectrum.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (ct, cp, cr, cs) = (col("colatitude"), col("longitude"), col("rho"), col("S1"));
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let f = |i: usize| rec[i].parse::<f64>().unwrap();
        let (t, p, rho) = (f(ct), f(cp), f(cr));
        let x = [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()];
        let d: f64 = (0..3).map(|i| (rho * x[i] - a[i]).powi(2)).sum::<f64>().sqrt();
        assert!((f(cs) - 2.0 * rho / d).abs() < 1e-9);
        rows += 1;
    }
    assert!(rows > 1000);
    let report = json(dir.path().join("analyze.json"));
    assert_eq!(report["passed"], true);
    let striction = fs::read_to_string(dir.path().join("striction.csv")).unwrap();
    assert_eq!(striction.lines().count(), 2 * rows + 1);
}

#[test]
fn verify_all_on_the_circle() {
    let dir = tempfile::tempdir().unwrap();
    let o = kummer(&["verify", "--suite", "all", "--n", "1", "--M", "512", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(dir.path().join("verify.json"));
    assert_eq!(report["passed"], true);
    assert!(report["checks"].as_array().unwrap().len() > 10);
}

#[test]
fn verify_sphere_suites() {
    for suite in ["shapes", "identities", "finite-difference", "proposition", "raytrace"] {
        let dir = tempfile::tempdir().unwrap();
        let o = kummer(&["verify", "--suite", suite, "--out", dir.path().to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{suite}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn solve_manufactured_problem() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = kummer(&["solve", "--problem", &fixture("manufactured_s2.json"), "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(dir.path().join("solve.json"));
    assert_eq!(report["status"]["status"], "converged");
    assert!(report["exact_error"].as_f64().unwrap() < 1e-6);
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("t,iteration,step,residual,sigma"));
    let rho = json(dir.path().join("rho.json"));
    assert_eq!(rho["dimension"], 2);

    // the solution feeds back in as a field
    let again = tempfile::tempdir().unwrap();
    let field = dir.path().join("rho.json");
    let o = kummer(&["analyze", "--field", field.to_str().unwrap(), "--out", again.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn solve_reports_a_stalled_continuation() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("p.json");
    fs::write(
        &problem,
        r#"{"n": 1, "R1": 0.5, "R2": 2.0, "g": {"kind": "manufactured"}, "solver": {"max_iterations": 2, "dt_min": 0.05}}"#,
    )
    .unwrap();
    let o = kummer(&["solve", "--problem", problem.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(dir.path().join("solve.json"))["passed"], false);
}

#[test]
fn raytrace_ellipsoid_focuses() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["raytrace", "--shape", "ellipsoid", "--ecc", "0.5", "--p", "1", "--rays", "1000000", "--seed", "42"];
    let o = kummer(&[&args[..], &["--out", dir.path().to_str().unwrap()]].concat());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(dir.path().join("raytrace.json"));
    assert!(report["focal_distance"].as_f64().unwrap() < 1e-9);
    assert_eq!(report["seed"], 42);
    let hist = fs::read_to_string(dir.path().join("histogram.csv")).unwrap();
    assert_eq!(hist.lines().count(), 193);
}

#[test]
fn artifacts_are_reproducible() {
    let runs: Vec<_> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    for d in &runs {
        let out = d.path().to_str().unwrap();
        let o = kummer(&["raytrace", "--shape", "sphere", "--rays", "50000", "--seed", "3", "--L", "8", "--out", out]);
        assert_eq!(code(&o), 0);
        let o = kummer(&["solve", "--problem", &fixture("inverse_power_s2.json"), "--out", out]);
        assert_eq!(code(&o), 0);
    }
    for name in ["histogram.csv", "raytrace.json", "rho.json", "trace.csv", "solve.json"] {
        let a = fs::read(runs[0].path().join(name)).unwrap();
        let b = fs::read(runs[1].path().join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn convergence_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = kummer(&["convergence", "--problem", &fixture("manufactured_s1.json"), "--levels", "32,64", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert_eq!(table.lines().next().unwrap(), "level,spacing,relative_error");
    assert_eq!(table.lines().count(), 3);

    let o = kummer(&["convergence", "--study", "finite-difference", "--shape", "ellipsoid", "--ecc", "0.5", "--L", "8", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(dir.path().join("convergence.json"));
    for o in report["orders"][0].as_array().unwrap() {
        assert!((o.as_f64().unwrap() - 2.0).abs() < 0.3);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    // configuration errors
    assert_eq!(code(&kummer(&["raytrace", "--shape", "ellipsoid", "--ecc", "0.5", "--out", out])), 2);
    assert_eq!(code(&kummer(&["analyze", "--shape", "ellipsoid", "--ecc", "1.5", "--out", out])), 2);
    assert_eq!(code(&kummer(&["analyze", "--shape", "cube", "--out", out])), 2);
    assert_eq!(code(&kummer(&["analyze", "--out", out])), 2);
    assert_eq!(code(&kummer(&["analyze", "--shape", "sphere", "--n", "3", "--out", out])), 2);
    assert_eq!(code(&kummer(&["solve", "--problem", "/nonexistent/problem.json"])), 2);
    assert_eq!(code(&kummer(&["convergence", "--problem", &fixture("inverse_power_s2.json"), "--out", out])), 2);
    assert_eq!(code(&kummer(&["frobnicate"])), 2);
    // a check that cannot pass
    let o = kummer(&["analyze", "--shape", "ellipsoid", "--ecc", "0.5", "--L", "8", "--tolerance", "1e-30", "--out", out]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(dir.path().join("analyze.json"))["passed"], false);
}
