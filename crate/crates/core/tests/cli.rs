use std::path::Path;
use std::process::{Command, Output};

use cyclealg::derivations::{DerivativeAt, GenDerivation, InnerDerivation};
use cyclealg::reconstruction::{BoundaryField, GlobalDerivation};
use cyclealg::{sample, CycleElement, MatC, RepPoint};
use num_complex::Complex64;
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cyclealg"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_json<T: serde::Serialize>(dir: &TempDir, name: &str, value: &T) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn matrix(v: &Value) -> MatC {
    serde_json::from_value(v.clone()).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn eval_identity_at_interior_point() {
    let dir = TempDir::new().unwrap();
    let input = write_json(&dir, "a.json", &CycleElement::identity(3));
    let out = run(&["eval", "--input", &input, "--lambda", "0.3"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(matrix(&r["result"]["value"]), MatC::identity(3));
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["config"]["seed"], 0);
}

#[test]
fn eval_edge_generator_at_zero() {
    let dir = TempDir::new().unwrap();
    let input = write_json(&dir, "z.json", &CycleElement::gen_z(3, 2).unwrap());
    let out = run(&["eval", "--input", &input, "--point", r#"{"kind":"lambda","re":0,"im":0}"#]);
    assert_eq!(code(&out), 0);
    assert_eq!(matrix(&report(&out)["result"]["value"]), MatC::zeros(3));
}

#[test]
fn eval_accepts_realized_form() {
    let dir = TempDir::new().unwrap();
    let a = CycleElement::gen_z(2, 1).unwrap();
    let input = write_json(&dir, "r.json", &cyclealg::algebra::RealizedJson::from_element(&a));
    let out = run(&["eval", "--input", &input, "--lambda", "0.5,0.5"]);
    assert_eq!(code(&out), 0);
    let v = matrix(&report(&out)["result"]["value"]);
    assert_eq!(v, a.evaluate(c(0.5, 0.5)));
}

#[test]
fn eval_rejects_bad_input() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"n\": 2,\n \"entries\": [[").unwrap();
    let out = run(&["eval", "--input", bad.to_str().unwrap(), "--lambda", "0"]);
    assert_eq!(code(&out), 2);
    let diag: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(diag["error"]["kind"], "json");
    assert!(diag["error"]["message"].as_str().unwrap().contains("line 2"));

    // A constant in position (1,2) of T+(C_2) is outside the algebra.
    let realized = r#"{"n":2,"realized":[[[],[[1,0]]],[[],[]]]}"#;
    std::fs::write(&bad, realized).unwrap();
    let out = run(&["eval", "--input", bad.to_str().unwrap(), "--lambda", "0"]);
    assert_eq!(code(&out), 2);
    let diag: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(diag["error"]["kind"], "not_in_algebra");

    let out = run(&["eval", "--input", bad.to_str().unwrap(), "--lambda", "2"]);
    assert_eq!(code(&out), 2);
    let out = run(&["eval", "--input", "/nonexistent/file.json", "--lambda", "0"]);
    assert_eq!(code(&out), 2);
    let out = run(&["eval", "--bogus-flag"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn inner_check_verdicts() {
    let dir = TempDir::new().unwrap();
    let point = RepPoint::Lambda(c(0.4, 0.2));
    let x = sample::matc(&mut sample::rng(5), 3);
    let inner = GenDerivation::from_derivation(&InnerDerivation::new(point, x.clone()), 3).unwrap();
    let out = run(&["inner-check", "--input", &write_json(&dir, "d.json", &inner)]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["result"]["verdict"], "inner");
    let found = matrix(&r["result"]["X"]);
    let gauged = &x - &MatC::identity(3).scale(x.get(0, 0));
    assert!((&found - &gauged).max_abs() < 1e-9);

    let f = GenDerivation::from_derivation(&DerivativeAt { lambda: c(0.5, 0.0) }, 2).unwrap();
    let out = run(&["inner-check", "--input", &write_json(&dir, "f.json", &f)]);
    assert_eq!(code(&out), 1);
    let r = report(&out);
    assert_eq!(r["result"]["verdict"], "not_inner");
    assert!(r["result"]["ratio"].as_f64().unwrap() >= 1e-3);
    let _: CycleElement = serde_json::from_value(r["result"]["witness"].clone()).unwrap();

    let mut junk = GenDerivation::zero(point, 2);
    junk.values_e[0] = MatC::identity(2);
    let out = run(&["inner-check", "--input", &write_json(&dir, "j.json", &junk)]);
    assert_eq!(code(&out), 1);
    let r = report(&out);
    assert_eq!(r["result"]["verdict"], "indeterminate");
    assert!(r["result"]["leibniz_residual"].as_f64().unwrap() > 1e-3);

    let out = run(&["inner-check", "--n", "3", "--input", &write_json(&dir, "f2.json", &f)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn reconstruct_commutator_and_zero() {
    let dir = TempDir::new().unwrap();
    let x0 = sample::element(&mut sample::rng(8), 3, 4);
    let d = GlobalDerivation::commutator(&x0);
    let out = run(&["reconstruct", "--deg-max", "16", "--input", &write_json(&dir, "d.json", &d)]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert!(r["result"]["max_residual"].as_f64().unwrap() <= 1e-8);
    assert_eq!(r["result"]["grid"], 4 * 3 * 18);
    let x: CycleElement = serde_json::from_value(r["result"]["X"].clone()).unwrap();
    assert!(x.entry(0, 0).is_zero());

    let zero = GlobalDerivation::zero(2);
    let out = run(&["reconstruct", "--deg-max", "8", "--input", &write_json(&dir, "z.json", &zero)]);
    assert_eq!(code(&out), 0);
    let x: CycleElement = serde_json::from_value(report(&out)["result"]["X"].clone()).unwrap();
    assert!(x.is_zero());
}

#[test]
fn reconstruct_negative_controls() {
    let dir = TempDir::new().unwrap();
    let m = 24;
    let x_at = (0..m)
        .map(|_| {
            let mut x = MatC::zeros(2);
            x.set(0, 1, c(1.0, 0.0));
            x
        })
        .collect();
    let field = BoundaryField { n: 2, m, x_at };
    let out = run(&["reconstruct", "--deg-max", "8", "--input", &write_json(&dir, "f.json", &field)]);
    assert_eq!(code(&out), 1);
    let r = report(&out);
    assert_eq!(r["result"]["verdict"], "not_in_algebra");
    assert_eq!(r["result"]["entry"], serde_json::json!([1, 2]));

    let d = GlobalDerivation::euler(2);
    let out = run(&["reconstruct", "--deg-max", "8", "--input", &write_json(&dir, "e.json", &d)]);
    assert_eq!(code(&out), 1);
    assert_eq!(report(&out)["result"]["verdict"], "not_locally_inner");
}

#[test]
fn semisimple_and_kernel_witness() {
    let dir = TempDir::new().unwrap();
    let out = run(&["semisimple", "--input", &write_json(&dir, "z.json", &CycleElement::zero(3))]);
    assert_eq!(code(&out), 0);
    assert_eq!(report(&out)["result"]["verdict"], "zero");

    let a = CycleElement::gen_z(3, 1).unwrap();
    let out = run(&["semisimple", "--input", &write_json(&dir, "a.json", &a)]);
    assert_eq!(report(&out)["result"]["verdict"], "non_zero");

    let out = run(&["kernel-witness", "--n", "2", "--budget", "2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(report(&out)["result"]["all_decomposed"], true);

    let out = run(&["kernel-witness", "--n", "1", "--budget", "2"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn approx_identity_csv() {
    let out = run(&["approx-identity", "--n", "2", "--k", "4,16,64", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,k,element,defect,fk_norm,grid"));
    assert_eq!(lines.count(), 9);
}

#[test]
fn decompose_reports_experimental_flag() {
    let dir = TempDir::new().unwrap();
    let f0 = GenDerivation::from_derivation(&DerivativeAt { lambda: c(0.0, 0.0) }, 2).unwrap();
    let out = run(&["decompose", "--input", &write_json(&dir, "f0.json", &f0)]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["result"]["experimental"], false);
    assert!(r["result"]["decomposition"]["inner"]["consistent"].as_bool().unwrap());

    let f = GenDerivation::from_derivation(&DerivativeAt { lambda: c(0.3, 0.0) }, 2).unwrap();
    let out = run(&["decompose", "--input", &write_json(&dir, "f.json", &f)]);
    let r = report(&out);
    assert_eq!(r["result"]["experimental"], true);
    assert!(r["result"].get("decomposition").is_none());
}

#[test]
fn csv_only_for_tables() {
    let out = run(&["semisimple", "--format", "csv"]);
    assert_eq!(code(&out), 2);
    let out = run(&["suite", "--tol-inner", "-1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn output_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("out.json");
    let out = run(&[
        "kernel-witness",
        "--n",
        "2",
        "--output",
        target.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    assert!(Path::new(&target).exists());
}

fn suite_rows(args: &[&str]) -> (i32, Vec<Value>) {
    let mut all = vec!["suite", "--trials", "3", "--deg-max", "8"];
    all.extend_from_slice(args);
    let out = run(&all);
    let r = report(&out);
    (code(&out), r["result"]["rows"].as_array().unwrap().clone())
}

#[test]
fn suite_green_and_deterministic() {
    let (status, rows) = suite_rows(&[]);
    assert_eq!(status, 0, "{rows:#?}");
    assert!(rows.iter().all(|r| r["pass"] == true));
    assert_eq!(rows.len(), 14);

    let first = run(&["suite", "--trials", "3", "--deg-max", "8", "--seed", "4"]);
    let second = run(&["suite", "--trials", "3", "--deg-max", "8", "--seed", "4"]);
    assert_eq!(first.stdout, second.stdout);

    let verdicts = |rows: &[Value]| rows.iter().map(|r| r["pass"].clone()).collect::<Vec<_>>();
    for seed in ["1", "2", "3", "5", "6"] {
        let (status, others) = suite_rows(&["--seed", seed]);
        assert_eq!(status, 0);
        assert_eq!(verdicts(&others), verdicts(&rows));
    }
}

#[test]
fn suite_flags_tolerance_induced_failures() {
    let (status, rows) = suite_rows(&["--tol-inner", "1e-20"]);
    assert_eq!(status, 1);
    for r in &rows {
        if r["pass"] == false {
            assert_eq!(r["tolerance_induced"], true, "{r}");
        }
    }
    let failed: Vec<&str> = rows
        .iter()
        .filter(|r| r["pass"] == false)
        .map(|r| r["invariant"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"inner_recovery"));
    assert!(failed.contains(&"reconstruction_round_trip"));
}
