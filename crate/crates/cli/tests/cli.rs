use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn cloneboost(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cloneboost"));
    cmd.args(args).env_remove("CLONEBOOST_WORK_BUDGET");
    cmd
}

fn run(args: &[&str]) -> Output {
    cloneboost(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}); stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn assert_schema(name: &str, value: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(format!("{name}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(value).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name} schema errors: {errors:?}");
}

/// `log2` of a serialized extended-precision probability.
fn log2(p: &Value) -> f64 {
    p["mantissa"].as_f64().unwrap().log2() + p["exp2"].as_f64().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn solve_satisfiable_example() {
    let f = data("example.cnf");
    let out = run(&["solve", f.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_schema("solve", &v);
    assert_eq!(v["verdict"], "satisfiable");
    assert_eq!(v["model_count"], 10);
    // default N = n + 6; the bound is (e^-10)^64, far below 1.61e-28
    assert_eq!(v["params"]["level"], 10);
    assert!(log2(&v["bound"]) < 1.61e-28f64.log2());
    assert_eq!(v["bound_holds"], true);
    assert!(log2(&v["d_n"]) < log2(&v["bound"]));
}

#[test]
fn solve_unsatisfiable_and_errors() {
    let out = run(&["solve", data("unsat.cnf").to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_schema("solve", &v);
    assert_eq!(v["verdict"], "unsatisfiable");
    assert_eq!(v["d_n"]["decimal"], "1.00000000000e0");
    assert!(v["bound"].is_null());

    let out = run(&["solve", data("malformed.cnf").to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("variable 4"));
    assert_eq!(code(&run(&["solve", "/nonexistent.cnf"])), 2);
    assert_eq!(code(&run(&["solve"])), 2);
    assert_eq!(code(&run(&["solve", "--bogus-flag"])), 2);
}

#[test]
fn bounds_default_grid_holds() {
    let out = run(&["bounds"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_schema("bounds", &v);
    let s = &v["summary"];
    assert_eq!(s["cells"], 18 * 41 * 4);
    assert_eq!(s["holds"], s["cells"]);
    let cells = v["cells"].as_array().unwrap();
    assert!(cells
        .iter()
        .filter(|c| c["eps"] == 0.0)
        .all(|c| c["exact_match"] == true));
}

#[test]
fn bounds_gate_on_hypothesis() {
    let out = run(&["bounds", "--n", "5", "--offsets", "0-8", "--eps", "2^-(n+1)"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_schema("bounds", &v);
    assert_eq!(v["summary"]["hypothesis_violated"], 9);
    assert_eq!(v["summary"]["violated"], 0);

    let out = run(&["bounds", "--n", "7", "--offsets", "0-2", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("n,level,offset,eps,eps_spec,status"));
    assert_eq!(lines.count(), 3 * 4);

    assert_eq!(code(&run(&["bounds", "--n", "9-3"])), 2);
    assert_eq!(code(&run(&["bounds", "--eps", "-1"])), 2);
}

#[test]
fn sample_is_deterministic_and_schema_valid() {
    let f = data("single_model.cnf");
    let args = ["sample", f.to_str().unwrap(), "-N", "6", "--trials", "4000", "--seed", "11"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_schema("sample", &v);
    assert!(v["result"]["z_score"].as_f64().unwrap().abs() < 4.0);

    let noisy = run(&["sample", f.to_str().unwrap(), "-N", "4", "--trials", "500", "--noise", "minus:2^-8"]);
    assert_eq!(code(&noisy), 0);
    assert_schema("sample", &json(&noisy));
}

#[test]
fn sample_budget_refusal_and_override() {
    let f = data("single_model.cnf");
    let args = ["sample", f.to_str().unwrap(), "-N", "18", "--trials", "300"];
    let out = run(&args);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("2^18"), "{err}");

    let out = cloneboost(&args)
        .env("CLONEBOOST_WORK_BUDGET", "100000000")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["config"]["work_budget"], 100_000_000u64);

    let bad = cloneboost(&args).env("CLONEBOOST_WORK_BUDGET", "lots").output().unwrap();
    assert_eq!(code(&bad), 2);
    assert_eq!(code(&run(&["sample", f.to_str().unwrap(), "-N", "21", "--trials", "1"])), 2);
}

#[test]
fn nogo_report() {
    let out = run(&["nogo", "--trials", "100", "--seed", "4"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_schema("nogo", &v);
    assert_eq!(v["passed"], true);
    assert_eq!(v["violations"], 0);
    assert!(v["control_group_violations"].as_u64().unwrap() > 0);
    assert_eq!(code(&run(&["nogo", "--h", "7"])), 2);
}

#[test]
fn resources_with_circuit() {
    let f = data("example.cnf");
    let out = run(&["resources", f.to_str().unwrap(), "-N", "3", "-K", "3", "--circuit"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_schema("resources", &v);
    assert_eq!(v["resources"]["gates"]["clone"], 3);
    assert_eq!(v["circuit"]["boost_nodes"].as_array().unwrap().len(), 4);
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(
        &cfg,
        format!(
            "formula = {}\nseed = 5\n\n[sample]\nlevel = 3\ntrials = 200\n",
            data("single_model.cnf").display()
        ),
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let v = json(&run(&["--config", cfg, "sample"]));
    assert_eq!(v["config"]["level"], 3);
    assert_eq!(v["config"]["trials"], 200);
    assert_eq!(v["config"]["seed"], 5);
    let v = json(&run(&["--config", cfg, "sample", "--trials", "50"]));
    assert_eq!(v["config"]["trials"], 50);
    // solve picks up the shared formula key but not the sample section
    let v = json(&run(&["--config", cfg, "solve"]));
    assert_eq!(v["params"]["level"], 12);

    let bad = dir.path().join("bad.conf");
    std::fs::write(&bad, "trails = 10\n").unwrap();
    let out = run(&["--config", bad.to_str().unwrap(), "nogo"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("trails"));
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&[
        "resources",
        data("example.cnf").to_str().unwrap(),
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_schema("resources", &v);
}
