use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(format!("{name}.json"))
        .display()
        .to_string()
}

fn gocoh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gocoh")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = gocoh(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("missing {key} in {v}"))
}

#[test]
fn measure_examples() {
    let r = json(&["measure", &fixture("qutrit_qubit_example")]);
    assert!((num(&r, "delta_bits") - 0.8925).abs() < 1e-3);
    assert_eq!(r["manifest"]["subcommand"], "measure");
    let r = json(&["measure", &fixture("cq_example")]);
    assert!(num(&r, "delta_bits").abs() < 1e-12);
    assert_eq!(r["is_cq"], true);
    let r = json(&["measure", &fixture("plus_zero")]);
    assert!((num(&r, "delta_bits") - 1.0).abs() < 1e-12);
}

#[test]
fn lower_bound_examples() {
    let r = json(&["lower-bound", &fixture("qutrit_qubit_example")]);
    assert!((num(&r, "value_bits") - 0.8167).abs() < 5e-3);
    let product = json(&["lower-bound", &fixture("product_mixed")]);
    let local = json(&["measure", &fixture("product_mixed")]);
    assert!((num(&product, "value_bits") - num(&local, "coherence_A_bits")).abs() < 1e-6);
    let qc = json(&["lower-bound", &fixture("qc_example")]);
    let qc_delta = json(&["measure", &fixture("qc_example")]);
    assert!((num(&qc, "value_bits") - num(&qc_delta, "delta_bits")).abs() < 5e-3);
}

#[test]
fn povm_rank_flag() {
    let r = json(&["lower-bound", &fixture("qutrit_qubit_example"), "--povm-rank", "auto", "--restarts", "8"]);
    assert_eq!(r["witness"]["measurement_vectors"].as_array().unwrap().len(), 4);
    assert_eq!(gocoh(&["lower-bound", &fixture("qutrit_qubit_example"), "--povm-rank", "zero"]).status.code(), Some(2));
}

#[test]
fn min_basis_examples() {
    assert!(num(&json(&["min-basis", &fixture("product_mixed")]), "value_bits") < 1e-9);
    assert!((num(&json(&["min-basis", &fixture("singlet")]), "value_bits") - 1.0).abs() < 1e-6);
    assert!(num(&json(&["min-basis", &fixture("eps_example_0.01")]), "value_bits") <= 0.1);
}

#[test]
fn dqc1_examples() {
    let r = json(&["dqc1", "--unitary", "identity", "--a", "1.0", "--runs", "2000000"]);
    let est = r["estimate"].as_array().unwrap();
    let err = (est[0].as_f64().unwrap() - 1.0).hypot(est[1].as_f64().unwrap());
    assert!(err <= 3.0 * num(&r, "analytic_se"));
    let r = json(&["dqc1", "--haar-dim", "8", "--seed", "7"]);
    assert_eq!(r["within_3_se"], true);
}

#[test]
fn dqc1_sweep_csv() {
    let out = gocoh(&["dqc1", "--haar-dim", "4", "--sweep", "a=0.2:1.0:0.2", "m=100,10000"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("a,p,m,prec_emp,prec_analytic,half_log2_mC,residual"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 10);
    for pair in rows.chunks(2) {
        assert_eq!(pair[0][0], pair[1][0]);
        assert!((pair[0][6] - pair[1][6]).abs() < 1e-9);
    }
}

#[test]
fn verify_suites() {
    for (suite, n) in [("monotonicity", "500"), ("additivity", "100"), ("free-set", "200")] {
        let r = json(&["verify", "--suite", suite, "--n", n]);
        assert_eq!(r["pass"], true, "{suite}");
    }
    assert_eq!(gocoh(&["verify", "--suite", "bogus"]).status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let malformed = dir.path().join("bad.json");
    std::fs::write(&malformed, "{\"dims\": [2],\n \"matrix\": [[[1, 0]], ").unwrap();
    let out = gocoh(&["measure", malformed.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let negative = dir.path().join("neg.json");
    std::fs::write(&negative, r#"{"dims": [2], "matrix": [[[1.5, 0], [0, 0]], [[0, 0], [-0.5, 0]]]}"#).unwrap();
    let out = gocoh(&["measure", negative.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eigenvalue"));

    assert_eq!(gocoh(&["--max-dim", "4", "measure", &fixture("qutrit_qubit_example")]).status.code(), Some(4));
    let out = gocoh(&["lower-bound", &fixture("qutrit_qubit_example"), "--max-iters", "1", "--restarts", "2"]);
    assert_eq!(out.status.code(), Some(5));
    assert!(serde_json::from_slice::<Value>(&out.stdout).is_ok(), "report still emitted");
}

#[test]
fn output_is_byte_identical() {
    let args = ["lower-bound", &fixture("qutrit_qubit_example"), "--seed", "5", "--restarts", "8"];
    let a = gocoh(&args).stdout;
    assert_eq!(a, gocoh(&args).stdout);
    let mut threaded = vec!["--threads", "1"];
    threaded.extend_from_slice(&args);
    assert_eq!(a, gocoh(&threaded).stdout);
}

#[test]
fn csv_output() {
    let out = gocoh(&["--output", "csv", "measure", &fixture("plus_zero")]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("basis_id,coherence_A_bits,delta_bits,is_cq\n"), "{text}");
}
