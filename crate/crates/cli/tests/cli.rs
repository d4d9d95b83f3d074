use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bdlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bdlab")).args(args).output().expect("binary runs")
}

fn bdlab_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bdlab")).args(args).env(key, value).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = bdlab(args);
    assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok(args)).unwrap()
}

fn code(args: &[&str]) -> i32 {
    bdlab(args).status.code().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn chain3(dir: &Path) -> String {
    write(dir, "chain3.txt", "n=3\n1 2\n2 3\n1 3\n").to_string_lossy().into_owned()
}

const PREFACTOR: f64 = 1.632993161855452; // 4 / sqrt(6)

#[test]
fn gen_writes_a_valid_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("set.txt");
    let p = path.to_str().unwrap();
    assert_eq!(ok(&["gen", "--n", "32", "--model", "random:0.3", "--seed", "7", "--output", p]), "");
    let v = json(&["validate", "--input", p, "--format", "json"]);
    assert_eq!(v["valid"], true);
    assert_eq!(v["n"], 32);
    let matrix = ok(&["gen", "--n", "4", "--model", "layered:2", "--style", "matrix"]);
    assert_eq!(matrix, "n=4\nmatrix:\n0011\n0011\n0000\n0000\n");
    assert_eq!(ok(&["gen", "--n", "20", "--seed", "3"]), ok(&["gen", "--n", "20", "--seed", "3"]));
}

#[test]
fn validation_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let open = write(dir.path(), "open.txt", "n=3\n1 2\n2 3\n");
    let cycle = write(dir.path(), "cycle.txt", "n=2\n1 2\n2 1\n");
    let open = open.to_str().unwrap();
    assert_eq!(code(&["validate", "--input", open]), 2);
    assert_eq!(code(&["validate", "--input", cycle.to_str().unwrap(), "--mode", "close"]), 2);
    let v = json(&["validate", "--input", open, "--mode", "close", "--format", "json"]);
    assert_eq!(v["related_pairs"], 3);
    let o = bdlab(&["validate", "--input", open]);
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("transitive"));
}

#[test]
fn parameter_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let c = chain3(dir.path());
    assert_eq!(code(&["action", "--input", &c, "--backend", "quantum", "--epsilon", "1.5"]), 3);
    assert_eq!(code(&["action", "--input", &c, "--backend", "sample", "--K", "4"]), 3);
    assert_eq!(code(&["action", "--backend", "naive"]), 3);
    assert_eq!(code(&["action", "--gen", "chain"]), 3);
    assert_eq!(code(&["action", "--input", "/nonexistent/file"]), 3);
    assert_eq!(code(&["action", "--input", &c, "--backend", "bogus"]), 3);
    assert_eq!(code(&["oracle-verify", "--n", "2", "--k", "5"]), 3);
    assert_eq!(code(&["gen", "--n", "0"]), 3);
    assert_eq!(code(&["resources", "--circuit", "dataprep", "--n", "4", "--input", &c]), 3);
    assert_eq!(bdlab_env(&["gen", "--n", "3"], "BDLAB_THREADS", "zero").status.code(), Some(3));
}

#[test]
fn exact_action_of_three_chain() {
    let dir = tempfile::tempdir().unwrap();
    let c = chain3(dir.path());
    for backend in ["naive", "matrix", "strassen"] {
        let v = json(&["action", "--input", &c, "--backend", backend]);
        assert!((v["S"].as_f64().unwrap() - PREFACTOR * 10.0).abs() < 1e-8);
        assert_eq!(v["abundances"], serde_json::json!([2, 1, 0, 0]));
    }
    assert!(ok(&["action", "--input", &c, "--format", "text"]).contains("16.32993162"));
    assert_eq!(ok(&["action", "--input", &c, "--format", "csv"]), "k,N_k\r\n0,2\r\n1,1\r\n2,0\r\n3,0\r\n");
    let v = json(&["action", "--input", &c, "--length-ratio", "2"]);
    assert!((v["S"].as_f64().unwrap() - 4.0 * PREFACTOR * 10.0).abs() < 1e-8);
}

#[test]
fn exact_backends_agree_on_generated_sets() {
    for seed in ["1", "2", "3"] {
        let base = ["action", "--gen", "random:0.2", "--n", "70", "--seed", seed, "--kmax", "12", "--backend"];
        let reports: Vec<Value> = ["naive", "matrix", "strassen"]
            .iter()
            .map(|b| {
                let mut args = base.to_vec();
                args.push(b);
                json(&args)
            })
            .collect();
        for r in &reports[1..] {
            assert_eq!(r["abundances"], reports[0]["abundances"]);
            assert_eq!(r["S"], reports[0]["S"]);
        }
    }
}

#[test]
fn coefficient_file_reproduces_preset() {
    let dir = tempfile::tempdir().unwrap();
    let c = chain3(dir.path());
    let a = "-1.632993161855452";
    let cfg = write(dir.path(), "d4.cfg", &format!("d=4\nn_d=4\nalpha={a}\nbeta={a}\nC=-1,9,-16,8\nlength_ratio=1\n"));
    let v = json(&["action", "--input", &c, "--coeffs", cfg.to_str().unwrap()]);
    assert!((v["S"].as_f64().unwrap() - PREFACTOR * 10.0).abs() < 1e-8);
    let bad = write(dir.path(), "bad.cfg", "d=4\nalpha=1\nbeta=1\nC=1,2\n");
    assert_eq!(code(&["action", "--input", &c, "--coeffs", bad.to_str().unwrap()]), 3);
}

#[test]
fn sample_backend_report() {
    let dir = tempfile::tempdir().unwrap();
    let c = chain3(dir.path());
    let v = json(&["action", "--input", &c, "--backend", "sample", "--K", "3", "--trials", "4"]);
    assert_eq!(v["samples"].as_array().unwrap().len(), 4);
    for s in v["samples"].as_array().unwrap() {
        assert_eq!(s["se_full"], 0.0);
        assert_eq!(s["se_subadditive"], 0.0);
        assert_eq!(s["se_simple_bound"], 0.0);
        assert!((s["S_hat"].as_f64().unwrap() - PREFACTOR * 10.0).abs() < 1e-8);
    }
    let args = ["action", "--gen", "random:0.3", "--n", "32", "--seed", "5", "--backend", "sample", "--trials", "50"];
    let v = json(&args);
    let population = v["N"].as_u64().unwrap();
    assert_eq!(v["K"].as_u64().unwrap(), population.div_ceil(4));
    assert!(v["exact_sigma"].as_f64().unwrap() > 0.0);
    let mut csv_args = args.to_vec();
    csv_args.extend(["--format", "csv"]);
    let table = ok(&csv_args);
    assert!(table.starts_with("trial,K,K_0,K_1,K_2,K_3,S_hat,se_full,se_subadditive,se_simple_bound\r\n"));
    assert_eq!(table.lines().count(), 51);
}

#[test]
fn quantum_report_schema_and_determinism() {
    let args: Vec<&str> =
        "action --gen random:0.3 --n 8 --seed 11 --backend quantum --trials 6 --epsilon 0.5 --delta 0.05"
            .split_whitespace()
            .collect();
    let first = ok(&args);
    assert_eq!(first, ok(&args));
    assert_eq!(first, stdout(&bdlab_env(&args, "BDLAB_THREADS", "1")));
    assert_eq!(first, stdout(&bdlab_env(&args, "BDLAB_THREADS", "3")));
    let v: Value = serde_json::from_str(&first).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    for key in ["n", "d", "epsilon", "delta", "per_k", "S_hat", "S_true", "width_qubits", "trials"] {
        assert!(keys.contains(&key), "missing {key}");
    }
    assert_eq!(v["width_qubits"], 32);
    assert_eq!(v["per_k"].as_array().unwrap().len(), 24);
    for l in v["per_k"].as_array().unwrap() {
        for key in ["k", "N_true", "N_hat", "queries", "zero_flag"] {
            assert!(l.get(key).is_some(), "missing {key}");
        }
    }
    let mut circuit = args.to_vec();
    circuit.extend(["--oracle-mode", "circuit"]);
    let c: Value = serde_json::from_str(&ok(&circuit)).unwrap();
    assert_eq!(c["per_k"], v["per_k"]);
    assert_eq!(c["oracle_mode"], "circuit");
    let mut csv = args.to_vec();
    csv.extend(["--format", "csv"]);
    assert!(ok(&csv).starts_with("trial,k,N_true,N_hat,queries,zero_flag\r\n"));
}

#[test]
fn oracle_verify_counts_pairs() {
    assert!(ok(&["oracle-verify", "--n", "6", "--k", "1"]).starts_with("36/36 basis pairs correct\n"));
    let v = json(&["oracle-verify", "--n", "9", "--k", "3", "--seed", "2", "--format", "json"]);
    assert_eq!(v["pairs"], 81);
    assert_eq!(v["correct"], 81);
    assert_eq!(v["ancillae_restored"], 81);
    assert_eq!(v["width"], 2 * (9 + 3 + 2));
    let dir = tempfile::tempdir().unwrap();
    let c = chain3(dir.path());
    let v = json(&["oracle-verify", "--n", "3", "--k", "1", "--input", &c, "--format", "json"]);
    assert_eq!(v["marked"], 1);
}

#[test]
fn resources_report() {
    let v = json(&["resources", "--circuit", "oracle", "--n", "8", "--k", "0"]);
    assert_eq!(v["width"], 26);
    assert_eq!(v["model"], "expanded");
    let a = json(&["resources", "--circuit", "oracle", "--n", "8", "--k", "0", "--model", "analytic", "--c-mcx", "2"]);
    assert_eq!(a["depth"], a["analytic_depth_bound"]);
    let dir = tempfile::tempdir().unwrap();
    let listing = dir.path().join("prep.txt");
    let v = json(&[
        "resources",
        "--circuit",
        "dataprep",
        "--n",
        "3",
        "--gen",
        "chain",
        "--dump",
        listing.to_str().unwrap(),
    ]);
    assert_eq!(v["width"], 2 * (3 + 4) - 1);
    assert_eq!(v["gate_counts"]["PREP_UNIF"], 1);
    let text = std::fs::read_to_string(&listing).unwrap();
    assert!(text.starts_with("# width 13\n"));
    assert!(text.contains("PREP_UNIF r=[q0..q3] M=9"));
    let table = ok(&["resources", "--circuit", "oracle", "--n", "4", "--k", "1", "--format", "csv"]);
    assert!(table.starts_with("field,value\r\ncircuit,oracle\r\n"));
}
