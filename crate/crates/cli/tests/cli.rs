use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nicg_core::fixtures::witness;
use nicg_core::io::{save_solution_file, SolutionMeta};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nicg-lab"))
        .args(args)
        .env_remove("NICG_LAB_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn table_witnesses(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("table.json");
    let sets: Vec<_> = (1..=6).map(|d| witness(d).unwrap()).collect();
    save_solution_file(&path, &sets, &SolutionMeta::default()).unwrap();
    path
}

#[test]
fn exact_d4_reports_five() {
    let out = run(&["exact", "--dim", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["n"], 5);
    assert!(!doc["witnesses"].as_array().unwrap().is_empty());
}

#[test]
fn exists_beyond_the_maximum_exits_one() {
    let out = run(&["exists", "--dim", "5", "--size", "8"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&out);
    assert_eq!(doc["exists"], false);
    assert_eq!(doc["exact"], true);
}

#[test]
fn exists_with_restriction_finds_witness() {
    let out = run(&["exists", "--dim", "4", "--size", "4", "--restrict", "comp=1,bit=1"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    for v in doc["witnesses"][0]["vectors"].as_array().unwrap() {
        assert!(v.as_str().unwrap().starts_with('1'));
    }
}

#[test]
fn invalid_input_exits_two() {
    assert_eq!(run(&["exact", "--dim", "0"]).status.code(), Some(2));
    assert_eq!(run(&["exact", "--dim", "3", "--prune", "nope"]).status.code(), Some(2));
    assert_eq!(
        run(&["exists", "--dim", "3", "--size", "2", "--restrict", "comp=7,bit=1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["upper", "--dim", "8", "--method", "inequality", "--variant", "bogus"])
            .status
            .code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"dim\": 3,\n\"vectors\": [\"10\"]").unwrap();
    let out = run(&["verify", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn budget_exhaustion_exits_three() {
    let out = run(&["exact", "--dim", "5", "--max-nodes", "10"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_accepts_table_witnesses_and_rejects_redundant_sets() {
    let dir = tempfile::tempdir().unwrap();
    let good = table_witnesses(dir.path());
    let out = run(&["verify", "--input", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["checked"], 6);

    let bad = dir.path().join("redundant.json");
    fs::write(
        &bad,
        r#"{"dim":2,"cardinality":3,"vectors":["10","01","11"],"sum":[2,2],
            "meta":{"tool_version":"x","seed":null,"prng_name":null,"elapsed_ms":0}}"#,
    )
    .unwrap();
    let out = run(&["verify", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn emitted_files_verify_and_canonicalize() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("e4.json");
    let out = run(&["exact", "--dim", "4", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let verify = run(&["verify", "--input", out_path.to_str().unwrap()]);
    assert_eq!(verify.status.code(), Some(0));
    let canon = run(&["canon", "--input", out_path.to_str().unwrap()]);
    assert_eq!(canon.status.code(), Some(0));
    assert_eq!(json(&canon)["classes"], 11);
}

#[test]
fn binary_strategy_records_probes() {
    let out = run(&["exact", "--dim", "5", "--strategy", "binary", "--lo", "6", "--hi", "11"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["n"], 7);
    assert_eq!(doc["probes"][0]["size"], 8);
    assert_eq!(doc["probes"][1]["size"], 7);
}

#[test]
fn upper_and_table_outputs() {
    let out = run(&["upper", "--dim", "9", "--method", "inequality", "--variant", "two-zeros"]);
    assert_eq!(json(&out)["upper"], 51);
    let out = run(&["upper", "--dim", "5", "--method", "decomposition", "--prev", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["upper"].as_u64().unwrap(), 5 + doc["restricted_max"].as_u64().unwrap());

    let dir = tempfile::tempdir().unwrap();
    let inputs = dir.path().join("inputs.json");
    table_witnesses(dir.path());
    fs::write(
        &inputs,
        r#"{"exact": {"4": 5}, "decomposition_upper": {"7": 19}, "witness_files": ["table.json"]}"#,
    )
    .unwrap();
    let out = run(&["table", "--max-dim", "8", "--inputs", inputs.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "d,lower,upper,lower_source,upper_source,exact");
    assert_eq!(lines.len(), 9);
    assert!(lines[6].starts_with("6,9,"), "{}", lines[6]);
    assert!(lines[7].starts_with("7,10,19,"), "{}", lines[7]);
}

#[test]
fn lower_is_deterministic_for_a_seed() {
    let args = ["lower", "--dim", "6", "--seed", "7", "--budget-secs", "60", "--target", "9"];
    let strip = |out: &Output| {
        let mut v = json(out);
        v["stats"]["elapsed_ms"] = Value::Null;
        for w in v["witnesses"].as_array_mut().unwrap() {
            w["meta"]["elapsed_ms"] = Value::Null;
        }
        v
    };
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(strip(&a), strip(&b));
    assert!(json(&a)["lower"].as_u64().unwrap() >= 9);
}

#[test]
fn checkpointed_run_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("ck.json");
    let ck_s = ck.to_str().unwrap();
    let full = json(&run(&["exact", "--dim", "4"]));
    let first = run(&["exact", "--dim", "4", "--checkpoint", ck_s, "--every", "10", "--max-nodes", "60"]);
    assert_eq!(first.status.code(), Some(3));
    assert!(ck.exists());
    let resumed = run(&["exact", "--dim", "4", "--checkpoint", ck_s, "--every", "10"]);
    assert_eq!(resumed.status.code(), Some(0));
    let resumed = json(&resumed);
    assert_eq!(resumed["n"], full["n"]);
    assert_eq!(resumed["witnesses"].as_array().unwrap().len(), full["witnesses"].as_array().unwrap().len());
    for (a, b) in resumed["witnesses"].as_array().unwrap().iter().zip(full["witnesses"].as_array().unwrap()) {
        assert_eq!(a["vectors"], b["vectors"]);
    }
    assert_eq!(resumed["stats"]["nodes_visited"], full["stats"]["nodes_visited"]);
}

#[test]
fn thread_count_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_nicg-lab"))
        .args(["exact", "--dim", "4"])
        .env("NICG_LAB_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["n"], 5);
    let out = Command::new(env!("CARGO_BIN_EXE_nicg-lab"))
        .args(["exact", "--dim", "3"])
        .env("NICG_LAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
