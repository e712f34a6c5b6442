use std::collections::BTreeMap;
use std::fs;

use nicg_core::bounds::{
    analytic_upper, best_analytic_upper, bounds_table, chain_lower, BoundVariant, BoundsInputs,
};
use nicg_core::fixtures::witness;
use nicg_core::io::{
    load_checkpoint, load_solution_file, save_solution_file, SolutionFile, SolutionMeta,
};
use nicg_core::{enumeration_budget, Dim, NicgError};

fn meta() -> SolutionMeta {
    SolutionMeta {
        tool_version: "test".into(),
        seed: Some(3),
        prng_name: None,
        elapsed_ms: 0,
    }
}

#[test]
fn solution_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.json");
    let sets: Vec<_> = (1..=6).map(|d| witness(d).unwrap()).collect();
    save_solution_file(&path, &sets, &meta()).unwrap();
    assert_eq!(load_solution_file(&path).unwrap(), sets);

    let single = dir.path().join("w5.json");
    let file = SolutionFile::from_set(&sets[4], meta());
    fs::write(&single, serde_json::to_string(&file).unwrap()).unwrap();
    assert_eq!(load_solution_file(&single).unwrap(), vec![sets[4].clone()]);
}

fn load_err(text: &str) -> String {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, text).unwrap();
    match load_solution_file(&path) {
        Err(e @ NicgError::Format { .. }) => e.to_string(),
        other => panic!("expected a format error, got {other:?}"),
    }
}

#[test]
fn malformed_solution_files_are_rejected_with_locations() {
    let m = r#""meta":{"tool_version":"t","seed":null,"prng_name":null,"elapsed_ms":0}"#;
    let e = load_err(&format!(
        r#"{{"dim":3,"cardinality":2,"vectors":["110","01"],"sum":[1,2,0],{m}}}"#
    ));
    assert!(e.contains("vectors[1]"), "{e}");
    let e = load_err(&format!(
        r#"{{"dim":3,"cardinality":2,"vectors":["110","110"],"sum":[2,2,0],{m}}}"#
    ));
    assert!(e.contains("duplicate"), "{e}");
    let e = load_err(&format!(
        r#"{{"dim":3,"cardinality":1,"vectors":["000"],"sum":[0,0,0],{m}}}"#
    ));
    assert!(e.contains("zero"), "{e}");
    let e = load_err(&format!(
        r#"{{"dim":3,"cardinality":2,"vectors":["110","010"],"sum":[1,1,0],{m}}}"#
    ));
    assert!(e.contains("sum"), "{e}");
    let e = load_err("{\n  \"dim\": 3,\n  oops\n}");
    assert!(e.contains("line 3"), "{e}");
}

#[test]
fn truncated_checkpoint_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ck.json");
    fs::write(&path, r#"{"format":"nicg-checkpoint/1","config":{"dim":4"#).unwrap();
    assert!(load_checkpoint(&path).is_err());
}

#[test]
fn enumeration_budget_values() {
    let v = |a, b, c| enumeration_budget(a, b, c).unwrap().to_string();
    assert_eq!(v(31, 6, 8), "11254581");
    assert_eq!(v(28, 4, 8), "4787640");
    assert_eq!(v(31, 7, 8), "10518300");
    assert_eq!(v(20, 0, 20), (1u64 << 20).to_string());
}

#[test]
fn analytic_bounds_match_the_published_columns() {
    let venn: Vec<usize> = (4..=10)
        .map(|d| analytic_upper(Dim::new(d).unwrap(), BoundVariant::VennCount).unwrap())
        .collect();
    assert_eq!(venn, vec![16, 22, 29, 36, 43, 51, 59]);
    let two_zeros: Vec<usize> = (8..=10)
        .map(|d| analytic_upper(Dim::new(d).unwrap(), BoundVariant::TwoZeros).unwrap())
        .collect();
    assert_eq!(two_zeros, vec![43, 51, 58]);
    for d in 2..=12 {
        let dim = Dim::new(d).unwrap();
        let (best, _) = best_analytic_upper(dim);
        for v in BoundVariant::ALL {
            if let Ok(u) = analytic_upper(dim, v) {
                assert!(best <= u);
                assert!(u >= d);
            }
        }
    }
}

#[test]
fn bounds_table_merges_evidence() {
    let mut inputs = BoundsInputs::default();
    inputs.exact.extend((1..=6).zip([1, 2, 3, 5, 7, 9]));
    inputs.witness_lower.insert(7, 11);
    inputs.witness_lower.insert(8, 13);
    inputs.decomposition_upper.insert(7, 19);
    let t = bounds_table(10, &inputs).unwrap();
    let r6 = t.row(6).unwrap();
    assert!(r6.exact && r6.lower == 9 && r6.upper == 9);
    let r7 = t.row(7).unwrap();
    assert_eq!((r7.lower, r7.upper), (11, 19));
    assert_eq!(r7.upper_source, "decomposition");
    assert_eq!(t.row(9).unwrap().lower, 14);
    assert!(t.to_csv().starts_with("d,lower,upper,lower_source,upper_source,exact\n"));

    let mut bad = BoundsInputs::default();
    bad.witness_lower.insert(4, 40);
    assert!(bounds_table(5, &bad).is_err());
}

#[test]
fn chain_lower_propagates() {
    let known: BTreeMap<usize, usize> = [(6, 9)].into_iter().collect();
    let chained = chain_lower(&known, 9);
    assert_eq!(chained.get(&9), Some(&12));
}
