use nicg_core::io::{load_checkpoint, save_checkpoint};
use nicg_core::iso::CanonicalKey;
use nicg_core::search::{
    binary_search_n, enumerate_all_max_solutions, exact_n, exists_nicg, randomized_search,
    resume_dfs, solve_dfs, solve_max, Budget, CheckpointSpec, Restriction,
};
use nicg_core::{
    canonical_form, fixtures, is_nicg_removal, Dim, NicgTest, Prune, SearchConfig, SearchMode,
    SearchOutcome, SearchStats,
};

fn cfg(d: usize) -> SearchConfig {
    SearchConfig::new(Dim::new(d).unwrap())
}

fn classes(out: &SearchOutcome) -> Vec<CanonicalKey> {
    out.canonical_witnesses().unwrap()
}

fn without_timing(mut s: SearchStats) -> SearchStats {
    s.elapsed_ms = 0;
    s
}

#[test]
fn small_dimensions_match_known_values() {
    for &(d, n) in &fixtures::KNOWN_N[..5] {
        let r = exact_n(&cfg(d)).unwrap();
        assert_eq!(r.n, n, "d={d}");
        assert!(r.witnesses.iter().all(|w| w.len() == n && is_nicg_removal(w)));
    }
}

#[test]
fn prune_settings_agree_on_d3_and_d4() {
    for d in [3, 4] {
        let reference = solve_dfs(&cfg(d).with_prune(Prune::None)).unwrap();
        assert!(reference.exact);
        for prune in [Prune::Weak, Prune::Canonical, Prune::Buckets] {
            let out = solve_dfs(&cfg(d).with_prune(prune)).unwrap();
            assert_eq!(out.best_cardinality, reference.best_cardinality, "{prune:?}");
            assert_eq!(classes(&out), classes(&reference), "d={d} {prune:?}");
        }
    }
}

#[test]
fn weak_and_canonical_agree_on_d5() {
    let weak = solve_dfs(&cfg(5).with_prune(Prune::Weak)).unwrap();
    let canon = solve_dfs(&cfg(5).with_prune(Prune::Canonical)).unwrap();
    assert_eq!(weak.best_cardinality, 7);
    assert_eq!(canon.best_cardinality, 7);
    assert_eq!(classes(&weak), classes(&canon));
}

#[test]
fn oracles_are_interchangeable_inside_the_search() {
    for d in 1..=4 {
        for prune in [Prune::None, Prune::Weak] {
            let g = solve_dfs(&cfg(d).with_prune(prune)).unwrap();
            let r = solve_dfs(&cfg(d).with_prune(prune).with_nicg_test(NicgTest::Removal)).unwrap();
            assert_eq!(g.best_cardinality, r.best_cardinality);
            assert_eq!(g.witnesses, r.witnesses, "d={d} {prune:?}");
        }
    }
}

#[test]
fn results_grow_with_dimension() {
    let ns: Vec<usize> = (1..=5).map(|d| exact_n(&cfg(d)).unwrap().n).collect();
    for w in ns.windows(2) {
        assert!(w[0] < w[1], "{ns:?}");
    }
}

#[test]
fn restricted_never_beats_unrestricted() {
    for d in 2..=5 {
        let full = solve_max(&cfg(d)).unwrap().best_cardinality;
        for component in 1..=d {
            for bit in [0u8, 1] {
                let c = cfg(d).with_restriction(Restriction { component, bit });
                let out = solve_max(&c).unwrap();
                assert!(out.exact);
                assert!(out.best_cardinality <= full);
                for w in &out.witnesses {
                    assert!(w.iter().all(|v| v.component(component) == bit));
                }
            }
        }
    }
}

#[test]
fn restriction_is_respected_by_all_prunings() {
    let r = Restriction {
        component: 2,
        bit: 1,
    };
    let base = solve_dfs(&cfg(4).with_restriction(r).with_prune(Prune::None)).unwrap();
    for prune in [Prune::Weak, Prune::Canonical, Prune::Buckets] {
        let out = solve_dfs(&cfg(4).with_restriction(r).with_prune(prune)).unwrap();
        assert_eq!(out.best_cardinality, base.best_cardinality);
        // classes under permutations that keep component 2 in place
        let keys = |o: &SearchOutcome| {
            let mut k: Vec<_> = o
                .witnesses
                .iter()
                .map(|w| {
                    let fixed = nicg_core::iso::Canonicalizer::new(w.dim(), 0b10).unwrap();
                    fixed.key(w.masks())
                })
                .collect();
            k.sort();
            k.dedup();
            k
        };
        assert_eq!(keys(&out), keys(&base), "{prune:?}");
    }
}

#[test]
fn parallel_matches_sequential() {
    for d in [4, 5] {
        for prune in [Prune::Weak, Prune::Canonical] {
            let seq = solve_dfs(&cfg(d).with_prune(prune)).unwrap();
            let par = solve_dfs(&cfg(d).with_prune(prune).with_threads(3)).unwrap();
            assert_eq!(seq.best_cardinality, par.best_cardinality);
            assert_eq!(classes(&seq), classes(&par), "d={d} {prune:?}");
        }
    }
}

#[test]
fn exists_and_binary_search_examples() {
    assert!(exists_nicg(&cfg(5), 8).unwrap().witness.is_none());
    let w = exists_nicg(&cfg(5), 7).unwrap().witness.unwrap();
    assert!(w.len() == 7 && is_nicg_removal(&w));
    let b = binary_search_n(&cfg(5), 6, 11).unwrap();
    assert_eq!(b.n, 7);
    let sizes: Vec<usize> = b.probes.iter().map(|p| p.size).collect();
    assert_eq!(sizes, vec![8, 7]);
    assert_eq!(binary_search_n(&cfg(4), 4, 16).unwrap().n, 5);
}

#[test]
fn budget_truncation_is_reported() {
    let c = cfg(5).with_budget(Budget {
        max_nodes: Some(50),
        max_millis: None,
    });
    let out = solve_dfs(&c).unwrap();
    assert!(!out.exact);
    assert!(exact_n(&c).is_err());
    assert!(exists_nicg(&c, 8).is_err());
}

#[test]
fn randomized_runs_are_reproducible() {
    let c = cfg(6)
        .with_mode(SearchMode::Randomized)
        .with_seed(42)
        .with_budget(Budget {
            max_nodes: Some(30_000),
            max_millis: None,
        });
    let mut c = c;
    c.restart_nodes = 5_000;
    let a = randomized_search(&c).unwrap();
    let b = randomized_search(&c).unwrap();
    assert_eq!(a.witnesses, b.witnesses);
    assert_eq!(without_timing(a.stats.clone()), without_timing(b.stats));
    assert_eq!(a.stats.prng_name.as_deref(), Some("ChaCha8Rng"));
    assert_eq!(a.stats.restarts, 6);
    assert!(!a.exact);
    assert!(a.witnesses.iter().all(is_nicg_removal));
    let other = randomized_search(&c.clone().with_seed(43)).unwrap();
    assert!(other.best_cardinality >= 8);
}

#[test]
fn sequential_runs_are_reproducible() {
    let a = solve_dfs(&cfg(5)).unwrap();
    let b = solve_dfs(&cfg(5)).unwrap();
    assert_eq!(a.witnesses, b.witnesses);
    assert_eq!(without_timing(a.stats), without_timing(b.stats));
}

#[test]
fn interrupted_run_resumes_to_the_same_outcome() {
    let dir = tempfile::tempdir().unwrap();
    for prune in [Prune::Weak, Prune::Canonical] {
        let full = solve_dfs(&cfg(4).with_prune(prune)).unwrap();
        let n = full.stats.nodes_visited;
        for stop_at in [1, 7, n / 3, n - 2] {
            let path = dir.path().join(format!("ck-{prune:?}-{stop_at}.json"));
            let first = cfg(4)
                .with_prune(prune)
                .with_budget(Budget {
                    max_nodes: Some(stop_at),
                    max_millis: None,
                })
                .with_checkpoint(CheckpointSpec {
                    path: path.clone(),
                    every_nodes: 5,
                });
            let partial = solve_dfs(&first).unwrap();
            assert!(!partial.exact);
            let (saved_cfg, snap) = load_checkpoint(&path).unwrap();
            assert_eq!(saved_cfg.dim, first.dim);
            // serialization round trip of the frontier
            let again = dir.path().join("copy.json");
            save_checkpoint(&again, &saved_cfg, &snap).unwrap();
            assert_eq!(load_checkpoint(&again).unwrap().1, snap);

            let resumed = resume_dfs(&cfg(4).with_prune(prune), &snap).unwrap();
            assert!(resumed.exact);
            assert_eq!(resumed.best_cardinality, full.best_cardinality);
            assert_eq!(resumed.witnesses, full.witnesses, "{prune:?} stop at {stop_at}");
            assert_eq!(
                without_timing(resumed.stats),
                without_timing(full.stats.clone())
            );
        }
    }
}

#[test]
fn enumeration_small_cases() {
    let one = enumerate_all_max_solutions(&cfg(1)).unwrap();
    assert_eq!(one.len(), 1);
    let three = enumerate_all_max_solutions(&cfg(3)).unwrap();
    let w3 = canonical_form(&fixtures::witness(3).unwrap()).unwrap();
    assert!(three.contains(&w3));
    let mut guarded = cfg(7);
    guarded.enumerate_max_dim = 6;
    assert!(enumerate_all_max_solutions(&guarded).is_err());
}
