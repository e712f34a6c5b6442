use nicg_core::nicg::MatrixView;
use nicg_core::transforms::{
    normalize_all_ones_rows, row_subtract_transform, row_sum_transform, row_support_contained,
    rows_share_variable,
};
use nicg_core::{is_nicg_removal, Dim, NicgError, VecSet};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Default)]
struct Tally {
    sums: usize,
    subtractions: usize,
    normalizations: usize,
}

fn nicg_of(m: &MatrixView) -> bool {
    is_nicg_removal(&m.to_set().expect("0/1 matrix with distinct nonzero columns"))
}

/// Applies every admissible transform to `x` and checks the NICG status survives.
fn sweep(x: &VecSet, tally: &mut Tally) {
    let m = MatrixView::from_set(x);
    let before = is_nicg_removal(x);
    let d = m.rows();
    for i1 in 1..=d {
        for i2 in 1..=d {
            if i1 == i2 {
                continue;
            }
            if !rows_share_variable(&m, i1, i2).unwrap() {
                let t = row_sum_transform(&m, i1, i2).unwrap();
                assert_eq!(nicg_of(&t), before, "sum {i1}->{i2} on {:?}", x.to_strings());
                tally.sums += 1;
            }
            if row_support_contained(&m, i1, i2).unwrap() {
                let t = row_subtract_transform(&m, i1, i2).unwrap();
                assert_eq!(nicg_of(&t), before, "sub {i1}->{i2} on {:?}", x.to_strings());
                tally.subtractions += 1;
            }
        }
    }
    match normalize_all_ones_rows(&m) {
        Ok(t) => {
            assert_eq!(t.cols(), m.cols());
            for i in 0..t.rows() {
                assert!(t.row(i).contains(&0), "row {} still all ones", i + 1);
            }
            assert_eq!(nicg_of(&t), before);
            tally.normalizations += 1;
        }
        Err(NicgError::Unsupported(_)) => {}
        Err(e) => panic!("normalize failed on {:?}: {e}", x.to_strings()),
    }
}

#[test]
fn lemmas_hold_on_every_d3_set() {
    let dim = Dim::new(3).unwrap();
    let mut tally = Tally::default();
    for bits in 1u32..128 {
        let x = VecSet::from_masks(dim, (0..7).filter(|i| bits >> i & 1 == 1).map(|i| i + 1))
            .unwrap();
        sweep(&x, &mut tally);
    }
    assert!(tally.sums > 0 && tally.subtractions > 0 && tally.normalizations > 0);
}

#[test]
fn lemmas_hold_on_sampled_d4_sets() {
    let dim = Dim::new(4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xd4);
    let mut tally = Tally::default();
    let mut nicg_cases = 0;
    for _ in 0..1500 {
        let mut pool: Vec<u32> = (1..16).collect();
        pool.shuffle(&mut rng);
        let k = rng.gen_range(1..=6);
        let x = VecSet::from_masks(dim, pool[..k].iter().copied()).unwrap();
        nicg_cases += usize::from(is_nicg_removal(&x));
        sweep(&x, &mut tally);
    }
    assert!(nicg_cases >= 300, "only {nicg_cases} NICG samples");
    assert!(tally.sums + tally.subtractions >= 1000);
}

#[test]
fn addition_example_and_inverse() {
    let m = MatrixView::from_rows(&[vec![1, 0], vec![0, 1]]).unwrap();
    let t = row_sum_transform(&m, 1, 2).unwrap();
    assert_eq!(t.row_vecs(), vec![vec![1, 0], vec![1, 1]]);
    assert_eq!(nicg_of(&m), nicg_of(&t));
    assert_eq!(row_subtract_transform(&t, 1, 2).unwrap(), m);
}

#[test]
fn preconditions_are_enforced() {
    let m = MatrixView::from_rows(&[vec![1, 1], vec![0, 1]]).unwrap();
    assert!(rows_share_variable(&m, 1, 2).unwrap());
    assert!(matches!(
        row_sum_transform(&m, 1, 2),
        Err(NicgError::InvalidTransform(_))
    ));
    assert!(matches!(
        row_subtract_transform(&m, 1, 2),
        Err(NicgError::InvalidTransform(_))
    ));
    assert!(rows_share_variable(&m, 1, 1).is_err());
    assert!(rows_share_variable(&m, 1, 3).is_err());
    let single = MatrixView::from_rows(&[vec![1, 1, 1]]).unwrap();
    assert!(normalize_all_ones_rows(&single).is_err());
}
