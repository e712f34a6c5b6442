use nicg_core::iso::{
    are_isomorphic, find_isomorphism, isomorphic_vectors, layer, signature_key,
    update_fixed_perms, FixedPerms,
};
use nicg_core::{canonical_form, BitVec, Dim, Permutation, VecSet};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dim(d: usize) -> Dim {
    Dim::new(d).unwrap()
}

fn perm_strategy(d: usize) -> impl Strategy<Value = Permutation> {
    Just((1..=d).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(|images| Permutation::from_images(&images).unwrap())
}

fn set_strategy(d: usize) -> impl Strategy<Value = VecSet> {
    prop::collection::btree_set(1u32..(1 << d), 0..=(d + 2))
        .prop_map(move |masks| VecSet::from_masks(dim(d), masks).unwrap())
}

proptest! {
    #[test]
    fn identity_acts_trivially(x in set_strategy(5)) {
        prop_assert_eq!(x.permuted(&Permutation::identity(dim(5))).unwrap(), x);
    }

    #[test]
    fn action_is_compatible_with_composition(
        x in set_strategy(5),
        p in perm_strategy(5),
        q in perm_strategy(5),
    ) {
        let pq = p.compose(&q).unwrap();
        let step = x.permuted(&q).unwrap().permuted(&p).unwrap();
        prop_assert_eq!(x.permuted(&pq).unwrap(), step);
    }

    #[test]
    fn inverse_undoes_the_action(x in set_strategy(6), p in perm_strategy(6)) {
        prop_assert_eq!(x.permuted(&p).unwrap().permuted(&p.inverse()).unwrap(), x);
    }

    #[test]
    fn canonical_form_is_orbit_invariant(x in set_strategy(5), p in perm_strategy(5)) {
        let y = x.permuted(&p).unwrap();
        prop_assert_eq!(canonical_form(&x).unwrap(), canonical_form(&y).unwrap());
        prop_assert!(are_isomorphic(&x, &y).unwrap());
        let found = find_isomorphism(&x, &y).unwrap().expect("orbit member");
        prop_assert_eq!(x.permuted(&found).unwrap(), y);
    }

    #[test]
    fn signature_is_orbit_invariant(x in set_strategy(5), p in perm_strategy(5)) {
        let y = x.permuted(&p).unwrap();
        prop_assert_eq!(signature_key(&x).unwrap(), signature_key(&y).unwrap());
    }

    #[test]
    fn isomorphism_is_an_equivalence(
        x in set_strategy(4),
        p in perm_strategy(4),
        q in perm_strategy(4),
    ) {
        let y = x.permuted(&p).unwrap();
        let z = y.permuted(&q).unwrap();
        prop_assert!(are_isomorphic(&x, &x).unwrap());
        prop_assert_eq!(are_isomorphic(&x, &y).unwrap(), are_isomorphic(&y, &x).unwrap());
        prop_assert!(are_isomorphic(&x, &z).unwrap());
    }

    #[test]
    fn weak_vector_relation_is_an_equivalence(
        fixed in 0u32..64,
        a in 1u32..64,
        b in 1u32..64,
        c in 1u32..64,
    ) {
        let fp = FixedPerms::from_mask(fixed);
        let v = |m| BitVec::new(dim(6), m).unwrap();
        let r = |x, y| isomorphic_vectors(v(x), v(y), fp).unwrap();
        prop_assert!(r(a, a));
        prop_assert_eq!(r(a, b), r(b, a));
        if r(a, b) && r(b, c) {
            prop_assert!(r(a, c));
        }
    }
}

#[test]
fn canonical_classes_partition_d3_sets() {
    // orbits of the 128 subsets under S_3
    let mut keys = std::collections::BTreeSet::new();
    for bits in 0u32..128 {
        let masks = (0..7).filter(|i| bits >> i & 1 == 1).map(|i| i + 1);
        let x = VecSet::from_masks(dim(3), masks).unwrap();
        keys.insert(canonical_form(&x).unwrap());
    }
    // Burnside: (128 + 3*32 + 2*8) / 6
    assert_eq!(keys.len(), 40);
}

#[test]
fn signature_only_sees_the_two_lowest_layers() {
    let x = VecSet::from_vecs(
        dim(4),
        ["1000", "1110"].iter().map(|s| BitVec::parse(dim(4), s).unwrap()),
    )
    .unwrap();
    let y = VecSet::from_vecs(
        dim(4),
        ["1000", "1101"].iter().map(|s| BitVec::parse(dim(4), s).unwrap()),
    )
    .unwrap();
    assert!(are_isomorphic(&x, &y).unwrap());
    assert_eq!(layer(&x, 3).len(), 1);
    // popcount-3 members are invisible to the signature
    assert_eq!(signature_key(&x).unwrap(), signature_key(&y).unwrap());
}

/// If `x ~ y` under the fixed positions of `X`, then `X ∪ {x}` and `X ∪ {y}` are isomorphic.
#[test]
fn weak_equivalence_is_sound() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for d in 2..=4usize {
        let universe: Vec<u32> = (1..1u32 << d).collect();
        let mut checked = 0;
        for _ in 0..4000 {
            let mut pool = universe.clone();
            pool.shuffle(&mut rng);
            let k = rng.gen_range(0..pool.len().min(4));
            let x_set = VecSet::from_masks(dim(d), pool[..k].iter().copied()).unwrap();
            let fp = x_set.iter().fold(FixedPerms::none(), update_fixed_perms);
            let rest = &pool[k..];
            if rest.len() < 2 {
                continue;
            }
            let a = BitVec::new(dim(d), rest[0]).unwrap();
            let b = BitVec::new(dim(d), rest[1]).unwrap();
            if !isomorphic_vectors(a, b, fp).unwrap() {
                continue;
            }
            checked += 1;
            let xa = x_set.with(a).unwrap();
            let xb = x_set.with(b).unwrap();
            assert_eq!(canonical_form(&xa).unwrap(), canonical_form(&xb).unwrap());
        }
        assert!(checked > 100, "d={d} only {checked} weakly equivalent pairs");
    }
}

#[test]
fn fixed_perms_examples() {
    let fp = FixedPerms::none();
    let v = |s: &str| BitVec::parse(dim(3), s).unwrap();
    assert!(isomorphic_vectors(v("100"), v("010"), fp).unwrap());
    let fp = update_fixed_perms(fp, v("110"));
    assert_eq!(fp.flags(dim(3)), vec![true, true, false]);
    assert!(!isomorphic_vectors(v("100"), v("010"), fp).unwrap());
    assert!(!isomorphic_vectors(v("100"), v("110"), fp).unwrap());
    assert!(isomorphic_vectors(v("101"), v("101"), fp).unwrap());
}
