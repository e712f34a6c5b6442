//! Isomorphism of vector sets under permutations of components.
//!
//! Three levels of strictness are provided:
//! full canonical forms (minimum over all `d!` permutations), signature keys
//! built from the popcount-1 and popcount-2 layers only, and the weak
//! "1-order-preserving" vector equivalence driven by [`FixedPerms`].

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{NicgError, Result};
use crate::model::{next_permutation, BitVec, Dim, Permutation, VecSet};

/// Largest dimension for which `d!` enumeration is attempted.
pub const CANONICAL_MAX_DIM: usize = 10;

/// Precomputed lookup tables are used while `d! * 2^d` stays below this.
const TABLE_LIMIT: usize = 1 << 23;

/// Subset of `X` with exactly `k` nonzero components.
pub fn layer(x: &VecSet, k: u32) -> VecSet {
    let masks = x
        .masks()
        .iter()
        .copied()
        .filter(|m| m.count_ones() == k)
        .collect();
    VecSet::from_sorted_unchecked(x.dim(), masks)
}

/// Lexicographically minimal sorted mask list over the permutation orbit of a set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonicalKey(pub Vec<u32>);

impl CanonicalKey {
    pub fn masks(&self) -> &[u32] {
        &self.0
    }

    pub fn to_set(&self, dim: Dim) -> Result<VecSet> {
        VecSet::from_masks(dim, self.0.iter().copied())
    }
}

/// Canonical form of the pair of layers `(X^(1), X^(2))` under one shared permutation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignatureKey {
    pub singles: Vec<u32>,
    pub pairs: Vec<u32>,
}

/// Permutations of the components of one dimension, optionally restricted to those
/// fixing a given set of positions.
pub struct Canonicalizer {
    dim: Dim,
    images: Vec<Vec<u8>>,
    table: Option<Vec<u32>>,
}

impl Canonicalizer {
    /// All permutations that map every position in `fixed` to itself.
    pub fn new(dim: Dim, fixed: u32) -> Result<Self> {
        let d = dim.get();
        if d > CANONICAL_MAX_DIM {
            return Err(NicgError::Unsupported(format!(
                "canonical forms enumerate d! permutations; d = {d} exceeds {CANONICAL_MAX_DIM}"
            )));
        }
        let mut images = Vec::new();
        let mut image: Vec<u8> = (0..d as u8).collect();
        loop {
            if (0..d).all(|i| fixed >> i & 1 == 0 || image[i] as usize == i) {
                images.push(image.clone());
            }
            if !next_permutation(&mut image) {
                break;
            }
        }
        let table = (images.len() << d <= TABLE_LIMIT).then(|| {
            let size = 1usize << d;
            let mut t = vec![0u32; images.len() * size];
            for (p, img) in images.iter().enumerate() {
                for m in 0..size as u32 {
                    t[p * size + m as usize] = apply_image(img, m);
                }
            }
            t
        });
        Ok(Canonicalizer { dim, images, table })
    }

    /// Shared instance for `(dim, fixed)`.
    pub fn shared(dim: Dim, fixed: u32) -> Result<Arc<Canonicalizer>> {
        static CACHE: OnceLock<Mutex<HashMap<(Dim, u32), Arc<Canonicalizer>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(c) = cache.lock().expect("cache lock").get(&(dim, fixed)) {
            return Ok(Arc::clone(c));
        }
        let c = Arc::new(Canonicalizer::new(dim, fixed)?);
        cache
            .lock()
            .expect("cache lock")
            .insert((dim, fixed), Arc::clone(&c));
        Ok(c)
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn permutation_count(&self) -> usize {
        self.images.len()
    }

    #[inline]
    fn map_into(&self, p: usize, masks: &[u32], out: &mut Vec<u32>) {
        out.clear();
        match &self.table {
            Some(t) => {
                let base = p << self.dim.get();
                out.extend(masks.iter().map(|&m| t[base + m as usize]));
            }
            None => {
                let img = &self.images[p];
                out.extend(masks.iter().map(|&m| apply_image(img, m)));
            }
        }
        out.sort_unstable();
    }

    /// Minimum over the permutation group of the sorted image of `masks`.
    pub fn key(&self, masks: &[u32]) -> CanonicalKey {
        let mut best: Vec<u32> = masks.to_vec();
        best.sort_unstable();
        let mut scratch = Vec::with_capacity(masks.len());
        for p in 0..self.images.len() {
            self.map_into(p, masks, &mut scratch);
            if scratch < best {
                std::mem::swap(&mut best, &mut scratch);
            }
        }
        CanonicalKey(best)
    }

    pub fn signature(&self, masks: &[u32]) -> SignatureKey {
        let singles: Vec<u32> = masks.iter().copied().filter(|m| m.count_ones() == 1).collect();
        let pairs: Vec<u32> = masks.iter().copied().filter(|m| m.count_ones() == 2).collect();
        let mut best: Option<(Vec<u32>, Vec<u32>)> = None;
        let (mut s, mut t) = (Vec::new(), Vec::new());
        for p in 0..self.images.len() {
            self.map_into(p, &singles, &mut s);
            self.map_into(p, &pairs, &mut t);
            let better = match &best {
                None => true,
                Some((bs, bt)) => (&s, &t) < (bs, bt),
            };
            if better {
                best = Some((s.clone(), t.clone()));
            }
        }
        let (singles, pairs) = best.unwrap_or_default();
        SignatureKey { singles, pairs }
    }
}

fn apply_image(image: &[u8], mask: u32) -> u32 {
    let mut out = 0u32;
    let mut rest = mask;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        out |= 1 << image[i];
        rest &= rest - 1;
    }
    out
}

pub fn canonical_form(x: &VecSet) -> Result<CanonicalKey> {
    Ok(Canonicalizer::shared(x.dim(), 0)?.key(x.masks()))
}

pub fn signature_key(x: &VecSet) -> Result<SignatureKey> {
    Ok(Canonicalizer::shared(x.dim(), 0)?.signature(x.masks()))
}

/// True when some component permutation maps `x` onto `y`.
pub fn are_isomorphic(x: &VecSet, y: &VecSet) -> Result<bool> {
    if x.dim() != y.dim() || x.len() != y.len() {
        return Ok(false);
    }
    Ok(canonical_form(x)? == canonical_form(y)?)
}

/// Applies every permutation and returns one mapping `x` onto `y`, if any.
pub fn find_isomorphism(x: &VecSet, y: &VecSet) -> Result<Option<Permutation>> {
    let c = Canonicalizer::shared(x.dim(), 0)?;
    if x.dim() != y.dim() || x.len() != y.len() {
        return Ok(None);
    }
    let mut scratch = Vec::new();
    for p in 0..c.images.len() {
        c.map_into(p, x.masks(), &mut scratch);
        if scratch == y.masks() {
            return Ok(Some(Permutation::from_zero_based(c.images[p].clone())));
        }
    }
    Ok(None)
}

/// Positions every permutation in the represented collection must fix.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FixedPerms(u32);

impl FixedPerms {
    pub fn none() -> Self {
        FixedPerms(0)
    }

    pub fn from_mask(mask: u32) -> Self {
        FixedPerms(mask)
    }

    pub fn from_flags(flags: &[bool]) -> Self {
        FixedPerms(
            flags
                .iter()
                .enumerate()
                .filter(|(_, &f)| f)
                .fold(0, |acc, (i, _)| acc | 1 << i),
        )
    }

    #[inline]
    pub fn mask(self) -> u32 {
        self.0
    }

    /// Whether position `i` (1-based) is fixed.
    pub fn is_fixed(self, i: usize) -> bool {
        self.0 >> (i - 1) & 1 == 1
    }

    pub fn flags(self, dim: Dim) -> Vec<bool> {
        (1..=dim.get()).map(|i| self.is_fixed(i)).collect()
    }

    #[inline]
    pub fn update_mask(self, x: u32) -> FixedPerms {
        FixedPerms(self.0 | x)
    }

    pub fn update(self, x: BitVec) -> FixedPerms {
        self.update_mask(x.mask())
    }
}

pub fn update_fixed_perms(fp: FixedPerms, x: BitVec) -> FixedPerms {
    fp.update(x)
}

#[inline]
pub(crate) fn weakly_isomorphic(x: u32, y: u32, fixed: u32) -> bool {
    x.count_ones() == y.count_ones() && (x ^ y) & fixed == 0
}

/// Equal popcount and agreement on every fixed position.
pub fn isomorphic_vectors(x: BitVec, y: BitVec, fp: FixedPerms) -> Result<bool> {
    x.dim().check(y.dim())?;
    Ok(weakly_isomorphic(x.mask(), y.mask(), fp.mask()))
}

/// Outcome of inserting into a [`VisitedStore`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Insert {
    New,
    Seen,
    /// Capacity reached; the key was not recorded.
    Full,
}

/// Set of canonical keys already explored, optionally bucketed by signature.
#[derive(Debug)]
pub enum VisitedStore {
    Flat {
        keys: HashSet<CanonicalKey>,
        capacity: usize,
    },
    Buckets {
        buckets: HashMap<SignatureKey, HashSet<CanonicalKey>>,
        len: usize,
        capacity: usize,
    },
}

impl VisitedStore {
    pub fn flat(capacity: usize) -> Self {
        VisitedStore::Flat {
            keys: HashSet::new(),
            capacity,
        }
    }

    pub fn bucketed(capacity: usize) -> Self {
        VisitedStore::Buckets {
            buckets: HashMap::new(),
            len: 0,
            capacity,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            VisitedStore::Flat { keys, .. } => keys.len(),
            VisitedStore::Buckets { len, .. } => *len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_full(&self) -> bool {
        match self {
            VisitedStore::Flat { keys, capacity } => keys.len() >= *capacity,
            VisitedStore::Buckets { len, capacity, .. } => *len >= *capacity,
        }
    }

    /// Inserts the state `masks` unless an isomorphic state is already present.
    pub fn insert_if_absent(&mut self, canon: &Canonicalizer, masks: &[u32]) -> Insert {
        match self {
            VisitedStore::Flat { keys, capacity } => {
                let key = canon.key(masks);
                if keys.contains(&key) {
                    Insert::Seen
                } else if keys.len() >= *capacity {
                    Insert::Full
                } else {
                    keys.insert(key);
                    Insert::New
                }
            }
            VisitedStore::Buckets {
                buckets,
                len,
                capacity,
            } => {
                let sig = canon.signature(masks);
                let key = canon.key(masks);
                if buckets.get(&sig).is_some_and(|b| b.contains(&key)) {
                    Insert::Seen
                } else if *len >= *capacity {
                    Insert::Full
                } else {
                    buckets.entry(sig).or_default().insert(key);
                    *len += 1;
                    Insert::New
                }
            }
        }
    }

    /// Every stored canonical key, sorted.
    pub fn keys(&self) -> Vec<CanonicalKey> {
        let mut out: Vec<CanonicalKey> = match self {
            VisitedStore::Flat { keys, .. } => keys.iter().cloned().collect(),
            VisitedStore::Buckets { buckets, .. } => {
                buckets.values().flat_map(|b| b.iter().cloned()).collect()
            }
        };
        out.sort();
        out
    }

    /// Re-inserts previously stored keys (used when resuming a checkpoint).
    pub fn restore(&mut self, canon: &Canonicalizer, keys: &[CanonicalKey]) {
        for k in keys {
            self.insert_if_absent(canon, k.masks());
        }
    }
}
