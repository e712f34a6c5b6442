//! Bit-vector primitives shared by every other module.
//!
//! A vector of `{0,1}^d` is stored as a `u32` mask where component `i`
//! (1-based) lives in bit `i - 1`. Human-readable strings always list
//! component 1 first, independent of this encoding.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{NicgError, Result};

/// Hard cap on the dimension; masks must fit in one machine word.
pub const MAX_DIM: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Dim(u8);

impl Dim {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(NicgError::InvalidInput(format!(
                "dimension must lie in 1..={MAX_DIM}, got {d}"
            )));
        }
        Ok(Dim(d as u8))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// Mask with all `d` components set.
    #[inline]
    pub fn full_mask(self) -> u32 {
        if self.0 as usize == 32 {
            u32::MAX
        } else {
            (1u32 << self.0) - 1
        }
    }

    /// Number of nonzero vectors, `2^d - 1`.
    #[inline]
    pub fn nonzero_count(self) -> usize {
        self.full_mask() as usize
    }

    pub fn check(self, other: Dim) -> Result<()> {
        if self != other {
            return Err(NicgError::DimensionMismatch {
                expected: self.get(),
                found: other.get(),
            });
        }
        Ok(())
    }
}

impl TryFrom<usize> for Dim {
    type Error = NicgError;

    fn try_from(d: usize) -> Result<Self> {
        Dim::new(d)
    }
}

impl From<Dim> for usize {
    fn from(d: Dim) -> usize {
        d.get()
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    dim: Dim,
    mask: u32,
}

impl BitVec {
    pub fn new(dim: Dim, mask: u32) -> Result<Self> {
        if mask & !dim.full_mask() != 0 {
            return Err(NicgError::InvalidInput(format!(
                "mask {mask:#b} does not fit in dimension {dim}"
            )));
        }
        Ok(BitVec { dim, mask })
    }

    /// Builds a vector from its components, component 1 first.
    pub fn from_components(dim: Dim, components: &[u8]) -> Result<Self> {
        if components.len() != dim.get() {
            return Err(NicgError::InvalidInput(format!(
                "expected {} components, got {}",
                dim.get(),
                components.len()
            )));
        }
        let mut mask = 0u32;
        for (i, &c) in components.iter().enumerate() {
            match c {
                0 => {}
                1 => mask |= 1 << i,
                other => {
                    return Err(NicgError::InvalidInput(format!(
                        "component {} is {other}, expected 0 or 1",
                        i + 1
                    )))
                }
            }
        }
        Ok(BitVec { dim, mask })
    }

    #[inline]
    pub fn dim(self) -> Dim {
        self.dim
    }

    #[inline]
    pub fn mask(self) -> u32 {
        self.mask
    }

    /// Component `i`, 1-based.
    #[inline]
    pub fn component(self, i: usize) -> u8 {
        ((self.mask >> (i - 1)) & 1) as u8
    }

    pub fn components(self) -> Vec<u8> {
        (1..=self.dim.get()).map(|i| self.component(i)).collect()
    }

    #[inline]
    pub fn popcount(self) -> u32 {
        self.mask.count_ones()
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.mask == 0
    }

    /// Parses a `'0'`/`'1'` string, component 1 first.
    pub fn parse(dim: Dim, s: &str) -> Result<Self> {
        let bytes: Vec<u8> = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(NicgError::InvalidInput(format!(
                    "unexpected character {other:?} in vector string {s:?}"
                ))),
            })
            .collect::<Result<_>>()?;
        BitVec::from_components(dim, &bytes)
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 1..=self.dim.get() {
            write!(f, "{}", self.component(i))?;
        }
        Ok(())
    }
}

/// Renders a raw mask in the component-1-first string form.
pub fn mask_to_string(dim: Dim, mask: u32) -> String {
    (0..dim.get())
        .map(|i| if mask >> i & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// A finite set of distinct nonzero vectors of one dimension, kept sorted by mask.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VecSet {
    dim: Dim,
    masks: Vec<u32>,
}

impl VecSet {
    pub fn empty(dim: Dim) -> Self {
        VecSet {
            dim,
            masks: Vec::new(),
        }
    }

    /// Rejects zero masks, masks outside the dimension and duplicates.
    pub fn from_masks(dim: Dim, masks: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mut masks: Vec<u32> = masks.into_iter().collect();
        for &m in &masks {
            if m == 0 {
                return Err(NicgError::InvalidInput(
                    "the zero vector cannot be a member of a generator set".into(),
                ));
            }
            if m & !dim.full_mask() != 0 {
                return Err(NicgError::InvalidInput(format!(
                    "mask {m:#b} does not fit in dimension {dim}"
                )));
            }
        }
        masks.sort_unstable();
        if let Some(w) = masks.windows(2).find(|w| w[0] == w[1]) {
            return Err(NicgError::InvalidInput(format!(
                "duplicate vector {}",
                mask_to_string(dim, w[0])
            )));
        }
        Ok(VecSet { dim, masks })
    }

    /// Skips validation; callers guarantee sorted, distinct, nonzero, in-range masks.
    pub(crate) fn from_sorted_unchecked(dim: Dim, masks: Vec<u32>) -> Self {
        debug_assert!(masks.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(masks.iter().all(|&m| m != 0 && m & !dim.full_mask() == 0));
        VecSet { dim, masks }
    }

    pub fn from_vecs(dim: Dim, vecs: impl IntoIterator<Item = BitVec>) -> Result<Self> {
        let mut masks = Vec::new();
        for v in vecs {
            dim.check(v.dim())?;
            masks.push(v.mask());
        }
        VecSet::from_masks(dim, masks)
    }

    /// Builds a set from a `d x n` 0/1 matrix whose columns are the vectors.
    pub fn from_matrix_rows(rows: &[&[u8]]) -> Result<Self> {
        let dim = Dim::new(rows.len())?;
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(NicgError::InvalidInput("ragged matrix".into()));
        }
        let vecs = (0..cols)
            .map(|j| {
                let column: Vec<u8> = rows.iter().map(|r| r[j]).collect();
                BitVec::from_components(dim, &column)
            })
            .collect::<Result<Vec<_>>>()?;
        VecSet::from_vecs(dim, vecs)
    }

    #[inline]
    pub fn dim(&self) -> Dim {
        self.dim
    }

    #[inline]
    pub fn masks(&self) -> &[u32] {
        &self.masks
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.masks.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = BitVec> + '_ {
        let dim = self.dim;
        self.masks.iter().map(move |&mask| BitVec { dim, mask })
    }

    pub fn contains(&self, mask: u32) -> bool {
        self.masks.binary_search(&mask).is_ok()
    }

    /// Copy of the set with `mask` removed (no-op when absent).
    pub fn without(&self, mask: u32) -> VecSet {
        VecSet {
            dim: self.dim,
            masks: self.masks.iter().copied().filter(|&m| m != mask).collect(),
        }
    }

    pub fn with(&self, v: BitVec) -> Result<VecSet> {
        self.dim.check(v.dim())?;
        VecSet::from_masks(self.dim, self.masks.iter().copied().chain([v.mask()]))
    }

    pub fn sum(&self) -> SumVec {
        sum_set(self)
    }

    pub fn permuted(&self, p: &Permutation) -> Result<VecSet> {
        self.dim.check(p.dim())?;
        let mut masks: Vec<u32> = self.masks.iter().map(|&m| p.apply_mask(m)).collect();
        masks.sort_unstable();
        Ok(VecSet::from_sorted_unchecked(self.dim, masks))
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.masks
            .iter()
            .map(|&m| mask_to_string(self.dim, m))
            .collect()
    }
}

/// Component sum of a vector set, or any nonnegative target vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SumVec {
    counts: Vec<i64>,
}

impl SumVec {
    pub fn new(counts: Vec<i64>) -> Result<Self> {
        if let Some(i) = counts.iter().position(|&c| c < 0) {
            return Err(NicgError::InvalidInput(format!(
                "component {} of the target is negative",
                i + 1
            )));
        }
        Ok(SumVec { counts })
    }

    pub fn zeros(dim: Dim) -> Self {
        SumVec {
            counts: vec![0; dim.get()],
        }
    }

    #[inline]
    pub fn counts(&self) -> &[i64] {
        &self.counts
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

pub fn sum_set(x: &VecSet) -> SumVec {
    SumVec {
        counts: sum_masks(x.dim(), x.masks()),
    }
}

pub(crate) fn sum_masks(dim: Dim, masks: &[u32]) -> Vec<i64> {
    let mut counts = vec![0i64; dim.get()];
    for &m in masks {
        let mut rest = m;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            counts[i] += 1;
            rest &= rest - 1;
        }
    }
    counts
}

/// A permutation of components. Applying it to `x` yields `y` with `x_i = y_{P(i)}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    /// Zero-based images: component `i + 1` moves to `image[i] + 1`.
    image: Vec<u8>,
}

impl Permutation {
    pub fn identity(dim: Dim) -> Self {
        Permutation {
            image: (0..dim.get() as u8).collect(),
        }
    }

    /// Builds from 1-based images, `images[i - 1] = P(i)`.
    pub fn from_images(images: &[usize]) -> Result<Self> {
        Dim::new(images.len())?;
        let mut seen = vec![false; images.len()];
        let mut image = Vec::with_capacity(images.len());
        for &p in images {
            if p == 0 || p > images.len() || seen[p - 1] {
                return Err(NicgError::InvalidInput(format!(
                    "{images:?} is not a permutation of 1..={}",
                    images.len()
                )));
            }
            seen[p - 1] = true;
            image.push((p - 1) as u8);
        }
        Ok(Permutation { image })
    }

    pub(crate) fn from_zero_based(image: Vec<u8>) -> Self {
        Permutation { image }
    }

    pub fn dim(&self) -> Dim {
        Dim(self.image.len() as u8)
    }

    /// `P(i)` for a 1-based index.
    pub fn image_of(&self, i: usize) -> usize {
        self.image[i - 1] as usize + 1
    }

    #[inline]
    pub fn apply_mask(&self, mask: u32) -> u32 {
        let mut out = 0u32;
        let mut rest = mask;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            out |= 1 << self.image[i];
            rest &= rest - 1;
        }
        out
    }

    pub fn apply(&self, x: BitVec) -> Result<BitVec> {
        self.dim().check(x.dim())?;
        Ok(BitVec {
            dim: x.dim(),
            mask: self.apply_mask(x.mask()),
        })
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        self.dim().check(other.dim())?;
        Ok(Permutation {
            image: other.image.iter().map(|&q| self.image[q as usize]).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut image = vec![0u8; self.image.len()];
        for (i, &p) in self.image.iter().enumerate() {
            image[p as usize] = i as u8;
        }
        Permutation { image }
    }

    /// All `d!` permutations in lexicographic order of their image sequences.
    pub fn all(dim: Dim) -> impl Iterator<Item = Permutation> {
        let mut next = Some((0..dim.get() as u8).collect::<Vec<u8>>());
        std::iter::from_fn(move || {
            let current = next.take()?;
            let mut succ = current.clone();
            if next_permutation(&mut succ) {
                next = Some(succ);
            }
            Some(Permutation { image: current })
        })
    }
}

/// Advances `v` to the next permutation in lexicographic order; false at the last one.
pub(crate) fn next_permutation(v: &mut [u8]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// `sum_{k = kmin}^{kmax} C(v, k)` in exact arithmetic.
pub fn enumeration_budget(v: u64, kmin: u64, kmax: u64) -> Result<BigUint> {
    if kmin > kmax || kmax > v {
        return Err(NicgError::InvalidInput(format!(
            "need 0 <= kmin <= kmax <= v, got v={v}, kmin={kmin}, kmax={kmax}"
        )));
    }
    let mut total = BigUint::zero();
    let mut binom = BigUint::one(); // C(v, 0)
    for k in 0..=kmax {
        if k >= kmin {
            total += &binom;
        }
        binom = binom * (v - k) / (k + 1);
    }
    Ok(total)
}
