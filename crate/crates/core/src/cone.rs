//! Integer cone membership: is `b` a nonnegative integer combination of `X`?
//!
//! Recursive enumeration over the members of `X` in ascending mask order.
//! For the current vector every coefficient `0, 1, 2, ...` is tried while
//! the residual stays componentwise nonnegative, then the remaining
//! vectors are tried on the residual.

use serde::{Deserialize, Serialize};

use crate::error::{NicgError, Result};
use crate::model::{SumVec, VecSet};

/// Coefficients of an integer-cone combination, aligned with the order of the `VecSet`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoeffVec(pub Vec<u32>);

impl CoeffVec {
    pub fn ones(n: usize) -> Self {
        CoeffVec(vec![1; n])
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.0
    }

    /// `sum_i coeffs[i] * x_i`, componentwise.
    pub fn combine(&self, x: &VecSet) -> Vec<i64> {
        let mut out = vec![0i64; x.dim().get()];
        for (&lambda, &m) in self.0.iter().zip(x.masks()) {
            for (i, slot) in out.iter_mut().enumerate() {
                if m >> i & 1 == 1 {
                    *slot += lambda as i64;
                }
            }
        }
        out
    }

    /// Substitution check: does this combination reproduce `b` exactly?
    pub fn certifies(&self, x: &VecSet, b: &[i64]) -> bool {
        self.0.len() == x.len() && self.combine(x) == b
    }
}

/// Returns a certificate `λ` with `Σ λ_i x_i = b`, or `None` when `b ∉ int_cone(X)`.
pub fn in_int_cone(x: &VecSet, b: &SumVec) -> Result<Option<CoeffVec>> {
    in_int_cone_raw(x, b.counts())
}

/// Same as [`in_int_cone`] for a plain target slice, validating sign and length.
pub fn in_int_cone_raw(x: &VecSet, b: &[i64]) -> Result<Option<CoeffVec>> {
    if b.len() != x.dim().get() {
        return Err(NicgError::DimensionMismatch {
            expected: x.dim().get(),
            found: b.len(),
        });
    }
    if let Some(i) = b.iter().position(|&c| c < 0) {
        return Err(NicgError::InvalidInput(format!(
            "component {} of the target is negative",
            i + 1
        )));
    }
    Ok(cone_certificate(x.masks(), b).map(CoeffVec))
}

/// Core of the membership test on raw masks. `b` must be nonnegative.
pub(crate) fn cone_certificate(masks: &[u32], b: &[i64]) -> Option<Vec<u32>> {
    // cover[i] = union of supports of masks[i..]
    let mut cover = vec![0u32; masks.len() + 1];
    for i in (0..masks.len()).rev() {
        cover[i] = cover[i + 1] | masks[i];
    }
    let mut residual = b.to_vec();
    let mut coeffs = vec![0u32; masks.len()];
    if search(masks, &cover, 0, &mut residual, &mut coeffs) {
        Some(coeffs)
    } else {
        None
    }
}

fn positive_support(residual: &[i64]) -> u32 {
    residual
        .iter()
        .enumerate()
        .filter(|(_, &r)| r > 0)
        .fold(0u32, |acc, (i, _)| acc | 1 << i)
}

fn search(
    masks: &[u32],
    cover: &[u32],
    idx: usize,
    residual: &mut [i64],
    coeffs: &mut [u32],
) -> bool {
    let support = positive_support(residual);
    if support == 0 {
        return true;
    }
    if idx == masks.len() || support & !cover[idx] != 0 {
        return false;
    }
    let m = masks[idx];
    let mut taken = 0u32;
    loop {
        coeffs[idx] = taken;
        if search(masks, cover, idx + 1, residual, coeffs) {
            return true;
        }
        // subtract one more copy of the current vector
        let mut negative = false;
        for (i, r) in residual.iter_mut().enumerate() {
            if m >> i & 1 == 1 {
                *r -= 1;
                negative |= *r < 0;
            }
        }
        taken += 1;
        if negative {
            break;
        }
    }
    // restore
    for (i, r) in residual.iter_mut().enumerate() {
        if m >> i & 1 == 1 {
            *r += taken as i64;
        }
    }
    coeffs[idx] = 0;
    false
}
