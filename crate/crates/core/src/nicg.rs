//! NICG decision procedures.
//!
//! `X` is NICG when its sum `ΣX` cannot be generated once any single member
//! is dropped. Two independent routes decide it:
//!
//! * [`is_nicg_removal`] runs the cone-membership search once per member;
//! * [`is_nicg_gauss`] row-reduces `Mλ = ΣX` exactly and enumerates the free
//!   parameters, looking for any nonnegative integer solution with a zero
//!   entry. The all-ones vector always solves the system, and any solution
//!   with every entry `>= 1` must be all-ones, so such a zero-entry solution
//!   exists exactly when `X` is not NICG.
//!
//! The search engine uses the Gaussian route by default and the removal
//! route as the independent oracle.

use std::cell::RefCell;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::cone::{cone_certificate, CoeffVec};
use crate::elim::GaussScratch;
use crate::error::{NicgError, Result};
use crate::model::{sum_masks, Dim, SumVec, VecSet};

/// Which NICG decision procedure to run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NicgTest {
    #[default]
    Gauss,
    Removal,
}

impl NicgTest {
    pub fn check(self, x: &VecSet) -> bool {
        self.check_masks(x.dim(), x.masks())
    }

    pub(crate) fn check_masks(self, dim: Dim, masks: &[u32]) -> bool {
        match self {
            NicgTest::Gauss => nicg_gauss_masks(dim, masks),
            NicgTest::Removal => nicg_removal_masks(dim, masks),
        }
    }
}

/// A `d x n` integer matrix; column `j` is the `j`-th vector of the represented set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MatrixView {
    rows: usize,
    cols: usize,
    entries: Vec<i64>,
}

impl MatrixView {
    pub fn new(rows: usize, cols: usize, entries: Vec<i64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(NicgError::InvalidInput(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(MatrixView {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(NicgError::InvalidInput("ragged matrix".into()));
        }
        MatrixView::new(rows.len(), cols, rows.concat())
    }

    /// Columns are the members of `x` in ascending mask order.
    pub fn from_set(x: &VecSet) -> Self {
        let rows = x.dim().get();
        let cols = x.len();
        let mut entries = vec![0i64; rows * cols];
        for (j, &m) in x.masks().iter().enumerate() {
            for i in 0..rows {
                entries[i * cols + j] = (m >> i & 1) as i64;
            }
        }
        MatrixView {
            rows,
            cols,
            entries,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry at zero-based `(row, col)`.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.entries[row * self.cols + col]
    }

    pub(crate) fn set(&mut self, row: usize, col: usize, value: i64) {
        self.entries[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[i64] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> Vec<i64> {
        (0..self.rows).map(|i| self.get(i, col)).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_binary(&self) -> bool {
        self.entries.iter().all(|&e| e == 0 || e == 1)
    }

    /// Column masks, or `None` when some entry is not 0/1.
    pub fn column_masks(&self) -> Option<Vec<u32>> {
        if !self.is_binary() || self.rows > crate::model::MAX_DIM {
            return None;
        }
        Some(
            (0..self.cols)
                .map(|j| {
                    (0..self.rows).fold(0u32, |acc, i| acc | ((self.get(i, j) as u32) << i))
                })
                .collect(),
        )
    }

    /// Converts back to a vector set; fails on non-0/1 entries, zero or duplicate columns.
    pub fn to_set(&self) -> Result<VecSet> {
        let masks = self.column_masks().ok_or_else(|| {
            NicgError::InvalidInput("matrix has entries outside {0,1}".into())
        })?;
        VecSet::from_masks(Dim::new(self.rows)?, masks)
    }

    /// Row sums of the columns, i.e. `M · 1`.
    pub fn column_sum(&self) -> Vec<i64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }
}

/// One reduced equation `denom · λ_pivot = rhs − Σ coeff_j · λ_j` over free variables `j`.
///
/// Together `rhs / denom` and `coeff_j / denom` are the exact rational coefficients
/// of the pivot variable in terms of the free parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalRow {
    pub pivot: usize,
    pub denom: i64,
    pub rhs: i64,
    pub free_coeffs: Vec<(usize, i64)>,
}

/// Result of exact row reduction of `[M | b]`.
#[derive(Clone, Debug)]
pub struct Reduced {
    pub cols: usize,
    pub rows: Vec<RationalRow>,
    pub free: Vec<usize>,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Fraction-free Gauss–Jordan elimination on `[M | b]`.
///
/// Pivot: first row (top-down, among unreduced rows) with a nonzero entry in the
/// current column, columns scanned left to right. Every row is kept divided by
/// the gcd of its entries so no rounding ever happens and values stay small.
/// Returns `None` when the system is inconsistent over the rationals.
pub fn reduce(m: &MatrixView, b: &[i64]) -> Option<Reduced> {
    let (nr, nc) = (m.rows, m.cols);
    let width = nc + 1;
    let mut a: Vec<i128> = Vec::with_capacity(nr * width);
    for i in 0..nr {
        a.extend(m.row(i).iter().map(|&e| e as i128));
        a.push(b[i] as i128);
    }
    let mut pivots = Vec::with_capacity(nr.min(nc));
    let mut rank = 0usize;
    for col in 0..nc {
        if rank == nr {
            break;
        }
        let Some(p) = (rank..nr).find(|&r| a[r * width + col] != 0) else {
            continue;
        };
        if p != rank {
            for k in 0..width {
                a.swap(p * width + k, rank * width + k);
            }
        }
        let pv = a[rank * width + col];
        for r in 0..nr {
            if r == rank {
                continue;
            }
            let f = a[r * width + col];
            if f == 0 {
                continue;
            }
            let mut g = 0i128;
            for k in 0..width {
                let v = a[r * width + k] * pv - f * a[rank * width + k];
                a[r * width + k] = v;
                g = gcd(g, v);
            }
            if g > 1 {
                for k in 0..width {
                    a[r * width + k] /= g;
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    // rows below the rank are all-zero on the left; their right side must vanish
    for r in rank..nr {
        if a[r * width + nc] != 0 {
            return None;
        }
    }
    let mut is_pivot = vec![false; nc];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let free: Vec<usize> = (0..nc).filter(|&c| !is_pivot[c]).collect();
    let rows = pivots
        .iter()
        .enumerate()
        .map(|(r, &pc)| {
            let mut denom = a[r * width + pc];
            let mut rhs = a[r * width + nc];
            let mut coeffs: Vec<(usize, i128)> = free
                .iter()
                .map(|&j| (j, a[r * width + j]))
                .filter(|&(_, c)| c != 0)
                .collect();
            if denom < 0 {
                denom = -denom;
                rhs = -rhs;
                coeffs.iter_mut().for_each(|(_, c)| *c = -*c);
            }
            let g = coeffs.iter().fold(gcd(denom, rhs), |g, &(_, c)| gcd(g, c));
            RationalRow {
                pivot: pc,
                denom: (denom / g) as i64,
                rhs: (rhs / g) as i64,
                free_coeffs: coeffs.into_iter().map(|(j, c)| (j, (c / g) as i64)).collect(),
            }
        })
        .collect();
    Some(Reduced {
        cols: nc,
        rows,
        free,
    })
}

/// Upper bound on a nonnegative variable: `min_i floor(b_i / M_ij)` over rows with
/// `M_ij > 0`, capped by the column count when the column is all zero.
fn variable_bound(m: &MatrixView, b: &[i64], col: usize) -> i64 {
    let mut bound: Option<i64> = None;
    for i in 0..m.rows {
        let e = m.get(i, col);
        if e > 0 {
            let q = b[i].max(0) / e;
            bound = Some(bound.map_or(q, |x: i64| x.min(q)));
        }
    }
    bound.unwrap_or(m.cols as i64)
}

/// Enumerates every nonnegative integer solution of `Mλ = b`, in order of ascending
/// free-parameter values (free variables taken in ascending column index).
///
/// A partial assignment is abandoned as soon as a pivot variable whose free
/// parameters are all assigned comes out negative or non-integral.
pub fn for_each_solution<F>(m: &MatrixView, b: &[i64], mut visit: F)
where
    F: FnMut(&[u32]) -> ControlFlow<()>,
{
    if m.entries.iter().any(|&e| e < 0) || b.iter().any(|&v| v < 0) || b.len() != m.rows {
        return;
    }
    let Some(red) = reduce(m, b) else {
        return;
    };
    let nfree = red.free.len();
    let mut position = vec![usize::MAX; red.cols];
    for (k, &j) in red.free.iter().enumerate() {
        position[j] = k;
    }
    // rows become checkable once their last free parameter is assigned
    let mut ready: Vec<Vec<usize>> = vec![Vec::new(); nfree + 1];
    for (r, row) in red.rows.iter().enumerate() {
        let last = row
            .free_coeffs
            .iter()
            .map(|&(j, _)| position[j] + 1)
            .max()
            .unwrap_or(0);
        ready[last].push(r);
    }
    let bounds: Vec<i64> = red.free.iter().map(|&j| variable_bound(m, b, j)).collect();
    let mut lambda = vec![0u32; red.cols];
    let mut state = Enumeration {
        red: &red,
        ready: &ready,
        bounds: &bounds,
        lambda: &mut lambda,
    };
    if !state.settle(0) {
        return;
    }
    let _ = state.descend(0, &mut visit);
}

struct Enumeration<'a> {
    red: &'a Reduced,
    ready: &'a [Vec<usize>],
    bounds: &'a [i64],
    lambda: &'a mut [u32],
}

impl Enumeration<'_> {
    /// Evaluates the pivot rows that became fully determined at `level`.
    fn settle(&mut self, level: usize) -> bool {
        for &r in &self.ready[level] {
            let row = &self.red.rows[r];
            let mut num = row.rhs;
            for &(j, c) in &row.free_coeffs {
                num -= c * self.lambda[j] as i64;
            }
            if num < 0 || num % row.denom != 0 {
                return false;
            }
            self.lambda[row.pivot] = (num / row.denom) as u32;
        }
        true
    }

    fn descend<F>(&mut self, k: usize, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[u32]) -> ControlFlow<()>,
    {
        if k == self.red.free.len() {
            return visit(self.lambda);
        }
        let var = self.red.free[k];
        for value in 0..=self.bounds[k] {
            self.lambda[var] = value as u32;
            if self.settle(k + 1) {
                self.descend(k + 1, visit)?;
            }
        }
        self.lambda[var] = 0;
        ControlFlow::Continue(())
    }
}

/// All nonnegative integer solutions of `Mλ = b`, stopping after `cap` of them.
pub fn nonneg_integer_solutions(m: &MatrixView, b: &SumVec, cap: usize) -> Vec<CoeffVec> {
    let mut out = Vec::new();
    if cap == 0 || b.len() != m.rows() {
        return out;
    }
    for_each_solution(m, b.counts(), |lambda| {
        out.push(CoeffVec(lambda.to_vec()));
        if out.len() >= cap {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    out
}

/// NICG via exact elimination: true iff no nonnegative solution of `Mλ = ΣX` has a zero entry.
pub fn is_nicg_gauss(x: &VecSet) -> bool {
    nicg_gauss_masks(x.dim(), x.masks())
}

thread_local! {
    static SCRATCH: RefCell<GaussScratch> = RefCell::new(GaussScratch::new());
}

pub(crate) fn nicg_gauss_masks(dim: Dim, masks: &[u32]) -> bool {
    if masks.len() <= 1 {
        return true;
    }
    if let Some(v) = SCRATCH.with(|s| s.borrow_mut().is_nicg(dim.get(), masks)) {
        return v;
    }
    nicg_gauss_exact(dim, masks)
}

/// Wide-integer route through [`reduce`] and [`for_each_solution`].
pub(crate) fn nicg_gauss_exact(dim: Dim, masks: &[u32]) -> bool {
    if masks.len() <= 1 {
        return true;
    }
    let x = VecSet::from_sorted_unchecked(dim, masks.to_vec());
    let m = MatrixView::from_set(&x);
    let b = sum_masks(dim, masks);
    let mut redundant = false;
    for_each_solution(&m, &b, |lambda| {
        if lambda.contains(&0) {
            redundant = true;
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    !redundant
}

/// NICG via removal: for every member `x`, `ΣX ∉ int_cone(X \ {x})`.
pub fn is_nicg_removal(x: &VecSet) -> bool {
    nicg_removal_masks(x.dim(), x.masks())
}

pub(crate) fn nicg_removal_masks(dim: Dim, masks: &[u32]) -> bool {
    let b = sum_masks(dim, masks);
    let mut rest = Vec::with_capacity(masks.len());
    for skip in 0..masks.len() {
        rest.clear();
        rest.extend(
            masks
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &m)| m),
        );
        if cone_certificate(&rest, &b).is_some() {
            return false;
        }
    }
    true
}

/// Copy of `m` with column `k` (1-based) replaced by zeros.
pub fn zero_column_variant(m: &MatrixView, k: usize) -> Result<MatrixView> {
    if k == 0 || k > m.cols {
        return Err(NicgError::InvalidInput(format!(
            "column index {k} outside 1..={}",
            m.cols
        )));
    }
    let mut out = m.clone();
    for i in 0..m.rows {
        out.set(i, k - 1, 0);
    }
    Ok(out)
}

/// NICG through the zero-column systems: true iff no `M^k λ = ΣX` is solvable.
pub fn is_nicg_zero_columns(x: &VecSet) -> bool {
    let m = MatrixView::from_set(x);
    let b = x.sum();
    (1..=x.len()).all(|k| {
        let mk = zero_column_variant(&m, k).expect("index in range");
        nonneg_integer_solutions(&mk, &b, 1).is_empty()
    })
}
