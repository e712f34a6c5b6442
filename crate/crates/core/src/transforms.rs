//! NICG-preserving row operations on the `d x |X|` matrix of a vector set.
//!
//! Adding a row to another row it shares no column with, or subtracting a
//! row whose support is contained in the other's, maps NICG sets to NICG sets
//! and non-NICG sets to non-NICG sets. Transforms return new matrices.

use crate::error::{NicgError, Result};
use crate::nicg::MatrixView;

fn check_rows(m: &MatrixView, i1: usize, i2: usize) -> Result<()> {
    for i in [i1, i2] {
        if i == 0 || i > m.rows() {
            return Err(NicgError::InvalidInput(format!(
                "row index {i} outside 1..={}",
                m.rows()
            )));
        }
    }
    if i1 == i2 {
        return Err(NicgError::InvalidInput(format!(
            "row transforms need two distinct rows, got {i1} twice"
        )));
    }
    if !m.is_binary() {
        return Err(NicgError::InvalidInput(
            "row transforms expect a 0/1 matrix".into(),
        ));
    }
    Ok(())
}

/// True iff some column has a 1 in both rows (1-based indices).
pub fn rows_share_variable(m: &MatrixView, i1: usize, i2: usize) -> Result<bool> {
    check_rows(m, i1, i2)?;
    Ok(m
        .row(i1 - 1)
        .iter()
        .zip(m.row(i2 - 1))
        .any(|(&a, &b)| a == 1 && b == 1))
}

fn with_row(m: &MatrixView, target: usize, row: Vec<i64>) -> Result<MatrixView> {
    let mut rows = m.row_vecs();
    rows[target - 1] = row;
    let out = MatrixView::from_rows(&rows)?;
    assert_distinct_columns(&out)?;
    Ok(out)
}

fn assert_distinct_columns(m: &MatrixView) -> Result<()> {
    let mut cols: Vec<Vec<i64>> = (0..m.cols()).map(|j| m.column(j)).collect();
    if cols.iter().any(|c| c.iter().all(|&e| e == 0)) {
        return Err(NicgError::InvalidTransform(
            "transform produced a zero column".into(),
        ));
    }
    cols.sort();
    if cols.windows(2).any(|w| w[0] == w[1]) {
        return Err(NicgError::InvalidTransform(
            "transform collapsed two columns into one".into(),
        ));
    }
    Ok(())
}

/// Replaces row `i2` by `row i1 + row i2`; the rows must not share a variable.
pub fn row_sum_transform(m: &MatrixView, i1: usize, i2: usize) -> Result<MatrixView> {
    if rows_share_variable(m, i1, i2)? {
        return Err(NicgError::InvalidTransform(format!(
            "rows {i1} and {i2} share a variable"
        )));
    }
    let row = m
        .row(i1 - 1)
        .iter()
        .zip(m.row(i2 - 1))
        .map(|(a, b)| a + b)
        .collect();
    with_row(m, i2, row)
}

/// Whether every column with a 1 in row `i1` also has a 1 in row `i2`.
pub fn row_support_contained(m: &MatrixView, i1: usize, i2: usize) -> Result<bool> {
    check_rows(m, i1, i2)?;
    Ok(m
        .row(i1 - 1)
        .iter()
        .zip(m.row(i2 - 1))
        .all(|(&a, &b)| a == 0 || b == 1))
}

/// Replaces row `i2` by `row i2 − row i1`; requires support of `i1` inside support of `i2`.
pub fn row_subtract_transform(m: &MatrixView, i1: usize, i2: usize) -> Result<MatrixView> {
    if !row_support_contained(m, i1, i2)? {
        return Err(NicgError::InvalidTransform(format!(
            "row {i1} has a variable missing from row {i2}"
        )));
    }
    let row = m
        .row(i2 - 1)
        .iter()
        .zip(m.row(i1 - 1))
        .map(|(b, a)| b - a)
        .collect();
    with_row(m, i2, row)
}

/// Removes every all-ones row by subtracting another nonzero row from it, until each
/// row holds at least one zero. Column count and NICG status are unchanged.
pub fn normalize_all_ones_rows(m: &MatrixView) -> Result<MatrixView> {
    if m.cols() == 0 || m.rows() == 0 {
        return Err(NicgError::InvalidInput(
            "normalization needs a nonempty matrix".into(),
        ));
    }
    if !m.is_binary() {
        return Err(NicgError::InvalidInput(
            "normalization expects a 0/1 matrix".into(),
        ));
    }
    let mut cur = m.clone();
    while let Some(i2) = (0..cur.rows()).find(|&i| cur.row(i).iter().all(|&e| e == 1)) {
        // an all-ones row contains every other row; take the first one that is nonzero
        let i1 = (0..cur.rows())
            .find(|&i| i != i2 && cur.row(i).iter().any(|&e| e == 1))
            .ok_or_else(|| {
                NicgError::Unsupported(format!(
                    "row {} is all ones and no other row is nonzero; matrix is not normalizable",
                    i2 + 1
                ))
            })?;
        cur = row_subtract_transform(&cur, i1 + 1, i2 + 1)?;
    }
    Ok(cur)
}
