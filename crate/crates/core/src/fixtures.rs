//! Reference data: one maximum NICG witness per dimension 1..=6 and the
//! Venn-region system of a three-set cardinality constraint.

use crate::model::VecSet;
use crate::nicg::MatrixView;

/// Published maximum sizes for `d = 1..=6`.
pub const KNOWN_N: [(usize, usize); 6] = [(1, 1), (2, 2), (3, 3), (4, 5), (5, 7), (6, 9)];

const W1: &[&[u8]] = &[&[1]];
const W2: &[&[u8]] = &[&[1, 1], &[0, 1]];
const W3: &[&[u8]] = &[&[1, 1, 1], &[1, 0, 1], &[0, 1, 1]];
const W4: &[&[u8]] = &[
    &[1, 1, 1, 1, 0],
    &[1, 1, 1, 0, 1],
    &[0, 1, 0, 1, 1],
    &[0, 0, 1, 1, 1],
];
const W5: &[&[u8]] = &[
    &[1, 1, 1, 1, 0, 0, 1],
    &[1, 1, 0, 0, 1, 1, 1],
    &[0, 1, 1, 1, 1, 0, 0],
    &[0, 0, 1, 0, 0, 1, 1],
    &[0, 0, 0, 1, 1, 1, 1],
];
const W6: &[&[u8]] = &[
    &[1, 1, 1, 1, 0, 0, 1, 1, 1],
    &[1, 1, 1, 0, 1, 1, 0, 1, 1],
    &[0, 1, 0, 1, 1, 0, 0, 0, 1],
    &[0, 0, 1, 1, 0, 1, 0, 1, 0],
    &[0, 0, 0, 0, 1, 0, 1, 1, 0],
    &[0, 0, 0, 0, 0, 1, 1, 0, 1],
];

/// Matrix rows of the witness for dimension `d` (columns are the vectors).
pub fn witness_rows(d: usize) -> Option<&'static [&'static [u8]]> {
    Some(match d {
        1 => W1,
        2 => W2,
        3 => W3,
        4 => W4,
        5 => W5,
        6 => W6,
        _ => return None,
    })
}

pub fn witness(d: usize) -> Option<VecSet> {
    witness_rows(d).map(|rows| VecSet::from_matrix_rows(rows).expect("fixture is well formed"))
}

/// Columns are the eight Venn regions of three sets inside a universe `U`; rows encode
/// `|U|`, the three pairwise unions and the three sets.
pub fn venn_system() -> (MatrixView, Vec<i64>) {
    let rows: Vec<Vec<i64>> = vec![
        vec![1, 1, 1, 1, 1, 1, 1, 1],
        vec![0, 0, 1, 1, 1, 1, 1, 1],
        vec![0, 1, 0, 1, 1, 1, 1, 1],
        vec![0, 1, 1, 1, 0, 1, 1, 1],
        vec![0, 0, 0, 0, 1, 1, 1, 1],
        vec![0, 0, 1, 1, 0, 0, 1, 1],
        vec![0, 1, 0, 1, 0, 1, 0, 1],
    ];
    (
        MatrixView::from_rows(&rows).expect("rectangular"),
        vec![100, 30, 30, 30, 20, 20, 20],
    )
}
