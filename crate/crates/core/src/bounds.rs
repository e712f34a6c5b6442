//! Upper and lower bounds on `N(d)` and the per-dimension results table.
//!
//! Every inequality is decided with exact big integers.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{NicgError, Result};
use crate::model::{Dim, VecSet};
use crate::search::{self, Restriction, SearchConfig, SearchStats};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundVariant {
    /// `floor(2d · log2(4d))`, the integer-cone Carathéodory bound with unit entries.
    Eisenbrand,
    /// `floor(2d · log2 d)`, valid for nonnegative vectors (`d >= 2`).
    TwoDLog,
    /// Largest `N` with `2^N <= (N + 1)^d`.
    VennCount,
    /// Largest `N` with `2^N <= N^d`; some row of a solution holds a zero (`d >= 2`).
    ZeroRow,
    /// Largest `N` with `2^N <= N^(d-1) · (N - 1)`; some row holds two zeros (`d >= 5`).
    TwoZeros,
}

impl BoundVariant {
    pub const ALL: [BoundVariant; 5] = [
        BoundVariant::Eisenbrand,
        BoundVariant::TwoDLog,
        BoundVariant::VennCount,
        BoundVariant::ZeroRow,
        BoundVariant::TwoZeros,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundVariant::Eisenbrand => "eisenbrand",
            BoundVariant::TwoDLog => "two-d-log",
            BoundVariant::VennCount => "venn-count",
            BoundVariant::ZeroRow => "zero-row",
            BoundVariant::TwoZeros => "two-zeros",
        }
    }

    pub fn min_dim(self) -> usize {
        match self {
            BoundVariant::Eisenbrand | BoundVariant::VennCount => 1,
            BoundVariant::TwoDLog | BoundVariant::ZeroRow => 2,
            BoundVariant::TwoZeros => 5,
        }
    }
}

impl fmt::Display for BoundVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundVariant {
    type Err = NicgError;

    fn from_str(s: &str) -> Result<Self> {
        BoundVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| NicgError::InvalidInput(format!("unknown bound variant {s:?}")))
    }
}

fn pow(base: u64, exp: usize) -> BigUint {
    BigUint::from(base).pow(exp as u32)
}

fn two_pow(n: usize) -> BigUint {
    BigUint::from(1u32) << n
}

/// Largest integer `N` with `2^N <= value`.
fn floor_log2(value: &BigUint) -> usize {
    value.bits() as usize - 1
}

/// Scans `N = d, d+1, ...` and returns the first failing `N` minus one.
fn scan(d: usize, holds: impl Fn(usize) -> bool) -> usize {
    let mut n = d;
    while holds(n) {
        n += 1;
    }
    n - 1
}

pub fn analytic_upper(dim: Dim, variant: BoundVariant) -> Result<usize> {
    let d = dim.get();
    if d < variant.min_dim() {
        return Err(NicgError::Unsupported(format!(
            "{variant} bound needs d >= {}, got {d}",
            variant.min_dim()
        )));
    }
    Ok(match variant {
        BoundVariant::Eisenbrand => floor_log2(&pow(4 * d as u64, 2 * d)),
        BoundVariant::TwoDLog => floor_log2(&pow(d as u64, 2 * d)),
        BoundVariant::VennCount => scan(d, |n| two_pow(n) <= pow(n as u64 + 1, d)),
        BoundVariant::ZeroRow => scan(d, |n| two_pow(n) <= pow(n as u64, d)),
        BoundVariant::TwoZeros => scan(d, |n| {
            two_pow(n) <= pow(n as u64, d - 1) * BigUint::from(n as u64 - 1)
        }),
    })
}

/// Minimum over every variant applicable at `d`, with the variant that attains it.
pub fn best_analytic_upper(dim: Dim) -> (usize, BoundVariant) {
    BoundVariant::ALL
        .into_iter()
        .filter_map(|v| analytic_upper(dim, v).ok().map(|b| (b, v)))
        .min()
        .expect("venn-count applies to every dimension")
}

/// Lower bounds for `1..=dmax` from known values, using `d <= N(d)` and `N(d) + 1 <= N(d+1)`.
pub fn chain_lower(known: &BTreeMap<usize, usize>, dmax: usize) -> BTreeMap<usize, usize> {
    let mut out = BTreeMap::new();
    let mut prev: Option<usize> = None;
    for d in 1..=dmax {
        let mut lower = d;
        if let Some(&k) = known.get(&d) {
            lower = lower.max(k);
        }
        if let Some(p) = prev {
            lower = lower.max(p + 1);
        }
        out.insert(d, lower);
        prev = Some(lower);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionResult {
    pub restricted_max: usize,
    pub upper: usize,
    pub witness: Option<VecSet>,
    pub stats: SearchStats,
}

/// `N(d) <= n_prev + m`, where `m` is the largest NICG set whose vectors all have
/// component 1 equal to 1 and `n_prev >= N(d-1)` bounds the part with component 1 zero.
pub fn decomposition_upper(cfg: &SearchConfig, n_prev: usize) -> Result<DecompositionResult> {
    let restricted = cfg.clone().with_restriction(Restriction {
        component: 1,
        bit: 1,
    });
    let out = search::solve_max(&restricted)?;
    if !out.exact {
        return Err(NicgError::BudgetExhausted {
            nodes: out.stats.nodes_visited,
        });
    }
    Ok(DecompositionResult {
        restricted_max: out.best_cardinality,
        upper: n_prev + out.best_cardinality,
        witness: out.witnesses.into_iter().next(),
        stats: out.stats,
    })
}

/// Evidence fed into [`bounds_table`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsInputs {
    /// `N(d)` proven by exhaustive search.
    pub exact: BTreeMap<usize, usize>,
    /// Sizes of verified NICG witnesses.
    pub witness_lower: BTreeMap<usize, usize>,
    /// Upper bounds from the decomposition argument.
    pub decomposition_upper: BTreeMap<usize, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub d: usize,
    pub lower: usize,
    pub upper: usize,
    pub lower_source: String,
    pub upper_source: String,
    pub exact: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub rows: Vec<BoundsRow>,
}

impl BoundsReport {
    pub fn row(&self, d: usize) -> Option<&BoundsRow> {
        self.rows.iter().find(|r| r.d == d)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("d,lower,upper,lower_source,upper_source,exact\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.d, r.lower, r.upper, r.lower_source, r.upper_source, r.exact
            ));
        }
        out
    }
}

pub fn bounds_table(dmax: usize, inputs: &BoundsInputs) -> Result<BoundsReport> {
    Dim::new(dmax)?;
    let mut rows = Vec::with_capacity(dmax);
    let mut prev_lower: Option<usize> = None;
    for d in 1..=dmax {
        let dim = Dim::new(d)?;
        let mut candidates: Vec<(usize, &str)> = vec![(d, "trivial")];
        if let Some(p) = prev_lower {
            candidates.push((p + 1, "chain"));
        }
        if let Some(&w) = inputs.witness_lower.get(&d) {
            candidates.push((w, "witness"));
        }
        if let Some(&e) = inputs.exact.get(&d) {
            candidates.push((e, "exact-search"));
        }
        // ties go to the strongest kind of evidence, listed last
        let (lower, lower_source) = candidates
            .iter()
            .rev()
            .max_by_key(|(v, _)| *v)
            .copied()
            .expect("nonempty");

        let (mut upper, variant) = best_analytic_upper(dim);
        let mut upper_source = variant.name();
        if let Some(&u) = inputs.decomposition_upper.get(&d) {
            if u < upper {
                upper = u;
                upper_source = "decomposition";
            }
        }
        if let Some(&e) = inputs.exact.get(&d) {
            upper = e;
            upper_source = "exact-search";
        }
        if lower > upper {
            return Err(NicgError::InvalidInput(format!(
                "inconsistent evidence at d = {d}: lower {lower} ({lower_source}) exceeds upper {upper} ({upper_source})"
            )));
        }
        rows.push(BoundsRow {
            d,
            lower,
            upper,
            lower_source: lower_source.to_string(),
            upper_source: upper_source.to_string(),
            exact: lower == upper,
        });
        prev_lower = Some(lower);
    }
    Ok(BoundsReport { rows })
}
