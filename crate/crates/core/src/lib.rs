//! Exact search, bounds and verification for non-redundant integer cone
//! generators (NICG) over `{0,1}^d`.
//!
//! A set `X` of nonzero 0/1 vectors is NICG when its sum `ΣX` is not a
//! nonnegative integer combination of any proper subset of `X`. `N(d)` is
//! the largest size of an NICG set in dimension `d`.

pub mod bounds;
pub mod cone;
mod elim;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod iso;
pub mod model;
pub mod nicg;
pub mod search;
pub mod transforms;

pub use cone::{in_int_cone, CoeffVec};
pub use error::{NicgError, Result};
pub use iso::{canonical_form, signature_key, CanonicalKey, FixedPerms};
pub use model::{enumeration_budget, sum_set, BitVec, Dim, Permutation, SumVec, VecSet};
pub use nicg::{is_nicg_gauss, is_nicg_removal, MatrixView, NicgTest};
pub use search::{Prune, SearchConfig, SearchMode, SearchOutcome, SearchStats};
