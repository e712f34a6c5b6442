//! Depth-first search over NICG subsets of `{0,1}^d \ {0}`.
//!
//! Every driver (exact maximum, binary search, existence at a size, full
//! enumeration, randomized restarts) runs the same traversal: at a node
//! holding an NICG set `X` and candidates `A` (ascending masks greater than
//! the last chosen one) pick `x ∈ A`, descend into `X ∪ {x}` when it is NICG,
//! then move on to the next candidate. Supersets of non-NICG sets are never
//! generated because every subset of an NICG set is NICG.
//!
//! Pruning modes:
//! * `weak` skips a candidate that is 1-order-preserving equivalent to an
//!   earlier candidate at the same node;
//! * `canonical` / `buckets` skip a state whose canonical key was already
//!   visited.
//!
//! Both keep the lexicographically least member of every isomorphism class
//! reachable, so maxima and the set of canonical maximum witnesses are the
//! same for every pruning mode.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NicgError, Result};
use crate::iso::{Canonicalizer, CanonicalKey, Insert, VisitedStore};
use crate::model::{Dim, VecSet};
use crate::nicg::{is_nicg_removal, NicgTest};

/// Name recorded in statistics for the generator behind randomized runs.
pub const PRNG_NAME: &str = "ChaCha8Rng";

/// Default capacity of the canonical visited store.
pub const DEFAULT_VISITED_CAPACITY: usize = 1 << 24;

/// Default checkpoint cadence in nodes.
pub const DEFAULT_CHECKPOINT_EVERY: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    #[default]
    IncrementalExact,
    BinarySearch,
    ExistsAtSize,
    Randomized,
    EnumerateAllMax,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prune {
    None,
    #[default]
    Weak,
    Canonical,
    /// Canonical keys bucketed by the `(X^(1), X^(2))` signature.
    Buckets,
}

impl Prune {
    fn weak(self) -> bool {
        matches!(self, Prune::Weak)
    }

    fn canonical(self) -> bool {
        matches!(self, Prune::Canonical | Prune::Buckets)
    }
}

/// Only vectors whose component `component` (1-based) equals `bit` are candidates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Restriction {
    pub component: usize,
    pub bit: u8,
}

impl Restriction {
    fn validate(self, dim: Dim) -> Result<()> {
        if self.component == 0 || self.component > dim.get() || self.bit > 1 {
            return Err(NicgError::InvalidInput(format!(
                "restriction component={} bit={} invalid for dimension {dim}",
                self.component, self.bit
            )));
        }
        Ok(())
    }

    fn admits(self, mask: u32) -> bool {
        (mask >> (self.component - 1) & 1) as u8 == self.bit
    }

    fn position(self) -> u32 {
        1 << (self.component - 1)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_nodes: Option<u64>,
    pub max_millis: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckpointSpec {
    pub path: PathBuf,
    pub every_nodes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub dim: Dim,
    pub mode: SearchMode,
    pub prune: Prune,
    pub nicg_test: NicgTest,
    pub restriction: Option<Restriction>,
    /// Target size for `exists-at-size`, or an early-stop size for randomized runs.
    pub target_size: Option<usize>,
    pub seed: u64,
    pub budget: Budget,
    /// Nodes per randomized restart.
    pub restart_nodes: u64,
    pub visited_capacity: usize,
    pub threads: usize,
    /// Largest dimension `enumerate-all-max` accepts.
    pub enumerate_max_dim: usize,
    #[serde(skip)]
    pub checkpoint: Option<CheckpointSpec>,
}

impl SearchConfig {
    pub fn new(dim: Dim) -> Self {
        SearchConfig {
            dim,
            mode: SearchMode::IncrementalExact,
            prune: Prune::Weak,
            nicg_test: NicgTest::Gauss,
            restriction: None,
            target_size: None,
            seed: 0,
            budget: Budget::default(),
            restart_nodes: 100_000,
            visited_capacity: DEFAULT_VISITED_CAPACITY,
            threads: 1,
            enumerate_max_dim: 6,
            checkpoint: None,
        }
    }

    pub fn with_mode(mut self, mode: SearchMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_prune(mut self, prune: Prune) -> Self {
        self.prune = prune;
        self
    }

    pub fn with_nicg_test(mut self, test: NicgTest) -> Self {
        self.nicg_test = test;
        self
    }

    pub fn with_restriction(mut self, r: Restriction) -> Self {
        self.restriction = Some(r);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    pub fn with_checkpoint(mut self, spec: CheckpointSpec) -> Self {
        self.checkpoint = Some(spec);
        self
    }

    fn validate(&self) -> Result<()> {
        if let Some(r) = self.restriction {
            r.validate(self.dim)?;
        }
        if self.mode == SearchMode::ExistsAtSize && self.target_size.is_none() {
            return Err(NicgError::InvalidInput(
                "exists-at-size needs a target size".into(),
            ));
        }
        Ok(())
    }

    /// Candidate vectors in ascending mask order.
    pub fn universe(&self) -> Vec<u32> {
        (1..=self.dim.full_mask())
            .filter(|&m| self.restriction.is_none_or(|r| r.admits(m)))
            .collect()
    }

    /// Positions every symmetry used by pruning must fix.
    pub fn pinned_positions(&self) -> u32 {
        self.restriction.map_or(0, Restriction::position)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes_visited: u64,
    pub nicg_tests: u64,
    pub pruned_weak: u64,
    pub pruned_canonical: u64,
    pub pruned_bound: u64,
    pub solutions_found: u64,
    pub restarts: u64,
    pub elapsed_ms: u64,
    pub prng_name: Option<String>,
    pub seed: Option<u64>,
}

impl SearchStats {
    fn absorb(&mut self, other: &SearchStats) {
        self.nodes_visited += other.nodes_visited;
        self.nicg_tests += other.nicg_tests;
        self.pruned_weak += other.pruned_weak;
        self.pruned_canonical += other.pruned_canonical;
        self.pruned_bound += other.pruned_bound;
        self.solutions_found += other.solutions_found;
        self.restarts += other.restarts;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOutcome {
    pub best_cardinality: usize,
    /// Witnesses of size `best_cardinality`, sorted.
    pub witnesses: Vec<VecSet>,
    /// True iff the whole space was exhausted under the configuration.
    pub exact: bool,
    pub stats: SearchStats,
}

impl SearchOutcome {
    /// Distinct canonical classes among the witnesses, sorted.
    pub fn canonical_witnesses(&self) -> Result<Vec<CanonicalKey>> {
        let mut keys = self
            .witnesses
            .iter()
            .map(crate::iso::canonical_form)
            .collect::<Result<Vec<_>>>()?;
        keys.sort();
        keys.dedup();
        Ok(keys)
    }
}

/// What the traversal is looking for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Goal {
    /// Maximum cardinality; `all_ties` keeps every set of the best size.
    Max { all_ties: bool },
    /// Stop at the first set of exactly this size.
    Exists(usize),
}

impl Goal {
    fn reachable(self, size: usize, best: usize) -> bool {
        match self {
            Goal::Max { all_ties: true } => size >= best,
            Goal::Max { all_ties: false } => size > best,
            Goal::Exists(k) => size >= k,
        }
    }

    fn depth_cap(self) -> usize {
        match self {
            Goal::Max { .. } => usize::MAX,
            Goal::Exists(k) => k,
        }
    }
}

/// Serializable traversal position: the chosen path and, for each frame on the
/// stack, the index of the next candidate to try.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frontier {
    pub path: Vec<u32>,
    pub next: Vec<usize>,
}

/// Traversal state persisted by checkpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EngineSnapshot {
    pub frontier: Frontier,
    pub best: usize,
    pub witnesses: Vec<Vec<u32>>,
    pub stats: SearchStats,
    pub visited: Vec<CanonicalKey>,
}

struct Frame {
    cands: Vec<u32>,
    next: usize,
    fixed: u32,
    /// `(popcount, mask & fixed)` of candidates already tried here.
    classes: Vec<(u32, u32)>,
    /// Row-major bitsets: bit `j` of row `i` is set when path + `cands[i]` + `cands[j]`
    /// is NICG. Empty when not computed.
    adj: Vec<u64>,
    words: usize,
    /// `bound[i]` caps how many of `cands[i..]` can still be added together.
    bound: Vec<u32>,
}

impl Frame {
    fn neighbours_after(&self, i: usize) -> Vec<u32> {
        let row = &self.adj[i * self.words..(i + 1) * self.words];
        ((i + 1)..self.cands.len())
            .filter(|&j| row[j / 64] >> (j % 64) & 1 == 1)
            .map(|j| self.cands[j])
            .collect()
    }
}

/// Greedy colouring in reverse order: each colour class is pairwise incompatible,
/// so a suffix holding `c` colours admits at most `c` further members.
fn suffix_colour_bound(adj: &[u64], words: usize, n: usize) -> Vec<u32> {
    let mut classes: Vec<Vec<u64>> = Vec::new();
    let mut bound = vec![0u32; n + 1];
    for j in (0..n).rev() {
        let row = &adj[j * words..(j + 1) * words];
        let slot = classes
            .iter()
            .position(|cl| cl.iter().zip(row).all(|(a, b)| a & b == 0));
        match slot {
            Some(c) => classes[c][j / 64] |= 1 << (j % 64),
            None => {
                let mut cl = vec![0u64; words];
                cl[j / 64] |= 1 << (j % 64);
                classes.push(cl);
            }
        }
        bound[j] = classes.len() as u32;
    }
    bound.truncate(n);
    bound
}

enum Stop {
    Exhausted,
    Found,
    Budget,
}

/// Shared best value for parallel runs.
type SharedBest = Arc<AtomicUsize>;

struct Engine<'a> {
    cfg: &'a SearchConfig,
    goal: Goal,
    canon: Option<Arc<Canonicalizer>>,
    store: Option<VisitedStore>,
    store_overflowed: bool,
    best: usize,
    shared_best: Option<SharedBest>,
    witnesses: Vec<Vec<u32>>,
    stats: SearchStats,
    rng: Option<ChaCha8Rng>,
    stack: Vec<Frame>,
    path: Vec<u32>,
    started: Instant,
    node_limit: Option<u64>,
    deadline: Option<Instant>,
    next_checkpoint: Option<u64>,
}

impl<'a> Engine<'a> {
    fn new(cfg: &'a SearchConfig, goal: Goal) -> Result<Self> {
        cfg.validate()?;
        let canon = if cfg.prune.canonical() {
            Some(Canonicalizer::shared(cfg.dim, cfg.pinned_positions())?)
        } else {
            None
        };
        let store = match cfg.prune {
            Prune::Canonical => Some(VisitedStore::flat(cfg.visited_capacity)),
            Prune::Buckets => Some(VisitedStore::bucketed(cfg.visited_capacity)),
            _ => None,
        };
        let started = Instant::now();
        Ok(Engine {
            cfg,
            goal,
            canon,
            store,
            store_overflowed: false,
            best: 0,
            shared_best: None,
            witnesses: Vec::new(),
            stats: SearchStats::default(),
            rng: None,
            stack: Vec::new(),
            path: Vec::new(),
            started,
            node_limit: cfg.budget.max_nodes,
            deadline: cfg
                .budget
                .max_millis
                .map(|ms| started + Duration::from_millis(ms)),
            next_checkpoint: cfg.checkpoint.as_ref().map(|c| c.every_nodes.max(1)),
        })
    }

    fn current_best(&self) -> usize {
        match &self.shared_best {
            Some(b) => b.load(Ordering::Relaxed).max(self.best),
            None => self.best,
        }
    }

    /// Seeds the stack with a root frame holding `prefix` and the candidates after it.
    fn start(&mut self, prefix: &[u32], cands: Vec<u32>) {
        self.path = prefix.to_vec();
        let cands = if prefix.is_empty() {
            cands
        } else {
            self.compatible(&cands)
        };
        let fixed = prefix
            .iter()
            .fold(self.cfg.pinned_positions(), |acc, &m| acc | m);
        self.stack.clear();
        let frame = self.make_frame(cands, fixed);
        self.stack.push(frame);
        self.enter_node();
    }

    fn enter_node(&mut self) {
        self.stats.nodes_visited += 1;
        let size = self.path.len();
        match self.goal {
            Goal::Max { all_ties } => {
                if size > self.best {
                    self.best = size;
                    self.witnesses.clear();
                    if let Some(b) = &self.shared_best {
                        b.fetch_max(size, Ordering::Relaxed);
                    }
                }
                if size == self.best && (all_ties || self.witnesses.is_empty()) {
                    self.witnesses.push(self.path.clone());
                    self.stats.solutions_found += 1;
                }
            }
            Goal::Exists(k) => {
                if size == k {
                    self.best = k;
                    self.witnesses.push(self.path.clone());
                    self.stats.solutions_found += 1;
                }
            }
        }
    }

    fn shuffle(&mut self, cands: &mut [u32]) {
        if let Some(rng) = self.rng.as_mut() {
            cands.shuffle(rng);
        }
    }

    fn out_of_budget(&self) -> bool {
        if self.node_limit.is_some_and(|n| self.stats.nodes_visited >= n) {
            return true;
        }
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn run(&mut self) -> Result<Stop> {
        let mut ticks = 0u32;
        if matches!(self.goal, Goal::Exists(k) if self.path.len() == k) {
            return Ok(Stop::Found);
        }
        loop {
            ticks = ticks.wrapping_add(1);
            if let Some(at) = self.next_checkpoint {
                if self.stats.nodes_visited >= at {
                    self.write_checkpoint()?;
                    let every = self.cfg.checkpoint.as_ref().map_or(1, |c| c.every_nodes.max(1));
                    self.next_checkpoint = Some(at + every);
                }
            }
            if (self.node_limit.is_some() || ticks % 1024 == 0) && self.out_of_budget() {
                if self.cfg.checkpoint.is_some() {
                    self.write_checkpoint()?;
                }
                return Ok(Stop::Budget);
            }
            let depth = self.path.len();
            let best = self.current_best();
            let Some(top) = self.stack.last_mut() else {
                return Ok(Stop::Exhausted);
            };
            if top.next >= top.cands.len() {
                self.stack.pop();
                if !self.stack.is_empty() {
                    self.path.pop();
                }
                continue;
            }
            let i = top.next;
            top.next += 1;
            let y = top.cands[i];
            if !self.goal.reachable(depth + top.bound[i] as usize, best) {
                top.next = top.cands.len();
                self.stats.pruned_bound += 1;
                continue;
            }
            if self.cfg.prune.weak() {
                let class = (y.count_ones(), y & top.fixed);
                if top.classes.contains(&class) {
                    self.stats.pruned_weak += 1;
                    continue;
                }
                top.classes.push(class);
            }
            let fixed = top.fixed | y;
            let (rest, rest_known) = if top.adj.is_empty() {
                (top.cands[i + 1..].to_vec(), false)
            } else {
                (top.neighbours_after(i), true)
            };

            // frames only hold candidates that keep the path NICG
            self.path.push(y);
            if let (Some(store), Some(canon)) = (self.store.as_mut(), self.canon.as_ref()) {
                if !self.store_overflowed {
                    match store.insert_if_absent(canon, &self.path) {
                        Insert::Seen => {
                            self.stats.pruned_canonical += 1;
                            self.path.pop();
                            continue;
                        }
                        Insert::Full => self.store_overflowed = true,
                        Insert::New => {}
                    }
                }
            }
            self.enter_node();
            if matches!(self.goal, Goal::Exists(k) if self.path.len() == k) {
                return Ok(Stop::Found);
            }
            let size = depth + 1;
            if size >= self.goal.depth_cap()
                || !self.goal.reachable(size + rest.len(), self.current_best())
            {
                self.path.pop();
                continue;
            }
            let mut child_cands = if rest_known {
                rest
            } else {
                self.compatible(&rest)
            };
            if child_cands.is_empty()
                || !self.goal.reachable(size + child_cands.len(), self.current_best())
            {
                self.stats.pruned_bound += u64::from(!child_cands.is_empty());
                self.path.pop();
                continue;
            }
            self.shuffle(&mut child_cands);
            let frame = self.make_frame(child_cands, fixed);
            if !self.goal.reachable(size + frame.bound[0] as usize, self.current_best()) {
                self.stats.pruned_bound += 1;
                self.path.pop();
                continue;
            }
            self.stack.push(frame);
        }
    }

    /// Frame for the current path. Pairwise compatibility is only worth computing
    /// when children of this frame may open frames of their own.
    fn make_frame(&mut self, cands: Vec<u32>, fixed: u32) -> Frame {
        let n = cands.len();
        let want_adj = self.rng.is_none() && self.path.len() + 2 < self.goal.depth_cap();
        if !want_adj {
            return Frame {
                bound: (0..n).map(|i| (n - i) as u32).collect(),
                cands,
                next: 0,
                fixed,
                classes: Vec::new(),
                adj: Vec::new(),
                words: 0,
            };
        }
        let words = n.div_ceil(64).max(1);
        let mut adj = vec![0u64; n * words];
        let mut buf = self.path.clone();
        for i in 0..n {
            buf.push(cands[i]);
            for j in i + 1..n {
                buf.push(cands[j]);
                self.stats.nicg_tests += 1;
                if self.cfg.nicg_test.check_masks(self.cfg.dim, &buf) {
                    adj[i * words + j / 64] |= 1 << (j % 64);
                    adj[j * words + i / 64] |= 1 << (i % 64);
                }
                buf.pop();
            }
            buf.pop();
        }
        Frame {
            bound: suffix_colour_bound(&adj, words, n),
            cands,
            next: 0,
            fixed,
            classes: Vec::new(),
            adj,
            words,
        }
    }

    /// Candidates `c` for which the current path plus `c` is NICG.
    fn compatible(&mut self, cands: &[u32]) -> Vec<u32> {
        let mut buf = self.path.clone();
        let mut out = Vec::with_capacity(cands.len());
        for &c in cands {
            buf.push(c);
            self.stats.nicg_tests += 1;
            if self.cfg.nicg_test.check_masks(self.cfg.dim, &buf) {
                out.push(c);
            }
            buf.pop();
        }
        out
    }

    fn snapshot(&self) -> EngineSnapshot {
        EngineSnapshot {
            frontier: Frontier {
                path: self.path.clone(),
                next: self.stack.iter().map(|f| f.next).collect(),
            },
            best: self.best,
            witnesses: self.witnesses.clone(),
            stats: self.stats_with_elapsed(),
            visited: self.store.as_ref().map(VisitedStore::keys).unwrap_or_default(),
        }
    }

    /// Rebuilds the stack from a snapshot taken by a run with the same configuration.
    fn restore(&mut self, snap: &EngineSnapshot, universe: &[u32]) -> Result<()> {
        let Frontier { path, next } = &snap.frontier;
        if next.len() != path.len() + 1 && !(next.is_empty() && path.is_empty()) {
            return Err(NicgError::InvalidInput(
                "checkpoint frontier is inconsistent".into(),
            ));
        }
        self.best = snap.best;
        self.witnesses = snap.witnesses.clone();
        if let (Some(store), Some(canon)) = (self.store.as_mut(), self.canon.as_ref()) {
            store.restore(canon, &snap.visited);
        }
        self.stack.clear();
        self.path.clear();
        if next.is_empty() {
            self.stats = snap.stats.clone();
            return Ok(());
        }
        let mut fixed = self.cfg.pinned_positions();
        let mut frame = self.make_frame(universe.to_vec(), fixed);
        for (depth, &n) in next.iter().enumerate() {
            if n > frame.cands.len() {
                return Err(NicgError::InvalidInput(
                    "checkpoint candidate index out of range".into(),
                ));
            }
            frame.next = n;
            if self.cfg.prune.weak() {
                for &c in &frame.cands[..n] {
                    let class = (c.count_ones(), c & fixed);
                    if !frame.classes.contains(&class) {
                        frame.classes.push(class);
                    }
                }
            }
            let child = path.get(depth).copied();
            let pos = child.and_then(|c| frame.cands.iter().position(|&m| m == c));
            let rest = pos.map(|p| {
                if frame.adj.is_empty() {
                    (frame.cands[p + 1..].to_vec(), false)
                } else {
                    (frame.neighbours_after(p), true)
                }
            });
            self.stack.push(frame);
            let Some(c) = child else {
                break;
            };
            let (rest, known) = rest.ok_or_else(|| {
                NicgError::InvalidInput("checkpoint path is not a traversal prefix".into())
            })?;
            fixed |= c;
            self.path.push(c);
            let cands = if known { rest } else { self.compatible(&rest) };
            frame = self.make_frame(cands, fixed);
        }
        // recomputing the frames is bookkeeping, not search work
        self.stats = snap.stats.clone();
        Ok(())
    }

    fn stats_with_elapsed(&self) -> SearchStats {
        let mut s = self.stats.clone();
        s.elapsed_ms += self.started.elapsed().as_millis() as u64;
        s
    }

    fn write_checkpoint(&self) -> Result<()> {
        let Some(spec) = &self.cfg.checkpoint else {
            return Ok(());
        };
        crate::io::save_checkpoint(&spec.path, self.cfg, &self.snapshot())
    }
}

fn to_sets(dim: Dim, witnesses: Vec<Vec<u32>>) -> Result<Vec<VecSet>> {
    let mut sets = witnesses
        .into_iter()
        .map(|w| VecSet::from_masks(dim, w))
        .collect::<Result<Vec<_>>>()?;
    sets.sort();
    sets.dedup();
    Ok(sets)
}

/// Independent re-check of every emitted witness with the removal procedure.
fn verify_witnesses(sets: &[VecSet]) -> Result<()> {
    for w in sets {
        if !is_nicg_removal(w) {
            return Err(NicgError::InvalidInput(format!(
                "internal error: emitted witness {:?} fails the removal check",
                w.to_strings()
            )));
        }
    }
    Ok(())
}

/// Runs one traversal, optionally resuming from a snapshot; honours `cfg.threads`.
fn traverse(
    cfg: &SearchConfig,
    goal: Goal,
    resume: Option<&EngineSnapshot>,
) -> Result<(SearchOutcome, bool)> {
    let universe = cfg.universe();
    if cfg.threads > 1 && resume.is_none() && cfg.checkpoint.is_none() {
        return traverse_parallel(cfg, goal, &universe);
    }
    let mut engine = Engine::new(cfg, goal)?;
    match resume {
        Some(snap) => engine.restore(snap, &universe)?,
        None => engine.start(&[], universe),
    }
    let stop = engine.run()?;
    let found = matches!(stop, Stop::Found);
    let exact = !matches!(stop, Stop::Budget);
    let stats = engine.stats_with_elapsed();
    let witnesses = to_sets(cfg.dim, std::mem::take(&mut engine.witnesses))?;
    verify_witnesses(&witnesses)?;
    Ok((
        SearchOutcome {
            best_cardinality: engine.best,
            witnesses,
            exact,
            stats,
        },
        found,
    ))
}

/// Fans out over the children of the root; each subtree gets its own visited store.
fn traverse_parallel(
    cfg: &SearchConfig,
    goal: Goal,
    universe: &[u32],
) -> Result<(SearchOutcome, bool)> {
    use rayon::prelude::*;

    let started = Instant::now();
    // decide the root-level branches sequentially so weak pruning stays identical
    let mut tasks = Vec::new();
    let mut classes: Vec<(u32, u32)> = Vec::new();
    let pinned = cfg.pinned_positions();
    let mut root_stats = SearchStats {
        nodes_visited: 1,
        ..SearchStats::default()
    };
    for (i, &y) in universe.iter().enumerate() {
        if !goal.reachable(1 + universe.len() - i - 1, 0) {
            root_stats.pruned_bound += 1;
            break;
        }
        if cfg.prune.weak() {
            let class = (y.count_ones(), y & pinned);
            if classes.contains(&class) {
                root_stats.pruned_weak += 1;
                continue;
            }
            classes.push(class);
        }
        tasks.push((y, universe[i + 1..].to_vec()));
    }
    if let Goal::Exists(0) = goal {
        return Ok((
            SearchOutcome {
                best_cardinality: 0,
                witnesses: vec![VecSet::empty(cfg.dim)],
                exact: true,
                stats: root_stats,
            },
            true,
        ));
    }
    let shared: SharedBest = Arc::new(AtomicUsize::new(0));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| NicgError::Unsupported(format!("thread pool: {e}")))?;
    let results: Vec<Result<(usize, Vec<Vec<u32>>, SearchStats, Stop)>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|(y, cands)| {
                let mut engine = Engine::new(cfg, goal)?;
                engine.shared_best = Some(Arc::clone(&shared));
                engine.start(&[*y], cands.clone());
                let stop = engine.run()?;
                Ok((engine.best, engine.witnesses, engine.stats, stop))
            })
            .collect()
    });
    let mut best = 0usize;
    let mut witnesses: Vec<Vec<u32>> = Vec::new();
    let mut stats = root_stats;
    let mut exact = true;
    let mut found = false;
    if matches!(goal, Goal::Max { .. }) {
        witnesses.push(Vec::new());
    }
    for r in results {
        let (b, w, s, stop) = r?;
        stats.absorb(&s);
        match stop {
            Stop::Budget => exact = false,
            Stop::Found => found = true,
            Stop::Exhausted => {}
        }
        if w.is_empty() {
            continue;
        }
        if b > best {
            best = b;
            witnesses.clear();
        }
        if b == best {
            witnesses.extend(w);
        }
    }
    if let Goal::Exists(_) = goal {
        witnesses.truncate(1);
    }
    if let Goal::Max { all_ties: false } = goal {
        witnesses.sort();
        witnesses.truncate(1);
    }
    stats.elapsed_ms = started.elapsed().as_millis() as u64;
    let witnesses = to_sets(cfg.dim, witnesses)?;
    verify_witnesses(&witnesses)?;
    Ok((
        SearchOutcome {
            best_cardinality: best,
            witnesses,
            exact,
            stats,
        },
        found,
    ))
}

/// Exhaustive maximum search; records every witness of the best size found.
pub fn solve_dfs(cfg: &SearchConfig) -> Result<SearchOutcome> {
    Ok(traverse(cfg, Goal::Max { all_ties: true }, None)?.0)
}

/// Exhaustive maximum search keeping one witness; cheaper than [`solve_dfs`].
pub fn solve_max(cfg: &SearchConfig) -> Result<SearchOutcome> {
    Ok(traverse(cfg, Goal::Max { all_ties: false }, None)?.0)
}

/// Continues a run from a checkpoint snapshot.
pub fn resume_dfs(cfg: &SearchConfig, snap: &EngineSnapshot) -> Result<SearchOutcome> {
    Ok(traverse(cfg, Goal::Max { all_ties: true }, Some(snap))?.0)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactResult {
    pub n: usize,
    pub witnesses: Vec<VecSet>,
    pub stats: SearchStats,
}

/// `N(d)`: the target size keeps growing while sets of that size exist; once the space
/// is exhausted the largest size reached is exact.
pub fn exact_n(cfg: &SearchConfig) -> Result<ExactResult> {
    let out = solve_dfs(cfg)?;
    if !out.exact {
        return Err(NicgError::BudgetExhausted {
            nodes: out.stats.nodes_visited,
        });
    }
    Ok(ExactResult {
        n: out.best_cardinality,
        witnesses: out.witnesses,
        stats: out.stats,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExistsResult {
    pub witness: Option<VecSet>,
    pub stats: SearchStats,
}

/// Looks for an NICG set of exactly `k` vectors (within the restriction, if any).
pub fn exists_nicg(cfg: &SearchConfig, k: usize) -> Result<ExistsResult> {
    if let Some(r) = cfg.restriction {
        r.validate(cfg.dim)?;
    }
    let cap = cfg.universe().len();
    if k > cap {
        return Err(NicgError::InvalidInput(format!(
            "size {k} exceeds the {cap} available candidate vectors"
        )));
    }
    let (out, found) = traverse(cfg, Goal::Exists(k), None)?;
    if found {
        return Ok(ExistsResult {
            witness: out.witnesses.into_iter().next(),
            stats: out.stats,
        });
    }
    if !out.exact {
        return Err(NicgError::BudgetExhausted {
            nodes: out.stats.nodes_visited,
        });
    }
    Ok(ExistsResult {
        witness: None,
        stats: out.stats,
    })
}

/// One probe of the binary search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Probe {
    pub size: usize,
    pub exists: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryResult {
    pub n: usize,
    pub probes: Vec<Probe>,
    pub witness: Option<VecSet>,
    pub stats: SearchStats,
}

/// Guess for the interval `[lo, hi]`; `lo` is already known to be attainable.
pub fn binary_guess(lo: usize, hi: usize) -> usize {
    ((lo + hi) / 2).max(lo + 1)
}

/// Binary search for `N(d)` on `[lo, hi]`, where `lo` is a proven lower bound and
/// `hi` a proven upper bound.
pub fn binary_search_n(cfg: &SearchConfig, lo: usize, hi: usize) -> Result<BinaryResult> {
    if lo > hi {
        return Err(NicgError::InvalidInput(format!(
            "empty interval [{lo}, {hi}]"
        )));
    }
    let (mut lo, mut hi) = (lo, hi.min(cfg.universe().len()));
    let mut probes = Vec::new();
    let mut witness = None;
    let mut stats = SearchStats::default();
    while lo < hi {
        let m = binary_guess(lo, hi);
        let r = exists_nicg(cfg, m)?;
        stats.absorb(&r.stats);
        stats.elapsed_ms += r.stats.elapsed_ms;
        let exists = r.witness.is_some();
        probes.push(Probe { size: m, exists });
        if exists {
            lo = m;
            witness = r.witness;
        } else {
            hi = m - 1;
        }
    }
    Ok(BinaryResult {
        n: lo,
        probes,
        witness,
        stats,
    })
}

/// Restarted DFS with shuffled candidate lists. Runs until the time or node budget
/// is spent or `cfg.target_size` is reached. Never exact.
pub fn randomized_search(cfg: &SearchConfig) -> Result<SearchOutcome> {
    cfg.validate()?;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let universe = cfg.universe();
    let deadline = cfg
        .budget
        .max_millis
        .map(|ms| started + Duration::from_millis(ms));
    if deadline.is_none() && cfg.budget.max_nodes.is_none() && cfg.target_size.is_none() {
        return Err(NicgError::InvalidInput(
            "randomized search needs a node budget, a time budget or a target size".into(),
        ));
    }
    let mut best: Vec<u32> = Vec::new();
    let mut stats = SearchStats {
        prng_name: Some(PRNG_NAME.to_string()),
        seed: Some(cfg.seed),
        ..SearchStats::default()
    };
    let mut inner_cfg = cfg.clone();
    inner_cfg.checkpoint = None;
    loop {
        if cfg.target_size.is_some_and(|t| best.len() >= t) {
            break;
        }
        if cfg.budget.max_nodes.is_some_and(|n| stats.nodes_visited >= n) {
            break;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            break;
        }
        let mut per_restart = cfg.restart_nodes.max(1);
        if let Some(n) = cfg.budget.max_nodes {
            per_restart = per_restart.min(n - stats.nodes_visited);
        }
        inner_cfg.budget = Budget {
            max_nodes: Some(per_restart),
            max_millis: deadline
                .map(|d| d.saturating_duration_since(Instant::now()).as_millis() as u64),
        };
        let mut engine = Engine::new(&inner_cfg, Goal::Max { all_ties: false })?;
        let mut cands = universe.clone();
        cands.shuffle(&mut rng);
        let child_seed: u64 = rand::Rng::gen(&mut rng);
        engine.rng = Some(ChaCha8Rng::seed_from_u64(child_seed));
        engine.best = best.len();
        engine.start(&[], cands);
        engine.run()?;
        stats.absorb(&engine.stats);
        stats.restarts += 1;
        if engine.best > best.len() {
            if let Some(w) = engine.witnesses.first() {
                best = w.clone();
            }
        }
    }
    stats.elapsed_ms = started.elapsed().as_millis() as u64;
    let witnesses = if best.is_empty() {
        Vec::new()
    } else {
        to_sets(cfg.dim, vec![best])?
    };
    verify_witnesses(&witnesses)?;
    Ok(SearchOutcome {
        best_cardinality: witnesses.first().map_or(0, VecSet::len),
        witnesses,
        exact: false,
        stats,
    })
}

/// All NICG sets of maximum cardinality, one canonical key per isomorphism class.
pub fn enumerate_all_max_solutions(cfg: &SearchConfig) -> Result<Vec<CanonicalKey>> {
    if cfg.dim.get() > cfg.enumerate_max_dim {
        return Err(NicgError::Unsupported(format!(
            "enumerating all maximum solutions is capped at d = {}",
            cfg.enumerate_max_dim
        )));
    }
    let out = solve_dfs(cfg)?;
    if !out.exact {
        return Err(NicgError::BudgetExhausted {
            nodes: out.stats.nodes_visited,
        });
    }
    let canon = Canonicalizer::shared(cfg.dim, cfg.pinned_positions())?;
    let mut keys: Vec<CanonicalKey> = out.witnesses.iter().map(|w| canon.key(w.masks())).collect();
    keys.sort();
    keys.dedup();
    Ok(keys)
}

/// Dispatches on `cfg.mode`. `binary-search` uses `[d, number of candidates]`.
pub fn run(cfg: &SearchConfig) -> Result<SearchOutcome> {
    match cfg.mode {
        SearchMode::IncrementalExact => solve_dfs(cfg),
        SearchMode::EnumerateAllMax => {
            let keys = enumerate_all_max_solutions(cfg)?;
            let witnesses = keys
                .iter()
                .map(|k| k.to_set(cfg.dim))
                .collect::<Result<Vec<_>>>()?;
            Ok(SearchOutcome {
                best_cardinality: witnesses.first().map_or(0, VecSet::len),
                witnesses,
                exact: true,
                stats: SearchStats::default(),
            })
        }
        SearchMode::ExistsAtSize => {
            let k = cfg.target_size.unwrap_or(0);
            let r = exists_nicg(cfg, k)?;
            Ok(SearchOutcome {
                best_cardinality: r.witness.as_ref().map_or(0, VecSet::len),
                witnesses: r.witness.into_iter().collect(),
                exact: true,
                stats: r.stats,
            })
        }
        SearchMode::BinarySearch => {
            let r = binary_search_n(cfg, cfg.dim.get().min(cfg.universe().len()), cfg.universe().len())?;
            Ok(SearchOutcome {
                best_cardinality: r.n,
                witnesses: r.witness.into_iter().collect(),
                exact: true,
                stats: r.stats,
            })
        }
        SearchMode::Randomized => randomized_search(cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(d: usize) -> SearchConfig {
        SearchConfig::new(Dim::new(d).unwrap())
    }

    #[test]
    fn small_dimensions_by_dfs() {
        for (d, n) in [(1, 1), (2, 2), (3, 3)] {
            let out = solve_dfs(&cfg(d).with_prune(Prune::None)).unwrap();
            assert_eq!(out.best_cardinality, n, "d={d}");
            assert!(out.exact);
        }
    }

    #[test]
    fn d1_single_witness() {
        let r = exact_n(&cfg(1)).unwrap();
        assert_eq!(r.n, 1);
        assert_eq!(r.witnesses.len(), 1);
        assert_eq!(r.witnesses[0].masks(), &[1]);
    }

    #[test]
    fn binary_guess_rule() {
        assert_eq!(binary_guess(6, 11), 8);
        assert_eq!(binary_guess(6, 7), 7);
    }

    #[test]
    fn collapsed_interval_needs_no_search() {
        let r = binary_search_n(&cfg(4), 5, 5).unwrap();
        assert_eq!(r.n, 5);
        assert!(r.probes.is_empty());
        assert_eq!(r.stats.nodes_visited, 0);
    }

    #[test]
    fn exists_needs_target_and_range() {
        let c = cfg(3).with_mode(SearchMode::ExistsAtSize);
        assert!(run(&c).is_err());
        assert!(exists_nicg(&cfg(2), 4).is_err());
    }

    #[test]
    fn node_budget_truncates() {
        let c = cfg(4).with_budget(Budget {
            max_nodes: Some(3),
            max_millis: None,
        });
        let out = solve_dfs(&c).unwrap();
        assert!(!out.exact);
        assert!(matches!(exact_n(&c), Err(NicgError::BudgetExhausted { .. })));
    }

    #[test]
    fn restriction_validation() {
        let c = cfg(3).with_restriction(Restriction {
            component: 4,
            bit: 1,
        });
        assert!(solve_dfs(&c).is_err());
        let c = cfg(3).with_restriction(Restriction {
            component: 1,
            bit: 1,
        });
        assert_eq!(c.universe(), vec![1, 3, 5, 7]);
    }

    #[test]
    fn enumerate_guard() {
        let mut c = cfg(4);
        c.enumerate_max_dim = 3;
        assert!(matches!(
            enumerate_all_max_solutions(&c),
            Err(NicgError::Unsupported(_))
        ));
        let one = enumerate_all_max_solutions(&cfg(1)).unwrap();
        assert_eq!(one, vec![CanonicalKey(vec![1])]);
    }
}
