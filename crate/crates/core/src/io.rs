//! JSON witness files and search checkpoints.
//!
//! A witness file is a single solution object, an array of them, or any
//! document carrying a `witnesses` array of them (the shape every command
//! emits). Vector strings list component 1 first.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{NicgError, Result};
use crate::iso::CanonicalKey;
use crate::model::{BitVec, Dim, VecSet};
use crate::search::{EngineSnapshot, Frontier, SearchConfig, SearchStats};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const CHECKPOINT_FORMAT: &str = "nicg-checkpoint/1";

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionMeta {
    pub tool_version: String,
    pub seed: Option<u64>,
    pub prng_name: Option<String>,
    pub elapsed_ms: u64,
}

impl SolutionMeta {
    pub fn new(stats: &SearchStats) -> Self {
        SolutionMeta {
            tool_version: TOOL_VERSION.to_string(),
            seed: stats.seed,
            prng_name: stats.prng_name.clone(),
            elapsed_ms: stats.elapsed_ms,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub dim: usize,
    pub cardinality: usize,
    pub vectors: Vec<String>,
    pub sum: Vec<i64>,
    pub meta: SolutionMeta,
}

impl SolutionFile {
    pub fn from_set(x: &VecSet, meta: SolutionMeta) -> Self {
        SolutionFile {
            dim: x.dim().get(),
            cardinality: x.len(),
            vectors: x.to_strings(),
            sum: x.sum().counts().to_vec(),
            meta,
        }
    }

    /// Parses and checks the vectors, the cardinality and the recorded sum.
    pub fn to_set(&self) -> std::result::Result<VecSet, String> {
        let dim = Dim::new(self.dim).map_err(|e| format!("dim: {e}"))?;
        let mut vecs = Vec::with_capacity(self.vectors.len());
        for (i, s) in self.vectors.iter().enumerate() {
            if s.chars().count() != self.dim {
                return Err(format!(
                    "vectors[{i}]: {s:?} has length {}, expected {}",
                    s.chars().count(),
                    self.dim
                ));
            }
            let v = BitVec::parse(dim, s).map_err(|e| format!("vectors[{i}]: {e}"))?;
            vecs.push(v);
        }
        let set = VecSet::from_vecs(dim, vecs).map_err(|e| format!("vectors: {e}"))?;
        if set.len() != self.cardinality {
            return Err(format!(
                "cardinality: recorded {}, found {} vectors",
                self.cardinality,
                set.len()
            ));
        }
        if set.sum().counts() != self.sum.as_slice() {
            return Err(format!(
                "sum: recorded {:?}, recomputed {:?}",
                self.sum,
                set.sum().counts()
            ));
        }
        Ok(set)
    }
}

fn format_err(path: &Path, message: impl Into<String>) -> NicgError {
    NicgError::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|source| NicgError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| {
        format_err(
            path,
            format!("line {} column {}: {e}", e.line(), e.column()),
        )
    })
}

/// Extracts the solution objects of any accepted document shape, with their field paths.
fn solution_values(doc: &Value) -> std::result::Result<Vec<(String, &Value)>, String> {
    match doc {
        Value::Array(items) => Ok(items
            .iter()
            .enumerate()
            .map(|(i, v)| (format!("[{i}]"), v))
            .collect()),
        Value::Object(map) if map.contains_key("vectors") => Ok(vec![(String::new(), doc)]),
        Value::Object(map) => match map.get("witnesses") {
            Some(Value::Array(items)) => Ok(items
                .iter()
                .enumerate()
                .map(|(i, v)| (format!("witnesses[{i}]"), v))
                .collect()),
            Some(_) => Err("witnesses: expected an array".into()),
            None => Err("expected a solution object, an array, or a `witnesses` array".into()),
        },
        _ => Err("expected a JSON object or array".into()),
    }
}

pub fn parse_solutions(doc: &Value) -> std::result::Result<Vec<VecSet>, String> {
    solution_values(doc)?
        .into_iter()
        .map(|(at, v)| {
            let prefix = if at.is_empty() { String::new() } else { format!("{at}.") };
            let file: SolutionFile = serde_json::from_value(v.clone())
                .map_err(|e| format!("{}: {e}", if at.is_empty() { "solution" } else { &at }))?;
            file.to_set().map_err(|e| format!("{prefix}{e}"))
        })
        .collect()
}

pub fn load_solution_file(path: &Path) -> Result<Vec<VecSet>> {
    let doc = read_json(path)?;
    parse_solutions(&doc).map_err(|m| format_err(path, m))
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let io_err = |source| NicgError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp: PathBuf = path.to_path_buf();
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    tmp.set_file_name(format!(".{name}.tmp-{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).map_err(io_err)?;
        f.write_all(contents).map_err(io_err)?;
        f.sync_all().map_err(io_err)?;
    }
    fs::rename(&tmp, path).map_err(io_err)
}

pub fn save_solution_file(path: &Path, sets: &[VecSet], meta: &SolutionMeta) -> Result<()> {
    let files: Vec<SolutionFile> = sets
        .iter()
        .map(|s| SolutionFile::from_set(s, meta.clone()))
        .collect();
    let mut text = serde_json::to_string_pretty(&files).expect("serializable");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrontierEntry {
    pub prefix: Vec<String>,
    pub next: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestSoFar {
    pub cardinality: usize,
    pub witnesses: Vec<SolutionFile>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckpointFile {
    pub format: String,
    pub config: SearchConfig,
    pub seed: u64,
    pub best_so_far: BestSoFar,
    pub frontier: Vec<FrontierEntry>,
    pub nodes_visited: u64,
    pub stats: SearchStats,
    /// Canonical keys already visited (canonical pruning modes only).
    pub visited: Vec<Vec<u32>>,
}

impl CheckpointFile {
    pub fn new(cfg: &SearchConfig, snap: &EngineSnapshot) -> Self {
        let dim = cfg.dim;
        let meta = SolutionMeta::new(&snap.stats);
        let witnesses = snap
            .witnesses
            .iter()
            .map(|w| {
                let set = VecSet::from_masks(dim, w.iter().copied()).expect("valid witness");
                SolutionFile::from_set(&set, meta.clone())
            })
            .collect();
        let path = &snap.frontier.path;
        let frontier = snap
            .frontier
            .next
            .iter()
            .enumerate()
            .map(|(depth, &next)| FrontierEntry {
                prefix: path[..depth]
                    .iter()
                    .map(|&m| crate::model::mask_to_string(dim, m))
                    .collect(),
                next,
            })
            .collect();
        CheckpointFile {
            format: CHECKPOINT_FORMAT.to_string(),
            config: cfg.clone(),
            seed: cfg.seed,
            best_so_far: BestSoFar {
                cardinality: snap.best,
                witnesses,
            },
            frontier,
            nodes_visited: snap.stats.nodes_visited,
            stats: snap.stats.clone(),
            visited: snap.visited.iter().map(|k| k.0.clone()).collect(),
        }
    }

    pub fn snapshot(&self) -> std::result::Result<EngineSnapshot, String> {
        if self.format != CHECKPOINT_FORMAT {
            return Err(format!("format: expected {CHECKPOINT_FORMAT:?}"));
        }
        let dim = self.config.dim;
        let parse = |s: &String, at: &str| -> std::result::Result<u32, String> {
            BitVec::parse(dim, s)
                .map(BitVec::mask)
                .map_err(|e| format!("{at}: {e}"))
        };
        let mut witnesses = Vec::new();
        for (i, w) in self.best_so_far.witnesses.iter().enumerate() {
            let set = w
                .to_set()
                .map_err(|e| format!("best_so_far.witnesses[{i}].{e}"))?;
            witnesses.push(set.masks().to_vec());
        }
        let mut next = Vec::with_capacity(self.frontier.len());
        let mut path: Vec<u32> = Vec::new();
        for (depth, entry) in self.frontier.iter().enumerate() {
            if entry.prefix.len() != depth {
                return Err(format!("frontier[{depth}].prefix: expected {depth} vectors"));
            }
            let prefix = entry
                .prefix
                .iter()
                .map(|s| parse(s, &format!("frontier[{depth}].prefix")))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            if depth > 0 && prefix[..depth - 1] != path[..] {
                return Err(format!("frontier[{depth}].prefix: does not extend the previous frame"));
            }
            if depth > 0 {
                path.push(prefix[depth - 1]);
            }
            next.push(entry.next);
        }
        if self.stats.nodes_visited != self.nodes_visited {
            return Err("nodes_visited: disagrees with stats".into());
        }
        Ok(EngineSnapshot {
            frontier: Frontier { path, next },
            best: self.best_so_far.cardinality,
            witnesses,
            stats: self.stats.clone(),
            visited: self.visited.iter().cloned().map(CanonicalKey).collect(),
        })
    }
}

pub fn save_checkpoint(path: &Path, cfg: &SearchConfig, snap: &EngineSnapshot) -> Result<()> {
    let file = CheckpointFile::new(cfg, snap);
    let text = serde_json::to_string(&file).expect("serializable");
    write_atomic(path, text.as_bytes())
}

pub fn load_checkpoint(path: &Path) -> Result<(SearchConfig, EngineSnapshot)> {
    let doc = read_json(path)?;
    let file: CheckpointFile =
        serde_json::from_value(doc).map_err(|e| format_err(path, e.to_string()))?;
    let snap = file.snapshot().map_err(|m| format_err(path, m))?;
    Ok((file.config, snap))
}
