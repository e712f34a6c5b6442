use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use nicg_core::bounds::{
    analytic_upper, bounds_table, decomposition_upper, BoundVariant, BoundsInputs,
};
use nicg_core::io::{
    load_checkpoint, load_solution_file, parse_solutions, write_atomic, SolutionFile,
    SolutionMeta,
};
use nicg_core::iso::canonical_form;
use nicg_core::search::{
    binary_search_n, exists_nicg, randomized_search, resume_dfs, solve_dfs, Budget,
    CheckpointSpec, Restriction, SearchStats, DEFAULT_CHECKPOINT_EVERY,
};
use nicg_core::{
    is_nicg_removal, sum_set, Dim, NicgError, NicgTest, Prune, SearchConfig, SearchMode, VecSet,
};

const EXIT_NEGATIVE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "nicg-lab", version, about = "Search, bound and verify NICG sets of 0/1 vectors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Incremental,
    Binary,
}

#[derive(Clone, Copy, ValueEnum)]
enum PruneArg {
    None,
    Weak,
    Canonical,
    Buckets,
}

impl From<PruneArg> for Prune {
    fn from(p: PruneArg) -> Self {
        match p {
            PruneArg::None => Prune::None,
            PruneArg::Weak => Prune::Weak,
            PruneArg::Canonical => Prune::Canonical,
            PruneArg::Buckets => Prune::Buckets,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum NicgArg {
    Gauss,
    Removal,
}

impl From<NicgArg> for NicgTest {
    fn from(n: NicgArg) -> Self {
        match n {
            NicgArg::Gauss => NicgTest::Gauss,
            NicgArg::Removal => NicgTest::Removal,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Inequality,
    Decomposition,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(clap::Args)]
struct SearchArgs {
    #[arg(long, value_enum, default_value = "weak")]
    prune: PruneArg,
    #[arg(long, value_enum, default_value = "gauss")]
    nicg: NicgArg,
    /// Worker threads; defaults to NICG_LAB_THREADS or 1.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    budget_secs: Option<u64>,
    #[arg(long)]
    max_nodes: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact maximum size of an NICG set in dimension D.
    Exact {
        #[arg(long)]
        dim: usize,
        #[arg(long, value_enum, default_value = "incremental")]
        strategy: Strategy,
        /// Binary search interval; defaults to [D, best analytic bound].
        #[arg(long)]
        lo: Option<usize>,
        #[arg(long)]
        hi: Option<usize>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, requires = "checkpoint")]
        every: Option<u64>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Does an NICG set of exactly K vectors exist?
    Exists {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        size: usize,
        /// Fixed component, e.g. `comp=1,bit=1`.
        #[arg(long)]
        restrict: Option<String>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Randomized search for large witnesses.
    Lower {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        budget_secs: u64,
        #[arg(long)]
        restart_nodes: Option<u64>,
        /// Stop once a witness of this size is found.
        #[arg(long)]
        target: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Upper bound on N(D).
    Upper {
        #[arg(long)]
        dim: usize,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long)]
        variant: Option<String>,
        /// Known upper bound on N(D-1), for the decomposition method.
        #[arg(long)]
        prev: Option<usize>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Lower/upper bound table for d = 1..D.
    Table {
        #[arg(long)]
        max_dim: usize,
        #[arg(long)]
        inputs: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check every witness in a file.
    Verify {
        #[arg(long)]
        input: PathBuf,
    },
    /// Canonical keys of the witnesses in a file.
    Canon {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure carrying its exit code.
struct Fail {
    code: u8,
    message: String,
}

impl From<NicgError> for Fail {
    fn from(e: NicgError) -> Self {
        let code = match e {
            NicgError::BudgetExhausted { .. } => EXIT_BUDGET,
            _ => EXIT_INVALID,
        };
        Fail {
            code,
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Fail {
    Fail {
        code: EXIT_INVALID,
        message: message.into(),
    }
}

type CmdResult = Result<u8, Fail>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INVALID } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cmd: Command) -> CmdResult {
    match cmd {
        Command::Exact {
            dim,
            strategy,
            lo,
            hi,
            checkpoint,
            every,
            search,
        } => cmd_exact(dim, strategy, lo, hi, checkpoint, every, &search),
        Command::Exists {
            dim,
            size,
            restrict,
            search,
        } => cmd_exists(dim, size, restrict.as_deref(), &search),
        Command::Lower {
            dim,
            seed,
            budget_secs,
            restart_nodes,
            target,
            out,
        } => cmd_lower(dim, seed, budget_secs, restart_nodes, target, out.as_deref()),
        Command::Upper {
            dim,
            method,
            variant,
            prev,
            search,
        } => cmd_upper(dim, method, variant.as_deref(), prev, &search),
        Command::Table {
            max_dim,
            inputs,
            format,
            out,
        } => cmd_table(max_dim, inputs.as_deref(), format, out.as_deref()),
        Command::Verify { input } => cmd_verify(&input),
        Command::Canon { input, out } => cmd_canon(&input, out.as_deref()),
    }
}

fn dim_arg(d: usize) -> Result<Dim, Fail> {
    Ok(Dim::new(d)?)
}

fn threads(arg: Option<usize>) -> Result<usize, Fail> {
    if let Some(t) = arg {
        return Ok(t.max(1));
    }
    match std::env::var("NICG_LAB_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(|t| t.max(1))
            .map_err(|_| invalid(format!("NICG_LAB_THREADS: not a thread count: {v:?}"))),
        Err(_) => Ok(1),
    }
}

fn base_config(dim: Dim, args: &SearchArgs) -> Result<SearchConfig, Fail> {
    Ok(SearchConfig::new(dim)
        .with_prune(args.prune.into())
        .with_nicg_test(args.nicg.into())
        .with_threads(threads(args.threads)?)
        .with_budget(Budget {
            max_nodes: args.max_nodes,
            max_millis: args.budget_secs.map(|s| s.saturating_mul(1000)),
        }))
}

fn witnesses_json(sets: &[VecSet], stats: &SearchStats) -> Value {
    let meta = SolutionMeta::new(stats);
    let files: Vec<SolutionFile> = sets
        .iter()
        .map(|s| SolutionFile::from_set(s, meta.clone()))
        .collect();
    serde_json::to_value(files).expect("serializable")
}

fn emit(doc: &Value, out: Option<&Path>) -> Result<(), Fail> {
    let mut text = serde_json::to_string_pretty(doc).expect("serializable");
    text.push('\n');
    emit_text(&text, out)
}

fn emit_text(text: &str, out: Option<&Path>) -> Result<(), Fail> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_exact(
    d: usize,
    strategy: Strategy,
    lo: Option<usize>,
    hi: Option<usize>,
    checkpoint: Option<PathBuf>,
    every: Option<u64>,
    args: &SearchArgs,
) -> CmdResult {
    let dim = dim_arg(d)?;
    let mut cfg = base_config(dim, args)?;
    match strategy {
        Strategy::Incremental => {
            cfg = cfg.with_mode(SearchMode::IncrementalExact);
            let outcome = match checkpoint {
                Some(path) => {
                    cfg = cfg.with_checkpoint(CheckpointSpec {
                        path: path.clone(),
                        every_nodes: every.unwrap_or(DEFAULT_CHECKPOINT_EVERY),
                    });
                    if path.exists() {
                        let (saved, snap) = load_checkpoint(&path)?;
                        if saved.dim != cfg.dim
                            || saved.prune != cfg.prune
                            || saved.nicg_test != cfg.nicg_test
                            || saved.restriction != cfg.restriction
                        {
                            return Err(invalid(format!(
                                "{}: checkpoint was written by a different configuration",
                                path.display()
                            )));
                        }
                        eprintln!(
                            "resuming from {} at {} nodes",
                            path.display(),
                            snap.stats.nodes_visited
                        );
                        resume_dfs(&cfg, &snap)?
                    } else {
                        solve_dfs(&cfg)?
                    }
                }
                None => solve_dfs(&cfg)?,
            };
            if !outcome.exact {
                return Err(Fail::from(NicgError::BudgetExhausted {
                    nodes: outcome.stats.nodes_visited,
                }));
            }
            let doc = json!({
                "command": "exact",
                "dim": d,
                "strategy": "incremental",
                "n": outcome.best_cardinality,
                "exact": true,
                "witnesses": witnesses_json(&outcome.witnesses, &outcome.stats),
                "stats": outcome.stats,
            });
            emit(&doc, args.out.as_deref())?;
            Ok(0)
        }
        Strategy::Binary => {
            if checkpoint.is_some() {
                return Err(invalid("--checkpoint only applies to the incremental strategy"));
            }
            cfg = cfg.with_mode(SearchMode::BinarySearch);
            let lo = lo.unwrap_or(d);
            let hi = match hi {
                Some(h) => h,
                None => nicg_core::bounds::best_analytic_upper(dim).0,
            };
            let res = binary_search_n(&cfg, lo, hi)?;
            let witnesses: Vec<VecSet> = res.witness.into_iter().collect();
            let doc = json!({
                "command": "exact",
                "dim": d,
                "strategy": "binary",
                "interval": [lo, hi],
                "n": res.n,
                "exact": true,
                "probes": res.probes,
                "witnesses": witnesses_json(&witnesses, &res.stats),
                "stats": res.stats,
            });
            emit(&doc, args.out.as_deref())?;
            Ok(0)
        }
    }
}

fn parse_restriction(spec: &str) -> Result<Restriction, Fail> {
    let mut comp = None;
    let mut bit = None;
    for part in spec.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| invalid(format!("--restrict: expected key=value, got {part:?}")))?;
        let v: usize = v
            .trim()
            .parse()
            .map_err(|_| invalid(format!("--restrict: {k}: not a number: {v:?}")))?;
        match k.trim() {
            "comp" => comp = Some(v),
            "bit" => bit = Some(v),
            other => return Err(invalid(format!("--restrict: unknown key {other:?}"))),
        }
    }
    let (Some(component), Some(bit)) = (comp, bit) else {
        return Err(invalid("--restrict: needs both comp=J and bit=B"));
    };
    if bit > 1 {
        return Err(invalid("--restrict: bit must be 0 or 1"));
    }
    Ok(Restriction {
        component,
        bit: bit as u8,
    })
}

fn cmd_exists(d: usize, k: usize, restrict: Option<&str>, args: &SearchArgs) -> CmdResult {
    let dim = dim_arg(d)?;
    let mut cfg = base_config(dim, args)?.with_mode(SearchMode::ExistsAtSize);
    cfg.target_size = Some(k);
    let restriction = restrict.map(parse_restriction).transpose()?;
    if let Some(r) = restriction {
        cfg = cfg.with_restriction(r);
    }
    if k == 0 {
        return Err(invalid("--size must be at least 1"));
    }
    let res = exists_nicg(&cfg, k)?;
    let found = res.witness.is_some();
    let witnesses: Vec<VecSet> = res.witness.into_iter().collect();
    let doc = json!({
        "command": "exists",
        "dim": d,
        "size": k,
        "restriction": restriction,
        "exists": found,
        "exact": true,
        "witnesses": witnesses_json(&witnesses, &res.stats),
        "stats": res.stats,
    });
    emit(&doc, args.out.as_deref())?;
    Ok(if found { 0 } else { EXIT_NEGATIVE })
}

fn cmd_lower(
    d: usize,
    seed: u64,
    budget_secs: u64,
    restart_nodes: Option<u64>,
    target: Option<usize>,
    out: Option<&Path>,
) -> CmdResult {
    let dim = dim_arg(d)?;
    let mut cfg = SearchConfig::new(dim)
        .with_mode(SearchMode::Randomized)
        .with_seed(seed)
        .with_budget(Budget {
            max_nodes: None,
            max_millis: Some(budget_secs.saturating_mul(1000)),
        });
    if let Some(r) = restart_nodes {
        cfg.restart_nodes = r.max(1);
    }
    cfg.target_size = target;
    let outcome = randomized_search(&cfg)?;
    let doc = json!({
        "command": "lower",
        "dim": d,
        "seed": seed,
        "prng": outcome.stats.prng_name,
        "lower": outcome.best_cardinality,
        "exact": false,
        "witnesses": witnesses_json(&outcome.witnesses, &outcome.stats),
        "stats": outcome.stats,
    });
    emit(&doc, out)?;
    Ok(0)
}

fn cmd_upper(
    d: usize,
    method: Method,
    variant: Option<&str>,
    prev: Option<usize>,
    args: &SearchArgs,
) -> CmdResult {
    let dim = dim_arg(d)?;
    match method {
        Method::Inequality => {
            let name = variant.ok_or_else(|| invalid("--method inequality needs --variant"))?;
            let v: BoundVariant = name.parse().map_err(|e: NicgError| Fail::from(e))?;
            let upper = analytic_upper(dim, v)?;
            let doc = json!({
                "command": "upper",
                "dim": d,
                "method": "inequality",
                "variant": v.name(),
                "upper": upper,
            });
            emit(&doc, args.out.as_deref())?;
            Ok(0)
        }
        Method::Decomposition => {
            let n_prev = prev.ok_or_else(|| invalid("--method decomposition needs --prev"))?;
            let cfg = base_config(dim, args)?;
            let res = decomposition_upper(&cfg, n_prev)?;
            let witnesses: Vec<VecSet> = res.witness.into_iter().collect();
            let doc = json!({
                "command": "upper",
                "dim": d,
                "method": "decomposition",
                "prev": n_prev,
                "restricted_max": res.restricted_max,
                "upper": res.upper,
                "witnesses": witnesses_json(&witnesses, &res.stats),
                "stats": res.stats,
            });
            emit(&doc, args.out.as_deref())?;
            Ok(0)
        }
    }
}

/// `--inputs` document: optional `exact` and `decomposition_upper` maps keyed by
/// dimension, plus witnesses (inline or as file paths) that are re-verified before use.
fn load_table_inputs(path: &Path) -> Result<BoundsInputs, Fail> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| {
        invalid(format!(
            "{}: line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    let at = |m: String| invalid(format!("{}: {m}", path.display()));
    let mut inputs = BoundsInputs::default();
    let read_map = |key: &str| -> Result<BTreeMap<usize, usize>, Fail> {
        match doc.get(key) {
            None => Ok(BTreeMap::new()),
            Some(v) => {
                let raw: BTreeMap<String, usize> = serde_json::from_value(v.clone())
                    .map_err(|e| at(format!("{key}: {e}")))?;
                raw.into_iter()
                    .map(|(k, v)| {
                        k.parse::<usize>()
                            .map(|k| (k, v))
                            .map_err(|_| at(format!("{key}: key {k:?} is not a dimension")))
                    })
                    .collect()
            }
        }
    };
    inputs.exact = read_map("exact")?;
    inputs.decomposition_upper = read_map("decomposition_upper")?;
    let mut sets = Vec::new();
    if doc.get("witnesses").is_some() {
        sets.extend(parse_solutions(&doc).map_err(at)?);
    }
    if let Some(files) = doc.get("witness_files") {
        let files: Vec<PathBuf> = serde_json::from_value(files.clone())
            .map_err(|e| at(format!("witness_files: {e}")))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for f in files {
            sets.extend(load_solution_file(&base.join(f))?);
        }
    }
    for (i, s) in sets.iter().enumerate() {
        if !is_nicg_removal(s) {
            return Err(at(format!("witness {i} is not NICG")));
        }
        let e = inputs.witness_lower.entry(s.dim().get()).or_insert(0);
        *e = (*e).max(s.len());
    }
    Ok(inputs)
}

fn cmd_table(dmax: usize, inputs: Option<&Path>, format: Format, out: Option<&Path>) -> CmdResult {
    let inputs = match inputs {
        Some(p) => load_table_inputs(p)?,
        None => BoundsInputs::default(),
    };
    let report = bounds_table(dmax, &inputs)?;
    match format {
        Format::Csv => emit_text(&report.to_csv(), out)?,
        Format::Json => emit(&serde_json::to_value(&report).expect("serializable"), out)?,
    }
    Ok(0)
}

fn cmd_verify(input: &Path) -> CmdResult {
    let sets = load_solution_file(input)?;
    let mut failures = 0;
    for (i, s) in sets.iter().enumerate() {
        // load already checked the recorded sum against the vectors
        let ok = is_nicg_removal(s);
        let sum = sum_set(s);
        eprintln!(
            "witness {i}: d={} size={} sum={:?} {}",
            s.dim().get(),
            s.len(),
            sum.counts(),
            if ok { "NICG" } else { "NOT NICG" }
        );
        if !ok {
            failures += 1;
        }
    }
    let doc = json!({
        "command": "verify",
        "checked": sets.len(),
        "failures": failures,
        "ok": failures == 0,
    });
    emit(&doc, None)?;
    Ok(if failures == 0 { 0 } else { EXIT_NEGATIVE })
}

fn cmd_canon(input: &Path, out: Option<&Path>) -> CmdResult {
    let sets = load_solution_file(input)?;
    let mut keys = Vec::with_capacity(sets.len());
    for s in &sets {
        let key = canonical_form(s)?;
        keys.push(key.to_set(s.dim())?);
    }
    let total = keys.len();
    keys.sort();
    keys.dedup();
    let classes: Vec<Value> = keys
        .iter()
        .map(|k| json!({ "dim": k.dim().get(), "vectors": k.to_strings() }))
        .collect();
    let doc = json!({
        "command": "canon",
        "input": total,
        "classes": classes.len(),
        "keys": classes,
    });
    emit(&doc, out)?;
    Ok(0)
}
