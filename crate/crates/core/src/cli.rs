//! Command-line driver behind the `detwalk` binary: `run`, `mixing`,
//! `verify-router` and `gen`.
//!
//! Exit codes: 0 on success, 1 on invalid input or a chain that fails
//! validation, 2 when a requested bound or identity check fails.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    bound_coefficients, check_bounds, discrepancy, lemma1_residual, primary_bound_name, theoretical_bound,
    BoundCheck, BoundInputs, DEFAULT_GAMMA,
};
use crate::chain::{
    mixing_profile_with, mixing_rate, validate_chain, ProfileExport, ProfileOptions, TransitionMatrix, DEFAULT_EPS,
};
use crate::chains::{knapsack_chain, linear_extension_chain, matching_chain, random_reversible_chain, random_weighted_chain};
use crate::engine::{run, write_trace_csv, InitialConfig, RunOptions};
use crate::error::{Error, Result};
use crate::router::{max_rotor_period, RouterKind, RouterState};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "DETWALK_THREADS";

#[derive(Debug, Parser)]
#[command(name = "detwalk", version, about = "Deterministic random walks on Markov chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate tokens, compare against the expected evolution, check bounds.
    Run(RunConfig),
    /// Mixing times and the h / h̄ profiles of a chain.
    Mixing(MixingArgs),
    /// Sweep count windows of a single router row.
    VerifyRouter(VerifyRouterArgs),
    /// Write a benchmark chain as JSON plus a state-label sidecar.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Debug, Clone, Args)]
pub struct ChainSource {
    /// Chain JSON file `{"n": N, "rows": [[[v, p], ...], ...]}`.
    #[arg(long, conflicts_with = "gen", required_unless_present = "gen")]
    pub chain: Option<PathBuf>,
    /// Generator, e.g. `knapsack:a=1,1;b=1`, `linext:n=4;rel=1<3,2<4`,
    /// `matching:edges=0-1,1-2`, `random:n=10;degree=3;seed=1`.
    #[arg(long)]
    pub gen: Option<String>,
}

impl ChainSource {
    pub fn load(&self) -> Result<TransitionMatrix> {
        match (&self.chain, &self.gen) {
            (Some(path), _) => TransitionMatrix::load(path),
            (None, Some(spec)) => Ok(spec.parse::<Generator>()?.build()?.0),
            (None, None) => Err(Error::invalid("either --chain or --gen is required")),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    #[command(flatten)]
    pub source: ChainSource,
    #[arg(long, default_value = "srt")]
    pub router: RouterKind,
    /// Number of tokens.
    #[arg(long = "M", default_value_t = 1000)]
    pub tokens: u64,
    /// Number of steps; defaults to 10·t*.
    #[arg(long = "T")]
    pub steps: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    pub gamma: f64,
    /// `point`, `point:V`, `uniform`, or `explicit:c0,c1,...`.
    #[arg(long, default_value = "point")]
    pub init: InitialConfig,
    #[arg(long, default_value = "trace.csv")]
    pub trace: PathBuf,
    #[arg(long, default_value = "summary.json")]
    pub summary: PathBuf,
    #[arg(long)]
    pub store_flows: bool,
    /// Exit 2 unless every applicable bound holds.
    #[arg(long)]
    pub verify_bounds: bool,
    /// Evaluate the telescoping identity at every vertex; exit 2 if it fails.
    #[arg(long)]
    pub verify_lemma1: bool,
    /// Horizon cap for computing τ(γ) and t*.
    #[arg(long, default_value_t = 100_000)]
    pub t_max: usize,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tokens == 0 {
            return Err(Error::invalid("M must be at least 1"));
        }
        if !(self.gamma > 0.0 && self.gamma < 0.5) {
            return Err(Error::invalid(format!("gamma must lie in (0, 1/2), got {}", self.gamma)));
        }
        Ok(())
    }
}

/// Written to `--summary` by `run`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    #[serde(rename = "T")]
    pub steps: usize,
    #[serde(rename = "M")]
    pub tokens: u64,
    pub router: RouterKind,
    pub states: usize,
    pub psi_measured: f64,
    pub max_discrepancy: f64,
    pub bound_name: String,
    pub bound: f64,
    pub bound_satisfied: bool,
    pub bounds: BTreeMap<String, BoundCheck>,
    pub inputs: BoundInputs,
    pub lemma1_residual: Option<f64>,
    pub lemma1_tolerance: Option<f64>,
}

impl RunSummary {
    /// Worst-case bound values recomputed from the stored inputs.
    pub fn recompute_bounds(&self) -> Result<BTreeMap<String, f64>> {
        theoretical_bound(self.router, &self.inputs, Some(self.psi_measured))
    }
}

/// Tolerance for the telescoping identity; floating error grows with the
/// number of emitted tokens.
pub fn lemma1_tolerance(tokens: u64, steps: usize) -> f64 {
    (1e-12 * tokens as f64 * steps as f64).max(1e-8)
}

#[derive(Debug, Clone, Args)]
pub struct MixingArgs {
    #[command(flatten)]
    pub source: ChainSource,
    /// Comma-separated ε values.
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub t_max: usize,
    /// Skip the O(N³)-per-step h̄ profile.
    #[arg(long)]
    pub no_h_bar: bool,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    #[serde(flatten)]
    pub profile: ProfileExport,
    /// Some requested τ(ε) was not reached by `t_max`.
    pub truncated: bool,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyRouterArgs {
    pub kind: RouterKind,
    /// Probabilities, e.g. `2/3,1/3` or `sqrt(2)/4,1-sqrt(2)/4`.
    #[arg(long)]
    pub row: String,
    #[arg(long, default_value_t = 10_000)]
    pub z_max: u64,
    /// Seed for sampled windows beyond the exhaustive range.
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Rescale the row to sum to one.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum GenCommand {
    Knapsack {
        /// Comma-separated item weights.
        #[arg(long, value_delimiter = ',', required = true)]
        a: Vec<u64>,
        #[arg(long)]
        b: u64,
        #[command(flatten)]
        out: GenOutput,
    },
    Linext {
        #[arg(long)]
        n: usize,
        /// Relations on `{1..n}`, e.g. `1<3,2<4`.
        #[arg(long, default_value = "")]
        rel: String,
        #[command(flatten)]
        out: GenOutput,
    },
    Matching {
        /// Edges, e.g. `0-1,1-2`.
        #[arg(long, default_value = "")]
        edges: String,
        #[command(flatten)]
        out: GenOutput,
    },
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        irrational: bool,
        /// Metropolis chain with non-uniform vertex weights.
        #[arg(long, conflicts_with = "irrational")]
        weighted: bool,
        #[command(flatten)]
        out: GenOutput,
    },
}

#[derive(Debug, Clone, Args)]
pub struct GenOutput {
    #[arg(long)]
    pub out: PathBuf,
    /// Label sidecar; defaults to `<out>.labels.json`.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

/// A benchmark chain description, shared by `--gen` and `gen`.
#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    Knapsack { a: Vec<u64>, b: u64 },
    /// 0-based relations.
    Linext { n: usize, relations: Vec<(usize, usize)> },
    Matching { edges: Vec<(usize, usize)> },
    Random { n: usize, degree: usize, seed: u64, irrational: bool },
    Weighted { n: usize, degree: usize, seed: u64 },
}

impl Generator {
    /// The chain and one label per state.
    pub fn build(&self) -> Result<(TransitionMatrix, Vec<String>)> {
        Ok(match self {
            Generator::Knapsack { a, b } => {
                let (p, inst) = knapsack_chain(a, *b)?;
                (p, inst.labels())
            }
            Generator::Linext { n, relations } => {
                let (p, inst) = linear_extension_chain(*n, relations)?;
                (p, inst.labels())
            }
            Generator::Matching { edges } => {
                let (p, inst) = matching_chain(edges)?;
                (p, inst.labels())
            }
            Generator::Random {
                n,
                degree,
                seed,
                irrational,
            } => {
                let p = random_reversible_chain(*n, *degree, *seed, *irrational)?;
                (p, (0..*n).map(|v| v.to_string()).collect())
            }
            Generator::Weighted { n, degree, seed } => {
                let (p, w) = random_weighted_chain(*n, *degree, *seed)?;
                (p, w.iter().enumerate().map(|(v, w)| format!("{v} (weight {w})")).collect())
            }
        })
    }
}

fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad {what} entry {x:?}")))
        })
        .collect()
}

fn parse_pairs(s: &str, sep: char, what: &str) -> Result<Vec<(usize, usize)>> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| {
            let bad = || Error::invalid(format!("bad {what} {x:?}"));
            let (i, j) = x.trim().split_once(sep).ok_or_else(bad)?;
            Ok((i.trim().parse().map_err(|_| bad())?, j.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

/// Parses `1<3,2<4` over the 1-based ground set `{1..n}`.
pub fn parse_relations(s: &str, n: usize) -> Result<Vec<(usize, usize)>> {
    parse_pairs(s, '<', "relation")?
        .into_iter()
        .map(|(i, j)| {
            if i == 0 || j == 0 || i > n || j > n {
                return Err(Error::invalid(format!("relation {i}<{j} outside 1..={n}")));
            }
            Ok((i - 1, j - 1))
        })
        .collect()
}

pub fn parse_edges(s: &str) -> Result<Vec<(usize, usize)>> {
    parse_pairs(s, '-', "edge")
}

impl FromStr for Generator {
    type Err = Error;

    /// `kind:key=value;key=value`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut kv = BTreeMap::new();
        for part in rest.split(';').filter(|p| !p.trim().is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("expected key=value, got {part:?}")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| {
            kv.get(k)
                .cloned()
                .ok_or_else(|| Error::invalid(format!("generator {kind:?} needs {k}=")))
        };
        let num = |k: &str| -> Result<u64> {
            get(k)?
                .parse()
                .map_err(|_| Error::invalid(format!("{k} must be a nonnegative integer")))
        };
        let flag = |k: &str| kv.get(k).is_some_and(|v| v == "1" || v == "true");
        Ok(match kind {
            "knapsack" => Generator::Knapsack {
                a: parse_list(&get("a")?, "weight")?,
                b: num("b")?,
            },
            "linext" => {
                let n = num("n")? as usize;
                let rel = kv.get("rel").cloned().unwrap_or_default();
                Generator::Linext {
                    n,
                    relations: parse_relations(&rel, n)?,
                }
            }
            "matching" => Generator::Matching {
                edges: parse_edges(&kv.get("edges").cloned().unwrap_or_default())?,
            },
            "random" if flag("weighted") => Generator::Weighted {
                n: num("n")? as usize,
                degree: num("degree")? as usize,
                seed: num("seed")?,
            },
            "random" => Generator::Random {
                n: num("n")? as usize,
                degree: num("degree")? as usize,
                seed: num("seed")?,
                irrational: flag("irrational"),
            },
            _ => return Err(Error::invalid(format!("unknown generator {kind:?}"))),
        })
    }
}

/// Successful completion or a failed check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Violation,
}

pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(Outcome::Pass) => EXIT_OK,
        Ok(Outcome::Violation) => EXIT_VIOLATION,
        Err(_) => EXIT_INVALID,
    }
}

/// Thread count from `DETWALK_THREADS`, if set.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .map(Some)
            .ok_or_else(|| Error::invalid(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

/// Runs a parsed command, inside a dedicated pool when `threads` is given.
pub fn execute(cli: &Cli, threads: Option<usize>) -> Result<Outcome> {
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::invalid(e.to_string()))?
            .install(|| dispatch(cli)),
        None => dispatch(cli),
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Run(cfg) => cmd_run(cfg).map(|(_, outcome)| outcome),
        Command::Mixing(args) => cmd_mixing(args),
        Command::VerifyRouter(args) => cmd_verify_router(args),
        Command::Gen(g) => cmd_gen(g),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn load_ergodic(source: &ChainSource) -> Result<TransitionMatrix> {
    let p = source.load()?;
    let report = validate_chain(&p);
    if let Some(&(row, sum)) = report.non_stochastic_rows.first() {
        return Err(Error::NotStochastic { row, sum });
    }
    if let Some(prop) = report.ergodicity_failure() {
        return Err(Error::NotErgodic(prop));
    }
    Ok(p)
}

/// Simulates, writes the trace CSV and summary JSON, and evaluates the
/// requested checks.
pub fn cmd_run(cfg: &RunConfig) -> Result<(RunSummary, Outcome)> {
    cfg.validate()?;
    let p = load_ergodic(&cfg.source)?;
    let chi0 = cfg.init.build(p.n(), cfg.tokens)?;
    let profile = mixing_rate(&p, cfg.gamma, cfg.t_max)?;
    let t_star = profile.tau_checked(0.25)?;
    let steps = cfg.steps.unwrap_or(10 * t_star);
    info!("N={} t*={t_star} T={steps} M={}", p.n(), cfg.tokens);

    let opts = RunOptions {
        store_flows: cfg.store_flows || cfg.verify_lemma1,
    };
    let trace = run(&chi0, &p, cfg.router, steps, opts)?;
    let mut report = discrepancy(&trace);
    let delta_bar = match cfg.router {
        RouterKind::Rotor => Some(max_rotor_period(&p)?),
        _ => None,
    };
    let inputs = BoundInputs::from_profile(&profile, cfg.gamma, cfg.tokens, delta_bar)?;
    let coefficients = bound_coefficients(cfg.router, &inputs, Some(trace.psi_measured))?;
    check_bounds(&mut report, &coefficients, &profile.pi);

    let (lemma1, tol) = if cfg.verify_lemma1 {
        let mut worst = 0.0f64;
        for w in 0..p.n() {
            worst = worst.max(lemma1_residual(&trace, &p, &profile.pi, steps, w)?);
        }
        (Some(worst), Some(lemma1_tolerance(cfg.tokens, steps)))
    } else {
        (None, None)
    };

    let bound_name = primary_bound_name(cfg.router).to_string();
    let headline = &report.bounds[&bound_name];
    let summary = RunSummary {
        steps,
        tokens: cfg.tokens,
        router: cfg.router,
        states: p.n(),
        psi_measured: trace.psi_measured,
        max_discrepancy: report.global_max,
        bound: headline.value,
        bound_satisfied: headline.satisfied,
        bound_name,
        bounds: report.bounds.clone(),
        inputs,
        lemma1_residual: lemma1,
        lemma1_tolerance: tol,
    };

    write_trace_csv(&trace, create(&cfg.trace)?)?;
    write_json(&cfg.summary, &summary)?;

    let mut outcome = Outcome::Pass;
    if cfg.verify_bounds {
        for (name, check) in &summary.bounds {
            if !(check.satisfied && check.per_vertex_satisfied) {
                eprintln!(
                    "bound {name} violated: max discrepancy {} > {}",
                    summary.max_discrepancy, check.value
                );
                outcome = Outcome::Violation;
            }
        }
    }
    if let (Some(r), Some(t)) = (lemma1, tol) {
        if r > t {
            eprintln!("telescoping identity residual {r:e} exceeds {t:e}");
            outcome = Outcome::Violation;
        }
    }
    println!(
        "T={} M={} router={} max_discrepancy={} {}={} psi={}",
        summary.steps,
        summary.tokens,
        summary.router,
        summary.max_discrepancy,
        summary.bound_name,
        summary.bound,
        summary.psi_measured
    );
    Ok((summary, outcome))
}

pub fn cmd_mixing(args: &MixingArgs) -> Result<Outcome> {
    let p = load_ergodic(&args.source)?;
    let eps = if args.eps.is_empty() { DEFAULT_EPS.to_vec() } else { args.eps.clone() };
    let opts = ProfileOptions {
        t_max: args.t_max,
        eps,
        h_bar: !args.no_h_bar,
        stop_below: None,
    };
    let profile = mixing_profile_with(&p, &opts)?;
    let export = profile.export();
    let report = MixingReport {
        truncated: export.tau.values().any(Option::is_none),
        profile: export,
    };
    match &args.out {
        Some(path) => write_json(path, &report)?,
        None => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    Ok(Outcome::Pass)
}

/// Parses a probability row from comma-separated arithmetic expressions.
pub fn parse_row(spec: &str, normalize: bool) -> Result<Vec<f64>> {
    let mut row = Vec::new();
    for term in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let x = exmex::eval_str::<f64>(term).map_err(|e| Error::invalid(format!("cannot evaluate {term:?}: {e}")))?;
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::invalid(format!("probability {term:?} = {x} must be positive")));
        }
        row.push(x);
    }
    if row.is_empty() {
        return Err(Error::invalid("empty row"));
    }
    let sum: f64 = row.iter().sum();
    if normalize {
        row.iter_mut().for_each(|x| *x /= sum);
    } else if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::NotStochastic { row: 0, sum });
    }
    Ok(row)
}

/// One inequality swept by [`verify_router`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RouterCheck {
    pub name: &'static str,
    pub limit: String,
    pub windows: u64,
    /// Largest observed `|I − (z′−z)P|`.
    pub worst: f64,
    /// First violating `(z, z′, neighbor)`.
    pub violation: Option<(u64, u64, usize)>,
}

impl RouterCheck {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Largest window fully enumerated by [`verify_router`].
pub const EXHAUSTIVE_WINDOW_LIMIT: u64 = 1000;

struct Sweep {
    probs: Vec<f64>,
    /// `prefix[k][z] = I_k[0, z)`
    prefix: Vec<Vec<u32>>,
}

impl Sweep {
    fn deviation(&self, z: u64, z2: u64, k: usize) -> f64 {
        let count = self.prefix[k][z2 as usize] - self.prefix[k][z as usize];
        (count as f64 - (z2 - z) as f64 * self.probs[k]).abs()
    }
}

/// Emits `z_max` serves of one router row and checks the window inequality
/// of its kind: exhaustively for `z′ ≤ 1000`, then on `samples` random
/// windows up to `z_max`.
///
/// * SRT: prefix deviation `< 1`, window deviation `< 2`.
/// * Billiard: window deviation `≤ 1 + (δ−2)P`.
/// * Quasi-random: prefix deviation `≤ lg(z+1)`, window `≤ 2·lg(z′−z+1)`.
/// * Rotor: window deviation `≤ δ̄·P`, and the sequence has period `δ̄`.
pub fn verify_router(kind: RouterKind, probs: &[f64], z_max: u64, seed: u64, samples: usize) -> Result<Vec<RouterCheck>> {
    let row: Vec<(usize, f64)> = probs.iter().copied().enumerate().collect();
    let mut router = RouterState::new(kind, 0, &row)?;
    let delta = probs.len();
    let mut prefix = vec![vec![0u32; z_max as usize + 1]; delta];
    let mut seq = Vec::with_capacity(z_max as usize);
    for z in 0..z_max as usize {
        let u = router.next()?;
        seq.push(u);
        for (k, pk) in prefix.iter_mut().enumerate() {
            pk[z + 1] = pk[z] + u32::from(k == u);
        }
    }
    let sweep = Sweep {
        probs: probs.to_vec(),
        prefix,
    };

    let mut windows = Vec::new();
    let exhaustive = z_max.min(EXHAUSTIVE_WINDOW_LIMIT);
    for z2 in 1..=exhaustive {
        for z in 0..z2 {
            windows.push((z, z2));
        }
    }
    if z_max > EXHAUSTIVE_WINDOW_LIMIT {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let a = rng.gen_range(0..=z_max);
            let b = rng.gen_range(0..=z_max);
            if a != b {
                windows.push((a.min(b), a.max(b)));
            }
        }
    }

    let mut checks = Vec::new();
    let prefix_check = |name, limit: String, ok: &dyn Fn(u64, f64, usize) -> bool| {
        let mut c = RouterCheck {
            name,
            limit,
            windows: 0,
            worst: 0.0,
            violation: None,
        };
        for z in 1..=z_max {
            c.windows += 1;
            for k in 0..delta {
                let d = sweep.deviation(0, z, k);
                c.worst = c.worst.max(d);
                if c.violation.is_none() && !ok(z, d, k) {
                    c.violation = Some((0, z, k));
                }
            }
        }
        c
    };
    let window_check = |name, limit: String, ok: &dyn Fn(u64, f64, usize) -> bool| {
        let mut c = RouterCheck {
            name,
            limit,
            windows: windows.len() as u64,
            worst: 0.0,
            violation: None,
        };
        for &(z, z2) in &windows {
            for k in 0..delta {
                let d = sweep.deviation(z, z2, k);
                c.worst = c.worst.max(d);
                if c.violation.is_none() && !ok(z2 - z, d, k) {
                    c.violation = Some((z, z2, k));
                }
            }
        }
        c
    };

    const SLACK: f64 = 1e-9;
    match kind {
        RouterKind::Srt => {
            checks.push(prefix_check("prefix", "< 1".into(), &|_, d, _| d < 1.0));
            checks.push(window_check("window", "< 2".into(), &|_, d, _| d < 2.0));
        }
        RouterKind::Billiard => {
            let d = delta as f64;
            checks.push(window_check("window", "<= 1 + (delta-2)P".into(), &|_, dev, k| {
                dev <= 1.0 + (d - 2.0) * probs[k] + SLACK
            }));
        }
        RouterKind::Vdc => {
            checks.push(prefix_check("prefix", "<= lg(z+1)".into(), &|z, d, _| {
                d <= ((z + 1) as f64).log2() + SLACK
            }));
            checks.push(window_check("window", "<= 2 lg(z'-z+1)".into(), &|len, d, _| {
                d <= 2.0 * ((len + 1) as f64).log2() + SLACK
            }));
        }
        RouterKind::Rotor => {
            let period = router.period().expect("rotor router has a period");
            checks.push(window_check("window", format!("<= {period}P"), &|_, d, k| {
                d <= period as f64 * probs[k] + SLACK
            }));
            let mut c = RouterCheck {
                name: "period",
                limit: format!("sigma(i) = sigma(i + {period})"),
                windows: 0,
                worst: 0.0,
                violation: None,
            };
            for i in 0..seq.len().saturating_sub(period as usize) {
                c.windows += 1;
                if seq[i] != seq[i + period as usize] && c.violation.is_none() {
                    c.violation = Some((i as u64, i as u64 + period, seq[i + period as usize]));
                }
            }
            checks.push(c);
        }
    }
    Ok(checks)
}

pub fn cmd_verify_router(args: &VerifyRouterArgs) -> Result<Outcome> {
    let probs = parse_row(&args.row, args.normalize)?;
    let checks = verify_router(args.kind, &probs, args.z_max, args.seed, args.samples)?;
    let mut outcome = Outcome::Pass;
    println!("{:<8} {:<22} {:>10} {:>12}  result", "check", "limit", "windows", "worst");
    for c in &checks {
        let result = match c.violation {
            None => "PASS".to_string(),
            Some((z, z2, u)) => {
                outcome = Outcome::Violation;
                format!("FAIL at z={z} z'={z2} u={u}")
            }
        };
        println!("{:<8} {:<22} {:>10} {:>12.6}  {result}", c.name, c.limit, c.windows, c.worst);
    }
    Ok(outcome)
}

pub fn cmd_gen(cmd: &GenCommand) -> Result<Outcome> {
    let (generator, out) = match cmd {
        GenCommand::Knapsack { a, b, out } => (Generator::Knapsack { a: a.clone(), b: *b }, out),
        GenCommand::Linext { n, rel, out } => (
            Generator::Linext {
                n: *n,
                relations: parse_relations(rel, *n)?,
            },
            out,
        ),
        GenCommand::Matching { edges, out } => (Generator::Matching { edges: parse_edges(edges)? }, out),
        GenCommand::Random {
            n,
            degree,
            seed,
            irrational,
            weighted,
            out,
        } => {
            let g = if *weighted {
                Generator::Weighted {
                    n: *n,
                    degree: *degree,
                    seed: *seed,
                }
            } else {
                Generator::Random {
                    n: *n,
                    degree: *degree,
                    seed: *seed,
                    irrational: *irrational,
                }
            };
            (g, out)
        }
    };
    let (p, labels) = generator.build()?;
    write_json(&out.out, &p.to_chain_file())?;
    let labels_path = out.labels.clone().unwrap_or_else(|| {
        let mut s = out.out.clone().into_os_string();
        s.push(".labels.json");
        PathBuf::from(s)
    });
    write_json(&labels_path, &labels)?;
    println!("{} states written to {}", p.n(), out.out.display());
    Ok(Outcome::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_specs() {
        assert_eq!(
            "knapsack:a=1,1;b=1".parse::<Generator>().unwrap(),
            Generator::Knapsack { a: vec![1, 1], b: 1 }
        );
        assert_eq!(
            "linext:n=4;rel=1<3,2<4".parse::<Generator>().unwrap(),
            Generator::Linext {
                n: 4,
                relations: vec![(0, 2), (1, 3)]
            }
        );
        assert_eq!(
            "matching:edges=0-1,1-2".parse::<Generator>().unwrap(),
            Generator::Matching {
                edges: vec![(0, 1), (1, 2)]
            }
        );
        assert_eq!(
            "random:n=5;degree=2;seed=3;irrational=1".parse::<Generator>().unwrap(),
            Generator::Random {
                n: 5,
                degree: 2,
                seed: 3,
                irrational: true
            }
        );
        assert!("linext:n=3;rel=0<1".parse::<Generator>().is_err());
        assert!("knapsack:a=1".parse::<Generator>().is_err());
        assert!("torus:n=3".parse::<Generator>().is_err());
    }

    #[test]
    fn row_expressions() {
        assert_eq!(parse_row("2/3, 1/3", false).unwrap(), vec![2.0 / 3.0, 1.0 / 3.0]);
        let r = parse_row("sqrt(2)/4,1-sqrt(2)/4", false).unwrap();
        assert_eq!(r[0], std::f64::consts::SQRT_2 / 4.0);
        assert_eq!(parse_row("1,1,2", true).unwrap(), vec![0.25, 0.25, 0.5]);
        assert!(parse_row("0.5,0.4", false).is_err());
        assert!(parse_row("0.5,-0.5,1", false).is_err());
    }

    #[test]
    fn verify_router_passes_on_examples() {
        let checks = verify_router(RouterKind::Srt, &[2.0 / 3.0, 1.0 / 3.0], 10_000, 1, 2000).unwrap();
        assert!(checks.iter().all(RouterCheck::passed));
        let checks = verify_router(RouterKind::Rotor, &[0.5, 0.25, 0.25], 2000, 1, 100).unwrap();
        assert!(checks.iter().all(RouterCheck::passed));
        assert!(checks.iter().any(|c| c.name == "period"));
        let checks = verify_router(RouterKind::Vdc, &[0.3, 0.3, 0.4], 3000, 7, 500).unwrap();
        assert!(checks.iter().all(RouterCheck::passed));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Ok(Outcome::Pass)), 0);
        assert_eq!(exit_code(&Ok(Outcome::Violation)), 2);
        assert_eq!(exit_code(&Err(Error::CyclicOrder)), 1);
    }
}
