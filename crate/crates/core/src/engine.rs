//! Deterministic token propagation.
//!
//! At every step each vertex `v` hands its `χ_v` tokens to its router, which
//! emits the next `χ_v` serves of `σ_v`. The flows `Z_{v,u}` are the serve
//! counts per target and the next configuration is their column sum. The
//! expected configuration `μ^(t) = μ^(0) P^t` is carried alongside.

use std::io::Write;
use std::str::FromStr;

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{validate_chain, TransitionMatrix};
use crate::error::{Error, Result};
use crate::router::{Router, RouterKind, RouterState};

/// Hard cap on the total number of emissions `M·T`.
pub const MAX_EMISSIONS: u128 = 1 << 62;

/// Integer token counts per vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TokenConfiguration {
    counts: Vec<u64>,
}

impl TokenConfiguration {
    pub fn new(counts: Vec<u64>) -> Self {
        Self { counts }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Total token count `M`.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }
}

/// How the `M` tokens are laid out at time zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InitialConfig {
    /// All tokens on one vertex.
    PointMass(usize),
    /// `⌊M/N⌋` everywhere, remainder to the lowest indices.
    Uniform,
    Explicit(Vec<u64>),
}

impl InitialConfig {
    pub fn build(&self, n: usize, tokens: u64) -> Result<TokenConfiguration> {
        match self {
            InitialConfig::PointMass(v) => {
                if *v >= n {
                    return Err(Error::invalid(format!("start vertex {v} out of range (N={n})")));
                }
                let mut c = vec![0; n];
                c[*v] = tokens;
                Ok(TokenConfiguration::new(c))
            }
            InitialConfig::Uniform => {
                let (q, r) = (tokens / n as u64, (tokens % n as u64) as usize);
                Ok(TokenConfiguration::new(
                    (0..n).map(|v| q + u64::from(v < r)).collect(),
                ))
            }
            InitialConfig::Explicit(c) => {
                if c.len() != n {
                    return Err(Error::LengthMismatch {
                        left: c.len(),
                        right: n,
                    });
                }
                let total: u64 = c.iter().sum();
                if total != tokens {
                    return Err(Error::invalid(format!(
                        "explicit configuration holds {total} tokens, expected {tokens}"
                    )));
                }
                Ok(TokenConfiguration::new(c.clone()))
            }
        }
    }
}

impl FromStr for InitialConfig {
    type Err = Error;

    /// `point`, `point:V`, `uniform`, or `explicit:c0,c1,...`.
    fn from_str(s: &str) -> Result<Self> {
        let (head, tail) = s.split_once(':').unwrap_or((s, ""));
        match head {
            "point" if tail.is_empty() => Ok(InitialConfig::PointMass(0)),
            "point" => tail
                .parse()
                .map(InitialConfig::PointMass)
                .map_err(|_| Error::invalid(format!("bad start vertex {tail:?}"))),
            "uniform" => Ok(InitialConfig::Uniform),
            "explicit" => tail
                .split(',')
                .map(|c| c.trim().parse::<u64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(InitialConfig::Explicit)
                .map_err(|_| Error::invalid(format!("bad explicit configuration {tail:?}"))),
            _ => Err(Error::invalid(format!(
                "unknown initial configuration {s:?} (expected point[:v]|uniform|explicit:...)"
            ))),
        }
    }
}

/// Flows `Z_{v,u}` of one step, stored per vertex aligned with the slots of
/// the vertex's row in the transition matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepFlow {
    flows: Vec<Vec<u64>>,
}

impl StepFlow {
    pub fn from_slots(flows: Vec<Vec<u64>>) -> Self {
        Self { flows }
    }

    /// Flows out of `v`, one entry per neighbor slot.
    pub fn slots(&self, v: usize) -> &[u64] {
        &self.flows[v]
    }

    pub fn slots_mut(&mut self, v: usize) -> &mut [u64] {
        &mut self.flows[v]
    }

    /// `Z_{v,u}`; zero when `u ∉ 𝒩(v)`.
    pub fn get(&self, p: &TransitionMatrix, v: usize, u: usize) -> u64 {
        p.row(v)
            .binary_search_by_key(&u, |&(w, _)| w)
            .map(|k| self.flows[v][k])
            .unwrap_or(0)
    }

    /// Column sums: the configuration these flows produce.
    pub fn arrivals(&self, p: &TransitionMatrix) -> TokenConfiguration {
        let mut next = vec![0u64; p.n()];
        for (v, z) in self.flows.iter().enumerate() {
            for (&(u, _), &c) in p.row(v).iter().zip(z) {
                next[u] += c;
            }
        }
        TokenConfiguration::new(next)
    }

    /// `max_{v,u} |Z_{v,u} − χ_v P_{v,u}|` against the configuration that was served.
    pub fn max_deviation(&self, p: &TransitionMatrix, chi: &TokenConfiguration) -> f64 {
        let mut worst = 0.0f64;
        for (v, z) in self.flows.iter().enumerate() {
            let x = chi.counts[v] as f64;
            for (&(_, puv), &c) in p.row(v).iter().zip(z) {
                worst = worst.max((c as f64 - x * puv).abs());
            }
        }
        worst
    }
}

/// Serves `count` tokens from one router and tallies them per slot.
pub(crate) fn emit_vertex<R: Router>(router: &mut R, count: u64, degree: usize) -> Result<Vec<u64>> {
    let mut z = vec![0u64; degree];
    for _ in 0..count {
        let k = router.next_slot()?;
        let slot = z.get_mut(k).ok_or_else(|| Error::CorruptRouter {
            vertex: router.vertex(),
            detail: format!("slot {k} out of range for degree {degree}"),
        })?;
        *slot += 1;
    }
    Ok(z)
}

/// One synchronous update `χ^(t) → χ^(t+1)`.
///
/// Vertices are served independently (in parallel when a rayon pool is
/// available); accumulation is integer addition, so the result does not
/// depend on scheduling.
pub fn step<R: Router + Send>(
    chi: &TokenConfiguration,
    routers: &mut [R],
    p: &TransitionMatrix,
) -> Result<(TokenConfiguration, StepFlow)> {
    if chi.len() != p.n() || routers.len() != p.n() {
        return Err(Error::LengthMismatch {
            left: chi.len().max(routers.len()),
            right: p.n(),
        });
    }
    let flows = routers
        .par_iter_mut()
        .enumerate()
        .with_min_len(64)
        .map(|(v, r)| {
            if r.vertex() != v {
                return Err(Error::invalid(format!(
                    "router for vertex {} placed at position {v}",
                    r.vertex()
                )));
            }
            let before = r.served();
            let z = emit_vertex(r, chi.counts[v], p.degree(v))?;
            if r.served() != before + chi.counts[v] {
                return Err(Error::RouterDesync {
                    vertex: v,
                    served: r.served(),
                    expected: before + chi.counts[v],
                });
            }
            Ok(z)
        })
        .collect::<Result<Vec<_>>>()?;
    let flow = StepFlow::from_slots(flows);
    Ok((flow.arrivals(p), flow))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Keep every `Z^(t)`; needed for the telescoping-identity check.
    pub store_flows: bool,
}

/// Time-indexed record of a run.
#[derive(Clone, Debug)]
pub struct TokenTrace {
    pub kind: Option<RouterKind>,
    /// Total token count `M`.
    pub tokens: u64,
    /// `χ^(0..=T)`.
    pub chi: Vec<TokenConfiguration>,
    /// `μ^(0..=T)`, unnormalized.
    pub mu: Vec<Vec<f64>>,
    /// `Z^(0..T)` when requested.
    pub flows: Option<Vec<StepFlow>>,
    /// Max single-step deviation `|Z_{v,u} − χ_v P_{v,u}|` over the run.
    pub psi_measured: f64,
}

impl TokenTrace {
    /// Number of steps `T`.
    pub fn steps(&self) -> usize {
        self.chi.len() - 1
    }
}

/// Runs `steps` updates from `chi0` with routers of `kind`.
///
/// The chain must be ergodic; a non-reversible chain only logs a warning,
/// since the discrepancy theorems then no longer apply.
pub fn run(
    chi0: &TokenConfiguration,
    p: &TransitionMatrix,
    kind: RouterKind,
    steps: usize,
    opts: RunOptions,
) -> Result<TokenTrace> {
    let report = validate_chain(p);
    if let Some(prop) = report.ergodicity_failure() {
        return Err(Error::NotErgodic(prop));
    }
    if !report.reversible {
        warn!("chain is not reversible; discrepancy bounds do not apply");
    }
    let routers = RouterState::for_chain(p, kind)?;
    let mut trace = run_with_routers(chi0, p, routers, steps, opts)?;
    trace.kind = Some(kind);
    Ok(trace)
}

/// Runs with caller-supplied routers (e.g. scripted ones). Routers must be
/// fresh: `served() == 0`.
pub fn run_with_routers<R: Router + Send>(
    chi0: &TokenConfiguration,
    p: &TransitionMatrix,
    mut routers: Vec<R>,
    steps: usize,
    opts: RunOptions,
) -> Result<TokenTrace> {
    let tokens = chi0.total();
    let budget = tokens as u128 * steps as u128;
    if budget > MAX_EMISSIONS {
        return Err(Error::Overflow(budget));
    }
    if chi0.len() != p.n() {
        return Err(Error::LengthMismatch {
            left: chi0.len(),
            right: p.n(),
        });
    }
    let mut cumulative = vec![0u64; p.n()];
    let mut chi = vec![chi0.clone()];
    let mut mu = vec![chi0.as_f64()];
    let mut flows = opts.store_flows.then(Vec::new);
    let mut psi = 0.0f64;
    for _ in 0..steps {
        let cur = chi.last().unwrap();
        for (v, r) in routers.iter().enumerate() {
            if r.served() != cumulative[v] {
                return Err(Error::RouterDesync {
                    vertex: v,
                    served: r.served(),
                    expected: cumulative[v],
                });
            }
        }
        let (next, flow) = step(cur, &mut routers, p)?;
        psi = psi.max(flow.max_deviation(p, cur));
        for (c, &x) in cumulative.iter_mut().zip(cur.counts()) {
            *c += x;
        }
        debug_assert_eq!(next.total(), tokens);
        let next_mu = p.left_mul(mu.last().unwrap());
        mu.push(next_mu);
        chi.push(next);
        if let Some(f) = flows.as_mut() {
            f.push(flow);
        }
    }
    Ok(TokenTrace {
        kind: None,
        tokens,
        chi,
        mu,
        flows,
        psi_measured: psi,
    })
}

/// `Ψ_σ = max_{t,v,u} |Z^(t)_{v,u} − χ^(t)_v P_{v,u}|` over the run.
///
/// Recomputed from stored flows when available, otherwise the value
/// streamed during the run.
pub fn measured_psi(trace: &TokenTrace, p: &TransitionMatrix) -> f64 {
    match &trace.flows {
        Some(flows) => flows
            .iter()
            .zip(&trace.chi)
            .map(|(f, chi)| f.max_deviation(p, chi))
            .fold(0.0, f64::max),
        None => trace.psi_measured,
    }
}

#[derive(Serialize)]
struct CsvRow {
    t: usize,
    vertex: usize,
    chi: u64,
    mu: f64,
    abs_discrepancy: f64,
}

/// CSV with columns `t, vertex, chi, mu, abs_discrepancy`.
pub fn write_trace_csv<W: Write>(trace: &TokenTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (t, (chi, mu)) in trace.chi.iter().zip(&trace.mu).enumerate() {
        for (v, (&c, &m)) in chi.counts().iter().zip(mu).enumerate() {
            w.serialize(CsvRow {
                t,
                vertex: v,
                chi: c,
                mu: m,
                abs_discrepancy: (c as f64 - m).abs(),
            })?;
        }
    }
    w.flush()?;
    Ok(())
}
