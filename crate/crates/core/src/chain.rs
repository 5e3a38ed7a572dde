//! Finite Markov chains: transition matrices, exact distributions, total
//! variation distance and mixing times.
//!
//! Everything here is computed by dense iteration. At the state-space sizes
//! this crate targets (a few thousand states at most) tracking every row of
//! `P^t` explicitly is affordable and gives exact mixing times rather than
//! estimates.

use std::collections::{BTreeMap, VecDeque};
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row sums must equal one within this tolerance.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// Tolerance for detailed balance checks.
pub const DETAILED_BALANCE_TOL: f64 = 1e-9;

/// Power iteration stops once successive iterates differ by at most this in L∞.
pub const STATIONARY_TOL: f64 = 1e-13;

/// Default iteration cap for [`stationary_distribution`].
pub const STATIONARY_CAP: usize = 1_000_000;

/// Row-stochastic transition matrix stored as sorted sparse rows.
///
/// Only strictly positive entries are kept, so the stored sparsity pattern is
/// exactly the transition diagram `{(u, v) : P[u][v] > 0}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl TransitionMatrix {
    /// Builds a matrix and checks that every row is stochastic.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let p = Self::from_rows_lenient(rows)?;
        if let Some(&(row, sum)) = p.non_stochastic_rows().first() {
            return Err(Error::NotStochastic { row, sum });
        }
        Ok(p)
    }

    /// Builds a matrix, checking structure (indices, finiteness, sign,
    /// duplicates) but not row sums. Use [`validate_chain`] to inspect it.
    pub fn from_rows_lenient(rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::invalid("transition matrix needs at least one state"));
        }
        let mut out = Vec::with_capacity(n);
        for (u, mut row) in rows.into_iter().enumerate() {
            for &(v, p) in &row {
                if v >= n {
                    return Err(Error::InvalidEntry {
                        row: u,
                        col: v,
                        value: p,
                        reason: "column index out of range",
                    });
                }
                if !p.is_finite() || p < 0.0 {
                    return Err(Error::InvalidEntry {
                        row: u,
                        col: v,
                        value: p,
                        reason: "probability must be finite and nonnegative",
                    });
                }
            }
            row.retain(|&(_, p)| p > 0.0);
            row.sort_by_key(|&(v, _)| v);
            if let Some(w) = row.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidEntry {
                    row: u,
                    col: w[0].0,
                    value: w[1].1,
                    reason: "duplicate column",
                });
            }
            out.push(row);
        }
        Ok(Self { n, rows: out })
    }

    pub fn from_dense(dense: &[Vec<f64>]) -> Result<Self> {
        let n = dense.len();
        let mut rows = Vec::with_capacity(n);
        for r in dense {
            if r.len() != n {
                return Err(Error::LengthMismatch { left: n, right: r.len() });
            }
            rows.push(r.iter().copied().enumerate().filter(|&(_, p)| p != 0.0).collect());
        }
        Self::from_rows(rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Sparse row `v`: `(neighbor, probability)` in ascending neighbor order.
    pub fn row(&self, v: usize) -> &[(usize, f64)] {
        &self.rows[v]
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    /// Dense accessor `P[u][v]`.
    pub fn get(&self, u: usize, v: usize) -> f64 {
        let row = &self.rows[u];
        match row.binary_search_by_key(&v, |&(w, _)| w) {
            Ok(i) => row[i].1,
            Err(_) => 0.0,
        }
    }

    /// Out-degree `δ(v)` in the transition diagram, self-loop included.
    pub fn degree(&self, v: usize) -> usize {
        self.rows[v].len()
    }

    /// `Δ = max_v δ(v)`.
    pub fn max_degree(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (u, row) in self.rows.iter().enumerate() {
            for &(v, p) in row {
                d[u][v] = p;
            }
        }
        d
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows
            .iter()
            .enumerate()
            .all(|(u, row)| row.iter().all(|&(v, p)| self.get(v, u) == p))
    }

    /// Rows whose sum differs from one by more than [`ROW_SUM_TOL`].
    pub fn non_stochastic_rows(&self) -> Vec<(usize, f64)> {
        self.rows
            .iter()
            .enumerate()
            .filter_map(|(u, row)| {
                let s: f64 = row.iter().map(|&(_, p)| p).sum();
                ((s - 1.0).abs() > ROW_SUM_TOL).then_some((u, s))
            })
            .collect()
    }

    /// Row-vector product `out = x P`.
    pub fn left_mul_into(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (u, row) in self.rows.iter().enumerate() {
            let xu = x[u];
            if xu == 0.0 {
                continue;
            }
            for &(v, p) in row {
                out[v] += xu * p;
            }
        }
    }

    pub fn left_mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.left_mul_into(x, &mut out);
        out
    }

    /// Column-vector product `P c`.
    pub fn right_mul(&self, c: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(v, p)| p * c[v]).sum())
            .collect()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ChainFile = serde_json::from_str(text)?;
        file.into_matrix()
    }

    pub fn to_chain_file(&self) -> ChainFile {
        ChainFile {
            n: self.n,
            rows: self.rows.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_chain_file())?)
    }
}

/// On-disk chain format: `{"n": N, "rows": [[[v, p], ...], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainFile {
    pub n: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl ChainFile {
    pub fn into_matrix(self) -> Result<TransitionMatrix> {
        if self.rows.len() != self.n {
            return Err(Error::LengthMismatch {
                left: self.n,
                right: self.rows.len(),
            });
        }
        TransitionMatrix::from_rows(self.rows)
    }
}

/// A probability vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("distribution must be nonempty"));
        }
        if let Some(x) = values.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::invalid(format!("distribution entry {x} is negative or not finite")));
        }
        let s: f64 = values.iter().sum();
        if (s - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::invalid(format!("distribution sums to {s}")));
        }
        Ok(Self(values))
    }

    pub fn point_mass(n: usize, v: usize) -> Self {
        let mut x = vec![0.0; n];
        x[v] = 1.0;
        Self(x)
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl std::ops::Index<usize> for Distribution {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub stochastic: bool,
    pub irreducible: bool,
    pub aperiodic: bool,
    pub reversible: bool,
    /// Period of the chain when it is irreducible.
    pub period: Option<usize>,
    /// `(row, sum)` for every row that is not stochastic.
    pub non_stochastic_rows: Vec<(usize, f64)>,
}

impl ValidationReport {
    pub fn is_ergodic(&self) -> bool {
        self.stochastic && self.irreducible && self.aperiodic
    }

    /// First failing property among stochastic, irreducible, aperiodic.
    pub fn ergodicity_failure(&self) -> Option<&'static str> {
        if !self.stochastic {
            Some("stochastic")
        } else if !self.irreducible {
            Some("irreducible")
        } else if !self.aperiodic {
            Some("aperiodic")
        } else {
            None
        }
    }
}

/// Checks stochasticity, irreducibility, aperiodicity and reversibility.
pub fn validate_chain(p: &TransitionMatrix) -> ValidationReport {
    let non_stochastic_rows = p.non_stochastic_rows();
    let stochastic = non_stochastic_rows.is_empty();
    let sccs = strongly_connected_components(p);
    let irreducible = sccs.len() == 1;
    let periods: Vec<Option<usize>> = sccs.iter().map(|c| component_period(p, c)).collect();
    let aperiodic = periods.iter().all(|&d| d == Some(1));
    let period = if irreducible { periods[0] } else { None };

    let reversible = stochastic
        && match stationary_distribution(p) {
            Ok(pi) => detailed_balance_holds(p, &pi, DETAILED_BALANCE_TOL),
            Err(_) => false,
        };
    ValidationReport {
        stochastic,
        irreducible,
        aperiodic,
        reversible,
        period,
        non_stochastic_rows,
    }
}

pub fn detailed_balance_holds(p: &TransitionMatrix, pi: &Distribution, tol: f64) -> bool {
    p.rows().iter().enumerate().all(|(u, row)| {
        row.iter()
            .all(|&(v, puv)| (pi[u] * puv - pi[v] * p.get(v, u)).abs() <= tol)
    })
}

// Iterative Kosaraju.
fn strongly_connected_components(p: &TransitionMatrix) -> Vec<Vec<usize>> {
    let n = p.n();
    let mut reverse = vec![Vec::new(); n];
    for (u, row) in p.rows().iter().enumerate() {
        for &(v, _) in row {
            reverse[v].push(u);
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![(s, 0usize)];
        while let Some(&mut (u, ref mut i)) = stack.last_mut() {
            let row = p.row(u);
            if *i < row.len() {
                let v = row[*i].0;
                *i += 1;
                if !seen[v] {
                    seen[v] = true;
                    stack.push((v, 0));
                }
            } else {
                order.push(u);
                stack.pop();
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut comps = Vec::new();
    for &s in order.iter().rev() {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut members = vec![s];
        comp[s] = id;
        let mut k = 0;
        while k < members.len() {
            let u = members[k];
            k += 1;
            for &w in &reverse[u] {
                if comp[w] == usize::MAX {
                    comp[w] = id;
                    members.push(w);
                }
            }
        }
        members.sort_unstable();
        comps.push(members);
    }
    comps
}

/// gcd of cycle lengths within one strongly connected component, from BFS
/// level differences. `None` when the component contains no cycle.
fn component_period(p: &TransitionMatrix, members: &[usize]) -> Option<usize> {
    let mut level = vec![usize::MAX; p.n()];
    let inside = |v: usize| members.binary_search(&v).is_ok();
    let root = members[0];
    level[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut g = 0usize;
    let mut has_edge = false;
    while let Some(u) = queue.pop_front() {
        for &(v, _) in p.row(u) {
            if !inside(v) {
                continue;
            }
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    for &u in members {
        for &(v, _) in p.row(u) {
            if inside(v) {
                has_edge = true;
                let diff = (level[u] + 1).abs_diff(level[v]);
                g = gcd(g, diff);
            }
        }
    }
    has_edge.then_some(g)
}

pub(crate) fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Stationary distribution by power iteration from the uniform vector.
///
/// Iterates the lazy chain `(I + P)/2`, which has the same fixed points but
/// cannot oscillate.
pub fn stationary_distribution(p: &TransitionMatrix) -> Result<Distribution> {
    stationary_distribution_with_cap(p, STATIONARY_CAP)
}

pub fn stationary_distribution_with_cap(p: &TransitionMatrix, cap: usize) -> Result<Distribution> {
    let n = p.n();
    let mut x = vec![1.0 / n as f64; n];
    let mut y = vec![0.0; n];
    for _ in 0..cap {
        p.left_mul_into(&x, &mut y);
        let mut diff = 0.0f64;
        for (xi, yi) in x.iter_mut().zip(&y) {
            let next = 0.5 * (*xi + yi);
            diff = diff.max((next - *xi).abs());
            *xi = next;
        }
        if diff <= STATIONARY_TOL {
            let s: f64 = x.iter().sum();
            x.iter_mut().for_each(|v| *v /= s);
            return Ok(Distribution(x));
        }
    }
    Err(Error::NotConverged { cap })
}

/// `d_tv(ξ, ζ) = ½‖ξ − ζ‖₁`.
pub fn total_variation(xi: &[f64], zeta: &[f64]) -> Result<f64> {
    check_len(xi, zeta)?;
    Ok(tv_unchecked(xi, zeta))
}

/// `d_pw(ξ, ζ) = ‖ξ − ζ‖_∞`.
pub fn point_wise_distance(xi: &[f64], zeta: &[f64]) -> Result<f64> {
    check_len(xi, zeta)?;
    Ok(xi
        .iter()
        .zip(zeta)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

fn check_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

pub(crate) fn tv_unchecked(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// `ξ P^t` by `t` successive vector-matrix products.
pub fn evolve(xi: &Distribution, p: &TransitionMatrix, t: usize) -> Result<Distribution> {
    if xi.len() != p.n() {
        return Err(Error::LengthMismatch {
            left: xi.len(),
            right: p.n(),
        });
    }
    let mut x = xi.as_slice().to_vec();
    let mut y = vec![0.0; x.len()];
    for _ in 0..t {
        p.left_mul_into(&x, &mut y);
        std::mem::swap(&mut x, &mut y);
    }
    Ok(Distribution(x))
}

/// Settings for [`mixing_profile_with`].
#[derive(Clone, Debug)]
pub struct ProfileOptions {
    pub t_max: usize,
    /// ε values reported in the τ table.
    pub eps: Vec<f64>,
    /// Also compute h̄(t); costs O(N³) per step.
    pub h_bar: bool,
    /// Stop early once h(t) falls to or below this value.
    pub stop_below: Option<f64>,
}

impl ProfileOptions {
    pub fn new(t_max: usize) -> Self {
        Self {
            t_max,
            eps: DEFAULT_EPS.to_vec(),
            h_bar: true,
            stop_below: None,
        }
    }
}

pub const DEFAULT_EPS: [f64; 6] = [0.01, 0.05, 0.1, 0.125, 0.25, 0.4];

/// Derived quantities of an ergodic chain.
#[derive(Clone, Debug)]
pub struct ChainProfile {
    pub pi: Distribution,
    pub pi_min: f64,
    pub pi_max: f64,
    pub delta_max: usize,
    /// Last time step covered by the profile.
    pub t_max: usize,
    /// ε values for which τ was requested.
    pub eps: Vec<f64>,
    /// `h(t) = max_w d_tv(P^t_{w,·}, π)` for `t = 0..=t_max`.
    pub h: Vec<f64>,
    /// `h̄(t) = max_{v,w} d_tv(P^t_{v,·}, P^t_{w,·})`, when requested.
    pub h_bar: Option<Vec<f64>>,
    /// `row_dtv[t][v] = d_tv(P^t_{v,·}, π)`.
    pub row_dtv: Vec<Vec<f64>>,
}

impl ChainProfile {
    /// `τ(ε) = max_v min{t : d_tv(P^t_{v,·}, π) ≤ ε}`, or `None` when some
    /// start state has not reached ε by `t_max`.
    pub fn tau(&self, eps: f64) -> Option<usize> {
        let mut worst = 0;
        for v in 0..self.pi.len() {
            let t = (0..self.row_dtv.len()).find(|&t| self.row_dtv[t][v] <= eps)?;
            worst = worst.max(t);
        }
        Some(worst)
    }

    pub fn tau_checked(&self, eps: f64) -> Result<usize> {
        self.tau(eps).ok_or(Error::NotMixed {
            eps,
            t_max: self.t_max,
        })
    }

    /// Mixing rate `t* = τ(1/4)`.
    pub fn t_star(&self) -> Option<usize> {
        self.tau(0.25)
    }

    pub fn tau_table(&self) -> BTreeMap<String, Option<usize>> {
        let mut eps = self.eps.clone();
        if !eps.contains(&0.25) {
            eps.push(0.25);
        }
        eps.iter().map(|&e| (format!("{e}"), self.tau(e))).collect()
    }

    pub fn export(&self) -> ProfileExport {
        ProfileExport {
            pi: self.pi.as_slice().to_vec(),
            tau: self.tau_table(),
            t_star: self.t_star(),
            h: self.h.clone(),
            h_bar: self.h_bar.clone(),
        }
    }
}

/// JSON form of a profile: `{"pi", "tau", "t_star", "h", "h_bar"}`.
/// τ entries not reached within `t_max` are `null`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ProfileExport {
    pub pi: Vec<f64>,
    pub tau: BTreeMap<String, Option<usize>>,
    pub t_star: Option<usize>,
    pub h: Vec<f64>,
    pub h_bar: Option<Vec<f64>>,
}

/// Exact mixing profile up to `t_max`, including h̄.
pub fn mixing_profile(p: &TransitionMatrix, t_max: usize) -> Result<ChainProfile> {
    mixing_profile_with(p, &ProfileOptions::new(t_max))
}

/// Profile that stops as soon as `h(t) ≤ min(gamma, 1/4)`, so both `τ(γ)` and
/// `t*` are available. Errors when that does not happen by `t_cap`.
pub fn mixing_rate(p: &TransitionMatrix, gamma: f64, t_cap: usize) -> Result<ChainProfile> {
    let target = gamma.min(0.25);
    let opts = ProfileOptions {
        t_max: t_cap,
        eps: vec![gamma, 0.25],
        h_bar: false,
        stop_below: Some(target),
    };
    let profile = mixing_profile_with(p, &opts)?;
    profile.tau_checked(target)?;
    Ok(profile)
}

pub fn mixing_profile_with(p: &TransitionMatrix, opts: &ProfileOptions) -> Result<ChainProfile> {
    let n = p.n();
    let pi = stationary_distribution(p)?;
    let pis = pi.as_slice();
    let mut rows: Vec<Vec<f64>> = (0..n).map(|v| Distribution::point_mass(n, v).into_vec()).collect();
    let mut h = Vec::new();
    let mut h_bar = opts.h_bar.then(Vec::new);
    let mut row_dtv = Vec::new();
    let mut t = 0;
    loop {
        let dtv: Vec<f64> = rows.par_iter().map(|r| tv_unchecked(r, pis)).collect();
        let ht = dtv.iter().copied().fold(0.0, f64::max);
        h.push(ht);
        row_dtv.push(dtv);
        if let Some(hb) = h_bar.as_mut() {
            hb.push(max_pairwise_tv(&rows));
        }
        let done = opts.stop_below.is_some_and(|s| ht <= s);
        if done || t == opts.t_max {
            break;
        }
        rows = rows.par_iter().map(|r| p.left_mul(r)).collect();
        t += 1;
    }
    Ok(ChainProfile {
        pi_min: pi.min(),
        pi_max: pi.max(),
        pi,
        delta_max: p.max_degree(),
        t_max: t,
        eps: opts.eps.clone(),
        h,
        h_bar,
        row_dtv,
    })
}

fn max_pairwise_tv(rows: &[Vec<f64>]) -> f64 {
    (0..rows.len())
        .into_par_iter()
        .map(|v| {
            rows[v + 1..]
                .iter()
                .map(|r| tv_unchecked(&rows[v], r))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}
