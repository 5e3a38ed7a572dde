//! Functional routers `σ_v : ℤ≥0 → 𝒩(v)`.
//!
//! Four router kinds are provided:
//!
//! * **SRT** (shortest remaining time, a.k.a. stack walk): among the
//!   neighbors that are still under-served, `T_i(v) = {u : I_{v,u}[0,i) − (i+1)P_{v,u} < 0}`,
//!   pick the one minimizing `(I_{v,u}[0,i) + 1) / P_{v,u}`.
//! * **Billiard**: the same argmin without the `T_i(v)` filter. Produces a
//!   balanced (billiard) word.
//! * **Quasi-random**: route serve `i` to the neighbor whose cumulative
//!   probability interval contains the van der Corput point `ψ(i)`.
//! * **Rotor**: for rational rows, a fixed table of length `δ̄(v)` (common
//!   denominator) replayed periodically.
//!
//! SRT and billiard decisions are made in integer arithmetic when every entry
//! of the row is a fraction with denominator at most 10⁶, and in floating
//! point otherwise.
//!
//! Router state is incremental. [`interval_count`] replays a router from
//! scratch and is kept as the definitional oracle for tests.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chain::TransitionMatrix;
use crate::error::{Error, Result};

/// Largest denominator accepted when reconstructing rotor fractions.
pub const MAX_ROTOR_DENOMINATOR: u64 = 1_000_000;

/// A reconstructed fraction must match the stored probability this closely.
pub const RATIONAL_TOL: f64 = 1e-9;

const MAX_ROTOR_PERIOD: u64 = 1 << 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RouterKind {
    Srt,
    Billiard,
    /// Quasi-random router driven by the van der Corput sequence.
    Vdc,
    Rotor,
}

impl RouterKind {
    pub const ALL: [RouterKind; 4] = [
        RouterKind::Srt,
        RouterKind::Billiard,
        RouterKind::Vdc,
        RouterKind::Rotor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RouterKind::Srt => "srt",
            RouterKind::Billiard => "billiard",
            RouterKind::Vdc => "vdc",
            RouterKind::Rotor => "rotor",
        }
    }
}

impl fmt::Display for RouterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for RouterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "srt" => Ok(RouterKind::Srt),
            "billiard" => Ok(RouterKind::Billiard),
            "vdc" | "quasi-random" | "quasirandom" => Ok(RouterKind::Vdc),
            "rotor" => Ok(RouterKind::Rotor),
            other => Err(Error::invalid(format!(
                "unknown router kind {other:?} (expected srt|billiard|vdc|rotor)"
            ))),
        }
    }
}

/// Anything the engine can drive: a per-vertex source of serve targets.
pub trait Router {
    fn vertex(&self) -> usize;

    /// Number of serves emitted so far.
    fn served(&self) -> u64;

    /// Emits the next serve and returns its target as a position in the
    /// vertex's row of the transition matrix.
    fn next_slot(&mut self) -> Result<usize>;
}

/// Incremental state of one vertex's functional router.
#[derive(Clone, Debug)]
pub struct RouterState {
    vertex: usize,
    kind: RouterKind,
    neighbors: Vec<usize>,
    probs: Vec<f64>,
    counts: Vec<u64>,
    served: u64,
    // vdc: cumulative interval ends
    cumulative: Vec<f64>,
    // srt / billiard on rows of exact fractions: P_k = numerators[k] / denominator
    numerators: Vec<u64>,
    denominator: u64,
    /// Running totals of the rotor multiplicities; the last entry is `δ̄(v)`.
    rotor_ends: Vec<u64>,
}

impl RouterState {
    /// Router for vertex `vertex` with row `row` (`(neighbor, probability)`
    /// pairs). Neighbors are ordered by ascending vertex index.
    pub fn new(kind: RouterKind, vertex: usize, row: &[(usize, f64)]) -> Result<Self> {
        if row.is_empty() {
            return Err(Error::invalid(format!("vertex {vertex} has an empty row")));
        }
        let mut row = row.to_vec();
        row.sort_by_key(|&(u, _)| u);
        if let Some(&(u, p)) = row.iter().find(|&&(_, p)| !(p > 0.0 && p.is_finite())) {
            return Err(Error::InvalidEntry {
                row: vertex,
                col: u,
                value: p,
                reason: "router rows must hold strictly positive probabilities",
            });
        }
        let (neighbors, probs): (Vec<usize>, Vec<f64>) = row.into_iter().unzip();
        let mut state = Self {
            vertex,
            kind,
            counts: vec![0; neighbors.len()],
            neighbors,
            probs,
            served: 0,
            cumulative: Vec::new(),
            numerators: Vec::new(),
            denominator: 0,
            rotor_ends: Vec::new(),
        };
        match kind {
            RouterKind::Vdc => {
                let mut acc = 0.0;
                state.cumulative = state
                    .probs
                    .iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect();
            }
            RouterKind::Rotor => {
                let mut acc = 0;
                state.rotor_ends = rotor_multiplicities(vertex, &state.probs)?
                    .into_iter()
                    .map(|m| {
                        acc += m;
                        acc
                    })
                    .collect();
            }
            RouterKind::Srt | RouterKind::Billiard => {
                if let Some((nums, den)) = exact_fractions(&state.probs) {
                    state.numerators = nums;
                    state.denominator = den;
                }
            }
        }
        Ok(state)
    }

    /// One router per vertex of `p`.
    pub fn for_chain(p: &TransitionMatrix, kind: RouterKind) -> Result<Vec<Self>> {
        (0..p.n()).map(|v| Self::new(kind, v, p.row(v))).collect()
    }

    pub fn kind(&self) -> RouterKind {
        self.kind
    }

    /// Neighbor ordering `u_1, …, u_δ(v)`.
    pub fn neighbors(&self) -> &[usize] {
        &self.neighbors
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `I_{v,u}[0, i)` per neighbor slot.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `I_{v,u}[0, i)` for vertex `u`; zero for non-neighbors.
    pub fn count_to(&self, u: usize) -> u64 {
        self.neighbors
            .binary_search(&u)
            .map(|k| self.counts[k])
            .unwrap_or(0)
    }

    /// Rotor period `δ̄(v)`, for rotor routers.
    pub fn period(&self) -> Option<u64> {
        self.rotor_ends.last().copied()
    }

    /// One period of the rotor table as vertex ids.
    pub fn rotor_table(&self) -> Option<Vec<usize>> {
        let mut start = 0;
        (!self.rotor_ends.is_empty()).then(|| {
            let mut out = Vec::new();
            for (k, &end) in self.rotor_ends.iter().enumerate() {
                out.extend(std::iter::repeat_n(self.neighbors[k], (end - start) as usize));
                start = end;
            }
            out
        })
    }

    /// Emits the next serve and returns the target vertex.
    pub fn next(&mut self) -> Result<usize> {
        let k = self.next_slot()?;
        Ok(self.neighbors[k])
    }

    fn srt_slot(&self) -> Result<usize> {
        let i1 = (self.served + 1) as f64;
        let mut best: Option<usize> = None;
        for k in 0..self.probs.len() {
            let p = self.probs[k];
            let outside = if self.denominator > 0 {
                self.counts[k] as u128 * self.denominator as u128 >= (self.served + 1) as u128 * self.numerators[k] as u128
            } else {
                // fused: sign of I - (i+1)P is exact for the stored P
                (-i1).mul_add(p, self.counts[k] as f64) >= 0.0
            };
            if outside {
                continue;
            }
            best = match best {
                Some(b) if !self.ratio_less(k, b) => Some(b),
                _ => Some(k),
            };
        }
        best.ok_or_else(|| Error::CorruptRouter {
            vertex: self.vertex,
            detail: format!("T_i(v) empty at i={}", self.served),
        })
    }

    fn billiard_slot(&self) -> usize {
        (1..self.probs.len()).fold(0, |b, k| if self.ratio_less(k, b) { k } else { b })
    }

    // (I_a+1)/P_a < (I_b+1)/P_b, cross-multiplied
    fn ratio_less(&self, a: usize, b: usize) -> bool {
        if self.denominator > 0 {
            return ((self.counts[a] + 1) as u128 * self.numerators[b] as u128)
                < (self.counts[b] + 1) as u128 * self.numerators[a] as u128;
        }
        (self.counts[a] + 1) as f64 * self.probs[b] < (self.counts[b] + 1) as f64 * self.probs[a]
    }

    fn vdc_slot(&self) -> usize {
        let x = van_der_corput(self.served);
        self.cumulative
            .iter()
            .position(|&c| x < c)
            .unwrap_or(self.cumulative.len() - 1)
    }

    fn rotor_slot(&self) -> usize {
        let r = self.served % self.rotor_ends[self.rotor_ends.len() - 1];
        self.rotor_ends.partition_point(|&end| end <= r)
    }

    pub fn dump(&self) -> RouterDump {
        RouterDump {
            v: self.vertex,
            served: self.served,
            counts: self
                .neighbors
                .iter()
                .copied()
                .zip(self.counts.iter().copied())
                .collect(),
        }
    }
}

impl Router for RouterState {
    fn vertex(&self) -> usize {
        self.vertex
    }

    fn served(&self) -> u64 {
        self.served
    }

    fn next_slot(&mut self) -> Result<usize> {
        let k = match self.kind {
            RouterKind::Srt => self.srt_slot()?,
            RouterKind::Billiard => self.billiard_slot(),
            RouterKind::Vdc => self.vdc_slot(),
            RouterKind::Rotor => self.rotor_slot(),
        };
        self.counts[k] += 1;
        self.served += 1;
        Ok(k)
    }
}

/// Debug dump: `{"v": v, "served": i, "counts": {u: c}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouterDump {
    pub v: usize,
    pub served: u64,
    pub counts: BTreeMap<usize, u64>,
}

/// Router that replays an explicit finite sequence `σ_v(0), σ_v(1), …`.
///
/// Useful for injecting hand-written routers into the engine. Serving past
/// the end of the script is an error.
#[derive(Clone, Debug)]
pub struct ScriptedRouter {
    vertex: usize,
    script: Vec<usize>,
    served: u64,
}

impl ScriptedRouter {
    /// `targets` are vertex ids; each must appear in `row`.
    pub fn new(vertex: usize, row: &[(usize, f64)], targets: &[usize]) -> Result<Self> {
        let script = targets
            .iter()
            .map(|&u| {
                row.iter().position(|&(w, _)| w == u).ok_or_else(|| {
                    Error::invalid(format!("{u} is not a neighbor of vertex {vertex}"))
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            vertex,
            script,
            served: 0,
        })
    }
}

impl Router for ScriptedRouter {
    fn vertex(&self) -> usize {
        self.vertex
    }

    fn served(&self) -> u64 {
        self.served
    }

    fn next_slot(&mut self) -> Result<usize> {
        let k = *self
            .script
            .get(self.served as usize)
            .ok_or_else(|| Error::CorruptRouter {
                vertex: self.vertex,
                detail: format!("script exhausted after {} serves", self.served),
            })?;
        self.served += 1;
        Ok(k)
    }
}

/// Van der Corput radical inverse in base 2: `ψ(i) = Σ_j β_j(i) 2^{−(j+1)}`.
///
/// Exact for `i < 2^53`; beyond that low-order digits are truncated so the
/// result stays in `[0, 1)`.
pub fn van_der_corput(i: u64) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    (i.reverse_bits() >> 11) as f64 * SCALE
}

/// `|{i ∈ [z0, z0+z) : ψ(i) ∈ [x, y)}|`.
pub fn vdc_window_count(z0: u64, z: u64, x: f64, y: f64) -> Result<u64> {
    if !(0.0 <= x && x < y && y <= 1.0) {
        return Err(Error::invalid(format!("need 0 <= x < y <= 1, got [{x}, {y})")));
    }
    if z == 0 {
        return Err(Error::invalid("window length z must be at least 1"));
    }
    Ok((z0..z0 + z)
        .filter(|&i| {
            let p = van_der_corput(i);
            x <= p && p < y
        })
        .count() as u64)
}

/// `I_{v,u}[z, z')` by replaying a fresh router from serve 0 to `z'`.
pub fn interval_count(kind: RouterKind, row: &[(usize, f64)], z: u64, z_prime: u64, u: usize) -> Result<u64> {
    if z >= z_prime {
        return Err(Error::invalid(format!("interval [{z}, {z_prime}) is empty")));
    }
    let mut r = RouterState::new(kind, usize::MAX, row)?;
    let mut count = 0;
    for i in 0..z_prime {
        let target = r.next()?;
        if i >= z && target == u {
            count += 1;
        }
    }
    Ok(count)
}

/// Best rational approximation with denominator at most `max_den`, by
/// continued-fraction convergents. `x` must lie in `[0, 1]`.
pub fn rational_approx(x: f64, max_den: u64) -> (u64, u64) {
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut r = x;
    loop {
        let a = r.floor();
        if a > u32::MAX as f64 {
            break;
        }
        let a = a as u64;
        let Some(k2) = a.checked_mul(k1).and_then(|v| v.checked_add(k0)) else {
            break;
        };
        if k2 > max_den {
            break;
        }
        let h2 = a * h1 + h0;
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a as f64;
        if frac.abs() < 1e-15 || (x - h1 as f64 / k1 as f64).abs() < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    if k1 == 0 {
        (x.round() as u64, 1)
    } else {
        (h1, k1)
    }
}

/// Numerators over a common denominator when every entry is the correctly
/// rounded value of a fraction with denominator at most
/// [`MAX_ROTOR_DENOMINATOR`] and the fractions sum to exactly one.
fn exact_fractions(probs: &[f64]) -> Option<(Vec<u64>, u64)> {
    let mut fracs = Vec::with_capacity(probs.len());
    for &p in probs {
        let (a, b) = rational_approx(p, MAX_ROTOR_DENOMINATOR);
        if a == 0 || a as f64 / b as f64 != p {
            return None;
        }
        fracs.push((a, b));
    }
    let den = fracs.iter().try_fold(1u64, |acc, &(_, b)| lcm(acc, b))?;
    if den > 1 << 40 {
        return None;
    }
    let nums: Vec<u64> = fracs.iter().map(|&(a, b)| a * (den / b)).collect();
    (nums.iter().sum::<u64>() == den).then_some((nums, den))
}

fn lcm(a: u64, b: u64) -> Option<u64> {
    let g = crate::chain::gcd(a as usize, b as usize) as u64;
    (a / g).checked_mul(b)
}

/// Per-neighbor rotor multiplicities `δ̄(v)·P_{v,u}` for one row.
fn rotor_multiplicities(vertex: usize, probs: &[f64]) -> Result<Vec<u64>> {
    let mut fracs = Vec::with_capacity(probs.len());
    for &p in probs {
        let (a, b) = rational_approx(p, MAX_ROTOR_DENOMINATOR);
        if (p - a as f64 / b as f64).abs() > RATIONAL_TOL || a == 0 {
            return Err(Error::NotRational {
                vertex,
                value: p,
                max_denominator: MAX_ROTOR_DENOMINATOR,
            });
        }
        fracs.push((a, b));
    }
    let period = fracs.iter().try_fold(1u64, |acc, &(_, b)| lcm(acc, b));
    let period = match period {
        Some(d) if d <= MAX_ROTOR_PERIOD => d,
        _ => return Err(Error::invalid(format!("rotor period of vertex {vertex} is too large"))),
    };
    let mut mult: Vec<u64> = fracs.iter().map(|&(a, b)| a * (period / b)).collect();
    for (k, (&m, &p)) in mult.iter().zip(probs).enumerate() {
        if (period as f64 * p - m as f64).abs() > RATIONAL_TOL {
            return Err(Error::NotRational {
                vertex,
                value: probs[k],
                max_denominator: MAX_ROTOR_DENOMINATOR,
            });
        }
    }
    let total: u64 = mult.iter().sum();
    if total != period {
        // fractions do not sum to exactly one; absorb the difference in the largest share
        let (k, &m) = mult.iter().enumerate().max_by_key(|&(_, m)| m).unwrap();
        let fixed = m as i128 + period as i128 - total as i128;
        if fixed <= 0 {
            return Err(Error::NotRational {
                vertex,
                value: probs[k],
                max_denominator: MAX_ROTOR_DENOMINATOR,
            });
        }
        mult[k] = fixed as u64;
    }
    Ok(mult)
}

/// `δ̄(v)` for every vertex of a rational chain.
pub fn rotor_periods(p: &TransitionMatrix) -> Result<Vec<u64>> {
    (0..p.n())
        .map(|v| {
            let probs: Vec<f64> = p.row(v).iter().map(|&(_, q)| q).collect();
            Ok(rotor_multiplicities(v, &probs)?.iter().sum())
        })
        .collect()
}

/// `Δ̄ = max_v δ̄(v)`.
pub fn max_rotor_period(p: &TransitionMatrix) -> Result<u64> {
    Ok(rotor_periods(p)?.into_iter().max().unwrap_or(1))
}
