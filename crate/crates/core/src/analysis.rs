//! Discrepancy between the token trace and its expectation, and the
//! closed-form bounds it is checked against.
//!
//! Every bound has the shape `C · π_w / π_min`. [`bound_coefficients`]
//! returns the coefficients `C`; the per-vertex bound multiplies by
//! `π_w / π_min` and the worst case uses `π_max / π_min`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::chain::{ChainProfile, Distribution, TransitionMatrix};
use crate::engine::TokenTrace;
use crate::error::{Error, Result};
use crate::router::RouterKind;

/// Additive slack when checking a discrepancy against a bound.
pub const BOUND_TOL: f64 = 1e-6;

/// Default γ for the generic bound; matches the `t* = τ(1/4)` convention.
pub const DEFAULT_GAMMA: f64 = 0.25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    /// Worst-case value, evaluated at `π_max`.
    pub value: f64,
    /// `global_max ≤ value + BOUND_TOL`.
    pub satisfied: bool,
    /// Every vertex satisfies its own `π_w`-scaled bound.
    pub per_vertex_satisfied: bool,
}

#[derive(Clone, Debug)]
pub struct DiscrepancyReport {
    /// `max_w |χ_w^(t) − μ_w^(t)|` per time step.
    pub per_time_max: Vec<f64>,
    /// `max_t |χ_w^(t) − μ_w^(t)|` per vertex.
    pub per_vertex_max: Vec<f64>,
    pub global_max: f64,
    pub psi_measured: f64,
    pub bounds: BTreeMap<String, BoundCheck>,
}

/// Exact per-time and per-vertex discrepancies of a trace. Bounds are left
/// empty; see [`check_bounds`].
pub fn discrepancy(trace: &TokenTrace) -> DiscrepancyReport {
    let n = trace.mu[0].len();
    let mut per_vertex_max = vec![0.0f64; n];
    let per_time_max = trace
        .chi
        .iter()
        .zip(&trace.mu)
        .map(|(chi, mu)| {
            let mut worst = 0.0f64;
            for (v, (&c, &m)) in chi.counts().iter().zip(mu).enumerate() {
                let d = (c as f64 - m).abs();
                worst = worst.max(d);
                per_vertex_max[v] = per_vertex_max[v].max(d);
            }
            worst
        })
        .collect::<Vec<_>>();
    DiscrepancyReport {
        global_max: per_time_max.iter().copied().fold(0.0, f64::max),
        per_time_max,
        per_vertex_max,
        psi_measured: trace.psi_measured,
        bounds: BTreeMap::new(),
    }
}

/// Scalars the closed-form bounds depend on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub pi_min: f64,
    pub pi_max: f64,
    /// `t* = τ(1/4)`.
    pub t_star: usize,
    pub gamma: f64,
    /// `τ(γ)`.
    pub tau_gamma: usize,
    /// `Δ`.
    pub delta_max: usize,
    /// `Δ̄`, rotor routers only.
    pub delta_bar_max: Option<u64>,
    /// `M`.
    pub tokens: u64,
}

impl BoundInputs {
    pub fn from_profile(profile: &ChainProfile, gamma: f64, tokens: u64, delta_bar_max: Option<u64>) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(Self {
            pi_min: profile.pi_min,
            pi_max: profile.pi_max,
            t_star: profile.tau_checked(0.25)?,
            gamma,
            tau_gamma: profile.tau_checked(gamma)?,
            delta_max: profile.delta_max,
            delta_bar_max,
            tokens,
        })
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 0.5) {
        return Err(Error::invalid(format!("gamma must lie in (0, 1/2), got {gamma}")));
    }
    Ok(())
}

/// The per-router Ψ guarantee used when no measured value is supplied:
/// 2 (SRT), Δ−1 (billiard), 2·lg(M+1) (quasi-random), Δ̄ (rotor).
pub fn default_psi(kind: RouterKind, inputs: &BoundInputs) -> Result<f64> {
    Ok(match kind {
        RouterKind::Srt => 2.0,
        RouterKind::Billiard => inputs.delta_max as f64 - 1.0,
        RouterKind::Vdc => 2.0 * (inputs.tokens as f64 + 1.0).log2(),
        RouterKind::Rotor => delta_bar(inputs)? as f64,
    })
}

fn delta_bar(inputs: &BoundInputs) -> Result<u64> {
    inputs
        .delta_bar_max
        .ok_or_else(|| Error::invalid("rotor bounds need the maximum rotor period"))
}

/// Coefficients `C` of every bound applicable to `kind`; the bound at vertex
/// `w` is `C · π_w / π_min`.
///
/// `generic_psi` is `Ψ · 2(1−γ)/(1−2γ) · τ(γ) · Δ` with Ψ either supplied
/// (e.g. measured) or the router's guarantee.
pub fn bound_coefficients(kind: RouterKind, inputs: &BoundInputs, psi: Option<f64>) -> Result<BTreeMap<String, f64>> {
    check_gamma(inputs.gamma)?;
    let t_star = inputs.t_star as f64;
    let delta = inputs.delta_max as f64;
    let gamma = inputs.gamma;
    let psi = match psi {
        Some(x) => x,
        None => default_psi(kind, inputs)?,
    };
    let mut out = BTreeMap::new();
    out.insert(
        "generic_psi".to_string(),
        psi * 2.0 * (1.0 - gamma) / (1.0 - 2.0 * gamma) * inputs.tau_gamma as f64 * delta,
    );
    match kind {
        RouterKind::Srt => {
            out.insert("srt".into(), 6.0 * t_star * delta);
        }
        RouterKind::Billiard => {
            out.insert("billiard".into(), 3.0 * t_star * delta * (delta - 1.0));
            out.insert("billiard_refined".into(), 6.0 * t_star * (delta - 1.0));
        }
        RouterKind::Vdc => {
            let lg = (inputs.tokens as f64 + 1.0).log2();
            out.insert("vdc".into(), 6.0 * lg * t_star * delta);
        }
        RouterKind::Rotor => {
            let bar = delta_bar(inputs)? as f64;
            out.insert("rotor".into(), 3.0 * t_star * delta * bar);
            out.insert("rotor_refined".into(), 3.0 * t_star * bar);
        }
    }
    Ok(out)
}

/// Worst-case (`π_max`) value of every applicable bound.
pub fn theoretical_bound(kind: RouterKind, inputs: &BoundInputs, psi: Option<f64>) -> Result<BTreeMap<String, f64>> {
    let scale = inputs.pi_max / inputs.pi_min;
    Ok(bound_coefficients(kind, inputs, psi)?
        .into_iter()
        .map(|(k, c)| (k, c * scale))
        .collect())
}

/// The tightest router-specific bound reported as the headline `bound`.
pub fn primary_bound_name(kind: RouterKind) -> &'static str {
    match kind {
        RouterKind::Srt => "srt",
        RouterKind::Billiard => "billiard_refined",
        RouterKind::Vdc => "vdc",
        RouterKind::Rotor => "rotor_refined",
    }
}

/// Fills `report.bounds` from bound coefficients and the stationary
/// distribution.
pub fn check_bounds(report: &mut DiscrepancyReport, coefficients: &BTreeMap<String, f64>, pi: &Distribution) {
    let pi_min = pi.min();
    let scale = pi.max() / pi_min;
    for (name, &c) in coefficients {
        let value = c * scale;
        let per_vertex_satisfied = report
            .per_vertex_max
            .iter()
            .enumerate()
            .all(|(w, &d)| d <= c * pi[w] / pi_min + BOUND_TOL);
        report.bounds.insert(
            name.clone(),
            BoundCheck {
                value,
                satisfied: report.global_max <= value + BOUND_TOL,
                per_vertex_satisfied,
            },
        );
    }
}

/// `|LHS − RHS|` of the telescoping identity
///
/// ```text
/// χ_w^(T) − μ_w^(T) = Σ_{t<T} Σ_u Σ_{v∈𝒩(u)} (Z^(t)_{v,u} − χ^(t)_v P_{v,u}) (P^{T−t−1}_{u,w} − π_w)
/// ```
///
/// The columns `P^s_{·,w}` are built by repeated matrix-vector products and
/// the sum is accumulated in ascending `t`.
pub fn lemma1_residual(trace: &TokenTrace, p: &TransitionMatrix, pi: &Distribution, steps: usize, w: usize) -> Result<f64> {
    let flows = trace.flows.as_ref().ok_or(Error::FlowsNotRetained)?;
    if steps > flows.len() || steps >= trace.chi.len() {
        return Err(Error::invalid(format!(
            "T={steps} exceeds the {} stored steps",
            flows.len()
        )));
    }
    if w >= p.n() {
        return Err(Error::invalid(format!("vertex {w} out of range")));
    }
    let lhs = trace.chi[steps].counts()[w] as f64 - trace.mu[steps][w];

    // columns[s][u] = P^s_{u,w}
    let mut columns = Vec::with_capacity(steps);
    let mut col = vec![0.0; p.n()];
    col[w] = 1.0;
    for _ in 0..steps {
        let next = p.right_mul(&col);
        columns.push(col);
        col = next;
    }

    let pi_w = pi[w];
    let mut rhs = 0.0;
    for t in 0..steps {
        let column = &columns[steps - t - 1];
        let chi = trace.chi[t].counts();
        for v in 0..p.n() {
            let x = chi[v] as f64;
            for (&(u, puv), &z) in p.row(v).iter().zip(flows[t].slots(v)) {
                rhs += (z as f64 - x * puv) * (column[u] - pi_w);
            }
        }
    }
    Ok((lhs - rhs).abs())
}

/// `Σ_{t<T} d_tv(P^t_{v,·}, π)`, exactly, from the profile's per-row table.
pub fn dtv_sum(profile: &ChainProfile, steps: usize, v: usize) -> Result<f64> {
    if steps > profile.row_dtv.len() {
        return Err(Error::invalid(format!(
            "T={steps} exceeds profile horizon {}",
            profile.row_dtv.len()
        )));
    }
    Ok(profile.row_dtv[..steps].iter().map(|row| row[v]).sum())
}

/// `(1−γ)/(1−2γ) · τ(γ)`, the ceiling on [`dtv_sum`].
pub fn dtv_sum_bound(gamma: f64, tau_gamma: usize) -> f64 {
    (1.0 - gamma) / (1.0 - 2.0 * gamma) * tau_gamma as f64
}
