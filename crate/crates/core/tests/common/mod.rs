#![allow(dead_code)]

use detwalk::router::{RouterKind, RouterState};
use rand::Rng;

/// Row from positive integer weights; with `irrational`, odd positions are
/// scaled by √2 before normalizing.
pub fn row_from_weights(weights: &[u32], irrational: bool) -> Vec<f64> {
    let raw: Vec<f64> = weights
        .iter()
        .enumerate()
        .map(|(k, &w)| if irrational && k % 2 == 1 { w as f64 * std::f64::consts::SQRT_2 } else { w as f64 })
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.iter().map(|x| x / sum).collect()
}

/// Rational row `m_k / Σm` with `Σm = period`.
pub fn rational_row<R: Rng>(rng: &mut R, degree: usize, period: u32) -> Vec<f64> {
    assert!(degree as u32 <= period);
    let mut mult = vec![1u32; degree];
    for _ in 0..period - degree as u32 {
        mult[rng.gen_range(0..degree)] += 1;
    }
    mult.iter().map(|&m| m as f64 / period as f64).collect()
}

pub fn indexed(probs: &[f64]) -> Vec<(usize, f64)> {
    probs.iter().copied().enumerate().collect()
}

/// `prefix[k][z] = I_k[0, z)` for `z ≤ z_max`, plus the emitted sequence.
pub fn prefix_counts(kind: RouterKind, probs: &[f64], z_max: usize) -> (Vec<Vec<u32>>, Vec<usize>) {
    let mut r = RouterState::new(kind, 0, &indexed(probs)).unwrap();
    let mut prefix = vec![vec![0u32; z_max + 1]; probs.len()];
    let mut seq = Vec::with_capacity(z_max);
    for z in 0..z_max {
        let u = r.next().unwrap();
        seq.push(u);
        for (k, pk) in prefix.iter_mut().enumerate() {
            pk[z + 1] = pk[z] + u32::from(k == u);
        }
    }
    (prefix, seq)
}

pub fn deviation(prefix: &[Vec<u32>], probs: &[f64], z: usize, z2: usize, k: usize) -> f64 {
    ((prefix[k][z2] - prefix[k][z]) as f64 - (z2 - z) as f64 * probs[k]).abs()
}
