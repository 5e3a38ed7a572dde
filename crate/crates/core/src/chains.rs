//! Benchmark chains built by explicit enumeration: 0-1 knapsack solutions,
//! linear extensions of a partial order, matchings of a graph, and random
//! reversible chains for test corpora.
//!
//! Bit-vector states (knapsack, matchings) are indexed in ascending bitmask
//! order with item / edge 0 as the least significant bit. Linear extensions
//! are indexed in lexicographic order of the permutation.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::TransitionMatrix;
use crate::error::{Error, Result};

/// Largest enumerated state space.
pub const STATE_CAP: u64 = 200_000;
pub const MAX_KNAPSACK_ITEMS: usize = 20;
pub const MAX_POSET_SIZE: usize = 8;
pub const MAX_MATCHING_EDGES: usize = 16;

fn rows_with_self_loops(n: usize, mut off: Vec<Vec<(usize, f64)>>) -> Result<TransitionMatrix> {
    debug_assert_eq!(off.len(), n);
    for (x, row) in off.iter_mut().enumerate() {
        let out: f64 = row.iter().map(|&(_, p)| p).sum();
        row.push((x, 1.0 - out));
    }
    TransitionMatrix::from_rows(off)
}

/// 0-1 knapsack instance `Σ a_i x_i ≤ b` with its enumerated solutions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnapsackInstance {
    pub a: Vec<u64>,
    pub b: u64,
    /// Solutions as bitmasks, ascending.
    pub states: Vec<u64>,
}

impl KnapsackInstance {
    pub fn new(a: Vec<u64>, b: u64) -> Result<Self> {
        if a.is_empty() || a.len() > MAX_KNAPSACK_ITEMS {
            return Err(Error::invalid(format!(
                "knapsack needs 1..={MAX_KNAPSACK_ITEMS} items, got {}",
                a.len()
            )));
        }
        if b == 0 || a.contains(&0) {
            return Err(Error::invalid("knapsack weights and capacity must be positive"));
        }
        let count = count_knapsack(&a, a.len(), b);
        if count > STATE_CAP {
            return Err(Error::CapExceeded { count, cap: STATE_CAP });
        }
        let mut states = Vec::with_capacity(count as usize);
        enumerate_knapsack(&a, a.len(), b, 0, &mut states);
        Ok(Self { a, b, states })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn index_of(&self, x: u64) -> Option<usize> {
        self.states.binary_search(&x).ok()
    }

    pub fn weight(&self, x: u64) -> u64 {
        (0..self.n()).filter(|&i| x >> i & 1 == 1).map(|i| self.a[i]).sum()
    }

    /// `x_1 x_2 … x_n`.
    pub fn labels(&self) -> Vec<String> {
        self.states
            .iter()
            .map(|&x| (0..self.n()).map(|i| if x >> i & 1 == 1 { '1' } else { '0' }).collect())
            .collect()
    }
}

fn count_knapsack(a: &[u64], k: usize, room: u64) -> u64 {
    if k == 0 {
        return 1;
    }
    let without = count_knapsack(a, k - 1, room);
    if a[k - 1] <= room {
        without + count_knapsack(a, k - 1, room - a[k - 1])
    } else {
        without
    }
}

// items k-1 down to 0; excluding before including yields ascending masks
fn enumerate_knapsack(a: &[u64], k: usize, room: u64, prefix: u64, out: &mut Vec<u64>) {
    if k == 0 {
        out.push(prefix);
        return;
    }
    enumerate_knapsack(a, k - 1, room, prefix, out);
    if a[k - 1] <= room {
        enumerate_knapsack(a, k - 1, room - a[k - 1], prefix | 1 << (k - 1), out);
    }
}

/// Lazy single-flip walk on knapsack solutions: each feasible neighbor at
/// Hamming distance one gets `1/2n`, the rest stays put.
pub fn knapsack_chain(a: &[u64], b: u64) -> Result<(TransitionMatrix, KnapsackInstance)> {
    let inst = KnapsackInstance::new(a.to_vec(), b)?;
    let n = inst.n();
    let q = 1.0 / (2 * n) as f64;
    let off = inst
        .states
        .iter()
        .map(|&x| {
            let mut row: Vec<(usize, f64)> = (0..n)
                .filter_map(|i| inst.index_of(x ^ 1 << i))
                .map(|y| (y, q))
                .collect();
            row.sort_by_key(|&(y, _)| y);
            row
        })
        .collect();
    Ok((rows_with_self_loops(inst.states.len(), off)?, inst))
}

/// Finite poset on `{0, …, n−1}` with its linear extensions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosetInstance {
    pub n: usize,
    /// Pairs `(i, j)` meaning `i ⪯ j`.
    pub relations: Vec<(usize, usize)>,
    /// Linear extensions, lexicographically ordered.
    pub states: Vec<Vec<usize>>,
}

impl PosetInstance {
    pub fn new(n: usize, relations: Vec<(usize, usize)>) -> Result<Self> {
        if n == 0 || n > MAX_POSET_SIZE {
            return Err(Error::invalid(format!("poset size must be 1..={MAX_POSET_SIZE}, got {n}")));
        }
        let mut preds = vec![0u32; n];
        for &(i, j) in &relations {
            if i >= n || j >= n {
                return Err(Error::invalid(format!("relation {i}<{j} outside ground set of size {n}")));
            }
            if i != j {
                preds[j] |= 1 << i;
            }
        }
        if !is_acyclic(&preds) {
            return Err(Error::CyclicOrder);
        }
        let mut states = Vec::new();
        let mut current = Vec::with_capacity(n);
        enumerate_extensions(&preds, 0, &mut current, &mut states);
        Ok(Self { n, relations, states })
    }

    pub fn index_of(&self, x: &[usize]) -> Option<usize> {
        self.states.binary_search_by(|s| s.as_slice().cmp(x)).ok()
    }

    pub fn respects(&self, x: &[usize]) -> bool {
        let mut pos = vec![0; self.n];
        for (k, &e) in x.iter().enumerate() {
            pos[e] = k;
        }
        self.relations.iter().all(|&(i, j)| pos[i] <= pos[j])
    }

    /// Elements listed 1-based, e.g. `1 3 2 4`.
    pub fn labels(&self) -> Vec<String> {
        self.states
            .iter()
            .map(|x| x.iter().map(|e| (e + 1).to_string()).collect::<Vec<_>>().join(" "))
            .collect()
    }
}

fn is_acyclic(preds: &[u32]) -> bool {
    let mut placed = 0u32;
    for _ in 0..preds.len() {
        match (0..preds.len()).find(|&e| placed >> e & 1 == 0 && preds[e] & !placed == 0) {
            Some(e) => placed |= 1 << e,
            None => return false,
        }
    }
    true
}

fn enumerate_extensions(preds: &[u32], placed: u32, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if current.len() == preds.len() {
        out.push(current.clone());
        return;
    }
    for e in 0..preds.len() {
        if placed >> e & 1 == 0 && preds[e] & !placed == 0 {
            current.push(e);
            enumerate_extensions(preds, placed | 1 << e, current, out);
            current.pop();
        }
    }
}

/// `F(p) = p(n−p) / ((n³−n)/6)` for `p ∈ {1, …, n−1}`; sums to one.
pub fn transposition_weight(n: usize, p: usize) -> f64 {
    let n = n as f64;
    let p = p as f64;
    p * (n - p) / ((n * n * n - n) / 6.0)
}

/// Adjacent-transposition walk on linear extensions: swapping positions
/// `p, p+1` (1-based) has probability `F(p)/2` when the result is still an
/// extension.
pub fn linear_extension_chain(n: usize, relations: &[(usize, usize)]) -> Result<(TransitionMatrix, PosetInstance)> {
    let inst = PosetInstance::new(n, relations.to_vec())?;
    let off = inst
        .states
        .iter()
        .map(|x| {
            let mut row = Vec::new();
            for p in 1..n {
                let mut y = x.clone();
                y.swap(p - 1, p);
                if let Some(k) = inst.index_of(&y) {
                    row.push((k, transposition_weight(n, p) / 2.0));
                }
            }
            row.sort_by_key(|&(k, _)| k);
            row
        })
        .collect();
    Ok((rows_with_self_loops(inst.states.len(), off)?, inst))
}

/// Simple graph with its matchings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingInstance {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
    /// Matchings as edge bitmasks, ascending.
    pub states: Vec<u64>,
}

impl MatchingInstance {
    pub fn new(edges: Vec<(usize, usize)>) -> Result<Self> {
        if edges.len() > MAX_MATCHING_EDGES {
            return Err(Error::invalid(format!(
                "at most {MAX_MATCHING_EDGES} edges supported, got {}",
                edges.len()
            )));
        }
        for (k, &(u, v)) in edges.iter().enumerate() {
            if u == v {
                return Err(Error::invalid(format!("edge {u}-{v} is a loop")));
            }
            if edges[..k].iter().any(|&(x, y)| (x, y) == (u, v) || (x, y) == (v, u)) {
                return Err(Error::invalid(format!("edge {u}-{v} listed twice")));
            }
        }
        let vertices = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
        let mut states = Vec::new();
        let mut used = vec![false; vertices];
        enumerate_matchings(&edges, edges.len(), 0, &mut used, &mut states);
        if states.len() as u64 > STATE_CAP {
            return Err(Error::CapExceeded {
                count: states.len() as u64,
                cap: STATE_CAP,
            });
        }
        Ok(Self { vertices, edges, states })
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn index_of(&self, s: u64) -> Option<usize> {
        self.states.binary_search(&s).ok()
    }

    pub fn is_matching(&self, s: u64) -> bool {
        let mut used = vec![false; self.vertices];
        for (k, &(u, v)) in self.edges.iter().enumerate() {
            if s >> k & 1 == 1 {
                if used[u] || used[v] {
                    return false;
                }
                used[u] = true;
                used[v] = true;
            }
        }
        true
    }

    /// `{0-1,2-3}`.
    pub fn labels(&self) -> Vec<String> {
        self.states
            .iter()
            .map(|&s| {
                let parts: Vec<String> = (0..self.m())
                    .filter(|&k| s >> k & 1 == 1)
                    .map(|k| format!("{}-{}", self.edges[k].0, self.edges[k].1))
                    .collect();
                format!("{{{}}}", parts.join(","))
            })
            .collect()
    }

    /// The state reached by proposing edge `e` from matching `s`, or `None`
    /// when both endpoints are covered by other edges.
    pub fn propose(&self, s: u64, e: usize) -> Option<u64> {
        if s >> e & 1 == 1 {
            return Some(s & !(1 << e));
        }
        let (u, v) = self.edges[e];
        let cover = |w: usize| (0..self.m()).find(|&k| s >> k & 1 == 1 && (self.edges[k].0 == w || self.edges[k].1 == w));
        match (cover(u), cover(v)) {
            (None, None) => Some(s | 1 << e),
            (Some(k), None) | (None, Some(k)) => Some((s | 1 << e) & !(1 << k)),
            (Some(_), Some(_)) => None,
        }
    }
}

fn enumerate_matchings(edges: &[(usize, usize)], k: usize, prefix: u64, used: &mut [bool], out: &mut Vec<u64>) {
    if out.len() as u64 > STATE_CAP {
        return;
    }
    if k == 0 {
        out.push(prefix);
        return;
    }
    enumerate_matchings(edges, k - 1, prefix, used, out);
    let (u, v) = edges[k - 1];
    if !used[u] && !used[v] {
        used[u] = true;
        used[v] = true;
        enumerate_matchings(edges, k - 1, prefix | 1 << (k - 1), used, out);
        used[u] = false;
        used[v] = false;
    }
}

/// Lazy edge-proposal walk on matchings: each edge is proposed with
/// probability `1/2m` and applied as removal, insertion, or slide.
pub fn matching_chain(edges: &[(usize, usize)]) -> Result<(TransitionMatrix, MatchingInstance)> {
    let inst = MatchingInstance::new(edges.to_vec())?;
    let m = inst.m();
    let off = inst
        .states
        .iter()
        .map(|&s| {
            let q = 1.0 / (2 * m) as f64;
            let mut row: Vec<(usize, f64)> = (0..m)
                .filter_map(|e| inst.propose(s, e))
                .map(|t| (inst.index_of(t).expect("proposal stays a matching"), q))
                .collect();
            row.sort_by_key(|&(k, _)| k);
            row
        })
        .collect();
    Ok((rows_with_self_loops(inst.states.len(), off)?, inst))
}

fn random_graph(n: usize, degree: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
    let target = (n * degree / 2).max(n - 1).min(n * (n - 1) / 2);
    let mut missing: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|e| !edges.contains(e))
        .collect();
    missing.shuffle(rng);
    edges.extend(missing.into_iter().take(target - edges.len()));
    edges.sort_unstable();
    edges
}

fn check_random_args(n: usize, degree: usize) -> Result<()> {
    if n < 2 || degree == 0 || degree >= n {
        return Err(Error::invalid(format!("need n >= 2 and 1 <= degree < n, got n={n}, degree={degree}")));
    }
    Ok(())
}

/// Connected random graph with about `n·degree/2` edges turned into a
/// symmetric lazy walk `P(u,v) = w_uv / 2D`, `D` the largest weighted degree.
/// With `irrational`, each edge weight is drawn from `{1, √2}`.
pub fn random_reversible_chain(n: usize, degree: usize, seed: u64, irrational: bool) -> Result<TransitionMatrix> {
    check_random_args(n, degree)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = random_graph(n, degree, &mut rng);
    let weights: Vec<f64> = edges
        .iter()
        .map(|_| if irrational && rng.gen_bool(0.5) { std::f64::consts::SQRT_2 } else { 1.0 })
        .collect();
    let mut wdeg = vec![0.0; n];
    for (&(u, v), &w) in edges.iter().zip(&weights) {
        wdeg[u] += w;
        wdeg[v] += w;
    }
    let scale = 2.0 * wdeg.iter().copied().fold(0.0, f64::max);
    let mut off = vec![Vec::new(); n];
    for (&(u, v), &w) in edges.iter().zip(&weights) {
        off[u].push((v, w / scale));
        off[v].push((u, w / scale));
    }
    for row in &mut off {
        row.sort_by_key(|&(v, _)| v);
    }
    rows_with_self_loops(n, off)
}

/// Metropolis walk on a random connected graph targeting vertex weights
/// drawn from `{1, 2, 3}`: `P(u,v) = min(1, w_v/w_u) / 2d`, `d` the maximum
/// degree. Reversible with a non-uniform stationary distribution; all
/// entries are rational.
pub fn random_weighted_chain(n: usize, degree: usize, seed: u64) -> Result<(TransitionMatrix, Vec<u32>)> {
    check_random_args(n, degree)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = random_graph(n, degree, &mut rng);
    let weights: Vec<u32> = (0..n).map(|_| rng.gen_range(1..=3)).collect();
    let mut deg = vec![0usize; n];
    for &(u, v) in &edges {
        deg[u] += 1;
        deg[v] += 1;
    }
    let d = 2.0 * *deg.iter().max().unwrap() as f64;
    let mut off = vec![Vec::new(); n];
    for &(u, v) in &edges {
        let (wu, wv) = (weights[u] as f64, weights[v] as f64);
        off[u].push((v, (wv / wu).min(1.0) / d));
        off[v].push((u, (wu / wv).min(1.0) / d));
    }
    for row in &mut off {
        row.sort_by_key(|&(v, _)| v);
    }
    Ok((rows_with_self_loops(n, off)?, weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{stationary_distribution, validate_chain};

    #[test]
    fn knapsack_two_items() {
        let (p, inst) = knapsack_chain(&[1, 1], 1).unwrap();
        assert_eq!(inst.labels(), vec!["00", "10", "01"]);
        assert_eq!(p.to_dense(), vec![
            vec![0.5, 0.25, 0.25],
            vec![0.25, 0.75, 0.0],
            vec![0.25, 0.0, 0.75],
        ]);
    }

    #[test]
    fn knapsack_trivial_cases() {
        let (p, _) = knapsack_chain(&[1], 1).unwrap();
        assert_eq!(p.to_dense(), vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        let (p, inst) = knapsack_chain(&[1, 2, 3], 6).unwrap();
        assert_eq!(inst.states, (0..8).collect::<Vec<_>>());
        for x in 0..8 {
            assert_eq!(p.get(x, x), 0.5);
        }
    }

    #[test]
    fn knapsack_cap() {
        assert!(matches!(
            knapsack_chain(&[1; 18], 18),
            Err(Error::CapExceeded { count: 262_144, .. })
        ));
        assert!(knapsack_chain(&[1; 21], 1).is_err());
        assert!(knapsack_chain(&[0, 1], 1).is_err());
    }

    #[test]
    fn linext_antichain_three() {
        let (p, inst) = linear_extension_chain(3, &[]).unwrap();
        assert_eq!(inst.states.len(), 6);
        assert_eq!(inst.states[0], vec![0, 1, 2]);
        assert_eq!(transposition_weight(3, 1), 0.5);
        assert_eq!(transposition_weight(3, 2), 0.5);
        for x in 0..6 {
            assert_eq!(p.get(x, x), 0.5);
            assert_eq!(p.degree(x), 3);
            for &(y, q) in p.row(x) {
                if y != x {
                    assert_eq!(q, 0.25);
                }
            }
        }
    }

    #[test]
    fn linext_total_order_and_cycle() {
        let (p, inst) = linear_extension_chain(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(inst.states, vec![vec![0, 1, 2, 3]]);
        assert_eq!(p.to_dense(), vec![vec![1.0]]);
        let (p, _) = linear_extension_chain(1, &[]).unwrap();
        assert_eq!(p.to_dense(), vec![vec![1.0]]);
        assert!(matches!(
            linear_extension_chain(3, &[(0, 1), (1, 2), (2, 0)]),
            Err(Error::CyclicOrder)
        ));
    }

    #[test]
    fn transposition_weights_sum_to_one() {
        for n in 2..=8 {
            let s: f64 = (1..n).map(|p| transposition_weight(n, p)).sum();
            assert!((s - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn matching_small_graphs() {
        let (p, inst) = matching_chain(&[(0, 1), (1, 2)]).unwrap();
        assert_eq!(inst.labels(), vec!["{}", "{0-1}", "{1-2}"]);
        assert_eq!(p.to_dense(), vec![
            vec![0.5, 0.25, 0.25],
            vec![0.25, 0.5, 0.25],
            vec![0.25, 0.25, 0.5],
        ]);
        let (p, _) = matching_chain(&[(0, 1)]).unwrap();
        assert_eq!(p.to_dense(), vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        let (p, _) = matching_chain(&[]).unwrap();
        assert_eq!(p.to_dense(), vec![vec![1.0]]);
    }

    #[test]
    fn matching_blocked_proposal() {
        // path 0-1-2-3: with {0-1, 2-3} both endpoints of 1-2 are covered
        let inst = MatchingInstance::new(vec![(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(inst.propose(0b101, 1), None);
        assert_eq!(inst.propose(0b001, 1), Some(0b010));
        assert_eq!(inst.propose(0b001, 2), Some(0b101));
        assert_eq!(inst.propose(0b001, 0), Some(0));
    }

    #[test]
    fn random_two_state_is_fair_coin() {
        for irrational in [false, true] {
            let p = random_reversible_chain(2, 1, 9, irrational).unwrap();
            assert_eq!(p.to_dense(), vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        }
    }

    #[test]
    fn random_chains_are_ergodic_and_reproducible() {
        for seed in 0..20 {
            let p = random_reversible_chain(12, 3, seed, seed % 2 == 0).unwrap();
            assert!(p.is_symmetric());
            let r = validate_chain(&p);
            assert!(r.is_ergodic() && r.reversible, "seed {seed}");
            assert_eq!(p, random_reversible_chain(12, 3, seed, seed % 2 == 0).unwrap());

            let (q, w) = random_weighted_chain(10, 3, seed).unwrap();
            let r = validate_chain(&q);
            assert!(r.is_ergodic() && r.reversible, "seed {seed}");
            let pi = stationary_distribution(&q).unwrap();
            let total: u32 = w.iter().sum();
            for (v, &wv) in w.iter().enumerate() {
                assert!((pi[v] - wv as f64 / total as f64).abs() < 1e-9);
            }
        }
        assert!(random_reversible_chain(3, 3, 0, false).is_err());
    }
}
