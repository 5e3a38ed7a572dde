use detwalk::analysis::{dtv_sum, dtv_sum_bound};
use detwalk::chain::{
    detailed_balance_holds, mixing_profile, point_wise_distance, stationary_distribution, total_variation,
    validate_chain, TransitionMatrix,
};
use detwalk::chains::{
    knapsack_chain, linear_extension_chain, matching_chain, random_reversible_chain, random_weighted_chain,
    MatchingInstance,
};
use itertools::Itertools;
use proptest::prelude::*;

fn random_chain(seed: u64, n: usize) -> TransitionMatrix {
    let degree = 1 + (seed as usize % (n - 1));
    if seed % 3 == 0 {
        random_weighted_chain(n, degree, seed).unwrap().0
    } else {
        random_reversible_chain(n, degree, seed, seed % 2 == 0).unwrap()
    }
}

fn dense_power(p: &TransitionMatrix, t: usize) -> Vec<Vec<f64>> {
    let n = p.n();
    let mut rows: Vec<Vec<f64>> = (0..n).map(|v| (0..n).map(|u| f64::from(u8::from(u == v))).collect()).collect();
    for _ in 0..t {
        rows = rows.iter().map(|r| p.left_mul(r)).collect();
    }
    rows
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn powers_stay_stochastic_and_reversible(seed in any::<u64>(), n in 2usize..10) {
        let p = random_chain(seed, n);
        let pi = stationary_distribution(&p).unwrap();
        let fixed = p.left_mul(pi.as_slice());
        for (a, b) in fixed.iter().zip(pi.as_slice()) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
        for t in [1, 2, 5, 20] {
            let pt = dense_power(&p, t);
            for u in 0..n {
                prop_assert!((pt[u].iter().sum::<f64>() - 1.0).abs() <= 1e-9 * t as f64);
                for v in 0..n {
                    prop_assert!((pi[u] * pt[u][v] - pi[v] * pt[v][u]).abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn profile_identities(seed in any::<u64>(), n in 2usize..9) {
        let p = random_chain(seed, n);
        let prof = mixing_profile(&p, 120).unwrap();
        let h = &prof.h;
        let hb = prof.h_bar.as_ref().unwrap();
        for t in 0..h.len() {
            prop_assert!(h[t] <= hb[t] + 1e-12);
            prop_assert!(hb[t] <= 2.0 * h[t] + 1e-12);
            if t > 0 {
                prop_assert!(h[t] <= h[t - 1] + 1e-12);
            }
        }
        for s in 0..h.len() {
            for t in 0..h.len() - s {
                prop_assert!(h[s + t] <= h[s] * hb[t] + 1e-12);
                prop_assert!(hb[s + t] <= hb[s] * hb[t] + 1e-12);
            }
        }
        for gamma in [0.1, 0.25, 0.4] {
            if let Some(tau) = prof.tau(gamma) {
                for v in 0..n {
                    for steps in [1, tau.max(1), h.len()] {
                        prop_assert!(dtv_sum(&prof, steps, v).unwrap() <= dtv_sum_bound(gamma, tau) + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn distances_are_metrics(a in prop::collection::vec(0.0f64..1.0, 5), b in prop::collection::vec(0.0f64..1.0, 5)) {
        prop_assume!(a.iter().sum::<f64>() > 0.0 && b.iter().sum::<f64>() > 0.0);
        let na: Vec<f64> = a.iter().map(|x| x / a.iter().sum::<f64>()).collect();
        let nb: Vec<f64> = b.iter().map(|x| x / b.iter().sum::<f64>()).collect();
        let tv = total_variation(&na, &nb).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&tv));
        prop_assert_eq!(tv, total_variation(&nb, &na).unwrap());
        prop_assert_eq!(total_variation(&na, &na).unwrap(), 0.0);
        prop_assert!(point_wise_distance(&na, &nb).unwrap() <= 2.0 * tv + 1e-12);
    }
}

#[test]
fn knapsack_matches_brute_force() {
    let cases: Vec<(Vec<u64>, u64)> = vec![
        (vec![1; 12], 6),
        (vec![3, 5, 2, 7, 4, 1, 6, 2, 8, 3, 9, 5, 1, 2, 4, 7], 20),
        (vec![1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096, 8192, 16384, 32768], 40_000),
        (vec![10; 16], 35),
    ];
    for (a, b) in cases {
        let (p, inst) = knapsack_chain(&a, b).unwrap();
        let brute: Vec<u64> = (0..1u64 << a.len())
            .filter(|&x| (0..a.len()).filter(|&i| x >> i & 1 == 1).map(|i| a[i]).sum::<u64>() <= b)
            .collect();
        assert_eq!(inst.states, brute);
        assert!(p.is_symmetric());
        let r = validate_chain(&p);
        assert!(r.is_ergodic() && r.reversible);
    }
}

#[test]
fn linear_extensions_match_permutation_filter() {
    let posets: Vec<(usize, Vec<(usize, usize)>)> = vec![
        (5, vec![]),
        (6, vec![(0, 2), (1, 2), (2, 5), (3, 4)]),
        (7, vec![(0, 1), (0, 2), (3, 6), (4, 5), (5, 6)]),
        (7, vec![(6, 0), (5, 1), (4, 2)]),
    ];
    for (n, rel) in posets {
        let (p, inst) = linear_extension_chain(n, &rel).unwrap();
        let brute: Vec<Vec<usize>> = (0..n)
            .permutations(n)
            .filter(|x| {
                let pos: Vec<usize> = (0..n).map(|e| x.iter().position(|&y| y == e).unwrap()).collect();
                rel.iter().all(|&(i, j)| pos[i] < pos[j])
            })
            .collect();
        assert_eq!(inst.states, brute);
        assert!(inst.states.iter().all(|x| inst.respects(x)));
        let uniform = detwalk::Distribution::uniform(p.n());
        assert!(detailed_balance_holds(&p, &uniform, 1e-12));
        assert!(validate_chain(&p).is_ergodic());
    }
}

#[test]
fn matchings_match_subset_filter() {
    let graphs: Vec<Vec<(usize, usize)>> = vec![
        (0..12).map(|i| (i, i + 1)).collect(),
        (0..12).map(|i| (i, (i + 1) % 12)).collect(),
        vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (3, 4), (4, 5), (5, 6), (6, 4), (2, 6), (1, 5)],
    ];
    for edges in graphs {
        let (p, inst) = matching_chain(&edges).unwrap();
        let oracle = MatchingInstance {
            vertices: inst.vertices,
            edges: edges.clone(),
            states: vec![],
        };
        let brute: Vec<u64> = (0..1u64 << edges.len()).filter(|&s| oracle.is_matching(s)).collect();
        assert_eq!(inst.states, brute);
        assert!(p.is_symmetric());
        assert!(validate_chain(&p).is_ergodic());
    }
}

#[test]
fn generated_profiles_decay() {
    let chains = vec![
        knapsack_chain(&[1; 6], 3).unwrap().0,
        linear_extension_chain(4, &[(0, 1)]).unwrap().0,
        matching_chain(&[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap().0,
        random_reversible_chain(15, 4, 3, true).unwrap(),
    ];
    for p in chains {
        let prof = mixing_profile(&p, 400).unwrap();
        assert!(prof.h.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!(*prof.h.last().unwrap() < 1e-3);
    }
}
