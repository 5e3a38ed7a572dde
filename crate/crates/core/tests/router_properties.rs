mod common;

use common::{deviation, indexed, prefix_counts, row_from_weights};
use detwalk::router::{interval_count, van_der_corput, vdc_window_count, Router, RouterKind, RouterState};
use proptest::prelude::*;

fn weights() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(1u32..20, 1..=8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn srt_prefix_below_one(w in weights(), irrational in any::<bool>()) {
        let probs = row_from_weights(&w, irrational);
        let (prefix, _) = prefix_counts(RouterKind::Srt, &probs, 3000);
        for z in 1..=3000 {
            for k in 0..probs.len() {
                prop_assert!(deviation(&prefix, &probs, 0, z, k) < 1.0, "z={z} k={k}");
            }
        }
        for z2 in 1..=300 {
            for z in 0..z2 {
                for k in 0..probs.len() {
                    prop_assert!(deviation(&prefix, &probs, z, z2, k) < 2.0);
                }
            }
        }
    }

    #[test]
    fn billiard_window_bound(w in weights(), irrational in any::<bool>()) {
        let probs = row_from_weights(&w, irrational);
        let d = probs.len() as f64;
        let (prefix, _) = prefix_counts(RouterKind::Billiard, &probs, 400);
        for z2 in 1..=400 {
            for z in 0..z2 {
                for (k, p) in probs.iter().enumerate() {
                    prop_assert!(deviation(&prefix, &probs, z, z2, k) <= 1.0 + (d - 2.0) * p + 1e-9);
                }
            }
        }
    }

    #[test]
    fn vdc_prefix_and_window(w in weights(), irrational in any::<bool>()) {
        let probs = row_from_weights(&w, irrational);
        let (prefix, _) = prefix_counts(RouterKind::Vdc, &probs, 400);
        for z2 in 1..=400usize {
            for k in 0..probs.len() {
                prop_assert!(deviation(&prefix, &probs, 0, z2, k) <= ((z2 + 1) as f64).log2() + 1e-9);
            }
            for z in 0..z2 {
                let lim = 2.0 * ((z2 - z + 1) as f64).log2() + 1e-9;
                for k in 0..probs.len() {
                    prop_assert!(deviation(&prefix, &probs, z, z2, k) <= lim);
                }
            }
        }
    }

    #[test]
    fn rotor_window_and_period(w in prop::collection::vec(1u32..6, 1..=6)) {
        let period: u32 = w.iter().sum();
        let probs: Vec<f64> = w.iter().map(|&m| m as f64 / period as f64).collect();
        let r = RouterState::new(RouterKind::Rotor, 0, &indexed(&probs)).unwrap();
        prop_assert_eq!(r.period(), Some(period as u64 / w.iter().fold(0, |g, &m| gcd(g, m)) as u64));
        let bar = r.period().unwrap() as usize;
        let (prefix, seq) = prefix_counts(RouterKind::Rotor, &probs, 300);
        for i in 0..300 - bar {
            prop_assert_eq!(seq[i], seq[i + bar]);
        }
        for z2 in 1..=300 {
            for z in 0..z2 {
                for (k, p) in probs.iter().enumerate() {
                    prop_assert!(deviation(&prefix, &probs, z, z2, k) <= bar as f64 * p + 1e-9);
                }
            }
        }
    }

    #[test]
    fn counts_track_serves(w in weights(), irrational in any::<bool>(), kind_idx in 0usize..3, n in 1usize..500) {
        let kind = [RouterKind::Srt, RouterKind::Billiard, RouterKind::Vdc][kind_idx];
        let probs = row_from_weights(&w, irrational);
        let mut r = RouterState::new(kind, 0, &indexed(&probs)).unwrap();
        for i in 1..=n as u64 {
            r.next().unwrap();
            prop_assert_eq!(r.counts().iter().sum::<u64>(), i);
            prop_assert_eq!(r.served(), i);
        }
    }

    #[test]
    fn incremental_matches_replay(w in weights(), kind_idx in 0usize..4, z in 0u64..200, len in 1u64..200) {
        let kind = RouterKind::ALL[kind_idx];
        let probs = row_from_weights(&w, false);
        let row = indexed(&probs);
        let (prefix, _) = prefix_counts(kind, &probs, (z + len) as usize);
        for k in 0..probs.len() {
            let expect = prefix[k][(z + len) as usize] - prefix[k][z as usize];
            prop_assert_eq!(interval_count(kind, &row, z, z + len, k).unwrap(), expect as u64);
        }
    }

    #[test]
    fn vdc_recursion(i in any::<u64>(), k in 0u32..64) {
        let lo = van_der_corput(i % (1u64 << k));
        let hi = van_der_corput(i >> k) / (1u64 << k) as f64;
        prop_assert!((0.0..1.0).contains(&van_der_corput(i)));
        // exact when the 53-bit truncation keeps every digit
        if i < 1 << 53 {
            prop_assert_eq!(van_der_corput(i), lo + hi);
        }
    }

    #[test]
    fn vdc_shift(k in 0u32..40, a in any::<u64>()) {
        let alpha = a % (1u64 << k);
        prop_assert_eq!(van_der_corput((1u64 << k) + alpha), 0.5f64.powi(k as i32 + 1) + van_der_corput(alpha));
    }

    #[test]
    fn vdc_window_deviation(z0 in 0u64..1_000_000, z in 1u64..3000, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        prop_assume!(a != b);
        let (x, y) = (a.min(b), a.max(b));
        let count = vdc_window_count(z0, z, x, y).unwrap() as f64;
        let bound = 2.0 * (z as f64).log2().floor() + 2.0;
        prop_assert!((count - z as f64 * (y - x)).abs() < bound);
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 { a } else { gcd(b, a % b) }
}

#[test]
fn dyadic_stratification_small() {
    for k in 0..8u32 {
        let n = 1u64 << k;
        for z in 0..300u64 {
            let mut hit = vec![0u32; n as usize];
            for i in z..z + n {
                hit[(van_der_corput(i) * n as f64) as usize] += 1;
            }
            assert!(hit.iter().all(|&h| h == 1), "k={k} z={z}");
        }
    }
}
