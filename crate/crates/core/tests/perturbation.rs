mod common;

use std::collections::BTreeSet;

use common::{grid, l1};
use num_bigint::BigUint;
use proptest::prelude::*;
use spikecheck_core::perturb::{
    count_rate, count_temporal, count_temporal_with, d_ln_ratio_d_alpha, first_shift_range,
    ln_ratio_alpha, space_ratio, temporal_upper_bound, PerturbationStream,
};
use spikecheck_core::{PerturbationBudget, PerturbationMode, SpikeTimes};

fn brute_temporal(s: &[u32], steps: u32, delta: u32, mode: PerturbationMode) -> Vec<Vec<u32>> {
    grid(s.len(), steps)
        .into_iter()
        .filter(|p| mode.admits(l1(p, s), delta))
        .collect()
}

/// Number of subsets of `bits` positions with size in `1..=delta`, by
/// walking every bitmask.
fn brute_rate(bits: u32, delta: u32) -> u64 {
    (0u64..1 << bits)
        .filter(|m| (1..=delta).contains(&m.count_ones()))
        .count() as u64
}

fn shift_of(p: &[u32], s: &[u32]) -> Vec<i64> {
    p.iter().zip(s).map(|(&a, &b)| i64::from(a) - i64::from(b)).collect()
}

#[test]
fn enumeration_examples() {
    let run = |s: Vec<u32>, t, d| -> Vec<Vec<u32>> {
        PerturbationStream::new(&SpikeTimes::input(s), t, PerturbationBudget(d))
            .map(|x| x.times)
            .collect()
    };
    assert_eq!(run(vec![1], 3, 1), [[0], [1], [2]]);
    assert_eq!(run(vec![1, 1], 3, 1), [[0, 1], [1, 0], [1, 1], [1, 2], [2, 1]]);
    assert_eq!(run(vec![0], 3, 0), [[0]]);
}

#[test]
fn exhaustive_small_grid_agreement() {
    for n in 1..=3usize {
        for steps in 1..=4u32 {
            if n as u32 * steps > 12 {
                continue;
            }
            for origin in grid(n, steps) {
                for delta in 0..=3 {
                    let s = SpikeTimes::input(origin.clone());
                    for mode in [PerturbationMode::AtMost, PerturbationMode::Exactly] {
                        let mut expected = brute_temporal(&origin, steps, delta, mode);
                        expected.sort_by_key(|p| shift_of(p, &origin));
                        let got: Vec<_> = PerturbationStream::with_mode(&s, steps, PerturbationBudget(delta), mode)
                            .map(|x| x.times)
                            .collect();
                        assert_eq!(got, expected, "origin {origin:?} T={steps} D={delta} {mode:?}");
                        let count = count_temporal_with(&s, steps, PerturbationBudget(delta), mode);
                        assert_eq!(count.exact, Some(BigUint::from(expected.len())));
                    }
                }
            }
        }
    }
}

#[test]
fn rate_counts_match_flip_sets() {
    for n in 1..=4u64 {
        for steps in 1..=4u64 {
            if n * steps > 12 {
                continue;
            }
            for delta in 0..=3 {
                let c = count_rate(n, steps, PerturbationBudget(delta));
                assert_eq!(
                    c.exact_u64(),
                    Some(brute_rate((n * steps) as u32, delta)),
                    "N={n} T={steps} D={delta}"
                );
            }
        }
    }
    assert_eq!(count_rate(2, 3, PerturbationBudget(2)).exact_u64(), Some(21));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn stream_is_sound_and_ordered(
        (origin, steps) in (1u32..7).prop_flat_map(|t| (prop::collection::vec(0..t, 1..5), Just(t))),
        delta in 0u32..5,
    ) {
        let s = SpikeTimes::input(origin.clone());
        let mut stream = PerturbationStream::new(&s, steps, PerturbationBudget(delta));
        let mut prev: Option<Vec<i64>> = None;
        let mut seen = BTreeSet::new();
        while let Some(p) = stream.advance().map(<[u32]>::to_vec) {
            let p = p.as_slice();
            prop_assert!(l1(p, &origin) <= delta);
            prop_assert!(p.iter().all(|&x| x < steps));
            let shift = stream.shift().to_vec();
            prop_assert_eq!(&shift, &shift_of(p, &origin));
            if let Some(prev) = &prev {
                prop_assert!(prev < &shift);
            }
            prop_assert!(seen.insert(p.to_vec()));
            prev = Some(shift);
        }
        prop_assert!(seen.contains(&origin));
        let count = count_temporal(&s, steps, PerturbationBudget(delta));
        prop_assert_eq!(count.exact, Some(BigUint::from(seen.len())));
    }

    #[test]
    fn partitions_are_disjoint_and_complete(
        (origin, steps) in (1u32..6).prop_flat_map(|t| (prop::collection::vec(0..t, 1..4), Just(t))),
        delta in 0u32..4,
    ) {
        let s = SpikeTimes::input(origin);
        let budget = PerturbationBudget(delta);
        let full: Vec<_> = PerturbationStream::new(&s, steps, budget).collect();
        let mut joined = Vec::new();
        for d in first_shift_range(&s.times, steps, budget) {
            joined.extend(PerturbationStream::partition(&s, steps, budget, PerturbationMode::AtMost, d));
        }
        prop_assert_eq!(full, joined);
    }

    #[test]
    fn lemma_bound_dominates_exact_count(
        (origin, steps) in (1u32..=6).prop_flat_map(|t| (prop::collection::vec(0..t, 1..=6), Just(t))),
        delta in 0u32..=4,
    ) {
        let s = SpikeTimes::input(origin.clone());
        let exact = count_temporal(&s, steps, PerturbationBudget(delta));
        let bound = temporal_upper_bound(origin.len() as u64, PerturbationBudget(delta));
        prop_assert!(bound.ln_value + 1e-12 >= exact.ln_value);
    }
}

#[test]
fn lemma_bound_examples() {
    let b = temporal_upper_bound(2, PerturbationBudget(1));
    let c = count_temporal(&SpikeTimes::input(vec![1, 1]), 3, PerturbationBudget(1));
    assert!((b.ln_value - 8f64.ln()).abs() < 1e-12);
    assert_eq!(c.exact_u64(), Some(5));
    assert!(b.ln_value.exp() >= 5.0);

    let b = temporal_upper_bound(10, PerturbationBudget(1));
    assert!((b.ln_value - (10f64.ln() + 10.0 * 1.2f64.ln())).abs() < 1e-12);
    // the densest placement of 10 neurons at unit budget has 1 + 2*10 members
    let widest = count_temporal(&SpikeTimes::input(vec![5; 10]), 11, PerturbationBudget(1));
    assert_eq!(widest.exact_u64(), Some(21));
    assert!(b.ln_value > widest.ln_value);
}

#[test]
fn ratio_value_and_sign() {
    let v = space_ratio(5, 10, PerturbationBudget(1));
    assert!((v - (5f64.ln() - 10.0 * 1.2f64.ln())).abs() <= 1e-12);
    assert!(v < 0.0);
    assert_eq!(space_ratio(9, 9, PerturbationBudget(0)), 0.0);
}

#[test]
fn ratio_derivative_matches_finite_differences() {
    let h = 1e-6;
    for t in 8..=32 {
        for n in [4.0, 16.0] {
            for k in 1..=10 {
                let alpha = 0.05 * f64::from(k);
                let t = f64::from(t);
                let fd = (ln_ratio_alpha(t, n, alpha + h) - ln_ratio_alpha(t, n, alpha - h)) / (2.0 * h);
                let exact = d_ln_ratio_d_alpha(t, n, alpha);
                assert!(fd > 0.0, "T={t} N={n} alpha={alpha}: {fd}");
                assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{fd} vs {exact}");
            }
        }
    }
    // below e^2 the derivative can be negative at small alpha
    assert!(d_ln_ratio_d_alpha(5.0, 10.0, 0.01) < 0.0);
}

#[test]
fn log_ratio_grows_with_horizon_past_eight() {
    for n in [1.0, 4.0, 10.0, 16.0] {
        for k in 1..=10 {
            let alpha = 0.05 * f64::from(k);
            let mut prev = f64::NEG_INFINITY;
            for t in 8..=32 {
                let v = ln_ratio_alpha(f64::from(t), n, alpha);
                assert!(v >= prev, "N={n} alpha={alpha} T={t}");
                prev = v;
            }
        }
    }
}
