#![allow(dead_code)]

use proptest::prelude::*;
use spikecheck_core::{ModelConfig, SnnModel, SpikeTimes, WeightMatrix};

/// Weights on the dyadic grid `k / 1024`, `k` in `[lo, hi]`.
pub fn grid_weights(rows: usize, cols: usize, lo: i32, hi: i32) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((lo..=hi).prop_map(|k| f64::from(k) / 1024.0), rows * cols)
}

/// Random small network plus a valid input for it.
pub fn model_and_input(
    max_width: usize,
    max_depth: usize,
    max_tau: u32,
    lo: i32,
    hi: i32,
) -> impl Strategy<Value = (SnnModel, SpikeTimes)> {
    (
        prop::collection::vec(1..=max_width, 2..=max_depth + 1),
        1..=max_tau,
        0u32..6,
        prop::sample::select(vec![0.25, 0.5, 1.0, 1.5]),
    )
        .prop_flat_map(move |(sizes, tau, extra, theta)| {
            let depth = sizes.len() as u32 - 1;
            let steps = tau * depth + 1 + extra;
            let weights: Vec<_> = sizes
                .windows(2)
                .map(|w| grid_weights(w[0], w[1], lo, hi))
                .collect();
            let input = prop::collection::vec(0..steps, sizes[0]);
            (Just(sizes), Just(tau), Just(steps), Just(theta), weights, input)
        })
        .prop_map(|(sizes, tau, steps, theta, weights, input)| {
            let matrices = sizes
                .windows(2)
                .zip(weights)
                .map(|(w, data)| WeightMatrix::new(w[0], w[1], data).unwrap())
                .collect();
            let config = ModelConfig {
                time_steps: steps,
                tau,
                theta,
                gamma: 1.0,
                layer_sizes: sizes,
            };
            (SnnModel::new(config, matrices).unwrap(), SpikeTimes::input(input))
        })
}

/// Every point of `[0, T-1]^N` in row-major order.
pub fn grid(n: usize, steps: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..steps).map(move |t| {
                    let mut q = p.clone();
                    q.push(t);
                    q
                })
            })
            .collect();
    }
    out
}

pub fn l1(a: &[u32], b: &[u32]) -> u32 {
    a.iter().zip(b).map(|(x, y)| x.abs_diff(*y)).sum()
}

/// Straight transcription of the network rules: potentials from the sum
/// formula, flags from the disjunction over earlier steps, spike from the
/// first-crossing rule scanned over all candidate steps.
pub fn oracle_spike_times(model: &SnnModel, input: &[u32]) -> Vec<Vec<u32>> {
    let c = model.config();
    let steps = c.time_steps as usize;
    let mut layers = vec![input.to_vec()];
    for l in 1..c.layer_sizes.len() {
        let prev = layers[l - 1].clone();
        let w = model.weights_into(l);
        let mut cur = Vec::new();
        for n in 0..c.layer_sizes[l] {
            let p: Vec<f64> = (0..steps)
                .map(|t| {
                    if t == 0 {
                        0.0
                    } else {
                        let mut acc = 0.0;
                        for (m, &s) in prev.iter().enumerate() {
                            if (s as usize) <= t {
                                acc += w.get(m, n);
                            }
                        }
                        acc
                    }
                })
                .collect();
            let a = |t: usize| (0..t).any(|u| p[u] >= c.theta);
            let tau = c.tau as usize;
            let lo = tau * l;
            let mut s = steps - 1;
            let mut hits = 0;
            for t in lo..steps - 1 {
                if !a(t - tau) && p[t - tau] >= c.theta {
                    s = t;
                    hits += 1;
                }
            }
            assert!(hits <= 1, "first-crossing rule fired twice");
            cur.push(s as u32);
        }
        layers.push(cur);
    }
    layers
}
