//! Discrete-time simulation of a temporally coded integrate-and-fire network.
//!
//! Every quantity is computed exactly as the constraint system in
//! [`crate::smt`] states it, so a trace produced here is the unique solution
//! of that system for the given input:
//!
//! * `p[l][0][n] = 0` and, for `t >= 1`,
//!   `p[l][t][n] = sum_m w[m][n] * 1(s[l-1][m] <= t)` (no leak, no reset);
//! * `a[l][0][n] = false`, `a[l][t][n] = OR_{t' < t} p[l][t'][n] >= theta`;
//! * `s[l][n]` is the `t` in `[tau*l, T-2]` with
//!   `!a[l][t-tau][n] && p[l][t-tau][n] >= theta`, or `T-1` when there is none.
//!
//! Potentials are binary64 and are always summed in presynaptic index order.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Result;
use crate::model::{ModelConfig, SnnModel, SpikeTimes, WeightMatrix};

/// Full record of one forward run.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkTrace {
    pub time_steps: u32,
    pub layer_sizes: Vec<usize>,
    /// Spike times for layers `0..=L`.
    pub spike_times: Vec<SpikeTimes>,
    /// `potentials[l - 1][t * N_l + n]` for layers `1..=L`.
    pub potentials: Vec<Vec<f64>>,
    /// `flags[l - 1][t * N_l + n]`, laid out like `potentials`.
    pub flags: Vec<Vec<bool>>,
}

impl NetworkTrace {
    /// Zero-filled trace with the shape of `config`.
    pub fn empty(config: &ModelConfig) -> Self {
        let t = config.time_steps as usize;
        let sizes = &config.layer_sizes;
        Self {
            time_steps: config.time_steps,
            layer_sizes: sizes.clone(),
            spike_times: sizes
                .iter()
                .enumerate()
                .map(|(l, &n)| SpikeTimes::new(l, vec![0; n]))
                .collect(),
            potentials: sizes[1..].iter().map(|&n| vec![0.0; n * t]).collect(),
            flags: sizes[1..].iter().map(|&n| vec![false; n * t]).collect(),
        }
    }

    pub fn depth(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    #[inline]
    pub fn potential(&self, layer: usize, t: u32, n: usize) -> f64 {
        self.potentials[layer - 1][t as usize * self.layer_sizes[layer] + n]
    }

    pub fn set_potential(&mut self, layer: usize, t: u32, n: usize, value: f64) {
        let width = self.layer_sizes[layer];
        self.potentials[layer - 1][t as usize * width + n] = value;
    }

    #[inline]
    pub fn flag(&self, layer: usize, t: u32, n: usize) -> bool {
        self.flags[layer - 1][t as usize * self.layer_sizes[layer] + n]
    }

    pub fn set_flag(&mut self, layer: usize, t: u32, n: usize, value: bool) {
        let width = self.layer_sizes[layer];
        self.flags[layer - 1][t as usize * width + n] = value;
    }

    pub fn spike_time(&self, layer: usize, n: usize) -> u32 {
        self.spike_times[layer].times[n]
    }

    pub fn output_times(&self) -> &[u32] {
        &self.spike_times[self.depth()].times
    }
}

/// Readout of the output layer under time-to-first-spike decoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Prediction {
    /// Lowest-index output neuron among those with the earliest spike.
    pub label: usize,
    pub winner_time: u32,
    /// `true` iff no other output neuron spikes at `winner_time`.
    pub strict: bool,
}

impl Prediction {
    /// `label` spikes strictly before every other output neuron.
    pub fn is_strict_win_for(&self, label: usize) -> bool {
        self.strict && self.label == label
    }
}

/// Potential of neuron `n` at step `t >= 1`, summed in presynaptic order.
#[inline]
pub fn potential_at(weights: &WeightMatrix, presynaptic: &[u32], t: u32, n: usize) -> f64 {
    presynaptic
        .iter()
        .enumerate()
        .filter(|&(_, &s)| s <= t)
        .fold(0.0, |acc, (m, _)| acc + weights.get(m, n))
}

/// Run the network on `input` (layer 0 spike times).
pub fn simulate(model: &SnnModel, input: &SpikeTimes) -> Result<NetworkTrace> {
    input.check_input(model.config())?;
    let mut trace = NetworkTrace::empty(model.config());
    simulate_into(model, &input.times, &mut trace);
    Ok(trace)
}

/// Allocation-free core of [`simulate`]. `input` must already satisfy the
/// layer-0 range, and `trace` must have the model's shape.
pub fn simulate_into(model: &SnnModel, input: &[u32], trace: &mut NetworkTrace) {
    let config = model.config();
    let steps = config.time_steps;
    let theta = config.theta;
    trace.spike_times[0].times.copy_from_slice(input);

    for l in 1..=config.depth() {
        let width = config.layer_sizes[l];
        let weights = model.weights_into(l);
        let (before, after) = trace.spike_times.split_at_mut(l);
        let presynaptic = &before[l - 1].times;
        let spikes = &mut after[0].times;
        let p = &mut trace.potentials[l - 1];
        let a = &mut trace.flags[l - 1];

        p[..width].fill(0.0);
        for t in 1..steps {
            let row = &mut p[t as usize * width..(t as usize + 1) * width];
            row.fill(0.0);
            for (m, &s) in presynaptic.iter().enumerate() {
                if s <= t {
                    for (acc, w) in row.iter_mut().zip(weights.row(m)) {
                        *acc += *w;
                    }
                }
            }
        }

        a[..width].fill(false);
        for t in 1..steps as usize {
            for n in 0..width {
                a[t * width + n] = a[(t - 1) * width + n] || p[(t - 1) * width + n] >= theta;
            }
        }

        let tau = config.tau;
        let first = config.earliest_spike(l);
        let last = steps - 1;
        for (n, spike) in spikes.iter_mut().enumerate() {
            *spike = last;
            // candidates t in [tau*l, T-2]
            for t in first..last {
                let u = (t - tau) as usize * width + n;
                if !a[u] && p[u] >= theta {
                    *spike = t;
                    break;
                }
            }
        }
    }
}

/// Time-to-first-spike readout of a finished trace.
pub fn predict(trace: &NetworkTrace) -> Prediction {
    predict_times(trace.output_times())
}

/// Readout over raw output spike times; ties go to the lowest index.
pub fn predict_times(output: &[u32]) -> Prediction {
    let winner_time = output.iter().copied().min().expect("output layer is non-empty");
    let label = output.iter().position(|&t| t == winner_time).unwrap();
    let strict = output.iter().filter(|&&t| t == winner_time).count() == 1;
    Prediction {
        label,
        winner_time,
        strict,
    }
}

/// `simulate` followed by `predict`.
pub fn infer(model: &SnnModel, input: &SpikeTimes) -> Result<Prediction> {
    simulate(model, input).map(|trace| predict(&trace))
}

/// Reusable scratch buffers for repeated forward runs on one model.
#[derive(Debug, Clone)]
pub struct Simulator<'m> {
    model: &'m SnnModel,
    trace: NetworkTrace,
}

impl<'m> Simulator<'m> {
    pub fn new(model: &'m SnnModel) -> Self {
        Self {
            model,
            trace: NetworkTrace::empty(model.config()),
        }
    }

    /// Run on in-range input times and return the refreshed trace.
    pub fn run(&mut self, input: &[u32]) -> &NetworkTrace {
        simulate_into(self.model, input, &mut self.trace);
        &self.trace
    }
}
