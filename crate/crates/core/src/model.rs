//! Network description: configuration, weights and per-layer spike times.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Global parameters of a layered integrate-and-fire network.
///
/// `layer_sizes[0]` is the input layer. Time is discrete, `0..time_steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    /// Number of simulated time steps `T`.
    pub time_steps: u32,
    /// Synaptic delay in time steps.
    pub tau: u32,
    /// Firing threshold.
    pub theta: f64,
    /// Leak factor. Only `1.0` (no leak) is supported.
    pub gamma: f64,
    pub layer_sizes: Vec<usize>,
}

impl ModelConfig {
    /// Number of non-input layers `L`.
    pub fn depth(&self) -> usize {
        self.layer_sizes.len().saturating_sub(1)
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes.first().copied().unwrap_or(0)
    }

    pub fn output_size(&self) -> usize {
        self.layer_sizes.last().copied().unwrap_or(0)
    }

    /// Last valid time step, `T - 1`.
    pub fn last_step(&self) -> u32 {
        self.time_steps - 1
    }

    /// Earliest step at which a neuron of `layer` may spike (`tau * layer`).
    pub fn earliest_spike(&self, layer: usize) -> u32 {
        self.tau * layer as u32
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least an input and an output layer, got {} layer(s)",
                self.layer_sizes.len()
            )));
        }
        if let Some(l) = self.layer_sizes.iter().position(|&n| n == 0) {
            return Err(Error::InvalidConfig(format!("layer {l} is empty")));
        }
        if self.tau == 0 {
            return Err(Error::InvalidConfig("synaptic delay must be positive".into()));
        }
        let needed = (self.tau as u64) * (self.depth() as u64) + 1;
        if (self.time_steps as u64) < needed {
            return Err(Error::InvalidConfig(format!(
                "horizon T={} too short for {} layers with delay {} (need T >= {needed})",
                self.time_steps,
                self.depth(),
                self.tau
            )));
        }
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "threshold must be a positive finite number, got {}",
                self.theta
            )));
        }
        if self.gamma != 1.0 {
            return Err(Error::InvalidConfig(format!(
                "only non-leaky neurons (gamma = 1) are supported, got gamma = {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// Dense weight matrix between two adjacent layers, stored row-major:
/// `get(m, n)` is the weight from presynaptic neuron `m` to postsynaptic
/// neuron `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl WeightMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidConfig(format!(
                "weight buffer has {} entries, expected {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: alloc::vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidConfig("ragged weight rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.data[m * self.cols + n]
    }

    pub fn set(&mut self, m: usize, n: usize, w: f64) {
        self.data[m * self.cols + n] = w;
    }

    #[inline]
    pub fn row(&self, m: usize) -> &[f64] {
        &self.data[m * self.cols..(m + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols.max(1)).map(<[f64]>::to_vec).collect()
    }
}

/// A validated fully connected network.
#[derive(Debug, Clone, PartialEq)]
pub struct SnnModel {
    config: ModelConfig,
    weights: Vec<WeightMatrix>,
}

impl SnnModel {
    pub fn new(config: ModelConfig, weights: Vec<WeightMatrix>) -> Result<Self> {
        config.validate()?;
        if weights.len() != config.depth() {
            return Err(Error::InvalidConfig(format!(
                "{} weight matrices for {} layers",
                weights.len(),
                config.depth()
            )));
        }
        for (i, w) in weights.iter().enumerate() {
            let (rows, cols) = (config.layer_sizes[i], config.layer_sizes[i + 1]);
            if w.rows != rows || w.cols != cols {
                return Err(Error::ShapeMismatch {
                    layer: i,
                    rows,
                    cols,
                    found_rows: w.rows,
                    found_cols: w.cols,
                });
            }
            if let Some(k) = w.data.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFiniteWeight {
                    layer: i,
                    row: k / cols,
                    col: k % cols,
                });
            }
        }
        Ok(Self { config, weights })
    }

    /// Model with every weight equal to zero.
    pub fn zeros(config: ModelConfig) -> Result<Self> {
        let weights = config
            .layer_sizes
            .windows(2)
            .map(|w| WeightMatrix::zeros(w[0], w[1]))
            .collect();
        Self::new(config, weights)
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    /// Weights into layer `layer` (1-based), i.e. matrix `layer - 1`.
    pub fn weights_into(&self, layer: usize) -> &WeightMatrix {
        &self.weights[layer - 1]
    }

    pub fn weights(&self) -> &[WeightMatrix] {
        &self.weights
    }

    /// SHA-256 over the configuration and the bit patterns of all weights.
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"snn-model/v1");
        h.update(self.config.time_steps.to_le_bytes());
        h.update(self.config.tau.to_le_bytes());
        h.update(self.config.theta.to_bits().to_le_bytes());
        h.update(self.config.gamma.to_bits().to_le_bytes());
        h.update((self.config.layer_sizes.len() as u64).to_le_bytes());
        for &n in &self.config.layer_sizes {
            h.update((n as u64).to_le_bytes());
        }
        for w in &self.weights {
            for x in &w.data {
                h.update(x.to_bits().to_le_bytes());
            }
        }
        h.finalize().into()
    }

    /// First 16 hex digits of [`SnnModel::digest`].
    pub fn short_hash(&self) -> String {
        short_hex(&self.digest())
    }
}

/// First-spike times of every neuron in one layer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpikeTimes {
    pub layer: usize,
    pub times: Vec<u32>,
}

impl SpikeTimes {
    pub fn new(layer: usize, times: Vec<u32>) -> Self {
        Self { layer, times }
    }

    pub fn input(times: Vec<u32>) -> Self {
        Self { layer: 0, times }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Check size and the `[tau * layer, T - 1]` range against `config`.
    pub fn check(&self, config: &ModelConfig) -> Result<()> {
        let expected = *config
            .layer_sizes
            .get(self.layer)
            .ok_or_else(|| Error::InvalidConfig(format!("no layer {}", self.layer)))?;
        if self.times.len() != expected {
            return Err(Error::InputLength {
                layer: self.layer,
                expected,
                found: self.times.len(),
            });
        }
        let lo = config.earliest_spike(self.layer);
        let hi = config.last_step();
        for (neuron, &time) in self.times.iter().enumerate() {
            if time < lo || time > hi {
                return Err(Error::SpikeTimeOutOfRange {
                    layer: self.layer,
                    neuron,
                    time,
                    lo,
                    hi,
                });
            }
        }
        Ok(())
    }

    /// Check that this is a valid input-layer assignment for `config`.
    pub fn check_input(&self, config: &ModelConfig) -> Result<()> {
        if self.layer != 0 {
            return Err(Error::WrongLayer {
                expected: 0,
                found: self.layer,
            });
        }
        self.check(config)
    }

    /// Sum of absolute per-neuron differences.
    pub fn l1_distance(&self, other: &SpikeTimes) -> u64 {
        self.times
            .iter()
            .zip(&other.times)
            .map(|(&a, &b)| u64::from(a.abs_diff(b)))
            .sum()
    }

    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"spike-times/v1");
        h.update((self.layer as u64).to_le_bytes());
        for t in &self.times {
            h.update(t.to_le_bytes());
        }
        h.finalize().into()
    }

    pub fn short_hash(&self) -> String {
        short_hex(&self.digest())
    }
}

fn short_hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(16);
    for b in &bytes[..8] {
        let _ = write!(s, "{b:02x}");
    }
    s
}
