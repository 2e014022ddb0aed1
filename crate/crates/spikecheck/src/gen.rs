//! Seeded random models and inputs.
//!
//! All randomness comes from a ChaCha8 stream seeded with
//! `ChaCha8Rng::seed_from_u64(seed)`; integers are drawn with `rand`'s
//! uniform range sampler. Weights are filled matrix by matrix in row-major
//! order, so a given seed yields the same model on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spikecheck_core::{ModelConfig, SnnModel, SpikeTimes, WeightMatrix};

use crate::error::{Error, Result};

/// Shape and weight distribution of a generated model. Weights are
/// `k * 2^-granularity` with `k` uniform in `[k_min, k_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub layer_sizes: Vec<usize>,
    pub time_steps: u32,
    pub tau: u32,
    pub theta: f64,
    pub granularity: u32,
    pub k_min: i64,
    pub k_max: i64,
}

impl GenSpec {
    /// `tau = 1`, `theta = 1.0`, weights on the grid `k / 1024` with
    /// `|k| <= 1024`.
    pub fn new(layer_sizes: Vec<usize>, time_steps: u32) -> Self {
        Self {
            layer_sizes,
            time_steps,
            tau: 1,
            theta: 1.0,
            granularity: 10,
            k_min: -1024,
            k_max: 1024,
        }
    }

    pub fn config(&self) -> ModelConfig {
        ModelConfig {
            time_steps: self.time_steps,
            tau: self.tau,
            theta: self.theta,
            gamma: 1.0,
            layer_sizes: self.layer_sizes.clone(),
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gen_model(spec: &GenSpec, seed: u64) -> Result<SnnModel> {
    gen_model_with(spec, &mut rng(seed))
}

pub fn gen_model_with(spec: &GenSpec, rng: &mut impl Rng) -> Result<SnnModel> {
    if spec.granularity > 52 {
        return Err(Error::Usage(format!("granularity {} above 52 bits", spec.granularity)));
    }
    if spec.k_min > spec.k_max {
        return Err(Error::Usage(format!("empty weight range [{}, {}]", spec.k_min, spec.k_max)));
    }
    let config = spec.config();
    config.validate()?;
    let scale = (-f64::from(spec.granularity)).exp2();
    let weights = config
        .layer_sizes
        .windows(2)
        .map(|w| {
            let data = (0..w[0] * w[1])
                .map(|_| rng.gen_range(spec.k_min..=spec.k_max) as f64 * scale)
                .collect();
            WeightMatrix::new(w[0], w[1], data)
        })
        .collect::<spikecheck_core::Result<Vec<_>>>()?;
    Ok(SnnModel::new(config, weights)?)
}

/// Input spike times uniform on `[0, T-1]`.
pub fn random_input(rng: &mut impl Rng, neurons: usize, time_steps: u32) -> SpikeTimes {
    SpikeTimes::input((0..neurons).map(|_| rng.gen_range(0..time_steps)).collect())
}
