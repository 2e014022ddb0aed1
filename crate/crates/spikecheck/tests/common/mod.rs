#![allow(dead_code)]

use spikecheck::solver::solve;
use spikecheck::spikecheck_core::smt::SolverStatus;
use spikecheck::spikecheck_core::{ModelConfig, SnnModel, WeightMatrix};

/// Solver command from `SPIKECHECK_SOLVER`, default `z3 -in`.
pub fn solver_command() -> String {
    std::env::var("SPIKECHECK_SOLVER").unwrap_or_else(|_| "z3 -in".into())
}

/// Whether the configured solver answers a trivial query.
pub fn solver_available() -> bool {
    let out = solve("(check-sat)\n", &solver_command(), None);
    out.status == SolverStatus::Sat
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn example_2_1() -> SnnModel {
    let config = ModelConfig {
        time_steps: 4,
        tau: 1,
        theta: 1.0,
        gamma: 1.0,
        layer_sizes: vec![2, 1],
    };
    let w = WeightMatrix::from_rows(&[vec![0.6], vec![0.6]]).unwrap();
    SnnModel::new(config, vec![w]).unwrap()
}

pub fn example_2_2() -> SnnModel {
    let config = ModelConfig {
        time_steps: 4,
        tau: 1,
        theta: 1.0,
        gamma: 1.0,
        layer_sizes: vec![2, 2],
    };
    let w = WeightMatrix::from_rows(&[vec![0.6, 1.0], vec![0.6, 0.0]]).unwrap();
    SnnModel::new(config, vec![w]).unwrap()
}

pub fn zero_model(sizes: Vec<usize>, time_steps: u32) -> SnnModel {
    SnnModel::zeros(ModelConfig {
        time_steps,
        tau: 1,
        theta: 1.0,
        gamma: 1.0,
        layer_sizes: sizes,
    })
    .unwrap()
}
