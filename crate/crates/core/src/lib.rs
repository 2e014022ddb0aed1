//! Verification primitives for temporally coded (time-to-first-spike)
//! integrate-and-fire spiking networks.
//!
//! The crate is `no_std` and only needs `alloc`. It holds everything that is
//! a pure function of its inputs:
//!
//! * [`sim`]: discrete-time network semantics, prediction and trace checks;
//! * [`perturb`]: enumeration and exact counting of spike-time perturbations,
//!   plus the rate/temporal space analytics;
//! * [`dcs`]: exhaustive counterexample search over the perturbation set;
//! * [`smt`]: constraint construction, SMT-LIB 2 emission, solver output
//!   parsing and counterexample decoding.
//!
//! Process management, threads, clocks and files live in the `spikecheck`
//! companion crate.

#![no_std]

extern crate alloc;

pub mod dcs;
pub mod encode;
mod error;
pub mod model;
pub mod perturb;
pub mod sim;
pub mod smt;
pub mod validate;

pub use dcs::{Counterexample, SearchStats, Verdict, VerdictKind};
pub use encode::encode_intensities;
pub use error::{Error, Result};
pub use model::{ModelConfig, SnnModel, SpikeTimes, WeightMatrix};
pub use perturb::{PerturbationBudget, PerturbationMode, SpaceCount};
pub use sim::{infer, predict, simulate, NetworkTrace, Prediction};
pub use validate::{validate_trace, Constraint, Violation};
