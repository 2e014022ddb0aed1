//! Host-side tooling around `spikecheck-core`: model files, IDX datasets,
//! solver processes, multi-threaded search with deadlines, report logs and
//! the benchmark harness behind the `spikecheck` command.

pub mod bench;
mod error;
pub mod gen;
pub mod idx;
pub mod model_file;
pub mod report;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use model_file::{load_model, save_model};
pub use report::{append_report, Method, ReportLog, ReportRecord};
pub use solver::{solve, SolverConfig};
pub use verify::{dcs_verify, smt_verify, DcsOptions, SmtOptions};

pub use spikecheck_core;
