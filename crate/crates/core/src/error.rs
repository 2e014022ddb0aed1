use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),

    #[error("weight matrix {layer} has shape {found_rows}x{found_cols}, expected {rows}x{cols}")]
    ShapeMismatch {
        layer: usize,
        rows: usize,
        cols: usize,
        found_rows: usize,
        found_cols: usize,
    },

    #[error("weight ({row}, {col}) of matrix {layer} is not finite")]
    NonFiniteWeight { layer: usize, row: usize, col: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("expected spike times for layer {expected}, got layer {found}")]
    WrongLayer { expected: usize, found: usize },

    #[error("layer {layer} expects {expected} spike times, got {found}")]
    InputLength {
        layer: usize,
        expected: usize,
        found: usize,
    },

    #[error("spike time {time} of neuron {neuron} in layer {layer} is outside [{lo}, {hi}]")]
    SpikeTimeOutOfRange {
        layer: usize,
        neuron: usize,
        time: u32,
        lo: u32,
        hi: u32,
    },

    #[error("label {label} is not an output neuron (output layer has {outputs})")]
    InvalidLabel { label: usize, outputs: usize },

    #[error("solver output: {0}")]
    Decode(String),

    #[error("counterexample extraction requires a sat outcome")]
    NotSat,

    #[error("solver model disagrees with the simulator: {0}")]
    ReplayMismatch(String),
}
