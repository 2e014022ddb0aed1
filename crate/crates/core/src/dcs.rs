//! Direct counterexample search: simulate every perturbed input and stop at
//! the first one on which the reference label does not strictly win.

use alloc::string::String;
use alloc::vec::Vec;
use core::time::Duration;

use crate::error::{Error, Result};
use crate::model::{SnnModel, SpikeTimes};
use crate::perturb::{PerturbationBudget, PerturbationMode, PerturbationStream};
use crate::sim::{predict_times, Prediction, Simulator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VerdictKind {
    Robust,
    NotRobust,
    Unknown,
}

impl VerdictKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Robust => "robust",
            Self::NotRobust => "not_robust",
            Self::Unknown => "unknown",
        }
    }
}

impl core::fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A perturbed input on which the reference label loses or ties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub input: SpikeTimes,
    pub prediction: Prediction,
    pub output_times: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchStats {
    pub perturbations_checked: u64,
    pub wall_time: Duration,
}

/// Outcome of a robustness query. `counterexample` is present exactly when
/// `kind` is [`VerdictKind::NotRobust`].
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    kind: VerdictKind,
    counterexample: Option<Counterexample>,
    reason: Option<String>,
    pub stats: SearchStats,
}

impl Verdict {
    pub fn robust(stats: SearchStats) -> Self {
        Self {
            kind: VerdictKind::Robust,
            counterexample: None,
            reason: None,
            stats,
        }
    }

    pub fn not_robust(counterexample: Counterexample, stats: SearchStats) -> Self {
        Self {
            kind: VerdictKind::NotRobust,
            counterexample: Some(counterexample),
            reason: None,
            stats,
        }
    }

    pub fn unknown(reason: impl Into<String>, stats: SearchStats) -> Self {
        Self {
            kind: VerdictKind::Unknown,
            counterexample: None,
            reason: Some(reason.into()),
            stats,
        }
    }

    pub fn kind(&self) -> VerdictKind {
        self.kind
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        self.counterexample.as_ref()
    }

    pub fn reason(&self) -> Option<&str> {
        self.reason.as_deref()
    }
}

/// Some output neuron other than `label` spikes no later than `label`.
#[inline]
pub fn violates_strict_win(output: &[u32], label: usize) -> bool {
    let mine = output[label];
    output.iter().enumerate().any(|(n, &t)| n != label && t <= mine)
}

pub fn check_label(model: &SnnModel, label: usize) -> Result<()> {
    let outputs = model.config().output_size();
    if label >= outputs {
        return Err(Error::InvalidLabel { label, outputs });
    }
    Ok(())
}

/// Result of scanning one (sub-)stream.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub counterexample: Option<Counterexample>,
    /// Perturbations simulated, including the counterexample itself.
    pub checked: u64,
    /// `stop` asked the scan to end early.
    pub interrupted: bool,
}

/// Scan the perturbation stream of `input` (or only the sub-stream whose
/// first shift is `first_shift`) in lexicographic order.
///
/// `stop` is polled before every simulation with the number of
/// perturbations checked so far; returning `true` ends the scan.
pub fn search(
    model: &SnnModel,
    input: &SpikeTimes,
    label: usize,
    budget: PerturbationBudget,
    mode: PerturbationMode,
    first_shift: Option<i64>,
    stop: &mut dyn FnMut(u64) -> bool,
) -> SearchOutcome {
    let steps = model.config().time_steps;
    let mut stream = match first_shift {
        Some(d) => PerturbationStream::partition(input, steps, budget, mode, d),
        None => PerturbationStream::with_mode(input, steps, budget, mode),
    };
    let mut sim = Simulator::new(model);
    let mut checked = 0u64;
    while let Some(candidate) = stream.advance() {
        if stop(checked) {
            return SearchOutcome {
                counterexample: None,
                checked,
                interrupted: true,
            };
        }
        checked += 1;
        let trace = sim.run(candidate);
        let output = trace.output_times();
        if violates_strict_win(output, label) {
            return SearchOutcome {
                counterexample: Some(Counterexample {
                    input: SpikeTimes::input(candidate.to_vec()),
                    prediction: predict_times(output),
                    output_times: output.to_vec(),
                }),
                checked,
                interrupted: false,
            };
        }
    }
    SearchOutcome {
        counterexample: None,
        checked,
        interrupted: false,
    }
}

/// Single-threaded exhaustive search without a deadline.
///
/// `wall_time` is left at zero; timing belongs to the caller.
pub fn dcs_verify(
    model: &SnnModel,
    input: &SpikeTimes,
    label: usize,
    budget: PerturbationBudget,
    mode: PerturbationMode,
) -> Result<Verdict> {
    input.check_input(model.config())?;
    check_label(model, label)?;
    let out = search(model, input, label, budget, mode, None, &mut |_| false);
    let stats = SearchStats {
        perturbations_checked: out.checked,
        wall_time: Duration::ZERO,
    };
    Ok(match out.counterexample {
        Some(cex) => Verdict::not_robust(cex, stats),
        None => Verdict::robust(stats),
    })
}
