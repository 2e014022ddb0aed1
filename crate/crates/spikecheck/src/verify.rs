//! Robustness verification front ends: the direct search with worker
//! threads and a deadline, and the SMT path through an external solver.

use std::fs;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use spikecheck_core::dcs::{check_label, search, Counterexample, SearchStats};
use spikecheck_core::perturb::{count_temporal_with, first_shift_range};
use spikecheck_core::smt::{build_constraints, decode_counterexample, emit_smtlib, SolverStatus};
use spikecheck_core::{PerturbationBudget, PerturbationMode, SnnModel, SpikeTimes, Verdict};

use crate::error::{Error, Result};
use crate::solver::{solve, SolverConfig};

/// How often (in simulations) a worker looks at the clock.
const DEADLINE_POLL: u64 = 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DcsOptions {
    /// Worker threads; `0` and `1` both mean a single sequential scan.
    pub workers: usize,
    /// Return the lexicographically first counterexample and report
    /// `perturbations_checked` as its position in the full stream, so the
    /// verdict does not depend on `workers` or scheduling.
    pub deterministic: bool,
    pub deadline: Option<Duration>,
    pub mode: PerturbationMode,
}

impl Default for DcsOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            deterministic: true,
            deadline: None,
            mode: PerturbationMode::AtMost,
        }
    }
}

struct Found {
    partition: usize,
    counterexample: Counterexample,
    checked: u64,
}

/// Exhaustive counterexample search over the perturbation set of `input`.
///
/// With several workers the stream is split by the shift of the first input
/// neuron and the sub-streams are handed out from a shared queue. When the
/// deadline passes before the scan finishes without a counterexample, the
/// verdict is unknown with reason `"timeout"`. A counterexample found before
/// the deadline is still reported, though under a timeout it need not be the
/// lexicographically first.
pub fn dcs_verify(
    model: &SnnModel,
    input: &SpikeTimes,
    label: usize,
    budget: PerturbationBudget,
    opts: &DcsOptions,
) -> Result<Verdict> {
    input.check_input(model.config())?;
    check_label(model, label)?;
    let start = Instant::now();
    let deadline = opts.deadline.map(|d| start + d);
    let expired = |n: u64| n.is_multiple_of(DEADLINE_POLL) && deadline.is_some_and(|d| Instant::now() >= d);

    if opts.workers <= 1 {
        let out = search(model, input, label, budget, opts.mode, None, &mut |n| expired(n));
        let stats = SearchStats {
            perturbations_checked: out.checked,
            wall_time: start.elapsed(),
        };
        return Ok(match out.counterexample {
            Some(cex) => Verdict::not_robust(cex, stats),
            None if out.interrupted => Verdict::unknown("timeout", stats),
            None => Verdict::robust(stats),
        });
    }

    let partitions: Vec<i64> = first_shift_range(&input.times, model.config().time_steps, budget).collect();
    let next = AtomicUsize::new(0);
    let best = AtomicUsize::new(usize::MAX);
    let timed_out = AtomicBool::new(false);
    let checked = AtomicU64::new(0);
    let found: Mutex<Vec<Found>> = Mutex::new(Vec::new());

    thread::scope(|scope| {
        for _ in 0..opts.workers.min(partitions.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= partitions.len() || timed_out.load(Ordering::Relaxed) {
                    break;
                }
                let superseded = |i: usize| {
                    let b = best.load(Ordering::Relaxed);
                    if opts.deterministic {
                        b < i
                    } else {
                        b != usize::MAX
                    }
                };
                if superseded(i) {
                    break;
                }
                let mut stop = |n: u64| {
                    if expired(n) {
                        timed_out.store(true, Ordering::Relaxed);
                    }
                    timed_out.load(Ordering::Relaxed) || superseded(i)
                };
                let out = search(model, input, label, budget, opts.mode, Some(partitions[i]), &mut stop);
                checked.fetch_add(out.checked, Ordering::Relaxed);
                if let Some(cex) = out.counterexample {
                    best.fetch_min(i, Ordering::Relaxed);
                    found.lock().unwrap().push(Found {
                        partition: i,
                        counterexample: cex,
                        checked: out.checked,
                    });
                }
            });
        }
    });

    let mut found = found.into_inner().unwrap();
    let mut stats = SearchStats {
        perturbations_checked: checked.load(Ordering::Relaxed),
        wall_time: Duration::ZERO,
    };
    let verdict = if found.is_empty() {
        if timed_out.load(Ordering::Relaxed) {
            Verdict::unknown("timeout", stats)
        } else {
            Verdict::robust(stats)
        }
    } else {
        found.sort_by_key(|f| f.partition);
        let first = found.swap_remove(0);
        if opts.deterministic {
            stats.perturbations_checked = stream_position(input, model, budget, opts.mode, &partitions, &first);
        }
        Verdict::not_robust(first.counterexample, stats)
    };
    Ok(with_wall_time(verdict, start.elapsed()))
}

/// 1-based index of the counterexample in the sequential stream: everything
/// in earlier partitions plus its offset inside its own partition.
fn stream_position(
    input: &SpikeTimes,
    model: &SnnModel,
    budget: PerturbationBudget,
    mode: PerturbationMode,
    partitions: &[i64],
    found: &Found,
) -> u64 {
    let steps = model.config().time_steps;
    let rest = SpikeTimes::input(input.times[1..].to_vec());
    let before: u64 = partitions[..found.partition]
        .iter()
        .map(|d| {
            let left = budget.get() - d.unsigned_abs() as u32;
            count_temporal_with(&rest, steps, PerturbationBudget(left), mode)
                .exact_u64()
                .expect("a partition that was scanned fits in u64")
        })
        .sum();
    before + found.checked
}

fn with_wall_time(mut v: Verdict, wall_time: Duration) -> Verdict {
    v.stats.wall_time = wall_time;
    v
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SmtOptions {
    pub solver: SolverConfig,
    /// Write the emitted script here before solving.
    pub dump: Option<PathBuf>,
}

/// Decide robustness by asking an SMT solver whether a counterexample
/// exists.
///
/// A `sat` answer is decoded and replayed through the simulator; if the
/// replay disagrees with the solver's model the call fails with
/// [`spikecheck_core::Error::ReplayMismatch`] rather than returning a
/// verdict. `perturbations_checked` is always zero on this path.
pub fn smt_verify(
    model: &SnnModel,
    input: &SpikeTimes,
    label: usize,
    budget: PerturbationBudget,
    opts: &SmtOptions,
) -> Result<Verdict> {
    input.check_input(model.config())?;
    let start = Instant::now();
    let cs = build_constraints(model, input, label, budget)?;
    let script = emit_smtlib(&cs);
    if let Some(path) = &opts.dump {
        fs::write(path, &script).map_err(Error::io(path))?;
    }
    let outcome = solve(&script, &opts.solver.command, opts.solver.timeout);
    let stats = SearchStats::default();
    let verdict = match outcome.status {
        SolverStatus::Sat => Verdict::not_robust(decode_counterexample(model, &outcome, input, label, budget)?, stats),
        SolverStatus::Unsat => Verdict::robust(stats),
        SolverStatus::Unknown => Verdict::unknown(outcome.reason.unwrap_or_else(|| "unknown".into()), stats),
    };
    Ok(with_wall_time(verdict, start.elapsed()))
}
