//! Robustness queries as SMT problems.
//!
//! [`build_constraints`] instantiates the network semantics, the input
//! budget and the negated strict-win property over integer spike times, real
//! potentials and boolean has-spiked flags. [`emit_smtlib`] renders it as a
//! QF_LIRA script; solver answers come back through [`parse_solver_output`]
//! and are decoded and replayed through the simulator by
//! [`decode_counterexample`].

mod build;
mod parse;
mod term;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;
use core::time::Duration;

pub use build::{build_constraints, Assertion, ConstraintSystem, Decl, Metadata, VarCounts, VarLayout};
pub use parse::{parse_sexprs, parse_solver_output, Assignment, Rational, SExpr, SolverStatus, Value};
pub use term::{exact_decimal, Sort, Term, VarId};

use crate::dcs::{violates_strict_win, Counterexample};
use crate::error::{Error, Result};
use crate::model::{ModelConfig, SnnModel, SpikeTimes};
use crate::perturb::PerturbationBudget;
use crate::sim::{predict, simulate};
use crate::validate::Constraint;

/// Logic declared by emitted scripts: quantifier-free linear arithmetic over
/// mixed integers and reals.
pub const LOGIC: &str = "QF_LIRA";

/// Render `cs` as an SMT-LIB 2 script ending in `(check-sat)` and
/// `(get-model)`. The output depends only on `cs`.
pub fn emit_smtlib(cs: &ConstraintSystem) -> String {
    let mut out = String::new();
    let m = &cs.meta;
    let _ = writeln!(out, "; temporal-coding robustness query");
    let _ = writeln!(
        out,
        "; model {} input {} delta {} label {}",
        m.model_hash, m.input_hash, m.delta, m.label
    );
    let _ = writeln!(out, "(set-option :produce-models true)");
    let _ = writeln!(out, "(set-logic {LOGIC})");
    for d in &cs.decls {
        let _ = writeln!(out, "(declare-fun {} () {})", d.name, d.sort.as_str());
    }
    let name = |v: VarId| cs.name(v);
    let mut section = None;
    for a in &cs.assertions {
        if section != Some(a.origin) {
            section = Some(a.origin);
            let negated = if a.origin == Constraint::Xi8 { "not " } else { "" };
            let _ = writeln!(out, "; {negated}{}", a.origin);
        }
        out.push_str("(assert ");
        let _ = a.term.write_smtlib(&mut out, &name);
        out.push_str(")\n");
    }
    out.push_str("(check-sat)\n(get-model)\n(exit)\n");
    out
}

/// Answer of one solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOutcome {
    pub status: SolverStatus,
    /// Present iff `status` is sat.
    pub assignment: Option<Assignment>,
    /// Solver standard output as received.
    pub raw: String,
    pub wall_time: Duration,
    /// Why the status is unknown (timeout, spawn failure, ...), if known.
    pub reason: Option<String>,
}

impl SolverOutcome {
    pub fn unknown(reason: impl Into<String>, raw: String, wall_time: Duration) -> Self {
        Self {
            status: SolverStatus::Unknown,
            assignment: None,
            raw,
            wall_time,
            reason: Some(reason.into()),
        }
    }
}

fn int_var(assignment: &Assignment, name: &str) -> Result<i64> {
    let v = assignment
        .get(name)
        .ok_or_else(|| Error::Decode(format!("model has no value for {name}")))?;
    let i = v
        .as_int()
        .ok_or_else(|| Error::Decode(format!("{name} is not an integer: {v:?}")))?;
    i64::try_from(i).map_err(|_| Error::Decode(format!("{name} = {i} out of range")))
}

/// Spike times of `layer` as assigned by the solver.
pub fn assignment_spike_times(assignment: &Assignment, config: &ModelConfig, layer: usize) -> Result<Vec<u32>> {
    (0..config.layer_sizes[layer])
        .map(|n| {
            let t = int_var(assignment, &format!("s_{layer}_{n}"))?;
            u32::try_from(t).map_err(|_| Error::Decode(format!("s_{layer}_{n} = {t} is negative")))
        })
        .collect()
}

/// Read the perturbed input `s_{0,n}` from a sat outcome and check it lies in
/// `[0, T-1]` and within `budget` of `original`.
pub fn extract_counterexample(
    outcome: &SolverOutcome,
    config: &ModelConfig,
    original: &SpikeTimes,
    budget: PerturbationBudget,
) -> Result<SpikeTimes> {
    if outcome.status != SolverStatus::Sat {
        return Err(Error::NotSat);
    }
    let assignment = outcome.assignment.as_ref().ok_or(Error::NotSat)?;
    let times = assignment_spike_times(assignment, config, 0)?;
    if let Some((n, &t)) = times.iter().enumerate().find(|(_, &t)| t > config.last_step()) {
        return Err(Error::Decode(format!(
            "s_0_{n} = {t} outside [0, {}]",
            config.last_step()
        )));
    }
    let input = SpikeTimes::input(times);
    let distance = input.l1_distance(original);
    if distance > u64::from(budget.get()) {
        return Err(Error::Decode(format!(
            "decoded input is at distance {distance} > budget {}",
            budget.get()
        )));
    }
    Ok(input)
}

/// Extract the perturbed input, simulate it, and require that (a) every
/// spike time the solver assigned equals the simulated one and (b) the label
/// does not strictly win. Any disagreement is an [`Error::ReplayMismatch`].
pub fn decode_counterexample(
    model: &SnnModel,
    outcome: &SolverOutcome,
    original: &SpikeTimes,
    label: usize,
    budget: PerturbationBudget,
) -> Result<Counterexample> {
    let config = model.config();
    let input = extract_counterexample(outcome, config, original, budget)?;
    let assignment = outcome.assignment.as_ref().ok_or(Error::NotSat)?;
    let trace = simulate(model, &input)?;
    for l in 1..=config.depth() {
        let solver = assignment_spike_times(assignment, config, l)?;
        if solver != trace.spike_times[l].times {
            return Err(Error::ReplayMismatch(format!(
                "layer {l}: solver {:?}, simulator {:?}",
                solver, trace.spike_times[l].times
            )));
        }
    }
    let output = trace.output_times();
    if !violates_strict_win(output, label) {
        return Err(Error::ReplayMismatch(format!(
            "label {label} wins strictly on replay (outputs {output:?})"
        )));
    }
    Ok(Counterexample {
        prediction: predict(&trace),
        output_times: output.to_vec(),
        input,
    })
}
