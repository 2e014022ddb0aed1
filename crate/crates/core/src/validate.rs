//! Literal check of a trace against the network constraints.
//!
//! Each conjunct of the constraint system is instantiated on the concrete
//! values of a [`NetworkTrace`]; every failing instance is reported.

use alloc::vec::Vec;
use core::fmt;

use crate::model::SnnModel;
use crate::sim::{potential_at, NetworkTrace};

/// Constraint families of the robustness query, in emission order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constraint {
    /// Spike-time ranges (`[tau*l, T-1]`, and `[0, T-1]` for inputs).
    Xi1,
    /// Potentials start at zero.
    Xi2,
    /// Potential is the weighted count of presynaptic spikes so far.
    Xi3,
    /// Has-spiked flags.
    Xi4,
    /// Spike at the first threshold crossing, delayed by `tau`.
    Xi5,
    /// Forced spike at `T-1` when no crossing happened in time.
    Xi6,
    /// L1 perturbation budget on the input.
    Xi7,
    /// Strict win of the reference label (asserted negated).
    Xi8,
}

impl Constraint {
    pub const ALL: [Constraint; 8] = [
        Self::Xi1,
        Self::Xi2,
        Self::Xi3,
        Self::Xi4,
        Self::Xi5,
        Self::Xi6,
        Self::Xi7,
        Self::Xi8,
    ];

    pub fn index(self) -> usize {
        self as usize + 1
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "xi{}", self.index())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub constraint: Constraint,
    pub layer: usize,
    pub neuron: usize,
    pub time: Option<u32>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated at layer {}, neuron {}", self.constraint, self.layer, self.neuron)?;
        if let Some(t) = self.time {
            write!(f, ", t = {t}")?;
        }
        Ok(())
    }
}

/// All constraint instances (ranges, potentials, flags, spike rules) that
/// `trace` fails for `model`. Empty iff the trace is the network's run.
///
/// The trace must have the model's shape.
pub fn validate_trace(model: &SnnModel, trace: &NetworkTrace) -> Vec<Violation> {
    let config = model.config();
    assert_eq!(trace.layer_sizes, config.layer_sizes, "trace shape");
    assert_eq!(trace.time_steps, config.time_steps, "trace horizon");

    let steps = config.time_steps;
    let last = steps - 1;
    let theta = config.theta;
    let tau = config.tau;
    let mut out = Vec::new();
    let mut push = |constraint, layer, neuron, time| {
        out.push(Violation {
            constraint,
            layer,
            neuron,
            time,
        })
    };

    for (n, &s) in trace.spike_times[0].times.iter().enumerate() {
        if s > last {
            push(Constraint::Xi1, 0, n, None);
        }
    }

    for l in 1..=config.depth() {
        let weights = model.weights_into(l);
        let presynaptic = &trace.spike_times[l - 1].times;
        let earliest = config.earliest_spike(l);
        for n in 0..config.layer_sizes[l] {
            let s = trace.spike_time(l, n);
            if s < earliest || s > last {
                push(Constraint::Xi1, l, n, None);
            }

            if trace.potential(l, 0, n) != 0.0 {
                push(Constraint::Xi2, l, n, Some(0));
            }

            for t in 1..steps {
                if trace.potential(l, t, n) != potential_at(weights, presynaptic, t, n) {
                    push(Constraint::Xi3, l, n, Some(t));
                }
            }

            let mut crossed = false;
            for t in 0..steps {
                if trace.flag(l, t, n) != crossed {
                    push(Constraint::Xi4, l, n, Some(t));
                }
                crossed |= trace.potential(l, t, n) >= theta;
            }

            for t in earliest..last {
                let u = t - tau;
                let fires = !trace.flag(l, u, n) && trace.potential(l, u, n) >= theta;
                if fires != (s == t) {
                    push(Constraint::Xi5, l, n, Some(t));
                }
            }

            if !trace.flag(l, last - tau, n) != (s == last) {
                push(Constraint::Xi6, l, n, Some(last));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelConfig, SpikeTimes, WeightMatrix};
    use crate::sim::simulate;
    use alloc::vec;

    fn example() -> (SnnModel, NetworkTrace) {
        let config = ModelConfig {
            time_steps: 4,
            tau: 1,
            theta: 1.0,
            gamma: 1.0,
            layer_sizes: vec![2, 1],
        };
        let w = WeightMatrix::from_rows(&[vec![0.6], vec![0.6]]).unwrap();
        let model = SnnModel::new(config, vec![w]).unwrap();
        let trace = simulate(&model, &SpikeTimes::input(vec![0, 1])).unwrap();
        (model, trace)
    }

    fn count(v: &[Violation], c: Constraint) -> usize {
        v.iter().filter(|x| x.constraint == c).count()
    }

    #[test]
    fn simulated_trace_is_clean() {
        let (model, trace) = example();
        assert!(validate_trace(&model, &trace).is_empty());
    }

    #[test]
    fn early_spike_breaks_range() {
        let (model, mut trace) = example();
        trace.spike_times[1].times[0] = 0;
        let v = validate_trace(&model, &trace);
        assert_eq!(count(&v, Constraint::Xi1), 1);
        assert_eq!(
            v[0],
            Violation {
                constraint: Constraint::Xi1,
                layer: 1,
                neuron: 0,
                time: None
            }
        );
    }

    #[test]
    fn nonzero_initial_potential() {
        let (model, mut trace) = example();
        trace.set_potential(1, 0, 0, 0.25);
        let v = validate_trace(&model, &trace);
        assert_eq!(count(&v, Constraint::Xi2), 1);
    }

    #[test]
    fn wrong_potential() {
        let (model, mut trace) = example();
        trace.set_potential(1, 3, 0, 0.6);
        let v = validate_trace(&model, &trace);
        assert_eq!(count(&v, Constraint::Xi3), 1);
        assert_eq!(v.iter().find(|x| x.constraint == Constraint::Xi3).unwrap().time, Some(3));
    }

    #[test]
    fn wrong_flag() {
        let (model, mut trace) = example();
        trace.set_flag(1, 3, 0, false);
        let v = validate_trace(&model, &trace);
        assert_eq!(count(&v, Constraint::Xi4), 1);
    }

    #[test]
    fn spike_after_flag_is_set() {
        let (model, _) = example();
        // the flag at t - tau = 2 is already set, so a spike at 3 is illegal
        // under the first-crossing rule (T = 6 keeps t = 3 off the forced step)
        let config = ModelConfig {
            time_steps: 6,
            ..model.config().clone()
        };
        let model = SnnModel::new(config, model.weights().to_vec()).unwrap();
        let mut trace = simulate(&model, &SpikeTimes::input(vec![0, 1])).unwrap();
        assert_eq!(trace.spike_time(1, 0), 2);
        trace.spike_times[1].times[0] = 3;
        let v = validate_trace(&model, &trace);
        let xi5: Vec<_> = v.iter().filter(|x| x.constraint == Constraint::Xi5).collect();
        assert_eq!(xi5.len(), 2);
        assert!(xi5.iter().any(|x| x.time == Some(3)));
    }

    #[test]
    fn forced_spike_missing() {
        let config = ModelConfig {
            time_steps: 4,
            tau: 1,
            theta: 1.0,
            gamma: 1.0,
            layer_sizes: vec![1, 1],
        };
        let model = SnnModel::zeros(config).unwrap();
        let mut trace = simulate(&model, &SpikeTimes::input(vec![1])).unwrap();
        assert_eq!(trace.spike_time(1, 0), 3);
        trace.spike_times[1].times[0] = 2;
        let v = validate_trace(&model, &trace);
        assert_eq!(count(&v, Constraint::Xi6), 1);
    }

    #[test]
    fn display() {
        let v = Violation {
            constraint: Constraint::Xi5,
            layer: 1,
            neuron: 0,
            time: Some(3),
        };
        assert_eq!(alloc::format!("{v}"), "xi5 violated at layer 1, neuron 0, t = 3");
    }
}
