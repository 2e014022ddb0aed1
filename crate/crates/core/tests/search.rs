mod common;

use common::{grid, l1, model_and_input};
use proptest::prelude::*;
use spikecheck_core::dcs::{dcs_verify, violates_strict_win};
use spikecheck_core::perturb::count_temporal;
use spikecheck_core::smt::{build_constraints, emit_smtlib, VarCounts};
use spikecheck_core::{simulate, PerturbationBudget, PerturbationMode, SpikeTimes, VerdictKind};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Oracle: scan the whole input grid, keep points within budget, and take
    /// the lexicographically smallest shift whose run is not a strict win.
    #[test]
    fn search_matches_grid_scan(
        (model, input) in model_and_input(3, 2, 1, -1024, 1024),
        delta in 0u32..3,
        label_pick in any::<prop::sample::Index>(),
    ) {
        let c = model.config();
        let label = label_pick.index(c.output_size());
        let mut bad: Vec<(Vec<i64>, Vec<u32>)> = grid(c.input_size(), c.time_steps)
            .into_iter()
            .filter(|p| l1(p, &input.times) <= delta)
            .filter(|p| {
                let trace = simulate(&model, &SpikeTimes::input(p.clone())).unwrap();
                violates_strict_win(trace.output_times(), label)
            })
            .map(|p| (p.iter().zip(&input.times).map(|(&a, &b)| i64::from(a) - i64::from(b)).collect(), p))
            .collect();
        bad.sort();

        let v = dcs_verify(&model, &input, label, PerturbationBudget(delta), PerturbationMode::AtMost).unwrap();
        let total = count_temporal(&input, c.time_steps, PerturbationBudget(delta)).exact_u64().unwrap();
        match bad.first() {
            None => {
                prop_assert_eq!(v.kind(), VerdictKind::Robust);
                prop_assert_eq!(v.stats.perturbations_checked, total);
            }
            Some((_, first)) => {
                prop_assert_eq!(v.kind(), VerdictKind::NotRobust);
                prop_assert_eq!(&v.counterexample().unwrap().input.times, first);
                prop_assert!(v.stats.perturbations_checked <= total);
            }
        }
    }

    #[test]
    fn robustness_is_inherited_by_smaller_budgets(
        (model, input) in model_and_input(3, 2, 1, 0, 1024),
        delta in 1u32..4,
    ) {
        let label = 0;
        let v = dcs_verify(&model, &input, label, PerturbationBudget(delta), PerturbationMode::AtMost).unwrap();
        if v.kind() == VerdictKind::Robust {
            for smaller in 0..delta {
                let w = dcs_verify(&model, &input, label, PerturbationBudget(smaller), PerturbationMode::AtMost).unwrap();
                prop_assert_eq!(w.kind(), VerdictKind::Robust);
            }
        }
    }

    #[test]
    fn constraint_system_shape(
        (model, input) in model_and_input(4, 3, 2, -1024, 1024),
        delta in 0u32..4,
    ) {
        let c = model.config();
        let cs = build_constraints(&model, &input, 0, PerturbationBudget(delta)).unwrap();
        let hidden: usize = c.layer_sizes[1..].iter().sum();
        let steps = c.time_steps as usize;
        prop_assert_eq!(cs.counts(), VarCounts {
            input_spikes: c.input_size(),
            spikes: hidden,
            potentials: hidden * steps,
            flags: hidden * steps,
            helpers: c.input_size(),
        });
        prop_assert_eq!(cs.decls.len(), 2 * c.input_size() + hidden * (1 + 2 * steps));
        for a in &cs.assertions {
            a.term.for_each_var(&mut |v| assert!((v.0 as usize) < cs.decls.len()));
        }
        prop_assert_eq!(emit_smtlib(&cs), emit_smtlib(&build_constraints(&model, &input, 0, PerturbationBudget(delta)).unwrap()));
    }
}

#[test]
fn deterministic_reruns() {
    let config = spikecheck_core::ModelConfig {
        time_steps: 6,
        tau: 1,
        theta: 1.0,
        gamma: 1.0,
        layer_sizes: vec![3, 2],
    };
    let w = spikecheck_core::WeightMatrix::from_rows(&[
        vec![0.5, 0.25],
        vec![0.5, 0.5],
        vec![0.125, 0.5],
    ])
    .unwrap();
    let model = spikecheck_core::SnnModel::new(config, vec![w]).unwrap();
    let input = SpikeTimes::input(vec![1, 2, 4]);
    let a = dcs_verify(&model, &input, 0, PerturbationBudget(2), PerturbationMode::AtMost).unwrap();
    let b = dcs_verify(&model, &input, 0, PerturbationBudget(2), PerturbationMode::AtMost).unwrap();
    assert_eq!(a, b);
}
