mod common;

use common::{model_and_input, oracle_spike_times};
use proptest::prelude::*;
use spikecheck_core::sim::Simulator;
use spikecheck_core::{encode_intensities, predict, simulate, validate_trace, SpikeTimes};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn simulator_matches_literal_oracle((model, input) in model_and_input(4, 3, 2, -1024, 1024)) {
        let trace = simulate(&model, &input).unwrap();
        let expected = oracle_spike_times(&model, &input.times);
        for (l, times) in expected.iter().enumerate() {
            prop_assert_eq!(&trace.spike_times[l].times, times);
        }
    }

    #[test]
    fn simulated_traces_validate((model, input) in model_and_input(4, 3, 3, -1024, 1024)) {
        let trace = simulate(&model, &input).unwrap();
        prop_assert!(validate_trace(&model, &trace).is_empty());
        let c = model.config();
        for l in 1..c.layer_sizes.len() {
            prop_assert_eq!(trace.spike_times[l].times.len(), c.layer_sizes[l]);
            for &s in &trace.spike_times[l].times {
                prop_assert!(s >= c.tau * l as u32 && s <= c.time_steps - 1);
            }
            for n in 0..c.layer_sizes[l] {
                prop_assert_eq!(trace.potential(l, 0, n), 0.0);
            }
        }
    }

    #[test]
    fn reused_buffers_give_identical_traces((model, input) in model_and_input(4, 3, 2, -1024, 1024)) {
        let fresh = simulate(&model, &input).unwrap();
        let mut sim = Simulator::new(&model);
        let reversed: Vec<u32> = input.times.iter().rev().copied().collect();
        sim.run(&reversed);
        prop_assert_eq!(sim.run(&input.times), &fresh);
        prop_assert_eq!(simulate(&model, &input).unwrap(), fresh);
    }

    #[test]
    fn earlier_input_never_lowers_excitatory_potential(
        (model, input) in model_and_input(4, 3, 1, 0, 1024),
        pick in any::<prop::sample::Index>(),
    ) {
        let n = pick.index(input.len());
        prop_assume!(input.times[n] > 0);
        let mut earlier = input.clone();
        earlier.times[n] -= 1;
        let base = simulate(&model, &input).unwrap();
        let moved = simulate(&model, &earlier).unwrap();
        let c = model.config();
        for l in 1..c.layer_sizes.len() {
            for t in 0..c.time_steps {
                for k in 0..c.layer_sizes[l] {
                    prop_assert!(moved.potential(l, t, k) >= base.potential(l, t, k));
                    if t > 0 {
                        prop_assert!(base.potential(l, t, k) >= base.potential(l, t - 1, k));
                    }
                }
            }
        }
    }

    #[test]
    fn encoding_is_antitone(
        values in prop::collection::vec(0.0f64..=255.0, 2..8),
        steps in 2u32..300,
    ) {
        let s = encode_intensities(&values, 255.0, steps).unwrap();
        for i in 0..values.len() {
            prop_assert!(s.times[i] < steps);
            for j in 0..values.len() {
                if values[i] >= values[j] {
                    prop_assert!(s.times[i] <= s.times[j]);
                }
            }
        }
    }
}

#[test]
fn encoding_examples() {
    assert_eq!(encode_intensities(&[255.0], 255.0, 5).unwrap().times, [0]);
    assert_eq!(encode_intensities(&[0.0], 255.0, 5).unwrap().times, [4]);
    assert_eq!(
        encode_intensities(&[127.5, 63.75], 255.0, 5).unwrap().times,
        [2, 3]
    );
}

#[test]
fn tie_flag_on_zero_model() {
    let config = spikecheck_core::ModelConfig {
        time_steps: 7,
        tau: 1,
        theta: 1.0,
        gamma: 1.0,
        layer_sizes: vec![3, 2],
    };
    let model = spikecheck_core::SnnModel::zeros(config).unwrap();
    let trace = simulate(&model, &SpikeTimes::input(vec![0, 3, 6])).unwrap();
    let p = predict(&trace);
    assert_eq!((p.label, p.winner_time, p.strict), (0, 6, false));
}
