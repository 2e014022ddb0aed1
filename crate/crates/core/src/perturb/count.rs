use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_integer::binomial;
use num_traits::{ToPrimitive, Zero};

use super::{PerturbationBudget, PerturbationMode};
use crate::model::SpikeTimes;

/// Counts above this many decimal digits keep only their logarithm.
pub const EXACT_DIGIT_CAP: f64 = 10_000.0;

/// Size of a perturbation space.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceCount {
    /// Exact value, `None` past [`EXACT_DIGIT_CAP`] digits.
    pub exact: Option<BigUint>,
    /// Natural log of the count (`-inf` for an empty space).
    pub ln_value: f64,
    /// The budget exceeded what the space can absorb and was clamped.
    pub clamped: bool,
}

impl SpaceCount {
    pub fn from_exact(exact: BigUint) -> Self {
        Self {
            ln_value: ln_biguint(&exact),
            exact: Some(exact),
            clamped: false,
        }
    }

    pub fn exact_u64(&self) -> Option<u64> {
        self.exact.as_ref().and_then(ToPrimitive::to_u64)
    }

    /// Decimal digits implied by `ln_value`.
    pub fn approx_digits(&self) -> f64 {
        if self.ln_value <= 0.0 {
            1.0
        } else {
            libm::floor(self.ln_value / core::f64::consts::LN_10) + 1.0
        }
    }
}

/// Natural logarithm of an arbitrary-precision integer.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return libm::log(x.to_f64().expect("fits in f64"));
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit value");
    libm::log(top) + shift as f64 * core::f64::consts::LN_2
}

/// Exact size of the temporal perturbation set of `input` (shifts with
/// total at most `budget`, each spike kept in `[0, T-1]`).
pub fn count_temporal(input: &SpikeTimes, time_steps: u32, budget: PerturbationBudget) -> SpaceCount {
    count_temporal_with(input, time_steps, budget, PerturbationMode::AtMost)
}

/// [`count_temporal`] for either perturbation mode.
///
/// Dynamic program over `(neuron, mass used)`. Neuron `n` can move by
/// `delta` in `[-s_n, T-1-s_n]`, so a mass `c >= 1` is reachable in
/// `[c <= s_n] + [c <= T-1-s_n]` ways; prefix sums make each neuron O(budget).
pub fn count_temporal_with(
    input: &SpikeTimes,
    time_steps: u32,
    budget: PerturbationBudget,
    mode: PerturbationMode,
) -> SpaceCount {
    let last = time_steps - 1;
    let max_mass: u64 = input.times.iter().map(|&s| u64::from(s.max(last - s))).sum();
    let clamped = u64::from(budget.get()) > max_mass;
    let cap = (u64::from(budget.get()).min(max_mass)) as usize;

    // ways[b] = number of shift vectors on the neurons so far with mass exactly b
    let mut ways: Vec<BigUint> = vec![BigUint::zero(); cap + 1];
    ways[0] = BigUint::from(1u8);
    let mut prefix: Vec<BigUint> = vec![BigUint::zero(); cap + 2];
    for &s in &input.times {
        let down = s as usize;
        let up = (last - s) as usize;
        // prefix[k] = ways[0] + ... + ways[k-1]
        for b in 0..=cap {
            prefix[b + 1] = &prefix[b] + &ways[b];
        }
        let window = |b: usize, reach: usize| -> BigUint {
            // sum_{c=1}^{min(reach,b)} ways[b - c]
            let lo = b - reach.min(b);
            &prefix[b] - &prefix[lo]
        };
        let next: Vec<BigUint> = (0..=cap)
            .map(|b| &ways[b] + window(b, down) + window(b, up))
            .collect();
        ways = next;
    }

    let exact = match mode {
        PerturbationMode::AtMost => ways.into_iter().fold(BigUint::zero(), |acc, w| acc + w),
        PerturbationMode::Exactly if clamped => BigUint::zero(),
        PerturbationMode::Exactly => ways.swap_remove(cap),
    };
    SpaceCount {
        clamped,
        ..SpaceCount::from_exact(exact)
    }
}

fn ln_choose(n: u64, k: u64) -> f64 {
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

/// Rate-coding perturbation space: `sum_{d=1}^{D} C(N*T, d)` ways to flip
/// between 1 and `D` bits of an `N x T` spike train.
///
/// The unperturbed train is not counted. A budget above `N*T` is clamped
/// to `N*T` and flagged.
pub fn count_rate(neurons: u64, time_steps: u64, budget: PerturbationBudget) -> SpaceCount {
    let bits = neurons * time_steps;
    let delta = u64::from(budget.get());
    let clamped = delta > bits;
    let top = delta.min(bits);
    if top == 0 {
        return SpaceCount {
            exact: Some(BigUint::zero()),
            ln_value: f64::NEG_INFINITY,
            clamped,
        };
    }

    // log-sum-exp over ln C(bits, d), anchored at the largest term
    let peak_d = top.min(bits / 2).max(1);
    let peak = ln_choose(bits, peak_d);
    let tail: f64 = (1..=top).map(|d| libm::exp(ln_choose(bits, d) - peak)).sum();
    let ln_estimate = peak + libm::log(tail);

    if ln_estimate / core::f64::consts::LN_10 > EXACT_DIGIT_CAP + 1.0 {
        return SpaceCount {
            exact: None,
            ln_value: ln_estimate,
            clamped,
        };
    }

    let mut term = BigUint::from(1u8);
    let mut total = BigUint::zero();
    for d in 1..=top {
        term = term * BigUint::from(bits - d + 1) / BigUint::from(d);
        total += &term;
    }
    SpaceCount {
        clamped,
        ..SpaceCount::from_exact(total)
    }
}

/// Upper bound on the temporal space that ignores range clamping:
/// `C(N+D-1, D) * (1 + 2D/N)^N`.
///
/// `exact` carries only the integer factor `C(N+D-1, D)`; `ln_value` is the
/// log of the whole product.
pub fn temporal_upper_bound(neurons: u64, budget: PerturbationBudget) -> SpaceCount {
    assert!(neurons >= 1, "bound needs at least one input neuron");
    let delta = u64::from(budget.get());
    let n = neurons as f64;
    let factor = n * libm::log1p(2.0 * delta as f64 / n);
    let ln_partitions = ln_choose(neurons + delta - 1, delta);
    let exact = if ln_partitions / core::f64::consts::LN_10 > EXACT_DIGIT_CAP {
        None
    } else {
        Some(binomial(BigUint::from(neurons + delta - 1), BigUint::from(delta)))
    };
    let ln_partitions = exact.as_ref().map_or(ln_partitions, ln_biguint);
    SpaceCount {
        exact,
        ln_value: ln_partitions + factor,
        clamped: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temporal(times: Vec<u32>, t: u32, delta: u32) -> u64 {
        count_temporal(&SpikeTimes::input(times), t, PerturbationBudget(delta))
            .exact_u64()
            .unwrap()
    }

    #[test]
    fn temporal_small_cases() {
        assert_eq!(temporal(vec![0], 3, 2), 3);
        assert_eq!(temporal(vec![1, 1], 3, 1), 5);
        assert_eq!(temporal(vec![1], 3, 1), 3);
        assert_eq!(temporal(vec![4, 0, 2], 5, 0), 1);
    }

    #[test]
    fn temporal_interior_matches_closed_form() {
        // away from the boundary: 1 + 2N for D = 1, 1 + 4N + 4 C(N,2) for D = 2
        assert_eq!(temporal(vec![30; 10], 64, 1), 21);
        assert_eq!(temporal(vec![30; 10], 64, 2), 221);
    }

    #[test]
    fn clamped_budget_covers_whole_grid() {
        let c = count_temporal(&SpikeTimes::input(vec![1, 2]), 4, PerturbationBudget(50));
        assert_eq!(c.exact_u64(), Some(16));
        assert!(c.clamped);
    }

    #[test]
    fn exact_shell_count() {
        let c = count_temporal_with(
            &SpikeTimes::input(vec![1, 1]),
            3,
            PerturbationBudget(1),
            PerturbationMode::Exactly,
        );
        assert_eq!(c.exact_u64(), Some(4));
    }

    #[test]
    fn rate_binomial_sums() {
        assert_eq!(count_rate(1, 2, PerturbationBudget(1)).exact_u64(), Some(2));
        assert_eq!(count_rate(2, 3, PerturbationBudget(2)).exact_u64(), Some(21));
        let zero = count_rate(5, 5, PerturbationBudget(0));
        assert_eq!(zero.exact_u64(), Some(0));
        assert_eq!(zero.ln_value, f64::NEG_INFINITY);
        let all = count_rate(1, 3, PerturbationBudget(9));
        assert_eq!(all.exact_u64(), Some(7));
        assert!(all.clamped);
    }

    #[test]
    fn rate_ln_agrees_with_exact() {
        let c = count_rate(10, 5, PerturbationBudget(7));
        let exact = c.exact.clone().unwrap();
        assert!((c.ln_value - ln_biguint(&exact)).abs() < 1e-12);
        assert!((c.ln_value - libm::log(exact.to_f64().unwrap())).abs() / c.ln_value < 1e-9);
    }

    #[test]
    fn huge_rate_count_keeps_log_only() {
        let c = count_rate(784, 256, PerturbationBudget(20_000));
        assert!(c.exact.is_none());
        assert!(c.approx_digits() > EXACT_DIGIT_CAP);
        // a cheaper case close to the cap stays exact
        let c = count_rate(784, 256, PerturbationBudget(200));
        assert!(c.exact.is_some());
        let exact_ln = ln_biguint(c.exact.as_ref().unwrap());
        assert!((c.ln_value - exact_ln).abs() <= 1e-9 * exact_ln);
    }

    #[test]
    fn ln_of_large_integers() {
        let x = BigUint::from(3u8).pow(2000);
        let expected = 2000.0 * libm::log(3.0);
        assert!((ln_biguint(&x) - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn upper_bound_examples() {
        let b = temporal_upper_bound(2, PerturbationBudget(1));
        assert_eq!(b.exact_u64(), Some(2));
        assert!((b.ln_value - libm::log(8.0)).abs() < 1e-12);
        assert!(b.ln_value >= libm::log(5.0));

        let b = temporal_upper_bound(1, PerturbationBudget(0));
        assert_eq!(b.exact_u64(), Some(1));
        assert_eq!(b.ln_value, 0.0);

        let b = temporal_upper_bound(10, PerturbationBudget(1));
        let expected = libm::log(10.0) + 10.0 * libm::log(1.2);
        assert!((b.ln_value - expected).abs() < 1e-12);
        assert!(b.ln_value > libm::log(21.0));
    }
}
