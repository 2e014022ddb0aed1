use super::PerturbationBudget;

/// `ln f` for `f = T^D / (1 + 2D/N)^N`, the leading-order ratio of the rate
/// perturbation space to the temporal one.
pub fn space_ratio(time_steps: u32, neurons: u32, budget: PerturbationBudget) -> f64 {
    ln_ratio(f64::from(time_steps), f64::from(neurons), f64::from(budget.get()))
}

/// `ln f` with the budget written as `D = alpha * T * N`, `alpha` real.
pub fn ln_ratio_alpha(time_steps: f64, neurons: f64, alpha: f64) -> f64 {
    ln_ratio(time_steps, neurons, alpha * time_steps * neurons)
}

/// Closed form of `d(ln f)/d(alpha) = N T (ln T - 2 / (1 + 2 alpha T))`.
pub fn d_ln_ratio_d_alpha(time_steps: f64, neurons: f64, alpha: f64) -> f64 {
    neurons * time_steps * (libm::log(time_steps) - 2.0 / (1.0 + 2.0 * alpha * time_steps))
}

fn ln_ratio(t: f64, n: f64, delta: f64) -> f64 {
    if delta == 0.0 {
        return 0.0;
    }
    delta * libm::log(t) - n * libm::log1p(2.0 * delta / n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mnist_setting_favours_rate_space_at_unit_budget() {
        let v = space_ratio(5, 10, PerturbationBudget(1));
        assert!((v - (libm::log(5.0) - 10.0 * libm::log(1.2))).abs() < 1e-12);
        assert!((v - -0.2138).abs() < 5e-4);
        assert!(libm::exp(v) < 1.0);
    }

    #[test]
    fn zero_budget_is_neutral() {
        for t in [1, 2, 7, 100] {
            assert_eq!(space_ratio(t, 3, PerturbationBudget(0)), 0.0);
        }
    }

    #[test]
    fn alpha_form_matches_integer_form() {
        // T=8, N=4, D=8 -> alpha = 0.25
        let a = ln_ratio_alpha(8.0, 4.0, 0.25);
        let b = space_ratio(8, 4, PerturbationBudget(8));
        assert!((a - b).abs() < 1e-12);
    }
}
