//! Spike-time perturbations: enumeration, exact counting, and the
//! rate-versus-temporal perturbation-space analytics.

mod count;
mod enumerate;
mod ratio;

pub use count::{
    count_rate, count_temporal, count_temporal_with, ln_biguint, temporal_upper_bound, SpaceCount,
    EXACT_DIGIT_CAP,
};
pub use enumerate::{first_shift_range, PerturbationStream};
pub use ratio::{d_ln_ratio_d_alpha, ln_ratio_alpha, space_ratio};

/// L1 budget on input spike-time shifts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PerturbationBudget(pub u32);

impl PerturbationBudget {
    pub fn get(self) -> u32 {
        self.0
    }
}

impl From<u32> for PerturbationBudget {
    fn from(delta: u32) -> Self {
        Self(delta)
    }
}

/// Which shifts belong to the perturbation set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PerturbationMode {
    /// Total shift at most the budget, original input included.
    #[default]
    AtMost,
    /// Total shift exactly the budget (the recursive generator that only
    /// emits once the budget is used up).
    Exactly,
}

impl PerturbationMode {
    #[inline]
    pub fn admits(self, mass: u32, budget: u32) -> bool {
        match self {
            Self::AtMost => mass <= budget,
            Self::Exactly => mass == budget,
        }
    }
}
