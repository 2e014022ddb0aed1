use alloc::vec;
use alloc::vec::Vec;
use core::ops::RangeInclusive;

use super::{PerturbationBudget, PerturbationMode};
use crate::model::SpikeTimes;

/// Admissible shifts of the first input neuron: `[-min(s_0, D), min(T-1-s_0, D)]`.
///
/// Fixing the first shift to each value of this range splits the stream into
/// disjoint sub-streams.
pub fn first_shift_range(
    origin: &[u32],
    time_steps: u32,
    budget: PerturbationBudget,
) -> RangeInclusive<i64> {
    match origin.first() {
        Some(&s) => shift_bounds(s, time_steps - 1, i64::from(budget.get())),
        None => 0..=0,
    }
}

#[inline]
fn shift_bounds(s: u32, last: u32, remaining: i64) -> RangeInclusive<i64> {
    let lo = -(i64::from(s).min(remaining));
    let hi = i64::from(last - s).min(remaining);
    lo..=hi
}

/// Lexicographic stream (by shift vector) over every `s'` in `[0, T-1]^N`
/// with `sum |s'_n - s_n|` within budget.
///
/// The stream advances in place; [`PerturbationStream::advance`] hands out a
/// borrowed view of the current element, and the [`Iterator`] impl clones it
/// into a [`SpikeTimes`].
#[derive(Debug, Clone)]
pub struct PerturbationStream {
    origin: Vec<u32>,
    last: u32,
    budget: i64,
    mode: PerturbationMode,
    first: RangeInclusive<i64>,
    shift: Vec<i64>,
    /// `used[i] = sum_{j < i} |shift[j]|`
    used: Vec<i64>,
    current: Vec<u32>,
    state: State,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Fresh,
    Active,
    Done,
}

impl PerturbationStream {
    pub fn new(input: &SpikeTimes, time_steps: u32, budget: PerturbationBudget) -> Self {
        Self::with_mode(input, time_steps, budget, PerturbationMode::AtMost)
    }

    pub fn with_mode(
        input: &SpikeTimes,
        time_steps: u32,
        budget: PerturbationBudget,
        mode: PerturbationMode,
    ) -> Self {
        let first = first_shift_range(&input.times, time_steps, budget);
        Self::build(&input.times, time_steps, budget, mode, first)
    }

    /// Sub-stream whose first input neuron is shifted by exactly `first_shift`.
    pub fn partition(
        input: &SpikeTimes,
        time_steps: u32,
        budget: PerturbationBudget,
        mode: PerturbationMode,
        first_shift: i64,
    ) -> Self {
        Self::build(
            &input.times,
            time_steps,
            budget,
            mode,
            first_shift..=first_shift,
        )
    }

    fn build(
        origin: &[u32],
        time_steps: u32,
        budget: PerturbationBudget,
        mode: PerturbationMode,
        first: RangeInclusive<i64>,
    ) -> Self {
        assert!(time_steps >= 1, "empty time horizon");
        let n = origin.len();
        assert!(
            origin.iter().all(|&s| s < time_steps),
            "origin outside [0, T-1]"
        );
        Self {
            origin: origin.to_vec(),
            last: time_steps - 1,
            budget: i64::from(budget.get()),
            mode,
            first,
            shift: vec![0; n],
            used: vec![0; n + 1],
            current: origin.to_vec(),
            state: State::Fresh,
        }
    }

    fn bounds(&self, i: usize) -> (i64, i64) {
        let remaining = self.budget - self.used[i];
        let r = shift_bounds(self.origin[i], self.last, remaining);
        let (mut lo, mut hi) = (*r.start(), *r.end());
        if i == 0 {
            lo = lo.max(*self.first.start());
            hi = hi.min(*self.first.end());
        }
        (lo, hi)
    }

    fn set(&mut self, i: usize, d: i64) {
        self.shift[i] = d;
        self.used[i + 1] = self.used[i] + d.abs();
        self.current[i] = (i64::from(self.origin[i]) + d) as u32;
    }

    /// Fill positions `from..` with their smallest admissible shifts.
    fn fill_min(&mut self, from: usize) -> bool {
        for i in from..self.origin.len() {
            let (lo, hi) = self.bounds(i);
            if lo > hi {
                return false;
            }
            self.set(i, lo);
        }
        true
    }

    fn step(&mut self) -> bool {
        match self.state {
            State::Done => false,
            State::Fresh => {
                self.state = State::Active;
                if self.fill_min(0) {
                    true
                } else {
                    self.state = State::Done;
                    false
                }
            }
            State::Active => {
                for i in (0..self.origin.len()).rev() {
                    let (_, hi) = self.bounds(i);
                    if self.shift[i] < hi {
                        self.set(i, self.shift[i] + 1);
                        // suffix minima always exist: -min(s, rem) <= 0 <= min(T-1-s, rem)
                        let ok = self.fill_min(i + 1);
                        debug_assert!(ok);
                        return true;
                    }
                }
                self.state = State::Done;
                false
            }
        }
    }

    /// Move to the next element and return its spike times.
    pub fn advance(&mut self) -> Option<&[u32]> {
        loop {
            if !self.step() {
                return None;
            }
            let mass = self.used[self.origin.len()] as u32;
            if self.mode.admits(mass, self.budget as u32) {
                return Some(&self.current);
            }
        }
    }

    /// Shift vector of the element last returned by `advance`.
    pub fn shift(&self) -> &[i64] {
        &self.shift
    }
}

impl Iterator for PerturbationStream {
    type Item = SpikeTimes;

    fn next(&mut self) -> Option<SpikeTimes> {
        self.advance().map(|t| SpikeTimes::input(t.to_vec()))
    }
}
