//! Intensity to first-spike-time encoding.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::SpikeTimes;

/// Map intensities in `[0, x_max]` to input spike times in `[0, T - 1]`.
///
/// The map is linear and antitone, `round((1 - x / x_max) * (T - 1))` with
/// halves rounded up: full intensity fires at step 0, zero intensity at the
/// last step.
pub fn encode_intensities(values: &[f64], x_max: f64, time_steps: u32) -> Result<SpikeTimes> {
    if !(x_max.is_finite() && x_max > 0.0) {
        return Err(Error::Domain(format!(
            "x_max must be positive and finite, got {x_max}"
        )));
    }
    if time_steps < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 time steps, got {time_steps}"
        )));
    }
    let last = f64::from(time_steps - 1);
    let times = values
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if !(0.0..=x_max).contains(&x) {
                return Err(Error::Domain(format!(
                    "intensity {x} at index {i} is outside [0, {x_max}]"
                )));
            }
            let t = libm::floor((1.0 - x / x_max) * last + 0.5);
            Ok(t.clamp(0.0, last) as u32)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpikeTimes::input(times))
}
