use serde::{Deserialize, Serialize};

use crate::synth::PulseSet;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameDirection {
    /// `g -> g exp(-i Delta (t - t0))`
    ToRotating,
    /// `g -> g exp(+i Delta (t - t0))`
    FromRotating,
}

/// Moves pulses into (or out of) the frame rotating with each mode's
/// detuning.
pub fn rotating_frame_transform(pulses: &PulseSet, detunings: &[f64], direction: FrameDirection) -> Result<PulseSet> {
    if detunings.len() != pulses.modes() {
        return Err(Error::invalid(format!(
            "expected {} detunings, got {}",
            pulses.modes(),
            detunings.len()
        )));
    }
    if detunings.iter().any(|d| !d.is_finite()) {
        return Err(Error::invalid("detunings must be finite"));
    }
    let sign = match direction {
        FrameDirection::ToRotating => -1.0,
        FrameDirection::FromRotating => 1.0,
    };
    let grid = *pulses.grid();
    let mut out = pulses.clone();
    for (mu, &d) in detunings.iter().enumerate() {
        if d == 0.0 {
            continue;
        }
        for (k, g) in out.samples_mut(mu).iter_mut().enumerate() {
            *g *= C64::from_polar(1.0, sign * d * (grid.time(k) - grid.t0));
        }
    }
    Ok(out)
}
