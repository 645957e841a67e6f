use serde::{Deserialize, Serialize};

use super::PulseSet;
use crate::numkit::TimeGrid;
use crate::{Error, Result, C64};

/// Sigmoid emitter family
/// `g_{A,j}(t) = eta_j / sqrt(exp((t_c - t)/tau) + 1)`,
/// `eta_j = sqrt((1 + (N - j) delta) / (1 + (N - 1) delta))` for `j = 1..N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmitterParams {
    pub delta: f64,
    pub tau: f64,
    pub t_c: f64,
}

impl EmitterParams {
    pub fn new(delta: f64, tau: f64, t_c: f64) -> Result<Self> {
        let p = Self { delta, tau, t_c };
        p.validate()?;
        Ok(p)
    }

    /// `delta = 2`, `tau = 1`, centered in `[0, tf]`.
    pub fn for_window(tf: f64) -> Self {
        Self { delta: 2.0, tau: 1.0, t_c: tf / 2.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(Error::invalid(format!("delta must be >= 0, got {}", self.delta)));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::invalid(format!("tau must be > 0, got {}", self.tau)));
        }
        if !self.t_c.is_finite() {
            return Err(Error::invalid("t_c must be finite"));
        }
        Ok(())
    }

    /// Saturation amplitude of emitter `j` (zero based).
    pub fn eta(&self, n: usize, j: usize) -> f64 {
        let top = 1.0 + (n - 1 - j) as f64 * self.delta;
        let bottom = 1.0 + (n - 1) as f64 * self.delta;
        (top / bottom).sqrt()
    }

    pub fn value(&self, n: usize, j: usize, t: f64) -> f64 {
        let e = ((self.t_c - t) / self.tau).exp();
        if e.is_infinite() {
            0.0
        } else {
            self.eta(n, j) / (e + 1.0).sqrt()
        }
    }

    /// Default initial window length `20 [1 + (N - 1) delta]`.
    pub fn default_window(&self, n: usize) -> f64 {
        20.0 * (1.0 + (n - 1) as f64 * self.delta)
    }
}

/// Emitter pulses on `grid`; the receiver half is zero.
pub fn emitter_pulses(n: usize, params: &EmitterParams, grid: &TimeGrid) -> Result<PulseSet> {
    params.validate()?;
    if n == 0 {
        return Err(Error::invalid("N must be at least 1"));
    }
    let mut pulses = PulseSet::zeros(n, *grid);
    for j in 0..n {
        let s = grid.times().map(|t| C64::new(params.value(n, j, t), 0.0)).collect();
        pulses.set_mode(j, s)?;
    }
    Ok(pulses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::make_time_grid;

    #[test]
    fn amplitudes_for_two_modes() {
        let p = EmitterParams::new(2.0, 1.0, 19.0).unwrap();
        assert!((p.eta(2, 0) - 1.0).abs() < 1e-15);
        assert!((p.eta(2, 1) - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((p.eta(2, 1) - 0.5774).abs() < 1e-4);
    }

    #[test]
    fn sigmoid_limits() {
        let p = EmitterParams::new(2.0, 1.0, 19.0).unwrap();
        assert!((p.value(2, 1, 19.0) - p.eta(2, 1) / 2f64.sqrt()).abs() < 1e-15);
        assert!((p.value(2, 0, 1e4) - 1.0).abs() < 1e-15);
        assert_eq!(p.value(2, 0, -1e4), 0.0);
    }

    #[test]
    fn pulse_set_layout() {
        let grid = make_time_grid(0.0, 40.0, 0.1).unwrap();
        let p = emitter_pulses(2, &EmitterParams::new(2.0, 1.0, 19.0).unwrap(), &grid).unwrap();
        assert_eq!(p.modes(), 4);
        assert!(p.receiver(0).iter().all(|z| *z == C64::new(0.0, 0.0)));
        assert!(p.emitter(1)[grid.n_steps].re > 0.57);
    }

    #[test]
    fn invalid_params() {
        assert!(EmitterParams::new(-1.0, 1.0, 0.0).is_err());
        assert!(EmitterParams::new(1.0, 0.0, 0.0).is_err());
    }
}
