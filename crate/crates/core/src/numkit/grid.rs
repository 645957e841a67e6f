use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Uniform time grid `t_k = t0 + k dt`, `k = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub tf: f64,
    pub dt: f64,
    pub n_steps: usize,
    /// `tf - requested_tf` introduced by snapping the end point onto the grid.
    pub tf_adjustment: f64,
}

/// Builds a grid covering `[t0, tf]` with spacing `dt`. The end point is
/// moved to the nearest grid point; the shift is kept in `tf_adjustment`.
pub fn make_time_grid(t0: f64, tf: f64, dt: f64) -> Result<TimeGrid> {
    if !(t0.is_finite() && tf.is_finite() && dt.is_finite()) {
        return Err(Error::invalid("time grid bounds must be finite"));
    }
    if dt <= 0.0 {
        return Err(Error::invalid(format!("dt must be positive, got {dt}")));
    }
    if tf <= t0 {
        return Err(Error::invalid(format!("empty time window [{t0}, {tf}]")));
    }
    let n_steps = ((tf - t0) / dt).round();
    if n_steps < 2.0 {
        return Err(Error::invalid(format!(
            "window [{t0}, {tf}] holds fewer than two steps of {dt}"
        )));
    }
    let n_steps = n_steps as usize;
    let snapped = t0 + n_steps as f64 * dt;
    Ok(TimeGrid { t0, tf: snapped, dt, n_steps, tf_adjustment: snapped - tf })
}

impl TimeGrid {
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn duration(&self) -> f64 {
        self.tf - self.t0
    }

    /// Index of the grid point nearest to `t`, clamped to the grid.
    pub fn index_of(&self, t: f64) -> usize {
        let k = ((t - self.t0) / self.dt).round();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(self.n_steps)
        }
    }

    /// The grid restricted to indices `start..=end`.
    pub fn slice(&self, start: usize, end: usize) -> Result<TimeGrid> {
        if end > self.n_steps || start + 2 > end {
            return Err(Error::invalid(format!(
                "grid slice {start}..={end} invalid for {} steps",
                self.n_steps
            )));
        }
        let t0 = self.time(start);
        Ok(TimeGrid {
            t0,
            tf: self.time(end),
            dt: self.dt,
            n_steps: end - start,
            tf_adjustment: 0.0,
        })
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|k| self.time(k))
    }
}
