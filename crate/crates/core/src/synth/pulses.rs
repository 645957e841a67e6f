use serde::{Deserialize, Serialize};

use crate::numkit::TimeGrid;
use crate::{Error, Result, C64};

/// Inclusive range of grid indices `start..=end`.
pub type Interval = (usize, usize);

/// Sampled complex couplings `g_mu(t_k)` for all `2N` modes.
///
/// Modes `0..N` are register A (emitters), modes `N..2N` register B
/// (receivers).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSet {
    grid: TimeGrid,
    n: usize,
    samples: Vec<Vec<C64>>,
    clamped: Vec<bool>,
    clamp_intervals: Vec<Vec<Interval>>,
}

const CLAMP_BOUND: f64 = 1.0 + 1e-9;

impl PulseSet {
    /// All couplings zero.
    pub fn zeros(n: usize, grid: TimeGrid) -> Self {
        let modes = 2 * n;
        Self {
            grid,
            n,
            samples: vec![vec![C64::new(0.0, 0.0); grid.len()]; modes],
            clamped: vec![false; modes],
            clamp_intervals: vec![Vec::new(); modes],
        }
    }

    pub fn from_samples(n: usize, grid: TimeGrid, samples: Vec<Vec<C64>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("pulse set needs at least one mode per register"));
        }
        if samples.len() != 2 * n {
            return Err(Error::invalid(format!(
                "expected {} pulse sequences, got {}",
                2 * n,
                samples.len()
            )));
        }
        if let Some(bad) = samples.iter().position(|s| s.len() != grid.len()) {
            return Err(Error::invalid(format!(
                "pulse {bad} has {} samples, grid has {}",
                samples[bad].len(),
                grid.len()
            )));
        }
        if samples.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("pulse samples must be finite"));
        }
        Ok(Self {
            grid,
            n,
            clamped: vec![false; 2 * n],
            clamp_intervals: vec![Vec::new(); 2 * n],
            samples,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn modes(&self) -> usize {
        2 * self.n
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn mode(&self, mu: usize) -> &[C64] {
        &self.samples[mu]
    }

    pub fn emitter(&self, j: usize) -> &[C64] {
        &self.samples[j]
    }

    pub fn receiver(&self, l: usize) -> &[C64] {
        &self.samples[self.n + l]
    }

    pub fn set_mode(&mut self, mu: usize, values: Vec<C64>) -> Result<()> {
        if mu >= self.modes() || values.len() != self.grid.len() {
            return Err(Error::invalid(format!("cannot set mode {mu} with {} samples", values.len())));
        }
        self.samples[mu] = values;
        self.clamped[mu] = false;
        self.clamp_intervals[mu].clear();
        Ok(())
    }

    pub(crate) fn set_clamp_info(&mut self, mu: usize, intervals: Vec<Interval>) {
        self.clamped[mu] = true;
        self.clamp_intervals[mu] = intervals;
    }

    /// Couplings of all modes at grid index `k`.
    pub fn values_at(&self, k: usize) -> Vec<C64> {
        self.samples.iter().map(|s| s[k]).collect()
    }

    pub fn is_clamped(&self, mu: usize) -> bool {
        self.clamped[mu]
    }

    pub fn clamp_intervals(&self, mu: usize) -> &[Interval] {
        &self.clamp_intervals[mu]
    }

    pub fn in_clamp_interval(&self, mu: usize, k: usize) -> bool {
        self.clamp_intervals[mu].iter().any(|&(a, b)| a <= k && k <= b)
    }

    /// Drops all clamp bookkeeping (e.g. after adding noise).
    pub fn clear_clamp_info(&mut self) {
        self.clamped.iter_mut().for_each(|c| *c = false);
        self.clamp_intervals.iter_mut().for_each(Vec::clear);
    }

    pub fn max_abs(&self, mu: usize) -> f64 {
        self.samples[mu].iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_imag(&self, mu: usize) -> f64 {
        self.samples[mu].iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// `int |g_mu|^2 dt` by the trapezoidal rule.
    pub fn pulse_area(&self, mu: usize) -> f64 {
        let s = &self.samples[mu];
        let inner: f64 = s.windows(2).map(|w| w[0].norm_sqr() + w[1].norm_sqr()).sum();
        0.5 * self.grid.dt * inner
    }

    /// Multiplies every sample of `mu` by `factor`.
    pub fn scale_mode(&mut self, mu: usize, factor: C64) {
        self.samples[mu].iter_mut().for_each(|z| *z *= factor);
    }

    pub(crate) fn samples_mut(&mut self, mu: usize) -> &mut [C64] {
        &mut self.samples[mu]
    }

    /// The same pulses restricted to grid indices `start..=end`.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        let grid = self.grid.slice(start, end)?;
        let samples = self.samples.iter().map(|s| s[start..=end].to_vec()).collect();
        let clamp_intervals = self
            .clamp_intervals
            .iter()
            .map(|iv| {
                iv.iter()
                    .filter(|&&(a, b)| b >= start && a <= end)
                    .map(|&(a, b)| (a.max(start) - start, b.min(end) - start))
                    .collect()
            })
            .collect();
        Ok(Self { grid, n: self.n, samples, clamped: self.clamped.clone(), clamp_intervals })
    }

    /// Checks the clamp contract: clamped modes never exceed unit magnitude.
    pub fn validate(&self) -> Result<()> {
        for mu in 0..self.modes() {
            if self.clamped[mu] && self.max_abs(mu) > CLAMP_BOUND {
                return Err(Error::invalid(format!(
                    "clamped pulse {mu} exceeds unit magnitude ({})",
                    self.max_abs(mu)
                )));
            }
        }
        Ok(())
    }
}

/// Collapses a per-sample flag sequence into inclusive index runs.
pub(crate) fn runs_of(flags: &[bool]) -> Vec<Interval> {
    let mut out = Vec::new();
    let mut start = None;
    for (k, &f) in flags.iter().enumerate() {
        match (f, start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                out.push((s, k - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, flags.len() - 1));
    }
    out
}
