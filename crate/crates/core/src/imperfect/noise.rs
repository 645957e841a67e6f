use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::numkit::TimeGrid;
use crate::synth::PulseSet;
use crate::{Error, Result, C64};

/// Filtered white noise on the couplings:
/// `<dg(t) dg(s)> = eps exp(-omega |t - s| / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub epsilon: f64,
    pub omega: f64,
    pub seed: u64,
    /// Independent real and imaginary parts, each of variance `eps / 2`.
    #[serde(default)]
    pub complex: bool,
}

impl NoiseParams {
    pub fn new(epsilon: f64, omega: f64, seed: u64) -> Result<Self> {
        let p = Self { epsilon, omega, seed, complex: false };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::invalid(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::invalid(format!("omega must be > 0, got {}", self.omega)));
        }
        Ok(())
    }

    /// The same parameters with the seed of ensemble run `run`.
    pub fn for_run(&self, run: u64) -> Self {
        Self { seed: child_seed(self.seed, run), ..*self }
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of sub-run `index` derived from `seed` alone.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    mix(mix(seed).wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

/// Exact discretization of the process on the grid, started from its
/// stationary distribution. `stream` selects an independent substream.
fn ou_path(seed: u64, stream: u64, variance: f64, omega: f64, grid: &TimeGrid) -> Vec<f64> {
    let npts = grid.len();
    if variance == 0.0 {
        return vec![0.0; npts];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let decay = (-0.5 * omega * grid.dt).exp();
    let kick = (variance * -(-omega * grid.dt).exp_m1()).sqrt();
    let mut out = Vec::with_capacity(npts);
    let z: f64 = StandardNormal.sample(&mut rng);
    let mut x = variance.sqrt() * z;
    out.push(x);
    for _ in 1..npts {
        let z: f64 = StandardNormal.sample(&mut rng);
        x = decay * x + kick * z;
        out.push(x);
    }
    out
}

/// Real noise trajectory `dg(t_k)` of mode `mode`.
pub fn noise_trajectory(params: &NoiseParams, grid: &TimeGrid, mode: usize) -> Vec<f64> {
    ou_path(params.seed, 2 * mode as u64, params.epsilon, params.omega, grid)
}

fn complex_trajectory(params: &NoiseParams, grid: &TimeGrid, mode: usize) -> Vec<C64> {
    if !params.complex {
        return noise_trajectory(params, grid, mode).into_iter().map(|x| C64::new(x, 0.0)).collect();
    }
    let half = 0.5 * params.epsilon;
    let re = ou_path(params.seed, 2 * mode as u64, half, params.omega, grid);
    let im = ou_path(params.seed, 2 * mode as u64 + 1, half, params.omega, grid);
    re.into_iter().zip(im).map(|(a, b)| C64::new(a, b)).collect()
}

/// Adds independent noise to every mode. The result is not re-clamped and
/// carries no clamp information.
pub fn perturb_pulses(pulses: &PulseSet, params: &NoiseParams) -> Result<PulseSet> {
    params.validate()?;
    let mut out = pulses.clone();
    out.clear_clamp_info();
    if params.epsilon == 0.0 {
        return Ok(out);
    }
    let grid = *pulses.grid();
    for mu in 0..pulses.modes() {
        let noise = complex_trajectory(params, &grid, mu);
        for (g, d) in out.samples_mut(mu).iter_mut().zip(noise) {
            *g += d;
        }
    }
    Ok(out)
}
