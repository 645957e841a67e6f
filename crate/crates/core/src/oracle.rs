//! Brute-force check of the cascaded model against an explicit waveguide.
//!
//! The channel is replaced by `M` discrete right-moving modes with detunings
//! `delta_k = -B + (k + 1/2) dw`, `dw = 2B/M`, and mode `mu` sits at a delay
//! `tau_mu` along it. In the single-excitation sector, with field amplitudes
//! in the interaction picture,
//!
//! ```text
//! dc_mu/dt  = -i Delta_mu c_mu - g_mu(t) kappa sum_k exp(-i delta_k (t - tau_mu)) psi_k
//! dpsi_k/dt = kappa sum_mu g*_mu(t) c_mu exp(i delta_k (t - tau_mu)),   kappa = sqrt(dw / 2 pi)
//! ```
//!
//! For `B -> infinity` this reduces to the cascaded equations with delays.
//! The pulses of mode `mu` are applied shifted by `tau_mu` (time-advanced
//! couplings), so the delays drop out and the register-B amplitudes read at
//! `t_f + tau_max` must reproduce `G_BA(t_f, t_0)`.

use serde::Serialize;

use crate::exec::Execution;
use crate::network::{check_compatible, GreenTrajectory, NetworkConfig};
use crate::numkit::{interp, CMatrix};
use crate::synth::PulseSet;
use crate::{Error, Result, C64};

/// Smallest bandwidth for which the broadband elimination is trusted.
pub const MIN_BANDWIDTH: f64 = 10.0;
/// Largest integrator step in units of `1/B`.
const STEP_PER_BANDWIDTH: f64 = 0.125;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveguideModel {
    /// Half width `B` of the frequency band around the carrier.
    pub bandwidth: f64,
    pub n_wg_modes: usize,
    /// Propagation delay of each of the `2N` modes, strictly increasing.
    pub positions: Vec<f64>,
}

impl WaveguideModel {
    pub fn new(bandwidth: f64, n_wg_modes: usize, positions: Vec<f64>) -> Result<Self> {
        let m = Self { bandwidth, n_wg_modes, positions };
        m.validate()?;
        Ok(m)
    }

    /// Modes spaced by `separation` with the smallest adequate number of
    /// waveguide modes for `duration` (the protocol time).
    pub fn evenly_spaced(n: usize, bandwidth: f64, separation: f64, duration: f64) -> Result<Self> {
        let positions: Vec<f64> = (0..2 * n).map(|mu| mu as f64 * separation).collect();
        let span = duration + positions.last().copied().unwrap_or(0.0);
        Self::new(bandwidth, required_modes(bandwidth, span), positions)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth.is_finite() && self.bandwidth >= MIN_BANDWIDTH) {
            return Err(Error::invalid(format!(
                "bandwidth must be at least {MIN_BANDWIDTH}, got {}",
                self.bandwidth
            )));
        }
        if self.n_wg_modes == 0 {
            return Err(Error::invalid("at least one waveguide mode is required"));
        }
        if self.positions.iter().any(|x| !x.is_finite()) || self.positions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("mode positions must be finite and strictly increasing"));
        }
        Ok(())
    }

    fn mode_spacing(&self) -> f64 {
        2.0 * self.bandwidth / self.n_wg_modes as f64
    }
}

/// Waveguide modes needed so that the discrete band does not revive within
/// `span`: `M >= 4 B span / pi`.
pub fn required_modes(bandwidth: f64, span: f64) -> usize {
    (4.0 * bandwidth * span / std::f64::consts::PI).ceil() as usize
}

/// Oracle map together with integration diagnostics.
#[derive(Debug, Clone)]
pub struct OracleRun {
    pub g_ba: CMatrix,
    /// Largest change of the total single-excitation norm over any column.
    pub norm_drift: f64,
    pub steps: usize,
    pub step: f64,
}

/// Register-B amplitudes after exciting each register-A mode in turn.
pub fn simulate_waveguide(model: &WaveguideModel, config: &NetworkConfig, pulses: &PulseSet) -> Result<CMatrix> {
    Ok(simulate_waveguide_with(model, config, pulses, Execution::default())?.g_ba)
}

pub fn simulate_waveguide_with(
    model: &WaveguideModel,
    config: &NetworkConfig,
    pulses: &PulseSet,
    execution: Execution,
) -> Result<OracleRun> {
    model.validate()?;
    check_compatible(config, pulses)?;
    if !config.is_lossless() {
        return Err(Error::invalid("the waveguide oracle only covers lossless networks"));
    }
    let n = config.n;
    let modes = config.modes();
    if model.positions.len() != modes {
        return Err(Error::invalid(format!(
            "expected {modes} mode positions, got {}",
            model.positions.len()
        )));
    }
    let grid = config.grid;
    let offset = model.positions[0];
    let delays: Vec<f64> = model.positions.iter().map(|x| x - offset).collect();
    let span = grid.duration() + delays[modes - 1];
    let required = required_modes(model.bandwidth, span);
    if model.n_wg_modes < required {
        return Err(Error::UnderResolved { required, given: model.n_wg_modes });
    }

    let substeps = (grid.dt * model.bandwidth / STEP_PER_BANDWIDTH).ceil().max(1.0) as usize;
    let h = grid.dt / substeps as f64;
    let steps = (span / h).round() as usize;
    let sim = Simulator::new(model, config, pulses, &delays);

    let columns = execution.map(n, |j| sim.run(j, h, steps));
    let mut g_ba = CMatrix::zeros(n, n);
    let mut norm_drift: f64 = 0.0;
    for (j, col) in columns.into_iter().enumerate() {
        let (c, drift) = col?;
        norm_drift = norm_drift.max(drift);
        for i in 0..n {
            g_ba[(i, j)] = c[n + i];
        }
    }
    Ok(OracleRun { g_ba, norm_drift, steps, step: h })
}

struct Simulator<'a> {
    pulses: &'a PulseSet,
    delays: &'a [f64],
    detunings: &'a [f64],
    t0: f64,
    tf: f64,
    dt: f64,
    m: usize,
    kappa: f64,
    spacing: f64,
    bottom: f64,
}

impl<'a> Simulator<'a> {
    fn new(model: &WaveguideModel, config: &'a NetworkConfig, pulses: &'a PulseSet, delays: &'a [f64]) -> Self {
        let spacing = model.mode_spacing();
        Self {
            pulses,
            delays,
            detunings: &config.detunings,
            t0: config.grid.t0,
            tf: config.grid.tf,
            dt: config.grid.dt,
            m: model.n_wg_modes,
            kappa: (spacing / (2.0 * std::f64::consts::PI)).sqrt(),
            spacing,
            bottom: -model.bandwidth + 0.5 * spacing,
        }
    }

    /// Lab-frame coupling of mode `mu`: the pulse delayed by its position,
    /// zero outside the protocol window.
    fn coupling(&self, mu: usize, t: f64) -> C64 {
        let s = t - self.delays[mu];
        if s < self.t0 || s > self.tf {
            return C64::new(0.0, 0.0);
        }
        interp::sample_at(self.pulses.mode(mu), self.t0, self.dt, s)
    }

    fn rate(&self, t: f64, c: &[C64], psi: &[C64], dc: &mut [C64], dpsi: &mut [C64]) {
        dpsi.fill(C64::new(0.0, 0.0));
        for (mu, (out, &amp)) in dc.iter_mut().zip(c).enumerate() {
            *out = C64::new(0.0, -self.detunings[mu]) * amp;
            let g = self.coupling(mu, t);
            if g == C64::new(0.0, 0.0) {
                continue;
            }
            let s = t - self.delays[mu];
            let step = C64::from_polar(1.0, self.spacing * s);
            let mut phase = C64::from_polar(1.0, self.bottom * s);
            let source = g.conj() * amp * self.kappa;
            let mut acc = C64::new(0.0, 0.0);
            for (d, p) in dpsi.iter_mut().zip(psi) {
                acc += phase.conj() * p;
                *d += source * phase;
                phase *= step;
            }
            *out -= g * self.kappa * acc;
        }
    }

    /// Final register amplitudes for an excitation starting in mode `j`,
    /// and the drift of the total norm.
    fn run(&self, j: usize, h: f64, steps: usize) -> Result<(Vec<C64>, f64)> {
        let nm = self.delays.len();
        let z = C64::new(0.0, 0.0);
        let mut c = vec![z; nm];
        c[j] = C64::new(1.0, 0.0);
        let mut psi = vec![z; self.m];
        let mut kc = [vec![z; nm], vec![z; nm], vec![z; nm], vec![z; nm]];
        let mut kp = [vec![z; self.m], vec![z; self.m], vec![z; self.m], vec![z; self.m]];
        let (mut yc, mut yp) = (vec![z; nm], vec![z; self.m]);
        let mut drift: f64 = 0.0;
        for step in 0..steps {
            let t = self.t0 + step as f64 * h;
            for stage in 0..4 {
                let (w, ts) = match stage {
                    0 => (0.0, t),
                    3 => (h, t + h),
                    _ => (0.5 * h, t + 0.5 * h),
                };
                if stage == 0 {
                    yc.copy_from_slice(&c);
                    yp.copy_from_slice(&psi);
                } else {
                    for i in 0..nm {
                        yc[i] = c[i] + kc[stage - 1][i] * w;
                    }
                    for i in 0..self.m {
                        yp[i] = psi[i] + kp[stage - 1][i] * w;
                    }
                }
                self.rate(ts, &yc, &yp, &mut kc[stage], &mut kp[stage]);
            }
            for i in 0..nm {
                c[i] += (kc[0][i] + (kc[1][i] + kc[2][i]) * 2.0 + kc[3][i]) * (h / 6.0);
            }
            for i in 0..self.m {
                psi[i] += (kp[0][i] + (kp[1][i] + kp[2][i]) * 2.0 + kp[3][i]) * (h / 6.0);
            }
            let norm: f64 = c.iter().chain(&psi).map(|x| x.norm_sqr()).sum();
            if !norm.is_finite() {
                return Err(Error::NumericalBlowup { time: t + h });
            }
            drift = drift.max((norm - 1.0).abs());
        }
        Ok((c, drift))
    }
}

/// `max |oracle - G_BA(t_f)|` elementwise.
pub fn compare_to_cascaded(oracle: &CMatrix, traj: &GreenTrajectory) -> Result<f64> {
    let g_ba = traj.g_ba(traj.grid().n_steps).expect("final sample is always stored");
    compare_to_green(oracle, &g_ba)
}

pub fn compare_to_green(oracle: &CMatrix, g_ba: &CMatrix) -> Result<f64> {
    if oracle.shape() != g_ba.shape() {
        return Err(Error::invalid(format!(
            "oracle is {:?}, G_BA is {:?}",
            oracle.shape(),
            g_ba.shape()
        )));
    }
    Ok(oracle.iter().zip(g_ba.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
}
