use super::receiver::{arriving_field, ReceiverRow};
use super::report::{finish, prepare};
use super::{
    clamp_pulse, pulses::runs_of, ClampPhase, Method, PulseSet, Quadrature, SynthesisOptions, SynthesisReport,
};
use crate::network::{Drive, NetworkConfig, Rk4};
use crate::numkit::Unitary;
use crate::{Error, Result, C64};

pub fn synthesize_explicit(config: &NetworkConfig, target: &Unitary, emitter: &PulseSet) -> Result<SynthesisReport> {
    synthesize_explicit_with(config, target, emitter, &SynthesisOptions::default())
}

/// Explicit construction: for each receiver, integrate the already fixed part
/// of the network, record the field `F` arriving at the receiver, and set
/// `g = F* exp(-i Delta (t - t0)) / sqrt(int_{t0}^t |F|^2)`.
///
/// The closed form assumes the receiver has absorbed all of `int |F|^2`
/// with the phase the dark condition dictates. That only holds while it is
/// not clamped, so during clamp intervals the receiver amplitude is
/// integrated directly and the integral (and phase) re-seeded from it when
/// the clamp is released.
pub fn synthesize_explicit_with(
    config: &NetworkConfig,
    target: &Unitary,
    emitter: &PulseSet,
    opts: &SynthesisOptions,
) -> Result<SynthesisReport> {
    let (mut pulses, warnings) = prepare(config, target, emitter)?;
    let n = config.n;
    let grid = config.grid;
    let mut drive = Drive::new(&pulses);
    let mut rk = Rk4::new(config);

    for l in 0..n {
        let mu = n + l;
        let field = arriving_field(config, &mut rk, &drive, target, l)?;
        let row = ReceiverRow {
            gen: rk.generator(),
            mu,
            detuning: config.detunings[mu],
            grid,
            field: &field,
        };
        let fail = |t: f64| Error::SynthesisFailure {
            mode: l,
            time: t,
            reason: "indeterminate pulse with vanishing arriving field".into(),
        };
        let phase_source = |t: f64, f: C64| match opts.clamp_phase {
            ClampPhase::CurrentNumerator => row.numerator(t, f),
            ClampPhase::InitialOutField => field.initial_emission.conj(),
        };
        let held = |t: f64, f: C64, _a: C64| -> Result<C64> {
            clamp_pulse(C64::new(f64::INFINITY, 0.0), phase_source(t, f)).ok_or_else(|| fail(t))
        };

        let power: Vec<f64> = field.nodes.iter().map(|f| f.norm_sqr()).collect();
        let increments: Vec<f64> = match opts.quadrature {
            Quadrature::Trapezoid => power.windows(2).map(|w| 0.5 * grid.dt * (w[0] + w[1])).collect(),
            Quadrature::Cubic => cubic_increments(&power, grid.dt),
        };

        let mut area = 0.0;
        let mut phase = C64::new(1.0, 0.0);
        let mut amp = C64::new(0.0, 0.0);
        let mut values = Vec::with_capacity(grid.len());
        let mut clamped = Vec::with_capacity(grid.len());
        let mut was_clamped = true;
        for (k, &f) in field.nodes.iter().enumerate() {
            let t = grid.time(k);
            if k > 0 {
                if was_clamped {
                    amp = row.step(k - 1, amp, held)?;
                    area = amp.norm_sqr();
                    let s = -amp * row.rotation(t).conj();
                    if s.norm() > 0.0 {
                        phase = s / s.norm();
                    }
                } else {
                    area += increments[k - 1];
                }
            }
            let raw = row.numerator(t, f) * phase / area.sqrt();
            let g = clamp_pulse(raw, phase_source(t, f)).ok_or_else(|| fail(t))?;
            let now_clamped = g != raw;
            if now_clamped && !was_clamped {
                // amplitude implied by the dark condition up to here
                amp = -phase * row.rotation(t) * area.sqrt();
            }
            was_clamped = now_clamped;
            clamped.push(now_clamped);
            values.push(g);
        }
        drive.set_mode(mu, &values);
        pulses.set_mode(mu, values)?;
        pulses.set_clamp_info(mu, runs_of(&clamped));
    }
    finish(config, target, pulses, Method::Explicit, warnings)
}

/// `int_{t_k}^{t_{k+1}} f` from the cubic through the four nearest samples.
/// `f` is non-negative; where it varies over orders of magnitude between
/// samples the cubic can dip below zero and the trapezoid is used instead.
fn cubic_increments(f: &[f64], dt: f64) -> Vec<f64> {
    let n = f.len();
    let trapezoid = |k: usize| 0.5 * dt * (f[k] + f[k + 1]);
    if n < 4 {
        return (0..n - 1).map(trapezoid).collect();
    }
    let h = dt / 24.0;
    let mut out = Vec::with_capacity(n - 1);
    out.push(h * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]));
    for k in 1..n - 2 {
        out.push(h * (-f[k - 1] + 13.0 * f[k] + 13.0 * f[k + 1] - f[k + 2]));
    }
    out.push(h * (f[n - 4] - 5.0 * f[n - 3] + 19.0 * f[n - 2] + 9.0 * f[n - 1]));
    for (k, v) in out.iter_mut().enumerate() {
        if *v < 0.0 {
            *v = trapezoid(k);
        }
    }
    out
}
