use super::receiver::{arriving_field, ReceiverRow};
use super::report::{finish, prepare};
use super::{
    clamp_pulse, pulses::runs_of, ClampPhase, ImplicitScheme, Method, PulseSet, SynthesisOptions, SynthesisReport,
};
use crate::network::{Drive, NetworkConfig, Rk4};
use crate::numkit::Unitary;
use crate::{Error, Result, C64};

/// Receiver amplitudes below this are treated as zero.
const AMPLITUDE_FLOOR: f64 = 1e-14;

pub fn synthesize_implicit(config: &NetworkConfig, target: &Unitary, emitter: &PulseSet) -> Result<SynthesisReport> {
    synthesize_implicit_with(config, target, emitter, &SynthesisOptions::default())
}

/// Implicit construction: the receiver amplitude `a` is integrated alongside
/// the fixed part of the network and the dark condition `F + g* a = 0` is
/// solved for `g = -(F / a)*` wherever it is needed.
pub fn synthesize_implicit_with(
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
        // coupling from the dark condition, clamped to the physical range
        let solve = |t: f64, f: C64, a: C64| -> Result<(C64, bool)> {
            let raw = if a.norm() < AMPLITUDE_FLOOR {
                C64::new(f64::NAN, f64::NAN)
            } else {
                -(f / a).conj()
            };
            let source = match opts.clamp_phase {
                ClampPhase::CurrentNumerator => row.numerator(t, f),
                ClampPhase::InitialOutField => field.initial_emission.conj(),
            };
            let g = clamp_pulse(raw, source).ok_or_else(|| Error::SynthesisFailure {
                mode: l,
                time: t,
                reason: "indeterminate pulse with vanishing arriving field".into(),
            })?;
            Ok((g, g != raw))
        };

        let mut values = Vec::with_capacity(grid.len());
        let mut clamped = Vec::with_capacity(grid.len());
        let mut a = C64::new(0.0, 0.0);
        for k in 0..=grid.n_steps {
            let (g, was_clamped) = solve(grid.time(k), field.nodes[k], a)?;
            values.push(g);
            clamped.push(was_clamped);
            if k == grid.n_steps {
                break;
            }
            a = match opts.implicit_scheme {
                ImplicitScheme::Euler => row.euler(k, a, g),
                ImplicitScheme::Rk4 => row.step(k, a, |t, f, a| solve(t, f, a).map(|(g, _)| g))?,
            };
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(Error::NumericalBlowup { time: grid.time(k + 1) });
            }
        }
        drive.set_mode(mu, &values);
        pulses.set_mode(mu, values)?;
        pulses.set_clamp_info(mu, runs_of(&clamped));
    }
    finish(config, target, pulses, Method::Implicit, warnings)
}
