use serde::Serialize;

use super::{Interval, Method, PulseSet};
use crate::metrics::{fidelity_of_columns, FidelityTrace};
use crate::network::{check_compatible, integrate, target_columns_init, Drive, Generator, NetworkConfig};
use crate::numkit::{CMatrix, Unitary};
use crate::{Error, Result, C64};

/// Emitter pulse area below which not all of register A is guaranteed to
/// decay into the channel.
pub const MIN_EMITTER_AREA: f64 = 5.0;

/// Diagonal magnitudes of `G_BA U^dag` below this leave `theta_l` undefined.
pub const PHASE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// `int |g_{A,j}|^2 dt` is below [`MIN_EMITTER_AREA`].
    InsufficientEmission { mode: usize, area: f64 },
    /// `|[G_BA U^dag]_{ll}|` is too small to read off a phase; no rotation.
    PhaseUndefined { mode: usize, magnitude: f64 },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::InsufficientEmission { mode, area } => {
                write!(f, "emitter {mode} has pulse area {area:.3} < {MIN_EMITTER_AREA}")
            }
            Self::PhaseUndefined { mode, magnitude } => {
                write!(f, "receiver {mode}: diagonal magnitude {magnitude:.3e} too small for phase correction")
            }
        }
    }
}

/// Synthesized pulses with the diagnostics of a final propagation.
#[derive(Debug, Clone)]
pub struct SynthesisReport {
    pub method: Method,
    /// Emitter and receiver pulses (phase corrected).
    pub pulses: PulseSet,
    pub fidelity_trace: FidelityTrace,
    /// `|F_{N+l,l}(t_k)|`, the field left after receiver `l`, per receiver.
    pub dark_residual: Vec<Vec<f64>>,
    /// `max_t |F_{N,l}(t)|`, the peak field emitted by register A for column `l`.
    pub emission_peak: Vec<f64>,
    /// `P_l(t_k)` per column.
    pub excitation: Vec<Vec<f64>>,
    /// `max |P_l - 1|` outside clamp intervals.
    pub conservation_defect: f64,
    /// Probability that left column `l` past its receiver while a clamp was
    /// active: `int |F_{N+l,l}|^2` over the clamp intervals.
    pub clamp_leakage: Vec<f64>,
    /// Phases `theta_l` removed by the correction (zero where undefined).
    pub phases: Vec<f64>,
    pub phase_undefined: Vec<bool>,
    pub fidelity_before_correction: f64,
    /// `G(t_f, t_0)`.
    pub final_green: CMatrix,
    pub warnings: Vec<Warning>,
}

impl SynthesisReport {
    pub fn n(&self) -> usize {
        self.pulses.n()
    }

    pub fn final_fidelity(&self) -> f64 {
        self.fidelity_trace.final_value()
    }

    pub fn g_aa(&self) -> CMatrix {
        let n = self.n();
        self.final_green.view((0, 0), (n, n)).into_owned()
    }

    pub fn g_ba(&self) -> CMatrix {
        let n = self.n();
        self.final_green.view((n, 0), (n, n)).into_owned()
    }

    pub fn g_bb(&self) -> CMatrix {
        let n = self.n();
        self.final_green.view((n, n), (n, n)).into_owned()
    }

    /// Grid indices excluded from the residual and conservation checks of
    /// column `l`: clamp intervals of receivers `0..=l`.
    fn excluded(&self, l: usize) -> Vec<Interval> {
        let n = self.n();
        (0..=l).flat_map(|j| self.pulses.clamp_intervals(n + j).to_vec()).collect()
    }

    /// `max_{l, t} |F_{N+l,l}(t)| / max_t |F_{N,l}(t)|` outside clamp intervals.
    pub fn max_relative_dark_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (l, residual) in self.dark_residual.iter().enumerate() {
            let skip = self.excluded(l);
            let peak = self.emission_peak[l];
            for (k, r) in residual.iter().enumerate() {
                if skip.iter().any(|&(a, b)| a <= k && k <= b) {
                    continue;
                }
                worst = worst.max(if peak > 0.0 { r / peak } else { *r });
            }
        }
        worst
    }

    pub fn has_warnings(&self) -> bool {
        !self.warnings.is_empty()
    }
}

/// Checks inputs and returns the emitter pulses with an empty receiver half.
pub(super) fn prepare(config: &NetworkConfig, target: &Unitary, emitter: &PulseSet) -> Result<(PulseSet, Vec<Warning>)> {
    check_compatible(config, emitter)?;
    if target.dim() != config.n {
        return Err(Error::invalid(format!(
            "target is {0}x{0}, network has N = {1}",
            target.dim(),
            config.n
        )));
    }
    let n = config.n;
    let mut pulses = emitter.clone();
    let zeros = vec![C64::new(0.0, 0.0); pulses.grid().len()];
    for l in 0..n {
        pulses.set_mode(n + l, zeros.clone())?;
    }
    let warnings = (0..n)
        .filter_map(|j| {
            let area = pulses.pulse_area(j);
            (area < MIN_EMITTER_AREA).then_some(Warning::InsufficientEmission { mode: j, area })
        })
        .collect();
    Ok((pulses, warnings))
}

/// Phase correction followed by the diagnostic propagation.
pub(super) fn finish(
    config: &NetworkConfig,
    target: &Unitary,
    mut pulses: PulseSet,
    method: Method,
    mut warnings: Vec<Warning>,
) -> Result<SynthesisReport> {
    let n = config.n;
    let modes = config.modes();
    warnings.retain(|w| !matches!(w, Warning::PhaseUndefined { .. }));

    let drive = Drive::new(&pulses);
    let mut v = target_columns_init(target, modes);
    integrate(config, &drive, &mut v, modes, |_, _| {})?;
    let fidelity_before_correction = fidelity_of_columns(&v, n);

    let mut phases = vec![0.0; n];
    let mut phase_undefined = vec![false; n];
    for l in 0..n {
        let d = v[l * modes + n + l];
        if d.norm() < PHASE_FLOOR {
            phase_undefined[l] = true;
            warnings.push(Warning::PhaseUndefined { mode: l, magnitude: d.norm() });
            continue;
        }
        phases[l] = d.arg();
        pulses.scale_mode(n + l, C64::from_polar(1.0, -phases[l]));
    }

    let diag = diagnose(config, target, &pulses)?;
    Ok(SynthesisReport {
        method,
        pulses,
        fidelity_trace: diag.fidelity,
        dark_residual: diag.dark_residual,
        emission_peak: diag.emission_peak,
        excitation: diag.excitation,
        conservation_defect: diag.conservation_defect,
        clamp_leakage: diag.clamp_leakage,
        phases,
        phase_undefined,
        fidelity_before_correction,
        final_green: diag.final_green,
        warnings,
    })
}

/// Re-measures and removes the diagonal phases of `G_BA U^dag`, then
/// re-propagates.
pub fn phase_correct(report: SynthesisReport, config: &NetworkConfig, target: &Unitary) -> Result<SynthesisReport> {
    check_compatible(config, &report.pulses)?;
    if target.dim() != config.n {
        return Err(Error::invalid("target dimension does not match the network"));
    }
    finish(config, target, report.pulses, report.method, report.warnings)
}

struct Diagnostics {
    fidelity: FidelityTrace,
    dark_residual: Vec<Vec<f64>>,
    emission_peak: Vec<f64>,
    excitation: Vec<Vec<f64>>,
    conservation_defect: f64,
    clamp_leakage: Vec<f64>,
    final_green: CMatrix,
}

/// Propagates the `N` columns of `G U^dag` together with the register-B
/// columns of `G` and records everything the report needs.
fn diagnose(config: &NetworkConfig, target: &Unitary, pulses: &PulseSet) -> Result<Diagnostics> {
    let n = config.n;
    let modes = config.modes();
    let npts = config.grid.len();
    let gen = Generator::new(config);
    let drive = Drive::new(pulses);

    let mut state = target_columns_init(target, modes);
    state.resize(2 * n * modes, C64::new(0.0, 0.0));
    for j in 0..n {
        state[(n + j) * modes + n + j] = C64::new(1.0, 0.0);
    }

    let mut fidelity = Vec::with_capacity(npts);
    let mut dark_residual = vec![Vec::with_capacity(npts); n];
    let mut emission_peak = vec![0.0f64; n];
    let mut excitation: Vec<Vec<f64>> = vec![Vec::with_capacity(npts); n];
    integrate(config, &drive, &mut state, modes, |k, x| {
        let v = &x[..n * modes];
        fidelity.push(fidelity_of_columns(v, n));
        let g = drive.node(k);
        for (l, col) in v.chunks(modes).enumerate() {
            emission_peak[l] = emission_peak[l].max(gen.incoming(g, col, n).norm());
            dark_residual[l].push(gen.incoming(g, col, n + l + 1).norm());
            excitation[l].push(col[..n + l + 1].iter().map(|z| z.norm_sqr()).sum());
        }
    })?;

    let u = target.matrix();
    // G_{:,A} = (G U^dag) U
    let final_green = CMatrix::from_fn(modes, modes, |mu, j| {
        if j < n {
            (0..n).map(|l| state[l * modes + mu] * u[(l, j)]).sum()
        } else {
            state[j * modes + mu]
        }
    });

    let mut conservation_defect: f64 = 0.0;
    let mut clamp_leakage = vec![0.0; n];
    for l in 0..n {
        let skip: Vec<Interval> = (0..=l).flat_map(|j| pulses.clamp_intervals(n + j).to_vec()).collect();
        let inside = |k: usize| skip.iter().any(|&(a, b)| a <= k && k <= b);
        for (k, &pk) in excitation[l].iter().enumerate() {
            if !inside(k) {
                conservation_defect = conservation_defect.max((pk - 1.0).abs());
            }
        }
        let r = &dark_residual[l];
        for k in 0..r.len() - 1 {
            if inside(k) || inside(k + 1) {
                clamp_leakage[l] += 0.5 * config.grid.dt * (r[k] * r[k] + r[k + 1] * r[k + 1]);
            }
        }
    }

    Ok(Diagnostics {
        fidelity: FidelityTrace {
            grid: config.grid,
            indices: (0..npts).collect(),
            values: fidelity,
        },
        dark_residual,
        emission_peak,
        excitation,
        conservation_defect,
        clamp_leakage,
        final_green,
    })
}
