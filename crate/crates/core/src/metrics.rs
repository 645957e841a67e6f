//! Process fidelity and related functionals.

use serde::Serialize;

use crate::network::{propagate_target_columns, GreenTrajectory, NetworkConfig};
use crate::synth::PulseSet;
use crate::numkit::{CMatrix, TimeGrid, Unitary};
use crate::{Error, Result, C64};

/// `F(t_k)` at the sampled grid indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityTrace {
    pub grid: TimeGrid,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl FidelityTrace {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.indices.iter().map(|&k| self.grid.time(k))
    }

    /// Fidelity at the last sample.
    pub fn final_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// `F = (|Tr(U^dag G_BA)|^2 + Tr(G_BA^dag G_BA)) / (N (N + 1))`.
pub fn process_fidelity(g_ba: &CMatrix, target: &Unitary) -> Result<f64> {
    let n = target.dim();
    if g_ba.nrows() != n || g_ba.ncols() != n {
        return Err(Error::invalid(format!(
            "G_BA is {}x{}, target is {n}x{n}",
            g_ba.nrows(),
            g_ba.ncols()
        )));
    }
    let u = target.matrix();
    let trace: C64 = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| u[(i, j)].conj() * g_ba[(i, j)])
        .sum();
    let frob: f64 = g_ba.iter().map(|z| z.norm_sqr()).sum();
    Ok((trace.norm_sqr() + frob) / (n * (n + 1)) as f64)
}

/// Fidelity from the stacked columns of `G U^dag` (column `l` of length `2N`
/// at offset `2N l`). Uses `Tr(U^dag G_BA) = Tr(G_BA U^dag)` and the fact that
/// right-multiplying by `U^dag` keeps the Frobenius norm.
pub(crate) fn fidelity_of_columns(v: &[C64], n: usize) -> f64 {
    let modes = 2 * n;
    let mut trace = C64::new(0.0, 0.0);
    let mut frob = 0.0;
    for (l, col) in v.chunks(modes).take(n).enumerate() {
        trace += col[n + l];
        frob += col[n..].iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    (trace.norm_sqr() + frob) / (n * (n + 1)) as f64
}

/// Fidelity at every stored sample of the trajectory.
pub fn fidelity_trace(traj: &GreenTrajectory, target: &Unitary) -> Result<FidelityTrace> {
    let indices: Vec<usize> = traj.indices().collect();
    let values = indices
        .iter()
        .map(|&k| {
            let g_ba = traj.g_ba(k).expect("stored index");
            process_fidelity(&g_ba, target)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FidelityTrace {
        grid: *traj.grid(),
        indices,
        values,
    })
}

/// Fidelity trace obtained by propagating only the `N` columns of `G U^dag`.
pub fn pulse_fidelity_trace(config: &NetworkConfig, pulses: &PulseSet, target: &Unitary) -> Result<FidelityTrace> {
    let n = config.n;
    let mut values = Vec::with_capacity(config.grid.len());
    propagate_target_columns(config, pulses, target, |_, v| values.push(fidelity_of_columns(v, n)))?;
    Ok(FidelityTrace {
        grid: config.grid,
        indices: (0..values.len()).collect(),
        values,
    })
}

/// `F(t_f)` for the given pulses.
pub fn pulse_fidelity(config: &NetworkConfig, pulses: &PulseSet, target: &Unitary) -> Result<f64> {
    let v = propagate_target_columns(config, pulses, target, |_, _| {})?;
    Ok(fidelity_of_columns(&v, config.n))
}

/// Ideal fidelity degraded by local decay, channel loss and circulator loss:
/// `F_ideal e^{-gamma t_p} (1 - p_ch) (1 - p_circ)^{2N}`.
pub fn analytic_loss_fidelity(f_ideal: f64, gamma: f64, t_p: f64, p_ch: f64, p_circ: f64, n: usize) -> f64 {
    f_ideal * (-gamma * t_p).exp() * (1.0 - p_ch) * (1.0 - p_circ).powi(2 * n as i32)
}
