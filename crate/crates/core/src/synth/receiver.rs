//! Pieces shared by the two constructions: the field arriving at a receiver
//! and the time stepping of that receiver's amplitude.

use crate::network::{Drive, Generator, NetworkConfig, Rk4};
use crate::numkit::{interp, TimeGrid, Unitary};
use crate::{Result, C64};

/// Field arriving at receiver `l` for the excitation `Psi_l^dag |vac>`,
/// sampled on the grid and at interval midpoints.
pub(super) struct Arriving {
    pub nodes: Vec<C64>,
    pub mids: Vec<C64>,
    /// Field leaving register A at `t0`.
    pub initial_emission: C64,
}

pub(super) fn arriving_field(
    config: &NetworkConfig,
    rk: &mut Rk4,
    drive: &Drive,
    target: &Unitary,
    l: usize,
) -> Result<Arriving> {
    let n = config.n;
    let rows = n + l;
    let mut state = vec![C64::new(0.0, 0.0); config.modes()];
    for k in 0..n {
        state[k] = target.get(l, k).conj();
    }
    let initial_emission = rk.generator().incoming(drive.node(0), &state, n);
    let mut nodes = Vec::with_capacity(config.grid.len());
    nodes.push(rk.generator().incoming(drive.node(0), &state, rows));
    for k in 0..config.grid.n_steps {
        rk.step(drive, k, &mut state, rows)?;
        nodes.push(rk.generator().incoming(drive.node(k + 1), &state, rows));
    }
    let mids = interp::midpoints(&nodes);
    Ok(Arriving { nodes, mids, initial_emission })
}

/// Amplitude of receiver `mu` driven by a known arriving field.
pub(super) struct ReceiverRow<'a> {
    pub gen: &'a Generator,
    pub mu: usize,
    pub detuning: f64,
    pub grid: TimeGrid,
    pub field: &'a Arriving,
}

impl ReceiverRow<'_> {
    /// `exp(-i Delta (t - t0))`.
    pub fn rotation(&self, t: f64) -> C64 {
        C64::from_polar(1.0, -self.detuning * (t - self.grid.t0))
    }

    /// Numerator of the explicit formula, `F* exp(-i Delta (t - t0))`.
    pub fn numerator(&self, t: f64, f: C64) -> C64 {
        f.conj() * self.rotation(t)
    }

    /// One RK4 step of the amplitude from `t_k`, with the coupling given as a
    /// function of time, arriving field and amplitude.
    pub fn step<G>(&self, k: usize, a: C64, coupling: G) -> Result<C64>
    where
        G: Fn(f64, C64, C64) -> Result<C64>,
    {
        let h = self.grid.dt;
        let t = self.grid.time(k);
        let f = &self.field;
        let rate = |t: f64, field: C64, a: C64| -> Result<C64> {
            let g = coupling(t, field, a)?;
            Ok(self.gen.row_rate(self.mu, g, a, field))
        };
        let k1 = rate(t, f.nodes[k], a)?;
        let k2 = rate(t + 0.5 * h, f.mids[k], a + k1 * (0.5 * h))?;
        let k3 = rate(t + 0.5 * h, f.mids[k], a + k2 * (0.5 * h))?;
        let k4 = rate(t + h, f.nodes[k + 1], a + k3 * h)?;
        Ok(a + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0))
    }

    pub fn euler(&self, k: usize, a: C64, g: C64) -> C64 {
        a + self.gen.row_rate(self.mu, g, a, self.field.nodes[k]) * self.grid.dt
    }
}
