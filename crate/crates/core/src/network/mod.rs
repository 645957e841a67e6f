//! Cascaded network dynamics: the coupling matrix `M(t)` and the Green's
//! function `G(t, t0)` obeying `dG/dt = -M(t) G`, `G(t0, t0) = 1`.
//!
//! `M` is lower triangular. Its strictly lower part factorizes along the
//! channel, `M_{mu nu} = g_mu g*_nu w_{mu nu}`, where the loss weight
//! `w = (1 - p_circ)^(mu - nu) sqrt(1 - p_ch)^sigma` is a product of per-link
//! factors. Applying `M` to a vector therefore only needs a running sum of
//! the field travelling down the channel, which is what [`Generator`] does;
//! the dense [`coupling_matrix`] exists for inspection and cross-checks.

mod fields;
mod propagate;

pub use fields::{excitation_probability, out_field};
pub use propagate::{
    final_columns, final_green_ba, propagate_green, propagate_green_strided,
    propagate_target_columns,
    GreenTrajectory,
};
pub(crate) use propagate::{check_compatible, integrate, target_columns_init, Drive, Rk4};

use serde::{Deserialize, Serialize};

use crate::numkit::{CMatrix, TimeGrid};
use crate::{Error, Result, C64};

/// Physical parameters of the two-register network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Modes per register, `N`.
    pub n: usize,
    /// `2N` static detunings from the common frame frequency.
    pub detunings: Vec<f64>,
    /// Local (non-channel) decay rate `gamma` of every mode.
    pub local_decay: f64,
    /// Channel loss probability between the registers.
    pub p_channel: f64,
    /// Loss probability per circulator pass.
    pub p_circulator: f64,
    pub grid: TimeGrid,
}

impl NetworkConfig {
    pub fn ideal(n: usize, grid: TimeGrid) -> Self {
        Self {
            n,
            detunings: vec![0.0; 2 * n],
            local_decay: 0.0,
            p_channel: 0.0,
            p_circulator: 0.0,
            grid,
        }
    }

    pub fn modes(&self) -> usize {
        2 * self.n
    }

    pub fn with_grid(&self, grid: TimeGrid) -> Self {
        Self { grid, ..self.clone() }
    }

    /// Same network with local decay and all loss probabilities removed.
    pub fn lossless(&self) -> Self {
        Self { local_decay: 0.0, p_channel: 0.0, p_circulator: 0.0, ..self.clone() }
    }

    pub fn is_lossless(&self) -> bool {
        self.local_decay == 0.0 && self.p_channel == 0.0 && self.p_circulator == 0.0
    }

    pub fn is_ideal(&self) -> bool {
        self.is_lossless() && self.detunings.iter().all(|&d| d == 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("network needs at least one mode per register"));
        }
        if self.detunings.len() != self.modes() {
            return Err(Error::invalid(format!(
                "expected {} detunings, got {}",
                self.modes(),
                self.detunings.len()
            )));
        }
        if self.detunings.iter().any(|d| !d.is_finite()) {
            return Err(Error::invalid("detunings must be finite"));
        }
        if !(self.local_decay.is_finite() && self.local_decay >= 0.0) {
            return Err(Error::invalid(format!("local decay must be >= 0, got {}", self.local_decay)));
        }
        for (name, p) in [("p_channel", self.p_channel), ("p_circulator", self.p_circulator)] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1), got {p}")));
            }
        }
        Ok(())
    }
}

/// `M(t)` at a single time, dense `2N x 2N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix(pub CMatrix);

/// Dense coupling matrix for the couplings `g` (all `2N` modes) at one time.
///
/// `M_{mu nu} = (i Delta_mu + gamma/2) delta_{mu nu}
///            + g_mu g*_nu (1 - p_circ)^(mu - nu) sqrt(1 - p_ch)^sigma(mu, nu) Theta(mu - nu)`
/// with `Theta(0) = 1/2` and `sigma = 1` only for B rows and A columns.
pub fn coupling_matrix(config: &NetworkConfig, g: &[C64]) -> Result<CouplingMatrix> {
    let modes = config.modes();
    if g.len() != modes {
        return Err(Error::invalid(format!("expected {modes} couplings, got {}", g.len())));
    }
    if g.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("couplings must be finite"));
    }
    let r = 1.0 - config.p_circulator;
    let s = (1.0 - config.p_channel).sqrt();
    let m = CMatrix::from_fn(modes, modes, |mu, nu| {
        if nu > mu {
            return C64::new(0.0, 0.0);
        }
        let mut w = r.powi((mu - nu) as i32);
        if mu >= config.n && nu < config.n {
            w *= s;
        }
        let theta = if mu == nu { 0.5 } else { 1.0 };
        let mut entry = g[mu] * g[nu].conj() * (w * theta);
        if mu == nu {
            entry += C64::new(config.local_decay / 2.0, config.detunings[mu]);
        }
        entry
    });
    Ok(CouplingMatrix(m))
}

/// Matrix-free application of `-M(t)`.
#[derive(Debug, Clone)]
pub(crate) struct Generator {
    n: usize,
    diag: Vec<C64>,
    link: f64,
    channel: f64,
}

impl Generator {
    pub fn new(config: &NetworkConfig) -> Self {
        let diag = config
            .detunings
            .iter()
            .map(|&d| C64::new(config.local_decay / 2.0, d))
            .collect();
        Self {
            n: config.n,
            diag,
            link: 1.0 - config.p_circulator,
            channel: (1.0 - config.p_channel).sqrt(),
        }
    }

    /// Field arriving at mode `mu` from the modes upstream of it.
    pub fn incoming(&self, g: &[C64], x: &[C64], mu: usize) -> C64 {
        let mut incoming = C64::new(0.0, 0.0);
        for nu in 0..mu {
            incoming += g[nu].conj() * x[nu];
            let mut w = self.link;
            if nu + 1 == self.n {
                w *= self.channel;
            }
            if w != 1.0 {
                incoming *= w;
            }
        }
        incoming
    }

    /// `-(M x)[mu]` given the mode's own coupling, amplitude and incoming field.
    #[inline]
    pub fn row_rate(&self, mu: usize, g: C64, x: C64, incoming: C64) -> C64 {
        -((self.diag[mu] + 0.5 * g.norm_sqr()) * x + g * incoming)
    }

    /// `out[mu] = -(M x)[mu]` for `mu < rows`. Rows of `M` only reference
    /// columns up to their own index, so the leading block is self-contained.
    #[inline]
    pub fn apply(&self, g: &[C64], x: &[C64], out: &mut [C64], rows: usize) {
        // field arriving at mode mu from everything upstream
        let mut incoming = C64::new(0.0, 0.0);
        for mu in 0..rows {
            let gm = g[mu];
            let xm = x[mu];
            out[mu] = -((self.diag[mu] + 0.5 * gm.norm_sqr()) * xm + gm * incoming);
            incoming += gm.conj() * xm;
            let mut w = self.link;
            if mu + 1 == self.n {
                w *= self.channel;
            }
            if w != 1.0 {
                incoming *= w;
            }
        }
    }
}
