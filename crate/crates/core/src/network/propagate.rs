use super::{Generator, NetworkConfig};
use crate::numkit::{interp, CMatrix, TimeGrid, Unitary};
use crate::synth::PulseSet;
use crate::{Error, Result, C64};

/// Pulse values laid out time-major at grid nodes and interval midpoints.
#[derive(Debug, Clone)]
pub(crate) struct Drive {
    modes: usize,
    nodes: Vec<C64>,
    mids: Vec<C64>,
}

impl Drive {
    pub fn new(pulses: &PulseSet) -> Self {
        let modes = pulses.modes();
        let npts = pulses.grid().len();
        let mut drive = Self {
            modes,
            nodes: vec![C64::new(0.0, 0.0); npts * modes],
            mids: vec![C64::new(0.0, 0.0); (npts - 1) * modes],
        };
        for mu in 0..modes {
            drive.set_mode(mu, pulses.mode(mu));
        }
        drive
    }

    pub fn set_mode(&mut self, mu: usize, samples: &[C64]) {
        for (k, &z) in samples.iter().enumerate() {
            self.nodes[k * self.modes + mu] = z;
        }
        for (k, z) in interp::midpoints(samples).into_iter().enumerate() {
            self.mids[k * self.modes + mu] = z;
        }
    }

    #[inline]
    pub fn node(&self, k: usize) -> &[C64] {
        &self.nodes[k * self.modes..(k + 1) * self.modes]
    }

    #[inline]
    pub fn mid(&self, k: usize) -> &[C64] {
        &self.mids[k * self.modes..(k + 1) * self.modes]
    }
}

/// Classical fourth-order Runge-Kutta stepper for columns of `G`.
#[derive(Debug, Clone)]
pub(crate) struct Rk4 {
    gen: Generator,
    modes: usize,
    grid: TimeGrid,
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    y: Vec<C64>,
}

impl Rk4 {
    pub fn new(config: &NetworkConfig) -> Self {
        let modes = config.modes();
        let z = vec![C64::new(0.0, 0.0); modes];
        Self {
            gen: Generator::new(config),
            modes,
            grid: config.grid,
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            y: z,
        }
    }

    pub fn generator(&self) -> &Generator {
        &self.gen
    }

    /// Advances every column in `state` from `t_k` to `t_{k+1}`, touching only
    /// the leading `rows` entries of each column.
    pub fn step(&mut self, drive: &Drive, k: usize, state: &mut [C64], rows: usize) -> Result<()> {
        let h = self.grid.dt;
        let (g0, gm, g1) = (drive.node(k), drive.mid(k), drive.node(k + 1));
        for col in state.chunks_mut(self.modes) {
            let x = &mut col[..rows];
            self.gen.apply(g0, x, &mut self.k1, rows);
            for i in 0..rows {
                self.y[i] = x[i] + self.k1[i] * (0.5 * h);
            }
            self.gen.apply(gm, &self.y, &mut self.k2, rows);
            for i in 0..rows {
                self.y[i] = x[i] + self.k2[i] * (0.5 * h);
            }
            self.gen.apply(gm, &self.y, &mut self.k3, rows);
            for i in 0..rows {
                self.y[i] = x[i] + self.k3[i] * h;
            }
            self.gen.apply(g1, &self.y, &mut self.k4, rows);
            let mut finite = true;
            for i in 0..rows {
                x[i] += (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * (h / 6.0);
                finite &= x[i].re.is_finite() && x[i].im.is_finite();
            }
            if !finite {
                return Err(Error::NumericalBlowup { time: self.grid.time(k + 1) });
            }
        }
        Ok(())
    }
}

pub(crate) fn check_compatible(config: &NetworkConfig, pulses: &PulseSet) -> Result<()> {
    config.validate()?;
    if pulses.n() != config.n {
        return Err(Error::invalid(format!(
            "pulses are for N = {}, network has N = {}",
            pulses.n(),
            config.n
        )));
    }
    let (a, b) = (pulses.grid(), &config.grid);
    if a.n_steps != b.n_steps || (a.dt - b.dt).abs() > 1e-12 * b.dt {
        return Err(Error::invalid("pulses are not defined on the network grid"));
    }
    Ok(())
}

/// Integrates the given columns (each of length `2N`, stacked) over the whole
/// grid, calling `visit(k, state)` at every grid index including `k = 0`.
pub(crate) fn integrate<F>(
    config: &NetworkConfig,
    drive: &Drive,
    state: &mut [C64],
    rows: usize,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(usize, &[C64]),
{
    let mut rk = Rk4::new(config);
    visit(0, state);
    for k in 0..config.grid.n_steps {
        rk.step(drive, k, state, rows)?;
        visit(k + 1, state);
    }
    Ok(())
}

/// Final values of the columns started from `init` (stacked, `2N` each).
pub fn final_columns(config: &NetworkConfig, pulses: &PulseSet, init: Vec<C64>) -> Result<Vec<C64>> {
    check_compatible(config, pulses)?;
    if init.len() % config.modes() != 0 {
        return Err(Error::invalid("initial columns must have length 2N"));
    }
    let drive = Drive::new(pulses);
    let mut state = init;
    integrate(config, &drive, &mut state, config.modes(), |_, _| {})?;
    Ok(state)
}

/// Initial columns of `G U^dag` with `U^dag` embedded as `diag(U^dag, 0)`:
/// column `l` starts at `(conj(U[l, :]), 0)`.
pub(crate) fn target_columns_init(target: &Unitary, modes: usize) -> Vec<C64> {
    let n = target.dim();
    let mut init = vec![C64::new(0.0, 0.0); n * modes];
    for l in 0..n {
        for k in 0..n {
            init[l * modes + k] = target.get(l, k).conj();
        }
    }
    init
}

/// Streams the `N` columns of `G(t, t0) U^dag` over the grid. Column `l` is
/// the single-excitation state that starts in `Psi_l^dag |vac>`; its entry
/// `mu` is the amplitude of mode `mu`.
pub fn propagate_target_columns<F>(
    config: &NetworkConfig,
    pulses: &PulseSet,
    target: &Unitary,
    visit: F,
) -> Result<Vec<C64>>
where
    F: FnMut(usize, &[C64]),
{
    check_compatible(config, pulses)?;
    if target.dim() != config.n {
        return Err(Error::invalid("target dimension does not match the network"));
    }
    let drive = Drive::new(pulses);
    let mut state = target_columns_init(target, config.modes());
    integrate(config, &drive, &mut state, config.modes(), visit)?;
    Ok(state)
}

/// `G(t_f, t_0)` restricted to register-B rows and register-A columns.
pub fn final_green_ba(config: &NetworkConfig, pulses: &PulseSet) -> Result<CMatrix> {
    let n = config.n;
    let modes = config.modes();
    let mut init = vec![C64::new(0.0, 0.0); n * modes];
    for j in 0..n {
        init[j * modes + j] = C64::new(1.0, 0.0);
    }
    let cols = final_columns(config, pulses, init)?;
    Ok(CMatrix::from_fn(n, n, |i, j| cols[j * modes + n + i]))
}

/// Sampled Green's function `G(t_k, t_0)`.
#[derive(Debug, Clone)]
pub struct GreenTrajectory {
    grid: TimeGrid,
    n: usize,
    stride: usize,
    samples: Vec<CMatrix>,
}

impl GreenTrajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    /// Grid indices at which a sample is stored.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        let last = self.grid.n_steps;
        (0..self.samples.len()).map(move |i| (i * self.stride).min(last))
    }

    fn slot(&self, k: usize) -> Option<usize> {
        if k > self.grid.n_steps {
            None
        } else if k == self.grid.n_steps {
            Some(self.samples.len() - 1)
        } else if k % self.stride == 0 {
            Some(k / self.stride)
        } else {
            None
        }
    }

    /// Full `2N x 2N` sample at grid index `k`, if stored.
    pub fn at(&self, k: usize) -> Option<&CMatrix> {
        self.slot(k).map(|i| &self.samples[i])
    }

    pub fn final_green(&self) -> &CMatrix {
        self.samples.last().expect("trajectory holds at least one sample")
    }

    pub fn g_aa(&self, k: usize) -> Option<CMatrix> {
        let n = self.n;
        self.at(k).map(|g| g.view((0, 0), (n, n)).into_owned())
    }

    pub fn g_ba(&self, k: usize) -> Option<CMatrix> {
        let n = self.n;
        self.at(k).map(|g| g.view((n, 0), (n, n)).into_owned())
    }

    pub fn g_bb(&self, k: usize) -> Option<CMatrix> {
        let n = self.n;
        self.at(k).map(|g| g.view((n, n), (n, n)).into_owned())
    }

    pub fn samples(&self) -> &[CMatrix] {
        &self.samples
    }
}

/// Integrates `dG/dt = -M(t) G` with RK4 and stores every sample.
pub fn propagate_green(config: &NetworkConfig, pulses: &PulseSet) -> Result<GreenTrajectory> {
    propagate_green_strided(config, pulses, 1)
}

/// As [`propagate_green`] but stores only every `stride`-th sample (plus the
/// final one).
pub fn propagate_green_strided(
    config: &NetworkConfig,
    pulses: &PulseSet,
    stride: usize,
) -> Result<GreenTrajectory> {
    if stride == 0 {
        return Err(Error::invalid("stride must be positive"));
    }
    check_compatible(config, pulses)?;
    let modes = config.modes();
    let last = config.grid.n_steps;
    let mut init = vec![C64::new(0.0, 0.0); modes * modes];
    for j in 0..modes {
        init[j * modes + j] = C64::new(1.0, 0.0);
    }
    let drive = Drive::new(pulses);
    let mut samples = Vec::with_capacity(last / stride + 2);
    integrate(config, &drive, &mut init, modes, |k, s| {
        if k % stride == 0 || k == last {
            samples.push(CMatrix::from_column_slice(modes, modes, s));
        }
    })?;
    Ok(GreenTrajectory { grid: config.grid, n: config.n, stride, samples })
}
