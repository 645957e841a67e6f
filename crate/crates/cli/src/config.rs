//! Experiment configuration: defaults, a TOML file and command-line flags,
//! merged in that order of increasing precedence.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cascade_core::exec::Execution;
use cascade_core::imperfect::NoiseParams;
use cascade_core::network::NetworkConfig;
use cascade_core::numkit::{haar_random_unitary, make_time_grid, named_unitary, CMatrix, Unitary, UnitaryKind};
use cascade_core::synth::{EmitterParams, Method};
use cascade_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Environment variable holding the default output directory.
pub const OUT_DIR_ENV: &str = "CASCADE_OUT_DIR";

/// Partial settings. Every field is optional so that a file and the command
/// line can each supply any subset.
#[derive(Debug, Clone, Default, PartialEq, clap::Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Command to execute (only read by `run`).
    #[arg(skip)]
    pub command: Option<String>,
    /// Mode counts N (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Unitary families: transfer, swap, hadamard, complex_beamsplitter, haar.
    #[arg(long, value_delimiter = ',')]
    pub unitary: Option<Vec<String>>,
    /// CSV file with the target unitary, one row per line as re,im pairs.
    #[arg(long)]
    pub unitary_file: Option<PathBuf>,
    /// Master seed for Haar unitaries, detunings and noise.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Window end; defaults to 20 [1 + (N - 1) delta].
    #[arg(long)]
    pub tf: Option<f64>,
    /// Emitter center; defaults to tf / 2.
    #[arg(long)]
    pub t_c: Option<f64>,
    /// Emitter amplitude spread (comma separated for a scan).
    #[arg(long, value_delimiter = ',')]
    pub delta: Option<Vec<f64>>,
    /// Emitter rise time.
    #[arg(long)]
    pub tau: Option<f64>,
    /// explicit or implicit.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Local decay rate of every mode.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Channel loss probability.
    #[arg(long)]
    pub p_ch: Option<f64>,
    /// Circulator loss probabilities (comma separated for a sweep).
    #[arg(long, value_delimiter = ',')]
    pub p_circ: Option<Vec<f64>>,
    /// Static detunings of all 2N modes.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub detunings: Option<Vec<f64>>,
    /// Draw detunings uniformly from [-w, w) with the master seed.
    #[arg(long)]
    pub detuning_spread: Option<f64>,
    /// Noise strengths (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub epsilon: Option<Vec<f64>>,
    /// Noise bandwidths (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub omega: Option<Vec<f64>>,
    /// Independent real and imaginary noise.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub complex_noise: Option<bool>,
    /// Noise realizations per sweep point.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Waveguide bandwidths for the oracle (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub bandwidth: Option<Vec<f64>>,
    /// Waveguide mode count; defaults to the smallest adequate one.
    #[arg(long)]
    pub wg_modes: Option<usize>,
    /// Delay between neighbouring modes along the waveguide.
    #[arg(long)]
    pub separation: Option<f64>,
    /// Largest accepted oracle deviation.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Trim the synthesis window to the shortest one meeting the threshold.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub trim: Option<bool>,
    /// Pulse table to use instead of synthesizing (noise-sweep).
    #[arg(long)]
    pub pulses: Option<PathBuf>,
    /// Run sweep points and ensembles on one thread.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub sequential: Option<bool>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(mut self, top: &Settings) -> Self {
        overlay!(
            self, top, command, n, unitary, unitary_file, seed, dt, tf, t_c, delta, tau, method, threshold, gamma,
            p_ch, p_circ, detunings, detuning_spread, epsilon, omega, complex_noise, runs, bandwidth, wg_modes,
            separation, tolerance, trim, pulses, sequential, out_dir
        );
        self
    }
}

/// Fully resolved configuration, echoed into every result record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: String,
    pub n: Vec<usize>,
    pub unitary: Vec<String>,
    pub unitary_file: Option<PathBuf>,
    pub seed: u64,
    pub dt: f64,
    pub tf: Option<f64>,
    pub t_c: Option<f64>,
    pub delta: Vec<f64>,
    pub tau: f64,
    pub method: Method,
    pub threshold: f64,
    pub gamma: f64,
    pub p_ch: f64,
    pub p_circ: Vec<f64>,
    pub detunings: Option<Vec<f64>>,
    pub detuning_spread: f64,
    pub epsilon: Vec<f64>,
    pub omega: Vec<f64>,
    pub complex_noise: bool,
    pub runs: usize,
    pub bandwidth: Vec<f64>,
    pub wg_modes: Option<usize>,
    pub separation: f64,
    pub tolerance: f64,
    pub trim: bool,
    pub pulses: Option<PathBuf>,
    pub sequential: bool,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    /// Applies defaults to `s` and validates the result. `env_out_dir` is
    /// the value of [`OUT_DIR_ENV`], if any.
    pub fn resolve(command: &str, s: Settings, env_out_dir: Option<PathBuf>) -> Result<Self> {
        let method = match &s.method {
            Some(m) => m.parse::<Method>()?,
            // window scans repeat the synthesis many times; the implicit
            // construction is an order of magnitude faster there
            None if command == "tmin-scan" || s.trim == Some(true) => Method::Implicit,
            None => Method::default(),
        };
        let cfg = Self {
            command: command.to_string(),
            n: s.n.unwrap_or_else(|| vec![2]),
            unitary: s.unitary.unwrap_or_else(|| vec!["hadamard".into()]),
            unitary_file: s.unitary_file,
            seed: s.seed.unwrap_or(1),
            dt: s.dt.unwrap_or(0.01),
            tf: s.tf,
            t_c: s.t_c,
            delta: s.delta.unwrap_or_else(|| vec![2.0]),
            tau: s.tau.unwrap_or(1.0),
            method,
            threshold: s.threshold.unwrap_or(0.99),
            gamma: s.gamma.unwrap_or(0.0),
            p_ch: s.p_ch.unwrap_or(0.0),
            p_circ: s.p_circ.unwrap_or_else(|| vec![0.0]),
            detunings: s.detunings,
            detuning_spread: s.detuning_spread.unwrap_or(0.0),
            epsilon: s.epsilon.unwrap_or_else(|| vec![1e-3, 1e-2, 1e-1]),
            omega: s.omega.unwrap_or_else(|| vec![1.0, 10.0]),
            complex_noise: s.complex_noise.unwrap_or(false),
            runs: s.runs.unwrap_or(400),
            bandwidth: s.bandwidth.unwrap_or_else(|| vec![25.0, 50.0]),
            wg_modes: s.wg_modes,
            separation: s.separation.unwrap_or(0.5),
            tolerance: s.tolerance.unwrap_or(0.02),
            trim: s.trim.unwrap_or(false),
            pulses: s.pulses,
            sequential: s.sequential.unwrap_or(false),
            out_dir: s.out_dir.or(env_out_dir).unwrap_or_else(|| PathBuf::from("cascade-out")),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.n.is_empty() {
            bail!("the list of mode counts is empty");
        }
        if self.n.contains(&0) {
            bail!("mode counts must be positive");
        }
        if self.unitary.is_empty() && self.unitary_file.is_none() {
            bail!("no unitary family given");
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            bail!("dt must be positive, got {}", self.dt);
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            bail!("threshold must lie in (0, 1), got {}", self.threshold);
        }
        if let Some(tf) = self.tf {
            if !(tf.is_finite() && tf > 0.0) {
                bail!("tf must be positive, got {tf}");
            }
        }
        if self.delta.is_empty() || self.p_circ.is_empty() {
            bail!("delta and p_circ lists must not be empty");
        }
        for &d in &self.delta {
            EmitterParams::new(d, self.tau, 0.0)?;
        }
        for &e in &self.epsilon {
            for &o in &self.omega {
                NoiseParams::new(e, o, self.seed)?;
            }
        }
        if self.runs == 0 {
            bail!("runs must be at least 1");
        }
        if !(self.detuning_spread.is_finite() && self.detuning_spread >= 0.0) {
            bail!("detuning spread must be >= 0");
        }
        for path in [&self.unitary_file, &self.pulses].into_iter().flatten() {
            if !path.exists() {
                bail!("{} does not exist", path.display());
            }
        }
        Ok(())
    }

    pub fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    /// `(label, target)` for every requested family at dimension `n`.
    pub fn targets(&self, n: usize) -> Result<Vec<(String, Unitary)>> {
        if let Some(path) = &self.unitary_file {
            let u = read_unitary(path)?;
            if u.dim() != n {
                bail!("{} is {}x{}, but N = {n}", path.display(), u.dim(), u.dim());
            }
            return Ok(vec![("file".into(), u)]);
        }
        self.unitary
            .iter()
            .map(|name| {
                let u = if name.eq_ignore_ascii_case("haar") {
                    haar_random_unitary(n, self.seed)?
                } else {
                    named_unitary(name.parse::<UnitaryKind>()?, n)?
                };
                let label = if name.eq_ignore_ascii_case("haar") {
                    "haar".to_string()
                } else {
                    name.parse::<UnitaryKind>()?.to_string()
                };
                Ok((label, u))
            })
            .collect()
    }

    /// Window length for `n` modes and spread `delta`.
    pub fn window(&self, n: usize, delta: f64) -> f64 {
        self.tf.unwrap_or_else(|| EmitterParams { delta, tau: self.tau, t_c: 0.0 }.default_window(n))
    }

    pub fn emitter(&self, n: usize, delta: f64) -> Result<(EmitterParams, f64)> {
        let tf = self.window(n, delta);
        let params = EmitterParams::new(delta, self.tau, self.t_c.unwrap_or(tf / 2.0))?;
        Ok((params, tf))
    }

    /// Network on `[0, tf]` with the configured detunings and losses, using
    /// circulator loss `p_circ`.
    pub fn network(&self, n: usize, tf: f64, p_circ: f64) -> Result<NetworkConfig> {
        let grid = make_time_grid(0.0, tf, self.dt)?;
        let mut config = NetworkConfig::ideal(n, grid);
        config.detunings = self.detunings_for(n)?;
        config.local_decay = self.gamma;
        config.p_channel = self.p_ch;
        config.p_circulator = p_circ;
        config.validate()?;
        Ok(config)
    }

    pub fn detunings_for(&self, n: usize) -> Result<Vec<f64>> {
        if let Some(d) = &self.detunings {
            if d.len() != 2 * n {
                bail!("expected {} detunings for N = {n}, got {}", 2 * n, d.len());
            }
            return Ok(d.clone());
        }
        if self.detuning_spread > 0.0 {
            let w = self.detuning_spread;
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            return Ok((0..2 * n).map(|_| rng.random_range(-w..w)).collect());
        }
        Ok(vec![0.0; 2 * n])
    }
}

/// Reads an `N x N` unitary stored as `N` lines of `2N` comma separated
/// numbers (real and imaginary parts alternating).
pub fn read_unitary(path: &Path) -> Result<Unitary> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let values: Vec<f64> = record
            .iter()
            .map(|v| v.parse::<f64>().with_context(|| format!("bad number '{v}' in {}", path.display())))
            .collect::<Result<_>>()?;
        if !values.len().is_multiple_of(2) {
            bail!("rows of {} must hold re,im pairs", path.display());
        }
        rows.push(values.chunks(2).map(|p| C64::new(p[0], p[1])).collect());
    }
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        bail!("{} does not hold a square matrix", path.display());
    }
    Ok(Unitary::new(CMatrix::from_fn(n, n, |i, j| rows[i][j]))?)
}
