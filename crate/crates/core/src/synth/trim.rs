use super::{emitter_pulses, synthesize, EmitterParams, Method, SynthesisOptions, SynthesisReport};
use crate::exec::Execution;
use crate::metrics::pulse_fidelity_trace;
use crate::network::NetworkConfig;
use crate::numkit::{make_time_grid, Unitary};
use crate::{Error, Result};

/// Number of candidate start points per scan level.
const CANDIDATES_PER_LEVEL: usize = 40;
/// Stride reduction between scan levels.
const REFINE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrimOptions {
    pub method: Method,
    pub synthesis: SynthesisOptions,
    pub execution: Execution,
    /// Length of the synthesis window `[0, initial_tf]`; defaults to
    /// `20 [1 + (N - 1) delta]`.
    pub initial_tf: Option<f64>,
    /// Finest stride (in grid steps) of the start-point scan.
    pub resolution: usize,
}

impl Default for TrimOptions {
    fn default() -> Self {
        Self {
            method: Method::Implicit,
            synthesis: SynthesisOptions::default(),
            execution: Execution::default(),
            initial_tf: None,
            resolution: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrimResult {
    pub t0: f64,
    pub tf: f64,
    /// `tf - t0`.
    pub t_min: f64,
    /// Final fidelity on the trimmed window after phase correction.
    pub fidelity: f64,
    pub full_window_fidelity: f64,
    /// Grid indices of `t0` and `tf` on the synthesis grid.
    pub start_index: usize,
    pub end_index: usize,
    /// Report for the trimmed window.
    pub report: SynthesisReport,
    /// Report for the full synthesis window.
    pub full: SynthesisReport,
}

/// Shortest window on which the pulses synthesized over `[0, initial_tf]`
/// still reach `threshold`.
///
/// For a start index `s` the pulses are cut to `[t_s, t_end]` and the
/// fidelity trace is propagated once; the end of the window is the first
/// grid point after which the fidelity stays above the threshold. Start
/// points are scanned linearly, first coarsely and then with finer strides
/// between the last feasible and the first infeasible start.
pub fn trim_window(
    config: &NetworkConfig,
    target: &Unitary,
    params: &EmitterParams,
    threshold: f64,
    opts: &TrimOptions,
) -> Result<TrimResult> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::invalid(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    if opts.resolution == 0 {
        return Err(Error::invalid("scan resolution must be at least one grid step"));
    }
    let n = config.n;
    let initial_tf = opts.initial_tf.unwrap_or_else(|| params.default_window(n));
    let grid = make_time_grid(0.0, initial_tf, config.grid.dt)?;
    let cfg = config.with_grid(grid);
    let emitter = emitter_pulses(n, params, &grid)?;
    let full = synthesize(opts.method, &cfg, target, &emitter, &opts.synthesis)?;
    let full_window_fidelity = full.final_fidelity();
    if full_window_fidelity < threshold {
        return Err(Error::ThresholdUnreachable {
            threshold,
            best: full.fidelity_trace.max(),
        });
    }

    let last = grid.n_steps;
    // window end for a given start, None if the threshold is missed
    let evaluate = |s: usize| -> Option<usize> {
        let pulses = full.pulses.slice(s, last).ok()?;
        let trace = pulse_fidelity_trace(&cfg.with_grid(*pulses.grid()), &pulses, target).ok()?;
        let values = &trace.values;
        if *values.last()? < threshold {
            return None;
        }
        let run = values.iter().rev().take_while(|&&f| f >= threshold).count();
        Some(s + (values.len() - run).max(2))
    };

    let s_max = grid.index_of(params.t_c.max(initial_tf / 2.0)).min(last - 2);
    let mut best = (0usize, evaluate(0).expect("full window meets the threshold"));
    let mut lo = 0usize; // last feasible start
    let mut hi = s_max + 1; // first infeasible start (exclusive bound)
    let mut stride = (s_max / CANDIDATES_PER_LEVEL).max(opts.resolution);
    loop {
        let candidates: Vec<usize> = (1..).map(|i| lo + i * stride).take_while(|&s| s < hi).collect();
        let ends = opts.execution.map(candidates.len(), |i| evaluate(candidates[i]));
        for (&s, end) in candidates.iter().zip(&ends) {
            match end {
                Some(e) => {
                    lo = s;
                    if e - s < best.1 - best.0 {
                        best = (s, *e);
                    }
                }
                None => {
                    hi = s;
                    break;
                }
            }
        }
        if stride <= opts.resolution {
            break;
        }
        stride = (stride / REFINE).max(opts.resolution);
    }

    let (start, end) = best;
    let pulses = full.pulses.slice(start, end)?;
    let trimmed_cfg = cfg.with_grid(*pulses.grid());
    let report = super::report::finish(&trimmed_cfg, target, pulses, full.method, full.warnings.clone())?;
    Ok(TrimResult {
        t0: grid.time(start),
        tf: grid.time(end),
        t_min: grid.time(end) - grid.time(start),
        fidelity: report.final_fidelity(),
        full_window_fidelity,
        start_index: start,
        end_index: end,
        report,
        full,
    })
}
