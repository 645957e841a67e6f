use serde::Serialize;

use super::noise::{perturb_pulses, NoiseParams};
use crate::exec::Execution;
use crate::metrics::pulse_fidelity;
use crate::network::NetworkConfig;
use crate::numkit::Unitary;
use crate::synth::PulseSet;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub mean_fidelity: f64,
    pub std_fidelity: f64,
    /// Runs that contributed to the statistics.
    pub n_runs: usize,
    /// Runs whose propagation blew up; excluded from the statistics.
    pub n_failed: usize,
    /// Final fidelity of every run in run order (`None` for failed runs).
    pub per_run: Vec<Option<f64>>,
}

/// Final fidelity over `n_runs` noisy copies of `pulses`. Run `r` uses the
/// seed `child_seed(params.seed, r)`; the statistics are accumulated in run
/// order and do not depend on how runs were scheduled.
pub fn ensemble_fidelity(
    config: &NetworkConfig,
    pulses: &PulseSet,
    target: &Unitary,
    params: &NoiseParams,
    n_runs: usize,
    execution: Execution,
) -> Result<EnsembleStats> {
    params.validate()?;
    if n_runs == 0 {
        return Err(Error::invalid("n_runs must be at least 1"));
    }
    let per_run: Vec<Option<f64>> = execution
        .map(n_runs, |r| {
            let noisy = perturb_pulses(pulses, &params.for_run(r as u64))?;
            match pulse_fidelity(config, &noisy, target) {
                Ok(f) => Ok(Some(f)),
                Err(Error::NumericalBlowup { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .into_iter()
        .collect::<Result<_>>()?;

    // Welford in run order
    let (mut count, mut mean, mut m2) = (0usize, 0.0f64, 0.0f64);
    for f in per_run.iter().flatten() {
        count += 1;
        let d = f - mean;
        mean += d / count as f64;
        m2 += d * (f - mean);
    }
    let std = if count > 1 { (m2 / (count - 1) as f64).sqrt() } else { 0.0 };
    Ok(EnsembleStats {
        mean_fidelity: if count > 0 { mean } else { f64::NAN },
        std_fidelity: std,
        n_runs: count,
        n_failed: n_runs - count,
        per_run,
    })
}
