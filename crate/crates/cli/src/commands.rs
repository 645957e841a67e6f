use std::path::PathBuf;

use anyhow::{bail, Result};
use cascade_core::imperfect::{ensemble_fidelity, NoiseParams};
use cascade_core::metrics::{analytic_loss_fidelity, pulse_fidelity};
use cascade_core::network::{propagate_green, NetworkConfig};
use cascade_core::numkit::Unitary;
use cascade_core::oracle::{compare_to_cascaded, simulate_waveguide_with, WaveguideModel};
use cascade_core::synth::{
    emitter_pulses, synthesize, trim_window, PulseSet, SynthesisOptions, SynthesisReport, TrimOptions,
};
use cascade_core::Error;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::output::{num, read_pulses, write_atomic, write_pulses, write_traces, Table};

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Ok,
    /// A quality threshold was missed; the message explains which.
    NotMet(String),
}

pub struct Outcome {
    pub outputs: Value,
    pub artifacts: Vec<PathBuf>,
    pub status: Status,
}

/// Pulses for one (N, family, delta) point, optionally trimmed.
struct Synthesized {
    report: SynthesisReport,
    t_min: Option<f64>,
    window: (f64, f64),
}

fn synthesize_point(cfg: &ExperimentConfig, n: usize, delta: f64, target: &Unitary, network: &NetworkConfig) -> Result<Synthesized> {
    let (params, tf) = cfg.emitter(n, delta)?;
    if cfg.trim {
        let opts = TrimOptions {
            method: cfg.method,
            execution: cfg.execution(),
            initial_tf: Some(tf),
            ..TrimOptions::default()
        };
        let r = trim_window(network, target, &params, cfg.threshold, &opts)?;
        return Ok(Synthesized { report: r.report, t_min: Some(r.t_min), window: (r.t0, r.tf) });
    }
    let emitter = emitter_pulses(n, &params, &network.grid)?;
    let report = synthesize(cfg.method, network, target, &emitter, &SynthesisOptions::default())?;
    Ok(Synthesized { report, t_min: None, window: (0.0, tf) })
}

fn single<T: Copy>(values: &[T], what: &str) -> Result<T> {
    match values {
        [v] => Ok(*v),
        _ => bail!("this command takes a single {what}, got {}", values.len()),
    }
}

pub fn synth(cfg: &ExperimentConfig) -> Result<Outcome> {
    let n = single(&cfg.n, "N")?;
    let delta = single(&cfg.delta, "delta")?;
    let p_circ = single(&cfg.p_circ, "p_circ")?;
    let targets = cfg.targets(n)?;
    if targets.len() != 1 {
        bail!("synth takes a single unitary");
    }
    let (family, target) = &targets[0];
    let tf = cfg.window(n, delta);
    let network = cfg.network(n, tf, p_circ)?;
    let s = synthesize_point(cfg, n, delta, target, &network)?;
    let report = &s.report;
    let fidelity = report.final_fidelity();

    let artifacts = vec![
        write_pulses(&cfg.out_dir.join("pulses.csv"), &report.pulses)?,
        write_traces(&cfg.out_dir.join("traces.csv"), report)?,
    ];
    let status = if fidelity >= cfg.threshold {
        Status::Ok
    } else {
        Status::NotMet(format!("fidelity {fidelity} below threshold {}", cfg.threshold))
    };
    let outputs = json!({
        "n": n,
        "family": family,
        "fidelity": fidelity,
        "fidelity_before_correction": report.fidelity_before_correction,
        "window": [s.window.0, s.window.1],
        "t_min": s.t_min,
        "phases": report.phases,
        "phase_undefined": report.phase_undefined,
        "conservation_defect": report.conservation_defect,
        "max_relative_dark_residual": report.max_relative_dark_residual(),
        "clamp_leakage": report.clamp_leakage,
        "clamped_receivers": (0..n).filter(|&l| report.pulses.is_clamped(n + l)).map(|l| l + 1).collect::<Vec<_>>(),
        "warnings": report.warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
    });
    Ok(Outcome { outputs, artifacts, status })
}

fn linear_fit(x: &[f64], y: &[f64]) -> Value {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    json!({ "slope": slope, "intercept": my - slope * mx, "r2": sxy * sxy / (sxx * syy) })
}

pub fn tmin_scan(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p_circ = single(&cfg.p_circ, "p_circ")?;
    let mut ns = cfg.n.clone();
    ns.sort_unstable();
    ns.dedup();
    let mut deltas = cfg.delta.clone();
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();

    struct Row {
        n: usize,
        family: String,
        delta: f64,
        t_min: Option<f64>,
        fidelity: f64,
    }
    let mut rows = Vec::new();
    for &n in &ns {
        for (family, target) in cfg.targets(n)? {
            for &delta in &deltas {
                let tf = cfg.window(n, delta);
                let network = cfg.network(n, tf, p_circ)?;
                let (params, _) = cfg.emitter(n, delta)?;
                let opts = TrimOptions {
                    method: cfg.method,
                    execution: cfg.execution(),
                    initial_tf: Some(tf),
                    ..TrimOptions::default()
                };
                let row = match trim_window(&network, &target, &params, cfg.threshold, &opts) {
                    Ok(r) => Row { n, family: family.clone(), delta, t_min: Some(r.t_min), fidelity: r.fidelity },
                    Err(Error::ThresholdUnreachable { best, .. }) => {
                        Row { n, family: family.clone(), delta, t_min: None, fidelity: best }
                    }
                    Err(e) => return Err(e.into()),
                };
                rows.push(row);
            }
        }
    }
    rows.sort_by(|a, b| (a.n, &a.family).cmp(&(b.n, &b.family)).then(a.delta.total_cmp(&b.delta)));

    let mut table = Table::new(&["N", "family", "delta", "t_min", "fidelity", "status"])?;
    for r in &rows {
        let (t, status) = match r.t_min {
            Some(t) => (num(t), "ok"),
            None => (String::new(), "unreachable"),
        };
        table.row([r.n.to_string(), r.family.clone(), num(r.delta), t, num(r.fidelity), status.into()])?;
    }
    let mut artifacts = vec![table.save(&cfg.out_dir.join("scaling.csv"))?];

    // best delta per (N, family)
    let mut best: Vec<&Row> = Vec::new();
    for r in rows.iter().filter(|r| r.t_min.is_some()) {
        match best.last_mut() {
            Some(b) if b.n == r.n && b.family == r.family => {
                if r.t_min < b.t_min {
                    *b = r;
                }
            }
            _ => best.push(r),
        }
    }
    if deltas.len() > 1 {
        let mut table = Table::new(&["N", "family", "delta", "t_min"])?;
        for r in &best {
            table.row([r.n.to_string(), r.family.clone(), num(r.delta), num(r.t_min.unwrap())])?;
        }
        artifacts.push(table.save(&cfg.out_dir.join("scaling_best.csv"))?);
    }

    let mut fits = serde_json::Map::new();
    let mut families: Vec<&String> = best.iter().map(|r| &r.family).collect();
    families.sort();
    families.dedup();
    for family in families {
        let pts: Vec<&&Row> = best.iter().filter(|r| &r.family == family).collect();
        if pts.len() >= 2 {
            let x: Vec<f64> = pts.iter().map(|r| r.n as f64).collect();
            let y: Vec<f64> = pts.iter().map(|r| r.t_min.unwrap()).collect();
            fits.insert(family.clone(), linear_fit(&x, &y));
        }
    }

    let unreachable: Vec<Value> = rows
        .iter()
        .filter(|r| r.t_min.is_none())
        .map(|r| json!({ "n": r.n, "family": r.family, "delta": r.delta, "best_fidelity": r.fidelity }))
        .collect();
    let status = if unreachable.is_empty() {
        Status::Ok
    } else {
        Status::NotMet(format!("threshold unreachable for {} scan point(s)", unreachable.len()))
    };
    let outputs = json!({
        "rows": rows.iter().map(|r| json!({
            "n": r.n, "family": r.family, "delta": r.delta, "t_min": r.t_min, "fidelity": r.fidelity,
        })).collect::<Vec<_>>(),
        "best": best.iter().map(|r| json!({ "n": r.n, "family": r.family, "delta": r.delta, "t_min": r.t_min }))
            .collect::<Vec<_>>(),
        "linear_fit": fits,
        "unreachable": unreachable,
    });
    Ok(Outcome { outputs, artifacts, status })
}

/// Lossless pulses for each (N, family), synthesized or loaded.
fn ideal_pulses(cfg: &ExperimentConfig) -> Result<Vec<(usize, String, Unitary, PulseSet)>> {
    let delta = single(&cfg.delta, "delta")?;
    let mut out = Vec::new();
    if let Some(path) = &cfg.pulses {
        let pulses = read_pulses(path)?;
        let n = pulses.n();
        let targets = cfg.targets(n)?;
        if targets.len() != 1 {
            bail!("a loaded pulse table needs a single unitary");
        }
        let (family, target) = targets.into_iter().next().unwrap();
        out.push((n, family, target, pulses));
        return Ok(out);
    }
    let mut ns = cfg.n.clone();
    ns.sort_unstable();
    ns.dedup();
    for n in ns {
        for (family, target) in cfg.targets(n)? {
            let tf = cfg.window(n, delta);
            let network = cfg.network(n, tf, 0.0)?.lossless();
            let s = synthesize_point(cfg, n, delta, &target, &network)?;
            out.push((n, family, target, s.report.pulses));
        }
    }
    Ok(out)
}

pub fn noise_sweep(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut eps = cfg.epsilon.clone();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    let mut omegas = cfg.omega.clone();
    omegas.sort_by(f64::total_cmp);
    omegas.dedup();

    let mut rows = Vec::new();
    for (n, family, target, pulses) in ideal_pulses(cfg)? {
        let mut network = NetworkConfig::ideal(n, *pulses.grid());
        network.detunings = cfg.detunings_for(n)?;
        let ideal = pulse_fidelity(&network, &pulses, &target)?;
        for &e in &eps {
            for &o in &omegas {
                let params = NoiseParams { epsilon: e, omega: o, seed: cfg.seed, complex: cfg.complex_noise };
                let stats = ensemble_fidelity(&network, &pulses, &target, &params, cfg.runs, cfg.execution())?;
                rows.push((e, o, n, family.clone(), stats, ideal));
            }
        }
    }
    rows.sort_by(|a, b| {
        a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)).then(a.3.cmp(&b.3))
    });
    let mut table = Table::new(&[
        "epsilon", "omega", "N", "family", "mean_fidelity", "std_fidelity", "n_runs", "n_failed", "ideal_fidelity",
    ])?;
    for (e, o, n, family, s, ideal) in &rows {
        table.row([
            num(*e),
            num(*o),
            n.to_string(),
            family.clone(),
            num(s.mean_fidelity),
            num(s.std_fidelity),
            s.n_runs.to_string(),
            s.n_failed.to_string(),
            num(*ideal),
        ])?;
    }
    let artifacts = vec![table.save(&cfg.out_dir.join("noise.csv"))?];
    let outputs = json!({
        "rows": rows.iter().map(|(e, o, n, family, s, ideal)| json!({
            "epsilon": e, "omega": o, "n": n, "family": family, "mean_fidelity": s.mean_fidelity,
            "std_fidelity": s.std_fidelity, "n_runs": s.n_runs, "n_failed": s.n_failed, "ideal_fidelity": ideal,
        })).collect::<Vec<_>>(),
    });
    Ok(Outcome { outputs, artifacts, status: Status::Ok })
}

pub fn loss_sweep(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut ps = cfg.p_circ.clone();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    let mut table = Table::new(&[
        "N", "family", "p_circ", "gamma", "p_ch", "simulated", "analytic", "difference",
    ])?;
    let mut rows = Vec::new();
    for (n, family, target, pulses) in ideal_pulses(cfg)? {
        let grid = *pulses.grid();
        let mut network = NetworkConfig::ideal(n, grid);
        network.detunings = cfg.detunings_for(n)?;
        let ideal = pulse_fidelity(&network, &pulses, &target)?;
        for &p in &ps {
            let mut lossy = network.clone();
            lossy.local_decay = cfg.gamma;
            lossy.p_channel = cfg.p_ch;
            lossy.p_circulator = p;
            lossy.validate()?;
            let simulated = pulse_fidelity(&lossy, &pulses, &target)?;
            let analytic = analytic_loss_fidelity(ideal, cfg.gamma, grid.duration(), cfg.p_ch, p, n);
            let diff = (simulated - analytic).abs();
            table.row([
                n.to_string(),
                family.clone(),
                num(p),
                num(cfg.gamma),
                num(cfg.p_ch),
                num(simulated),
                num(analytic),
                num(diff),
            ])?;
            rows.push(json!({
                "n": n, "family": family, "p_circ": p, "gamma": cfg.gamma, "p_ch": cfg.p_ch,
                "simulated": simulated, "analytic": analytic, "difference": diff, "ideal_fidelity": ideal,
            }));
        }
    }
    let artifacts = vec![table.save(&cfg.out_dir.join("loss.csv"))?];
    Ok(Outcome { outputs: json!({ "rows": rows }), artifacts, status: Status::Ok })
}

pub fn oracle_check(cfg: &ExperimentConfig) -> Result<Outcome> {
    let delta = single(&cfg.delta, "delta")?;
    if cfg.bandwidth.is_empty() {
        bail!("no bandwidths given");
    }
    if cfg.gamma != 0.0 || cfg.p_ch != 0.0 || cfg.p_circ.iter().any(|&p| p != 0.0) {
        bail!("the waveguide oracle needs a lossless configuration");
    }
    let mut bandwidths = cfg.bandwidth.clone();
    bandwidths.sort_by(f64::total_cmp);
    bandwidths.dedup();
    let check_at = *bandwidths.last().unwrap();

    let mut rows = Vec::new();
    let mut status = Status::Ok;
    let mut ns = cfg.n.clone();
    ns.sort_unstable();
    ns.dedup();
    for n in ns {
        for (family, target) in cfg.targets(n)? {
            let tf = cfg.window(n, delta);
            let network = cfg.network(n, tf, 0.0)?;
            let s = synthesize_point(cfg, n, delta, &target, &network)?;
            let pulses = &s.report.pulses;
            let network = network.with_grid(*pulses.grid());
            let traj = propagate_green(&network, pulses)?;
            let duration = network.grid.duration();
            for &b in &bandwidths {
                let mut model = WaveguideModel::evenly_spaced(n, b, cfg.separation, duration)?;
                if let Some(m) = cfg.wg_modes {
                    model = WaveguideModel::new(b, m, model.positions)?;
                }
                let run = match simulate_waveguide_with(&model, &network, pulses, cfg.execution()) {
                    Ok(run) => run,
                    Err(Error::UnderResolved { required, given }) => {
                        status = Status::NotMet(format!(
                            "waveguide under-resolved at B = {b}: {given} modes given, {required} required"
                        ));
                        rows.push(json!({
                            "n": n, "family": family, "bandwidth": b, "wg_modes": given,
                            "required_modes": required, "deviation": null,
                        }));
                        continue;
                    }
                    Err(e) => return Err(e.into()),
                };
                let deviation = compare_to_cascaded(&run.g_ba, &traj)?;
                if b == check_at && deviation > cfg.tolerance && status == Status::Ok {
                    status = Status::NotMet(format!(
                        "N = {n} {family}: deviation {deviation} exceeds {} at B = {b}",
                        cfg.tolerance
                    ));
                }
                rows.push(json!({
                    "n": n, "family": family, "bandwidth": b, "wg_modes": model.n_wg_modes,
                    "deviation": deviation, "norm_drift": run.norm_drift, "steps": run.steps, "step": run.step,
                }));
            }
        }
    }
    let outputs = json!({
        "check_bandwidth": check_at,
        "tolerance": cfg.tolerance,
        "passed": status == Status::Ok,
        "rows": rows,
    });
    let path = cfg.out_dir.join("oracle.json");
    write_atomic(&path, serde_json::to_string_pretty(&outputs)?.as_bytes())?;
    Ok(Outcome { outputs, artifacts: vec![path], status })
}
