//! `cascade`: batch runner for receiver-pulse synthesis experiments.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 quality
//! threshold not met.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use crate::commands::Status;
use crate::config::{ExperimentConfig, Settings, OUT_DIR_ENV};
use crate::output::write_atomic;

#[derive(Debug, Parser)]
#[command(name = "cascade", version, about = "Pulse synthesis and simulation for cascaded bosonic networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize receiver pulses for one unitary.
    Synth(Args),
    /// Run the command named in the config file.
    Run(Args),
    /// Minimal protocol time over N (and optionally delta).
    TminScan(Args),
    /// Ensemble fidelity under pulse noise.
    NoiseSweep(Args),
    /// Simulated against analytic fidelity under circulator loss.
    LossSweep(Args),
    /// Compare against the discretized-waveguide model.
    OracleCheck(Args),
}

#[derive(Debug, clap::Args)]
struct Args {
    /// TOML file with default settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

const COMMANDS: [&str; 5] = ["synth", "tmin-scan", "noise-sweep", "loss-sweep", "oracle-check"];

fn resolve(name: &str, args: &Args) -> Result<ExperimentConfig> {
    let file = match &args.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    let merged = file.overlay(&args.settings);
    let command = if name == "run" {
        match merged.command.as_deref() {
            Some(c) if COMMANDS.contains(&c) => c.to_string(),
            Some(c) => bail!("unknown command '{c}' in config"),
            None => bail!("run needs a config file with a 'command' key"),
        }
    } else {
        name.to_string()
    };
    let env_out = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    ExperimentConfig::resolve(&command, merged, env_out)
}

fn execute(name: &str, args: &Args) -> Result<Status> {
    let start = Instant::now();
    let cfg = resolve(name, args)?;
    let outcome = match cfg.command.as_str() {
        "synth" => commands::synth(&cfg)?,
        "tmin-scan" => commands::tmin_scan(&cfg)?,
        "noise-sweep" => commands::noise_sweep(&cfg)?,
        "loss-sweep" => commands::loss_sweep(&cfg)?,
        "oracle-check" => commands::oracle_check(&cfg)?,
        other => unreachable!("unknown command {other}"),
    };
    let result_path = cfg.out_dir.join("result.json");
    let mut artifacts = outcome.artifacts.clone();
    artifacts.push(result_path.clone());
    let status = match &outcome.status {
        Status::Ok => json!("ok"),
        Status::NotMet(msg) => json!({ "not_met": msg }),
    };
    let record = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "outputs": outcome.outputs,
        "status": status,
        "artifacts": artifacts,
        "wall_time_s": start.elapsed().as_secs_f64(),
    });
    write_atomic(&result_path, serde_json::to_string_pretty(&record)?.as_bytes())?;
    Ok(outcome.status)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (name, args) = match &cli.command {
        Command::Synth(a) => ("synth", a),
        Command::Run(a) => ("run", a),
        Command::TminScan(a) => ("tmin-scan", a),
        Command::NoiseSweep(a) => ("noise-sweep", a),
        Command::LossSweep(a) => ("loss-sweep", a),
        Command::OracleCheck(a) => ("oracle-check", a),
    };
    match execute(name, args) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::NotMet(msg)) => {
            eprintln!("threshold not met: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
