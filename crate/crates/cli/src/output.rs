//! File output. Every file is written to a temporary sibling and renamed
//! into place, and floats are printed with 17 significant digits.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cascade_core::numkit::make_time_grid;
use cascade_core::synth::{PulseSet, SynthesisReport};
use cascade_core::C64;
use tempfile::NamedTempFile;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `bytes` to `path` atomically.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// A CSV table assembled in memory.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header)?;
        Ok(Self { writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn save(self, path: &Path) -> Result<PathBuf> {
        let bytes = self.writer.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
        write_atomic(path, &bytes)?;
        Ok(path.to_path_buf())
    }
}

pub fn pulse_header(n: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for reg in ["A", "B"] {
        for j in 1..=n {
            h.push(format!("g{reg}{j}_re"));
            h.push(format!("g{reg}{j}_im"));
        }
    }
    h
}

pub fn write_pulses(path: &Path, pulses: &PulseSet) -> Result<PathBuf> {
    let header = pulse_header(pulses.n());
    let mut table = Table::new(&header.iter().map(String::as_str).collect::<Vec<_>>())?;
    let grid = pulses.grid();
    for k in 0..grid.len() {
        let mut row = vec![num(grid.time(k))];
        for mu in 0..pulses.modes() {
            let g = pulses.mode(mu)[k];
            row.push(num(g.re));
            row.push(num(g.im));
        }
        table.row(row)?;
    }
    table.save(path)
}

/// Reads a table written by [`write_pulses`]; the grid step is recovered
/// from the first and last time stamps.
pub fn read_pulses(path: &Path) -> Result<PulseSet> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let width = reader.headers()?.len();
    if width < 5 || (width - 1) % 4 != 0 {
        bail!("{} does not have a pulse table header", path.display());
    }
    let n = (width - 1) / 4;
    if reader.headers()?.iter().collect::<Vec<_>>() != pulse_header(n) {
        bail!("{} does not have a pulse table header", path.display());
    }
    let mut times = Vec::new();
    let mut samples = vec![Vec::new(); 2 * n];
    for record in reader.records() {
        let record = record?;
        let v: Vec<f64> = record.iter().map(str::parse).collect::<std::result::Result<_, _>>()?;
        times.push(v[0]);
        for (mu, s) in samples.iter_mut().enumerate() {
            s.push(C64::new(v[1 + 2 * mu], v[2 + 2 * mu]));
        }
    }
    if times.len() < 2 {
        bail!("{} holds fewer than two samples", path.display());
    }
    let (t0, tf) = (times[0], times[times.len() - 1]);
    let grid = make_time_grid(t0, tf, (tf - t0) / (times.len() - 1) as f64)?;
    if grid.len() != times.len() {
        bail!("{} is not on a uniform grid", path.display());
    }
    Ok(PulseSet::from_samples(n, grid, samples)?)
}

/// Long-form traces `t, series, value`: fidelity, dark residual and
/// excitation probability per column.
pub fn write_traces(path: &Path, report: &SynthesisReport) -> Result<PathBuf> {
    let mut table = Table::new(&["t", "series", "value"])?;
    let trace = &report.fidelity_trace;
    for (t, v) in trace.times().zip(&trace.values) {
        table.row([num(t), "fidelity".into(), num(*v)])?;
    }
    let grid = report.pulses.grid();
    for (name, series) in [("dark_residual", &report.dark_residual), ("excitation", &report.excitation)] {
        for (l, values) in series.iter().enumerate() {
            let label = format!("{name}_{}", l + 1);
            for (k, v) in values.iter().enumerate() {
                table.row([num(grid.time(k)), label.clone(), num(*v)])?;
            }
        }
    }
    table.save(path)
}
