//! CSV output and run manifests.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiment::{ComplexityRow, PaSweepRow};
use crate::montecarlo::config::Scheme;
use crate::montecarlo::sweep::PointEstimate;

pub const POINT_HEADER: [&str; 7] = [
    "snr_db",
    "user",
    "scheme",
    "sim_value",
    "ci_halfwidth",
    "analytic_value",
    "n_trials",
];

pub const PA_SWEEP_HEADER: [&str; 7] = [
    "a2",
    "user",
    "scheme",
    "sim_value",
    "ci_halfwidth",
    "analytic_value",
    "n_trials",
];

pub const COMPLEXITY_HEADER: [&str; 6] = ["users", "m", "n_t", "n_r", "delta_ssk_noma", "delta_noma"];

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes simulated points, one row each, in the given order.
pub fn write_points<W: Write>(out: W, points: &[PointEstimate]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(POINT_HEADER).map_err(csv_err)?;
    for p in points {
        w.write_record([
            p.snr_db.to_string(),
            p.user.to_string(),
            p.scheme.to_string(),
            p.value.to_string(),
            p.ci_halfwidth.to_string(),
            opt(p.analytic.map(|c| c.value)),
            p.n_trials.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn points_to_string(points: &[PointEstimate]) -> Result<String> {
    let mut buf = Vec::new();
    write_points(&mut buf, points)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Power-allocation sweep rows; simulation columns stay empty when the sweep
/// is analytic only.
pub fn write_pa_sweep<W: Write>(out: W, rows: &[PaSweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PA_SWEEP_HEADER).map_err(csv_err)?;
    for r in rows {
        let sim = r.simulated.as_ref();
        w.write_record([
            r.a2.to_string(),
            r.user.to_string(),
            Scheme::SskNoma.to_string(),
            opt(sim.map(|p| p.value)),
            opt(sim.map(|p| p.ci_halfwidth)),
            opt(r.analytic.map(|c| c.value)),
            sim.map(|p| p.n_trials.to_string()).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_complexity<W: Write>(out: W, rows: &[(ComplexityRow, u64, u64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPLEXITY_HEADER).map_err(csv_err)?;
    for (r, ssk, noma) in rows {
        w.write_record([
            r.users.to_string(),
            r.m.to_string(),
            r.n_t.unwrap_or(r.m).to_string(),
            r.n_r.to_string(),
            ssk.to_string(),
            noma.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Creates `path` and hands a buffered writer to `f`.
pub fn write_file<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut std::io::BufWriter<std::fs::File>) -> Result<()>,
{
    let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut w = std::io::BufWriter::new(file);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Record of one CLI invocation, stored next to its CSV files.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: String,
    pub out: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub seed: u64,
    pub version: String,
    pub files: Vec<String>,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        let path = dir.join("manifest.json");
        std::fs::write(&path, json + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}
