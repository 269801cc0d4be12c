//! Output files.

use crate::analysis::{DiagnosticsRow, SweepReport};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub const METADATA_FILE: &str = "metadata.json";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const SWEEP_JSON: &str = "sweep.json";
/// Wall-clock timings live apart from the deterministic artifacts.
pub const TIMING_FILE: &str = "timing.json";

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::io(path, e.into()))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.display().to_string(), reason: e.to_string() })
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Parse { path: path.display().to_string(), reason: e.to_string() }
}

/// Streams diagnostics rows to `diagnostics.csv`.
pub struct DiagnosticsWriter {
    path: PathBuf,
    inner: csv::Writer<File>,
    rows: Vec<DiagnosticsRow>,
}

impl DiagnosticsWriter {
    pub fn create(dir: &Path) -> Result<Self> {
        let path = dir.join(DIAGNOSTICS_FILE);
        let inner = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
        Ok(DiagnosticsWriter { path, inner, rows: Vec::new() })
    }

    pub fn push(&mut self, row: DiagnosticsRow) -> Result<()> {
        self.inner.serialize(row).map_err(|e| csv_err(&self.path, e))?;
        // flushed per row so that an aborted run keeps its history
        self.inner.flush().map_err(|e| Error::io(&self.path, e))?;
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[DiagnosticsRow] {
        &self.rows
    }
}

pub fn read_diagnostics(path: &Path) -> Result<Vec<DiagnosticsRow>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    rdr.deserialize().map(|r| r.map_err(|e| csv_err(path, e))).collect()
}

/// Sidecar describing a raw snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub step: usize,
    pub time: f64,
    pub model: String,
    pub quantity: String,
    /// Axis names, slowest first.
    pub axes: Vec<String>,
    pub shape: Vec<usize>,
    pub dtype: String,
    pub byte_order: String,
}

/// Writes `values` as little-endian f64 plus a JSON sidecar. Returns the data path.
pub fn write_snapshot(dir: &Path, stem: &str, values: &[f64], meta: &SnapshotMeta) -> Result<PathBuf> {
    debug_assert_eq!(values.len(), meta.shape.iter().product::<usize>());
    let path = dir.join(format!("{stem}.bin"));
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = BufWriter::new(file);
    for v in values {
        w.write_all(&v.to_le_bytes()).map_err(|e| Error::io(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    write_json(&dir.join(format!("{stem}.json")), meta)?;
    Ok(path)
}

pub fn read_snapshot(path: &Path) -> Result<Vec<f64>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Parse { path: path.display().to_string(), reason: "length is not a multiple of 8".into() });
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

#[derive(Serialize)]
struct SweepCsvRow {
    eps: f64,
    dt: f64,
    steps: usize,
    filtered_l2: f64,
    density_l2: f64,
    pairing_max: f64,
    drift_max: f64,
    mass_drift: f64,
}

/// `sweep.csv` (one row per eps, no timings) and `sweep.json` (full report).
pub fn write_sweep(dir: &Path, report: &SweepReport) -> Result<()> {
    let path = dir.join(SWEEP_CSV);
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
    for r in &report.rows {
        w.serialize(SweepCsvRow {
            eps: r.eps,
            dt: r.dt,
            steps: r.steps,
            filtered_l2: r.filtered_l2,
            density_l2: r.density_l2,
            pairing_max: r.pairing_max,
            drift_max: r.drift_max,
            mass_drift: r.mass_drift,
        })
        .map_err(|e| csv_err(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    write_json(&dir.join(SWEEP_JSON), report)
}

pub fn read_sweep(dir: &Path) -> Result<SweepReport> {
    read_json(&dir.join(SWEEP_JSON))
}
