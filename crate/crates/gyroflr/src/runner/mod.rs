//! Configuration, orchestration and artifacts.

pub mod artifacts;
pub mod config;

pub use config::{load_config, BackgroundConfig, BackgroundKind, DiagnosticsConfig, GridConfig, Model, RunConfig};

use crate::analysis::{self, ConservationReport, DiagnosticsRow, SweepConfig, SweepReport};
use crate::error::{Error, Result};
use crate::fields::{Field2D, GyroDistribution};
use crate::flr_limit::{self, LimitStateG, LimitStateg};
use crate::scaling::{self, DerivedScales};
use crate::vlasov_eps::{self, EpsSolverState};
use artifacts::{DiagnosticsWriter, SnapshotMeta};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Run metadata written next to every artifact set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    /// Factor applied to the initial datum at load.
    pub normalization: f64,
    pub derived_scales: Option<DerivedScales>,
    pub parallel: bool,
    pub threads: usize,
    pub dt: f64,
    pub steps_planned: usize,
    pub steps_completed: usize,
    pub time: f64,
    /// True when the run stopped on an error; artifacts hold what was done.
    pub partial: bool,
    pub error: Option<String>,
}

#[derive(Serialize)]
struct Timing {
    runtime_s: f64,
}

/// Summary of a finished time integration.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub steps: usize,
    pub time: f64,
    pub diagnostics: Vec<DiagnosticsRow>,
    pub conservation: ConservationReport,
}

/// Derived scales of the optional physical block.
pub fn scales(cfg: &RunConfig) -> Result<DerivedScales> {
    let p = cfg.physical.as_ref().ok_or_else(|| Error::config("physical", "section missing"))?;
    physical_scales(p)
}

fn physical_scales(p: &scaling::PhysicalParams) -> Result<DerivedScales> {
    scaling::derive_scales(p).map_err(|e| match e {
        Error::Domain(reason) => Error::config("physical", reason),
        other => other,
    })
}

fn optional_scales(cfg: &RunConfig) -> Result<Option<DerivedScales>> {
    cfg.physical.as_ref().map(physical_scales).transpose()
}

fn metadata(cfg: &RunConfig, command: &str, dt: f64, steps: usize) -> Result<Metadata> {
    Ok(Metadata {
        version: crate::VERSION.to_string(),
        command: command.to_string(),
        config: cfg.clone(),
        normalization: cfg.normalization,
        derived_scales: optional_scales(cfg)?,
        parallel: crate::par::is_parallel(),
        threads: crate::par::current_threads(),
        dt,
        steps_planned: steps,
        steps_completed: 0,
        time: 0.0,
        partial: true,
        error: None,
    })
}

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn kslice_drift(m0: &[f64], m: &[f64]) -> f64 {
    let total: f64 = m0.iter().sum::<f64>().abs().max(f64::MIN_POSITIVE);
    m0.iter().zip(m).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / total
}

/// What the driver needs from a solver state.
trait Integrator: Sized {
    const QUANTITY: &'static str;
    fn advance(self) -> Result<Self>;
    fn time(&self) -> f64;
    fn row(&self, lp: f64, m0: &[f64]) -> DiagnosticsRow;
    fn kslices(&self) -> Vec<f64>;
    fn snapshot(&self) -> (Vec<f64>, Vec<&'static str>, Vec<usize>);
    fn field_snapshot(&self) -> (Vec<f64>, Vec<&'static str>, Vec<usize>);
}

fn dist_row(f: &GyroDistribution, t: f64, lp: f64, energy: f64, m0: &[f64]) -> DiagnosticsRow {
    DiagnosticsRow {
        time: t,
        mass: f.mass(),
        l2_norm: f.l2_norm(),
        lp_norm: f.lp_norm(lp),
        field_energy: energy,
        min_f: f.min(),
        kslice_mass_drift_max: kslice_drift(m0, &f.kslice_masses()),
    }
}

fn dist_snapshot(f: &GyroDistribution) -> (Vec<f64>, Vec<&'static str>, Vec<usize>) {
    (f.values.clone(), vec!["x1", "x2", "k", "alpha"], f.grid.shape().to_vec())
}

fn field_stack(fields: &[&Field2D]) -> Vec<f64> {
    let mut out = Vec::new();
    for f in fields {
        out.extend_from_slice(&f.phi);
        out.extend_from_slice(&f.e1);
        out.extend_from_slice(&f.e2);
    }
    out
}

impl Integrator for EpsSolverState {
    const QUANTITY: &'static str = "f";
    fn advance(self) -> Result<Self> {
        vlasov_eps::step_strang(self)
    }
    fn time(&self) -> f64 {
        self.t
    }
    fn row(&self, lp: f64, m0: &[f64]) -> DiagnosticsRow {
        dist_row(&self.f, self.t, lp, self.field.energy(), m0)
    }
    fn kslices(&self) -> Vec<f64> {
        self.f.kslice_masses()
    }
    fn snapshot(&self) -> (Vec<f64>, Vec<&'static str>, Vec<usize>) {
        dist_snapshot(&self.f)
    }
    fn field_snapshot(&self) -> (Vec<f64>, Vec<&'static str>, Vec<usize>) {
        (field_stack(&[&self.field]), vec!["component", "x1", "x2"], vec![3, self.field.n_x1, self.field.n_x2])
    }
}

impl Integrator for LimitStateg {
    const QUANTITY: &'static str = "g";
    fn advance(self) -> Result<Self> {
        flr_limit::step_limit_g(self)
    }
    fn time(&self) -> f64 {
        self.t
    }
    fn row(&self, lp: f64, m0: &[f64]) -> DiagnosticsRow {
        DiagnosticsRow {
            time: self.t,
            mass: self.mass(),
            l2_norm: self.lp_norm(2.0),
            lp_norm: self.lp_norm(lp),
            field_energy: self.field.energy(),
            min_f: self.g.iter().copied().fold(f64::INFINITY, f64::min),
            kslice_mass_drift_max: kslice_drift(m0, &self.kslice_masses()),
        }
    }
    fn kslices(&self) -> Vec<f64> {
        self.kslice_masses()
    }
    fn snapshot(&self) -> (Vec<f64>, Vec<&'static str>, Vec<usize>) {
        (self.g.clone(), vec!["x1", "x2", "k"], vec![self.grid.n_x1, self.grid.n_x2, self.grid.n_k])
    }
    fn field_snapshot(&self) -> (Vec<f64>, Vec<&'static str>, Vec<usize>) {
        (field_stack(&[&self.field]), vec!["component", "x1", "x2"], vec![3, self.field.n_x1, self.field.n_x2])
    }
}

impl Integrator for LimitStateG {
    const QUANTITY: &'static str = "G";
    fn advance(self) -> Result<Self> {
        flr_limit::step_two_scale_G(self)
    }
    fn time(&self) -> f64 {
        self.t
    }
    /// Field energy is the tau-average of the energy of the physical field `2 pi E(tau)`.
    fn row(&self, lp: f64, m0: &[f64]) -> DiagnosticsRow {
        let n = self.e_tau.len().max(1) as f64;
        let energy = TAU * TAU * self.e_tau.iter().map(Field2D::energy).sum::<f64>() / n;
        dist_row(&self.g, self.t, lp, energy, m0)
    }
    fn kslices(&self) -> Vec<f64> {
        self.g.kslice_masses()
    }
    fn snapshot(&self) -> (Vec<f64>, Vec<&'static str>, Vec<usize>) {
        dist_snapshot(&self.g)
    }
    fn field_snapshot(&self) -> (Vec<f64>, Vec<&'static str>, Vec<usize>) {
        let refs: Vec<&Field2D> = self.e_tau.iter().collect();
        let (n1, n2) = (self.g.grid.n_x1, self.g.grid.n_x2);
        (field_stack(&refs), vec!["tau", "component", "x1", "x2"], vec![refs.len(), 3, n1, n2])
    }
}

fn write_snapshots<S: Integrator>(dir: &Path, s: &S, step: usize, model: Model) -> Result<()> {
    let meta = |quantity: &str, axes: Vec<&str>, shape: Vec<usize>| SnapshotMeta {
        step,
        time: s.time(),
        model: model.tag().to_string(),
        quantity: quantity.to_string(),
        axes: axes.into_iter().map(String::from).collect(),
        shape,
        dtype: "f64".into(),
        byte_order: "little".into(),
    };
    let (v, axes, shape) = s.snapshot();
    artifacts::write_snapshot(dir, &format!("{}_{step:06}", S::QUANTITY), &v, &meta(S::QUANTITY, axes, shape))?;
    let (v, axes, shape) = s.field_snapshot();
    artifacts::write_snapshot(dir, &format!("field_{step:06}"), &v, &meta("phi,e1,e2", axes, shape))?;
    Ok(())
}

fn drive<S: Integrator>(cfg: &RunConfig, state: Result<S>, dt: f64, steps: usize) -> Result<RunOutcome> {
    let dir = cfg.output.clone();
    prepare_dir(&dir)?;
    let started = Instant::now();
    let mut meta = metadata(cfg, cfg.model.tag(), dt, steps)?;
    let meta_path = dir.join(artifacts::METADATA_FILE);
    artifacts::write_json(&meta_path, &meta)?;
    let mut diag = DiagnosticsWriter::create(&dir)?;
    let lp = cfg.diagnostics.lp;
    let every = cfg.diagnostics.every;
    let snap = cfg.diagnostics.snapshot_every;

    let mut done = 0usize;
    let result = (|| -> Result<()> {
        let mut s = state?;
        let m0 = s.kslices();
        diag.push(s.row(lp, &m0))?;
        if snap > 0 {
            write_snapshots(&dir, &s, 0, cfg.model)?;
        }
        for n in 1..=steps {
            s = s.advance()?;
            done = n;
            meta.time = s.time();
            if n % every == 0 || n == steps {
                let row = s.row(lp, &m0);
                if !row.mass.is_finite() || !row.l2_norm.is_finite() {
                    return Err(Error::NonFinite("distribution"));
                }
                log::info!("step {n}/{steps} t={:.4} mass={:.12e}", row.time, row.mass);
                diag.push(row)?;
            }
            if snap > 0 && (n % snap == 0 || n == steps) {
                write_snapshots(&dir, &s, n, cfg.model)?;
            }
        }
        Ok(())
    })();

    meta.steps_completed = done;
    meta.partial = result.is_err();
    meta.error = result.as_ref().err().map(|e| e.to_string());
    artifacts::write_json(&meta_path, &meta)?;
    artifacts::write_json(&dir.join(artifacts::TIMING_FILE), &Timing { runtime_s: started.elapsed().as_secs_f64() })?;
    result?;
    let rows = diag.rows().to_vec();
    Ok(RunOutcome { dir, steps: done, time: meta.time, conservation: analysis::conservation_report(&rows), diagnostics: rows })
}

/// Runs the configured model and writes its artifacts to `cfg.output`.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    let (dt, steps) = cfg.time_steps();
    let grid = cfg.grid();
    let opts = cfg.solver_options();
    let f0 = cfg.f0();
    match cfg.model {
        Model::Eps => {
            let state = vlasov_eps::init_from_cartesian(&f0, grid)
                .and_then(|f| EpsSolverState::new(f, cfg.n_e.clone(), cfg.eps, dt, opts));
            drive(cfg, state, dt, steps)
        }
        Model::LimitG => drive(cfg, flr_limit::init_limit_g(&f0, grid, cfg.n_e.clone(), dt, opts), dt, steps),
        Model::TwoScale => drive(cfg, flr_limit::init_two_scale(&f0, grid, cfg.n_e.clone(), dt, opts), dt, steps),
    }
}

/// The sweep set-up implied by a run configuration.
pub fn sweep_config(cfg: &RunConfig) -> SweepConfig {
    SweepConfig {
        grid: cfg.grid(),
        datum: cfg.initial.clone(),
        datum_scale: cfg.normalization,
        n_e: cfg.n_e.clone(),
        t_final: cfg.t_final,
        dt_limit: cfg.sweep.dt_limit,
        gyro_steps: cfg.sweep.gyro_steps,
        opts: cfg.solver_options(),
    }
}

/// Convergence sweep over `eps_list` (or the configured list). Writes `sweep.csv` and `sweep.json`.
pub fn sweep(cfg: &RunConfig, eps_list: Option<&[f64]>, command: &str) -> Result<SweepReport> {
    let eps: Vec<f64> = eps_list.map(<[f64]>::to_vec).unwrap_or_else(|| cfg.sweep.eps.clone());
    if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::config("eps", "list must be non-empty and positive"));
    }
    let dir = cfg.output.clone();
    prepare_dir(&dir)?;
    let started = Instant::now();
    let mut meta = metadata(cfg, command, f64::NAN, eps.len())?;
    meta.dt = cfg.sweep.dt_limit;
    let meta_path = dir.join(artifacts::METADATA_FILE);
    artifacts::write_json(&meta_path, &meta)?;
    let outcome = analysis::convergence_sweep(&sweep_config(cfg), &eps);
    let (report, err) = match outcome {
        Ok(r) => (r, None),
        Err(abort) => (abort.partial, Some(abort.error)),
    };
    artifacts::write_sweep(&dir, &report)?;
    meta.steps_completed = report.rows.len();
    meta.time = cfg.t_final;
    meta.partial = err.is_some();
    meta.error = err.as_ref().map(|e| e.to_string());
    artifacts::write_json(&meta_path, &meta)?;
    artifacts::write_json(&dir.join(artifacts::TIMING_FILE), &Timing { runtime_s: started.elapsed().as_secs_f64() })?;
    match err {
        Some(e) => Err(e),
        None => Ok(report),
    }
}

/// Conservation summary of an existing run directory.
pub fn diag(dir: &Path) -> Result<ConservationReport> {
    let rows = artifacts::read_diagnostics(&dir.join(artifacts::DIAGNOSTICS_FILE))?;
    Ok(analysis::conservation_report(&rows))
}
