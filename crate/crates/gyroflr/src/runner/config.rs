//! Run configuration (TOML).

use crate::error::{Error, Result};
use crate::fields::COMPAT_TOL;
use crate::geometry::GyroGrid;
use crate::gyroaverage::DEFAULT_N_QUAD;
use crate::initial::{self, InitialDatum};
use crate::scaling::PhysicalParams;
use crate::spectral::Interp;
use crate::vlasov_eps::SolverOptions;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Eps,
    LimitG,
    TwoScale,
}

impl Model {
    pub fn tag(self) -> &'static str {
        match self {
            Model::Eps => "eps",
            Model::LimitG => "limit-g",
            Model::TwoScale => "two-scale",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "d32")]
    pub n_x1: usize,
    #[serde(default = "d32")]
    pub n_x2: usize,
    #[serde(default = "d16")]
    pub n_k: usize,
    #[serde(default = "d_kmax")]
    pub k_max: f64,
    #[serde(default = "d32")]
    pub n_alpha: usize,
    #[serde(default = "dtrue")]
    pub k_offset: bool,
    /// Fast-time nodes of the two-scale model; must equal `n_alpha`.
    #[serde(default)]
    pub n_tau: Option<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { n_x1: 32, n_x2: 32, n_k: 16, k_max: 20.0, n_alpha: 32, k_offset: true, n_tau: None }
    }
}

impl GridConfig {
    pub fn grid(&self) -> GyroGrid {
        GyroGrid {
            n_x1: self.n_x1,
            n_x2: self.n_x2,
            n_k: self.n_k,
            k_max: self.k_max,
            n_alpha: self.n_alpha,
            k_offset: self.k_offset,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackgroundKind {
    #[default]
    Constant,
    File,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundConfig {
    #[serde(default)]
    pub kind: BackgroundKind,
    #[serde(default = "d_one")]
    pub value: f64,
    /// Table of `n_x1` rows by `n_x2` comma- or space-separated values.
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// Rescale the initial datum so that its mass matches `int n_e`.
    #[serde(default = "dtrue")]
    pub auto_normalize: bool,
}

impl Default for BackgroundConfig {
    fn default() -> Self {
        BackgroundConfig { kind: BackgroundKind::Constant, value: 1.0, path: None, auto_normalize: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub deposit_interp: Interp,
    #[serde(default)]
    pub alpha_interp: Interp,
    #[serde(default = "d_iters")]
    pub foot_iterations: usize,
    #[serde(default = "d_nquad")]
    pub n_quad: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            deposit_interp: Interp::Spectral,
            alpha_interp: Interp::Spectral,
            foot_iterations: 2,
            n_quad: DEFAULT_N_QUAD,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    /// Diagnostics cadence in steps.
    #[serde(default = "d_one_usize")]
    pub every: usize,
    /// Exponent of the monitored L^p norm.
    #[serde(default = "d_lp")]
    pub lp: f64,
    /// Snapshot cadence in steps, 0 disables snapshots.
    #[serde(default)]
    pub snapshot_every: usize,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig { every: 1, lp: 3.0, snapshot_every: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSettings {
    #[serde(default = "d_sweep_eps")]
    pub eps: Vec<f64>,
    /// Steps per gyration bound for the eps runs of a sweep.
    #[serde(default = "d_sweep_gyro")]
    pub gyro_steps: usize,
    #[serde(default = "d_dt_limit")]
    pub dt_limit: f64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings { eps: d_sweep_eps(), gyro_steps: d_sweep_gyro(), dt_limit: d_dt_limit() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "d_model")]
    pub model: Model,
    #[serde(default = "d_eps")]
    pub eps: f64,
    #[serde(default = "d_one")]
    pub t_final: f64,
    /// Explicit step. Defaults: `min(0.05, 2 pi eps / gyro_steps)` for the eps model and
    /// 0.05 for the limit models, shrunk to divide `t_final`.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "d_gyro")]
    pub gyro_steps: usize,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub initial: InitialDatum,
    #[serde(default)]
    pub background: BackgroundConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default = "d_out")]
    pub output: PathBuf,
    #[serde(default)]
    pub sweep: SweepSettings,
    #[serde(default)]
    pub physical: Option<PhysicalParams>,

    /// Resolved background density grid.
    #[serde(skip)]
    pub n_e: Vec<f64>,
    /// Factor applied to the initial datum so that `int f0 = int n_e` on the grid.
    #[serde(skip)]
    pub normalization: f64,
}

fn d32() -> usize {
    32
}
fn d16() -> usize {
    16
}
fn d_kmax() -> f64 {
    20.0
}
fn dtrue() -> bool {
    true
}
fn d_one() -> f64 {
    1.0
}
fn d_one_usize() -> usize {
    1
}
fn d_iters() -> usize {
    2
}
fn d_nquad() -> usize {
    DEFAULT_N_QUAD
}
fn d_lp() -> f64 {
    3.0
}
fn d_sweep_eps() -> Vec<f64> {
    vec![0.2, 0.1, 0.05, 0.025]
}
fn d_sweep_gyro() -> usize {
    8
}
fn d_dt_limit() -> f64 {
    0.05
}
fn d_model() -> Model {
    Model::Eps
}
fn d_eps() -> f64 {
    0.1
}
fn d_gyro() -> usize {
    8
}
fn d_out() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            deposit_interp: self.solver.deposit_interp,
            alpha_interp: self.solver.alpha_interp,
            foot_iterations: self.solver.foot_iterations,
            n_quad: self.solver.n_quad,
        }
    }

    pub fn grid(&self) -> GyroGrid {
        self.grid.grid()
    }

    /// The normalized Cartesian initial density.
    pub fn f0(&self) -> impl Fn([f64; 2], [f64; 2]) -> f64 + Sync + Send + '_ {
        move |x, v| self.normalization * self.initial.cart(x, v)
    }

    /// Step and step count for the configured model.
    pub fn time_steps(&self) -> (f64, usize) {
        match (self.dt, self.model) {
            (Some(dt), _) => crate::vlasov_eps::fit_dt(dt, self.t_final),
            (None, Model::Eps) => crate::vlasov_eps::default_dt(self.eps, self.t_final, self.gyro_steps),
            (None, _) => crate::vlasov_eps::fit_dt(0.05, self.t_final),
        }
    }

    fn validate(&self) -> Result<()> {
        self.grid().validate()?;
        if let Some(nt) = self.grid.n_tau {
            if nt != self.grid.n_alpha {
                return Err(Error::config("grid.n_tau", format!("must equal n_alpha = {}", self.grid.n_alpha)));
            }
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::config("eps", "must be positive"));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::config("t_final", "must be non-negative"));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::config("dt", "must be positive"));
            }
        }
        if self.gyro_steps == 0 || self.sweep.gyro_steps == 0 {
            return Err(Error::config("gyro_steps", "must be at least 1"));
        }
        if self.diagnostics.every == 0 {
            return Err(Error::config("diagnostics.every", "must be at least 1"));
        }
        if !(self.diagnostics.lp >= 1.0) {
            return Err(Error::config("diagnostics.lp", "must be at least 1"));
        }
        if self.solver.n_quad < 4 {
            return Err(Error::config("solver.n_quad", "must be at least 4"));
        }
        if self.sweep.eps.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::config("sweep.eps", "all values must be positive"));
        }
        if !(self.sweep.dt_limit > 0.0) {
            return Err(Error::config("sweep.dt_limit", "must be positive"));
        }
        if !self.initial.density.is_finite() || !self.initial.delta.is_finite() {
            return Err(Error::config("initial", "density and delta must be finite"));
        }
        if !(self.background.value.is_finite()) {
            return Err(Error::config("background.value", "must be finite"));
        }
        Ok(())
    }

    fn resolve_background(&mut self, base: &Path) -> Result<()> {
        let n = self.grid.n_x1 * self.grid.n_x2;
        self.n_e = match self.background.kind {
            BackgroundKind::Constant => vec![self.background.value; n],
            BackgroundKind::File => {
                let rel = self
                    .background
                    .path
                    .as_ref()
                    .ok_or_else(|| Error::config("background.path", "required when kind = \"file\""))?;
                let path = if rel.is_absolute() { rel.clone() } else { base.join(rel) };
                let v = read_table(&path)?;
                if v.len() != n {
                    return Err(Error::config(
                        "background.path",
                        format!("table has {} values, grid needs {n}", v.len()),
                    ));
                }
                v
            }
        };
        Ok(())
    }

    /// Checks the k cutoff and enforces `int f0 = int n_e` on the grid.
    fn resolve_normalization(&mut self) -> Result<()> {
        let grid = self.grid();
        let raw = |x, v| self.initial.cart(x, v);
        initial::check_cutoff(&raw, &grid)?;
        let mass = initial::tabulate(&raw, grid).mass();
        let area = grid.dx1() * grid.dx2();
        let ne_total: f64 = self.n_e.iter().sum::<f64>() * area;
        let scale = ne_total.abs().max(1.0);
        self.normalization = if self.background.auto_normalize {
            if mass == 0.0 {
                if ne_total.abs() > COMPAT_TOL * scale {
                    return Err(Error::Compatibility { residual: ne_total / grid.torus_area(), tol: COMPAT_TOL });
                }
                1.0
            } else {
                let s = ne_total / mass;
                if (s - 1.0).abs() > 1e-14 {
                    log::info!("initial datum rescaled by {s:.12} to match int n_e = {ne_total:.12}");
                }
                s
            }
        } else {
            let residual = (mass - ne_total) / grid.torus_area();
            if residual.abs() > COMPAT_TOL * scale {
                return Err(Error::Compatibility { residual, tol: COMPAT_TOL });
            }
            1.0
        };
        Ok(())
    }

    /// Parses, validates and resolves a configuration. Relative paths are taken from `base`.
    pub fn from_toml_str(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: base.display().to_string(),
            reason: e.to_string(),
        })?;
        cfg.validate()?;
        cfg.resolve_background(base)?;
        cfg.resolve_normalization()?;
        Ok(cfg)
    }
}

fn read_table(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse { path: path.display().to_string(), reason: e.to_string() })?;
        for field in rec.iter() {
            for tok in field.split_whitespace() {
                out.push(tok.parse::<f64>().map_err(|e| Error::Parse {
                    path: path.display().to_string(),
                    reason: format!("`{tok}`: {e}"),
                })?);
            }
        }
    }
    Ok(out)
}

/// Reads and resolves a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    // an unreadable config is a configuration error, not a solver one
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse { path: path.display().to_string(), reason: e.to_string() })?;
    let base = path.parent().unwrap_or(Path::new("."));
    RunConfig::from_toml_str(&text, base).map_err(|e| match e {
        Error::Parse { reason, .. } => Error::Parse { path: path.display().to_string(), reason },
        other => other,
    })
}
