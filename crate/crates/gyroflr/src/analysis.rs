//! Comparisons between the eps-model and the limit models.
//!
//! Metrics of a sweep, one row per `eps`:
//! * `filtered_l2`: grid L2 distance between the filtered `g_eps(T)` and `2pi G(T)`;
//! * `density_l2`: spatial L2 distance between the charge densities of `f_eps(T)` and
//!   of the weak-* solution `g(T)`;
//! * `pairing_max`: largest deviation, over a bank of test functions, between
//!   `int f_eps psi(., T/eps)` and the prediction `int 2pi G(alpha + tau) psi(., tau)`;
//! * `drift_max`: largest `|k(t) - k(0)|` among Cartesian markers pushed in the
//!   fields of the eps run.
//!
//! The two-scale comparison uses raw brackets (no `1/2pi`), the weak-* comparison uses
//! circle averages (with `1/2pi`). They describe the same physical drift.

use crate::error::Error;
use crate::fields::{self, GyroDistribution};
use crate::flr_limit::{self, LimitStateG, LimitStateg};
use crate::geometry::{wrap, GyroGrid};
use crate::gyroaverage::Normalization;
use crate::initial::InitialDatum;
use crate::par;
use crate::spectral::{self, Interp};
use crate::vlasov_eps::{self, EpsSolverState, ParticleEnsemble, SolverOptions};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::time::Instant;

/// `g_eps(x, k, alpha, t) = f(x, k, alpha - t/eps)`.
pub fn filter_distribution(f: &GyroDistribution, t: f64, eps: f64) -> GyroDistribution {
    filter_distribution_with(f, t, eps, Interp::Spectral)
}

pub fn filter_distribution_with(f: &GyroDistribution, t: f64, eps: f64, interp: Interp) -> GyroDistribution {
    let mut out = f.clone();
    let s = wrap(-t / eps);
    if s != 0.0 {
        spectral::shift_axis(&mut out.values, f.grid.shape(), 3, s, interp);
    }
    out
}

/// `cos(m1 x1 + m2 x2 + m_alpha alpha + m_tau tau) exp(-(k / width)^2 / 2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub m1: i32,
    pub m2: i32,
    pub m_alpha: i32,
    pub m_tau: i32,
    pub width: f64,
}

impl TestFunction {
    pub fn eval(&self, x1: f64, x2: f64, k: f64, alpha: f64, tau: f64) -> f64 {
        let ph = self.m1 as f64 * x1 + self.m2 as f64 * x2 + self.m_alpha as f64 * alpha + self.m_tau as f64 * tau;
        ph.cos() * (-0.5 * (k / self.width).powi(2)).exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionBank {
    pub functions: Vec<TestFunction>,
}

impl Default for TestFunctionBank {
    /// Spatial modes with `|m1|, |m2| <= 2` in a half plane, angle and fast-time modes in
    /// `-2..=2`, Gaussian widths 1 and 3 in k.
    fn default() -> Self {
        let mut functions = Vec::new();
        for m1 in 0..=2 {
            for m2 in -2..=2 {
                if m1 == 0 && m2 < 0 {
                    continue;
                }
                for m_alpha in -2..=2 {
                    for m_tau in -2..=2 {
                        for width in [1.0, 3.0] {
                            functions.push(TestFunction { m1, m2, m_alpha, m_tau, width });
                        }
                    }
                }
            }
        }
        TestFunctionBank { functions }
    }
}

/// Direct quadrature of `int f(x, k, alpha) psi(x, k, alpha, t/eps mod 2pi) dx dk dalpha`.
pub fn weak_pairing(f: &GyroDistribution, psi: &TestFunction, t: f64, eps: f64) -> f64 {
    let g = &f.grid;
    let tau = wrap(t / eps);
    let partial = par::map_range(g.spatial_len(), |s| {
        let (i1, i2) = (s / g.n_x2, s % g.n_x2);
        let mut acc = 0.0;
        for j in 0..g.n_k {
            for a in 0..g.n_alpha {
                acc += g.k_weight(j) * f.at(i1, i2, j, a) * psi.eval(g.x1(i1), g.x2(i2), g.k(j), g.alpha(a), tau);
            }
        }
        acc
    });
    partial.iter().sum::<f64>() * g.cell_volume()
}

/// Per-k Fourier sums `sum f exp(i (m . x + m_alpha alpha))` for the fast pairing path.
struct Coefficients {
    grid: GyroGrid,
    c: Vec<C>,
}

impl Coefficients {
    fn new(f: &GyroDistribution) -> Self {
        let mut c = spectral::to_complex(&f.values);
        let shape = f.grid.shape();
        for ax in [0, 1, 3] {
            spectral::fft_axis(&mut c, shape, ax, false);
        }
        Coefficients { grid: f.grid, c }
    }

    /// `sum_j w_j exp(-(k_j/w)^2/2) sum f exp(+i(...))` times the cell volume.
    fn get(&self, psi: &TestFunction) -> C {
        let g = &self.grid;
        let idx = |m: i32, n: usize| (-(m as i64)).rem_euclid(n as i64) as usize;
        let (i1, i2, ia) = (idx(psi.m1, g.n_x1), idx(psi.m2, g.n_x2), idx(psi.m_alpha, g.n_alpha));
        let mut acc = C::new(0.0, 0.0);
        for j in 0..g.n_k {
            let w = g.k_weight(j) * (-0.5 * (g.k(j) / psi.width).powi(2)).exp();
            acc += self.c[g.index(i1, i2, j, ia)] * w;
        }
        acc * g.cell_volume()
    }
}

/// Pairings of `f` with every bank member at fast time `tau`.
pub fn pairings(f: &GyroDistribution, bank: &TestFunctionBank, tau: f64) -> Vec<f64> {
    let co = Coefficients::new(f);
    bank.functions
        .iter()
        .map(|p| (co.get(p) * C::from_polar(1.0, p.m_tau as f64 * tau)).re)
        .collect()
}

/// Predicted pairings `int 2pi G(alpha + tau) psi(alpha, tau)` from the two-scale solution.
pub fn predicted_pairings(big_g: &GyroDistribution, bank: &TestFunctionBank, tau: f64) -> Vec<f64> {
    let co = Coefficients::new(big_g);
    bank.functions
        .iter()
        .map(|p| (co.get(p) * TAU * C::from_polar(1.0, (p.m_tau - p.m_alpha) as f64 * tau)).re)
        .collect()
}

/// Max `|k(t) - k(0)|` per marker along a recorded trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub per_particle: Vec<f64>,
    pub max: f64,
    pub mean: f64,
}

pub fn adiabatic_drift(trajectory: &[ParticleEnsemble]) -> DriftReport {
    let Some(first) = trajectory.first() else {
        return DriftReport { per_particle: vec![], max: 0.0, mean: 0.0 };
    };
    let k0 = first.energies();
    let mut per = vec![0.0f64; k0.len()];
    for p in trajectory {
        for (d, (k, k0)) in per.iter_mut().zip(p.energies().iter().zip(&k0)) {
            *d = d.max((k - k0).abs());
        }
    }
    let max = per.iter().copied().fold(0.0, f64::max);
    let mean = if per.is_empty() { 0.0 } else { per.iter().sum::<f64>() / per.len() as f64 };
    DriftReport { per_particle: per, max, mean }
}

/// One line of the time-series diagnostics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub time: f64,
    pub mass: f64,
    pub l2_norm: f64,
    pub lp_norm: f64,
    pub field_energy: f64,
    pub min_f: f64,
    /// `max_j |m_j(t) - m_j(0)|` over k slices, relative to the initial total mass.
    pub kslice_mass_drift_max: f64,
}

/// Largest relative drift of each monitored quantity over a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub mass_drift: f64,
    pub l2_drift: f64,
    pub lp_drift: f64,
    pub field_energy_drift: f64,
    pub kslice_mass_drift_max: f64,
    pub min_f: f64,
    pub samples: usize,
}

pub fn conservation_report(log: &[DiagnosticsRow]) -> ConservationReport {
    let Some(first) = log.first() else {
        return ConservationReport::default();
    };
    let rel = |q0: f64, q: f64| {
        if q0 == 0.0 {
            q.abs()
        } else {
            ((q - q0) / q0).abs()
        }
    };
    let mut r = ConservationReport { min_f: f64::INFINITY, samples: log.len(), ..Default::default() };
    for row in log {
        r.mass_drift = r.mass_drift.max(rel(first.mass, row.mass));
        r.l2_drift = r.l2_drift.max(rel(first.l2_norm, row.l2_norm));
        r.lp_drift = r.lp_drift.max(rel(first.lp_norm, row.lp_norm));
        r.field_energy_drift = r.field_energy_drift.max(rel(first.field_energy, row.field_energy));
        r.kslice_mass_drift_max = r.kslice_mass_drift_max.max(row.kslice_mass_drift_max);
        r.min_f = r.min_f.min(row.min_f);
    }
    r
}

/// Deterministic markers: a 4x4 lattice of positions, energies {0.5, 1, 2}, four gyroangles.
pub fn default_markers(eps: f64) -> ParticleEnsemble {
    let mut x = Vec::new();
    let mut v = Vec::new();
    for i1 in 0..4 {
        for i2 in 0..4 {
            for k in [0.5f64, 1.0, 2.0] {
                for a in 0..4 {
                    let (s, c) = (0.3 + a as f64 * TAU / 4.0).sin_cos();
                    let rho = (2.0 * k).sqrt();
                    x.push([(i1 as f64 + 0.5) * TAU / 4.0, (i2 as f64 + 0.5) * TAU / 4.0]);
                    v.push([rho * c, rho * s]);
                }
            }
        }
    }
    ParticleEnsemble::new(x, v, eps)
}

/// Inputs shared by every member of a sweep.
#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub grid: GyroGrid,
    pub datum: InitialDatum,
    /// Multiplies the datum (compatibility normalization).
    pub datum_scale: f64,
    pub n_e: Vec<f64>,
    pub t_final: f64,
    /// Step of the limit solvers.
    pub dt_limit: f64,
    /// Steps per gyration bound for the eps runs, see [`vlasov_eps::default_dt`].
    pub gyro_steps: usize,
    pub opts: SolverOptions,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub dt: f64,
    pub steps: usize,
    pub filtered_l2: f64,
    pub density_l2: f64,
    pub pairing_max: f64,
    pub drift_max: f64,
    pub mass_drift: f64,
    pub runtime_s: f64,
}

/// Least-squares slopes of `log(metric)` against `log(eps)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Slopes {
    pub filtered_l2: f64,
    pub density_l2: f64,
    pub pairing_max: f64,
    pub drift_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub eps_values: Vec<f64>,
    pub rows: Vec<SweepRow>,
    pub slopes: Slopes,
    pub t_final: f64,
    pub limit_runtime_s: f64,
    pub two_scale_norm: Normalization,
    pub weak_star_norm: Normalization,
    pub bank_size: usize,
}

impl SweepReport {
    fn new(rows: Vec<SweepRow>, t_final: f64, limit_runtime_s: f64, bank_size: usize) -> Self {
        let mut rows = rows;
        rows.sort_by(|a, b| b.eps.total_cmp(&a.eps));
        let slope = |m: fn(&SweepRow) -> f64| {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| m(r) > 0.0)
                .map(|r| (r.eps.ln(), m(r).ln()))
                .collect();
            fit_slope(&pts)
        };
        let slopes = Slopes {
            filtered_l2: slope(|r| r.filtered_l2),
            density_l2: slope(|r| r.density_l2),
            pairing_max: slope(|r| r.pairing_max),
            drift_max: slope(|r| r.drift_max),
        };
        SweepReport {
            eps_values: rows.iter().map(|r| r.eps).collect(),
            rows,
            slopes,
            t_final,
            limit_runtime_s,
            two_scale_norm: Normalization::RawBracket,
            weak_star_norm: Normalization::Average,
            bank_size,
        }
    }

    /// Whether `metric` strictly decreases along the rows (decreasing eps).
    pub fn strictly_decreasing(&self, metric: impl Fn(&SweepRow) -> f64) -> bool {
        self.rows.windows(2).all(|w| metric(&w[1]) < metric(&w[0]))
    }

    /// Ratios `metric(row i) / metric(row i + 1)`.
    pub fn ratios(&self, metric: impl Fn(&SweepRow) -> f64) -> Vec<f64> {
        self.rows.windows(2).map(|w| metric(&w[0]) / metric(&w[1])).collect()
    }
}

fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Sweep failure with the rows that completed.
#[derive(Debug)]
pub struct SweepAbort {
    pub partial: SweepReport,
    pub error: Error,
}

/// Spatial grid L2 norm of a density difference.
fn density_distance(a: &[f64], b: &[f64], grid: &GyroGrid) -> f64 {
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    (s * grid.dx1() * grid.dx2()).sqrt()
}

/// Final states of the two limit models.
pub struct LimitRuns {
    pub weak: LimitStateg,
    pub two_scale: LimitStateG,
}

pub fn run_limits(cfg: &SweepConfig) -> crate::Result<LimitRuns> {
    let f0 = |x, v| cfg.datum_scale * cfg.datum.cart(x, v);
    let (dt, steps) = vlasov_eps::fit_dt(cfg.dt_limit, cfg.t_final);
    let mut weak = flr_limit::init_limit_g(f0, cfg.grid, cfg.n_e.clone(), dt, cfg.opts)?;
    let mut big = flr_limit::init_two_scale(f0, cfg.grid, cfg.n_e.clone(), dt, cfg.opts)?;
    for _ in 0..steps {
        weak = flr_limit::step_limit_g(weak)?;
        big = flr_limit::step_two_scale_G(big)?;
    }
    Ok(LimitRuns { weak, two_scale: big })
}

/// Runs the eps model to `t_final` and scores it against the limit solutions.
pub fn sweep_member(cfg: &SweepConfig, limits: &LimitRuns, eps: f64, bank: &TestFunctionBank) -> crate::Result<SweepRow> {
    let start = Instant::now();
    let f0 = |x, v| cfg.datum_scale * cfg.datum.cart(x, v);
    let (dt, steps) = vlasov_eps::default_dt(eps, cfg.t_final, cfg.gyro_steps);
    let f = vlasov_eps::init_from_cartesian(f0, cfg.grid)?;
    let mass0 = f.mass();
    let mut st = EpsSolverState::new(f, cfg.n_e.clone(), eps, dt, cfg.opts)?;
    let mut markers = default_markers(eps);
    let mut traj = vec![markers.clone()];
    for _ in 0..steps {
        st = vlasov_eps::step_strang(st)?;
        markers = vlasov_eps::push_particles_cartesian(&markers, &st.mid_field, dt);
        traj.push(markers.clone());
    }
    let t = st.t;
    let filtered = filter_distribution_with(&st.f, t, eps, cfg.opts.alpha_interp);
    let mut two_pi_g = limits.two_scale.g.clone();
    two_pi_g.scale(TAU);
    let filtered_l2 = filtered.l2_distance(&two_pi_g);

    let rho_eps = fields::deposit_charge(&st.f, cfg.opts.deposit_interp);
    let rho_lim = limits.weak.density();
    let density_l2 = density_distance(&rho_eps, &rho_lim, &cfg.grid);

    let tau = wrap(t / eps);
    let got = pairings(&st.f, bank, tau);
    let want = predicted_pairings(&limits.two_scale.g, bank, tau);
    let pairing_max = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    Ok(SweepRow {
        eps,
        dt,
        steps,
        filtered_l2,
        density_l2,
        pairing_max,
        drift_max: adiabatic_drift(&traj).max,
        mass_drift: ((st.f.mass() - mass0) / mass0).abs(),
        runtime_s: start.elapsed().as_secs_f64(),
    })
}

/// Runs every eps in `eps_list` against the two limit models. Members run in parallel.
pub fn convergence_sweep(cfg: &SweepConfig, eps_list: &[f64]) -> Result<SweepReport, SweepAbort> {
    let bank = TestFunctionBank::default();
    let start = Instant::now();
    let limits = match run_limits(cfg) {
        Ok(l) => l,
        Err(error) => {
            return Err(SweepAbort { partial: SweepReport::new(vec![], cfg.t_final, 0.0, bank.functions.len()), error })
        }
    };
    let limit_runtime = start.elapsed().as_secs_f64();
    let results = par::map_range(eps_list.len(), |i| sweep_member(cfg, &limits, eps_list[i], &bank));
    let mut rows = Vec::new();
    let mut first_err = None;
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                if first_err.is_none() {
                    first_err = Some(e);
                }
            }
        }
    }
    let report = SweepReport::new(rows, cfg.t_final, limit_runtime, bank.functions.len());
    match first_err {
        None => Ok(report),
        Some(error) => Err(SweepAbort { partial: report, error }),
    }
}
