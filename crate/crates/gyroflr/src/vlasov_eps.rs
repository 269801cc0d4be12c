//! The eps-model in gyro coordinates:
//!
//! `d_t f - (1/eps) d_alpha f + E2 d_1 f - E1 d_2 f + A_k d_k f + A_alpha d_alpha f = 0`,
//! with the field evaluated at the particle position `x + r(k, alpha)`.
//!
//! The stiff term is an exact shift in alpha. The remaining part is the Cartesian kick
//! `vt += dt E(xt)`, which leaves the charge density unchanged, so its field is frozen
//! over the substep. The kick is applied by directional conservative semi-Lagrangian
//! sweeps `x1/2, x2/2, k/2, alpha, k/2, x2/2, x1/2`.

use crate::error::Result;
use crate::fields::{self, Field2D, GyroDistribution};
use crate::geometry::{larmor_offset, mat_vec, rot_R, rot_script_R, wrap, GyroGrid, Vec2};
use crate::gyroaverage::{eval_shifted, ShiftedSlice};
use crate::initial;
use crate::sl::{advect_axis, Boundary};
use crate::spectral::{self, Interp};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Numerical options shared by the grid solvers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Off-grid interpolation in the charge deposit.
    pub deposit_interp: Interp,
    /// Interpolation for non-aligned alpha shifts.
    pub alpha_interp: Interp,
    /// Midpoint fixed-point iterations for the characteristic feet.
    pub foot_iterations: usize,
    /// Angle nodes for gyroaverages.
    pub n_quad: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            deposit_interp: Interp::Spectral,
            alpha_interp: Interp::Spectral,
            foot_iterations: 2,
            n_quad: crate::gyroaverage::DEFAULT_N_QUAD,
        }
    }
}

/// Default time step `min(0.05, 2 pi eps / gyro_steps)`, shrunk so that it divides `t_final`.
/// Returns `(dt, steps)`.
pub fn default_dt(eps: f64, t_final: f64, gyro_steps: usize) -> (f64, usize) {
    let dt0 = 0.05f64.min(TAU * eps / gyro_steps as f64);
    fit_dt(dt0, t_final)
}

/// Largest step not above `dt0` that divides `t_final` evenly.
pub fn fit_dt(dt0: f64, t_final: f64) -> (f64, usize) {
    if t_final <= 0.0 {
        return (dt0, 0);
    }
    let n = (t_final / dt0 - 1e-9).ceil().max(1.0) as usize;
    (t_final / n as f64, n)
}

/// Tabulates a Cartesian initial density on the gyro grid after checking the k cutoff.
pub fn init_from_cartesian<F>(f0_cart: F, grid: GyroGrid) -> Result<GyroDistribution>
where
    F: Fn(Vec2, Vec2) -> f64 + Sync + Send,
{
    initial::check_cutoff(&f0_cart, &grid)?;
    Ok(initial::tabulate(&f0_cart, grid))
}

/// Exact gyration over `dt`: `out(alpha) = in(alpha + dt / eps)`.
pub fn step_alpha_shift(f: &GyroDistribution, dt: f64, eps: f64) -> GyroDistribution {
    step_alpha_shift_with(f, dt, eps, Interp::Spectral)
}

pub fn step_alpha_shift_with(f: &GyroDistribution, dt: f64, eps: f64, interp: Interp) -> GyroDistribution {
    let mut out = f.clone();
    let theta = wrap(dt / eps);
    if theta != 0.0 {
        spectral::shift_axis(&mut out.values, f.grid.shape(), 3, theta, interp);
    }
    out
}

/// Face velocities of the kick for one frozen field.
pub struct KickVelocities {
    /// `E2` on x1 faces, shape `[n1, n2, nk, na]`.
    pub x1: Vec<f64>,
    /// `-E1` on x2 faces.
    pub x2: Vec<f64>,
    /// `sqrt(2k)(E1 cos a + E2 sin a)` on k faces, shape `[n1, n2, nk + 1, na]`.
    pub k: Vec<f64>,
    /// `(E2 cos a - E1 sin a) / sqrt(2k)` on alpha faces.
    pub alpha: Vec<f64>,
}

pub fn kick_velocities(field: &Field2D, grid: &GyroGrid) -> Result<KickVelocities> {
    grid.require_offset("the kick velocity A_alpha")?;
    let [h1, h2] = field.e_hat();
    let (n1, n2) = (grid.n_x1, grid.n_x2);
    let (hx1, hx2, dal) = (grid.dx1(), grid.dx2(), grid.dalpha());
    let mut node = Vec::with_capacity(grid.n_k * grid.n_alpha);
    for j in 0..grid.n_k {
        for a in 0..grid.n_alpha {
            node.push(larmor_offset(grid.k(j), grid.alpha(a)));
        }
    }
    let sx1: Vec<ShiftedSlice> = node
        .iter()
        .map(|r| ShiftedSlice { shift: [r[0] - 0.5 * hx1, r[1]], c: [0.0, 1.0] })
        .collect();
    let sx2: Vec<ShiftedSlice> = node
        .iter()
        .map(|r| ShiftedSlice { shift: [r[0], r[1] - 0.5 * hx2], c: [-1.0, 0.0] })
        .collect();
    let mut sk = Vec::with_capacity((grid.n_k + 1) * grid.n_alpha);
    for kf in grid.k_interfaces() {
        let rho = (2.0 * kf).sqrt();
        for a in 0..grid.n_alpha {
            let (s, c) = grid.alpha(a).sin_cos();
            sk.push(ShiftedSlice { shift: larmor_offset(kf, grid.alpha(a)), c: [rho * c, rho * s] });
        }
    }
    let mut sa = Vec::with_capacity(grid.n_k * grid.n_alpha);
    for j in 0..grid.n_k {
        let rho = (2.0 * grid.k(j)).sqrt();
        for a in 0..grid.n_alpha {
            let th = grid.alpha(a) - 0.5 * dal;
            let (s, c) = th.sin_cos();
            sa.push(ShiftedSlice { shift: larmor_offset(grid.k(j), th), c: [-s / rho, c / rho] });
        }
    }
    Ok(KickVelocities {
        x1: eval_shifted(&h1, &h2, n1, n2, &sx1),
        x2: eval_shifted(&h1, &h2, n1, n2, &sx2),
        k: eval_shifted(&h1, &h2, n1, n2, &sk),
        alpha: eval_shifted(&h1, &h2, n1, n2, &sa),
    })
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct AdvectionStats {
    /// Mass that left through `k = k_max`.
    pub outflow: f64,
    /// Largest `dt |du/dx|` met by a sweep.
    pub lipschitz: f64,
}

/// Kick by a frozen field over `dt` with default options.
pub fn step_field_advection(f: &GyroDistribution, field: &Field2D, dt: f64) -> Result<GyroDistribution> {
    Ok(step_field_advection_with(f, field, dt, &SolverOptions::default())?.0)
}

pub fn step_field_advection_with(
    f: &GyroDistribution,
    field: &Field2D,
    dt: f64,
    opts: &SolverOptions,
) -> Result<(GyroDistribution, AdvectionStats)> {
    let grid = f.grid;
    let v = kick_velocities(field, &grid)?;
    let mut out = f.clone();
    let shape = grid.shape();
    let it = opts.foot_iterations;
    let mut st = AdvectionStats::default();
    let max_disp = dt * field.max_abs().max(1e-300);
    let cell = grid.dx1().min(grid.dx2());
    if max_disp > cell {
        log::warn!("kick moves guiding centers by {max_disp:.3e} > one cell ({cell:.3e}) per step");
    }
    let mut sweep = |axis: usize, vel: &[f64], h: f64, tau: f64, bc: Boundary, name: &'static str| -> Result<()> {
        let s = advect_axis(&mut out.values, shape, axis, vel, h, tau, it, bc, name)?;
        st.outflow += s.outflow;
        st.lipschitz = st.lipschitz.max(s.lipschitz);
        Ok(())
    };
    let half = 0.5 * dt;
    sweep(0, &v.x1, grid.dx1(), half, Boundary::Periodic, "x1")?;
    sweep(1, &v.x2, grid.dx2(), half, Boundary::Periodic, "x2")?;
    sweep(2, &v.k, grid.dk(), half, Boundary::Open, "k")?;
    sweep(3, &v.alpha, grid.dalpha(), dt, Boundary::Periodic, "alpha")?;
    sweep(2, &v.k, grid.dk(), half, Boundary::Open, "k")?;
    sweep(1, &v.x2, grid.dx2(), half, Boundary::Periodic, "x2")?;
    sweep(0, &v.x1, grid.dx1(), half, Boundary::Periodic, "x1")?;
    // line integrals in k -> phase-space mass
    st.outflow *= grid.dx1() * grid.dx2() * grid.dalpha();
    if st.outflow.abs() > 0.0 {
        log::debug!("k boundary outflow {:.3e}", st.outflow);
    }
    Ok((out, st))
}

/// State of the eps-model integrator.
#[derive(Clone, Debug)]
pub struct EpsSolverState {
    pub f: GyroDistribution,
    /// Self-consistent field of `f`.
    pub field: Field2D,
    /// Field that drove the kick of the last step (after the first half gyration).
    pub mid_field: Field2D,
    pub n_e: Vec<f64>,
    pub t: f64,
    pub eps: f64,
    pub dt: f64,
    pub opts: SolverOptions,
    /// Cumulative mass lost through `k = k_max`.
    pub outflow: f64,
}

impl EpsSolverState {
    pub fn new(f: GyroDistribution, n_e: Vec<f64>, eps: f64, dt: f64, opts: SolverOptions) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(crate::Error::config("eps", format!("must be positive, got {eps}")));
        }
        if !(dt >= 0.0) {
            return Err(crate::Error::config("dt", format!("must be non-negative, got {dt}")));
        }
        f.grid.require_offset("the eps-model kick")?;
        let field = fields::self_consistent_field(&f, &n_e, opts.deposit_interp)?;
        Ok(EpsSolverState {
            mid_field: field.clone(),
            f,
            field,
            n_e,
            t: 0.0,
            eps,
            dt,
            opts,
            outflow: 0.0,
        })
    }
}

/// One Strang step: half gyration, field solve, kick, half gyration, field refresh.
pub fn step_strang(state: EpsSolverState) -> Result<EpsSolverState> {
    let EpsSolverState { f, n_e, t, eps, dt, opts, outflow, .. } = state;
    let half = step_alpha_shift_with(&f, 0.5 * dt, eps, opts.alpha_interp);
    let mid_field = fields::self_consistent_field_leaky(&half, &n_e, opts.deposit_interp, outflow)?;
    let (kicked, st) = step_field_advection_with(&half, &mid_field, dt, &opts)?;
    let f = step_alpha_shift_with(&kicked, 0.5 * dt, eps, opts.alpha_interp);
    let field = fields::self_consistent_field_leaky(&f, &n_e, opts.deposit_interp, outflow + st.outflow)?;
    Ok(EpsSolverState {
        f,
        field,
        mid_field,
        n_e,
        t: t + dt,
        eps,
        dt,
        opts,
        outflow: outflow + st.outflow,
    })
}

/// Cartesian markers `(xt, vt)` with weights.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParticleEnsemble {
    pub x: Vec<Vec2>,
    pub v: Vec<Vec2>,
    pub w: Vec<f64>,
    pub eps: f64,
    pub t: f64,
    /// Per-marker state at the last nonzero kick and the phase gyrated since.
    /// Rotating the anchor once, instead of the current state many times, keeps
    /// `k` and the guiding center free of accumulated rounding.
    #[serde(skip)]
    anchors: Vec<Anchor>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Anchor {
    x: Vec2,
    v: Vec2,
    phase: f64,
}

impl Anchor {
    fn at(x: Vec2, v: Vec2) -> Self {
        Anchor { x, v, phase: 0.0 }
    }
    fn state(&self) -> (Vec2, Vec2) {
        if self.phase == 0.0 {
            return (self.x, self.v);
        }
        let d = mat_vec(&rot_script_R(self.phase), self.v);
        ([self.x[0] + d[0], self.x[1] + d[1]], mat_vec(&rot_R(self.phase), self.v))
    }
    fn advance(&mut self, theta: f64) {
        self.phase = (self.phase + theta).rem_euclid(TAU);
    }
}

impl ParticleEnsemble {
    pub fn new(x: Vec<Vec2>, v: Vec<Vec2>, eps: f64) -> Self {
        let w = vec![1.0; x.len()];
        ParticleEnsemble { x, v, w, eps, t: 0.0, anchors: Vec::new() }
    }
    pub fn len(&self) -> usize {
        self.x.len()
    }
    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
    /// `k = |vt|^2 / 2` per marker.
    pub fn energies(&self) -> Vec<f64> {
        self.v.iter().map(|v| 0.5 * (v[0] * v[0] + v[1] * v[1])).collect()
    }
    /// Unwrapped guiding centers `xt + (vt2, -vt1)`.
    pub fn guiding_centers(&self) -> Vec<Vec2> {
        self.x.iter().zip(&self.v).map(|(x, v)| [x[0] + v[1], x[1] - v[0]]).collect()
    }
}

/// Anything that can report the electric field at a point.
pub trait FieldEval: Sync {
    fn eval(&self, x: Vec2) -> Vec2;
}

impl FieldEval for fields::FieldSampler {
    fn eval(&self, x: Vec2) -> Vec2 {
        fields::FieldSampler::eval(self, x)
    }
}

/// Spatially uniform field.
pub struct Uniform(pub Vec2);

impl FieldEval for Uniform {
    fn eval(&self, _: Vec2) -> Vec2 {
        self.0
    }
}

/// Exact half gyration, kick `vt += dt E(xt)`, exact half gyration.
/// Positions are not wrapped so that drifts can be read off directly.
pub fn push_particles_with(p: &ParticleEnsemble, field: &impl FieldEval, dt: f64) -> ParticleEnsemble {
    let mut out = p.clone();
    let theta = 0.5 * dt / p.eps;
    out.anchors.resize(out.x.len(), Anchor::default());
    for ((x, v), an) in out.x.iter_mut().zip(out.v.iter_mut()).zip(out.anchors.iter_mut()) {
        // markers edited from outside start a fresh anchor
        if an.state() != (*x, *v) {
            *an = Anchor::at(*x, *v);
        }
        an.advance(theta);
        let (xm, mut vm) = an.state();
        let e = field.eval(xm);
        if e != [0.0, 0.0] {
            vm[0] += dt * e[0];
            vm[1] += dt * e[1];
            *an = Anchor::at(xm, vm);
        }
        an.advance(theta);
        (*x, *v) = an.state();
    }
    out.t += dt;
    out
}

/// [`push_particles_with`] using the trigonometric interpolant of a grid field.
pub fn push_particles_cartesian(p: &ParticleEnsemble, field: &Field2D, dt: f64) -> ParticleEnsemble {
    push_particles_with(p, &field.sampler(), dt)
}

/// Classical RK4 on `xt' = vt / eps`, `vt' = E(xt) + (vt2, -vt1) / eps`, `steps` substeps of `dt / steps`.
pub fn rk4_cartesian(p: &ParticleEnsemble, field: &impl FieldEval, dt: f64, steps: usize) -> ParticleEnsemble {
    let eps = p.eps;
    let h = dt / steps as f64;
    let rhs = |x: Vec2, v: Vec2| -> (Vec2, Vec2) {
        let e = field.eval(x);
        ([v[0] / eps, v[1] / eps], [e[0] + v[1] / eps, e[1] - v[0] / eps])
    };
    let mut out = p.clone();
    for (x, v) in out.x.iter_mut().zip(out.v.iter_mut()) {
        for _ in 0..steps {
            let (k1x, k1v) = rhs(*x, *v);
            let s = |a: Vec2, b: Vec2, c: f64| [a[0] + c * b[0], a[1] + c * b[1]];
            let (k2x, k2v) = rhs(s(*x, k1x, 0.5 * h), s(*v, k1v, 0.5 * h));
            let (k3x, k3v) = rhs(s(*x, k2x, 0.5 * h), s(*v, k2v, 0.5 * h));
            let (k4x, k4v) = rhs(s(*x, k3x, h), s(*v, k3v, h));
            for d in 0..2 {
                x[d] += h / 6.0 * (k1x[d] + 2.0 * k2x[d] + 2.0 * k3x[d] + k4x[d]);
                v[d] += h / 6.0 * (k1v[d] + 2.0 * k2v[d] + 2.0 * k3v[d] + k4v[d]);
            }
        }
    }
    out.t += dt;
    out
}
