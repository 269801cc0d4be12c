//! Limit models as `eps -> 0`.
//!
//! * Weak-* (finite Larmor radius) model for `g(x, k, t)`:
//!   `d_t g + <E2> d_1 g - <E1> d_2 g = 0`, `-lap phi = (1/2pi) int int g(xt + s, k) da dk - n_e`,
//!   with the circle average `<E>` (normalized by `1/2pi`). Energy `k` is a parameter.
//! * Two-scale model for `G(x, k, alpha, t)` with `G(0) = f0 / 2pi`, one Poisson problem
//!   per fast time `tau` with density `int int G(xt + s, k, alpha + tau) - n_e / 2pi`, and
//!   transport by the raw brackets `<E2>, -<E1>, <F_k>, <F_alpha>`.
//!
//! Because the tau-resolved potentials carry the `1/2pi` of `G`, the raw brackets of the
//! two-scale model equal circle averages of the physical field. Both solvers use the
//! midpoint rule in time: a half step with the current field predicts the field at the
//! half time, which then drives the full step.

use crate::error::{Error, Result};
use crate::fields::{self, DepositTables, Field2D, GyroDistribution};
use crate::geometry::{deposit_offset, GyroGrid, Vec2};
use crate::gyroaverage::{self, bracket_component, gyro_average_hat, Component, GyroField};
use crate::initial;
use crate::par;
use crate::sl::{advect_axis, Boundary};
use crate::spectral::{self, shift_multiplier};
use crate::vlasov_eps::{AdvectionStats, SolverOptions};
use num_complex::Complex64 as C;
use std::f64::consts::TAU;

/// `g0(x, k) = sum_a dalpha f0(x, k, alpha_a)`, shape `[n1, n2, nk]`.
pub fn limit_g_initial<F>(f0_cart: F, grid: GyroGrid) -> Result<Vec<f64>>
where
    F: Fn(Vec2, Vec2) -> f64 + Sync + Send,
{
    initial::check_cutoff(&f0_cart, &grid)?;
    Ok(alpha_integral(&initial::tabulate(&f0_cart, grid)))
}

/// `int f dalpha` on the grid quadrature.
pub fn alpha_integral(f: &GyroDistribution) -> Vec<f64> {
    let na = f.grid.n_alpha;
    let da = f.grid.dalpha();
    f.values.chunks(na).map(|c| da * c.iter().sum::<f64>()).collect()
}

/// Weak-* model state.
#[derive(Clone, Debug)]
pub struct LimitStateg {
    pub grid: GyroGrid,
    /// `g` on `(x1, x2, k)`, k fastest.
    pub g: Vec<f64>,
    pub field: Field2D,
    /// `<E>` at the grid nodes.
    pub gyro_field: GyroField,
    pub n_e: Vec<f64>,
    pub t: f64,
    pub dt: f64,
    pub opts: SolverOptions,
}

/// Builds the weak-* state from a Cartesian datum.
pub fn init_limit_g<F>(f0_cart: F, grid: GyroGrid, n_e: Vec<f64>, dt: f64, opts: SolverOptions) -> Result<LimitStateg>
where
    F: Fn(Vec2, Vec2) -> f64 + Sync + Send,
{
    let g = limit_g_initial(f0_cart, grid)?;
    LimitStateg::new(grid, g, n_e, dt, opts)
}

impl LimitStateg {
    pub fn new(grid: GyroGrid, g: Vec<f64>, n_e: Vec<f64>, dt: f64, opts: SolverOptions) -> Result<Self> {
        if g.len() != grid.spatial_len() * grid.n_k {
            return Err(Error::Domain("g does not match the (x1, x2, k) grid".into()));
        }
        let field = limit_g_field(&grid, &g, &n_e, &opts)?;
        let gyro_field = gyroaverage::gyro_average_field(&field, &grid, opts.n_quad)?;
        Ok(LimitStateg { grid, g, field, gyro_field, n_e, t: 0.0, dt, opts })
    }

    pub fn mass(&self) -> f64 {
        self.kslice_masses().iter().sum()
    }

    /// `int g(x, k_j) dx` times the k weight, per slice.
    pub fn kslice_masses(&self) -> Vec<f64> {
        let nk = self.grid.n_k;
        let da = self.grid.dx1() * self.grid.dx2();
        let mut out = vec![0.0; nk];
        for s in 0..self.grid.spatial_len() {
            for (j, o) in out.iter_mut().enumerate() {
                *o += self.g[s * nk + j];
            }
        }
        for (j, o) in out.iter_mut().enumerate() {
            *o *= da * self.grid.k_weight(j);
        }
        out
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        let nk = self.grid.n_k;
        let da = self.grid.dx1() * self.grid.dx2();
        let s: f64 = self
            .g
            .iter()
            .enumerate()
            .map(|(i, v)| self.grid.k_weight(i % nk) * v.abs().powf(p))
            .sum();
        (da * s).powf(1.0 / p)
    }

    pub fn density(&self) -> Vec<f64> {
        spectral::irfft2(&limit_g_deposit_hat(&self.grid, &self.g, &self.opts), self.grid.n_x1, self.grid.n_x2)
    }
}

/// Circle-averaged deposit multiplier `(1/n_a) sum_a S(m, s(k, alpha_a))`.
fn deposit_circle(grid: &GyroGrid, k: f64, opts: &SolverOptions) -> Vec<C> {
    let (n1, n2, na) = (grid.n_x1, grid.n_x2, grid.n_alpha);
    let mut out = vec![C::new(0.0, 0.0); n1 * n2];
    for a in 0..na {
        let s = deposit_offset(k, grid.alpha(a));
        let p1 = shift_multiplier(opts.deposit_interp, n1, s[0]);
        let p2 = shift_multiplier(opts.deposit_interp, n2, s[1]);
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                out[i1 * n2 + i2] += p1[i1] * p2[i2];
            }
        }
    }
    let inv = 1.0 / na as f64;
    out.iter_mut().for_each(|z| *z *= inv);
    out
}

/// Fourier coefficients of `(1/2pi) int int g(xt + s(k, a), k) da dk`.
pub fn limit_g_deposit_hat(grid: &GyroGrid, g: &[f64], opts: &SolverOptions) -> Vec<C> {
    let (n1, n2, nk) = (grid.n_x1, grid.n_x2, grid.n_k);
    let mut gh = spectral::to_complex(g);
    spectral::fft_xy(&mut gh, n1, n2, false);
    let mults = par::map_range(nk, |j| deposit_circle(grid, grid.k(j), opts));
    let mut rho = vec![C::new(0.0, 0.0); n1 * n2];
    for (m, r) in rho.iter_mut().enumerate() {
        for j in 0..nk {
            *r += gh[m * nk + j] * mults[j][m] * grid.k_weight(j);
        }
    }
    rho
}

fn limit_g_field(grid: &GyroGrid, g: &[f64], n_e: &[f64], opts: &SolverOptions) -> Result<Field2D> {
    let (n1, n2) = (grid.n_x1, grid.n_x2);
    let mut rhat = limit_g_deposit_hat(grid, g, opts);
    let nh = spectral::rfft2(n_e, n1, n2);
    for (r, n) in rhat.iter_mut().zip(&nh) {
        *r -= n;
    }
    fields::solve_poisson_hat(&rhat, n1, n2, nh[0].re / (n1 * n2) as f64)
}

/// Drift velocities `(<E2>, -<E1>)` on x1 and x2 faces, shape `[n1, n2, nk]` each.
fn drift_faces(grid: &GyroGrid, field: &Field2D, n_quad: usize) -> (Vec<f64>, Vec<f64>) {
    let [h1, h2] = field.e_hat();
    let ks = grid.k_nodes();
    let (n1, n2) = (grid.n_x1, grid.n_x2);
    let u1 = gyro_average_hat(&h2, n1, n2, &ks, n_quad, [-0.5 * grid.dx1(), 0.0]);
    let mut u2 = gyro_average_hat(&h1, n1, n2, &ks, n_quad, [0.0, -0.5 * grid.dx2()]);
    u2.iter_mut().for_each(|v| *v = -*v);
    (u1, u2)
}

/// Palindromic x1/x2 split with the same substeps as the two-scale transport.
fn transport_g(grid: &GyroGrid, g: &mut [f64], u: &(Vec<f64>, Vec<f64>), dt: f64, iters: usize) -> Result<()> {
    let shape = [grid.n_x1, grid.n_x2, grid.n_k, 1];
    let h = 0.5 * dt;
    advect_axis(g, shape, 0, &u.0, grid.dx1(), h, iters, Boundary::Periodic, "x1")?;
    advect_axis(g, shape, 1, &u.1, grid.dx2(), h, iters, Boundary::Periodic, "x2")?;
    advect_axis(g, shape, 1, &u.1, grid.dx2(), h, iters, Boundary::Periodic, "x2")?;
    advect_axis(g, shape, 0, &u.0, grid.dx1(), h, iters, Boundary::Periodic, "x1")?;
    Ok(())
}

/// One midpoint step of the weak-* model.
pub fn step_limit_g(state: LimitStateg) -> Result<LimitStateg> {
    let LimitStateg { grid, g, field, n_e, t, dt, opts, .. } = state;
    let it = opts.foot_iterations;
    let mut half = g.clone();
    transport_g(&grid, &mut half, &drift_faces(&grid, &field, opts.n_quad), 0.5 * dt, it)?;
    let mid = limit_g_field(&grid, &half, &n_e, &opts)?;
    let mut next = g;
    transport_g(&grid, &mut next, &drift_faces(&grid, &mid, opts.n_quad), dt, it)?;
    let mut s = LimitStateg::new(grid, next, n_e, dt, opts)?;
    s.t = t + dt;
    Ok(s)
}

/// Two-scale model state.
#[derive(Clone, Debug)]
pub struct LimitStateG {
    pub g: GyroDistribution,
    /// Potential and field for each fast time `tau_j = j dalpha`.
    pub e_tau: Vec<Field2D>,
    pub n_e: Vec<f64>,
    pub t: f64,
    pub dt: f64,
    pub opts: SolverOptions,
    pub outflow: f64,
}

/// `G0 = f0 / 2pi` from a Cartesian datum.
pub fn init_two_scale<F>(f0_cart: F, grid: GyroGrid, n_e: Vec<f64>, dt: f64, opts: SolverOptions) -> Result<LimitStateG>
where
    F: Fn(Vec2, Vec2) -> f64 + Sync + Send,
{
    let mut g = crate::vlasov_eps::init_from_cartesian(f0_cart, grid)?;
    g.scale(1.0 / TAU);
    LimitStateG::new(g, n_e, dt, opts)
}

impl LimitStateG {
    pub fn new(g: GyroDistribution, n_e: Vec<f64>, dt: f64, opts: SolverOptions) -> Result<Self> {
        g.grid.require_offset("the two-scale angular force")?;
        let e_tau = tau_fields(&g, &n_e, &opts)?;
        Ok(LimitStateG { g, e_tau, n_e, t: 0.0, dt, opts, outflow: 0.0 })
    }

    /// `2pi int G dalpha`, directly comparable with the weak-* `g`.
    pub fn alpha_average(&self) -> Vec<f64> {
        alpha_integral(&self.g).into_iter().map(|v| TAU * v).collect()
    }

    /// Raw bracket forces at the grid nodes.
    pub fn brackets(&self) -> Result<GyroField> {
        gyroaverage::bracket_forces(&self.e_tau, &self.g.grid)
    }
}

/// Fields of the per-tau Poisson problems
/// `-lap Phi = int int G(xt + s, k, alpha + tau) dk dalpha - n_e / 2pi`.
pub fn tau_fields(g: &GyroDistribution, n_e: &[f64], opts: &SolverOptions) -> Result<Vec<Field2D>> {
    tau_fields_leaky(g, n_e, opts, 0.0)
}

/// [`tau_fields`] for a state that has lost `leaked` mass through the k boundary.
pub fn tau_fields_leaky(g: &GyroDistribution, n_e: &[f64], opts: &SolverOptions, leaked: f64) -> Result<Vec<Field2D>> {
    let grid = g.grid;
    let (n1, n2) = (grid.n_x1, grid.n_x2);
    let mut gh = spectral::to_complex(&g.values);
    spectral::fft_xy(&mut gh, n1, n2, false);
    let tables = DepositTables::new(&grid, opts.deposit_interp);
    let nh = spectral::rfft2(n_e, n1, n2);
    let ne_mean = nh[0].re / (n1 * n2) as f64 / TAU;
    let out = par::map_range(grid.n_alpha, |j| {
        let mut r = tables.apply(&gh, j);
        for (a, b) in r.iter_mut().zip(&nh) {
            *a -= b / TAU;
        }
        fields::solve_poisson_hat_leaky(&r, n1, n2, ne_mean, leaked / grid.torus_area())
    });
    out.into_iter().collect()
}

/// Face velocities of the bracketed transport.
pub struct BracketVelocities {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub k: Vec<f64>,
    pub alpha: Vec<f64>,
}

pub fn bracket_velocities(e_tau: &[Field2D], grid: &GyroGrid) -> Result<BracketVelocities> {
    let ehats: Vec<[Vec<C>; 2]> = e_tau.iter().map(|f| f.e_hat()).collect();
    let (n1, n2, na) = (grid.n_x1, grid.n_x2, grid.n_alpha);
    let ks = grid.k_nodes();
    let kf = grid.k_interfaces();
    let ev = |c, ks: &[f64], ao, xo| bracket_component(&ehats, n1, n2, na, c, ks, ao, xo);
    let x1 = ev(Component::E2, &ks, 0.0, [-0.5 * grid.dx1(), 0.0])?;
    let mut x2 = ev(Component::E1, &ks, 0.0, [0.0, -0.5 * grid.dx2()])?;
    x2.iter_mut().for_each(|v| *v = -*v);
    let k = ev(Component::Fk, &kf, 0.0, [0.0, 0.0])?;
    let alpha = ev(Component::Falpha, &ks, -0.5 * grid.dalpha(), [0.0, 0.0])?;
    Ok(BracketVelocities { x1, x2, k, alpha })
}

fn transport_two_scale(
    g: &mut GyroDistribution,
    v: &BracketVelocities,
    dt: f64,
    iters: usize,
) -> Result<AdvectionStats> {
    let grid = g.grid;
    let shape = grid.shape();
    let mut st = AdvectionStats::default();
    let h = 0.5 * dt;
    let mut sweep = |axis, vel: &[f64], hh, tau, bc, name| -> Result<()> {
        let s = advect_axis(&mut g.values, shape, axis, vel, hh, tau, iters, bc, name)?;
        st.outflow += s.outflow;
        st.lipschitz = st.lipschitz.max(s.lipschitz);
        Ok(())
    };
    sweep(0, &v.x1, grid.dx1(), h, Boundary::Periodic, "x1")?;
    sweep(1, &v.x2, grid.dx2(), h, Boundary::Periodic, "x2")?;
    sweep(2, &v.k, grid.dk(), h, Boundary::Open, "k")?;
    sweep(3, &v.alpha, grid.dalpha(), dt, Boundary::Periodic, "alpha")?;
    sweep(2, &v.k, grid.dk(), h, Boundary::Open, "k")?;
    sweep(1, &v.x2, grid.dx2(), h, Boundary::Periodic, "x2")?;
    sweep(0, &v.x1, grid.dx1(), h, Boundary::Periodic, "x1")?;
    st.outflow *= grid.dx1() * grid.dx2() * grid.dalpha();
    Ok(st)
}

/// One midpoint step of the two-scale model.
#[allow(non_snake_case)]
pub fn step_two_scale_G(state: LimitStateG) -> Result<LimitStateG> {
    let LimitStateG { g, e_tau, n_e, t, dt, opts, outflow } = state;
    let grid = g.grid;
    let it = opts.foot_iterations;
    let mut half = g.clone();
    transport_two_scale(&mut half, &bracket_velocities(&e_tau, &grid)?, 0.5 * dt, it)?;
    let mid = tau_fields_leaky(&half, &n_e, &opts, outflow)?;
    let mut next = g;
    let st = transport_two_scale(&mut next, &bracket_velocities(&mid, &grid)?, dt, it)?;
    let e_tau = tau_fields_leaky(&next, &n_e, &opts, outflow + st.outflow)?;
    Ok(LimitStateG { g: next, e_tau, n_e, t: t + dt, dt, opts, outflow: outflow + st.outflow })
}
