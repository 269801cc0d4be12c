//! Charge deposition, the periodic Poisson solve and the distribution container.
//!
//! Gauge: the potential has zero mean on the torus. The electron background `n_e` is
//! a fixed grid over `(x1, x2)`.

use crate::error::{Error, Result};
use crate::geometry::{deposit_offset, GyroGrid};
use crate::par;
use crate::spectral::{self, shift_multiplier, Interp};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

/// Tolerance on `mean(rho - n_e)` for the periodic Poisson problem.
pub const COMPAT_TOL: f64 = 1e-10;

/// Potential and electric field on the spatial torus, row-major `[n_x1, n_x2]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Field2D {
    pub n_x1: usize,
    pub n_x2: usize,
    pub phi: Vec<f64>,
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
}

impl Field2D {
    pub fn zeros(n_x1: usize, n_x2: usize) -> Self {
        let n = n_x1 * n_x2;
        Field2D {
            n_x1,
            n_x2,
            phi: vec![0.0; n],
            e1: vec![0.0; n],
            e2: vec![0.0; n],
        }
    }

    /// A uniform field. It has no periodic potential, so `phi` is left at zero.
    pub fn constant(n_x1: usize, n_x2: usize, e: [f64; 2]) -> Self {
        let n = n_x1 * n_x2;
        Field2D {
            n_x1,
            n_x2,
            phi: vec![0.0; n],
            e1: vec![e[0]; n],
            e2: vec![e[1]; n],
        }
    }

    /// Builds a field from nodal component values (potential left at zero).
    pub fn from_components(n_x1: usize, n_x2: usize, e1: Vec<f64>, e2: Vec<f64>) -> Self {
        Field2D {
            n_x1,
            n_x2,
            phi: vec![0.0; n_x1 * n_x2],
            e1,
            e2,
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let s = |v: &Vec<f64>| v.iter().map(|x| a * x).collect();
        Field2D {
            n_x1: self.n_x1,
            n_x2: self.n_x2,
            phi: s(&self.phi),
            e1: s(&self.e1),
            e2: s(&self.e2),
        }
    }

    /// Fourier coefficients of `(E1, E2)`.
    pub fn e_hat(&self) -> [Vec<C>; 2] {
        [
            spectral::rfft2(&self.e1, self.n_x1, self.n_x2),
            spectral::rfft2(&self.e2, self.n_x1, self.n_x2),
        ]
    }

    /// Point evaluator using the trigonometric interpolant of each component.
    pub fn sampler(&self) -> FieldSampler {
        let [h1, h2] = self.e_hat();
        let flat = h1.iter().chain(&h2).enumerate().all(|(i, z)| i % h1.len() == 0 || *z == C::new(0.0, 0.0));
        let np = (self.n_x1 * self.n_x2) as f64;
        FieldSampler {
            n_x1: self.n_x1,
            n_x2: self.n_x2,
            constant: flat.then(|| [h1[0].re / np, h2[0].re / np]),
            h1,
            h2,
        }
    }

    /// `1/2 int |E|^2 dx`.
    pub fn energy(&self) -> f64 {
        let da = (std::f64::consts::TAU / self.n_x1 as f64) * (std::f64::consts::TAU / self.n_x2 as f64);
        0.5 * da * self.e1.iter().zip(&self.e2).map(|(a, b)| a * a + b * b).sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.e1.iter().chain(&self.e2).fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Clone, Debug)]
pub struct FieldSampler {
    n_x1: usize,
    n_x2: usize,
    h1: Vec<C>,
    h2: Vec<C>,
    constant: Option<[f64; 2]>,
}

impl FieldSampler {
    pub fn eval(&self, x: [f64; 2]) -> [f64; 2] {
        if let Some(c) = self.constant {
            return c;
        }
        [
            spectral::eval_trig(&self.h1, self.n_x1, self.n_x2, x),
            spectral::eval_trig(&self.h2, self.n_x1, self.n_x2, x),
        ]
    }
}

/// Values of `f(x1, x2, k, alpha)` on a [`GyroGrid`], row-major with alpha fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GyroDistribution {
    pub grid: GyroGrid,
    pub values: Vec<f64>,
}

impl GyroDistribution {
    pub fn zeros(grid: GyroGrid) -> Self {
        GyroDistribution {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// Tabulates `f(x1, x2, k, alpha)` at the grid nodes.
    pub fn from_fn(grid: GyroGrid, f: impl Fn(f64, f64, f64, f64) -> f64 + Sync + Send) -> Self {
        let mut values = vec![0.0; grid.len()];
        let block = grid.n_k * grid.n_alpha;
        par::for_each_chunk_mut(&mut values, block, |s, chunk| {
            let (i1, i2) = (s / grid.n_x2, s % grid.n_x2);
            let (x1, x2) = (grid.x1(i1), grid.x2(i2));
            for j in 0..grid.n_k {
                let k = grid.k(j);
                for a in 0..grid.n_alpha {
                    chunk[j * grid.n_alpha + a] = f(x1, x2, k, grid.alpha(a));
                }
            }
        });
        GyroDistribution { grid, values }
    }

    #[inline]
    pub fn at(&self, i1: usize, i2: usize, j: usize, a: usize) -> f64 {
        self.values[self.grid.index(i1, i2, j, a)]
    }

    /// Quadrature weight of each flat index divided by the spatial and angular cell size.
    fn weighted_sum(&self, g: impl Fn(f64) -> f64 + Sync + Send) -> f64 {
        let grid = &self.grid;
        let na = grid.n_alpha;
        let per_k: Vec<f64> = (0..grid.n_k).map(|j| grid.k_weight(j)).collect();
        let partial = par::map_range(grid.spatial_len(), |s| {
            let base = s * grid.n_k * na;
            let mut acc = 0.0;
            for (j, w) in per_k.iter().enumerate() {
                let row = &self.values[base + j * na..base + (j + 1) * na];
                acc += w * row.iter().map(|&v| g(v)).sum::<f64>();
            }
            acc
        });
        partial.iter().sum::<f64>() * grid.cell_volume()
    }

    pub fn mass(&self) -> f64 {
        self.weighted_sum(|v| v)
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        self.weighted_sum(|v| v.abs().powf(p)).powf(1.0 / p)
    }

    pub fn l2_norm(&self) -> f64 {
        self.weighted_sum(|v| v * v).sqrt()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Mass carried by each k slice.
    pub fn kslice_masses(&self) -> Vec<f64> {
        let grid = &self.grid;
        let na = grid.n_alpha;
        let mut out = vec![0.0; grid.n_k];
        for s in 0..grid.spatial_len() {
            for (j, o) in out.iter_mut().enumerate() {
                let base = (s * grid.n_k + j) * na;
                *o += self.values[base..base + na].iter().sum::<f64>();
            }
        }
        for (j, o) in out.iter_mut().enumerate() {
            *o *= grid.k_weight(j) * grid.cell_volume();
        }
        out
    }

    /// Grid L2 distance `||self - other||`.
    pub fn l2_distance(&self, other: &GyroDistribution) -> f64 {
        let mut d = self.clone();
        for (a, b) in d.values.iter_mut().zip(&other.values) {
            *a -= b;
        }
        d.l2_norm()
    }

    pub fn scale(&mut self, a: f64) {
        for v in &mut self.values {
            *v *= a;
        }
    }
}

/// Fourier coefficients of the charge density of `f`:
/// `rho(xt) = sum_{k, alpha} w_k dalpha f(xt + s(k, alpha), k, alpha)`.
pub fn deposit_charge_hat(f: &GyroDistribution, interp: Interp) -> Vec<C> {
    let mut fh = spectral::to_complex(&f.values);
    spectral::fft_xy(&mut fh, f.grid.n_x1, f.grid.n_x2, false);
    DepositTables::new(&f.grid, interp).apply(&fh, 0)
}

/// Per-slice shift multipliers of the deposit, stored wavenumber-major so that the sum
/// over `(k, alpha)` slices is contiguous.
pub(crate) struct DepositTables {
    grid: GyroGrid,
    m1: Vec<C>,
    m2: Vec<C>,
    w: Vec<f64>,
}

impl DepositTables {
    pub(crate) fn new(grid: &GyroGrid, interp: Interp) -> Self {
        let (n1, n2) = (grid.n_x1, grid.n_x2);
        let slices = grid.n_k * grid.n_alpha;
        let mut m1 = vec![C::new(0.0, 0.0); n1 * slices];
        let mut m2 = vec![C::new(0.0, 0.0); n2 * slices];
        let mut w = vec![0.0; slices];
        for j in 0..grid.n_k {
            for a in 0..grid.n_alpha {
                let sl = j * grid.n_alpha + a;
                let s = deposit_offset(grid.k(j), grid.alpha(a));
                for (i, z) in shift_multiplier(interp, n1, s[0]).into_iter().enumerate() {
                    m1[i * slices + sl] = z;
                }
                for (i, z) in shift_multiplier(interp, n2, s[1]).into_iter().enumerate() {
                    m2[i * slices + sl] = z;
                }
                w[sl] = grid.k_weight(j) * grid.dalpha();
            }
        }
        DepositTables { grid: *grid, m1, m2, w }
    }

    /// Deposit of `fh` (spatial Fourier coefficients, shape `[n1, n2, nk, na]`) with the
    /// distribution read at angle index `a + rot`.
    pub(crate) fn apply(&self, fh: &[C], rot: usize) -> Vec<C> {
        let g = &self.grid;
        let (n1, n2, na) = (g.n_x1, g.n_x2, g.n_alpha);
        let slices = g.n_k * na;
        let mut rho = vec![C::new(0.0, 0.0); n1 * n2];
        par::for_each_chunk_mut(&mut rho, n2, |i1, row| {
            let a1 = &self.m1[i1 * slices..(i1 + 1) * slices];
            for (i2, out) in row.iter_mut().enumerate() {
                let a2 = &self.m2[i2 * slices..(i2 + 1) * slices];
                let src = &fh[(i1 * n2 + i2) * slices..(i1 * n2 + i2 + 1) * slices];
                let mut acc = C::new(0.0, 0.0);
                for j in 0..g.n_k {
                    for a in 0..na {
                        let sl = j * na + a;
                        let from = j * na + (a + rot) % na;
                        acc += src[from] * a1[sl] * a2[sl] * self.w[sl];
                    }
                }
                *out = acc;
            }
        });
        rho
    }
}

/// Charge density on the spatial grid, row-major `[n_x1, n_x2]`.
pub fn deposit_charge(f: &GyroDistribution, interp: Interp) -> Vec<f64> {
    spectral::irfft2(&deposit_charge_hat(f, interp), f.grid.n_x1, f.grid.n_x2)
}

fn compat_tol(n_e_mean: f64) -> f64 {
    COMPAT_TOL * n_e_mean.abs().max(1.0)
}

/// Solves `-lap phi = r` from Fourier coefficients of `r = rho - n_e`.
/// `scale_hint` sets the tolerance scale for the zero-mode check.
pub fn solve_poisson_hat(rhat: &[C], n1: usize, n2: usize, scale_hint: f64) -> Result<Field2D> {
    solve_poisson_hat_leaky(rhat, n1, n2, scale_hint, 0.0)
}

/// As [`solve_poisson_hat`], but the zero-mode check also admits a mean charge
/// of `leak_mean`, the mass lost through the open k boundary divided by the torus area.
pub fn solve_poisson_hat_leaky(rhat: &[C], n1: usize, n2: usize, scale_hint: f64, leak_mean: f64) -> Result<Field2D> {
    let np = (n1 * n2) as f64;
    let mean = rhat[0].re / np;
    let tol = compat_tol(scale_hint) + leak_mean.abs();
    if !mean.is_finite() {
        return Err(Error::NonFinite("charge density"));
    }
    if mean.abs() > tol {
        return Err(Error::Compatibility { residual: mean, tol });
    }
    let mut ph = vec![C::new(0.0, 0.0); n1 * n2];
    let mut e1 = ph.clone();
    let mut e2 = ph.clone();
    for i1 in 0..n1 {
        let m1 = spectral::wavenumber(i1, n1);
        for i2 in 0..n2 {
            let idx = i1 * n2 + i2;
            if idx == 0 {
                continue;
            }
            let m2 = spectral::wavenumber(i2, n2);
            let p = rhat[idx] / (m1 * m1 + m2 * m2);
            ph[idx] = p;
            let mi = C::new(0.0, -1.0);
            if !spectral::is_nyquist(i1, n1) {
                e1[idx] = mi * m1 * p;
            }
            if !spectral::is_nyquist(i2, n2) {
                e2[idx] = mi * m2 * p;
            }
        }
    }
    Ok(Field2D {
        n_x1: n1,
        n_x2: n2,
        phi: spectral::irfft2(&ph, n1, n2),
        e1: spectral::irfft2(&e1, n1, n2),
        e2: spectral::irfft2(&e2, n1, n2),
    })
}

/// Periodic Poisson solve `-lap phi = rho - n_e`, `E = -grad phi`, zero-mean gauge.
pub fn solve_poisson(rho: &[f64], n_e: &[f64], n1: usize, n2: usize) -> Result<Field2D> {
    if rho.len() != n1 * n2 || n_e.len() != n1 * n2 {
        return Err(Error::Domain("density grids do not match the spatial grid".into()));
    }
    let r: Vec<f64> = rho.iter().zip(n_e).map(|(a, b)| a - b).collect();
    let ne_mean = n_e.iter().sum::<f64>() / (n1 * n2) as f64;
    solve_poisson_hat(&spectral::rfft2(&r, n1, n2), n1, n2, ne_mean)
}

/// Deposit followed by the Poisson solve.
pub fn self_consistent_field(f: &GyroDistribution, n_e: &[f64], interp: Interp) -> Result<Field2D> {
    self_consistent_field_leaky(f, n_e, interp, 0.0)
}

/// Field solve for a distribution that has lost `leaked` mass through the k boundary.
pub fn self_consistent_field_leaky(f: &GyroDistribution, n_e: &[f64], interp: Interp, leaked: f64) -> Result<Field2D> {
    let (n1, n2) = (f.grid.n_x1, f.grid.n_x2);
    if n_e.len() != n1 * n2 {
        return Err(Error::Domain("n_e does not match the spatial grid".into()));
    }
    let mut rhat = deposit_charge_hat(f, interp);
    let nh = spectral::rfft2(n_e, n1, n2);
    for (r, n) in rhat.iter_mut().zip(&nh) {
        *r -= n;
    }
    let ne_mean = nh[0].re / (n1 * n2) as f64;
    solve_poisson_hat_leaky(&rhat, n1, n2, ne_mean, leaked / f.grid.torus_area())
}

/// Constant background density grid.
pub fn uniform_background(n1: usize, n2: usize, value: f64) -> Vec<f64> {
    vec![value; n1 * n2]
}
