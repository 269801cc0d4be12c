//! FFT plumbing on the periodic grid and shift multipliers.
//!
//! Forward transforms are unnormalized, `fhat(m) = sum_i f_i exp(-i m x_i)`; inverse
//! transforms divide by the length. Evaluating the interpolant at `x_i + s` is the
//! multiplier [`shift_multiplier`] applied in Fourier space.

use crate::par;
use num_complex::Complex64 as C;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Interpolation used when data is evaluated off-grid by a uniform shift.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interp {
    /// Trigonometric interpolant; the Nyquist mode is treated symmetrically.
    #[default]
    Spectral,
    /// Periodic cubic B-spline interpolant.
    CubicSpline,
    /// Periodic linear interpolation along each axis.
    Bilinear,
}

/// Signed wavenumber of FFT index `i` for length `n` (Nyquist reported as `-n/2`).
#[inline]
pub fn wavenumber(i: usize, n: usize) -> f64 {
    if 2 * i < n {
        i as f64
    } else {
        i as f64 - n as f64
    }
}

#[inline]
pub fn is_nyquist(i: usize, n: usize) -> bool {
    n % 2 == 0 && 2 * i == n
}

/// Spectral shift factor for one index: `exp(i m s)`, or `cos(m s)` on the Nyquist mode so
/// that real data stays real.
#[inline]
pub fn shift_factor(i: usize, n: usize, s: f64) -> C {
    let m = wavenumber(i, n);
    if is_nyquist(i, n) {
        C::new((m * s).cos(), 0.0)
    } else {
        C::from_polar(1.0, m * s)
    }
}

fn bspline3(t: f64) -> f64 {
    let a = t.abs();
    if a < 1.0 {
        (4.0 - 6.0 * a * a + 3.0 * a * a * a) / 6.0
    } else if a < 2.0 {
        let b = 2.0 - a;
        b * b * b / 6.0
    } else {
        0.0
    }
}

/// Fourier multiplier realizing `f(x_i + s)` on an `n`-point periodic grid of `[0, 2pi)`.
pub fn shift_multiplier(interp: Interp, n: usize, s: f64) -> Vec<C> {
    let h = TAU / n as f64;
    match interp {
        Interp::Spectral => (0..n).map(|i| shift_factor(i, n, s)).collect(),
        Interp::Bilinear => {
            let sigma = s / h;
            let q = sigma.floor();
            let th = sigma - q;
            (0..n)
                .map(|i| {
                    let m = wavenumber(i, n);
                    C::from_polar(1.0 - th, m * h * q) + C::from_polar(th, m * h * (q + 1.0))
                })
                .collect()
        }
        Interp::CubicSpline => {
            let sigma = s / h;
            let q = sigma.floor();
            (0..n)
                .map(|i| {
                    let m = wavenumber(i, n);
                    let mut acc = C::new(0.0, 0.0);
                    for d in -1..=2 {
                        let d = q + d as f64;
                        acc += C::from_polar(bspline3(sigma - d), m * h * d);
                    }
                    acc / ((4.0 + 2.0 * (m * h).cos()) / 6.0)
                })
                .collect()
        }
    }
}

/// In-place FFT of a row-major 4D complex array along `axis`.
pub fn fft_axis(data: &mut [C], shape: [usize; 4], axis: usize, inverse: bool) {
    let n = shape[axis];
    if n == 1 {
        return;
    }
    let mut planner = FftPlanner::<f64>::new();
    let plan = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let scale = 1.0 / n as f64;
    par::map_lines(data, shape, axis, |_, _, line| {
        plan.process(line);
        if inverse {
            for v in line.iter_mut() {
                *v *= scale;
            }
        }
    });
}

/// Forward 2D FFT over the two leading axes of a `[n1, n2, rest]` array (batched over `rest`).
pub fn fft_xy(data: &mut [C], n1: usize, n2: usize, inverse: bool) {
    let rest = data.len() / (n1 * n2);
    let shape = [n1, n2, rest, 1];
    fft_axis(data, shape, 1, inverse);
    fft_axis(data, shape, 0, inverse);
}

pub fn to_complex(re: &[f64]) -> Vec<C> {
    re.iter().map(|&x| C::new(x, 0.0)).collect()
}

pub fn real_part(c: &[C]) -> Vec<f64> {
    c.iter().map(|z| z.re).collect()
}

/// Fourier coefficients of a real 2D grid of shape `[n1, n2]`.
pub fn rfft2(re: &[f64], n1: usize, n2: usize) -> Vec<C> {
    let mut c = to_complex(re);
    fft_xy(&mut c, n1, n2, false);
    c
}

/// Real part of the inverse 2D FFT.
pub fn irfft2(c: &[C], n1: usize, n2: usize) -> Vec<f64> {
    let mut c = c.to_vec();
    fft_xy(&mut c, n1, n2, true);
    real_part(&c)
}

/// Evaluates the trigonometric interpolant with coefficients `hat` at an arbitrary point.
/// Direct sum over all modes; meant for oracles and particle pushers.
pub fn eval_trig(hat: &[C], n1: usize, n2: usize, x: [f64; 2]) -> f64 {
    let f1: Vec<C> = (0..n1).map(|i| shift_factor(i, n1, x[0])).collect();
    let f2: Vec<C> = (0..n2).map(|i| shift_factor(i, n2, x[1])).collect();
    let mut acc = C::new(0.0, 0.0);
    for i1 in 0..n1 {
        let row = &hat[i1 * n2..(i1 + 1) * n2];
        let mut r = C::new(0.0, 0.0);
        for i2 in 0..n2 {
            r += row[i2] * f2[i2];
        }
        acc += r * f1[i1];
    }
    acc.re / (n1 * n2) as f64
}

/// Shifts every periodic line along `axis` so that `out(y) = in(y + s)`.
/// Grid-aligned shifts (to 1e-12 of a cell) are done by exact index rotation.
pub fn shift_axis(data: &mut [f64], shape: [usize; 4], axis: usize, s: f64, interp: Interp) {
    let n = shape[axis];
    let h = TAU / n as f64;
    let cells = s / h;
    let rounded = cells.round();
    if (cells - rounded).abs() < 1e-12 {
        let r = (rounded as i64).rem_euclid(n as i64) as usize;
        if r != 0 {
            par::map_lines(data, shape, axis, |_, _, line| line.rotate_left(r));
        }
        return;
    }
    let mult = shift_multiplier(interp, n, s);
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let scale = 1.0 / n as f64;
    par::map_lines(data, shape, axis, |_, _, line| {
        let mut c: Vec<C> = line.iter().map(|&x| C::new(x, 0.0)).collect();
        fwd.process(&mut c);
        for (z, m) in c.iter_mut().zip(&mult) {
            *z *= m;
        }
        inv.process(&mut c);
        for (v, z) in line.iter_mut().zip(&c) {
            *v = z.re * scale;
        }
    });
}
