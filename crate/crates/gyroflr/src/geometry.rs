//! Rotations, the canonical gyrokinetic change of variables and the phase-space grid.
//!
//! Conventions: `x1 = xt1 + vt2`, `x2 = xt2 - vt1`, `vt = sqrt(2k) (cos alpha, sin alpha)`.
//! The particle position seen from the guiding center is `x + larmor_offset(k, alpha)`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

pub type Mat2 = [[f64; 2]; 2];
pub type Vec2 = [f64; 2];

/// `R(tau) = [[cos, sin], [-sin, cos]]`.
#[allow(non_snake_case)]
pub fn rot_R(tau: f64) -> Mat2 {
    let (s, c) = tau.sin_cos();
    [[c, s], [-s, c]]
}

/// `script R(tau) = [[sin, 1 - cos], [cos - 1, sin]]`, the primitive of `R` vanishing at 0.
#[allow(non_snake_case)]
pub fn rot_script_R(tau: f64) -> Mat2 {
    let (s, c) = tau.sin_cos();
    [[s, 1.0 - c], [c - 1.0, s]]
}

pub fn mat_vec(m: &Mat2, v: Vec2) -> Vec2 {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Reduces an angle or a torus coordinate to `[0, 2pi)`.
pub fn wrap(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CartState {
    pub x_tilde: Vec2,
    pub v_tilde: Vec2,
}

impl CartState {
    pub fn new(x_tilde: Vec2, v_tilde: Vec2) -> Self {
        CartState {
            x_tilde: [wrap(x_tilde[0]), wrap(x_tilde[1])],
            v_tilde,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GyroState {
    pub x: Vec2,
    pub k: f64,
    pub alpha: f64,
    /// Set when the velocity was zero and `alpha` is the conventional 0.
    #[serde(default)]
    pub degenerate: bool,
}

/// Offset from guiding center to particle: `(-sqrt(2k) sin alpha, sqrt(2k) cos alpha)`.
#[inline]
pub fn larmor_offset(k: f64, alpha: f64) -> Vec2 {
    let rho = (2.0 * k).sqrt();
    let (s, c) = alpha.sin_cos();
    [-rho * s, rho * c]
}

/// Offset used by the charge deposit, `f(x + s)`: the negative of [`larmor_offset`].
#[inline]
pub fn deposit_offset(k: f64, alpha: f64) -> Vec2 {
    let r = larmor_offset(k, alpha);
    [-r[0], -r[1]]
}

pub fn cart_to_gyro(s: CartState) -> GyroState {
    let [v1, v2] = s.v_tilde;
    let k = 0.5 * (v1 * v1 + v2 * v2);
    let degenerate = v1 == 0.0 && v2 == 0.0;
    let alpha = if degenerate { 0.0 } else { wrap(v2.atan2(v1)) };
    GyroState {
        x: [wrap(s.x_tilde[0] + v2), wrap(s.x_tilde[1] - v1)],
        k,
        alpha,
        degenerate,
    }
}

pub fn gyro_to_cart(s: GyroState) -> Result<CartState> {
    if !(s.k >= 0.0) {
        return Err(Error::Domain(format!("k must be non-negative, got {}", s.k)));
    }
    let rho = (2.0 * s.k).sqrt();
    let (sa, ca) = s.alpha.sin_cos();
    let v = [rho * ca, rho * sa];
    Ok(CartState::new([s.x[0] - v[1], s.x[1] + v[0]], v))
}

/// `(xt + script R(-tau) vt, R(-tau) vt)`. In gyro coordinates this advances alpha by tau.
pub fn cartesian_filter_map(x_tilde: Vec2, v_tilde: Vec2, tau: f64) -> CartState {
    let d = mat_vec(&rot_script_R(-tau), v_tilde);
    let v = mat_vec(&rot_R(-tau), v_tilde);
    CartState::new([x_tilde[0] + d[0], x_tilde[1] + d[1]], v)
}

/// Discretized phase space: periodic torus in `x`, energy `k in (0, k_max)`, gyroangle on the circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GyroGrid {
    pub n_x1: usize,
    pub n_x2: usize,
    pub n_k: usize,
    pub k_max: f64,
    pub n_alpha: usize,
    /// Cell-centered k nodes `(j + 1/2) dk` with midpoint weights. Otherwise nodes
    /// `j dk` including `k = 0`, with trapezoid weights.
    pub k_offset: bool,
}

impl GyroGrid {
    pub fn new(n_x1: usize, n_x2: usize, n_k: usize, k_max: f64, n_alpha: usize) -> Result<Self> {
        let g = GyroGrid {
            n_x1,
            n_x2,
            n_k,
            k_max,
            n_alpha,
            k_offset: true,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, n) in [
            ("n_x1", self.n_x1),
            ("n_x2", self.n_x2),
            ("n_k", self.n_k),
            ("n_alpha", self.n_alpha),
        ] {
            if n < 2 {
                return Err(Error::config(name, format!("must be at least 2, got {n}")));
            }
        }
        if !(self.k_max > 0.0 && self.k_max.is_finite()) {
            return Err(Error::config("k_max", format!("must be positive, got {}", self.k_max)));
        }
        Ok(())
    }

    pub fn shape(&self) -> [usize; 4] {
        [self.n_x1, self.n_x2, self.n_k, self.n_alpha]
    }
    pub fn len(&self) -> usize {
        self.n_x1 * self.n_x2 * self.n_k * self.n_alpha
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn spatial_len(&self) -> usize {
        self.n_x1 * self.n_x2
    }
    #[inline]
    pub fn index(&self, i1: usize, i2: usize, j: usize, a: usize) -> usize {
        ((i1 * self.n_x2 + i2) * self.n_k + j) * self.n_alpha + a
    }

    pub fn dx1(&self) -> f64 {
        TAU / self.n_x1 as f64
    }
    pub fn dx2(&self) -> f64 {
        TAU / self.n_x2 as f64
    }
    pub fn dalpha(&self) -> f64 {
        TAU / self.n_alpha as f64
    }
    pub fn dk(&self) -> f64 {
        if self.k_offset {
            self.k_max / self.n_k as f64
        } else {
            self.k_max / (self.n_k - 1) as f64
        }
    }
    pub fn x1(&self, i: usize) -> f64 {
        i as f64 * self.dx1()
    }
    pub fn x2(&self, i: usize) -> f64 {
        i as f64 * self.dx2()
    }
    pub fn alpha(&self, a: usize) -> f64 {
        a as f64 * self.dalpha()
    }
    pub fn k(&self, j: usize) -> f64 {
        if self.k_offset {
            (j as f64 + 0.5) * self.dk()
        } else {
            j as f64 * self.dk()
        }
    }
    pub fn k_nodes(&self) -> Vec<f64> {
        (0..self.n_k).map(|j| self.k(j)).collect()
    }
    /// Quadrature weight of k node `j`.
    pub fn k_weight(&self, j: usize) -> f64 {
        let dk = self.dk();
        if !self.k_offset && (j == 0 || j + 1 == self.n_k) {
            0.5 * dk
        } else {
            dk
        }
    }
    /// Cell faces in k, `j dk` for `j = 0..=n_k` (cell-centered grids only).
    pub fn k_interfaces(&self) -> Vec<f64> {
        (0..=self.n_k).map(|j| j as f64 * self.dk()).collect()
    }
    /// Phase-space volume element of one node without the k weight.
    pub fn cell_volume(&self) -> f64 {
        self.dx1() * self.dx2() * self.dalpha()
    }
    pub fn torus_area(&self) -> f64 {
        TAU * TAU
    }
    pub fn require_offset(&self, what: &'static str) -> Result<()> {
        if self.k_offset {
            Ok(())
        } else {
            Err(Error::Singularity(what))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: &Mat2, b: &Mat2, tol: f64) -> bool {
        (0..2).all(|i| (0..2).all(|j| (a[i][j] - b[i][j]).abs() <= tol))
    }

    #[test]
    fn rotation_examples() {
        assert!(close(&rot_R(0.0), &[[1.0, 0.0], [0.0, 1.0]], 0.0));
        assert!(close(&rot_R(PI / 2.0), &[[0.0, 1.0], [-1.0, 0.0]], 1e-16));
        assert!(close(&mat_mul(&rot_R(0.3), &rot_R(0.4)), &rot_R(0.7), 1e-14));
        assert!(close(&rot_script_R(0.0), &[[0.0; 2]; 2], 0.0));
        assert!(close(&rot_script_R(PI / 2.0), &[[1.0, 1.0], [-1.0, 1.0]], 1e-15));
    }

    #[test]
    fn script_r_derivative_is_r() {
        let (t, h) = (0.5, 1e-6);
        let a = rot_script_R(t + h);
        let b = rot_script_R(t);
        let r = rot_R(t);
        for i in 0..2 {
            for j in 0..2 {
                assert!(((a[i][j] - b[i][j]) / h - r[i][j]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn coordinate_examples() {
        let g = cart_to_gyro(CartState::new([0.0, 0.0], [1.0, 0.0]));
        assert!((g.x[0]).abs() < 1e-15 && (g.x[1] - (TAU - 1.0)).abs() < 1e-15);
        assert_eq!((g.k, g.alpha, g.degenerate), (0.5, 0.0, false));

        let g = cart_to_gyro(CartState::new([1.0, 2.0], [0.0, 0.0]));
        assert_eq!((g.x, g.k, g.alpha, g.degenerate), ([1.0, 2.0], 0.0, 0.0, true));

        let c = gyro_to_cart(GyroState { x: [0.0, 0.0], k: 0.0, alpha: 1.3, degenerate: false }).unwrap();
        assert_eq!(c.v_tilde, [0.0, 0.0]);
        assert_eq!(c.x_tilde, [0.0, 0.0]);

        let c = gyro_to_cart(GyroState { x: [0.0, 0.0], k: 0.5, alpha: PI / 2.0, degenerate: false }).unwrap();
        assert!((c.x_tilde[0] - (TAU - 1.0)).abs() < 1e-15 && c.x_tilde[1].abs() < 1e-15);
        assert!(c.v_tilde[0].abs() < 1e-16 && (c.v_tilde[1] - 1.0).abs() < 1e-16);

        assert!(matches!(
            gyro_to_cart(GyroState { x: [0.0, 0.0], k: -1.0, alpha: 0.0, degenerate: false }),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn filter_map_full_turn_is_identity() {
        let s = cartesian_filter_map([1.0, 2.0], [0.3, -0.7], TAU);
        assert!((s.x_tilde[0] - 1.0).abs() < 1e-14 && (s.x_tilde[1] - 2.0).abs() < 1e-14);
        assert!((s.v_tilde[0] - 0.3).abs() < 1e-15 && (s.v_tilde[1] + 0.7).abs() < 1e-15);
        let s = cartesian_filter_map([1.0, 2.0], [0.3, -0.7], 0.0);
        assert_eq!(s, CartState::new([1.0, 2.0], [0.3, -0.7]));
    }

    #[test]
    fn grid_nodes() {
        let g = GyroGrid::new(8, 4, 4, 2.0, 8).unwrap();
        assert_eq!(g.k(0), 0.25);
        assert_eq!(g.k_interfaces(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(g.index(1, 0, 0, 0), 4 * 4 * 8);
        assert!(GyroGrid::new(1, 4, 4, 2.0, 8).is_err());
        assert!(GyroGrid::new(4, 4, 4, 0.0, 8).is_err());
    }
}
