//! Initial data: perturbed Maxwellians in Cartesian variables and their tabulation.

use crate::error::{Error, Result};
use crate::fields::GyroDistribution;
use crate::geometry::{gyro_to_cart, GyroGrid, GyroState, Vec2};
use crate::par;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Largest admissible fraction of the initial mass lying beyond `k_max`.
pub const CUTOFF_LIMIT: f64 = 1e-8;

/// Where the density perturbation is applied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    /// `cos(m . xt)` in particle position. The charge density then oscillates at the
    /// gyrofrequency.
    #[default]
    Particle,
    /// `cos(m . x)` in guiding-center position `x = xt + (vt2, -vt1)`. The initial
    /// distribution does not depend on the gyroangle.
    GuidingCenter,
}

/// `f0(xt, vt) = n0 / (2pi) exp(-|vt|^2 / 2) (1 + delta sum_m cos(m . y))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialDatum {
    #[serde(default = "one")]
    pub density: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default = "default_modes")]
    pub modes: Vec<[i32; 2]>,
    #[serde(default)]
    pub perturbation: Perturbation,
}

fn one() -> f64 {
    1.0
}
fn default_modes() -> Vec<[i32; 2]> {
    vec![[1, 0]]
}

impl Default for InitialDatum {
    fn default() -> Self {
        InitialDatum {
            density: 1.0,
            delta: 0.1,
            modes: default_modes(),
            perturbation: Perturbation::Particle,
        }
    }
}

impl InitialDatum {
    pub fn maxwellian(delta: f64, perturbation: Perturbation) -> Self {
        InitialDatum {
            delta,
            perturbation,
            ..Default::default()
        }
    }

    pub fn cart(&self, xt: Vec2, vt: Vec2) -> f64 {
        let y = match self.perturbation {
            Perturbation::Particle => xt,
            Perturbation::GuidingCenter => [xt[0] + vt[1], xt[1] - vt[0]],
        };
        let pert: f64 = self
            .modes
            .iter()
            .map(|m| (m[0] as f64 * y[0] + m[1] as f64 * y[1]).cos())
            .sum();
        self.density / TAU * (-0.5 * (vt[0] * vt[0] + vt[1] * vt[1])).exp() * (1.0 + self.delta * pert)
    }
}

/// Evaluates a Cartesian density at gyro coordinates.
pub fn cart_at_gyro<F: Fn(Vec2, Vec2) -> f64>(f0: &F, x1: f64, x2: f64, k: f64, alpha: f64) -> f64 {
    let c = gyro_to_cart(GyroState { x: [x1, x2], k, alpha, degenerate: false })
        .expect("grid energies are non-negative");
    f0(c.x_tilde, c.v_tilde)
}

/// Fraction of `int |f0|` beyond `k_max`, estimated on `[k_max, 3 k_max]`.
pub fn truncated_mass_ratio<F: Fn(Vec2, Vec2) -> f64 + Sync + Send>(f0: &F, grid: &GyroGrid) -> f64 {
    let shell = |k: f64| -> f64 {
        let mut s = 0.0;
        for i1 in 0..grid.n_x1 {
            for i2 in 0..grid.n_x2 {
                for a in 0..grid.n_alpha {
                    s += cart_at_gyro(f0, grid.x1(i1), grid.x2(i2), k, grid.alpha(a)).abs();
                }
            }
        }
        s
    };
    let inside: f64 = par::map_range(grid.n_k, |j| grid.k_weight(j) * shell(grid.k(j))).iter().sum();
    let nt = 64;
    let dk = 2.0 * grid.k_max / nt as f64;
    let tail: f64 = par::map_range(nt, |j| dk * shell(grid.k_max + (j as f64 + 0.5) * dk))
        .iter()
        .sum();
    if inside + tail == 0.0 {
        0.0
    } else {
        tail / (inside + tail)
    }
}

pub fn check_cutoff<F: Fn(Vec2, Vec2) -> f64 + Sync + Send>(f0: &F, grid: &GyroGrid) -> Result<()> {
    let ratio = truncated_mass_ratio(f0, grid);
    if ratio > CUTOFF_LIMIT {
        Err(Error::Cutoff { ratio, limit: CUTOFF_LIMIT })
    } else {
        Ok(())
    }
}

/// Tabulates `f0` on the grid through the gyro-to-Cartesian map (no cutoff check).
pub fn tabulate<F: Fn(Vec2, Vec2) -> f64 + Sync + Send>(f0: &F, grid: GyroGrid) -> GyroDistribution {
    GyroDistribution::from_fn(grid, |x1, x2, k, a| cart_at_gyro(f0, x1, x2, k, a))
}
