//! Strongly magnetized 2D Vlasov-Poisson in canonical gyrokinetic coordinates.
//!
//! The crate carries three solvers on a shared phase-space grid `(x1, x2, k, alpha)`:
//!
//! * [`vlasov_eps`]: the singularly perturbed model at finite `eps`, with the stiff
//!   gyration integrated exactly as a shift in `alpha`;
//! * [`flr_limit`]: the two-scale limit model for `G(x, k, alpha, t)` with fields
//!   resolved in the fast time `tau`, and the finite Larmor radius model for
//!   `g(x, k, t)` driven by the gyroaveraged field;
//! * a Cartesian particle pusher used as an independent oracle.
//!
//! [`analysis`] compares them (filtering, weak pairings, eps sweeps, adiabatic drift),
//! [`scaling`] turns physical parameters into characteristic scales, and [`runner`]
//! handles configuration and artifacts.
//!
//! The spatial domain is the periodic torus `[0, 2pi)^2`. The electrostatic potential
//! uses the zero-mean gauge.

pub mod analysis;
pub mod error;
pub mod fields;
pub mod flr_limit;
pub mod geometry;
pub mod gyroaverage;
pub mod initial;
pub mod par;
pub mod runner;
pub mod scaling;
pub mod sl;
pub mod spectral;
pub mod vlasov_eps;

pub use error::{Error, Result};
pub use fields::{Field2D, GyroDistribution};
pub use geometry::{CartState, GyroGrid, GyroState};

/// Version string written into run metadata.
pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));
