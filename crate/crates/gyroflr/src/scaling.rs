//! Characteristic scales of the strongly magnetized ion plasma and the small parameter `eps`.
//!
//! The ordering assumed by the model is `r_L = lambda_D` and `E e / (v m_i omega_i) = eps`.
//! Departures from it are reported as residuals rather than rejected.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// SI inputs (any consistent unit system works).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub e: f64,
    pub m_i: f64,
    pub b_bar: f64,
    pub v_bar: f64,
    pub lambda_d: f64,
    pub l_parallel: f64,
    pub n_bar: f64,
    pub epsilon_0: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyFlags {
    /// `|r_L / lambda_D - 1|`
    pub flr_ordering: f64,
    /// `|E e / (v m_i omega_i) - eps|`
    pub electric_ordering: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedScales {
    pub omega_i: f64,
    pub r_l: f64,
    pub eps: f64,
    pub t_bar: f64,
    pub e_bar: f64,
    pub phi_bar: f64,
    pub f_bar: f64,
    pub consistency_flags: ConsistencyFlags,
}

pub fn derive_scales(p: &PhysicalParams) -> Result<DerivedScales> {
    for (name, v) in [
        ("e", p.e),
        ("m_i", p.m_i),
        ("B_bar", p.b_bar),
        ("v_bar", p.v_bar),
        ("lambda_D", p.lambda_d),
        ("L_parallel", p.l_parallel),
        ("n_bar", p.n_bar),
        ("epsilon_0", p.epsilon_0),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
        }
    }
    let omega_i = p.e * p.b_bar / p.m_i;
    let r_l = p.v_bar / omega_i;
    let eps = r_l / p.l_parallel;
    let t_bar = 1.0 / (eps * omega_i);
    let e_bar = p.lambda_d * p.e * p.n_bar / p.epsilon_0;
    let phi_bar = p.lambda_d * p.lambda_d * p.e * p.n_bar / p.epsilon_0;
    let f_bar = p.n_bar / p.v_bar.powi(3);
    let electric = e_bar * p.e / (p.v_bar * p.m_i * omega_i);
    Ok(DerivedScales {
        omega_i,
        r_l,
        eps,
        t_bar,
        e_bar,
        phi_bar,
        f_bar,
        consistency_flags: ConsistencyFlags {
            flr_ordering: (r_l / p.lambda_d - 1.0).abs(),
            electric_ordering: (electric - eps).abs(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> PhysicalParams {
        PhysicalParams {
            e: 1.0,
            m_i: 1.0,
            b_bar: 2.0,
            v_bar: 1.0,
            lambda_d: 0.5,
            l_parallel: 50.0,
            n_bar: 1.0,
            epsilon_0: 1.0,
        }
    }

    #[test]
    fn gyrofrequency_and_ordering() {
        let d = derive_scales(&unit()).unwrap();
        assert_eq!(d.omega_i, 2.0);
        // v = omega * lambda_D makes r_L = lambda_D
        assert_eq!(d.consistency_flags.flr_ordering, 0.0);
        assert!((d.eps - 0.01).abs() < 1e-15);
        assert!((d.t_bar * d.omega_i - 100.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_non_positive() {
        let mut p = unit();
        p.n_bar = 0.0;
        assert!(matches!(derive_scales(&p), Err(Error::Domain(_))));
    }
}
