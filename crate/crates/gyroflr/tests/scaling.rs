use gyroflr::scaling::*;
use proptest::prelude::*;

fn params(e: f64, b: f64, m: f64, v: f64, ld: f64, l: f64) -> PhysicalParams {
    PhysicalParams { e, m_i: m, b_bar: b, v_bar: v, lambda_d: ld, l_parallel: l, n_bar: 1.0, epsilon_0: 1.0 }
}

#[test]
fn unit_gyrofrequency() {
    let d = derive_scales(&params(1.0, 2.0, 1.0, 1.0, 1.0, 10.0)).unwrap();
    assert_eq!(d.omega_i, 2.0);
}

#[test]
fn matched_debye_length_has_no_flr_flag() {
    // v = omega lambda_D
    let (e, b, m, ld) = (1.6e-19, 3.0, 1.67e-27, 1e-4);
    let omega = e * b / m;
    let d = derive_scales(&params(e, b, m, omega * ld, ld, 1.0)).unwrap();
    assert!((d.r_l / ld - 1.0).abs() < 1e-12);
    assert!(d.consistency_flags.flr_ordering < 1e-12);
}

#[test]
fn long_parallel_scale_sets_eps() {
    let base = params(1.0, 1.0, 1.0, 1.0, 1.0, 1.0);
    let r_l = derive_scales(&base).unwrap().r_l;
    let d = derive_scales(&PhysicalParams { l_parallel: 100.0 * r_l, ..base }).unwrap();
    assert!((d.eps - 0.01).abs() < 1e-15);
    assert!((d.t_bar * d.omega_i - 100.0).abs() < 1e-10);
    assert!((d.t_bar * d.omega_i * d.eps - 1.0).abs() < 1e-14);
}

#[test]
fn bad_inputs_are_rejected() {
    for bad in [0.0, -1.0, f64::NAN, f64::INFINITY] {
        assert!(derive_scales(&params(bad, 1.0, 1.0, 1.0, 1.0, 1.0)).is_err());
        assert!(derive_scales(&params(1.0, 1.0, 1.0, 1.0, 1.0, bad)).is_err());
    }
}

proptest! {
    #[test]
    fn time_scale_identity(e in 0.1..10.0f64, b in 0.1..10.0f64, m in 0.1..10.0f64, v in 0.1..10.0f64, l in 1.0..1e3f64) {
        let d = derive_scales(&params(e, b, m, v, 1.0, l)).unwrap();
        prop_assert!((d.t_bar * d.omega_i * d.eps - 1.0).abs() < 1e-12);
        prop_assert!((d.eps * l - d.r_l).abs() < 1e-12 * d.r_l);
    }
}
