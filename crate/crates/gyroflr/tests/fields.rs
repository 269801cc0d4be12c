use gyroflr::fields::*;
use gyroflr::geometry::{deposit_offset, GyroGrid};
use gyroflr::initial::{self, InitialDatum, Perturbation};
use gyroflr::spectral::Interp;
use gyroflr::Error;
use std::f64::consts::TAU;

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn nodes(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| i as f64 * TAU / n as f64)
}

#[test]
fn zero_distribution_deposits_nothing() {
    let grid = GyroGrid::new(8, 8, 4, 4.0, 8).unwrap();
    let rho = deposit_charge(&GyroDistribution::zeros(grid), Interp::Spectral);
    assert!(rho.iter().all(|r| *r == 0.0));
}

#[test]
fn x_independent_distribution_deposits_its_velocity_integral() {
    let grid = GyroGrid::new(8, 6, 8, 6.0, 16).unwrap();
    let h = |k: f64, a: f64| (-k).exp() * (1.0 + 0.3 * a.cos());
    let f = GyroDistribution::from_fn(grid, |_, _, k, a| h(k, a));
    let mut expect = 0.0;
    for j in 0..grid.n_k {
        for a in 0..grid.n_alpha {
            expect += grid.k_weight(j) * grid.dalpha() * h(grid.k(j), grid.alpha(a));
        }
    }
    for interp in [Interp::Spectral, Interp::CubicSpline, Interp::Bilinear] {
        let rho = deposit_charge(&f, interp);
        assert!(rho.iter().all(|r| (r - expect).abs() < 1e-12), "{interp:?}");
    }
}

#[test]
fn deposit_matches_refined_quadrature() {
    // f = e^{-k} / 2pi (1 + 0.1 cos(x1 - sqrt(2k) sin alpha))
    let grid = GyroGrid::new(16, 16, 16, 20.0, 32).unwrap();
    let f_exact = |x1: f64, _x2: f64, k: f64, a: f64| (-k).exp() / TAU * (1.0 + 0.1 * (x1 - (2.0 * k).sqrt() * a.sin()).cos());
    let f = GyroDistribution::from_fn(grid, f_exact);
    let rho = deposit_charge(&f, Interp::Spectral);
    // brute force: pointwise evaluation at the shifted points, 10x finer in alpha
    let na = 10 * grid.n_alpha;
    for (i1, x1) in nodes(grid.n_x1).enumerate() {
        for (i2, x2) in nodes(grid.n_x2).enumerate().step_by(5) {
            let mut acc = 0.0;
            for j in 0..grid.n_k {
                let k = grid.k(j);
                for a in 0..na {
                    let al = a as f64 * TAU / na as f64;
                    let s = deposit_offset(k, al);
                    acc += grid.k_weight(j) * (TAU / na as f64) * f_exact(x1 + s[0], x2 + s[1], k, al);
                }
            }
            assert!((rho[i1 * grid.n_x2 + i2] - acc).abs() < 1e-6);
        }
    }
}

#[test]
fn poisson_single_mode() {
    let n = 64;
    let r: Vec<f64> = nodes(n).flat_map(|x1| nodes(n).map(move |_| x1.cos())).collect();
    let fld = solve_poisson(&r, &vec![0.0; n * n], n, n).unwrap();
    let phi: Vec<f64> = nodes(n).flat_map(|x1| nodes(n).map(move |_| x1.cos())).collect();
    let e1: Vec<f64> = nodes(n).flat_map(|x1| nodes(n).map(move |_| x1.sin())).collect();
    assert!(max_abs_diff(&fld.phi, &phi) < 1e-10);
    assert!(max_abs_diff(&fld.e1, &e1) < 1e-10);
    assert!(fld.e2.iter().all(|v| v.abs() < 1e-10));
}

#[test]
fn poisson_zero_source() {
    let n = 64;
    let fld = solve_poisson(&vec![1.0; n * n], &vec![1.0; n * n], n, n).unwrap();
    assert!(fld.phi.iter().chain(&fld.e1).chain(&fld.e2).all(|v| v.abs() < 1e-10));
}

#[test]
fn poisson_product_mode() {
    let n = 64;
    let r: Vec<f64> = nodes(n).flat_map(|x1| nodes(n).map(move |x2| x1.cos() * x2.cos())).collect();
    let fld = solve_poisson(&r, &vec![0.0; n * n], n, n).unwrap();
    let expect: Vec<f64> = r.iter().map(|v| 0.5 * v).collect();
    assert!(max_abs_diff(&fld.phi, &expect) < 1e-10);
    let e2: Vec<f64> = nodes(n).flat_map(|x1| nodes(n).map(move |x2| 0.5 * x1.cos() * x2.sin())).collect();
    assert!(max_abs_diff(&fld.e2, &e2) < 1e-10);
}

#[test]
fn poisson_zero_mean_gauge() {
    let n = 16;
    let r: Vec<f64> = nodes(n).flat_map(|x1| nodes(n).map(move |x2| (x1 + 2.0 * x2).sin() + 0.4 * (3.0 * x1).cos())).collect();
    let fld = solve_poisson(&r, &vec![0.0; n * n], n, n).unwrap();
    assert!(fld.phi.iter().sum::<f64>().abs() < 1e-12);
}

#[test]
fn incompatible_source_is_rejected() {
    let n = 8;
    let err = solve_poisson(&vec![1.0; n * n], &vec![0.5; n * n], n, n).unwrap_err();
    assert!(matches!(err, Error::Compatibility { .. }));
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn uniform_distribution_gives_zero_field() {
    let grid = GyroGrid::new(8, 8, 16, 20.0, 16).unwrap();
    let f = GyroDistribution::from_fn(grid, |_, _, k, _| (-k).exp() / TAU);
    let mean = deposit_charge(&f, Interp::Spectral)[0];
    let fld = self_consistent_field(&f, &uniform_background(8, 8, mean), Interp::Spectral).unwrap();
    assert!(fld.max_abs() < 1e-12);
}

#[test]
fn perturbed_maxwellian_field_amplitude() {
    let grid = GyroGrid::new(16, 16, 16, 20.0, 32).unwrap();
    let d = InitialDatum::maxwellian(0.1, Perturbation::Particle);
    let f = initial::tabulate(&|x, v| d.cart(x, v), grid);
    // hand quadrature of the velocity integral on the k nodes
    let m: f64 = (0..grid.n_k).map(|j| grid.k_weight(j) * (-grid.k(j)).exp()).sum();
    let fld = self_consistent_field(&f, &uniform_background(16, 16, m), Interp::Spectral).unwrap();
    for (i1, x1) in nodes(16).enumerate() {
        for i2 in 0..16 {
            let idx = i1 * 16 + i2;
            assert!((fld.e1[idx] - 0.1 * m * x1.sin()).abs() < 1e-6);
            assert!((fld.phi[idx] - 0.1 * m * x1.cos()).abs() < 1e-6);
            assert!(fld.e2[idx].abs() < 1e-6);
        }
    }
}

#[test]
fn field_is_linear_in_f_and_background() {
    let grid = GyroGrid::new(8, 8, 8, 10.0, 16).unwrap();
    let d = InitialDatum { modes: vec![[1, 0], [1, 2]], ..InitialDatum::maxwellian(0.2, Perturbation::Particle) };
    let mut f = initial::tabulate(&|x, v| d.cart(x, v), grid);
    let ne = uniform_background(8, 8, f.mass() / grid.torus_area());
    let e = self_consistent_field(&f, &ne, Interp::Spectral).unwrap();
    f.scale(2.0);
    let ne2: Vec<f64> = ne.iter().map(|v| 2.0 * v).collect();
    let e2 = self_consistent_field(&f, &ne2, Interp::Spectral).unwrap();
    let doubled: Vec<f64> = e.e1.iter().map(|v| 2.0 * v).collect();
    assert!(max_abs_diff(&e2.e1, &doubled) < 1e-12);
}

#[test]
fn field_is_curl_free() {
    // E = -grad phi: spectral curl vanishes
    let grid = GyroGrid::new(16, 16, 8, 10.0, 16).unwrap();
    let d = InitialDatum { modes: vec![[1, 1], [2, -1]], ..InitialDatum::maxwellian(0.2, Perturbation::Particle) };
    let f = initial::tabulate(&|x, v| d.cart(x, v), grid);
    let ne = uniform_background(16, 16, f.mass() / grid.torus_area());
    let e = self_consistent_field(&f, &ne, Interp::Spectral).unwrap();
    let [h1, h2] = e.e_hat();
    let mut worst: f64 = 0.0;
    for i1 in 0..16 {
        for i2 in 0..16 {
            let m1 = gyroflr::spectral::wavenumber(i1, 16);
            let m2 = gyroflr::spectral::wavenumber(i2, 16);
            let idx = i1 * 16 + i2;
            worst = worst.max((m1 * h2[idx] - m2 * h1[idx]).norm());
        }
    }
    assert!(worst < 1e-10);
}
