use gyroflr::analysis::*;
use gyroflr::fields::{self, Field2D, GyroDistribution};
use gyroflr::geometry::GyroGrid;
use gyroflr::initial::{self, InitialDatum, Perturbation};
use gyroflr::vlasov_eps::{self, ParticleEnsemble, SolverOptions, Uniform};
use std::f64::consts::TAU;

fn wavy(grid: GyroGrid) -> GyroDistribution {
    GyroDistribution::from_fn(grid, |x1, x2, k, a| (-k).exp() * (1.0 + 0.3 * (x1 - a).cos() + 0.2 * (x2 + 2.0 * a).sin()))
}

#[test]
fn filter_identities() {
    let grid = GyroGrid::new(8, 8, 4, 8.0, 16).unwrap();
    let f = wavy(grid);
    assert_eq!(filter_distribution(&f, 0.0, 0.1), f);
    assert_eq!(filter_distribution(&f, 3.0 * TAU * 0.1, 0.1), f);
}

#[test]
fn filter_undoes_grid_aligned_gyration() {
    let grid = GyroGrid::new(8, 8, 4, 8.0, 16).unwrap();
    let f = wavy(grid);
    let (eps, t) = (0.05, 5.0 * grid.dalpha() * 0.05);
    let g = vlasov_eps::step_alpha_shift(&f, t, eps);
    assert_ne!(g, f);
    assert_eq!(filter_distribution(&g, t, eps).values, f.values);
}

#[test]
fn pairing_with_one_is_mass() {
    let grid = GyroGrid::new(8, 8, 8, 10.0, 8).unwrap();
    let f = wavy(grid);
    let one = TestFunction { m1: 0, m2: 0, m_alpha: 0, m_tau: 0, width: f64::INFINITY };
    assert!((weak_pairing(&f, &one, 0.37, 0.1) - f.mass()).abs() < 1e-12 * f.mass());
    assert_eq!(weak_pairing(&GyroDistribution::zeros(grid), &one, 0.0, 0.1), 0.0);
}

#[test]
fn pairing_orthogonality() {
    let grid = GyroGrid::new(8, 8, 8, 10.0, 16).unwrap();
    let f = GyroDistribution::from_fn(grid, |x1, x2, _, a| (x1 + 2.0 * x2 - a).cos());
    let kq: f64 = (0..8).map(|j| grid.k_weight(j) * (-0.5 * grid.k(j).powi(2)).exp()).sum();
    for m1 in -2..=2 {
        for m2 in -2..=2 {
            for ma in -2..=2 {
                let psi = TestFunction { m1, m2, m_alpha: ma, m_tau: 0, width: 1.0 };
                let got = weak_pairing(&f, &psi, 0.0, 1.0);
                // int cos(a) cos(b) = (2pi)^3 / 2 when the modes match up to sign
                let matched = (m1, m2, ma) == (1, 2, -1) || (m1, m2, ma) == (-1, -2, 1);
                let expect = if matched { 0.5 * TAU.powi(3) * kq } else { 0.0 };
                assert!((got - expect).abs() < 1e-10, "{m1} {m2} {ma}: {got}");
            }
        }
    }
}

#[test]
fn fast_pairings_match_direct_quadrature() {
    let grid = GyroGrid::new(8, 8, 8, 10.0, 16).unwrap();
    let f = wavy(grid);
    let bank = TestFunctionBank::default();
    let (t, eps) = (0.3, 0.07);
    let tau = (t / eps as f64).rem_euclid(TAU);
    let fast = pairings(&f, &bank, tau);
    for (i, psi) in bank.functions.iter().enumerate().step_by(17) {
        assert!((fast[i] - weak_pairing(&f, psi, t, eps)).abs() < 1e-10);
    }
}

#[test]
fn predicted_pairings_of_rotated_state() {
    // F(alpha, tau) = G(alpha + tau): pairing of 2pi G(. + tau) equals the prediction
    let grid = GyroGrid::new(8, 8, 8, 10.0, 16).unwrap();
    let big = wavy(grid);
    let bank = TestFunctionBank::default();
    let tau = 4.0 * grid.dalpha();
    let mut rotated = vlasov_eps::step_alpha_shift(&big, tau, 1.0);
    rotated.scale(TAU);
    let got = pairings(&rotated, &bank, tau);
    let want = predicted_pairings(&big, &bank, tau);
    for (a, b) in got.iter().zip(&want) {
        assert!((a - b).abs() < 1e-10);
    }
}

fn markers(eps: f64) -> ParticleEnsemble {
    default_markers(eps)
}

fn drift(eps: f64, e: [f64; 2]) -> f64 {
    let mut p = markers(eps);
    let dt = TAU * eps / 32.0;
    let steps = (1.0 / dt).round() as usize;
    let mut traj = vec![p.clone()];
    for _ in 0..steps {
        p = vlasov_eps::push_particles_with(&p, &Uniform(e), dt);
        traj.push(p.clone());
    }
    adiabatic_drift(&traj).max
}

#[test]
fn zero_field_has_no_drift() {
    assert!(drift(0.1, [0.0, 0.0]) < 1e-14);
}

#[test]
fn constant_field_drift_scales_with_eps() {
    let ratio = drift(0.1, [0.3, -0.2]) / drift(0.05, [0.3, -0.2]);
    assert!((1.3..=3.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn static_self_consistent_field_drift_is_order_eps() {
    let grid = GyroGrid::new(16, 16, 16, 20.0, 16).unwrap();
    let d = InitialDatum::maxwellian(0.1, Perturbation::Particle);
    let f = initial::tabulate(&|x, v| d.cart(x, v), grid);
    let ne = fields::uniform_background(16, 16, f.mass() / grid.torus_area());
    let field: Field2D = fields::self_consistent_field(&f, &ne, Default::default()).unwrap();
    let eps = 0.1;
    let mut p = markers(eps);
    let dt = TAU * eps / 32.0;
    let mut traj = vec![p.clone()];
    for _ in 0..(1.0 / dt).round() as usize {
        p = vlasov_eps::push_particles_cartesian(&p, &field, dt);
        traj.push(p.clone());
    }
    let c = adiabatic_drift(&traj).max / eps;
    eprintln!("static single-mode field: drift <= {c:.3} eps");
    assert!(c > 0.0 && c < 5.0);
}

#[test]
fn static_run_conserves_everything() {
    let rows: Vec<DiagnosticsRow> = (0..5)
        .map(|i| DiagnosticsRow { time: i as f64, mass: 2.0, l2_norm: 1.0, lp_norm: 1.5, field_energy: 0.0, min_f: 0.1, kslice_mass_drift_max: 0.0 })
        .collect();
    let r = conservation_report(&rows);
    assert_eq!((r.mass_drift, r.l2_drift, r.lp_drift, r.field_energy_drift), (0.0, 0.0, 0.0, 0.0));
    assert_eq!(r.samples, 5);
}

// guiding-center datum: smooth in k at the polar axis, so refinement converges cleanly
fn eps_run_l2_drift(n: usize, nk: usize, na: usize) -> f64 {
    let grid = GyroGrid::new(n, n, nk, 20.0, na).unwrap();
    let d = InitialDatum::maxwellian(0.1, Perturbation::GuidingCenter);
    let f = vlasov_eps::init_from_cartesian(|x, v| d.cart(x, v), grid).unwrap();
    let l0 = f.l2_norm();
    let ne = fields::uniform_background(n, n, f.mass() / grid.torus_area());
    let mut s = vlasov_eps::EpsSolverState::new(f, ne, 0.1, 0.05, SolverOptions::default()).unwrap();
    for _ in 0..10 {
        s = vlasov_eps::step_strang(s).unwrap();
    }
    ((s.f.l2_norm() - l0) / l0).abs()
}

#[test]
fn resolution_reduces_l2_drift() {
    let coarse = eps_run_l2_drift(8, 32, 32);
    let fine = eps_run_l2_drift(16, 64, 64);
    assert!(coarse >= 2.0 * fine, "{coarse:e} {fine:e}");
}

fn small_sweep(delta: f64, eps: &[f64]) -> SweepReport {
    let grid = GyroGrid::new(16, 16, 16, 20.0, 16).unwrap();
    let datum = InitialDatum::maxwellian(delta, Perturbation::GuidingCenter);
    let f = initial::tabulate(&|x, v| datum.cart(x, v), grid);
    let cfg = SweepConfig {
        grid,
        datum,
        datum_scale: grid.torus_area() / f.mass(),
        n_e: vec![1.0; 256],
        t_final: 0.5,
        dt_limit: 0.05,
        gyro_steps: 8,
        opts: SolverOptions::default(),
    };
    convergence_sweep(&cfg, eps).unwrap()
}

#[test]
fn static_datum_has_no_errors() {
    let r = small_sweep(0.0, &[0.2, 0.1]);
    for row in &r.rows {
        assert!(row.filtered_l2 < 1e-10 && row.density_l2 < 1e-10 && row.pairing_max < 1e-10, "{row:?}");
        assert!(row.drift_max < 1e-12);
    }
}

#[test]
fn two_point_sweep_decreases() {
    let r = small_sweep(0.1, &[0.1, 0.2]);
    assert_eq!(r.eps_values, vec![0.2, 0.1]);
    assert!(r.strictly_decreasing(|r| r.filtered_l2));
    assert!(r.strictly_decreasing(|r| r.density_l2));
    assert!(r.strictly_decreasing(|r| r.pairing_max));
    assert!(r.slopes.filtered_l2 > 0.0);
}
