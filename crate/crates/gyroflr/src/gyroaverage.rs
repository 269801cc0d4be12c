//! Gyroaverages over Larmor circles and the two-scale bracket.
//!
//! Two normalizations coexist. The gyroaverage `<E>(x, k) = (1/2pi) int E(x + r(k, a)) da`
//! carries `1/2pi`. The bracket `<u>(alpha) = int_0^{2pi} u(alpha - tau, tau) dtau` does not.
//! [`GyroField::norm`] records which one produced a given field.
//!
//! Off-grid field values always come from the trigonometric interpolant, so the
//! uniform-angle quadratures below are exact quadratures of that interpolant and are
//! carried out as Fourier multipliers.

use crate::error::{Error, Result};
use crate::fields::Field2D;
use crate::geometry::{larmor_offset, GyroGrid};
use crate::par;
use crate::spectral::{self, shift_factor};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Default number of angle nodes in the gyroaverage quadrature.
pub const DEFAULT_N_QUAD: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Circle average, `(1/2pi) int ... dalpha`.
    Average,
    /// Raw bracket, `int_0^{2pi} ... dtau`.
    RawBracket,
}

/// Gyroaveraged fields on `(x1, x2, k[, alpha])`, row-major with the last axis fastest.
/// `n_alpha == 1` when there is no angle dependence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GyroField {
    pub n_x1: usize,
    pub n_x2: usize,
    pub n_k: usize,
    pub n_alpha: usize,
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
    pub f_k: Option<Vec<f64>>,
    pub f_alpha: Option<Vec<f64>>,
    pub norm: Normalization,
}

impl GyroField {
    #[inline]
    pub fn index(&self, i1: usize, i2: usize, j: usize, a: usize) -> usize {
        ((i1 * self.n_x2 + i2) * self.n_k + j) * self.n_alpha + a
    }
}

/// Product of per-axis spectral shift factors for a displacement `d`.
#[inline]
fn phase_into(out: &mut [C], n1: usize, n2: usize, d: [f64; 2], scale: C) {
    let f2: Vec<C> = (0..n2).map(|i| shift_factor(i, n2, d[1])).collect();
    for i1 in 0..n1 {
        let a = shift_factor(i1, n1, d[0]) * scale;
        let row = &mut out[i1 * n2..(i1 + 1) * n2];
        for (o, b) in row.iter_mut().zip(&f2) {
            *o += a * b;
        }
    }
}

/// Fourier multiplier of the circle average at energy `k`, sampled at `n_quad` angles,
/// evaluated at points displaced by `offset`.
pub fn gyro_multiplier(n1: usize, n2: usize, k: f64, n_quad: usize, offset: [f64; 2]) -> Vec<C> {
    let mut out = vec![C::new(0.0, 0.0); n1 * n2];
    let w = C::new(1.0 / n_quad as f64, 0.0);
    for q in 0..n_quad {
        let r = larmor_offset(k, TAU * q as f64 / n_quad as f64);
        phase_into(&mut out, n1, n2, [r[0] + offset[0], r[1] + offset[1]], w);
    }
    out
}

/// Circle averages of a field given by its Fourier coefficients, at each of `ks`.
/// Output shape `[n1, n2, ks.len()]`.
pub fn gyro_average_hat(hat: &[C], n1: usize, n2: usize, ks: &[f64], n_quad: usize, offset: [f64; 2]) -> Vec<f64> {
    let nk = ks.len();
    let mults = par::map_range(nk, |j| gyro_multiplier(n1, n2, ks[j], n_quad, offset));
    let mut c = vec![C::new(0.0, 0.0); n1 * n2 * nk];
    for (m, chunk) in c.chunks_mut(nk).enumerate() {
        for (j, z) in chunk.iter_mut().enumerate() {
            *z = hat[m] * mults[j][m];
        }
    }
    spectral::fft_xy(&mut c, n1, n2, true);
    spectral::real_part(&c)
}

/// `<E>(x, k) = (1/2pi) int E(x1 - sqrt(2k) sin a, x2 + sqrt(2k) cos a) da` at every `(x, k)` node.
pub fn gyro_average_field(field: &Field2D, grid: &GyroGrid, n_quad: usize) -> Result<GyroField> {
    if n_quad < 4 {
        return Err(Error::config("n_quad", format!("must be at least 4, got {n_quad}")));
    }
    let [h1, h2] = field.e_hat();
    let ks = grid.k_nodes();
    let (n1, n2) = (field.n_x1, field.n_x2);
    Ok(GyroField {
        n_x1: n1,
        n_x2: n2,
        n_k: ks.len(),
        n_alpha: 1,
        e1: gyro_average_hat(&h1, n1, n2, &ks, n_quad, [0.0, 0.0]),
        e2: gyro_average_hat(&h2, n1, n2, &ks, n_quad, [0.0, 0.0]),
        f_k: None,
        f_alpha: None,
        norm: Normalization::Average,
    })
}

/// Direct quadrature at one point: averages the interpolated field over `n_quad` angles.
pub fn gyro_average_at(field: &Field2D, x: [f64; 2], k: f64, n_quad: usize) -> [f64; 2] {
    let s = field.sampler();
    let mut acc = [0.0; 2];
    for q in 0..n_quad {
        let r = larmor_offset(k, TAU * q as f64 / n_quad as f64);
        let e = s.eval([x[0] + r[0], x[1] + r[1]]);
        acc[0] += e[0];
        acc[1] += e[1];
    }
    [acc[0] / n_quad as f64, acc[1] / n_quad as f64]
}

/// Bracket of a tabulated function. `u` is laid out `[point][alpha][tau]` with
/// `n_alpha` uniform angles and `n_tau` uniform fast times on `[0, 2pi)`.
/// Returns `[point][alpha]` with `sum_j dtau u(alpha - tau_j, tau_j)`, the shifted angle
/// taken from the trigonometric interpolant (exact index rotation when aligned).
pub fn bracket(u: &[f64], n_points: usize, n_alpha: usize, n_tau: usize) -> Vec<f64> {
    assert_eq!(u.len(), n_points * n_alpha * n_tau);
    let dtau = TAU / n_tau as f64;
    let mut out = vec![0.0; n_points * n_alpha];
    let mut col = vec![0.0; n_points * n_alpha];
    for j in 0..n_tau {
        for p in 0..n_points {
            for a in 0..n_alpha {
                col[p * n_alpha + a] = u[(p * n_alpha + a) * n_tau + j];
            }
        }
        spectral::shift_axis(&mut col, [n_points, n_alpha, 1, 1], 1, -(j as f64) * dtau, spectral::Interp::Spectral);
        for (o, c) in out.iter_mut().zip(&col) {
            *o += dtau * c;
        }
    }
    out
}

/// One output slice of [`eval_shifted`]: evaluate `c[0] E1 + c[1] E2` at `x + shift`.
#[derive(Clone, Copy, Debug)]
pub struct ShiftedSlice {
    pub shift: [f64; 2],
    pub c: [f64; 2],
}

/// Evaluates linear combinations of the interpolated field at shifted copies of the grid.
/// Output shape `[n1, n2, slices.len()]`.
pub fn eval_shifted(h1: &[C], h2: &[C], n1: usize, n2: usize, slices: &[ShiftedSlice]) -> Vec<f64> {
    let ns = slices.len();
    let f1: Vec<Vec<C>> = slices
        .iter()
        .map(|s| (0..n1).map(|i| shift_factor(i, n1, s.shift[0])).collect())
        .collect();
    let f2: Vec<Vec<C>> = slices
        .iter()
        .map(|s| (0..n2).map(|i| shift_factor(i, n2, s.shift[1])).collect())
        .collect();
    let mut c = vec![C::new(0.0, 0.0); n1 * n2 * ns];
    par::for_each_chunk_mut(&mut c, n2 * ns, |i1, block| {
        for i2 in 0..n2 {
            let m = i1 * n2 + i2;
            let row = &mut block[i2 * ns..(i2 + 1) * ns];
            for (s, z) in row.iter_mut().enumerate() {
                let sl = &slices[s];
                let v = h1[m] * sl.c[0] + h2[m] * sl.c[1];
                *z = v * f1[s][i1] * f2[s][i2];
            }
        }
    });
    spectral::fft_xy(&mut c, n1, n2, true);
    spectral::real_part(&c)
}

/// Quantity carried through the bracket.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    E1,
    E2,
    /// `sqrt(2k) (E1 cos a + E2 sin a)`
    Fk,
    /// `(E2 cos a - E1 sin a) / sqrt(2k)`
    Falpha,
}

impl Component {
    fn coeffs(self, k: f64, th: f64) -> (f64, f64) {
        let (s, c) = th.sin_cos();
        let rho = (2.0 * k).sqrt();
        match self {
            Component::E1 => (1.0, 0.0),
            Component::E2 => (0.0, 1.0),
            Component::Fk => (rho * c, rho * s),
            Component::Falpha => (-s / rho, c / rho),
        }
    }
}

/// Bracket of one component for the tau family `ehats` (one `[E1hat, E2hat]` per tau node),
/// evaluated at energies `ks`, angles `alpha_a + alpha_offset` and positions `x + x_offset`.
/// Requires as many tau nodes as angle nodes. Output shape `[n1, n2, ks.len(), n_alpha]`.
pub fn bracket_component(
    ehats: &[[Vec<C>; 2]],
    n1: usize,
    n2: usize,
    n_alpha: usize,
    comp: Component,
    ks: &[f64],
    alpha_offset: f64,
    x_offset: [f64; 2],
) -> Result<Vec<f64>> {
    let n_tau = ehats.len();
    if n_tau != n_alpha {
        return Err(Error::config(
            "n_tau",
            format!("must equal n_alpha ({n_alpha}) for node-aligned shifts, got {n_tau}"),
        ));
    }
    if comp == Component::Falpha && ks.iter().any(|&k| k <= 0.0) {
        return Err(Error::Singularity("the angular force F_alpha"));
    }
    let nm = n1 * n2;
    let nk = ks.len();
    let dal = TAU / n_alpha as f64;
    let dtau = TAU / n_tau as f64;
    let uses = |k, th| comp.coeffs(k, th);
    // kernel tables: [k][d][m] for the two field components
    let tables: Vec<(Vec<C>, Vec<C>)> = par::map_range(nk * n_alpha, |kd| {
        let (j, d) = (kd / n_alpha, kd % n_alpha);
        let th = d as f64 * dal + alpha_offset;
        let (c1, c2) = uses(ks[j], th);
        let r = larmor_offset(ks[j], th);
        let mut p = vec![C::new(0.0, 0.0); nm];
        phase_into(&mut p, n1, n2, [r[0] + x_offset[0], r[1] + x_offset[1]], C::new(1.0, 0.0));
        (p.iter().map(|z| z * c1).collect(), p.iter().map(|z| z * c2).collect())
    });
    let need1 = !matches!(comp, Component::E2);
    let need2 = !matches!(comp, Component::E1);
    let mut slices = vec![C::new(0.0, 0.0); nk * n_alpha * nm];
    par::for_each_chunk_mut(&mut slices, nm, |ka, out| {
        let (j, a) = (ka / n_alpha, ka % n_alpha);
        for (t, eh) in ehats.iter().enumerate() {
            let d = (a + n_alpha - t) % n_alpha;
            let (k1, k2) = &tables[j * n_alpha + d];
            if need1 {
                for ((o, e), kk) in out.iter_mut().zip(&eh[0]).zip(k1) {
                    *o += e * kk;
                }
            }
            if need2 {
                for ((o, e), kk) in out.iter_mut().zip(&eh[1]).zip(k2) {
                    *o += e * kk;
                }
            }
        }
        for o in out.iter_mut() {
            *o *= dtau;
        }
    });
    let ns = nk * n_alpha;
    let mut c = vec![C::new(0.0, 0.0); nm * ns];
    par::for_each_chunk_mut(&mut c, ns, |m, row| {
        for (s, z) in row.iter_mut().enumerate() {
            *z = slices[s * nm + m];
        }
    });
    spectral::fft_xy(&mut c, n1, n2, true);
    Ok(spectral::real_part(&c))
}

/// Brackets `<E1>, <E2>, <F_k>, <F_alpha>` of a tau family of fields at every grid node.
pub fn bracket_forces(e_tau: &[Field2D], grid: &GyroGrid) -> Result<GyroField> {
    if !grid.k_offset {
        return Err(Error::Singularity("the angular force F_alpha"));
    }
    let ehats: Vec<[Vec<C>; 2]> = e_tau.iter().map(|f| f.e_hat()).collect();
    let ks = grid.k_nodes();
    let (n1, n2, na) = (grid.n_x1, grid.n_x2, grid.n_alpha);
    let ev = |c| bracket_component(&ehats, n1, n2, na, c, &ks, 0.0, [0.0, 0.0]);
    Ok(GyroField {
        n_x1: n1,
        n_x2: n2,
        n_k: grid.n_k,
        n_alpha: na,
        e1: ev(Component::E1)?,
        e2: ev(Component::E2)?,
        f_k: Some(ev(Component::Fk)?),
        f_alpha: Some(ev(Component::Falpha)?),
        norm: Normalization::RawBracket,
    })
}

/// Spectral curl `d1 <E2> - d2 <E1>` of a k-resolved gyroaveraged field (`n_alpha == 1`).
pub fn curl_max(gf: &GyroField) -> f64 {
    let (n1, n2, nk) = (gf.n_x1, gf.n_x2, gf.n_k * gf.n_alpha);
    let mut a = spectral::to_complex(&gf.e2);
    let mut b = spectral::to_complex(&gf.e1);
    spectral::fft_xy(&mut a, n1, n2, false);
    spectral::fft_xy(&mut b, n1, n2, false);
    let mut c = vec![C::new(0.0, 0.0); a.len()];
    for i1 in 0..n1 {
        let m1 = if spectral::is_nyquist(i1, n1) { 0.0 } else { spectral::wavenumber(i1, n1) };
        for i2 in 0..n2 {
            let m2 = if spectral::is_nyquist(i2, n2) { 0.0 } else { spectral::wavenumber(i2, n2) };
            for s in 0..nk {
                let idx = (i1 * n2 + i2) * nk + s;
                c[idx] = C::new(0.0, 1.0) * (a[idx] * m1 - b[idx] * m2);
            }
        }
    }
    spectral::fft_xy(&mut c, n1, n2, true);
    c.iter().fold(0.0, |m, z| m.max(z.re.abs()))
}
