use num_complex::Complex64;

use crate::fft::FftEngine;
use crate::field::{ScalarField, SpectralField};
use crate::grid::WaveGrid;

/// Symmetric index pairs of the stress tensor u_i u_j.
pub const STRESS_PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

#[inline]
fn stress_slot(i: usize, j: usize) -> usize {
    // symmetric 3x3 -> packed upper triangle
    const MAP: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];
    MAP[i][j]
}

/// Dealiased spectral stress tensor (u_i u_j)^ for a band-limited field.
///
/// The pointwise product on the collocation grid aliases only onto modes
/// outside the 2/3 band, so after the mask the coefficients inside the band
/// are the exact convolution.
pub fn stress_hat(u: &SpectralField, eng: &mut FftEngine) -> Vec<Vec<Complex64>> {
    let phys = u.to_physical(eng);
    stress_from_physical(u.grid(), &phys, eng)
}

pub fn stress_from_physical(
    grid: WaveGrid,
    phys: &[Vec<f64>],
    eng: &mut FftEngine,
) -> Vec<Vec<Complex64>> {
    let mut out = Vec::with_capacity(6);
    for (i, j) in STRESS_PAIRS {
        let mut prod: Vec<Complex64> = phys[i]
            .iter()
            .zip(&phys[j])
            .map(|(a, b)| Complex64::new(a * b, 0.0))
            .collect();
        eng.forward(&mut prod);
        for flat in 0..grid.len() {
            if !grid.in_band(flat) {
                prod[flat] = Complex64::default();
            }
        }
        out.push(prod);
    }
    out
}

/// Advection term and the largest pointwise speed, sharing one transform
/// of the velocity.
pub fn advection_and_max_speed(u: &SpectralField, eng: &mut FftEngine) -> (SpectralField, f64) {
    let grid = u.grid();
    let phys = u.to_physical(eng);
    let mut max_sq = 0.0_f64;
    for idx in 0..grid.len() {
        let s: f64 = phys.iter().map(|c| c[idx] * c[idx]).sum();
        max_sq = max_sq.max(s);
    }
    let stress = stress_from_physical(grid, &phys, eng);
    let mut b = stress_divergence(grid, &stress);
    b.leray_project();
    (b, max_sq.sqrt())
}

/// Divergence of the stress tensor: (Div w)_i(k) = i k_j w_ij(k).
pub fn stress_divergence(grid: WaveGrid, stress: &[Vec<Complex64>]) -> SpectralField {
    let mut out = SpectralField::zeros(grid);
    for flat in 0..grid.len() {
        let k = grid.wavevector(flat);
        for i in 0..3 {
            let mut s = Complex64::default();
            for j in 0..3 {
                s += Complex64::new(0.0, k[j] as f64) * stress[stress_slot(i, j)][flat];
            }
            out.comp_mut(i)[flat] = s;
        }
    }
    out
}

/// Projected advection term B(u) = P Div(u x u), 2/3-rule dealiased.
///
/// This is the term subtracted in the momentum equation; it is orthogonal
/// to u itself.
pub fn nonlinear_term(u: &SpectralField, eng: &mut FftEngine) -> SpectralField {
    let stress = stress_hat(u, eng);
    let mut b = stress_divergence(u.grid(), &stress);
    b.leray_project();
    b
}

/// Pressure from the mode-wise trace: p(k) = -(k x k : w(k)) / |k|^2, zero
/// mean, using the same dealiased stress as the advection term.
pub fn pressure_recover(u: &SpectralField, eng: &mut FftEngine) -> ScalarField {
    let stress = stress_hat(u, eng);
    pressure_from_stress(u.grid(), &stress)
}

pub fn pressure_from_stress(grid: WaveGrid, stress: &[Vec<Complex64>]) -> ScalarField {
    let mut p = ScalarField::zeros(grid);
    for flat in 0..grid.len() {
        let k = grid.wavevector(flat);
        let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        if k2 == 0.0 {
            continue;
        }
        let mut q = Complex64::default();
        for i in 0..3 {
            for j in 0..3 {
                q += (k[i] * k[j]) as f64 * stress[stress_slot(i, j)][flat];
            }
        }
        p.coeffs_mut()[flat] = -q / k2;
    }
    p
}

/// Integrability monitors for a velocity/pressure snapshot.
#[derive(Debug, Clone)]
pub struct AssumptionMonitors {
    /// integral of |u|^3 over the box
    pub u_l3_cubed: f64,
    /// integral of |p|^(3/2) over the box
    pub p_l32: f64,
    /// (probe shift, integral of |u(x+h) - u(x)|^3) pairs
    pub increment_l3_cubed: Vec<([f64; 3], f64)>,
}

pub fn assumption_monitors(
    u: &SpectralField,
    p: &ScalarField,
    probes: &[[f64; 3]],
    eng: &mut FftEngine,
) -> AssumptionMonitors {
    let grid = u.grid();
    let cell = grid.cell_volume();
    let phys = u.to_physical(eng);

    let mut u_l3 = 0.0;
    for idx in 0..grid.len() {
        let m2: f64 = phys.iter().map(|c| c[idx] * c[idx]).sum();
        u_l3 += m2.powf(1.5);
    }
    u_l3 *= cell;

    let p_phys = p.to_physical(eng);
    let p_l32 = p_phys.iter().map(|v| v.abs().powf(1.5)).sum::<f64>() * cell;

    let mut increments = Vec::with_capacity(probes.len());
    for &h in probes {
        let mut shifted = u.clone();
        shifted.shift(h);
        let sh = shifted.to_physical(eng);
        let mut s = 0.0;
        for idx in 0..grid.len() {
            let m2: f64 = (0..phys.len())
                .map(|c| {
                    let d = sh[c][idx] - phys[c][idx];
                    d * d
                })
                .sum();
            s += m2.powf(1.5);
        }
        increments.push((h, s * cell));
    }

    AssumptionMonitors {
        u_l3_cubed: u_l3,
        p_l32,
        increment_l3_cubed: increments,
    }
}
