//! Distributional flux identity checked by central differences in the
//! offset variable.

use num_complex::Complex64;

use crate::cutoff::CutoffField;
use crate::fft::FftEngine;
use crate::field::SpectralField;
use crate::grid::WaveGrid;

use super::bands::next_smooth_size;
use super::channels::PAIRS;

/// Synthesizes simulation-grid spectra on a grid wide enough that sums of
/// cubic products are exact quadratures.
struct PadSynth {
    grid: WaveGrid,
    pad: WaveGrid,
    eng: FftEngine,
    spec: Vec<Complex64>,
    work: Vec<Complex64>,
}

impl PadSynth {
    fn new(grid: WaveGrid) -> Self {
        let pad = WaveGrid::new(3, next_smooth_size(2 * grid.n() + 1)).unwrap();
        let eng = FftEngine::new(pad);
        let spec = vec![Complex64::new(0.0, 0.0); pad.len()];
        PadSynth { grid, pad, eng, spec, work: Vec::new() }
    }

    fn synth<F: Fn([i64; 3], Complex64) -> Complex64>(
        &mut self,
        coeffs: &[Complex64],
        f: F,
        out: &mut Vec<f64>,
    ) {
        self.spec.fill(Complex64::new(0.0, 0.0));
        let zero = Complex64::new(0.0, 0.0);
        for i in 0..self.grid.len() {
            let v = coeffs[i];
            if v == zero {
                continue;
            }
            let k = self.grid.wavevector(i);
            // Nyquist rows have no conjugate partner in the source storage.
            if k.iter().any(|&c| 2 * c.unsigned_abs() as usize >= self.grid.n()) {
                continue;
            }
            self.spec[self.pad.flat_of_wavevector(k)] = f(k, v);
        }
        self.eng.inverse_real(&self.spec, &mut self.work, out);
    }
}

fn keep(_k: [i64; 3], v: Complex64) -> Complex64 {
    v
}

/// Residual of the increment-flux identity at offset `h`, with the two
/// offset derivatives replaced by central differences of width `dh`.
///
/// The left side differences the cubic increment tensor
/// A_ijk = int psi (du x du) du^k; the right side differences
/// B_ijk = int psi [(u x Tu) + (Tu x u)](u^k - Tu^k) and adds the
/// cutoff-gradient term C_ij = int (Tu x Tu)(du . grad psi). Returns the
/// largest entry of sum_k D_k[A - B]_ijk + C_ij over the six independent
/// components; exact up to the O(dh^2) difference error.
pub fn flux_identity_check(u: &SpectralField, psi: &CutoffField, h: [f64; 3], dh: f64) -> f64 {
    let grid = u.grid();
    assert!(grid.dim() == 3 && grid.n() == psi.grid().n());
    let mut ps = PadSynth::new(grid);
    let npts = ps.pad.len();
    let cell = ps.pad.cell_volume();

    let mut psi_p = Vec::new();
    ps.synth(psi.spectral().coeffs(), keep, &mut psi_p);
    let mut gpsi: [Vec<f64>; 3] = Default::default();
    for (a, g) in gpsi.iter_mut().enumerate() {
        ps.synth(
            psi.spectral().coeffs(),
            |k, v| Complex64::new(0.0, k[a] as f64) * v,
            g,
        );
    }
    let mut base: [Vec<f64>; 3] = Default::default();
    for (c, b) in base.iter_mut().enumerate() {
        ps.synth(u.comp(c), keep, b);
    }

    let mut tu: [Vec<f64>; 3] = Default::default();
    let shift_to = |ps: &mut PadSynth, hp: [f64; 3], out: &mut [Vec<f64>; 3]| {
        for (c, o) in out.iter_mut().enumerate() {
            ps.synth(
                u.comp(c),
                |k, v| {
                    v * Complex64::cis(
                        k[0] as f64 * hp[0] + k[1] as f64 * hp[1] + k[2] as f64 * hp[2],
                    )
                },
                o,
            );
        }
    };

    let eval_ab = |tu: &[Vec<f64>; 3]| -> ([f64; 18], [f64; 18]) {
        let mut a = [0.0; 18];
        let mut b = [0.0; 18];
        for x in 0..npts {
            let w = psi_p[x];
            let uv = [base[0][x], base[1][x], base[2][x]];
            let tv = [tu[0][x], tu[1][x], tu[2][x]];
            let dv = [tv[0] - uv[0], tv[1] - uv[1], tv[2] - uv[2]];
            for (p, &(i, j)) in PAIRS.iter().enumerate() {
                let pa = w * dv[i] * dv[j];
                let pb = w * (uv[i] * tv[j] + tv[i] * uv[j]);
                for k in 0..3 {
                    a[p * 3 + k] += pa * dv[k];
                    b[p * 3 + k] -= pb * dv[k];
                }
            }
        }
        (a.map(|v| v * cell), b.map(|v| v * cell))
    };

    let mut div = [0.0f64; 6];
    for k in 0..3 {
        for sign in [1.0, -1.0] {
            let mut hp = h;
            hp[k] += sign * dh;
            shift_to(&mut ps, hp, &mut tu);
            let (a, b) = eval_ab(&tu);
            for p in 0..6 {
                div[p] += sign * (a[p * 3 + k] - b[p * 3 + k]) / (2.0 * dh);
            }
        }
    }

    shift_to(&mut ps, h, &mut tu);
    let mut cterm = [0.0f64; 6];
    for x in 0..npts {
        let dd: f64 = (0..3).map(|c| (tu[c][x] - base[c][x]) * gpsi[c][x]).sum();
        if dd == 0.0 {
            continue;
        }
        for (p, &(i, j)) in PAIRS.iter().enumerate() {
            cterm[p] += tu[i][x] * tu[j][x] * dd;
        }
    }

    let mut worst = 0.0f64;
    for p in 0..6 {
        worst = worst.max((div[p] + cterm[p] * cell).abs());
    }
    worst
}
