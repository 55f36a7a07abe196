use num_complex::Complex64;

use crate::grid::WaveGrid;

/// One retained wavevector with flat indices on the simulation grid and on
/// the padded product grid. `weight` is 2 for modes whose conjugate partner
/// was dropped from a half-space list, 1 at the origin.
#[derive(Debug, Clone, Copy)]
pub struct BandMode {
    pub k: [i64; 3],
    pub flat: usize,
    pub flat_pad: usize,
    pub weight: f64,
}

/// Wavevector of a two-field product (|k|_inf up to 2K), padded grid only.
#[derive(Debug, Clone, Copy)]
pub struct WideMode {
    pub k: [i64; 3],
    pub flat_pad: usize,
    pub weight: f64,
}

/// Smallest even 5-smooth integer >= n. Even because grids pair conjugate
/// modes around a Nyquist index; 5-smooth keeps the padded FFT fast.
pub fn next_smooth_size(n: usize) -> usize {
    let mut m = n.max(2);
    if m % 2 == 1 {
        m += 1;
    }
    loop {
        let mut r = m;
        for p in [2usize, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 2;
    }
}

fn canonical(k: [i64; 3]) -> bool {
    k[2] > 0 || (k[2] == 0 && (k[1] > 0 || (k[1] == 0 && k[0] >= 0)))
}

/// Index plumbing between the simulation grid and a padded grid large enough
/// to hold triple products of band-limited fields without aliasing.
///
/// Retained band K = dealias cutoff. Products of two band fields occupy
/// |k|_inf <= 2K, of three <= 3K, so with M > 4K the nearest alias image of
/// any product mode lands outside the band: M is the next 5-smooth size past
/// 4K + 2. All cross-spectra are Hermitian (real factors), so the dot lists
/// keep one wavevector per conjugate pair with weight 2.
#[derive(Debug, Clone)]
pub struct BandMaps {
    pub grid: WaveGrid,
    pub pad: WaveGrid,
    pub cutoff: i64,
    pub band: Vec<BandMode>,
    pub half: Vec<BandMode>,
    pub wide_half: Vec<WideMode>,
}

impl BandMaps {
    pub fn new(grid: WaveGrid) -> Self {
        let kc = grid.dealias_cutoff();
        let m = next_smooth_size((4 * kc + 2) as usize).max(grid.n());
        let pad = WaveGrid::new(3, m).expect("padded grid size is valid");
        let mut band = Vec::new();
        let mut half = Vec::new();
        for kz in -kc..=kc {
            for ky in -kc..=kc {
                for kx in -kc..=kc {
                    let k = [kx, ky, kz];
                    let mode = BandMode {
                        k,
                        flat: grid.flat_of_wavevector(k),
                        flat_pad: pad.flat_of_wavevector(k),
                        weight: if k == [0, 0, 0] { 1.0 } else { 2.0 },
                    };
                    band.push(mode);
                    if canonical(k) {
                        half.push(mode);
                    }
                }
            }
        }
        let w = 2 * kc;
        let mut wide_half = Vec::new();
        for kz in 0..=w {
            for ky in -w..=w {
                for kx in -w..=w {
                    let k = [kx, ky, kz];
                    if !canonical(k) {
                        continue;
                    }
                    wide_half.push(WideMode {
                        k,
                        flat_pad: pad.flat_of_wavevector(k),
                        weight: if k == [0, 0, 0] { 1.0 } else { 2.0 },
                    });
                }
            }
        }
        BandMaps {
            grid,
            pad,
            cutoff: kc,
            band,
            half,
            wide_half,
        }
    }

    /// Copies the retained band of a simulation-grid spectrum into a padded
    /// spectrum (everything else zero).
    pub fn pad_spectrum(&self, src: &[Complex64]) -> Vec<Complex64> {
        self.pad_spectrum_with(src, |_, v| v)
    }

    /// Same, applying a per-mode spectral multiplier (gradients, Laplacians).
    pub fn pad_spectrum_with<F>(&self, src: &[Complex64], f: F) -> Vec<Complex64>
    where
        F: Fn([i64; 3], Complex64) -> Complex64,
    {
        let mut out = vec![Complex64::new(0.0, 0.0); self.pad.len()];
        for m in &self.band {
            out[m.flat_pad] = f(m.k, src[m.flat]);
        }
        out
    }
}

/// Sum of a Hermitian half-space spectrum over the full band, i.e. the value
/// of the underlying cross-correlation at zero shift.
pub fn hermitian_sum(values: &[Complex64], modes: &[BandMode]) -> f64 {
    values
        .iter()
        .zip(modes)
        .map(|(v, m)| m.weight * v.re)
        .sum()
}
