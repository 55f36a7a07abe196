use num_complex::Complex64;

use crate::error::{Result, TurbError};
use crate::fft::FftEngine;
use crate::grid::WaveGrid;

/// Vector field stored as full complex Fourier coefficients per component.
///
/// Real-valued fields keep the conjugate symmetry u(-k) = conj(u(k));
/// every constructor and operation here preserves it, and the Nyquist
/// planes stay identically zero.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: WaveGrid,
    comps: Vec<Vec<Complex64>>,
}

/// Scalar field in the same representation (pressure, cutoff weights).
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: WaveGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: WaveGrid) -> Self {
        let ncomp = grid.dim();
        SpectralField {
            grid,
            comps: vec![vec![Complex64::default(); grid.len()]; ncomp],
        }
    }

    pub fn from_components(grid: WaveGrid, comps: Vec<Vec<Complex64>>) -> Result<Self> {
        if comps.len() != grid.dim() || comps.iter().any(|c| c.len() != grid.len()) {
            return Err(TurbError::GridMismatch(
                "component count or length does not match grid".into(),
            ));
        }
        Ok(SpectralField { grid, comps })
    }

    #[inline]
    pub fn grid(&self) -> WaveGrid {
        self.grid
    }

    #[inline]
    pub fn ncomp(&self) -> usize {
        self.comps.len()
    }

    #[inline]
    pub fn comp(&self, c: usize) -> &[Complex64] {
        &self.comps[c]
    }

    #[inline]
    pub fn comp_mut(&mut self, c: usize) -> &mut Vec<Complex64> {
        &mut self.comps[c]
    }

    /// Write one mode and its conjugate partner.
    pub fn set_mode(&mut self, k: [i64; 3], values: &[Complex64]) {
        let flat = self.grid.flat_of_wavevector(k);
        let conj = self.grid.conj_index(flat);
        for (c, v) in values.iter().enumerate() {
            self.comps[c][flat] = *v;
            if conj != flat {
                self.comps[c][conj] = v.conj();
            } else {
                self.comps[c][flat] = Complex64::new(v.re, 0.0);
            }
        }
    }

    pub fn mode(&self, k: [i64; 3], c: usize) -> Complex64 {
        self.comps[c][self.grid.flat_of_wavevector(k)]
    }

    /// Largest violation of u(-k) = conj(u(k)).
    pub fn conj_symmetry_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for comp in &self.comps {
            for flat in 0..self.grid.len() {
                let pair = self.grid.conj_index(flat);
                let d = (comp[flat] - comp[pair].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Largest |k . u(k)|.
    pub fn divergence_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for flat in 0..self.grid.len() {
            let k = self.grid.wavevector(flat);
            let mut div = Complex64::default();
            for (c, comp) in self.comps.iter().enumerate() {
                div += Complex64::new(k[c] as f64, 0.0) * comp[flat];
            }
            worst = worst.max(div.norm());
        }
        worst
    }

    pub fn zero_nyquist(&mut self) {
        for flat in 0..self.grid.len() {
            if self.grid.is_nyquist(flat) {
                for comp in self.comps.iter_mut() {
                    comp[flat] = Complex64::default();
                }
            }
        }
    }

    /// Zero every mode outside the 2/3-rule band.
    pub fn dealias(&mut self) {
        for flat in 0..self.grid.len() {
            if !self.grid.in_band(flat) {
                for comp in self.comps.iter_mut() {
                    comp[flat] = Complex64::default();
                }
            }
        }
    }

    /// Remove the compressible part: u(k) -= k (k.u(k)) / |k|^2, mean mode
    /// untouched. No-op in one dimension.
    pub fn leray_project(&mut self) {
        if self.grid.dim() != 3 {
            return;
        }
        for flat in 0..self.grid.len() {
            let k = self.grid.wavevector(flat);
            let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
            if k2 == 0.0 {
                continue;
            }
            let dot = self.comps[0][flat] * k[0] as f64
                + self.comps[1][flat] * k[1] as f64
                + self.comps[2][flat] * k[2] as f64;
            let f = dot / k2;
            for (c, comp) in self.comps.iter_mut().enumerate() {
                comp[flat] -= f * k[c] as f64;
            }
        }
    }

    /// Exact translation u(x) -> u(x + h): multiply each mode by
    /// exp(i k . h).
    pub fn shift(&mut self, h: [f64; 3]) {
        let tables = phase_tables(self.grid, h);
        apply_phases(self.grid, &tables, &mut self.comps);
    }

    /// L2 norm squared over the box, (2pi)^d sum |u(k)|^2.
    pub fn l2_norm_sq(&self) -> f64 {
        let v = self.grid.box_volume();
        self.comps
            .iter()
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            * v
    }

    /// H1 seminorm squared, (2pi)^d sum |k|^2 |u(k)|^2.
    pub fn grad_norm_sq(&self) -> f64 {
        let v = self.grid.box_volume();
        let mut s = 0.0;
        for flat in 0..self.grid.len() {
            let k2 = self.grid.k_squared(flat);
            if k2 == 0.0 {
                continue;
            }
            for comp in &self.comps {
                s += k2 * comp[flat].norm_sqr();
            }
        }
        s * v
    }

    /// L2 inner product with another field.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        let v = self.grid.box_volume();
        let mut s = 0.0;
        for (a, b) in self.comps.iter().zip(&other.comps) {
            for (x, y) in a.iter().zip(b) {
                s += (x.conj() * y).re;
            }
        }
        s * v
    }

    pub fn scale(&mut self, a: f64) {
        for comp in self.comps.iter_mut() {
            for z in comp.iter_mut() {
                *z *= a;
            }
        }
    }

    pub fn axpy(&mut self, a: f64, x: &SpectralField) {
        for (dst, src) in self.comps.iter_mut().zip(&x.comps) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += a * s;
            }
        }
    }

    /// Physical samples of every component (real parts after inverse fft).
    pub fn to_physical(&self, eng: &mut FftEngine) -> Vec<Vec<f64>> {
        let mut work = Vec::new();
        let mut out = Vec::with_capacity(self.ncomp());
        for comp in &self.comps {
            let mut phys = Vec::new();
            eng.inverse_real(comp, &mut work, &mut phys);
            out.push(phys);
        }
        out
    }

    /// Build a field from physical component samples.
    pub fn from_physical(grid: WaveGrid, phys: &[Vec<f64>], eng: &mut FftEngine) -> Self {
        let mut comps = Vec::with_capacity(phys.len());
        for p in phys {
            let mut buf: Vec<Complex64> = p.iter().map(|&r| Complex64::new(r, 0.0)).collect();
            eng.forward(&mut buf);
            comps.push(buf);
        }
        SpectralField { grid, comps }
    }

    /// Random real divergence-free field with modes up to |k| <= kmax,
    /// unit-scale coefficients times `amplitude`. Intended for tests and
    /// deterministic initial conditions.
    pub fn random_divergence_free(
        grid: WaveGrid,
        kmax: i64,
        amplitude: f64,
        rng: &mut impl rand::Rng,
    ) -> Self {
        let mut f = SpectralField::zeros(grid);
        let ncomp = f.ncomp();
        for flat in 0..grid.len() {
            let k = grid.wavevector(flat);
            let canonical =
                k[0] > 0 || (k[0] == 0 && k[1] > 0) || (k[0] == 0 && k[1] == 0 && k[2] > 0);
            if !canonical || !grid.in_band(flat) {
                continue;
            }
            if k.iter().map(|x| x * x).sum::<i64>() > kmax * kmax {
                continue;
            }
            let vals: Vec<Complex64> = (0..ncomp)
                .map(|_| {
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amplitude
                })
                .collect();
            f.set_mode(k, &vals);
        }
        f.leray_project();
        f
    }
}

impl ScalarField {
    pub fn zeros(grid: WaveGrid) -> Self {
        ScalarField {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_coeffs(grid: WaveGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(TurbError::GridMismatch(
                "coefficient length does not match grid".into(),
            ));
        }
        Ok(ScalarField { grid, coeffs })
    }

    #[inline]
    pub fn grid(&self) -> WaveGrid {
        self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut Vec<Complex64> {
        &mut self.coeffs
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn shift(&mut self, h: [f64; 3]) {
        let tables = phase_tables(self.grid, h);
        let mut comps = std::mem::take(&mut self.coeffs);
        apply_phases_one(self.grid, &tables, &mut comps);
        self.coeffs = comps;
    }

    pub fn conj_symmetry_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for flat in 0..self.grid.len() {
            let pair = self.grid.conj_index(flat);
            worst = worst.max((self.coeffs[flat] - self.coeffs[pair].conj()).norm());
        }
        worst
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.box_volume() * self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn to_physical(&self, eng: &mut FftEngine) -> Vec<f64> {
        let mut work = Vec::new();
        let mut out = Vec::new();
        eng.inverse_real(&self.coeffs, &mut work, &mut out);
        out
    }

    pub fn from_physical(grid: WaveGrid, phys: &[f64], eng: &mut FftEngine) -> Self {
        let mut buf: Vec<Complex64> = phys.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        eng.forward(&mut buf);
        ScalarField { grid, coeffs: buf }
    }

    /// Spectral derivative along one axis: multiply by i k_axis.
    pub fn derivative(&self, axis: usize) -> ScalarField {
        let mut out = self.clone();
        for flat in 0..self.grid.len() {
            let k = self.grid.wavevector(flat)[axis] as f64;
            out.coeffs[flat] *= Complex64::new(0.0, k);
        }
        out
    }

    /// Spectral Laplacian: multiply by -|k|^2.
    pub fn laplacian(&self) -> ScalarField {
        let mut out = self.clone();
        for flat in 0..self.grid.len() {
            out.coeffs[flat] *= -self.grid.k_squared(flat);
        }
        out
    }
}

/// Per-axis tables exp(i k_j h_axis) for a shift by h.
pub fn phase_tables(grid: WaveGrid, h: [f64; 3]) -> Vec<Vec<Complex64>> {
    let n = grid.n();
    (0..grid.dim())
        .map(|axis| {
            (0..n)
                .map(|idx| {
                    let arg = grid.axis_wavenumber(idx) as f64 * h[axis];
                    Complex64::new(arg.cos(), arg.sin())
                })
                .collect()
        })
        .collect()
}

fn apply_phases(grid: WaveGrid, tables: &[Vec<Complex64>], comps: &mut [Vec<Complex64>]) {
    match grid.dim() {
        1 => {
            for comp in comps.iter_mut() {
                for (idx, z) in comp.iter_mut().enumerate() {
                    *z *= tables[0][idx];
                }
            }
        }
        _ => {
            let n = grid.n();
            for i0 in 0..n {
                let p0 = tables[0][i0];
                for i1 in 0..n {
                    let p01 = p0 * tables[1][i1];
                    let row = (i0 * n + i1) * n;
                    for comp in comps.iter_mut() {
                        let line = &mut comp[row..row + n];
                        for (i2, z) in line.iter_mut().enumerate() {
                            *z *= p01 * tables[2][i2];
                        }
                    }
                }
            }
        }
    }
}

fn apply_phases_one(grid: WaveGrid, tables: &[Vec<Complex64>], coeffs: &mut Vec<Complex64>) {
    let mut wrap = [std::mem::take(coeffs)];
    apply_phases(grid, tables, &mut wrap);
    let [c] = wrap;
    *coeffs = c;
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn random_divfree(grid: WaveGrid, kmax: i64, seed: u64) -> SpectralField {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        SpectralField::random_divergence_free(grid, kmax, 1.0, &mut rng)
    }

    #[test]
    fn leray_is_idempotent_and_kills_divergence() {
        let grid = WaveGrid::new(3, 16).unwrap();
        let mut f = random_divfree(grid, 5, 7);
        assert!(f.divergence_defect() < 1e-13);
        let before = f.clone();
        f.leray_project();
        let mut diff = 0.0_f64;
        for c in 0..3 {
            for (a, b) in f.comp(c).iter().zip(before.comp(c)) {
                diff = diff.max((a - b).norm());
            }
        }
        assert!(diff < 1e-14, "projection moved an already projected field by {diff}");
    }

    #[test]
    fn shift_composes_and_preserves_norm() {
        let grid = WaveGrid::new(3, 16).unwrap();
        let f0 = random_divfree(grid, 5, 3);
        let n0 = f0.l2_norm_sq();

        let h1 = [0.3, -0.7, 0.11];
        let h2 = [-1.1, 0.2, 0.5];
        let mut once = f0.clone();
        once.shift([h1[0] + h2[0], h1[1] + h2[1], h1[2] + h2[2]]);
        let mut twice = f0.clone();
        twice.shift(h1);
        twice.shift(h2);

        let mut diff = 0.0_f64;
        for c in 0..3 {
            for (a, b) in once.comp(c).iter().zip(twice.comp(c)) {
                diff = diff.max((a - b).norm());
            }
        }
        assert!(diff < 1e-12, "group law violated by {diff}");
        assert!((twice.l2_norm_sq() - n0).abs() < 1e-12 * n0.max(1.0));
        assert!(twice.conj_symmetry_defect() < 1e-13);
    }

    #[test]
    fn shift_matches_physical_translation() {
        let grid = WaveGrid::new(3, 16).unwrap();
        let mut eng = FftEngine::new(grid);
        let f = random_divfree(grid, 4, 11);
        // shift by an exact grid offset and compare sample arrays
        let s = grid.spacing();
        let mut shifted = f.clone();
        shifted.shift([2.0 * s, 0.0, 5.0 * s]);
        let orig = f.to_physical(&mut eng);
        let moved = shifted.to_physical(&mut eng);
        let n = grid.n();
        for c in 0..3 {
            for i0 in 0..n {
                for i1 in 0..n {
                    for i2 in 0..n {
                        let src = grid.flatten([(i0 + 2) % n, i1, (i2 + 5) % n]);
                        let dst = grid.flatten([i0, i1, i2]);
                        assert!((moved[c][dst] - orig[c][src]).abs() < 1e-11);
                    }
                }
            }
        }
    }

    #[test]
    fn parseval_matches_grid_sum() {
        let grid = WaveGrid::new(3, 16).unwrap();
        let mut eng = FftEngine::new(grid);
        let f = random_divfree(grid, 4, 23);
        let spectral = f.l2_norm_sq();
        let phys = f.to_physical(&mut eng);
        let mut s = 0.0;
        for c in 0..3 {
            for v in &phys[c] {
                s += v * v;
            }
        }
        s *= grid.cell_volume();
        assert!((spectral - s).abs() < 1e-10 * spectral.max(1.0));
    }

    #[test]
    fn scalar_derivative_matches_mode() {
        let grid = WaveGrid::new(3, 16).unwrap();
        let mut p = ScalarField::zeros(grid);
        let k = [2i64, -1, 3];
        let flat = grid.flat_of_wavevector(k);
        let conj = grid.conj_index(flat);
        p.coeffs_mut()[flat] = Complex64::new(0.5, -0.25);
        p.coeffs_mut()[conj] = Complex64::new(0.5, 0.25);
        let d1 = p.derivative(1);
        let want = Complex64::new(0.0, -1.0) * Complex64::new(0.5, -0.25);
        assert!((d1.coeffs()[flat] - want).norm() < 1e-15);
        let lap = p.laplacian();
        assert!((lap.coeffs()[flat] - Complex64::new(0.5, -0.25) * (-14.0)).norm() < 1e-15);
    }
}
