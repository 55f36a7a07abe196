use crate::error::{Result, TurbError};

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Fourier lattice for the periodic box (0, 2pi)^dim with n points per axis.
///
/// Coefficients are stored in FFT index order, row-major over axes. Index j
/// on an axis maps to the integer wavenumber j for j <= n/2 and j - n above.
/// The Nyquist index j = n/2 has no conjugate partner and is kept zero in
/// every field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WaveGrid {
    dim: usize,
    n: usize,
}

impl WaveGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if dim != 1 && dim != 3 {
            return Err(TurbError::InvalidGrid(format!(
                "dimension must be 1 or 3, got {dim}"
            )));
        }
        if n < 8 || n % 2 != 0 {
            return Err(TurbError::InvalidGrid(format!(
                "points per axis must be even and at least 8, got {n}"
            )));
        }
        Ok(WaveGrid { dim, n })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of lattice points / coefficients.
    #[inline]
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest wavenumber magnitude kept by the 2/3 rule, floor(n/3) per axis.
    #[inline]
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n / 3) as i64
    }

    pub fn box_volume(&self) -> f64 {
        TWO_PI.powi(self.dim as i32)
    }

    pub fn cell_volume(&self) -> f64 {
        (TWO_PI / self.n as f64).powi(self.dim as i32)
    }

    pub fn spacing(&self) -> f64 {
        TWO_PI / self.n as f64
    }

    /// Integer wavenumber for one axis index.
    #[inline]
    pub fn axis_wavenumber(&self, idx: usize) -> i64 {
        debug_assert!(idx < self.n);
        if idx <= self.n / 2 {
            idx as i64
        } else {
            idx as i64 - self.n as i64
        }
    }

    /// Axis index for an integer wavenumber in [-n/2, n/2).
    #[inline]
    pub fn axis_index(&self, k: i64) -> usize {
        if k >= 0 {
            k as usize
        } else {
            (k + self.n as i64) as usize
        }
    }

    #[inline]
    pub fn decompose(&self, flat: usize) -> [usize; 3] {
        match self.dim {
            1 => [flat, 0, 0],
            _ => {
                let n = self.n;
                [flat / (n * n), (flat / n) % n, flat % n]
            }
        }
    }

    #[inline]
    pub fn flatten(&self, idx: [usize; 3]) -> usize {
        match self.dim {
            1 => idx[0],
            _ => (idx[0] * self.n + idx[1]) * self.n + idx[2],
        }
    }

    /// Integer wavevector at a flat index; unused axes are zero.
    #[inline]
    pub fn wavevector(&self, flat: usize) -> [i64; 3] {
        let idx = self.decompose(flat);
        match self.dim {
            1 => [self.axis_wavenumber(idx[0]), 0, 0],
            _ => [
                self.axis_wavenumber(idx[0]),
                self.axis_wavenumber(idx[1]),
                self.axis_wavenumber(idx[2]),
            ],
        }
    }

    #[inline]
    pub fn flat_of_wavevector(&self, k: [i64; 3]) -> usize {
        match self.dim {
            1 => self.axis_index(k[0]),
            _ => self.flatten([
                self.axis_index(k[0]),
                self.axis_index(k[1]),
                self.axis_index(k[2]),
            ]),
        }
    }

    /// |k|^2 at a flat index.
    #[inline]
    pub fn k_squared(&self, flat: usize) -> f64 {
        let k = self.wavevector(flat);
        (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64
    }

    /// True if any axis index sits on the Nyquist line j = n/2.
    #[inline]
    pub fn is_nyquist(&self, flat: usize) -> bool {
        let half = self.n / 2;
        let idx = self.decompose(flat);
        match self.dim {
            1 => idx[0] == half,
            _ => idx[0] == half || idx[1] == half || idx[2] == half,
        }
    }

    /// True if every |k_i| <= floor(n/3); the band kept by dealiasing.
    #[inline]
    pub fn in_band(&self, flat: usize) -> bool {
        let c = self.dealias_cutoff();
        let k = self.wavevector(flat);
        k[0].abs() <= c && k[1].abs() <= c && k[2].abs() <= c
    }

    /// Flat index of the conjugate partner -k (mod n per axis).
    #[inline]
    pub fn conj_index(&self, flat: usize) -> usize {
        let n = self.n;
        let idx = self.decompose(flat);
        let neg = |i: usize| if i == 0 { 0 } else { n - i };
        match self.dim {
            1 => neg(idx[0]),
            _ => self.flatten([neg(idx[0]), neg(idx[1]), neg(idx[2])]),
        }
    }

    /// Physical coordinates of lattice site `flat`.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let h = self.spacing();
        let idx = self.decompose(flat);
        [idx[0] as f64 * h, idx[1] as f64 * h, idx[2] as f64 * h]
    }

    /// All integer wavevectors with lo <= |k| <= hi (Euclidean norm).
    pub fn shell(&self, lo: f64, hi: f64) -> Vec<[i64; 3]> {
        let kmax = hi.floor() as i64;
        let mut out = Vec::new();
        let range = -kmax..=kmax;
        match self.dim {
            1 => {
                for k0 in range {
                    let m = (k0 * k0) as f64;
                    if m >= lo * lo && m <= hi * hi && k0 != 0 {
                        out.push([k0, 0, 0]);
                    }
                }
            }
            _ => {
                for k0 in range.clone() {
                    for k1 in range.clone() {
                        for k2 in range.clone() {
                            let m = (k0 * k0 + k1 * k1 + k2 * k2) as f64;
                            if m >= lo * lo && m <= hi * hi && m > 0.0 {
                                out.push([k0, k1, k2]);
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(WaveGrid::new(3, 7).is_err());
        assert!(WaveGrid::new(3, 6).is_err());
        assert!(WaveGrid::new(2, 16).is_err());
        assert!(WaveGrid::new(3, 8).is_ok());
        assert!(WaveGrid::new(1, 4096).is_ok());
    }

    #[test]
    fn wavenumber_round_trip() {
        let g = WaveGrid::new(3, 16).unwrap();
        for flat in 0..g.len() {
            let k = g.wavevector(flat);
            assert_eq!(g.flat_of_wavevector(k), flat);
        }
    }

    #[test]
    fn conjugate_index_is_involution() {
        let g = WaveGrid::new(3, 8).unwrap();
        for flat in 0..g.len() {
            assert_eq!(g.conj_index(g.conj_index(flat)), flat);
            let k = g.wavevector(flat);
            let kc = g.wavevector(g.conj_index(flat));
            for a in 0..3 {
                // Nyquist maps to itself: -n/2 == n/2 mod n.
                if k[a].abs() as usize != g.n() / 2 {
                    assert_eq!(k[a], -kc[a]);
                }
            }
        }
    }

    #[test]
    fn shell_counts_match_lattice() {
        let g = WaveGrid::new(3, 32).unwrap();
        // |k|^2 in {1,2,3,4} has 6 + 12 + 8 + 6 lattice points.
        assert_eq!(g.shell(1.0, 2.0).len(), 32);
        assert_eq!(g.shell(1.0, 1.0).len(), 6);
    }

    #[test]
    fn nyquist_detection() {
        let g = WaveGrid::new(3, 8).unwrap();
        let flat = g.flatten([4, 0, 0]);
        assert!(g.is_nyquist(flat));
        assert!(!g.is_nyquist(g.flatten([3, 0, 1])));
    }
}
