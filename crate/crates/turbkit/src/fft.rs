use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::WaveGrid;

/// Planned transforms for one grid size.
///
/// Spectral convention: forward (physical -> spectral) divides by n^dim so
/// coefficients are Fourier-series amplitudes, u(x) = sum_k u_k exp(i k.x);
/// inverse applies no scaling. Multidimensional transforms run the planned
/// 1-d kernel along the contiguous axis, cycling the axes with a permute
/// pass in between; three rounds restore the original layout.
pub struct FftEngine {
    grid: WaveGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Clone for FftEngine {
    fn clone(&self) -> Self {
        FftEngine {
            grid: self.grid,
            forward: Arc::clone(&self.forward),
            inverse: Arc::clone(&self.inverse),
            scratch: vec![Complex64::default(); self.scratch.len()],
            tmp: vec![Complex64::default(); self.tmp.len()],
        }
    }
}

impl FftEngine {
    pub fn new(grid: WaveGrid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.n());
        let inverse = planner.plan_fft_inverse(grid.n());
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        let tmp_len = if grid.dim() == 3 { grid.len() } else { 0 };
        FftEngine {
            grid,
            forward,
            inverse,
            scratch: vec![Complex64::default(); scratch_len],
            tmp: vec![Complex64::default(); tmp_len],
        }
    }

    pub fn grid(&self) -> WaveGrid {
        self.grid
    }

    /// Physical samples -> Fourier-series coefficients, in place.
    pub fn forward(&mut self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.grid.len());
        let plan = Arc::clone(&self.forward);
        self.run(&plan, data);
        let scale = 1.0 / self.grid.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    /// Fourier-series coefficients -> physical samples, in place.
    pub fn inverse(&mut self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.grid.len());
        let plan = Arc::clone(&self.inverse);
        self.run(&plan, data);
    }

    /// Inverse transform of `src` without touching it; returns physical
    /// real parts in `out`.
    pub fn inverse_real(&mut self, src: &[Complex64], work: &mut Vec<Complex64>, out: &mut Vec<f64>) {
        work.clear();
        work.extend_from_slice(src);
        self.inverse(work);
        out.clear();
        out.extend(work.iter().map(|c| c.re));
    }

    fn run(&mut self, plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64]) {
        match self.grid.dim() {
            1 => plan.process_with_scratch(data, &mut self.scratch),
            _ => {
                let n = self.grid.n();
                for _ in 0..3 {
                    plan.process_with_scratch(data, &mut self.scratch);
                    cycle_axes(data, &mut self.tmp, n);
                    data.copy_from_slice(&self.tmp);
                }
            }
        }
    }
}

/// Rotate axes (i0, i1, i2) -> (i2, i0, i1) so the old middle axis becomes
/// contiguous. Applying it three times is the identity.
fn cycle_axes(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    for i0 in 0..n {
        for i1 in 0..n {
            let row = (i0 * n + i1) * n;
            for i2 in 0..n {
                dst[(i2 * n + i0) * n + i1] = src[row + i2];
            }
        }
    }
}
