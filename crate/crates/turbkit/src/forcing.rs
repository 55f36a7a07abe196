use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::cutoff::{CutoffField, CutoffKind};
use crate::error::{Result, TurbError};
use crate::fft::FftEngine;
use crate::field::SpectralField;
use crate::grid::{WaveGrid, TWO_PI};

/// One forced wavevector from the canonical half lattice with its two
/// transverse polarization directions. The mirror mode is implied by
/// conjugate symmetry.
#[derive(Debug, Clone)]
pub struct ForcedMode {
    pub flat: usize,
    pub k: [i64; 3],
    pub lambda: f64,
    pub pol: [[f64; 3]; 2],
}

/// Colored-in-space, OU-in-time noise on a spherical wavenumber shell.
///
/// Slots are counted over the full lattice (both k and -k) times two
/// polarizations; every slot carries the same squared amplitude epsilon/M.
/// The drift rate is lambda_k = c |k|^2.
#[derive(Debug, Clone)]
pub struct NoiseSpectrum {
    grid: WaveGrid,
    c: f64,
    epsilon: f64,
    shell: [i64; 2],
    modes: Vec<ForcedMode>,
    slot_sigma_sq: f64,
}

/// OU process state: the spectral noise field and its clock.
#[derive(Debug, Clone)]
pub struct OUState {
    pub z: SpectralField,
    pub t: f64,
}

fn polarization_pair(k: [i64; 3]) -> [[f64; 3]; 2] {
    let kf = [k[0] as f64, k[1] as f64, k[2] as f64];
    // seed axis least aligned with k keeps the cross product well scaled
    let seed = if k[0].abs() <= k[1].abs() && k[0].abs() <= k[2].abs() {
        [1.0, 0.0, 0.0]
    } else if k[1].abs() <= k[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let cross = |a: [f64; 3], b: [f64; 3]| {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    };
    let norm = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let mut e1 = cross(kf, seed);
    let n1 = norm(e1);
    for v in &mut e1 {
        *v /= n1;
    }
    let mut e2 = cross(kf, e1);
    let n2 = norm(e2);
    for v in &mut e2 {
        *v /= n2;
    }
    [e1, e2]
}

fn canonical(k: [i64; 3]) -> bool {
    k[0] > 0 || (k[0] == 0 && (k[1] > 0 || (k[1] == 0 && k[2] > 0)))
}

pub fn build_noise_spectrum(
    grid: WaveGrid,
    shell: [i64; 2],
    epsilon: f64,
    c: f64,
) -> Result<NoiseSpectrum> {
    if grid.dim() != 3 {
        return Err(TurbError::InvalidConfig(
            "shell forcing is defined on the 3d grid".into(),
        ));
    }
    let [k_lo, k_hi] = shell;
    let max = grid.dealias_cutoff();
    // strict k_hi < N/3 keeps the forced band clear of the dealias edge
    if !(1 <= k_lo && k_lo <= k_hi && 3 * k_hi < grid.n() as i64) {
        return Err(TurbError::InvalidShell {
            lo: k_lo,
            hi: k_hi,
            max,
        });
    }
    if !(epsilon >= 0.0) {
        return Err(TurbError::InvalidConfig(format!(
            "noise strength {epsilon} must be nonnegative"
        )));
    }
    if !(c > 0.0) {
        return Err(TurbError::InvalidConfig(format!(
            "drift scale {c} must be positive"
        )));
    }
    let lattice = grid.shell(k_lo as f64, k_hi as f64);
    if lattice.is_empty() {
        return Err(TurbError::InvalidShell {
            lo: k_lo,
            hi: k_hi,
            max,
        });
    }
    let slots = 2 * lattice.len();
    let mut modes: Vec<ForcedMode> = lattice
        .into_iter()
        .filter(|&k| canonical(k))
        .map(|k| ForcedMode {
            flat: grid.flat_of_wavevector(k),
            k,
            lambda: c * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64,
            pol: polarization_pair(k),
        })
        .collect();
    modes.sort_by_key(|m| m.flat);
    Ok(NoiseSpectrum {
        grid,
        c,
        epsilon,
        shell,
        modes,
        slot_sigma_sq: epsilon / slots as f64,
    })
}

impl NoiseSpectrum {
    pub fn grid(&self) -> WaveGrid {
        self.grid
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn drift_scale(&self) -> f64 {
        self.c
    }

    pub fn shell(&self) -> [i64; 2] {
        self.shell
    }

    pub fn modes(&self) -> &[ForcedMode] {
        &self.modes
    }

    /// Slot count M over the full lattice (mirror modes included).
    pub fn slot_count(&self) -> usize {
        4 * self.modes.len()
    }

    /// Squared amplitude per slot, epsilon / M.
    pub fn slot_sigma_sq(&self) -> f64 {
        self.slot_sigma_sq
    }

    /// Noise rate of one complex spectral coefficient (k, polarization):
    /// E|dz|^2 / dt in Fourier-series units.
    pub fn coeff_noise_rate(&self) -> f64 {
        self.slot_sigma_sq / TWO_PI.powi(3)
    }

    /// Sum of |sigma|^2 over all slots; recovers epsilon.
    pub fn trace(&self) -> f64 {
        self.slot_sigma_sq * self.slot_count() as f64
    }
}

/// Mean-decay factor and innovation standard deviation for one exact OU
/// transition of a coordinate with noise rate sigma_sq (E|dW|^2/dt).
pub fn ou_kernel(lambda: f64, sigma_sq: f64, dt: f64) -> (f64, f64) {
    let decay = (-lambda * dt).exp();
    let var = sigma_sq * (1.0 - (-2.0 * lambda * dt).exp()) / (2.0 * lambda);
    (decay, var.sqrt())
}

/// Advance a noise field by dt with the exact per-mode transition kernel.
///
/// Innovations are drawn mode by mode in ascending flat-index order, two
/// polarizations times (re, im) per canonical mode, so the stream consumed
/// from `rng` is a pure function of (spectrum, step count).
pub fn ou_step_field<R: Rng>(z: &mut SpectralField, spec: &NoiseSpectrum, dt: f64, rng: &mut R) {
    assert!(dt > 0.0, "step must move forward");
    // per-component variance is half the complex coefficient rate
    let comp_rate = 0.5 * spec.coeff_noise_rate();
    for m in &spec.modes {
        let (decay, std) = ou_kernel(m.lambda, comp_rate, dt);
        let mut value = [Complex64::default(); 3];
        for c in 0..3 {
            value[c] = z.comp(c)[m.flat] * decay;
        }
        for pol in &m.pol {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let xi = Complex64::new(re, im) * std;
            for c in 0..3 {
                value[c] += xi * pol[c];
            }
        }
        z.set_mode(m.k, &value);
    }
}

pub fn ou_exact_step<R: Rng>(state: &mut OUState, spec: &NoiseSpectrum, dt: f64, rng: &mut R) {
    ou_step_field(&mut state.z, spec, dt, rng);
    state.t += dt;
}

/// Draw a noise field from the stationary law: independent complex
/// Gaussians with variance sigma_sq / (2 lambda) per (mode, polarization)
/// coordinate.
pub fn ou_invariant_field<R: Rng>(spec: &NoiseSpectrum, rng: &mut R) -> SpectralField {
    let mut z = SpectralField::zeros(spec.grid);
    let comp_rate = 0.5 * spec.coeff_noise_rate();
    for m in &spec.modes {
        let std = (comp_rate / (2.0 * m.lambda)).sqrt();
        let mut value = [Complex64::default(); 3];
        for pol in &m.pol {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let xi = Complex64::new(re, im) * std;
            for c in 0..3 {
                value[c] += xi * pol[c];
            }
        }
        z.set_mode(m.k, &value);
    }
    z
}

pub fn ou_invariant_sample<R: Rng>(spec: &NoiseSpectrum, rng: &mut R) -> OUState {
    OUState {
        z: ou_invariant_field(spec, rng),
        t: 0.0,
    }
}

/// psi-weighted energy injection estimator for one snapshot.
pub fn energy_input(
    u: &SpectralField,
    state: &OUState,
    psi: &CutoffField,
    eng: &mut FftEngine,
) -> f64 {
    if psi.kind() == CutoffKind::Uniform {
        return u.inner(&state.z);
    }
    let grid = u.grid();
    let up = u.to_physical(eng);
    let zp = state.z.to_physical(eng);
    let w = psi.psi();
    let mut acc = 0.0;
    for idx in 0..grid.len() {
        let dot: f64 = (0..3).map(|c| up[c][idx] * zp[c][idx]).sum();
        acc += w[idx] * dot;
    }
    acc * grid.cell_volume()
}
