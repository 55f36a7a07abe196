use crate::error::{Result, TurbError};
use crate::fft::FftEngine;
use crate::field::ScalarField;
use crate::grid::WaveGrid;

/// Localization weight for the scale-budget diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutoffKind {
    /// psi = 1 everywhere (periodic, whole-box averages)
    Uniform,
    /// C-infinity bump supported in a ball, band-truncated on the grid
    Bump,
}

/// A test function psi together with its spectrally consistent derivatives.
///
/// The bump is sampled in physical space, transformed, and truncated to the
/// dealiasing band. Every derived quantity (gradient, Laplacian, physical
/// samples) comes from the truncated coefficients, so identities that hold
/// for any fixed C^2 weight hold exactly for this trig polynomial, ringing
/// included. Quadratic cross terms against band-limited fields are then
/// alias-free on the grid.
#[derive(Debug, Clone)]
pub struct CutoffField {
    kind: CutoffKind,
    center: [f64; 3],
    radius: f64,
    psi: ScalarField,
    psi_phys: Vec<f64>,
    grad_phys: [Vec<f64>; 3],
    lap_phys: Vec<f64>,
    integral: f64,
    spectral_tail: f64,
}

/// One-dimensional bump profile, phi(0) = 1, support |s| < 1.
pub fn bump_profile(s: f64) -> f64 {
    if s.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

/// Integral of phi(|y|) over the unit ball divided by 4 pi, i.e.
/// int_0^1 phi(s) s^2 ds, by adaptive quadrature offline.
pub const BUMP_RADIAL_MOMENT: f64 = 0.095_413_699_294_300_46;

/// Volume integral of the (untruncated) bump of a given radius.
pub fn bump_volume(radius: f64) -> f64 {
    4.0 * std::f64::consts::PI * BUMP_RADIAL_MOMENT * radius.powi(3)
}

pub fn make_cutoff(
    grid: WaveGrid,
    kind: CutoffKind,
    center: [f64; 3],
    radius: f64,
    eng: &mut FftEngine,
) -> Result<CutoffField> {
    if grid.dim() != 3 {
        return Err(TurbError::InvalidConfig(
            "cutoff fields are defined on the 3d grid".into(),
        ));
    }
    match kind {
        CutoffKind::Uniform => {
            let mut psi = ScalarField::zeros(grid);
            psi.coeffs_mut()[0] = num_complex::Complex64::new(1.0, 0.0);
            let len = grid.len();
            Ok(CutoffField {
                kind,
                center,
                radius: f64::INFINITY,
                psi,
                psi_phys: vec![1.0; len],
                grad_phys: [vec![0.0; len], vec![0.0; len], vec![0.0; len]],
                lap_phys: vec![0.0; len],
                integral: grid.box_volume(),
                spectral_tail: 0.0,
            })
        }
        CutoffKind::Bump => {
            if !(radius > 0.0 && radius < std::f64::consts::PI) {
                return Err(TurbError::InvalidConfig(format!(
                    "bump radius {radius} must lie in (0, pi)"
                )));
            }
            let samples: Vec<f64> = (0..grid.len())
                .map(|flat| {
                    let x = grid.point(flat);
                    let mut d2 = 0.0;
                    for a in 0..3 {
                        let mut d = (x[a] - center[a]).rem_euclid(crate::grid::TWO_PI);
                        if d > std::f64::consts::PI {
                            d -= crate::grid::TWO_PI;
                        }
                        d2 += d * d;
                    }
                    bump_profile(d2.sqrt() / radius)
                })
                .collect();
            let mut psi = ScalarField::from_physical(grid, &samples, eng);
            let cutoff = grid.dealias_cutoff();
            let mut tail = 0.0_f64;
            for flat in 0..grid.len() {
                let k = grid.wavevector(flat);
                let linf = k.iter().map(|x| x.abs()).max().unwrap();
                if linf > cutoff {
                    psi.coeffs_mut()[flat] = num_complex::Complex64::default();
                } else if linf == cutoff {
                    tail = tail.max(psi.coeffs()[flat].norm());
                }
            }
            let integral = grid.box_volume() * psi.coeffs()[0].re;
            let psi_phys = psi.to_physical(eng);
            let grad_phys = [
                psi.derivative(0).to_physical(eng),
                psi.derivative(1).to_physical(eng),
                psi.derivative(2).to_physical(eng),
            ];
            let lap_phys = psi.laplacian().to_physical(eng);
            Ok(CutoffField {
                kind,
                center,
                radius,
                psi,
                psi_phys,
                grad_phys,
                lap_phys,
                integral,
                spectral_tail: tail,
            })
        }
    }
}

impl CutoffField {
    pub fn kind(&self) -> CutoffKind {
        self.kind
    }

    pub fn grid(&self) -> WaveGrid {
        self.psi.grid()
    }

    pub fn center(&self) -> [f64; 3] {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn spectral(&self) -> &ScalarField {
        &self.psi
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi_phys
    }

    pub fn grad(&self, axis: usize) -> &[f64] {
        &self.grad_phys[axis]
    }

    pub fn laplacian(&self) -> &[f64] {
        &self.lap_phys
    }

    /// Volume integral of psi (exact for the truncated field).
    pub fn integral(&self) -> f64 {
        self.integral
    }

    /// Largest coefficient magnitude on the outermost retained shell.
    /// Shrinks superalgebraically with resolution; a resolution adequacy
    /// measure for the weight, reported alongside budget outputs.
    pub fn spectral_tail(&self) -> f64 {
        self.spectral_tail
    }

    /// Largest separation usable with this weight: translates by |h| up to
    /// the margin keep the shifted support inside the box.
    pub fn separation_margin(&self) -> f64 {
        if self.kind == CutoffKind::Uniform {
            f64::INFINITY
        } else {
            std::f64::consts::PI - self.radius
        }
    }
}
