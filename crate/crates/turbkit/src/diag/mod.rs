//! Scale-by-scale energy budgets and structure-function diagnostics.
//!
//! Everything here evaluates two-point statistics of simulation snapshots
//! through exact spectral shifts: a term E int psi A (T_h B) becomes a
//! phase-weighted cross-spectrum, so no interpolation enters anywhere and
//! shell averages over directions are exact to quadrature.

pub mod bands;
pub mod budget;
pub mod channels;
pub mod dots;
pub mod fit;
pub mod flux;
pub mod lee;
pub mod sf;
pub mod terms;
pub mod wad;

pub use bands::BandMaps;
pub use budget::{KHMBudget, Law, LimitChecks, RatioCheck};
pub use channels::SnapshotChannels;
pub use dots::TermSample;
pub use fit::{scaling_fit, FitReport};
pub use flux::flux_identity_check;
pub use lee::LEEReport;
pub use sf::{GammaProfiles, SFProfile};
pub use terms::TermProfiles;
pub use wad::{assumption_monitors, wad_monitor, MonitorReport, ValueErr, WadReport};

use crate::cutoff::CutoffField;
use crate::error::{Result, TurbError};
use crate::fft::FftEngine;
use crate::integrator::Snapshot;
use crate::lgrid::SeparationGrid;
use crate::sphere::DirectionSet;

/// Fibonacci direction set sized for solid-angle quadrature.
pub fn build_direction_set(n_dirs: usize) -> Result<DirectionSet> {
    if n_dirs < 16 {
        return Err(TurbError::InvalidConfig(format!(
            "direction set needs at least 16 points, got {n_dirs}"
        )));
    }
    DirectionSet::fibonacci(n_dirs)
}

fn check_inputs(snapshots: &[Snapshot], psi: &CutoffField) -> Result<()> {
    if snapshots.is_empty() {
        return Err(TurbError::InvalidConfig("no snapshots to diagnose".into()));
    }
    let grid = psi.grid();
    for s in snapshots {
        if s.u.grid().n() != grid.n() || s.u.grid().dim() != grid.dim() {
            return Err(TurbError::GridMismatch(format!(
                "snapshot grid {} does not match the cutoff grid {}",
                s.u.grid().n(),
                grid.n()
            )));
        }
    }
    Ok(())
}

/// Per-snapshot direction-averaged term profiles, the shared input of the
/// budget assemblies and the structure-function reports.
///
/// Requires pressure on every snapshot; separations must stay inside the
/// cutoff's separation margin.
pub fn profiles_for(
    snapshots: &[Snapshot],
    psi: &CutoffField,
    grid: &SeparationGrid,
    dirs: &DirectionSet,
) -> Result<Vec<TermProfiles>> {
    check_inputs(snapshots, psi)?;
    if let Some(&l_max) = grid.ells().last() {
        let margin = psi.separation_margin();
        if l_max > margin {
            return Err(TurbError::InvalidConfig(format!(
                "largest separation {l_max} exceeds the cutoff margin {margin}"
            )));
        }
    }
    let maps = BandMaps::new(psi.grid());
    let mut eng = FftEngine::new(maps.pad);
    let mut out = Vec::with_capacity(snapshots.len());
    for s in snapshots {
        let ch = SnapshotChannels::compute(&s.u, &s.z, s.pressure()?, psi, &maps, &mut eng);
        out.push(terms::snapshot_profiles(&ch, &maps, dirs, grid.ells()));
    }
    Ok(out)
}

/// Localized third-order structure functions with error bars.
pub fn structure_functions(
    snapshots: &[Snapshot],
    psi: &CutoffField,
    grid: &SeparationGrid,
    dirs: &DirectionSet,
    nu: f64,
) -> Result<SFProfile> {
    let profiles = profiles_for(snapshots, psi, grid, dirs)?;
    Ok(sf::sf_profile(&profiles, grid, nu, psi.integral()))
}

/// Two-point correlation trace, its exact separation derivative, and the
/// projected variant.
pub fn gamma_profiles(
    snapshots: &[Snapshot],
    psi: &CutoffField,
    grid: &SeparationGrid,
    dirs: &DirectionSet,
) -> Result<GammaProfiles> {
    let profiles = profiles_for(snapshots, psi, grid, dirs)?;
    Ok(sf::gamma_profile(&profiles))
}

/// Integrated budget normalized by the sphere average, lhs -S0/ell.
pub fn khm_budget_43(
    snapshots: &[Snapshot],
    psi: &CutoffField,
    grid: &SeparationGrid,
    dirs: &DirectionSet,
    nu: f64,
) -> Result<KHMBudget> {
    let profiles = profiles_for(snapshots, psi, grid, dirs)?;
    budget::assemble_budget(Law::FourThirds, &profiles, grid, nu)
}

/// Integrated budget in the longitudinal projection, lhs -Spar/ell.
pub fn khm_budget_45(
    snapshots: &[Snapshot],
    psi: &CutoffField,
    grid: &SeparationGrid,
    dirs: &DirectionSet,
    nu: f64,
) -> Result<KHMBudget> {
    let profiles = profiles_for(snapshots, psi, grid, dirs)?;
    budget::assemble_budget(Law::FourFifths, &profiles, grid, nu)
}

/// Localized stationary energy balance.
pub fn lee_residual(snapshots: &[Snapshot], psi: &CutoffField, nu: f64) -> Result<LEEReport> {
    check_inputs(snapshots, psi)?;
    let maps = BandMaps::new(psi.grid());
    let mut eng = FftEngine::new(maps.pad);
    let mut scalars = Vec::with_capacity(snapshots.len());
    for s in snapshots {
        let ch = SnapshotChannels::compute(&s.u, &s.z, s.pressure()?, psi, &maps, &mut eng);
        scalars.push(terms::SnapshotScalars {
            psi_gradsq: ch.psi_gradsq,
            lee_lap: ch.lee_lap,
            lee_adv: ch.lee_adv,
            lee_pr: ch.lee_pr,
            lee_inj: ch.lee_inj,
        });
    }
    Ok(lee::lee_report(&scalars, nu))
}

/// Everything the reporting layer consumes, computed from one shared pass
/// over the snapshots.
pub struct DiagReport {
    pub sf: SFProfile,
    pub gamma: GammaProfiles,
    pub b43: KHMBudget,
    pub b45: KHMBudget,
    pub lee: LEEReport,
    pub wad: WadReport,
}

pub fn analyze(
    snapshots: &[Snapshot],
    psi: &CutoffField,
    grid: &SeparationGrid,
    dirs: &DirectionSet,
    nu: f64,
) -> Result<DiagReport> {
    let profiles = profiles_for(snapshots, psi, grid, dirs)?;
    let scalars: Vec<terms::SnapshotScalars> = profiles.iter().map(|p| p.scalars).collect();
    Ok(DiagReport {
        sf: sf::sf_profile(&profiles, grid, nu, psi.integral()),
        gamma: sf::gamma_profile(&profiles),
        b43: budget::assemble_budget(Law::FourThirds, &profiles, grid, nu)?,
        b45: budget::assemble_budget(Law::FourFifths, &profiles, grid, nu)?,
        lee: lee::lee_report(&scalars, nu),
        wad: wad::wad_monitor(snapshots, nu)?,
    })
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    use crate::cutoff::{make_cutoff, CutoffKind};
    use crate::field::{ScalarField, SpectralField};
    use crate::grid::{WaveGrid, TWO_PI};
    use crate::ops;

    use super::*;

    fn snapshot_with_pressure(u: SpectralField, z: SpectralField) -> Snapshot {
        let mut eng = FftEngine::new(u.grid());
        let p = ops::pressure_recover(&u, &mut eng);
        Snapshot { u, z, t: 0.0, step_count: 0, p: Some(p) }
    }

    fn uniform_cutoff(grid: WaveGrid) -> CutoffField {
        let mut eng = FftEngine::new(grid);
        make_cutoff(grid, CutoffKind::Uniform, [0.0; 3], 0.0, &mut eng).unwrap()
    }

    fn shear_field(grid: WaveGrid) -> SpectralField {
        let mut u = SpectralField::zeros(grid);
        let plus = grid.flat_of_wavevector([0, 1, 0]);
        let minus = grid.flat_of_wavevector([0, -1, 0]);
        u.comp_mut(0)[plus] = Complex64::new(0.0, -0.5);
        u.comp_mut(0)[minus] = Complex64::new(0.0, 0.5);
        u
    }

    #[test]
    fn constant_field_has_zero_structure_functions() {
        let grid = WaveGrid::new(3, 16).unwrap();
        let mut u = SpectralField::zeros(grid);
        let k0 = grid.flat_of_wavevector([0, 0, 0]);
        u.comp_mut(0)[k0] = Complex64::new(0.7, 0.0);
        u.comp_mut(1)[k0] = Complex64::new(-0.3, 0.0);
        u.comp_mut(2)[k0] = Complex64::new(0.2, 0.0);
        let snaps = vec![snapshot_with_pressure(u, SpectralField::zeros(grid))];
        let psi = uniform_cutoff(grid);
        let lgrid = SeparationGrid::log_spaced(0.2, 1.5, 5, psi.separation_margin()).unwrap();
        let dirs = build_direction_set(32).unwrap();
        let sf = structure_functions(&snaps, &psi, &lgrid, &dirs, 0.1).unwrap();
        for j in 0..lgrid.ells().len() {
            assert!(sf.s0[j].abs() < 1e-10, "s0[{j}] = {}", sf.s0[j]);
            assert!(sf.spar[j].abs() < 1e-10, "spar[{j}] = {}", sf.spar[j]);
        }
    }

    #[test]
    fn uniform_cutoff_zeroes_gradient_columns() {
        let grid = WaveGrid::new(3, 16).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(91);
        let snaps: Vec<Snapshot> = (0..2)
            .map(|_| {
                let u = SpectralField::random_divergence_free(grid, 3, 0.4, &mut rng);
                let z = SpectralField::random_divergence_free(grid, 2, 0.2, &mut rng);
                snapshot_with_pressure(u, z)
            })
            .collect();
        let psi = uniform_cutoff(grid);
        let lgrid = SeparationGrid::log_spaced(0.2, 1.2, 4, psi.separation_margin()).unwrap();
        let dirs = build_direction_set(24).unwrap();
        let nu = 0.05;

        let b43 = khm_budget_43(&snaps, &psi, &lgrid, &dirs, nu).unwrap();
        for j in 0..lgrid.ells().len() {
            assert_eq!(b43.press1[j], 0.0);
            assert_eq!(b43.visc_g[j], 0.0);
            assert_eq!(b43.visc_q[j], 0.0);
            assert_eq!(b43.flux_h[j], 0.0);
            assert_eq!(b43.flux_f[j], 0.0);
            let reduced = b43.s0[j] - (b43.visc_gamma[j] + b43.noise[j] + b43.press2[j]);
            let scale = b43.s0[j].abs().max(1.0);
            assert!((b43.residual[j] - reduced).abs() <= 1e-12 * scale);
        }

        let b45 = khm_budget_45(&snaps, &psi, &lgrid, &dirs, nu).unwrap();
        for j in 0..lgrid.ells().len() {
            assert_eq!(b45.press1[j], 0.0);
            assert_eq!(b45.visc_g[j], 0.0);
            assert_eq!(b45.visc_q[j], 0.0);
            assert_eq!(b45.flux_h[j], 0.0);
            assert_eq!(b45.flux_f[j], 0.0);
        }

        let lee = lee_residual(&snaps, &psi, nu).unwrap();
        assert_eq!(lee.lap_term, 0.0);
        assert_eq!(lee.transport_term, 0.0);
        let m = snaps.len() as f64;
        let lhs: f64 = snaps.iter().map(|s| 2.0 * nu * s.u.grad_norm_sq()).sum::<f64>() / m;
        let inp: f64 = snaps.iter().map(|s| 2.0 * s.u.inner(&s.z)).sum::<f64>() / m;
        assert!((lee.lhs - lhs).abs() <= 1e-9 * lhs.abs());
        assert!((lee.input_term - inp).abs() <= 1e-9 * inp.abs().max(1e-12));
        assert!((lee.residual - (lhs - inp)).abs() <= 1e-9 * (lhs.abs() + inp.abs()));
    }

    #[test]
    fn shear_field_correlation_profiles() {
        let grid = WaveGrid::new(3, 16).unwrap();
        let u = shear_field(grid);
        let snaps = vec![snapshot_with_pressure(u, SpectralField::zeros(grid))];
        let psi = uniform_cutoff(grid);
        let ells = vec![0.3, 0.7, 1.1, 1.6];
        let lgrid = SeparationGrid::from_values(ells.clone(), psi.separation_margin()).unwrap();
        let dirs = build_direction_set(64).unwrap();
        let vol = TWO_PI.powi(3);

        let g = gamma_profiles(&snaps, &psi, &lgrid, &dirs).unwrap();
        assert!((g.gamma[0] - 0.5 * vol).abs() <= 1e-10 * vol, "gamma(0) = {}", g.gamma[0]);
        assert_eq!(g.gamma_prime[0], 0.0);
        assert_eq!(g.gamma_tilde[0], 0.0);
        for (j, &ell) in ells.iter().enumerate() {
            let same_quad = 0.5 * vol * dirs.average(|n| (ell * n[1]).cos());
            assert!(
                (g.gamma[j + 1] - same_quad).abs() <= 1e-12 * vol,
                "gamma({ell}) = {} vs quadrature {same_quad}",
                g.gamma[j + 1]
            );
            let analytic = 0.5 * vol * ell.sin() / ell;
            assert!(
                (g.gamma[j + 1] - analytic).abs() <= 3e-3 * vol,
                "gamma({ell}) = {} vs sinc {analytic}",
                g.gamma[j + 1]
            );
            let deriv_quad = -0.5 * vol * dirs.average(|n| n[1] * (ell * n[1]).sin());
            assert!(
                (g.gamma_prime[j + 1] - deriv_quad).abs() <= 1e-12 * vol,
                "gamma'({ell}) = {} vs quadrature {deriv_quad}",
                g.gamma_prime[j + 1]
            );
            let tilde_quad = -0.5 * vol * dirs.average(|n| n[0] * n[0] * n[1] * (ell * n[1]).sin());
            assert!(
                (g.gamma_tilde[j + 1] - tilde_quad).abs() <= 1e-12 * vol,
                "gamma~({ell}) = {} vs quadrature {tilde_quad}",
                g.gamma_tilde[j + 1]
            );
        }

        let sf = structure_functions(&snaps, &psi, &lgrid, &dirs, 1.0).unwrap();
        for j in 0..ells.len() {
            assert!(sf.s0[j].abs() <= 1e-10 * vol);
            assert!(sf.spar[j].abs() <= 1e-10 * vol);
        }
        assert!((sf.eps_local - 0.5).abs() <= 1e-10);

        let w = wad_monitor(&snaps, 1.0).unwrap();
        assert!((w.lambda_t.value - 1.0).abs() <= 1e-12);
        assert!((w.nu_energy.value - 0.5 * vol).abs() <= 1e-10 * vol);

        let zsnaps: Vec<Snapshot> = (0..2)
            .map(|_| Snapshot {
                u: SpectralField::zeros(grid),
                z: SpectralField::zeros(grid),
                t: 0.0,
                step_count: 0,
                p: Some(ScalarField::zeros(grid)),
            })
            .collect();
        let wz = wad_monitor(&zsnaps, 0.3).unwrap();
        assert_eq!(wz.nu_energy.value, 0.0);
        assert_eq!(wz.dissipation.value, 0.0);
        assert_eq!(wz.input.value, 0.0);
        assert_eq!(wz.lambda_t.value, 0.0);
        assert_eq!(wz.ell_nu.value, 0.0);
    }

    #[test]
    fn fit_inverts_synthetic_slopes() {
        let ells: Vec<f64> = (1..=10).map(|i| 0.1 * i as f64).collect();
        let grid = SeparationGrid::from_values(ells.clone(), f64::INFINITY).unwrap();
        let s0: Vec<f64> = ells.iter().map(|l| -(4.0 / 3.0) * 2.5 * l).collect();
        let spar: Vec<f64> = ells.iter().map(|l| -(4.0 / 5.0) * 1.0 * l).collect();
        let profile = SFProfile {
            grid: grid.clone(),
            s0,
            spar,
            s0_stderr: vec![0.0; ells.len()],
            spar_stderr: vec![0.0; ells.len()],
            eps_local: 2.0,
        };
        let fit = scaling_fit(&profile, [0.05, 1.05]).unwrap();
        assert!((fit.eps0 - 2.5).abs() <= 1e-10, "eps0 = {}", fit.eps0);
        assert!((fit.eps_par - 1.0).abs() <= 1e-10, "eps_par = {}", fit.eps_par);
        assert!((fit.ratio0 - 1.25).abs() <= 1e-10);
        assert!((fit.ratio_par - 0.5).abs() <= 1e-10);
        assert!(fit.rms0 <= 1e-12);
        assert_eq!(fit.points, ells.len());

        let zero = SFProfile {
            grid: grid.clone(),
            s0: vec![0.0; ells.len()],
            spar: vec![0.0; ells.len()],
            s0_stderr: vec![0.0; ells.len()],
            spar_stderr: vec![0.0; ells.len()],
            eps_local: 0.0,
        };
        let zfit = scaling_fit(&zero, [0.05, 1.05]).unwrap();
        assert_eq!(zfit.eps0, 0.0);
        assert_eq!(zfit.ratio0, 0.0);

        assert!(scaling_fit(&profile, [0.05, 0.25]).is_err());

        let c = 3.7;
        let scaled = SFProfile {
            grid: SeparationGrid::from_values(
                ells.iter().map(|l| c * l).collect(),
                f64::INFINITY,
            )
            .unwrap(),
            s0: profile.s0.clone(),
            spar: profile.spar.clone(),
            s0_stderr: vec![0.0; ells.len()],
            spar_stderr: vec![0.0; ells.len()],
            eps_local: 2.0,
        };
        let cfit = scaling_fit(&scaled, [0.05 * c, 1.05 * c]).unwrap();
        assert!(
            (cfit.eps0 - fit.eps0 / c).abs() <= 1e-12 * fit.eps0,
            "rescaled eps0 = {} vs {}",
            cfit.eps0,
            fit.eps0 / c
        );
    }

    #[test]
    fn direction_set_and_input_validation() {
        assert!(build_direction_set(8).is_err());
        let dirs = build_direction_set(64).unwrap();
        let m = dirs.second_moment();
        for a in 0..3 {
            for b in 0..3 {
                let want = if a == b { 1.0 / 3.0 } else { 0.0 };
                assert!((m[a][b] - want).abs() <= 1e-3, "moment[{a}][{b}] = {}", m[a][b]);
            }
        }

        let grid = WaveGrid::new(3, 16).unwrap();
        let psi = uniform_cutoff(grid);
        let lgrid = SeparationGrid::log_spaced(0.2, 1.0, 3, psi.separation_margin()).unwrap();
        assert!(profiles_for(&[], &psi, &lgrid, &dirs).is_err());

        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let u = SpectralField::random_divergence_free(grid, 2, 0.3, &mut rng);
        let no_pressure = Snapshot {
            u: u.clone(),
            z: SpectralField::zeros(grid),
            t: 0.0,
            step_count: 0,
            p: None,
        };
        let err = profiles_for(&[no_pressure], &psi, &lgrid, &dirs).unwrap_err();
        assert!(matches!(err, TurbError::MissingPressure));

        let other = WaveGrid::new(3, 32).unwrap();
        let stranger = Snapshot {
            u: SpectralField::zeros(other),
            z: SpectralField::zeros(other),
            t: 0.0,
            step_count: 0,
            p: Some(ScalarField::zeros(other)),
        };
        let err = profiles_for(&[stranger], &psi, &lgrid, &dirs).unwrap_err();
        assert!(matches!(err, TurbError::GridMismatch(_)));

        let mut eng = FftEngine::new(grid);
        let bump = make_cutoff(grid, CutoffKind::Bump, [3.1, 2.6, 3.4], 2.2, &mut eng).unwrap();
        let wide = SeparationGrid::from_values(vec![0.5, 1.2], 2.0).unwrap();
        let snap = snapshot_with_pressure(u, SpectralField::zeros(grid));
        assert!(profiles_for(&[snap], &bump, &wide, &dirs).is_err());
    }

    #[test]
    fn flux_identity_residuals() {
        let grid = WaveGrid::new(3, 16).unwrap();
        let mut eng = FftEngine::new(grid);
        let bump = make_cutoff(grid, CutoffKind::Bump, [3.1, 2.6, 3.4], 2.2, &mut eng).unwrap();
        let h = [0.2, 0.1, -0.3];

        let zero = SpectralField::zeros(grid);
        assert_eq!(flux_identity_check(&zero, &bump, h, 1e-3), 0.0);

        let psi = uniform_cutoff(grid);
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let small = SpectralField::random_divergence_free(grid, 1, 0.05, &mut rng);
        let r = flux_identity_check(&small, &psi, h, 1e-3);
        assert!(r <= 1e-8, "uniform-cutoff residual {r}");

        let two_mode = SpectralField::random_divergence_free(grid, 2, 0.2, &mut rng);
        let r1 = flux_identity_check(&two_mode, &bump, h, 2e-2);
        let r2 = flux_identity_check(&two_mode, &bump, h, 1e-2);
        let ratio = r1 / r2;
        assert!((3.6..=4.4).contains(&ratio), "halving ratio {ratio}");
    }
}
