//! Third-order structure functions and two-point correlation profiles.

use crate::lgrid::SeparationGrid;
use crate::stats::series_mean_stderr;

use super::terms::TermProfiles;

/// Localized third-order structure functions on the separation grid.
///
/// `s0[j]` and `spar[j]` are snapshot means at `grid.ells()[j]`; the stderr
/// columns are autocorrelation-corrected. `eps_local` is the localized
/// dissipation nu * avg int psi |grad u|^2 / int psi, the reference value
/// the fitted slopes are compared against.
#[derive(Debug, Clone)]
pub struct SFProfile {
    pub grid: SeparationGrid,
    pub s0: Vec<f64>,
    pub spar: Vec<f64>,
    pub s0_stderr: Vec<f64>,
    pub spar_stderr: Vec<f64>,
    pub eps_local: f64,
}

/// Trace correlation Gamma, its exact separation derivative, and the
/// directionally projected variant, on the grid augmented with zero.
#[derive(Debug, Clone)]
pub struct GammaProfiles {
    pub taus: Vec<f64>,
    pub gamma: Vec<f64>,
    pub gamma_prime: Vec<f64>,
    pub gamma_tilde: Vec<f64>,
    pub gamma_stderr: Vec<f64>,
}

fn column_stats(
    profiles: &[TermProfiles],
    rows: std::ops::Range<usize>,
    pick: fn(&super::dots::TermSample) -> f64,
) -> (Vec<f64>, Vec<f64>) {
    let mut mean = Vec::with_capacity(rows.len());
    let mut err = Vec::with_capacity(rows.len());
    for j in rows {
        let series: Vec<f64> = profiles.iter().map(|p| pick(&p.rows[j])).collect();
        let (m, e, _) = series_mean_stderr(&series);
        mean.push(m);
        err.push(e);
    }
    (mean, err)
}

pub(super) fn sf_profile(
    profiles: &[TermProfiles],
    grid: &SeparationGrid,
    nu: f64,
    psi_integral: f64,
) -> SFProfile {
    let rows = 1..profiles[0].rows.len();
    let (s0, s0_stderr) = column_stats(profiles, rows.clone(), |s| s.s0);
    let (spar, spar_stderr) = column_stats(profiles, rows, |s| s.spar);
    let grad: Vec<f64> = profiles.iter().map(|p| p.scalars.psi_gradsq).collect();
    let (grad_mean, _, _) = series_mean_stderr(&grad);
    SFProfile {
        grid: grid.clone(),
        s0,
        spar,
        s0_stderr,
        spar_stderr,
        eps_local: nu * grad_mean / psi_integral,
    }
}

pub(super) fn gamma_profile(profiles: &[TermProfiles]) -> GammaProfiles {
    let rows = 0..profiles[0].rows.len();
    let (gamma, gamma_stderr) = column_stats(profiles, rows.clone(), |s| s.gamma);
    let (gamma_prime, _) = column_stats(profiles, rows.clone(), |s| s.gamma_d);
    let (gamma_tilde, _) = column_stats(profiles, rows, |s| s.gamma_t);
    GammaProfiles {
        taus: profiles[0].taus.clone(),
        gamma,
        gamma_prime,
        gamma_tilde,
        gamma_stderr,
    }
}
