//! Localized stationary energy balance.

use crate::stats::series_mean_stderr;

use super::terms::SnapshotScalars;

/// Weighted energy balance: twice the localized dissipation against the
/// cutoff-Laplacian term, the transport term (kinetic plus pressure work
/// against grad psi), and twice the noise input. With a uniform cutoff the
/// first two right-hand terms are identically zero and the balance reduces
/// to the global one.
#[derive(Debug, Clone, Copy)]
pub struct LEEReport {
    pub lhs: f64,
    pub lap_term: f64,
    pub transport_term: f64,
    pub input_term: f64,
    pub residual: f64,
    pub stderr: f64,
}

impl LEEReport {
    /// Largest magnitude among the balance entries, the scale residuals
    /// are judged against.
    pub fn max_term(&self) -> f64 {
        self.lhs
            .abs()
            .max(self.lap_term.abs())
            .max(self.transport_term.abs())
            .max(self.input_term.abs())
    }
}

pub(super) fn lee_report(scalars: &[SnapshotScalars], nu: f64) -> LEEReport {
    let series = |pick: fn(&SnapshotScalars, f64) -> f64| -> f64 {
        let vals: Vec<f64> = scalars.iter().map(|s| pick(s, nu)).collect();
        series_mean_stderr(&vals).0
    };
    let lhs = series(|s, nu| 2.0 * nu * s.psi_gradsq);
    let lap_term = series(|s, nu| nu * s.lee_lap);
    let transport_term = series(|s, _| s.lee_adv + 2.0 * s.lee_pr);
    let input_term = series(|s, _| 2.0 * s.lee_inj);
    let res_series: Vec<f64> = scalars
        .iter()
        .map(|s| {
            2.0 * nu * s.psi_gradsq - nu * s.lee_lap - (s.lee_adv + 2.0 * s.lee_pr)
                - 2.0 * s.lee_inj
        })
        .collect();
    let (residual, stderr, _) = series_mean_stderr(&res_series);
    LEEReport { lhs, lap_term, transport_term, input_term, residual, stderr }
}
