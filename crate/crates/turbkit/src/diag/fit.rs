//! Linear-range slope fits for the structure-function profiles.

use crate::error::{Result, TurbError};

use super::sf::SFProfile;

/// Slopes fitted through the origin over the window, converted to
/// dissipation estimates via S0 = -(4/3) eps0 ell and Spar = -(4/5)
/// eps_par ell, with the rms misfit and the ratio of each estimate to the
/// profile's localized dissipation.
#[derive(Debug, Clone, Copy)]
pub struct FitReport {
    pub eps0: f64,
    pub eps_par: f64,
    pub slope0: f64,
    pub slope_par: f64,
    pub ratio0: f64,
    pub ratio_par: f64,
    pub rms0: f64,
    pub rms_par: f64,
    pub points: usize,
}

fn slope_through_origin(ells: &[f64], vals: &[f64]) -> (f64, f64) {
    let num: f64 = ells.iter().zip(vals).map(|(l, v)| l * v).sum();
    let den: f64 = ells.iter().map(|l| l * l).sum();
    let slope = num / den;
    let mut ss = 0.0;
    for (l, v) in ells.iter().zip(vals) {
        let d = v - slope * l;
        ss += d * d;
    }
    (slope, (ss / ells.len() as f64).sqrt())
}

pub fn scaling_fit(profile: &SFProfile, window: [f64; 2]) -> Result<FitReport> {
    let mut ells = Vec::new();
    let mut s0 = Vec::new();
    let mut spar = Vec::new();
    for (j, &l) in profile.grid.ells().iter().enumerate() {
        if l >= window[0] && l <= window[1] {
            ells.push(l);
            s0.push(profile.s0[j]);
            spar.push(profile.spar[j]);
        }
    }
    if ells.len() < 3 {
        return Err(TurbError::InvalidConfig(format!(
            "fit window [{}, {}] holds {} grid points, need at least 3",
            window[0],
            window[1],
            ells.len()
        )));
    }
    let (slope0, rms0) = slope_through_origin(&ells, &s0);
    let (slope_par, rms_par) = slope_through_origin(&ells, &spar);
    let eps0 = -0.75 * slope0;
    let eps_par = -1.25 * slope_par;
    let ratio = |eps: f64| if profile.eps_local != 0.0 { eps / profile.eps_local } else { 0.0 };
    Ok(FitReport {
        eps0,
        eps_par,
        slope0,
        slope_par,
        ratio0: ratio(eps0),
        ratio_par: ratio(eps_par),
        rms0,
        rms_par,
        points: ells.len(),
    })
}
