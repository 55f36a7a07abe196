//! Global dissipation monitors and integrability monitors.

use crate::error::{Result, TurbError};
use crate::fft::FftEngine;
use crate::integrator::Snapshot;
use crate::stats::series_mean_stderr;

/// A snapshot-mean quantity with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct ValueErr {
    pub value: f64,
    pub stderr: f64,
}

fn value_err(series: &[f64]) -> ValueErr {
    let (value, stderr, _) = series_mean_stderr(series);
    ValueErr { value, stderr }
}

/// Viscosity-weighted energy, dissipation, noise input, Taylor microscale
/// and the dissipative length sqrt(nu * avg energy). Dissipation and input
/// agree within error on a stationary window.
#[derive(Debug, Clone, Copy)]
pub struct WadReport {
    pub nu_energy: ValueErr,
    pub dissipation: ValueErr,
    pub input: ValueErr,
    pub lambda_t: ValueErr,
    pub ell_nu: ValueErr,
    pub snapshots: usize,
}

pub fn wad_monitor(snapshots: &[Snapshot], nu: f64) -> Result<WadReport> {
    if snapshots.is_empty() {
        return Err(TurbError::InvalidConfig("monitor needs at least one snapshot".into()));
    }
    let energy: Vec<f64> = snapshots.iter().map(|s| s.u.l2_norm_sq()).collect();
    let grad: Vec<f64> = snapshots.iter().map(|s| s.u.grad_norm_sq()).collect();
    let inj: Vec<f64> = snapshots.iter().map(|s| s.u.inner(&s.z)).collect();

    let (em, ee, ei) = series_mean_stderr(&energy);
    let (gm, ge, gi) = series_mean_stderr(&grad);

    // lambda_T = sqrt(avg energy / avg gradient); error by linear
    // propagation with the cross term, since the two series co-fluctuate.
    let lambda_t = if em > 0.0 && gm > 0.0 {
        let r = em / gm;
        let n = energy.len() as f64;
        let cov = if energy.len() > 1 {
            let mut c = 0.0;
            for (x, y) in energy.iter().zip(&grad) {
                c += (x - em) * (y - gm);
            }
            c / (n - 1.0) * ei.max(gi).max(1.0) / n
        } else {
            0.0
        };
        let var_r = (ee * ee + r * r * ge * ge - 2.0 * r * cov) / (gm * gm);
        let lam = r.sqrt();
        ValueErr { value: lam, stderr: (var_r.max(0.0) / (4.0 * r)).sqrt() }
    } else {
        ValueErr { value: 0.0, stderr: 0.0 }
    };
    let ell_nu = if em > 0.0 {
        let v = (nu * em).sqrt();
        ValueErr { value: v, stderr: nu * ee / (2.0 * v) }
    } else {
        ValueErr { value: 0.0, stderr: 0.0 }
    };

    Ok(WadReport {
        nu_energy: ValueErr { value: nu * em, stderr: nu * ee },
        dissipation: ValueErr { value: nu * gm, stderr: nu * ge },
        input: value_err(&inj),
        lambda_t,
        ell_nu,
        snapshots: snapshots.len(),
    })
}

/// Integrability monitors for the standing assumptions: cubed velocity
/// norm, cubed increment norm at a reference separation (averaged over the
/// three axes), and the 3/2 pressure norm.
#[derive(Debug, Clone, Copy)]
pub struct MonitorReport {
    pub u_l3: ValueErr,
    pub incr_l3: ValueErr,
    pub p_l32: ValueErr,
    pub ell_ref: f64,
}

pub fn assumption_monitors(snapshots: &[Snapshot], ell_ref: f64) -> Result<MonitorReport> {
    if snapshots.is_empty() {
        return Err(TurbError::InvalidConfig("monitor needs at least one snapshot".into()));
    }
    let grid = snapshots[0].u.grid();
    let mut eng = FftEngine::new(grid);
    let cell = grid.cell_volume();
    let mut u_l3 = Vec::with_capacity(snapshots.len());
    let mut incr_l3 = Vec::with_capacity(snapshots.len());
    let mut p_l32 = Vec::with_capacity(snapshots.len());
    for s in snapshots {
        let phys = s.u.to_physical(&mut eng);
        let npts = phys[0].len();
        let mut sum3 = 0.0;
        for x in 0..npts {
            let sq: f64 = phys.iter().map(|c| c[x] * c[x]).sum();
            sum3 += sq.powf(1.5);
        }
        u_l3.push(sum3 * cell);

        let mut incr = 0.0;
        for axis in 0..3 {
            let mut h = [0.0; 3];
            h[axis] = ell_ref;
            let mut shifted = s.u.clone();
            shifted.shift(h);
            let sphys = shifted.to_physical(&mut eng);
            let mut acc = 0.0;
            for x in 0..npts {
                let sq: f64 = (0..3)
                    .map(|c| {
                        let d = sphys[c][x] - phys[c][x];
                        d * d
                    })
                    .sum();
                acc += sq.powf(1.5);
            }
            incr += acc * cell;
        }
        incr_l3.push(incr / 3.0);

        let p = s.pressure()?.to_physical(&mut eng);
        p_l32.push(p.iter().map(|v| v.abs().powf(1.5)).sum::<f64>() * cell);
    }
    Ok(MonitorReport {
        u_l3: value_err(&u_l3),
        incr_l3: value_err(&incr_l3),
        p_l32: value_err(&p_l32),
        ell_ref,
    })
}
