use crate::error::{Result, TurbError};
use crate::lgrid::{cumulative_moment_integral, SeparationGrid};
use crate::stats::series_mean_stderr;

use super::terms::TermProfiles;

/// Which third-order law the budget decomposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Law {
    FourThirds,
    FourFifths,
}

impl Law {
    pub fn name(&self) -> &'static str {
        match self {
            Law::FourThirds => "four_thirds",
            Law::FourFifths => "four_fifths",
        }
    }
}

/// Zero-separation identities reported alongside the budget.
///
/// The pressure pair P1(0), P2(0) satisfies P2(0) = -P1(0) exactly
/// (integration by parts against div u = 0); the tilded-to-barred ratios
/// approach 1/3 as the separation vanishes, so they are sampled at the
/// smallest grid point.
#[derive(Debug, Clone, Copy)]
pub struct LimitChecks {
    pub p1_origin: f64,
    pub p2_origin: f64,
    pub p2_identity_gap: f64,
    pub ell_min: f64,
    pub ratio_z: RatioCheck,
    pub ratio_p1: RatioCheck,
    pub ratio_g: RatioCheck,
    pub ratio_h: RatioCheck,
}

/// Ratio of two snapshot means with a propagated standard error. The
/// numerator and denominator series share snapshots, so the covariance
/// term carries most of the cancellation.
#[derive(Debug, Clone, Copy)]
pub struct RatioCheck {
    pub value: f64,
    pub stderr: f64,
}

fn mean_ratio(a: &[f64], b: &[f64]) -> RatioCheck {
    let (am, ae, ai) = series_mean_stderr(a);
    let (bm, be, bi) = series_mean_stderr(b);
    if bm == 0.0 {
        return RatioCheck { value: f64::NAN, stderr: f64::NAN };
    }
    let r = am / bm;
    if a.len() < 2 {
        return RatioCheck { value: r, stderr: f64::INFINITY };
    }
    let n = a.len() as f64;
    let mut cov = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - am) * (y - bm);
    }
    cov /= n - 1.0;
    let cov_mean = cov * ai.max(bi).max(1.0) / n;
    let var = (ae * ae + r * r * be * be - 2.0 * r * cov_mean) / (bm * bm);
    RatioCheck { value: r, stderr: var.max(0.0).sqrt() }
}

/// Integrated scale-by-scale balance on the separation grid.
///
/// Every column is a snapshot mean; `residual` is lhs minus the sum of the
/// other columns and `stderr` is its autocorrelation-corrected standard
/// error, both computed on the per-snapshot residual series (the identity
/// is linear in the time average, so differencing per snapshot is exact).
#[derive(Debug, Clone)]
pub struct KHMBudget {
    pub law: Law,
    pub grid: SeparationGrid,
    pub s0: Vec<f64>,
    pub spar: Vec<f64>,
    pub visc_gamma: Vec<f64>,
    pub noise: Vec<f64>,
    pub visc_g: Vec<f64>,
    pub visc_q: Vec<f64>,
    pub press1: Vec<f64>,
    pub press2: Vec<f64>,
    pub flux_h: Vec<f64>,
    pub flux_f: Vec<f64>,
    pub residual: Vec<f64>,
    pub stderr: Vec<f64>,
    pub limits: LimitChecks,
}

/// Budget columns of a single snapshot, one entry per positive separation.
struct SnapshotColumns {
    s0: Vec<f64>,
    spar: Vec<f64>,
    visc_gamma: Vec<f64>,
    noise: Vec<f64>,
    visc_g: Vec<f64>,
    visc_q: Vec<f64>,
    press1: Vec<f64>,
    press2: Vec<f64>,
    flux_h: Vec<f64>,
    flux_f: Vec<f64>,
    residual: Vec<f64>,
}

fn columns_43(pr: &TermProfiles, nu: f64) -> SnapshotColumns {
    let taus = &pr.taus;
    let n = taus.len() - 1;
    let i2z = cumulative_moment_integral(taus, &pr.series(|s| s.z_bar), 2);
    let i2g = cumulative_moment_integral(taus, &pr.series(|s| s.g_bar), 2);
    let i2p1 = cumulative_moment_integral(taus, &pr.series(|s| s.p1_bar), 2);
    let i2p2 = cumulative_moment_integral(taus, &pr.series(|s| s.p2_bar), 2);
    let i2h = cumulative_moment_integral(taus, &pr.series(|s| s.h_bar), 2);
    let i2f = cumulative_moment_integral(taus, &pr.series(|s| s.f_bar), 2);

    let mut c = SnapshotColumns {
        s0: Vec::with_capacity(n),
        spar: vec![0.0; n],
        visc_gamma: Vec::with_capacity(n),
        noise: Vec::with_capacity(n),
        visc_g: Vec::with_capacity(n),
        visc_q: Vec::with_capacity(n),
        press1: Vec::with_capacity(n),
        press2: Vec::with_capacity(n),
        flux_h: Vec::with_capacity(n),
        flux_f: Vec::with_capacity(n),
        residual: Vec::with_capacity(n),
    };
    for j in 1..=n {
        let ell = taus[j];
        let el3 = ell * ell * ell;
        let s = &pr.rows[j];
        let lhs = -s.s0 / ell;
        let visc_gamma = 4.0 * nu * s.gamma_d / ell;
        let noise = 2.0 / el3 * i2z[j];
        let visc_g = 2.0 * nu / el3 * i2g[j];
        let visc_q = 4.0 * nu * s.q_bar / ell;
        let press1 = 2.0 / el3 * i2p1[j];
        let press2 = -2.0 / el3 * i2p2[j];
        let flux_h = 2.0 / el3 * i2h[j];
        let flux_f = 1.0 / el3 * i2f[j];
        let rhs =
            visc_gamma + noise + visc_g + visc_q + press1 + press2 + flux_h + flux_f;
        c.s0.push(lhs);
        c.visc_gamma.push(visc_gamma);
        c.noise.push(noise);
        c.visc_g.push(visc_g);
        c.visc_q.push(visc_q);
        c.press1.push(press1);
        c.press2.push(press2);
        c.flux_h.push(flux_h);
        c.flux_f.push(flux_f);
        c.residual.push(lhs - rhs);
    }
    c
}

fn columns_45(pr: &TermProfiles, nu: f64) -> SnapshotColumns {
    let taus = &pr.taus;
    let n = taus.len() - 1;
    let i3s0 = cumulative_moment_integral(taus, &pr.series(|s| s.s0), 3);
    let i3q23 = cumulative_moment_integral(taus, &pr.series(|s| s.q2_t + s.q3_t), 3);
    let i4z = cumulative_moment_integral(taus, &pr.series(|s| s.z_t), 4);
    let i4g = cumulative_moment_integral(taus, &pr.series(|s| s.g_t), 4);
    let i4p1 = cumulative_moment_integral(taus, &pr.series(|s| s.p1_t), 4);
    let i4p2 = cumulative_moment_integral(taus, &pr.series(|s| s.p2_bar), 4);
    let i1ball = cumulative_moment_integral(taus, &pr.series(|s| s.ball), 1);
    let i4h = cumulative_moment_integral(taus, &pr.series(|s| s.h_t), 4);
    let i4f = cumulative_moment_integral(taus, &pr.series(|s| s.f_t), 4);

    let mut c = SnapshotColumns {
        s0: Vec::with_capacity(n),
        spar: Vec::with_capacity(n),
        visc_gamma: Vec::with_capacity(n),
        noise: Vec::with_capacity(n),
        visc_g: Vec::with_capacity(n),
        visc_q: Vec::with_capacity(n),
        press1: Vec::with_capacity(n),
        press2: Vec::with_capacity(n),
        flux_h: Vec::with_capacity(n),
        flux_f: Vec::with_capacity(n),
        residual: Vec::with_capacity(n),
    };
    for j in 1..=n {
        let ell = taus[j];
        let el5 = ell.powi(5);
        let s = &pr.rows[j];
        let lhs = -s.spar / ell;
        let s0 = -2.0 / el5 * i3s0[j];
        let visc_gamma = 4.0 * nu * s.gamma_t / ell;
        let visc_q = 4.0 * nu * s.q1_t / ell - 4.0 * nu / el5 * i3q23[j];
        let noise = 2.0 / el5 * i4z[j];
        let visc_g = 2.0 * nu / el5 * i4g[j];
        let press1 = 2.0 / el5 * i4p1[j];
        let press2 = -2.0 / el5 * i4p2[j] - 4.0 / el5 * i1ball[j];
        let flux_h = 2.0 / el5 * i4h[j];
        let flux_f = 1.0 / el5 * i4f[j];
        let rhs = s0
            + visc_gamma
            + noise
            + visc_g
            + visc_q
            + press1
            + press2
            + flux_h
            + flux_f;
        c.s0.push(s0);
        c.spar.push(lhs);
        c.visc_gamma.push(visc_gamma);
        c.noise.push(noise);
        c.visc_g.push(visc_g);
        c.visc_q.push(visc_q);
        c.press1.push(press1);
        c.press2.push(press2);
        c.flux_h.push(flux_h);
        c.flux_f.push(flux_f);
        c.residual.push(lhs - rhs);
    }
    c
}

fn mean_of(series: &[Vec<f64>], j: usize) -> f64 {
    series.iter().map(|v| v[j]).sum::<f64>() / series.len() as f64
}

/// Assemble the budget from per-snapshot term profiles.
pub fn assemble_budget(
    law: Law,
    profiles: &[TermProfiles],
    grid: &SeparationGrid,
    nu: f64,
) -> Result<KHMBudget> {
    if profiles.is_empty() {
        return Err(TurbError::InvalidConfig(
            "budget needs at least one snapshot".into(),
        ));
    }
    let n = grid.ells().len();
    let cols: Vec<SnapshotColumns> = profiles
        .iter()
        .map(|p| match law {
            Law::FourThirds => columns_43(p, nu),
            Law::FourFifths => columns_45(p, nu),
        })
        .collect();

    let collect = |pick: fn(&SnapshotColumns) -> &Vec<f64>| -> Vec<Vec<f64>> {
        cols.iter().map(|c| pick(c).clone()).collect()
    };
    let residual_series = collect(|c| &c.residual);
    let mut residual = Vec::with_capacity(n);
    let mut stderr = Vec::with_capacity(n);
    for j in 0..n {
        let series: Vec<f64> = residual_series.iter().map(|v| v[j]).collect();
        let (mean, se, _) = series_mean_stderr(&series);
        residual.push(mean);
        stderr.push(se);
    }

    let mean_col = |pick: fn(&SnapshotColumns) -> &Vec<f64>| -> Vec<f64> {
        let series = collect(pick);
        (0..n).map(|j| mean_of(&series, j)).collect()
    };

    // Zero-separation identities averaged over snapshots; ratio checks at
    // the smallest separation.
    let m = profiles.len() as f64;
    let p1_origin = profiles.iter().map(|p| p.rows[0].p1_bar).sum::<f64>() / m;
    let p2_origin = profiles.iter().map(|p| p.rows[0].p2_bar).sum::<f64>() / m;
    let p2_identity_gap =
        profiles.iter().map(|p| (p.rows[0].p2_bar + p.rows[0].p1_bar).abs()).sum::<f64>() / m;
    let ratio = |tilded: fn(&super::dots::TermSample) -> f64,
                 barred: fn(&super::dots::TermSample) -> f64| {
        let t: Vec<f64> = profiles.iter().map(|p| tilded(&p.rows[1])).collect();
        let b: Vec<f64> = profiles.iter().map(|p| barred(&p.rows[1])).collect();
        mean_ratio(&t, &b)
    };
    let limits = LimitChecks {
        p1_origin,
        p2_origin,
        p2_identity_gap,
        ell_min: grid.ells()[0],
        ratio_z: ratio(|s| s.z_t, |s| s.z_bar),
        ratio_p1: ratio(|s| s.p1_t, |s| s.p1_bar),
        ratio_g: ratio(|s| s.g_t, |s| s.g_bar),
        ratio_h: ratio(|s| s.h_t, |s| s.h_bar),
    };

    Ok(KHMBudget {
        law,
        grid: grid.clone(),
        s0: mean_col(|c| &c.s0),
        spar: mean_col(|c| &c.spar),
        visc_gamma: mean_col(|c| &c.visc_gamma),
        noise: mean_col(|c| &c.noise),
        visc_g: mean_col(|c| &c.visc_g),
        visc_q: mean_col(|c| &c.visc_q),
        press1: mean_col(|c| &c.press1),
        press2: mean_col(|c| &c.press2),
        flux_h: mean_col(|c| &c.flux_h),
        flux_f: mean_col(|c| &c.flux_f),
        residual,
        stderr,
        limits,
    })
}

impl KHMBudget {
    /// Largest column magnitude at each separation, the scale against which
    /// the closure residual is judged.
    pub fn max_term(&self, j: usize) -> f64 {
        [
            self.s0[j],
            self.spar[j],
            self.visc_gamma[j],
            self.noise[j],
            self.visc_g[j],
            self.visc_q[j],
            self.press1[j],
            self.press2[j],
            self.flux_h[j],
            self.flux_f[j],
        ]
        .iter()
        .fold(0.0f64, |a, v| a.max(v.abs()))
    }
}
