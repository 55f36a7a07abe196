use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Result, TurbError};
use crate::fft::FftEngine;
use crate::field::{ScalarField, SpectralField};
use crate::forcing::{build_noise_spectrum, ou_invariant_field, ou_step_field, NoiseSpectrum};
use crate::grid::WaveGrid;
use crate::ops;
use crate::stats::series_mean_stderr;

/// Everything needed to reproduce a simulation run.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub nu: f64,
    pub n: usize,
    pub shell: [i64; 2],
    pub epsilon: f64,
    pub drift_scale: f64,
    pub dt: f64,
    pub t_burnin: f64,
    pub t_sample: f64,
    pub snapshot_stride: usize,
    pub seed: u64,
    pub cfl_factor: f64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) {
            return Err(TurbError::InvalidConfig(format!(
                "viscosity {} must be positive",
                self.nu
            )));
        }
        if !(self.dt > 0.0) {
            return Err(TurbError::InvalidConfig(format!(
                "time step {} must be positive",
                self.dt
            )));
        }
        if self.t_burnin < 0.0 || self.t_sample < 0.0 {
            return Err(TurbError::InvalidConfig(
                "burn-in and sampling durations must be nonnegative".into(),
            ));
        }
        if self.snapshot_stride == 0 {
            return Err(TurbError::InvalidConfig(
                "snapshot stride must be at least 1".into(),
            ));
        }
        if !(self.cfl_factor > 0.0) {
            return Err(TurbError::InvalidConfig(
                "cfl factor must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn burnin_steps(&self) -> u64 {
        (self.t_burnin / self.dt).round() as u64
    }

    pub fn sample_steps(&self) -> u64 {
        (self.t_sample / self.dt).round() as u64
    }
}

/// Evolving pair (u, Z) plus the stream that drives it. The rng is part of
/// the state so a resumed run replays the identical trajectory.
#[derive(Debug, Clone)]
pub struct SimState {
    pub u: SpectralField,
    pub z: SpectralField,
    pub t: f64,
    pub step_count: u64,
    pub rng: ChaCha12Rng,
}

/// One recorded sample of the stationary trajectory.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub u: SpectralField,
    pub z: SpectralField,
    pub t: f64,
    pub step_count: u64,
    pub p: Option<ScalarField>,
}

impl Snapshot {
    /// Pressure field, present. Loaders leave it empty; diagnostics that
    /// need it must see it filled.
    pub fn pressure(&self) -> Result<&ScalarField> {
        self.p.as_ref().ok_or(TurbError::MissingPressure)
    }

    pub fn fill_pressure(&mut self, eng: &mut FftEngine) {
        if self.p.is_none() {
            self.p = Some(ops::pressure_recover(&self.u, eng));
        }
    }
}

/// Scalar traces recorded every step.
#[derive(Debug, Clone, Default)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub energy: Vec<f64>,
    pub dissipation: Vec<f64>,
    pub input: Vec<f64>,
}

/// Stationarity self-test: drift of the energy over the sampling window,
/// compared against its own autocorrelation-aware standard error.
#[derive(Debug, Clone)]
pub struct StationarityReport {
    pub drift_mean: f64,
    pub drift_stderr: f64,
    pub passes: bool,
}

/// Global balance over the sampling window: nu avg||grad u||^2 vs avg<u,Z>.
#[derive(Debug, Clone)]
pub struct BalanceReport {
    pub dissipation: f64,
    pub input: f64,
    pub gap: f64,
    pub gap_stderr: f64,
}

/// Minimal constants that would make each side of the a-priori enstrophy
/// bound hold on its own: dissipation against nu avg||u||^2 and against
/// (avg||u||^2)^{3/2}. Reported, never asserted.
#[derive(Debug, Clone)]
pub struct BoundConstants {
    pub c1: f64,
    pub c2: f64,
}

#[derive(Debug)]
pub struct RunSummary {
    pub series: TimeSeries,
    pub final_state: SimState,
    pub snapshots_emitted: usize,
    pub stationarity: Option<StationarityReport>,
    pub balance: Option<BalanceReport>,
    pub bound_constants: Option<BoundConstants>,
}

pub fn initial_state(cfg: &SimConfig, spec: &NoiseSpectrum, u0: Option<SpectralField>) -> SimState {
    let grid = spec.grid();
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let u = match u0 {
        Some(mut f) => {
            f.dealias();
            f.leray_project();
            f
        }
        None => SpectralField::zeros(grid),
    };
    let z = if cfg.epsilon > 0.0 {
        ou_invariant_field(spec, &mut rng)
    } else {
        SpectralField::zeros(grid)
    };
    SimState {
        u,
        z,
        t: 0.0,
        step_count: 0,
        rng,
    }
}

/// One step of the exponential Heun scheme.
///
/// With E = e^{-nu |k|^2 dt} the viscous factor and B the projected
/// advection:
///   u*      = E (u + dt (B(u) + Z_t))
///   u_next  = E u + dt/2 (E B(u) + B(u*)) + I_Z
///   I_Z     = dt/4 (E Z_t + 2 sqrt(E) Z_mid + Z_next)
/// Z advances by two exact OU half steps, so Z_mid and Z_next carry the
/// true noise law and I_Z is the two-panel trapezoid of e^{...} Z over the
/// step. sigma = 0 reduces to classical Lawson-Heun (order two); B = Z = 0
/// reduces to exact heat decay.
pub fn step(
    state: &mut SimState,
    spec: &NoiseSpectrum,
    nu: f64,
    dt: f64,
    cfl_factor: f64,
    eng: &mut FftEngine,
) -> Result<()> {
    let grid = state.u.grid();
    let (b0, u_max) = ops::advection_and_max_speed(&state.u, eng);
    if !u_max.is_finite() {
        return Err(TurbError::Diverged { t: state.t });
    }
    let limit = cfl_factor * grid.spacing() / u_max.max(1e-300);
    if u_max > 0.0 && dt > limit {
        return Err(TurbError::CflViolation {
            t: state.t,
            u_max,
            dt,
            limit,
        });
    }

    let z0 = state.z.clone();
    ou_step_field(&mut state.z, spec, dt / 2.0, &mut state.rng);
    let z_mid = state.z.clone();
    ou_step_field(&mut state.z, spec, dt / 2.0, &mut state.rng);

    let len = grid.len();
    let mut half_decay = vec![0.0f64; len];
    let mut decay = vec![0.0f64; len];
    for flat in 0..len {
        let k2 = grid.k_squared(flat);
        let h = (-nu * k2 * dt / 2.0).exp();
        half_decay[flat] = h;
        decay[flat] = h * h;
    }

    // predictor
    let mut u_star = state.u.clone();
    for c in 0..u_star.ncomp() {
        let us = u_star.comp_mut(c);
        let b = b0.comp(c);
        let z = z0.comp(c);
        for flat in 0..len {
            us[flat] = (us[flat] + dt * (b[flat] + z[flat])) * decay[flat];
        }
    }
    let (b1, _) = ops::advection_and_max_speed(&u_star, eng);

    for c in 0..state.u.ncomp() {
        let u = state.u.comp_mut(c);
        let b_old = b0.comp(c);
        let b_new = b1.comp(c);
        let za = z0.comp(c);
        let zm = z_mid.comp(c);
        let zb = state.z.comp(c);
        for flat in 0..len {
            let e = decay[flat];
            let h = half_decay[flat];
            let noise = dt / 4.0 * (e * za[flat] + 2.0 * h * zm[flat] + zb[flat]);
            u[flat] = e * u[flat] + dt / 2.0 * (e * b_old[flat] + b_new[flat]) + noise;
        }
    }

    state.t += dt;
    state.step_count += 1;

    let energy = state.u.l2_norm_sq();
    if !energy.is_finite() {
        return Err(TurbError::Diverged { t: state.t });
    }
    Ok(())
}

/// Advance a full run, streaming snapshots into `sink` during the sampling
/// window. The sink may write files or feed diagnostics directly.
pub fn run_with<F>(cfg: &SimConfig, u0: Option<SpectralField>, mut sink: F) -> Result<RunSummary>
where
    F: FnMut(&Snapshot) -> Result<()>,
{
    cfg.validate()?;
    let grid = WaveGrid::new(3, cfg.n)?;
    let mut eng = FftEngine::new(grid);
    let spec = build_noise_spectrum(grid, cfg.shell, cfg.epsilon, cfg.drift_scale)?;
    let mut state = initial_state(cfg, &spec, u0);
    let burnin = cfg.burnin_steps();
    let total = burnin + cfg.sample_steps();

    let mut series = TimeSeries::default();
    let mut emitted = 0usize;
    record(&mut series, &state, cfg.nu);
    maybe_snapshot(cfg, &state, burnin, &mut eng, &mut sink, &mut emitted)?;

    while state.step_count < total {
        step(&mut state, &spec, cfg.nu, cfg.dt, cfg.cfl_factor, &mut eng)?;
        record(&mut series, &state, cfg.nu);
        maybe_snapshot(cfg, &state, burnin, &mut eng, &mut sink, &mut emitted)?;
    }

    let sample_range = burnin as usize..series.t.len();
    let (stationarity, balance, bound_constants) = if sample_range.len() > 2 {
        let energy = &series.energy[sample_range.clone()];
        let dissipation = &series.dissipation[sample_range.clone()];
        let input = &series.input[sample_range.clone()];

        let drift: Vec<f64> = energy.windows(2).map(|w| (w[1] - w[0]) / cfg.dt).collect();
        let (dm, dse, _) = series_mean_stderr(&drift);
        let stationarity = StationarityReport {
            drift_mean: dm,
            drift_stderr: dse,
            passes: dm.abs() <= 3.0 * dse,
        };

        let gap_series: Vec<f64> = dissipation
            .iter()
            .zip(input)
            .map(|(d, i)| i - d)
            .collect();
        let (gap, gap_se, _) = series_mean_stderr(&gap_series);
        let avg_d = dissipation.iter().sum::<f64>() / dissipation.len() as f64;
        let avg_i = input.iter().sum::<f64>() / input.len() as f64;
        let balance = BalanceReport {
            dissipation: avg_d,
            input: avg_i,
            gap,
            gap_stderr: gap_se,
        };

        let avg_e = energy.iter().sum::<f64>() / energy.len() as f64;
        let bound = BoundConstants {
            c1: avg_d / (cfg.nu * avg_e).max(1e-300),
            c2: avg_d / avg_e.powf(1.5).max(1e-300),
        };
        (Some(stationarity), Some(balance), Some(bound))
    } else {
        (None, None, None)
    };

    Ok(RunSummary {
        series,
        final_state: state,
        snapshots_emitted: emitted,
        stationarity,
        balance,
        bound_constants,
    })
}

/// Collect snapshots in memory; convenient for tests and small runs.
pub fn run_collect(
    cfg: &SimConfig,
    u0: Option<SpectralField>,
) -> Result<(RunSummary, Vec<Snapshot>)> {
    let mut snaps = Vec::new();
    let summary = run_with(cfg, u0, |s| {
        snaps.push(s.clone());
        Ok(())
    })?;
    Ok((summary, snaps))
}

fn record(series: &mut TimeSeries, state: &SimState, nu: f64) {
    series.t.push(state.t);
    series.energy.push(state.u.l2_norm_sq());
    series.dissipation.push(nu * state.u.grad_norm_sq());
    series.input.push(state.u.inner(&state.z));
}

fn maybe_snapshot<F>(
    cfg: &SimConfig,
    state: &SimState,
    burnin: u64,
    eng: &mut FftEngine,
    sink: &mut F,
    emitted: &mut usize,
) -> Result<()>
where
    F: FnMut(&Snapshot) -> Result<()>,
{
    if cfg.sample_steps() == 0 || state.step_count < burnin {
        return Ok(());
    }
    if (state.step_count - burnin) % cfg.snapshot_stride as u64 != 0 {
        return Ok(());
    }
    let mut snap = Snapshot {
        u: state.u.clone(),
        z: state.z.clone(),
        t: state.t,
        step_count: state.step_count,
        p: None,
    };
    snap.fill_pressure(eng);
    *emitted += 1;
    sink(&snap)
}
