use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, TurbError};
use crate::fft::FftEngine;
use crate::field::ScalarField;
use crate::forcing::ou_kernel;
use crate::grid::{WaveGrid, TWO_PI};
use crate::stats::series_mean_stderr;

/// 1D stochastic Burgers testbed on the circle:
///   du + d/dx (u^2/2) dt = nu u_xx dt + dZ,
/// with OU forcing on a low-wavenumber shell.
#[derive(Debug, Clone)]
pub struct BurgersConfig {
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

impl BurgersConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.dt > 0.0) {
            return Err(TurbError::InvalidConfig(
                "viscosity and time step must be positive".into(),
            ));
        }
        if self.t_burnin < 0.0 || self.t_sample < 0.0 {
            return Err(TurbError::InvalidConfig(
                "durations must be nonnegative".into(),
            ));
        }
        if self.snapshot_stride == 0 {
            return Err(TurbError::InvalidConfig("stride must be positive".into()));
        }
        let [lo, hi] = self.shell;
        if !(1 <= lo && lo <= hi && 3 * hi < self.n as i64) {
            return Err(TurbError::InvalidShell {
                lo,
                hi,
                max: WaveGrid::new(1, self.n)?.dealias_cutoff(),
            });
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

/// Scalar shell forcing: modes lo..=hi (mirror modes implied), lambda =
/// c k^2, equal |sigma|^2 = epsilon / M over the M = 2 (hi - lo + 1) slots.
#[derive(Debug, Clone)]
pub struct ScalarNoise {
    grid: WaveGrid,
    modes: Vec<(usize, f64)>,
    slot_sigma_sq: f64,
    epsilon: f64,
}

pub fn build_scalar_noise(
    grid: WaveGrid,
    shell: [i64; 2],
    epsilon: f64,
    c: f64,
) -> Result<ScalarNoise> {
    if grid.dim() != 1 {
        return Err(TurbError::InvalidConfig(
            "scalar shell forcing is one-dimensional".into(),
        ));
    }
    let [lo, hi] = shell;
    if !(1 <= lo && lo <= hi && 3 * hi < grid.n() as i64) {
        return Err(TurbError::InvalidShell {
            lo,
            hi,
            max: grid.dealias_cutoff(),
        });
    }
    if !(epsilon >= 0.0 && c > 0.0) {
        return Err(TurbError::InvalidConfig(
            "noise strength must be nonnegative, drift scale positive".into(),
        ));
    }
    let modes = (lo..=hi)
        .map(|k| (grid.flat_of_wavevector([k, 0, 0]), c * (k * k) as f64))
        .collect::<Vec<_>>();
    let slots = 2 * (hi - lo + 1) as usize;
    Ok(ScalarNoise {
        grid,
        modes,
        slot_sigma_sq: epsilon / slots as f64,
        epsilon,
    })
}

impl ScalarNoise {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// E|dz_k|^2/dt per complex coefficient, Fourier-series units.
    pub fn coeff_noise_rate(&self) -> f64 {
        self.slot_sigma_sq / TWO_PI
    }

    pub fn step<R: Rng>(&self, z: &mut ScalarField, dt: f64, rng: &mut R) {
        let comp_rate = 0.5 * self.coeff_noise_rate();
        for &(flat, lambda) in &self.modes {
            let (decay, std) = ou_kernel(lambda, comp_rate, dt);
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let new = z.coeffs()[flat] * decay + Complex64::new(re, im) * std;
            let conj_flat = self.grid.conj_index(flat);
            z.coeffs_mut()[flat] = new;
            z.coeffs_mut()[conj_flat] = new.conj();
        }
    }

    pub fn invariant_sample<R: Rng>(&self, rng: &mut R) -> ScalarField {
        let mut z = ScalarField::zeros(self.grid);
        let comp_rate = 0.5 * self.coeff_noise_rate();
        for &(flat, lambda) in &self.modes {
            let std = (comp_rate / (2.0 * lambda)).sqrt();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let v = Complex64::new(re, im) * std;
            let conj_flat = self.grid.conj_index(flat);
            z.coeffs_mut()[flat] = v;
            z.coeffs_mut()[conj_flat] = v.conj();
        }
        z
    }
}

#[derive(Debug, Clone)]
pub struct BurgersState {
    pub u: ScalarField,
    pub z: ScalarField,
    pub t: f64,
    pub step_count: u64,
    pub rng: ChaCha12Rng,
}

#[derive(Debug, Clone)]
pub struct BurgersSnapshot {
    pub u: ScalarField,
    pub z: ScalarField,
    pub t: f64,
    pub step_count: u64,
}

#[derive(Debug, Clone, Default)]
pub struct BurgersSeries {
    pub t: Vec<f64>,
    pub energy: Vec<f64>,
    pub dissipation: Vec<f64>,
    pub input: Vec<f64>,
}

#[derive(Debug)]
pub struct BurgersSummary {
    pub series: BurgersSeries,
    pub final_state: BurgersState,
    pub snapshots_emitted: usize,
    /// (nu avg||u_x||^2, avg<u,Z>, gap stderr) over the sampling window
    pub balance: Option<(f64, f64, f64)>,
}

fn l2(grid: WaveGrid, f: &ScalarField) -> f64 {
    let _ = grid;
    f.l2_norm_sq()
}

fn grad_sq(grid: WaveGrid, f: &ScalarField) -> f64 {
    let mut acc = 0.0;
    for flat in 0..grid.len() {
        acc += grid.k_squared(flat) * f.coeffs()[flat].norm_sqr();
    }
    acc * grid.box_volume()
}

fn inner(grid: WaveGrid, a: &ScalarField, b: &ScalarField) -> f64 {
    let mut acc = 0.0;
    for flat in 0..grid.len() {
        acc += (a.coeffs()[flat].conj() * b.coeffs()[flat]).re;
    }
    acc * grid.box_volume()
}

/// -d/dx(u^2/2) in spectral space, 2/3-rule dealiased; also the largest
/// pointwise |u| for the CFL monitor.
fn advection(u: &ScalarField, eng: &mut FftEngine) -> (ScalarField, f64) {
    let grid = u.grid();
    let phys = u.to_physical(eng);
    let mut u_max = 0.0_f64;
    let mut sq: Vec<Complex64> = phys
        .iter()
        .map(|&v| {
            u_max = u_max.max(v.abs());
            Complex64::new(0.5 * v * v, 0.0)
        })
        .collect();
    eng.forward(&mut sq);
    let mut out = ScalarField::zeros(grid);
    for flat in 0..grid.len() {
        if grid.in_band(flat) {
            let k = grid.wavevector(flat)[0] as f64;
            out.coeffs_mut()[flat] = -Complex64::new(0.0, k) * sq[flat];
        }
    }
    (out, u_max)
}

pub fn burgers_step(
    state: &mut BurgersState,
    noise: &ScalarNoise,
    nu: f64,
    dt: f64,
    cfl_factor: f64,
    eng: &mut FftEngine,
) -> Result<()> {
    let grid = state.u.grid();
    let (b0, u_max) = advection(&state.u, eng);
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
    noise.step(&mut state.z, dt / 2.0, &mut state.rng);
    let z_mid = state.z.clone();
    noise.step(&mut state.z, dt / 2.0, &mut state.rng);

    let len = grid.len();
    let mut u_star = ScalarField::zeros(grid);
    let mut decay = vec![0.0f64; len];
    let mut half = vec![0.0f64; len];
    for flat in 0..len {
        let h = (-nu * grid.k_squared(flat) * dt / 2.0).exp();
        half[flat] = h;
        decay[flat] = h * h;
        u_star.coeffs_mut()[flat] =
            (state.u.coeffs()[flat] + dt * (b0.coeffs()[flat] + z0.coeffs()[flat])) * decay[flat];
    }
    let (b1, _) = advection(&u_star, eng);

    for flat in 0..len {
        let e = decay[flat];
        let h = half[flat];
        let noise_int = dt / 4.0
            * (e * z0.coeffs()[flat]
                + 2.0 * h * z_mid.coeffs()[flat]
                + state.z.coeffs()[flat]);
        let v = e * state.u.coeffs()[flat]
            + dt / 2.0 * (e * b0.coeffs()[flat] + b1.coeffs()[flat])
            + noise_int;
        state.u.coeffs_mut()[flat] = v;
    }

    state.t += dt;
    state.step_count += 1;
    if !state.u.l2_norm_sq().is_finite() {
        return Err(TurbError::Diverged { t: state.t });
    }
    Ok(())
}

pub fn burgers_run_with<F>(
    cfg: &BurgersConfig,
    u0: Option<ScalarField>,
    mut sink: F,
) -> Result<BurgersSummary>
where
    F: FnMut(&BurgersSnapshot) -> Result<()>,
{
    cfg.validate()?;
    let grid = WaveGrid::new(1, cfg.n)?;
    let mut eng = FftEngine::new(grid);
    let noise = build_scalar_noise(grid, cfg.shell, cfg.epsilon, cfg.drift_scale)?;
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let z = if cfg.epsilon > 0.0 {
        noise.invariant_sample(&mut rng)
    } else {
        ScalarField::zeros(grid)
    };
    let mut state = BurgersState {
        u: u0.unwrap_or_else(|| ScalarField::zeros(grid)),
        z,
        t: 0.0,
        step_count: 0,
        rng,
    };

    let burnin = cfg.burnin_steps();
    let total = burnin + cfg.sample_steps();
    let mut series = BurgersSeries::default();
    let mut emitted = 0usize;

    let record = |series: &mut BurgersSeries, st: &BurgersState| {
        series.t.push(st.t);
        series.energy.push(l2(grid, &st.u));
        series.dissipation.push(cfg.nu * grad_sq(grid, &st.u));
        series.input.push(inner(grid, &st.u, &st.z));
    };
    record(&mut series, &state);

    let emit = |st: &BurgersState, emitted: &mut usize, sink: &mut F| -> Result<()> {
        if cfg.sample_steps() == 0 || st.step_count < burnin {
            return Ok(());
        }
        if (st.step_count - burnin) % cfg.snapshot_stride as u64 != 0 {
            return Ok(());
        }
        *emitted += 1;
        sink(&BurgersSnapshot {
            u: st.u.clone(),
            z: st.z.clone(),
            t: st.t,
            step_count: st.step_count,
        })
    };
    emit(&state, &mut emitted, &mut sink)?;

    while state.step_count < total {
        burgers_step(&mut state, &noise, cfg.nu, cfg.dt, cfg.cfl_factor, &mut eng)?;
        record(&mut series, &state);
        emit(&state, &mut emitted, &mut sink)?;
    }

    let sample = burnin as usize..series.t.len();
    let balance = if sample.len() > 2 {
        let d = &series.dissipation[sample.clone()];
        let i = &series.input[sample.clone()];
        let avg_d = d.iter().sum::<f64>() / d.len() as f64;
        let avg_i = i.iter().sum::<f64>() / i.len() as f64;
        let gaps: Vec<f64> = d.iter().zip(i).map(|(a, b)| b - a).collect();
        let (_, se, _) = series_mean_stderr(&gaps);
        Some((avg_d, avg_i, se))
    } else {
        None
    };

    Ok(BurgersSummary {
        series,
        final_state: state,
        snapshots_emitted: emitted,
        balance,
    })
}

pub fn burgers_run_collect(
    cfg: &BurgersConfig,
    u0: Option<ScalarField>,
) -> Result<(BurgersSummary, Vec<BurgersSnapshot>)> {
    let mut snaps = Vec::new();
    let summary = burgers_run_with(cfg, u0, |s| {
        snaps.push(s.clone());
        Ok(())
    })?;
    Ok((summary, snaps))
}

/// Snapshot-averaged third-order structure function profile
/// S3(l) = < integral (u(x + l) - u(x))^3 dx >, with standard errors.
pub fn third_order_profile(
    snaps: &[BurgersSnapshot],
    ells: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let first = snaps
        .first()
        .ok_or_else(|| TurbError::InvalidConfig("no snapshots to analyze".into()))?;
    let grid = first.u.grid();
    let mut eng = FftEngine::new(grid);
    let cell = grid.cell_volume();
    let mut means = Vec::with_capacity(ells.len());
    let mut errs = Vec::with_capacity(ells.len());
    for &ell in ells {
        let series: Vec<f64> = snaps
            .iter()
            .map(|s| {
                let base = s.u.to_physical(&mut eng);
                let mut shifted = s.u.clone();
                shifted.shift([ell, 0.0, 0.0]);
                let moved = shifted.to_physical(&mut eng);
                let mut acc = 0.0;
                for (t, u) in moved.iter().zip(&base) {
                    let d = t - u;
                    acc += d * d * d;
                }
                acc * cell
            })
            .collect();
        let (m, se, _) = series_mean_stderr(&series);
        means.push(m);
        errs.push(se);
    }
    Ok((means, errs))
}
