//! Command implementations behind the `turbkit` binary.
//!
//! Every artifact embeds the effective configuration (CSV as `# key = value`
//! comments, JSON under a `config` object), so an artifact alone is enough
//! to regenerate itself. Exit codes are stable: 0 success, 2 invalid
//! configuration or inputs, 3 runtime divergence, 4 missing pressure data,
//! 1 for I/O failures.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::burgers::{burgers_run_collect, third_order_profile, BurgersConfig};
use crate::checkpoint::{load_snapshot, save_checkpoint, save_snapshot};
use crate::cutoff::{make_cutoff, CutoffField};
use crate::diag::{
    self, assumption_monitors, build_direction_set, scaling_fit, KHMBudget, Law, LimitChecks,
    RatioCheck, SFProfile,
};
use crate::error::{Result, TurbError};
use crate::fft::FftEngine;
use crate::field::SpectralField;
use crate::forcing::build_noise_spectrum;
use crate::grid::{TWO_PI, WaveGrid};
use crate::integrator::{run_with, Snapshot};
use crate::lgrid::SeparationGrid;
use crate::shear::degenerate_shear_run;
use crate::sphere::DirectionSet;

pub use config::{LgridSpec, RunConfig};
pub use output::{fmt_f64, CsvTable};
use output::{json_value_err, kv, write_csv, write_json, Json};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Maps errors onto the documented exit codes.
pub fn exit_code(err: &TurbError) -> i32 {
    match err {
        TurbError::InvalidGrid(_)
        | TurbError::GridMismatch(_)
        | TurbError::InvalidConfig(_)
        | TurbError::InvalidShell { .. }
        | TurbError::BadCheckpoint(_) => 2,
        TurbError::CflViolation { .. } | TurbError::Diverged { .. } => 3,
        TurbError::MissingPressure => 4,
        TurbError::Io(_) => 1,
    }
}

/// Execution flags common to the compute subcommands. Reductions are
/// sequential and bit-reproducible in every mode; `threads` is a cap that is
/// recorded in the artifacts, and `deterministic` is likewise recorded.
#[derive(Debug, Clone, Copy)]
pub struct ExecFlags {
    pub threads: usize,
    pub deterministic: bool,
}

impl Default for ExecFlags {
    fn default() -> Self {
        ExecFlags {
            threads: 1,
            deterministic: false,
        }
    }
}

impl ExecFlags {
    pub fn validate(&self) -> Result<()> {
        if self.threads == 0 {
            return Err(TurbError::InvalidConfig(
                "--threads must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn json(&self) -> Json {
        Json::Obj(vec![
            kv("threads", Json::UInt(self.threads as u64)),
            kv("deterministic", Json::Bool(self.deterministic)),
        ])
    }
}

/// TURBKIT_SEED in the environment overrides the configured seed.
pub fn apply_env_seed(cfg: &mut RunConfig) -> Result<()> {
    if let Some(raw) = std::env::var_os("TURBKIT_SEED") {
        let text = raw.into_string().map_err(|_| {
            TurbError::InvalidConfig("TURBKIT_SEED is not valid unicode".into())
        })?;
        cfg.seed = text.trim().parse().map_err(|_| {
            TurbError::InvalidConfig(format!(
                "TURBKIT_SEED `{text}` is not a nonnegative integer"
            ))
        })?;
    }
    Ok(())
}

fn config_json(cfg: &RunConfig) -> Json {
    Json::Obj(cfg.echo().into_iter().map(|(k, v)| kv(k, Json::Str(v))).collect())
}

fn snapshot_file_name(index: usize) -> String {
    format!("snap_{index:06}.bin")
}

/// Loads every `.bin` snapshot in `dir` (sorted by file name) and checks the
/// set against the configuration: one grid, one viscosity, both matching.
fn load_snapshots(dir: &Path, cfg: &RunConfig) -> Result<(Vec<Snapshot>, f64)> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().map_or(false, |e| e == "bin"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(TurbError::InvalidConfig(format!(
            "no .bin snapshot files in {}",
            dir.display()
        )));
    }
    let mut snaps = Vec::with_capacity(paths.len());
    let mut nu = None;
    for path in &paths {
        let (snap, snap_nu) = load_snapshot(path)?;
        if let Some(first) = snaps.first() {
            let f: &Snapshot = first;
            if snap.u.grid() != f.u.grid() {
                return Err(TurbError::GridMismatch(format!(
                    "snapshot {} is on an N = {} grid, earlier snapshots use N = {}",
                    path.display(),
                    snap.u.grid().n(),
                    f.u.grid().n()
                )));
            }
        }
        if let Some(prev) = nu {
            if snap_nu != prev {
                return Err(TurbError::InvalidConfig(format!(
                    "snapshot {} records nu = {snap_nu}, earlier snapshots record {prev}",
                    path.display()
                )));
            }
        }
        nu = Some(snap_nu);
        snaps.push(snap);
    }
    let nu = nu.unwrap();
    if nu != cfg.nu {
        return Err(TurbError::InvalidConfig(format!(
            "config nu = {} does not match snapshot nu = {nu}",
            cfg.nu
        )));
    }
    if snaps[0].u.grid().n() != cfg.n {
        return Err(TurbError::InvalidConfig(format!(
            "config N = {} does not match snapshot N = {}",
            cfg.n,
            snaps[0].u.grid().n()
        )));
    }
    Ok((snaps, nu))
}

fn diag_setup(cfg: &RunConfig, grid: WaveGrid) -> Result<(CutoffField, SeparationGrid, DirectionSet)> {
    let mut eng = FftEngine::new(grid);
    let psi = make_cutoff(grid, cfg.psi_kind, cfg.psi_center, cfg.psi_radius, &mut eng)?;
    let lgrid = cfg.lgrid.build(psi.separation_margin())?;
    let dirs = build_direction_set(cfg.n_dirs)?;
    Ok((psi, lgrid, dirs))
}

pub fn cmd_simulate(cfg: &RunConfig, flags: ExecFlags) -> Result<()> {
    let started = Instant::now();
    let sim = cfg.sim_config();
    sim.validate()?;
    let snap_dir = cfg.out_dir.join("snapshots");
    std::fs::create_dir_all(&snap_dir)?;

    // An unforced run from rest would stay at rest; give decay runs a
    // seeded low-mode state instead.
    let u0 = if cfg.epsilon == 0.0 {
        let grid = WaveGrid::new(3, cfg.n)?;
        let kmax = grid.dealias_cutoff().min(3);
        let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed ^ 0x7fb3_1e5d_90ac_4420);
        Some(SpectralField::random_divergence_free(grid, kmax, 1.0, &mut rng))
    } else {
        None
    };

    let mut index = 0usize;
    let nu = cfg.nu;
    let summary = run_with(&sim, u0, |snap| {
        save_snapshot(&snap_dir.join(snapshot_file_name(index)), snap, nu)?;
        index += 1;
        Ok(())
    })?;
    save_checkpoint(&cfg.out_dir.join("final.ckpt"), &summary.final_state, nu)?;

    let series = &summary.series;
    let rows: Vec<Vec<f64>> = (0..series.t.len())
        .map(|i| vec![series.t[i], series.energy[i], series.dissipation[i], series.input[i]])
        .collect();
    write_csv(
        &cfg.out_dir.join("series.csv"),
        &cfg.echo(),
        &["t", "energy", "dissipation", "input"],
        &rows,
    )?;

    let grid = WaveGrid::new(3, cfg.n)?;
    let spec = build_noise_spectrum(grid, [cfg.shell_lo, cfg.shell_hi], cfg.epsilon, cfg.c)?;
    let noise = Json::Obj(vec![
        kv("shell", Json::Arr(vec![
            Json::UInt(cfg.shell_lo as u64),
            Json::UInt(cfg.shell_hi as u64),
        ])),
        kv("epsilon", Json::Num(spec.epsilon())),
        kv("drift_scale", Json::Num(spec.drift_scale())),
        kv("forced_modes", Json::UInt(spec.modes().len() as u64)),
        kv("noise_slots", Json::UInt(spec.slot_count() as u64)),
        kv("slot_sigma_sq", Json::Num(spec.slot_sigma_sq())),
        kv("trace", Json::Num(spec.trace())),
    ]);
    let stationarity = match &summary.stationarity {
        Some(s) => Json::Obj(vec![
            kv("drift_mean", Json::Num(s.drift_mean)),
            kv("drift_stderr", Json::Num(s.drift_stderr)),
            kv("passes", Json::Bool(s.passes)),
        ]),
        None => Json::Null,
    };
    let balance = match &summary.balance {
        Some(b) => Json::Obj(vec![
            kv("dissipation", Json::Num(b.dissipation)),
            kv("input", Json::Num(b.input)),
            kv("gap", Json::Num(b.gap)),
            kv("gap_stderr", Json::Num(b.gap_stderr)),
        ]),
        None => Json::Null,
    };
    let bounds = match &summary.bound_constants {
        Some(b) => Json::Obj(vec![kv("c1", Json::Num(b.c1)), kv("c2", Json::Num(b.c2))]),
        None => Json::Null,
    };
    let metadata = Json::Obj(vec![
        kv("version", Json::Str(VERSION.to_string())),
        kv("command", Json::Str("simulate".to_string())),
        kv("config", config_json(cfg)),
        kv("flags", flags.json()),
        kv("noise", noise),
        kv("snapshots", Json::UInt(summary.snapshots_emitted as u64)),
        kv("steps", Json::UInt(summary.final_state.step_count)),
        kv("final_time", Json::Num(summary.final_state.t)),
        kv("stationarity", stationarity),
        kv("balance", balance),
        kv("bound_constants", bounds),
        kv("wall_seconds", Json::Num(started.elapsed().as_secs_f64())),
    ]);
    write_json(&cfg.out_dir.join("metadata.json"), &metadata)?;

    println!(
        "simulate: {} steps, {} snapshots -> {}",
        summary.final_state.step_count,
        summary.snapshots_emitted,
        cfg.out_dir.display()
    );
    Ok(())
}

pub fn cmd_diagnose(cfg: &RunConfig, snap_dir: &Path, flags: ExecFlags) -> Result<()> {
    let (snaps, nu) = load_snapshots(snap_dir, cfg)?;
    let (psi, lgrid, dirs) = diag_setup(cfg, snaps[0].u.grid())?;
    let report = diag::analyze(&snaps, &psi, &lgrid, &dirs, nu)?;
    let ell_ref = *lgrid.ells().last().unwrap();
    let monitors = assumption_monitors(&snaps, ell_ref)?;
    std::fs::create_dir_all(&cfg.out_dir)?;

    let mut comments = cfg.echo();
    comments.push(("eps_local", fmt_f64(report.sf.eps_local)));
    let sf = &report.sf;
    let rows: Vec<Vec<f64>> = lgrid
        .ells()
        .iter()
        .enumerate()
        .map(|(j, &ell)| vec![ell, sf.s0[j], sf.s0_stderr[j], sf.spar[j], sf.spar_stderr[j]])
        .collect();
    write_csv(
        &cfg.out_dir.join("sf.csv"),
        &comments,
        &["ell", "s0", "s0_stderr", "spar", "spar_stderr"],
        &rows,
    )?;

    let wad = &report.wad;
    let lee = &report.lee;
    let monitors_json = Json::Obj(vec![
        kv("version", Json::Str(VERSION.to_string())),
        kv("command", Json::Str("diagnose".to_string())),
        kv("config", config_json(cfg)),
        kv("flags", flags.json()),
        kv("snapshots", Json::UInt(snaps.len() as u64)),
        kv("stderr_available", Json::Bool(snaps.len() >= 2)),
        kv("eps_local", Json::Num(sf.eps_local)),
        kv(
            "wad",
            Json::Obj(vec![
                kv("nu_energy", json_value_err(wad.nu_energy.value, wad.nu_energy.stderr)),
                kv(
                    "dissipation",
                    json_value_err(wad.dissipation.value, wad.dissipation.stderr),
                ),
                kv("input", json_value_err(wad.input.value, wad.input.stderr)),
                kv("lambda_t", json_value_err(wad.lambda_t.value, wad.lambda_t.stderr)),
                kv("ell_nu", json_value_err(wad.ell_nu.value, wad.ell_nu.stderr)),
            ]),
        ),
        kv(
            "assumptions",
            Json::Obj(vec![
                kv("ell_ref", Json::Num(monitors.ell_ref)),
                kv("u_l3", json_value_err(monitors.u_l3.value, monitors.u_l3.stderr)),
                kv(
                    "incr_l3",
                    json_value_err(monitors.incr_l3.value, monitors.incr_l3.stderr),
                ),
                kv("p_l32", json_value_err(monitors.p_l32.value, monitors.p_l32.stderr)),
            ]),
        ),
        kv(
            "lee",
            Json::Obj(vec![
                kv("lhs", Json::Num(lee.lhs)),
                kv("lap_term", Json::Num(lee.lap_term)),
                kv("transport_term", Json::Num(lee.transport_term)),
                kv("input_term", Json::Num(lee.input_term)),
                kv("residual", Json::Num(lee.residual)),
                kv("stderr", Json::Num(lee.stderr)),
            ]),
        ),
    ]);
    write_json(&cfg.out_dir.join("monitors.json"), &monitors_json)?;

    println!(
        "diagnose: {} snapshots, {} scales -> {}",
        snaps.len(),
        lgrid.len(),
        cfg.out_dir.display()
    );
    Ok(())
}

fn law_tag(law: Law) -> &'static str {
    match law {
        Law::FourThirds => "43",
        Law::FourFifths => "45",
    }
}

fn ratio_json(r: &RatioCheck) -> Json {
    json_value_err(r.value, r.stderr)
}

fn limits_json(limits: &LimitChecks) -> Json {
    Json::Obj(vec![
        kv("ell_min", Json::Num(limits.ell_min)),
        kv("p1_origin", Json::Num(limits.p1_origin)),
        kv("p2_origin", Json::Num(limits.p2_origin)),
        kv("p2_identity_gap", Json::Num(limits.p2_identity_gap)),
        kv("ratio_z", ratio_json(&limits.ratio_z)),
        kv("ratio_p1", ratio_json(&limits.ratio_p1)),
        kv("ratio_g", ratio_json(&limits.ratio_g)),
        kv("ratio_h", ratio_json(&limits.ratio_h)),
    ])
}

pub fn cmd_budget(cfg: &RunConfig, snap_dir: &Path, law: Law, flags: ExecFlags) -> Result<()> {
    let (snaps, nu) = load_snapshots(snap_dir, cfg)?;
    let (psi, lgrid, dirs) = diag_setup(cfg, snaps[0].u.grid())?;
    let budget: KHMBudget = match law {
        Law::FourThirds => diag::khm_budget_43(&snaps, &psi, &lgrid, &dirs, nu)?,
        Law::FourFifths => diag::khm_budget_45(&snaps, &psi, &lgrid, &dirs, nu)?,
    };
    std::fs::create_dir_all(&cfg.out_dir)?;

    let mut comments = cfg.echo();
    comments.push(("law", law_tag(law).to_string()));
    let rows: Vec<Vec<f64>> = lgrid
        .ells()
        .iter()
        .enumerate()
        .map(|(j, &ell)| {
            vec![
                ell,
                budget.s0[j],
                budget.spar[j],
                budget.visc_gamma[j],
                budget.noise[j],
                budget.visc_g[j],
                budget.visc_q[j],
                budget.press1[j],
                budget.press2[j],
                budget.flux_h[j],
                budget.flux_f[j],
                budget.residual[j],
                budget.stderr[j],
            ]
        })
        .collect();
    write_csv(
        &cfg.out_dir.join("budget.csv"),
        &comments,
        &[
            "ell",
            "s0",
            "spar",
            "visc_gamma",
            "noise",
            "visc_G",
            "visc_Q",
            "press1",
            "press2",
            "flux_H",
            "flux_F",
            "residual",
            "stderr",
        ],
        &rows,
    )?;

    let limits = Json::Obj(vec![
        kv("version", Json::Str(VERSION.to_string())),
        kv("command", Json::Str("budget".to_string())),
        kv("config", config_json(cfg)),
        kv("flags", flags.json()),
        kv("law", Json::Str(law_tag(law).to_string())),
        kv("snapshots", Json::UInt(snaps.len() as u64)),
        kv("limits", limits_json(&budget.limits)),
    ]);
    write_json(&cfg.out_dir.join("budget_limits.json"), &limits)?;

    println!(
        "budget {}: {} snapshots, {} scales -> {}",
        law_tag(law),
        snaps.len(),
        lgrid.len(),
        cfg.out_dir.display()
    );
    Ok(())
}

pub fn cmd_shear_test(seed: u64, nus: &[f64], out: Option<&Path>) -> Result<()> {
    if nus.is_empty() {
        return Err(TurbError::InvalidConfig("no viscosities given".into()));
    }
    for &nu in nus {
        if !(nu > 0.0) {
            return Err(TurbError::InvalidConfig(format!(
                "viscosity {nu} must be positive"
            )));
        }
    }
    println!("{:>10}  {:>18}  {:>18}  {:>10}", "nu", "measured", "target", "rel_err");
    let mut rows = Vec::with_capacity(nus.len());
    for (i, &nu) in nus.iter().enumerate() {
        // step bias grows like (nu dt)^2; the slow mode mixes on 1/min(nu,1)
        let dt = 1e-3_f64.min(0.25 / nu);
        let t_final = 2e4 / nu.min(1.0);
        let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(i as u64));
        let measured = degenerate_shear_run(nu, 1.0, t_final, dt, &mut rng);
        let target = 1.0 / (nu + 1.0);
        let rel = (measured - target).abs() / target;
        println!("{nu:>10.4}  {measured:>18.12}  {target:>18.12}  {rel:>10.3e}");
        rows.push(vec![nu, measured, target, rel]);
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        write_csv(
            &dir.join("shear.csv"),
            &[("seed", seed.to_string())],
            &["nu", "measured", "target", "rel_err"],
            &rows,
        )?;
    }
    Ok(())
}

pub fn cmd_burgers(cfg: &RunConfig, flags: ExecFlags) -> Result<()> {
    let started = Instant::now();
    let bcfg = BurgersConfig {
        nu: cfg.nu,
        n: cfg.n,
        shell: [cfg.shell_lo, cfg.shell_hi],
        epsilon: cfg.epsilon,
        drift_scale: cfg.c,
        dt: cfg.dt,
        t_burnin: cfg.t_burnin,
        t_sample: cfg.t_sample,
        snapshot_stride: cfg.snapshot_stride,
        seed: cfg.seed,
        cfl_factor: 0.4,
    };
    bcfg.validate()?;
    let (summary, snaps) = burgers_run_collect(&bcfg, None)?;
    std::fs::create_dir_all(&cfg.out_dir)?;

    let series = &summary.series;
    let rows: Vec<Vec<f64>> = (0..series.t.len())
        .map(|i| vec![series.t[i], series.energy[i], series.dissipation[i], series.input[i]])
        .collect();
    write_csv(
        &cfg.out_dir.join("burgers_series.csv"),
        &cfg.echo(),
        &["t", "energy", "dissipation", "input"],
        &rows,
    )?;

    if !snaps.is_empty() {
        // Separations live on the circle; half the box is the usable range.
        let lgrid = cfg.lgrid.build(TWO_PI / 2.0)?;
        let (s3, s3_err) = third_order_profile(&snaps, lgrid.ells())?;
        let rows: Vec<Vec<f64>> = lgrid
            .ells()
            .iter()
            .enumerate()
            .map(|(j, &ell)| vec![ell, s3[j], s3_err[j]])
            .collect();
        write_csv(
            &cfg.out_dir.join("burgers_s3.csv"),
            &cfg.echo(),
            &["ell", "s3", "s3_stderr"],
            &rows,
        )?;
    }

    let balance = match summary.balance {
        Some((dissipation, input, gap_stderr)) => Json::Obj(vec![
            kv("dissipation", Json::Num(dissipation)),
            kv("input", Json::Num(input)),
            kv("gap_stderr", Json::Num(gap_stderr)),
        ]),
        None => Json::Null,
    };
    let metadata = Json::Obj(vec![
        kv("version", Json::Str(VERSION.to_string())),
        kv("command", Json::Str("burgers".to_string())),
        kv("config", config_json(cfg)),
        kv("flags", flags.json()),
        kv("snapshots", Json::UInt(summary.snapshots_emitted as u64)),
        kv("steps", Json::UInt(summary.final_state.step_count)),
        kv("final_time", Json::Num(summary.final_state.t)),
        kv("balance", balance),
        kv("wall_seconds", Json::Num(started.elapsed().as_secs_f64())),
    ]);
    write_json(&cfg.out_dir.join("burgers.json"), &metadata)?;

    println!(
        "burgers: {} steps, {} snapshots -> {}",
        summary.final_state.step_count,
        summary.snapshots_emitted,
        cfg.out_dir.display()
    );
    Ok(())
}

pub fn cmd_fit(csv_path: &Path, window: [f64; 2], out_dir: &Path) -> Result<()> {
    let table = CsvTable::read(csv_path)?;
    let ells = table.column("ell")?;
    let eps_local = match table.comment("eps_local") {
        Some(text) => output::parse_f64(text)?,
        None => 0.0,
    };
    let profile = SFProfile {
        grid: SeparationGrid::from_values(ells, f64::INFINITY)?,
        s0: table.column("s0")?,
        spar: table.column("spar")?,
        s0_stderr: table.column("s0_stderr")?,
        spar_stderr: table.column("spar_stderr")?,
        eps_local,
    };
    let fit = scaling_fit(&profile, window)?;
    std::fs::create_dir_all(out_dir)?;

    let source_config = Json::Obj(
        table
            .comments
            .iter()
            .map(|(k, v)| (k.clone(), Json::Str(v.clone())))
            .collect(),
    );
    let report = Json::Obj(vec![
        kv("version", Json::Str(VERSION.to_string())),
        kv("command", Json::Str("fit".to_string())),
        kv("source", Json::Str(csv_path.display().to_string())),
        kv("source_config", source_config),
        kv(
            "window",
            Json::Arr(vec![Json::Num(window[0]), Json::Num(window[1])]),
        ),
        kv("points", Json::UInt(fit.points as u64)),
        kv("eps0", Json::Num(fit.eps0)),
        kv("eps_par", Json::Num(fit.eps_par)),
        kv("slope0", Json::Num(fit.slope0)),
        kv("slope_par", Json::Num(fit.slope_par)),
        kv("ratio0", Json::Num(fit.ratio0)),
        kv("ratio_par", Json::Num(fit.ratio_par)),
        kv("rms0", Json::Num(fit.rms0)),
        kv("rms_par", Json::Num(fit.rms_par)),
        kv("eps_local", Json::Num(eps_local)),
    ]);
    write_json(&out_dir.join("fit.json"), &report)?;

    println!(
        "fit: eps0 = {}, eps_par = {} from {} points in [{}, {}]",
        fmt_f64(fit.eps0),
        fmt_f64(fit.eps_par),
        fit.points,
        fmt_f64(window[0]),
        fmt_f64(window[1])
    );
    Ok(())
}
