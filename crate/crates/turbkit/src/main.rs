use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use turbkit::cli::{
    apply_env_seed, cmd_budget, cmd_burgers, cmd_diagnose, cmd_fit, cmd_shear_test, cmd_simulate,
    exit_code, ExecFlags, RunConfig,
};
use turbkit::diag::Law;
use turbkit::Result;

#[derive(Parser)]
#[command(
    name = "turbkit",
    version,
    about = "Pseudo-spectral periodic-box Navier-Stokes with OU forcing and scale-by-scale energy-budget diagnostics"
)]
struct Cli {
    /// Cap on worker threads; compute is single-threaded today, the cap is
    /// validated and recorded in artifacts
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    /// Request bit-reproducible reductions (always on; recorded in artifacts)
    #[arg(long, global = true)]
    deterministic: bool,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the forced simulation: snapshots, time series, checkpoint, metadata
    Simulate {
        /// Run configuration file (key = value lines)
        #[arg(long)]
        config: PathBuf,
        /// Output directory, overriding the config's out_dir
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Structure functions and assumption monitors from stored snapshots
    Diagnose {
        /// Directory of snap_*.bin files
        snapshots: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scale-by-scale energy budget from stored snapshots
    Budget {
        /// Directory of snap_*.bin files
        snapshots: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// 43 for the 4/3 law, 45 for the 4/5 law
        #[arg(long, value_parser = ["43", "45"])]
        law: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Degenerate shear testbed against its closed-form stationary value
    ShearTest {
        /// Viscosities to test
        #[arg(default_values_t = vec![1.0, 0.5, 0.1])]
        nu: Vec<f64>,
        /// Optional config, read only for its seed
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory for an optional shear.csv
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// 1D stochastic Burgers analogue: time series, balance, S3 profile
    Burgers {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dissipation-rate fit from a structure-function CSV
    Fit {
        /// sf.csv produced by diagnose
        csv: PathBuf,
        /// Fit window lower edge
        lo: f64,
        /// Fit window upper edge
        hi: f64,
        /// Directory for fit.json (default: current directory)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: &Path, out: Option<PathBuf>) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(path)?;
    apply_env_seed(&mut cfg)?;
    if let Some(dir) = out {
        cfg.out_dir = dir;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let flags = ExecFlags {
        threads: cli.threads,
        deterministic: cli.deterministic,
    };
    flags.validate()?;
    match cli.cmd {
        Cmd::Simulate { config, out } => cmd_simulate(&load_config(&config, out)?, flags),
        Cmd::Diagnose {
            snapshots,
            config,
            out,
        } => cmd_diagnose(&load_config(&config, out)?, &snapshots, flags),
        Cmd::Budget {
            snapshots,
            config,
            law,
            out,
        } => {
            let law = match law.as_str() {
                "43" => Law::FourThirds,
                _ => Law::FourFifths,
            };
            cmd_budget(&load_config(&config, out)?, &snapshots, law, flags)
        }
        Cmd::ShearTest { nu, config, out } => {
            let seed = match config {
                Some(path) => {
                    let mut cfg = RunConfig::load(&path)?;
                    apply_env_seed(&mut cfg)?;
                    cfg.seed
                }
                None => {
                    let mut cfg = RunConfig::default();
                    apply_env_seed(&mut cfg)?;
                    cfg.seed
                }
            };
            cmd_shear_test(seed, &nu, out.as_deref())
        }
        Cmd::Burgers { config, out } => cmd_burgers(&load_config(&config, out)?, flags),
        Cmd::Fit { csv, lo, hi, out } => {
            let out_dir = out.unwrap_or_else(|| PathBuf::from("."));
            cmd_fit(&csv, [lo, hi], &out_dir)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("turbkit: {err}");
        std::process::exit(exit_code(&err));
    }
}
