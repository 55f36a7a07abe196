//! Strict `key = value` run configuration.
//!
//! Every key has a default, unknown or duplicate keys are rejected, and the
//! effective (defaults-resolved) configuration is echoed into every output
//! artifact, so any artifact carries enough to regenerate itself.

use std::path::PathBuf;

use crate::cutoff::CutoffKind;
use crate::error::{Result, TurbError};
use crate::grid::{TWO_PI, WaveGrid};
use crate::integrator::SimConfig;
use crate::lgrid::SeparationGrid;

use super::output::fmt_f64;

/// Separation-scale grid request, kept in its textual shape so the echo
/// round-trips exactly.
#[derive(Debug, Clone, PartialEq)]
pub enum LgridSpec {
    /// `log:<lo>:<hi>:<count>`
    Log { lo: f64, hi: f64, count: usize },
    /// `list:<v1>,<v2>,...`
    List(Vec<f64>),
}

impl LgridSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |msg: &str| {
            TurbError::InvalidConfig(format!(
                "lgrid `{text}`: {msg}; expected log:<lo>:<hi>:<count> or list:<v1>,<v2>,..."
            ))
        };
        if let Some(rest) = text.strip_prefix("log:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(bad("need three `:`-separated fields"));
            }
            let lo = parse_f64("lgrid lo", parts[0])?;
            let hi = parse_f64("lgrid hi", parts[1])?;
            let count = parse_usize("lgrid count", parts[2])?;
            if !(lo > 0.0 && hi > lo) {
                return Err(bad("bounds must satisfy 0 < lo < hi"));
            }
            if count < 2 {
                return Err(bad("count must be at least 2"));
            }
            Ok(LgridSpec::Log { lo, hi, count })
        } else if let Some(rest) = text.strip_prefix("list:") {
            let mut vals = Vec::new();
            for piece in rest.split(',') {
                vals.push(parse_f64("lgrid value", piece)?);
            }
            if vals.len() < 2 {
                return Err(bad("need at least two values"));
            }
            for w in vals.windows(2) {
                if !(w[0] > 0.0 && w[1] > w[0]) {
                    return Err(bad("values must be positive and strictly increasing"));
                }
            }
            Ok(LgridSpec::List(vals))
        } else {
            Err(bad("unknown form"))
        }
    }

    pub fn build(&self, margin: f64) -> Result<SeparationGrid> {
        match self {
            LgridSpec::Log { lo, hi, count } => SeparationGrid::log_spaced(*lo, *hi, *count, margin),
            LgridSpec::List(vals) => SeparationGrid::from_values(vals.clone(), margin),
        }
    }

    fn echo(&self) -> String {
        match self {
            LgridSpec::Log { lo, hi, count } => format!("log:{}:{}:{count}", fmt_f64(*lo), fmt_f64(*hi)),
            LgridSpec::List(vals) => {
                let parts: Vec<String> = vals.iter().map(|v| fmt_f64(*v)).collect();
                format!("list:{}", parts.join(","))
            }
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub nu: f64,
    pub n: usize,
    pub dt: f64,
    pub shell_lo: i64,
    pub shell_hi: i64,
    pub epsilon: f64,
    pub c: f64,
    pub seed: u64,
    pub t_burnin: f64,
    pub t_sample: f64,
    pub snapshot_stride: usize,
    pub psi_kind: CutoffKind,
    pub psi_center: [f64; 3],
    pub psi_radius: f64,
    pub n_dirs: usize,
    pub lgrid: LgridSpec,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mid = TWO_PI / 2.0;
        RunConfig {
            nu: 0.05,
            n: 32,
            dt: 0.005,
            shell_lo: 1,
            shell_hi: 2,
            epsilon: 1.0,
            c: 1.0,
            seed: 1,
            t_burnin: 20.0,
            t_sample: 100.0,
            snapshot_stride: 20,
            psi_kind: CutoffKind::Bump,
            psi_center: [mid, mid, mid],
            psi_radius: 2.5,
            n_dirs: 64,
            lgrid: LgridSpec::Log {
                lo: 0.1,
                hi: 0.6,
                count: 12,
            },
            out_dir: PathBuf::from("turbkit_out"),
        }
    }
}

fn parse_f64(key: &str, raw: &str) -> Result<f64> {
    let v: f64 = raw.trim().parse().map_err(|_| {
        TurbError::InvalidConfig(format!("{key}: `{}` is not a number", raw.trim()))
    })?;
    if !v.is_finite() {
        return Err(TurbError::InvalidConfig(format!(
            "{key}: `{}` must be finite",
            raw.trim()
        )));
    }
    Ok(v)
}

fn parse_usize(key: &str, raw: &str) -> Result<usize> {
    raw.trim().parse().map_err(|_| {
        TurbError::InvalidConfig(format!(
            "{key}: `{}` is not a nonnegative integer",
            raw.trim()
        ))
    })
}

fn parse_i64(key: &str, raw: &str) -> Result<i64> {
    raw.trim()
        .parse()
        .map_err(|_| TurbError::InvalidConfig(format!("{key}: `{}` is not an integer", raw.trim())))
}

fn parse_u64(key: &str, raw: &str) -> Result<u64> {
    raw.trim().parse().map_err(|_| {
        TurbError::InvalidConfig(format!(
            "{key}: `{}` is not a nonnegative integer",
            raw.trim()
        ))
    })
}

fn parse_center(raw: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 3 {
        return Err(TurbError::InvalidConfig(format!(
            "psi_center `{raw}` needs three comma-separated coordinates"
        )));
    }
    Ok([
        parse_f64("psi_center", parts[0])?,
        parse_f64("psi_center", parts[1])?,
        parse_f64("psi_center", parts[2])?,
    ])
}

impl RunConfig {
    /// Parses config text over the defaults. Unknown and duplicate keys are
    /// errors; `#` starts a comment.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                TurbError::InvalidConfig(format!(
                    "line {}: `{line}` is not of the form key = value",
                    lineno + 1
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            if value.is_empty() {
                return Err(TurbError::InvalidConfig(format!(
                    "line {}: key `{key}` has an empty value",
                    lineno + 1
                )));
            }
            if seen.iter().any(|s| s == key) {
                return Err(TurbError::InvalidConfig(format!(
                    "line {}: duplicate key `{key}`",
                    lineno + 1
                )));
            }
            seen.push(key.to_string());
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_str(&text)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "nu" => self.nu = parse_f64(key, value)?,
            "N" => self.n = parse_usize(key, value)?,
            "dt" => self.dt = parse_f64(key, value)?,
            "shell_lo" => self.shell_lo = parse_i64(key, value)?,
            "shell_hi" => self.shell_hi = parse_i64(key, value)?,
            "epsilon" => self.epsilon = parse_f64(key, value)?,
            "c" => self.c = parse_f64(key, value)?,
            "seed" => self.seed = parse_u64(key, value)?,
            "t_burnin" => self.t_burnin = parse_f64(key, value)?,
            "t_sample" => self.t_sample = parse_f64(key, value)?,
            "snapshot_stride" => self.snapshot_stride = parse_usize(key, value)?,
            "psi_kind" => {
                self.psi_kind = match value {
                    "bump" => CutoffKind::Bump,
                    "uniform" => CutoffKind::Uniform,
                    other => {
                        return Err(TurbError::InvalidConfig(format!(
                            "psi_kind `{other}` must be bump or uniform"
                        )))
                    }
                }
            }
            "psi_center" => self.psi_center = parse_center(value)?,
            "psi_radius" => self.psi_radius = parse_f64(key, value)?,
            "n_dirs" => self.n_dirs = parse_usize(key, value)?,
            "lgrid" => self.lgrid = LgridSpec::parse(value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            other => {
                return Err(TurbError::InvalidConfig(format!(
                    "unknown configuration key `{other}`"
                )))
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        WaveGrid::new(3, self.n)?;
        if !(self.nu > 0.0) {
            return Err(TurbError::InvalidConfig(format!(
                "nu = {} must be positive",
                self.nu
            )));
        }
        if !(self.dt > 0.0) {
            return Err(TurbError::InvalidConfig(format!(
                "dt = {} must be positive",
                self.dt
            )));
        }
        if self.epsilon < 0.0 {
            return Err(TurbError::InvalidConfig(format!(
                "epsilon = {} must be nonnegative",
                self.epsilon
            )));
        }
        if !(self.c > 0.0) {
            return Err(TurbError::InvalidConfig(format!(
                "c = {} must be positive",
                self.c
            )));
        }
        if self.t_burnin < 0.0 || self.t_sample < 0.0 {
            return Err(TurbError::InvalidConfig(
                "t_burnin and t_sample must be nonnegative".into(),
            ));
        }
        if self.snapshot_stride == 0 {
            return Err(TurbError::InvalidConfig(
                "snapshot_stride must be at least 1".into(),
            ));
        }
        if !(1 <= self.shell_lo && self.shell_lo <= self.shell_hi) {
            return Err(TurbError::InvalidConfig(format!(
                "forcing shell [{}, {}] must satisfy 1 <= lo <= hi",
                self.shell_lo, self.shell_hi
            )));
        }
        if self.psi_kind == CutoffKind::Bump && !(self.psi_radius > 0.0 && self.psi_radius < TWO_PI / 2.0)
        {
            return Err(TurbError::InvalidConfig(format!(
                "psi_radius = {} must lie in (0, pi) for a bump cutoff",
                self.psi_radius
            )));
        }
        for x in self.psi_center {
            if !x.is_finite() {
                return Err(TurbError::InvalidConfig(
                    "psi_center coordinates must be finite".into(),
                ));
            }
        }
        if self.n_dirs < 16 {
            return Err(TurbError::InvalidConfig(format!(
                "n_dirs = {} is too few directions, need at least 16",
                self.n_dirs
            )));
        }
        Ok(())
    }

    /// The effective configuration as canonical `(key, value)` text pairs, in
    /// schema order. Floats are printed with 17 significant digits so the
    /// echo parses back to the identical configuration.
    pub fn echo(&self) -> Vec<(&'static str, String)> {
        vec![
            ("nu", fmt_f64(self.nu)),
            ("N", self.n.to_string()),
            ("dt", fmt_f64(self.dt)),
            ("shell_lo", self.shell_lo.to_string()),
            ("shell_hi", self.shell_hi.to_string()),
            ("epsilon", fmt_f64(self.epsilon)),
            ("c", fmt_f64(self.c)),
            ("seed", self.seed.to_string()),
            ("t_burnin", fmt_f64(self.t_burnin)),
            ("t_sample", fmt_f64(self.t_sample)),
            ("snapshot_stride", self.snapshot_stride.to_string()),
            (
                "psi_kind",
                match self.psi_kind {
                    CutoffKind::Bump => "bump".to_string(),
                    CutoffKind::Uniform => "uniform".to_string(),
                },
            ),
            (
                "psi_center",
                format!(
                    "{},{},{}",
                    fmt_f64(self.psi_center[0]),
                    fmt_f64(self.psi_center[1]),
                    fmt_f64(self.psi_center[2])
                ),
            ),
            ("psi_radius", fmt_f64(self.psi_radius)),
            ("n_dirs", self.n_dirs.to_string()),
            ("lgrid", self.lgrid.echo()),
            ("out_dir", self.out_dir.display().to_string()),
        ]
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            nu: self.nu,
            n: self.n,
            shell: [self.shell_lo, self.shell_hi],
            epsilon: self.epsilon,
            drift_scale: self.c,
            dt: self.dt,
            t_burnin: self.t_burnin,
            t_sample: self.t_sample,
            snapshot_stride: self.snapshot_stride,
            seed: self.seed,
            cfl_factor: 0.4,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_echo() {
        let cfg = RunConfig::default();
        let text: String = cfg
            .echo()
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect();
        let back = RunConfig::parse_str(&text).unwrap();
        assert_eq!(format!("{:?}", back), format!("{:?}", cfg));
    }

    #[test]
    fn unknown_and_duplicate_keys_are_rejected()
    {
        assert!(RunConfig::parse_str("turbo = 9").is_err());
        assert!(RunConfig::parse_str("nu = 0.1\nnu = 0.2").is_err());
        assert!(RunConfig::parse_str("nu 0.1").is_err());
        assert!(RunConfig::parse_str("nu =").is_err());
    }

    #[test]
    fn ranges_are_validated() {
        assert!(RunConfig::parse_str("nu = -1").is_err());
        assert!(RunConfig::parse_str("N = 7").is_err());
        assert!(RunConfig::parse_str("dt = 0").is_err());
        assert!(RunConfig::parse_str("shell_lo = 3\nshell_hi = 2").is_err());
        assert!(RunConfig::parse_str("psi_radius = 4.0").is_err());
        assert!(RunConfig::parse_str("psi_radius = 4.0\npsi_kind = uniform").is_ok());
        assert!(RunConfig::parse_str("n_dirs = 4").is_err());
        assert!(RunConfig::parse_str("lgrid = log:0.5:0.1:8").is_err());
        assert!(RunConfig::parse_str("lgrid = list:0.2,0.1").is_err());
        assert!(RunConfig::parse_str("lgrid = list:0.1,0.2,0.4").is_ok());
    }

    #[test]
    fn comments_and_spacing_are_tolerated() {
        let cfg = RunConfig::parse_str("# full line\n  nu = 0.25  # trailing\n\nseed=9\n").unwrap();
        assert_eq!(cfg.nu, 0.25);
        assert_eq!(cfg.seed, 9);
    }
}
