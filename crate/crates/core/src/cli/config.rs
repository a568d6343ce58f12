use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};

use super::{usage, CliError};
use crate::channels::MAX_FULL_DIM;
use crate::oracle::DEFAULT_FD_STEP;
use crate::qfim::MAX_CLOSED_FORM_DIM;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Machine {
    Pure,
    Uqcm,
    Pqcm,
    Shrink,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

pub const DEFAULT_SEED: u64 = 20140901;
pub const DEFAULT_FIGURE_DMAX: usize = 20;
pub const DEFAULT_VERIFY_DMAX: usize = 8;

/// Flags shared by every subcommand; unset values may come from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub machine: Option<Machine>,
    /// Shrinking factor in (0, 1]; only for --machine shrink.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub dmin: Option<usize>,
    #[arg(long)]
    pub dmax: Option<usize>,
    /// Comma-separated φ₁..φ_{d−1}; requires dmin = dmax = count + 1.
    #[arg(long)]
    pub phases: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub fd_step: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(skip)]
    pub tolerances: BTreeMap<String, f64>,
}

pub type ConfigFile = BTreeMap<String, String>;

/// Reads `key = value` lines; `#` starts a comment, values may be quoted.
pub fn read_config_file(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ConfigFile, CliError> {
    let mut map = ConfigFile::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key = value", lineno + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim().trim_matches('"').to_string();
        map.insert(key, value);
    }
    Ok(map)
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| usage(format!("invalid value {value:?} for {key}")))
}

fn parse_enum<T: ValueEnum>(key: &str, value: &str) -> Result<T, CliError> {
    T::from_str(value, true).map_err(|_| usage(format!("invalid value {value:?} for {key}")))
}

impl SweepArgs {
    /// Fills every unset flag from the config file.
    pub fn merged(mut self, file: &ConfigFile) -> Result<Self, CliError> {
        for (key, value) in file {
            match key.as_str() {
                "machine" => {
                    if self.machine.is_none() {
                        self.machine = Some(parse_enum(key, value)?);
                    }
                }
                "format" => {
                    if self.format.is_none() {
                        self.format = Some(parse_enum(key, value)?);
                    }
                }
                "eta" => self.eta = self.eta.or(Some(parse_value(key, value)?)),
                "dmin" => self.dmin = self.dmin.or(Some(parse_value(key, value)?)),
                "dmax" => self.dmax = self.dmax.or(Some(parse_value(key, value)?)),
                "seed" => self.seed = self.seed.or(Some(parse_value(key, value)?)),
                "fd-step" => self.fd_step = self.fd_step.or(Some(parse_value(key, value)?)),
                "phases" => {
                    if self.phases.is_none() {
                        self.phases = Some(value.clone());
                    }
                }
                "out" => {
                    if self.out.is_none() {
                        self.out = Some(PathBuf::from(value));
                    }
                }
                k if k.starts_with("tol.") => {
                    let name = k["tol.".len()..].replace('-', "_");
                    self.tolerances
                        .entry(name)
                        .or_insert(parse_value(key, value)?);
                }
                other => return Err(usage(format!("unknown config key {other:?}"))),
            }
        }
        Ok(self)
    }
}

/// Validated sweep parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub machine: Machine,
    pub eta: Option<f64>,
    pub d_min: usize,
    pub d_max: usize,
    pub phases: Option<Vec<f64>>,
    pub seed: u64,
    pub fd_step: f64,
    pub tolerances: BTreeMap<String, f64>,
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

impl SweepConfig {
    fn base(args: &SweepArgs, default_dmax: usize, limit: usize) -> Result<Self, CliError> {
        let d_min = args.dmin.unwrap_or(2);
        let d_max = args.dmax.unwrap_or(default_dmax.max(d_min));
        if d_min < 2 || d_min > d_max {
            return Err(usage(format!(
                "need 2 <= dmin <= dmax, got {d_min}..{d_max}"
            )));
        }
        if d_max > limit {
            return Err(usage(format!("dmax {d_max} exceeds {limit}")));
        }
        let fd_step = args.fd_step.unwrap_or(DEFAULT_FD_STEP);
        if !(fd_step > 0.0 && fd_step.is_finite()) {
            return Err(usage("fd-step must be positive"));
        }
        if let Some((name, _)) = args
            .tolerances
            .iter()
            .find(|(_, v)| v.is_nan() || **v < 0.0)
        {
            return Err(usage(format!("tolerance {name} must be non-negative")));
        }
        Ok(Self {
            machine: args.machine.unwrap_or(Machine::Uqcm),
            eta: args.eta,
            d_min,
            d_max,
            phases: None,
            seed: args.seed.unwrap_or(DEFAULT_SEED),
            fd_step,
            tolerances: args.tolerances.clone(),
            output_path: args.out.clone(),
            format: args.format.unwrap_or_default(),
        })
    }

    pub fn for_compute(args: SweepArgs) -> Result<Self, CliError> {
        let machine = args
            .machine
            .ok_or_else(|| usage("compute needs --machine pure|uqcm|pqcm|shrink"))?;
        let mut cfg = Self::base(&args, DEFAULT_FIGURE_DMAX, MAX_CLOSED_FORM_DIM)?;
        match (machine, args.eta) {
            (Machine::Shrink, None) => return Err(usage("--machine shrink requires --eta")),
            (Machine::Shrink, Some(eta)) if !(eta > 0.0 && eta <= 1.0) => {
                return Err(usage(format!("--eta {eta} outside (0, 1]")))
            }
            (Machine::Shrink, Some(_)) => {}
            (_, Some(_)) => return Err(usage("--eta only applies to --machine shrink")),
            (_, None) => {}
        }
        if let Some(text) = &args.phases {
            let phases = text
                .split(',')
                .map(|s| parse_value::<f64>("phases", s.trim()))
                .collect::<Result<Vec<_>, _>>()?;
            let d = phases.len() + 1;
            if cfg.d_min != d || cfg.d_max != d {
                return Err(usage(format!(
                    "{} phases fix d = {d}; set --dmin {d} --dmax {d}",
                    phases.len()
                )));
            }
            cfg.phases = Some(phases);
        }
        cfg.machine = machine;
        Ok(cfg)
    }

    pub fn for_figure(args: SweepArgs) -> Result<Self, CliError> {
        let cfg = Self::base(&args, DEFAULT_FIGURE_DMAX, MAX_CLOSED_FORM_DIM)?;
        if cfg.d_max < 3 {
            return Err(usage("figures need dmax >= 3"));
        }
        Ok(cfg)
    }

    pub fn for_verify(args: SweepArgs) -> Result<Self, CliError> {
        Self::base(&args, DEFAULT_VERIFY_DMAX, MAX_FULL_DIM)
    }

    /// Named tolerance override, or `default`.
    pub fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }
}
