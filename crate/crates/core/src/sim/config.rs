use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::se::{DEFAULT_MC_SAMPLES, DEFAULT_T_MAX};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AllocSpec {
    Flat,
    /// `kappa` defaults to `2C`.
    Exponential {
        kappa: Option<f64>,
    },
    /// `a` and `f` default to `R/C`.
    Modified {
        a: Option<f64>,
        f: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignKind {
    Gaussian,
    Hadamard,
}

impl FromStr for DesignKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(DesignKind::Gaussian),
            "hadamard" => Ok(DesignKind::Hadamard),
            _ => Err(Error::Config(format!("unknown design '{s}'"))),
        }
    }
}

/// Where the decoder's `τ²` schedule comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleSource {
    /// Closed-form large-system values (threshold iteration for flat
    /// allocations).
    Asymptotic,
    /// Monte Carlo state evolution at the actual `(n, L, M)`.
    MonteCarlo,
}

impl FromStr for ScheduleSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "asymptotic" => Ok(ScheduleSource::Asymptotic),
            "mc" => Ok(ScheduleSource::MonteCarlo),
            _ => Err(Error::Config(format!("unknown schedule '{s}'"))),
        }
    }
}

/// Everything that defines a simulation campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// `L`.
    pub sections: usize,
    /// `M`.
    pub section_size: usize,
    /// Target `R/C`.
    pub rate_frac: f64,
    pub snr: f64,
    pub power: f64,
    pub alloc: AllocSpec,
    pub design: DesignKind,
    /// One design shared by all trials; fresh per trial when absent.
    pub matrix_seed: Option<u64>,
    pub trials: usize,
    pub seed: u64,
    pub mc_samples: usize,
    pub schedule: ScheduleSource,
    pub t_max: usize,
    /// Decoder iterations beyond the schedule, run at its final `τ²`.
    pub extra_iterations: usize,
    pub early_stop: bool,
    /// Estimate `1 − v_T` by Monte Carlo alongside the trials.
    pub predict_ser: bool,
    /// Record per-trial wall time (makes reports non-reproducible).
    pub record_timing: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            sections: 1024,
            section_size: 512,
            rate_frac: 0.75,
            snr: 15.0,
            power: 15.0,
            alloc: AllocSpec::Exponential { kappa: None },
            design: DesignKind::Hadamard,
            matrix_seed: None,
            trials: 100,
            seed: 0,
            mc_samples: DEFAULT_MC_SAMPLES,
            schedule: ScheduleSource::Asymptotic,
            t_max: DEFAULT_T_MAX,
            extra_iterations: 0,
            early_stop: false,
            predict_ser: true,
            record_timing: false,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value '{value}' for '{key}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("bad boolean '{value}' for '{key}'"))),
    }
}

impl SimConfig {
    /// Sets one field by its flag name (`L`, `M`, `rate-frac`, `alloc`, ...).
    /// `alloc` resets `kappa`/`a`/`f`, so set it before them.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key_norm = key.trim().trim_start_matches("--").replace('_', "-");
        let value = value.trim();
        match key_norm.as_str() {
            "L" => self.sections = parse(key, value)?,
            "M" => self.section_size = parse(key, value)?,
            "rate-frac" => self.rate_frac = parse(key, value)?,
            "snr" => self.snr = parse(key, value)?,
            "power" => self.power = parse(key, value)?,
            "alloc" => {
                self.alloc = match value {
                    "flat" => AllocSpec::Flat,
                    "exp" => AllocSpec::Exponential { kappa: None },
                    "mod" => AllocSpec::Modified { a: None, f: None },
                    _ => return Err(Error::Config(format!("unknown allocation '{value}'"))),
                }
            }
            "kappa" => match &mut self.alloc {
                AllocSpec::Exponential { kappa } => *kappa = Some(parse(key, value)?),
                _ => return Err(Error::Config("kappa needs alloc = exp".into())),
            },
            "a" => match &mut self.alloc {
                AllocSpec::Modified { a, .. } => *a = Some(parse(key, value)?),
                _ => return Err(Error::Config("a needs alloc = mod".into())),
            },
            "f" => match &mut self.alloc {
                AllocSpec::Modified { f, .. } => *f = Some(parse(key, value)?),
                _ => return Err(Error::Config("f needs alloc = mod".into())),
            },
            "design" => self.design = value.parse()?,
            "matrix-seed" => self.matrix_seed = Some(parse(key, value)?),
            "trials" => self.trials = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "mc-samples" => self.mc_samples = parse(key, value)?,
            "schedule" => self.schedule = value.parse()?,
            "t-max" => self.t_max = parse(key, value)?,
            "extra-iterations" => self.extra_iterations = parse(key, value)?,
            "early-stop" => self.early_stop = parse_bool(key, value)?,
            "predict-ser" => self.predict_ser = parse_bool(key, value)?,
            "record-timing" => self.record_timing = parse_bool(key, value)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Parses flat `key = value` lines; `#` starts a comment. Keys that are
    /// not config fields are returned for the caller to interpret.
    pub fn apply_kv_text(&mut self, text: &str) -> Result<Vec<(String, String)>> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            pairs.push((k.trim().to_string(), v.trim().trim_matches('"').to_string()));
        }
        // alloc first so that kappa/a/f attach to the right scheme
        pairs.sort_by_key(|(k, _)| k != "alloc");
        let mut extra = Vec::new();
        for (k, v) in pairs {
            match self.set(&k, &v) {
                Err(Error::Config(msg)) if msg.starts_with("unknown key") => extra.push((k, v)),
                other => other?,
            }
        }
        Ok(extra)
    }
}
