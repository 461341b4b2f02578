use std::io::{self, Write};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::channel::{awgn_transmit, ChannelConfig};
use super::config::{AllocSpec, DesignKind, ScheduleSource, SimConfig};
use super::fmt_f64;
use crate::amp::{decode, DecodeOptions, IterationDiagnostics};
use crate::design::{DesignOperator, GaussianDesign, HadamardDesign};
use crate::error::Result;
use crate::params::{derive_params, message_to_beta, section_errors, Message, SparcParams};
use crate::power::PowerAllocation;
use crate::se::{
    asymptotic_se_exponential, asymptotic_se_modified, mc_state_evolution_to_plateau,
    predicted_ser, threshold_iteration, SeTrace,
};
use crate::streams::{stream_rng, trial_seed, StreamTag};

/// Stream id offset for state evolution Monte Carlo, far from trial streams.
const SE_SEED_SALT: u64 = 0x5e5e_5e5e_5e5e_5e5e;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: u64,
    /// Seed of the message stream; with the master seed and trial index it
    /// identifies the trial.
    pub seed: u64,
    pub section_errors: usize,
    pub ser: f64,
    /// Only defined when `M` is a power of two.
    pub bit_errors: Option<u64>,
    pub iterations_run: usize,
    /// `‖Aβ₀‖²/n`.
    pub codeword_power: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time_ms: Option<f64>,
    #[serde(skip)]
    pub diagnostics: Vec<IterationDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub config: SimConfig,
    pub params: SparcParams,
    pub allocation: crate::power::AllocScheme,
    /// Decoder iterations per trial.
    pub iterations: usize,
    pub schedule: SeTrace,
    pub trials: Vec<TrialResult>,
    pub mean_ser: f64,
    pub ser_stderr: f64,
    pub zero_error_trials: usize,
    /// State evolution prediction `1 − v_T`.
    pub se_predicted_ser: Option<f64>,
    pub mean_codeword_power: f64,
}

impl SimReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Per-trial rows.
    pub fn write_trials_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "trial,section_errors,ser,bit_errors,iterations_run,codeword_power"
        )?;
        for t in &self.trials {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                t.trial,
                t.section_errors,
                fmt_f64(t.ser),
                t.bit_errors.map(|b| b.to_string()).unwrap_or_default(),
                t.iterations_run,
                fmt_f64(t.codeword_power)
            )?;
        }
        Ok(())
    }

    /// `trial,t,nmse,weighted_correct_fraction` rows.
    pub fn write_diagnostics_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "trial,t,nmse,weighted_correct_fraction")?;
        for tr in &self.trials {
            for d in &tr.diagnostics {
                writeln!(
                    w,
                    "{},{},{},{}",
                    tr.trial,
                    d.t,
                    fmt_f64(d.nmse),
                    fmt_f64(d.weighted_correct_fraction)
                )?;
            }
        }
        Ok(())
    }

    /// Mean over trials of `1 − β₀ᵀβ^t/(nP)` for each iteration `t`.
    pub fn mean_power_gap(&self) -> Vec<f64> {
        let len = self
            .trials
            .iter()
            .map(|t| t.diagnostics.len())
            .max()
            .unwrap_or(0);
        (0..len)
            .map(|t| {
                let vals: Vec<f64> = self
                    .trials
                    .iter()
                    .filter_map(|tr| tr.diagnostics.get(t))
                    .map(|d| 1.0 - d.weighted_correct_fraction)
                    .collect();
                vals.iter().sum::<f64>() / vals.len() as f64
            })
            .collect()
    }
}

pub fn build_allocation(params: &SparcParams, spec: &AllocSpec) -> Result<PowerAllocation> {
    match *spec {
        AllocSpec::Flat => Ok(PowerAllocation::flat(params)),
        AllocSpec::Exponential { kappa } => {
            PowerAllocation::exponential(params, kappa.unwrap_or(2.0 * params.capacity))
        }
        AllocSpec::Modified { a, f } => {
            let guess = params.rate / params.capacity;
            PowerAllocation::modified(params, a.unwrap_or(guess), f.unwrap_or(guess))
        }
    }
}

/// The decoder schedule for a configuration. The asymptotic source uses the
/// closed forms where they exist: `κ = 2C` exactly, otherwise an exponential
/// allocation is the `(a, f) = (κ/2C, 1)` case of the modified one. Flat
/// allocations use the threshold iteration. The Monte Carlo source runs at
/// least as many steps as the asymptotic schedule, then on until `x`
/// plateaus or `t_max` is reached.
pub fn build_schedule(
    params: &SparcParams,
    alloc: &PowerAllocation,
    config: &SimConfig,
) -> Result<SeTrace> {
    let asymptotic = match config.alloc {
        AllocSpec::Exponential { kappa } => {
            let two_c = 2.0 * params.capacity;
            match kappa {
                Some(k) if k != two_c => {
                    asymptotic_se_modified(params, k / two_c, 1.0, config.t_max)?
                }
                _ => asymptotic_se_exponential(params)?,
            }
        }
        AllocSpec::Modified { a, f } => {
            let guess = params.rate / params.capacity;
            asymptotic_se_modified(params, a.unwrap_or(guess), f.unwrap_or(guess), config.t_max)?
        }
        AllocSpec::Flat => threshold_iteration(params, alloc, config.t_max)?,
    };
    match config.schedule {
        ScheduleSource::Asymptotic => Ok(asymptotic),
        ScheduleSource::MonteCarlo => mc_state_evolution_to_plateau(
            params,
            alloc,
            asymptotic.iterations().max(1),
            config.t_max,
            config.mc_samples,
            config.seed ^ SE_SEED_SALT,
        ),
    }
}

pub fn build_design(
    kind: DesignKind,
    params: &SparcParams,
    seed: u64,
) -> Result<Box<dyn DesignOperator>> {
    Ok(match kind {
        DesignKind::Gaussian => {
            Box::new(GaussianDesign::new(params.block_len, params.columns, seed)?)
        }
        DesignKind::Hadamard => {
            Box::new(HadamardDesign::new(params.block_len, params.columns, seed)?)
        }
    })
}

/// Expected `‖Aβ‖²/n` over designs and messages. Gaussian designs give `P`.
/// Hadamard designs lose the all-ones direction, so the mean is
/// `(N·P − (Σ_ℓ √P_ℓ)²)/(N − 1)`, slightly below `P` for small `M`.
pub fn expected_codeword_power(
    params: &SparcParams,
    alloc: &PowerAllocation,
    design: DesignKind,
) -> f64 {
    match design {
        DesignKind::Gaussian => alloc.total(),
        DesignKind::Hadamard => {
            let cols = params.columns as f64;
            let root_sum: f64 = alloc.values().iter().map(|p| p.sqrt()).sum();
            (cols * alloc.total() - root_sum * root_sum) / (cols - 1.0)
        }
    }
}

/// Uniform message from the trial's message stream.
pub fn random_message<R: Rng>(params: &SparcParams, rng: &mut R) -> Message {
    let sections = (0..params.sections)
        .map(|_| rng.random_range(0..params.section_size))
        .collect();
    Message::new(sections, params).expect("indices drawn in range")
}

fn bit_errors(sent: &Message, decoded: &Message, params: &SparcParams) -> Option<u64> {
    if !params.section_size.is_power_of_two() {
        return None;
    }
    Some(
        sent.sections()
            .iter()
            .zip(decoded.sections())
            .map(|(a, b)| (a ^ b).count_ones() as u64)
            .sum(),
    )
}

struct Campaign<'a> {
    config: &'a SimConfig,
    params: SparcParams,
    alloc: PowerAllocation,
    schedule: SeTrace,
    /// `schedule` with its final state held for the extra iterations.
    decoder_schedule: SeTrace,
    iterations: usize,
    shared_design: Option<Box<dyn DesignOperator>>,
}

impl Campaign<'_> {
    fn run_one(&self, trial: u64) -> Result<TrialResult> {
        let start = Instant::now();
        let cfg = self.config;
        let owned;
        let design: &dyn DesignOperator = match &self.shared_design {
            Some(d) => d.as_ref(),
            None => {
                owned = build_design(
                    cfg.design,
                    &self.params,
                    trial_seed(cfg.seed, trial, StreamTag::Matrix),
                )?;
                owned.as_ref()
            }
        };
        let msg_seed = trial_seed(cfg.seed, trial, StreamTag::Message);
        let mut msg_rng = stream_rng(msg_seed, 0);
        let sent = random_message(&self.params, &mut msg_rng);
        let beta0 = message_to_beta(&sent, &self.alloc, &self.params)?;
        let x = design.forward(beta0.as_slice())?;
        let n = self.params.block_len as f64;
        let codeword_power = x.iter().map(|v| v * v).sum::<f64>() / n;
        let channel = ChannelConfig {
            sigma2: self.params.sigma2,
            seed: trial_seed(cfg.seed, trial, StreamTag::Noise),
        };
        let y = awgn_transmit(&x, &channel)?;
        let opts = DecodeOptions {
            iterations: Some(self.iterations),
            early_stop: cfg.early_stop,
            truth: Some(&beta0),
        };
        let out = decode(
            &y,
            design,
            &self.alloc,
            &self.params,
            &self.decoder_schedule,
            &opts,
        )?;
        let errors = section_errors(&sent, &out.message);
        Ok(TrialResult {
            trial,
            seed: msg_seed,
            section_errors: errors,
            ser: errors as f64 / self.params.sections as f64,
            bit_errors: bit_errors(&sent, &out.message, &self.params),
            iterations_run: out.iterations_run,
            codeword_power,
            wall_time_ms: cfg
                .record_timing
                .then(|| start.elapsed().as_secs_f64() * 1e3),
            diagnostics: out.diagnostics,
        })
    }
}

/// Runs `config.trials` independent encode/transmit/decode trials in
/// parallel. Each trial's design, message and noise come from streams keyed
/// by `(seed, trial index)`, so the report does not depend on the worker
/// count.
pub fn run_trials(config: &SimConfig) -> Result<SimReport> {
    let params = derive_params(
        config.sections,
        config.section_size,
        config.rate_frac * crate::params::capacity(config.snr),
        config.snr,
        config.power,
    )?;
    params.check_below_capacity()?;
    let alloc = build_allocation(&params, &config.alloc)?;
    let schedule = build_schedule(&params, &alloc, config)?;
    if schedule.t_star.is_none() {
        log::warn!(
            "state evolution stops at x={} after {} steps",
            schedule.x.last().copied().unwrap_or(0.0),
            schedule.iterations()
        );
    }
    let shared_design = match config.matrix_seed {
        Some(seed) => Some(build_design(config.design, &params, seed)?),
        None => {
            // validate the shape once so errors surface even with zero trials
            if config.design == DesignKind::Hadamard && !params.columns.is_power_of_two() {
                return Err(crate::Error::NotPowerOfTwo(params.columns));
            }
            None
        }
    };
    let iterations = schedule.iterations() + config.extra_iterations;
    let mut decoder_schedule = schedule.clone();
    decoder_schedule.hold_final(config.extra_iterations);
    let campaign = Campaign {
        config,
        params,
        alloc,
        schedule,
        decoder_schedule,
        iterations,
        shared_design,
    };
    let trials = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| campaign.run_one(t))
        .collect::<Result<Vec<_>>>()?;

    let count = trials.len();
    let (mean_ser, ser_stderr, mean_power) = if count == 0 {
        (0.0, 0.0, 0.0)
    } else {
        let k = count as f64;
        let mean = trials.iter().map(|t| t.ser).sum::<f64>() / k;
        let var = if count > 1 {
            trials.iter().map(|t| (t.ser - mean).powi(2)).sum::<f64>() / (k - 1.0)
        } else {
            0.0
        };
        let power = trials.iter().map(|t| t.codeword_power).sum::<f64>() / k;
        (mean, (var / k).sqrt(), power)
    };
    let expected_power = expected_codeword_power(&params, &campaign.alloc, config.design);
    if count >= 100 && (mean_power - expected_power).abs() > 0.02 * expected_power {
        log::warn!(
            "mean codeword power {mean_power} deviates from its expectation {expected_power} by more than 2%"
        );
    }
    let se_predicted_ser = if config.predict_ser {
        match campaign.schedule.predicted_ser() {
            Some(p) => Some(p),
            None => Some(predicted_ser(
                &params,
                &campaign.alloc,
                &campaign.schedule,
                config.mc_samples,
                config.seed ^ SE_SEED_SALT,
            )?),
        }
    } else {
        None
    };
    Ok(SimReport {
        config: config.clone(),
        params,
        allocation: campaign.alloc.scheme(),
        iterations: campaign.iterations,
        schedule: campaign.schedule,
        zero_error_trials: trials.iter().filter(|t| t.section_errors == 0).count(),
        trials,
        mean_ser,
        ser_stderr,
        se_predicted_ser,
        mean_codeword_power: mean_power,
    })
}
