//! `sparc`: encode, decode and simulate sparse superposition codes.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use sparc::se::{ser_prediction, threshold_iteration};
use sparc::sim::{self, SimConfig};
use sparc::{
    bits_to_message, decode, message_to_beta, message_to_bits, DecodeOptions, Message, SeTrace,
    SparcParams,
};

#[derive(Parser)]
#[command(
    name = "sparc",
    version,
    about = "Sparse superposition codes with AMP decoding"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a message into a codeword, optionally passing it through the channel.
    Encode(EncodeArgs),
    /// Decode a received vector.
    Decode(DecodeArgs),
    /// Print a state evolution trace (t, tau2, x, xi, v).
    Se(SeArgs),
    /// Run seeded Monte Carlo trials at one rate.
    Trial(TrialArgs),
    /// Run trials across a list of rates.
    Sweep(SweepArgs),
    /// Check an allocation with the large-system threshold iteration.
    AllocCheck(AllocCheckArgs),
}

#[derive(Clone, Copy, Default, ValueEnum, PartialEq, Eq)]
enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum AllocArg {
    Flat,
    Exp,
    Mod,
}

#[derive(Clone, Copy, ValueEnum)]
enum DesignArg {
    Gaussian,
    Hadamard,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Asymptotic,
    Mc,
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to built-in defaults.
#[derive(Args, Clone, Default)]
struct CodeArgs {
    /// Flat `key = value` config file; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of sections.
    #[arg(long = "L", id = "L")]
    sections: Option<usize>,
    /// Columns per section.
    #[arg(long = "M", id = "M")]
    section_size: Option<usize>,
    /// Rate as a fraction of capacity.
    #[arg(long)]
    rate_frac: Option<f64>,
    #[arg(long)]
    snr: Option<f64>,
    /// Average power P (noise variance is P/snr).
    #[arg(long)]
    power: Option<f64>,
    #[arg(long, value_enum)]
    alloc: Option<AllocArg>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    f: Option<f64>,
    #[arg(long, value_enum)]
    design: Option<DesignArg>,
    #[arg(long)]
    matrix_seed: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    mc_samples: Option<usize>,
    /// Decoder schedule source.
    #[arg(long, value_enum)]
    schedule: Option<ScheduleArg>,
    #[arg(long)]
    t_max: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

impl CodeArgs {
    /// Returns the merged config plus config-file keys it did not recognize.
    fn resolve(&self) -> Result<(SimConfig, Vec<(String, String)>)> {
        let mut cfg = SimConfig::default();
        let mut extra = Vec::new();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            extra = cfg.apply_kv_text(&text)?;
        }
        let mut set = |k: &str, v: Option<String>| -> Result<()> {
            if let Some(v) = v {
                cfg.set(k, &v)?;
            }
            Ok(())
        };
        set("L", self.sections.map(|v| v.to_string()))?;
        set("M", self.section_size.map(|v| v.to_string()))?;
        set("rate-frac", self.rate_frac.map(|v| v.to_string()))?;
        set("snr", self.snr.map(|v| v.to_string()))?;
        set("power", self.power.map(|v| v.to_string()))?;
        set(
            "alloc",
            self.alloc.map(|a| {
                match a {
                    AllocArg::Flat => "flat",
                    AllocArg::Exp => "exp",
                    AllocArg::Mod => "mod",
                }
                .to_string()
            }),
        )?;
        set("kappa", self.kappa.map(|v| v.to_string()))?;
        set("a", self.a.map(|v| v.to_string()))?;
        set("f", self.f.map(|v| v.to_string()))?;
        set(
            "design",
            self.design.map(|d| {
                match d {
                    DesignArg::Gaussian => "gaussian",
                    DesignArg::Hadamard => "hadamard",
                }
                .to_string()
            }),
        )?;
        set("matrix-seed", self.matrix_seed.map(|v| v.to_string()))?;
        set("seed", self.seed.map(|v| v.to_string()))?;
        set("mc-samples", self.mc_samples.map(|v| v.to_string()))?;
        set(
            "schedule",
            self.schedule.map(|s| {
                match s {
                    ScheduleArg::Asymptotic => "asymptotic",
                    ScheduleArg::Mc => "mc",
                }
                .to_string()
            }),
        )?;
        set("t-max", self.t_max.map(|v| v.to_string()))?;
        Ok((cfg, extra))
    }
}

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Message bits, most significant bit first within each section.
    #[arg(long, conflicts_with = "sections")]
    bits: Option<String>,
    /// Comma-separated section indices.
    #[arg(long)]
    sections: Option<String>,
    /// Add AWGN with this seed, producing a received vector.
    #[arg(long)]
    noise_seed: Option<u64>,
}

#[derive(Args)]
struct DecodeArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Received vector: one value per line, or the CSV written by `encode`.
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct SeArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Skip the Monte Carlo estimate of v.
    #[arg(long)]
    no_v: bool,
}

#[derive(Args)]
struct TrialArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    workers: Option<usize>,
    /// Write per-iteration diagnostics CSV here.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Comma-separated rate fractions R/C.
    #[arg(long, value_delimiter = ',')]
    rates: Vec<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct AllocCheckArgs {
    #[command(flatten)]
    code: CodeArgs,
}

fn write_output(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, body).with_context(|| format!("writing {}", path.display())),
        None => {
            io::stdout().write_all(body.as_bytes())?;
            Ok(())
        }
    }
}

fn setup(cfg: &SimConfig) -> Result<(SparcParams, sparc::PowerAllocation)> {
    let params = sparc::derive_params(
        cfg.sections,
        cfg.section_size,
        cfg.rate_frac * sparc::params::capacity(cfg.snr),
        cfg.snr,
        cfg.power,
    )?;
    let alloc = sim::build_allocation(&params, &cfg.alloc)?;
    Ok((params, alloc))
}

fn parse_sections(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .with_context(|| format!("bad section index '{s}'"))
        })
        .collect()
}

fn vector_csv(header: &str, values: &[f64]) -> String {
    let mut s = format!("{header}\n");
    for v in values {
        s.push_str(&sim::fmt_f64(*v));
        s.push('\n');
    }
    s
}

fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut values = Vec::new();
    for line in text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
    {
        match line.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if values.is_empty() => continue, // header
            Err(_) => bail!("bad value '{line}' in {}", path.display()),
        }
    }
    Ok(values)
}

fn matrix_seed(cfg: &SimConfig) -> u64 {
    cfg.matrix_seed.unwrap_or(cfg.seed)
}

fn cmd_encode(args: &EncodeArgs) -> Result<()> {
    let (cfg, _) = args.code.resolve()?;
    let (params, alloc) = setup(&cfg)?;
    let msg = match (&args.bits, &args.sections) {
        (Some(bits), _) => {
            let bits: Vec<bool> = bits
                .chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => bail!("bits must be 0 or 1, got '{c}'"),
                })
                .collect::<Result<_>>()?;
            bits_to_message(&bits, &params)?
        }
        (None, Some(list)) => Message::new(parse_sections(list)?, &params)?,
        (None, None) => {
            let mut rng = sparc::streams::stream_rng(cfg.seed, 1);
            sim::random_message(&params, &mut rng)
        }
    };
    let design = sim::build_design(cfg.design, &params, matrix_seed(&cfg))?;
    let beta = message_to_beta(&msg, &alloc, &params)?;
    let mut x = design.forward(beta.as_slice())?;
    if let Some(noise_seed) = args.noise_seed {
        x = sim::awgn_transmit(
            &x,
            &sim::ChannelConfig {
                sigma2: params.sigma2,
                seed: noise_seed,
            },
        )?;
    }
    let body = match args.code.format {
        Format::Csv => vector_csv(if args.noise_seed.is_some() { "y" } else { "x" }, &x),
        Format::Json => {
            serde_json::to_string_pretty(&serde_json::json!({
                "params": params,
                "sections": msg.sections(),
                "values": x,
                "noisy": args.noise_seed.is_some(),
            }))? + "\n"
        }
    };
    if args.code.out.is_some() {
        println!(
            "sections: {}",
            msg.sections()
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
    }
    write_output(args.code.out.as_deref(), &body)
}

fn cmd_decode(args: &DecodeArgs) -> Result<()> {
    let (cfg, _) = args.code.resolve()?;
    let (params, alloc) = setup(&cfg)?;
    let y = read_vector(&args.input)?;
    let design = sim::build_design(cfg.design, &params, matrix_seed(&cfg))?;
    let schedule = sim::build_schedule(&params, &alloc, &cfg)?;
    let out = decode(
        &y,
        &design,
        &alloc,
        &params,
        &schedule,
        &DecodeOptions::default(),
    )?;
    let bits = message_to_bits(&out.message, &params).ok();
    let body = match args.code.format {
        Format::Csv => {
            let mut s = String::from("section,index\n");
            for (l, j) in out.message.sections().iter().enumerate() {
                s.push_str(&format!("{l},{j}\n"));
            }
            s
        }
        Format::Json => {
            serde_json::to_string_pretty(&serde_json::json!({
                "sections": out.message.sections(),
                "bits": bits.map(|b| b.iter().map(|&x| if x { '1' } else { '0' }).collect::<String>()),
                "iterations": out.iterations_run,
            }))? + "\n"
        }
    };
    write_output(args.code.out.as_deref(), &body)
}

fn trace_body(trace: &SeTrace, format: Format) -> Result<String> {
    Ok(match format {
        Format::Csv => {
            let mut buf = Vec::new();
            trace.write_csv(&mut buf)?;
            String::from_utf8(buf)?
        }
        Format::Json => serde_json::to_string_pretty(trace)? + "\n",
    })
}

fn cmd_se(args: &SeArgs) -> Result<()> {
    let (cfg, _) = args.code.resolve()?;
    let (params, alloc) = setup(&cfg)?;
    params.check_below_capacity()?;
    let mut trace = sim::build_schedule(&params, &alloc, &cfg)?;
    if !args.no_v && trace.v.is_none() {
        let v = ser_prediction(&params, &alloc, &trace.tau2, cfg.mc_samples, cfg.seed)?;
        trace.v = Some(v);
    }
    write_output(
        args.code.out.as_deref(),
        &trace_body(&trace, args.code.format)?,
    )
}

fn cmd_trial(args: &TrialArgs) -> Result<()> {
    let (mut cfg, _) = args.code.resolve()?;
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    let report = sim::with_workers(args.workers, || sim::run_trials(&cfg))??;
    if let Some(path) = &args.diagnostics {
        let mut buf = Vec::new();
        report.write_diagnostics_csv(&mut buf)?;
        fs::write(path, buf).with_context(|| format!("writing {}", path.display()))?;
    }
    let body = match args.code.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => {
            let mut buf = Vec::new();
            report.write_trials_csv(&mut buf)?;
            String::from_utf8(buf)?
        }
    };
    eprintln!(
        "n={} T={} mean_ser={:.3e} zero_error_trials={}/{} se_predicted_ser={}",
        report.params.block_len,
        report.iterations,
        report.mean_ser,
        report.zero_error_trials,
        report.trials.len(),
        report
            .se_predicted_ser
            .map(|v| format!("{v:.3e}"))
            .unwrap_or_else(|| "-".into())
    );
    write_output(args.code.out.as_deref(), &body)
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let (mut cfg, extra) = args.code.resolve()?;
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    let mut rates = args.rates.clone();
    if rates.is_empty() {
        if let Some((_, v)) = extra.iter().find(|(k, _)| k == "rates") {
            rates = v
                .split(',')
                .map(|r| {
                    r.trim()
                        .parse::<f64>()
                        .with_context(|| format!("bad rate '{r}'"))
                })
                .collect::<Result<_>>()?;
        }
    }
    if rates.is_empty() {
        bail!("sweep needs --rates (or `rates = ...` in the config file)");
    }
    let result = sim::with_workers(args.workers, || sim::sweep(&cfg, &rates))??;
    let body = match args.code.format {
        Format::Csv => result.to_csv_string(),
        Format::Json => {
            serde_json::to_string_pretty(&result.reports.iter().collect::<Vec<_>>())? + "\n"
        }
    };
    write_output(args.code.out.as_deref(), &body)
}

fn cmd_alloc_check(args: &AllocCheckArgs) -> Result<()> {
    let (cfg, _) = args.code.resolve()?;
    let (params, alloc) = setup(&cfg)?;
    let trace = threshold_iteration(&params, &alloc, cfg.t_max)?;
    match trace.t_star {
        Some(t) => eprintln!(
            "allocation {:?}: all sections decodable after {t} steps",
            alloc.scheme()
        ),
        None => eprintln!(
            "allocation {:?}: stalls at x={:.6} after {} steps",
            alloc.scheme(),
            trace.x.last().copied().unwrap_or(0.0),
            trace.last_t()
        ),
    }
    write_output(
        args.code.out.as_deref(),
        &trace_body(&trace, args.code.format)?,
    )
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match &cli.command {
        Command::Encode(a) => cmd_encode(a),
        Command::Decode(a) => cmd_decode(a),
        Command::Se(a) => cmd_se(a),
        Command::Trial(a) => cmd_trial(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::AllocCheck(a) => cmd_alloc_check(a),
    }
}
