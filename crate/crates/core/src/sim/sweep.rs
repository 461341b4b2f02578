use std::io::{self, Write};

use super::config::SimConfig;
use super::fmt_f64;
use super::trials::{run_trials, SimReport};
use crate::error::{invalid, Result};
use crate::params::{capacity, derive_params};

pub const SWEEP_CSV_HEADER: &str =
    "rate_frac,n,mean_ser,stderr,se_predicted_ser,zero_error_trials,trials,no_errors_observed";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub reports: Vec<SimReport>,
}

impl SweepResult {
    /// One row per rate. `no_errors_observed` flags cells where every trial
    /// was error-free (`mean_ser` is then exactly 0).
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{SWEEP_CSV_HEADER}")?;
        for r in &self.reports {
            let no_errors = !r.trials.is_empty() && r.zero_error_trials == r.trials.len();
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                fmt_f64(r.config.rate_frac),
                r.params.block_len,
                fmt_f64(r.mean_ser),
                fmt_f64(r.ser_stderr),
                r.se_predicted_ser.map(fmt_f64).unwrap_or_default(),
                r.zero_error_trials,
                r.trials.len(),
                no_errors
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// Runs [`run_trials`] once per rate fraction; `n` is recomputed for each
/// rate. All rates are validated before any trial runs.
pub fn sweep(base: &SimConfig, rate_fracs: &[f64]) -> Result<SweepResult> {
    if rate_fracs.is_empty() {
        return Err(invalid("sweep needs at least one rate"));
    }
    let c = capacity(base.snr);
    for &frac in rate_fracs {
        let params = derive_params(
            base.sections,
            base.section_size,
            frac * c,
            base.snr,
            base.power,
        )?;
        params.check_below_capacity()?;
    }
    let reports = rate_fracs
        .iter()
        .map(|&frac| {
            let cfg = SimConfig {
                rate_frac: frac,
                ..base.clone()
            };
            run_trials(&cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { reports })
}
