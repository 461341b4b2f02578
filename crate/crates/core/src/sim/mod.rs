//! AWGN channel, seeded Monte Carlo trials, rate sweeps and their reports.

mod channel;
mod config;
mod sweep;
mod trials;

pub use channel::{awgn_transmit, ChannelConfig};
pub use config::{AllocSpec, DesignKind, ScheduleSource, SimConfig};
pub use sweep::{sweep, SweepResult, SWEEP_CSV_HEADER};
pub use trials::{
    build_allocation, build_design, build_schedule, expected_codeword_power, random_message,
    run_trials, SimReport, TrialResult,
};

/// Formats a float with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Runs `f` on a dedicated pool of `workers` threads, or on the global pool
/// when `workers` is `None`.
pub fn with_workers<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> crate::Result<T> {
    match workers {
        None => Ok(f()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| crate::Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
