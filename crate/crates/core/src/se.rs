//! State evolution: the effective noise schedule `τ_t²` and the power-weighted
//! decoded fraction `x_t` that drive the decoder.
//!
//! Four routes are provided:
//! - [`mc_state_evolution`] estimates the finite-size expectation by Monte Carlo;
//! - [`asymptotic_se_exponential`] is the closed form for `P_ℓ ∝ 2^(−2Cℓ/L)`;
//! - [`asymptotic_se_modified`] is the closed form for the `(a, f)` allocation;
//! - [`threshold_iteration`] applies the large-system decodability threshold
//!   section by section for any non-increasing allocation.
//!
//! Every route keeps `τ_t² = σ² + P(1 − x_t)` exactly.

use std::f64::consts::LN_2;
use std::io::{self, Write};

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::params::SparcParams;
use crate::power::PowerAllocation;
use crate::softmax::first_entry_weight;
use crate::streams::stream_rng;

/// Default number of Monte Carlo draws per section.
pub const DEFAULT_MC_SAMPLES: usize = 1000;

/// Iteration cap for the closed-form modified-allocation recursion.
pub const DEFAULT_T_MAX: usize = 200;

const ONE_TOL: f64 = 1e-12;

/// Smallest per-step gain in `x` that keeps a Monte Carlo schedule going.
pub const MC_PLATEAU_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeMode {
    MonteCarlo,
    AsymptoticExponential,
    AsymptoticModified,
    Threshold,
}

/// A state evolution trajectory, indexed by iteration `t = 0..=T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeTrace {
    pub mode: SeMode,
    /// `τ_t²`.
    pub tau2: Vec<f64>,
    /// `x_t`, with `x_0 = 0`.
    pub x: Vec<f64>,
    /// `ξ_t`: fraction of sections decodable in step `t+1` (closed-form and
    /// threshold modes only).
    pub xi: Option<Vec<f64>>,
    /// `v_t`: unweighted fraction of correctly decoded sections, with `v_0 = 0`.
    pub v: Option<Vec<f64>>,
    /// First iteration at which `x_t` reaches one, if it does.
    pub t_star: Option<usize>,
    pub sigma2: f64,
    pub power: f64,
}

impl SeTrace {
    fn start(mode: SeMode, params: &SparcParams) -> Self {
        SeTrace {
            mode,
            tau2: vec![params.sigma2 + params.power],
            x: vec![0.0],
            xi: None,
            v: None,
            t_star: None,
            sigma2: params.sigma2,
            power: params.power,
        }
    }

    fn push_x(&mut self, x: f64) {
        self.tau2.push(self.sigma2 + self.power * (1.0 - x));
        self.x.push(x);
    }

    /// Repeats the final state `extra` more times, for decoders that keep
    /// iterating at the fixed point.
    pub(crate) fn hold_final(&mut self, extra: usize) {
        let x = *self.x.last().expect("trace starts non-empty");
        for _ in 0..extra {
            self.push_x(x);
        }
    }

    /// Index of the last entry, `T`.
    pub fn last_t(&self) -> usize {
        self.x.len() - 1
    }

    /// Number of decoder iterations this schedule calls for: `t_star` when
    /// defined, otherwise the full length of the trace.
    pub fn iterations(&self) -> usize {
        self.t_star.unwrap_or_else(|| self.last_t())
    }

    /// Predicted section error rate `1 − v_T` at the decoder's final
    /// iteration, when `v` has been filled in.
    pub fn predicted_ser(&self) -> Option<f64> {
        let v = self.v.as_ref()?;
        v.get(self.iterations()).map(|v| 1.0 - v)
    }

    /// Checks the structural invariants: the `τ²`/`x` relation, `x ∈ [0, 1]`
    /// non-decreasing, `τ²` non-increasing with floor `σ²`.
    pub fn check_structure(&self) -> Result<()> {
        if self.tau2.len() != self.x.len() || self.x.is_empty() {
            return Err(invalid("trace columns have inconsistent lengths"));
        }
        if self.tau2[0] != self.sigma2 + self.power || self.x[0] != 0.0 {
            return Err(invalid("trace does not start at x=0, tau2=sigma2+P"));
        }
        for (t, (&tau2, &x)) in self.tau2.iter().zip(&self.x).enumerate() {
            if tau2 != self.sigma2 + self.power * (1.0 - x) {
                return Err(invalid(format!("tau2 != sigma2 + P(1-x) at t={t}")));
            }
            if !(0.0..=1.0).contains(&x) {
                return Err(invalid(format!("x={x} outside [0,1] at t={t}")));
            }
            if tau2 < self.sigma2 {
                return Err(invalid(format!("tau2 below sigma2 at t={t}")));
            }
        }
        for t in 1..self.x.len() {
            if self.x[t] < self.x[t - 1] {
                return Err(invalid(format!("x decreases at t={t}")));
            }
            if self.tau2[t] > self.tau2[t - 1] {
                return Err(invalid(format!("tau2 increases at t={t}")));
            }
        }
        Ok(())
    }

    /// Writes `t,tau2,x,xi,v` rows; absent columns are left empty.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,tau2,x,xi,v")?;
        let opt = |col: &Option<Vec<f64>>, t: usize| {
            col.as_ref()
                .and_then(|c| c.get(t))
                .map(|v| crate::sim::fmt_f64(*v))
                .unwrap_or_default()
        };
        for t in 0..self.x.len() {
            writeln!(
                w,
                "{},{},{},{},{}",
                t,
                crate::sim::fmt_f64(self.tau2[t]),
                crate::sim::fmt_f64(self.x[t]),
                opt(&self.xi, t),
                opt(&self.v, t)
            )?;
        }
        Ok(())
    }
}

/// Number of iterations for the exponential allocation:
/// `⌈2C / log2(C/R)⌉`.
pub fn t_star(capacity: f64, rate: f64) -> Result<usize> {
    if !(rate > 0.0 && capacity > 0.0) {
        return Err(invalid("rate and capacity must be positive"));
    }
    let gap = (capacity / rate).log2();
    if rate >= capacity || gap <= 1e-12 {
        return Err(Error::RateAboveCapacity { rate, capacity });
    }
    Ok((2.0 * capacity / gap).ceil() as usize)
}

/// Monte Carlo estimate of the expected posterior weight on the true column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    /// Power-weighted fraction `x`.
    pub x: f64,
    /// Standard error of `x`.
    pub x_stderr: f64,
    /// Unweighted fraction `v`.
    pub v: f64,
}

/// Estimates `x(τ)` and `v(τ)` at effective noise variance `tau2`.
///
/// Section `ℓ` draws its Gaussians from stream `ℓ` of `seed`, so the same
/// seed gives common random numbers across `τ` values and results do not
/// depend on the worker count.
pub fn mc_expected_fraction(
    params: &SparcParams,
    alloc: &PowerAllocation,
    tau2: f64,
    mc_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if mc_samples == 0 {
        return Err(invalid("mc_samples must be at least 1"));
    }
    if !(tau2 > 0.0) {
        return Err(invalid(format!("tau2 must be positive, got {tau2}")));
    }
    crate::error::check_len(params.sections, alloc.len())?;
    let m = params.section_size;
    let n = params.block_len as f64;
    let tau = tau2.sqrt();
    let stats: Vec<(f64, f64)> = alloc
        .values()
        .par_iter()
        .enumerate()
        .map(|(l, &p)| {
            let b = (n * p).sqrt() / tau;
            let mut rng = stream_rng(seed, l as u64);
            let mut u = vec![0.0; m];
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..mc_samples {
                for x in u.iter_mut() {
                    *x = StandardNormal.sample(&mut rng);
                }
                let w = first_entry_weight(b, &u);
                sum += w;
                sum_sq += w * w;
            }
            let k = mc_samples as f64;
            let mean = sum / k;
            let var = if mc_samples > 1 {
                ((sum_sq - k * mean * mean) / (k - 1.0)).max(0.0)
            } else {
                0.0
            };
            (mean, var / k)
        })
        .collect();
    let total = alloc.total();
    let mut x = 0.0;
    let mut x_var = 0.0;
    let mut v = 0.0;
    for (&p, &(mean, mean_var)) in alloc.values().iter().zip(&stats) {
        let w = p / total;
        x += w * mean;
        x_var += w * w * mean_var;
        v += mean;
    }
    Ok(McEstimate {
        x: x.clamp(0.0, 1.0),
        x_stderr: x_var.sqrt(),
        v: (v / alloc.len() as f64).clamp(0.0, 1.0),
    })
}

/// Finite-size state evolution with the expectation estimated by Monte
/// Carlo. Runs `t_max` steps, or stops early once `x` reaches one.
pub fn mc_state_evolution(
    params: &SparcParams,
    alloc: &PowerAllocation,
    t_max: usize,
    mc_samples: usize,
    seed: u64,
) -> Result<SeTrace> {
    mc_trace(params, alloc, t_max, mc_samples, seed, None)
}

/// Like [`mc_state_evolution`], but after `min_steps` stops as soon as one
/// step raises `x` by less than [`MC_PLATEAU_TOL`]. Finite-size traces
/// approach `x = 1` only slowly, so this is the natural length for a
/// decoder schedule.
pub fn mc_state_evolution_to_plateau(
    params: &SparcParams,
    alloc: &PowerAllocation,
    min_steps: usize,
    t_max: usize,
    mc_samples: usize,
    seed: u64,
) -> Result<SeTrace> {
    mc_trace(params, alloc, t_max, mc_samples, seed, Some(min_steps))
}

fn mc_trace(
    params: &SparcParams,
    alloc: &PowerAllocation,
    t_max: usize,
    mc_samples: usize,
    seed: u64,
    plateau_after: Option<usize>,
) -> Result<SeTrace> {
    if t_max == 0 {
        return Err(invalid("t_max must be at least 1"));
    }
    let mut trace = SeTrace::start(SeMode::MonteCarlo, params);
    let mut v = vec![0.0];
    for t in 0..t_max {
        let est = mc_expected_fraction(params, alloc, trace.tau2[t], mc_samples, seed)?;
        let x = if est.x >= 1.0 - ONE_TOL { 1.0 } else { est.x };
        let gain = x - trace.x[t];
        trace.push_x(x);
        v.push(est.v);
        if x == 1.0 {
            trace.t_star = Some(t + 1);
            break;
        }
        if plateau_after.is_some_and(|min| t + 1 >= min && gain < MC_PLATEAU_TOL) {
            break;
        }
    }
    trace.v = Some(v);
    Ok(trace)
}

/// Closed-form large-system state evolution for the allocation
/// `P_ℓ ∝ 2^(−2Cℓ/L)`: `ξ` grows by `log2(C/R)/(2C)` per step until it
/// reaches one, at `t = T*`.
pub fn asymptotic_se_exponential(params: &SparcParams) -> Result<SeTrace> {
    params.check_below_capacity()?;
    let c = params.capacity;
    let steps = t_star(c, params.rate)?;
    let step = (c / params.rate).log2() / (2.0 * c);
    let growth = 1.0 + params.snr;
    let mut trace = SeTrace::start(SeMode::AsymptoticExponential, params);
    let mut xi = Vec::with_capacity(steps + 1);
    for t in 0..=steps {
        // ξ_t; forced to one from step T*−1 on so the trace ends exactly at T*.
        let xi_t = if t + 1 >= steps {
            1.0
        } else {
            (t + 1) as f64 * step
        };
        xi.push(xi_t);
        if t < steps {
            let x = if xi_t >= 1.0 {
                1.0
            } else {
                (growth - growth.powf(1.0 - xi_t)) / params.snr
            };
            trace.push_x(x);
        }
    }
    trace.xi = Some(xi);
    trace.t_star = Some(steps);
    Ok(trace)
}

/// Closed-form large-system state evolution for the modified `(a, f)`
/// allocation. Once the decodable prefix reaches the flat tail every
/// remaining section crosses the threshold together and `x` jumps to one.
///
/// Stops when `x` reaches one, when it stops increasing, or after `t_max`
/// steps.
pub fn asymptotic_se_modified(
    params: &SparcParams,
    a: f64,
    f: f64,
    t_max: usize,
) -> Result<SeTrace> {
    params.check_below_capacity()?;
    if !(a >= 0.0 && a.is_finite()) {
        return Err(invalid(format!("a must be non-negative, got {a}")));
    }
    if !(0.0..=1.0).contains(&f) {
        return Err(invalid(format!("f must lie in [0, 1], got {f}")));
    }
    if t_max == 0 {
        return Err(invalid("t_max must be at least 1"));
    }
    let (c, r, p) = (params.capacity, params.rate, params.power);
    let mut trace = SeTrace::start(SeMode::AsymptoticModified, params);
    let mut xi_seq = Vec::new();
    let ac2 = 2.0 * a * c;
    let knee = (ac2 * f).exp2();
    let bracket = knee + (1.0 - f) * ac2 * LN_2 - 1.0;
    let denom = 1.0 + (-ac2 * f).exp2() * ((1.0 - f) * ac2 * LN_2 - 1.0);
    for t in 0..t_max {
        let tau2 = trace.tau2[t];
        let (xi, x) = if a == 0.0 {
            // Flat: every section has L·P_ℓ = P.
            if p > 2.0 * LN_2 * r * tau2 {
                (1.0, 1.0)
            } else {
                (0.0, 0.0)
            }
        } else {
            let arg = a * c * p * knee / (r * tau2 * bracket);
            let mut xi = (arg.log2() / ac2).clamp(0.0, 1.0);
            if xi >= 1.0 - ONE_TOL {
                xi = 1.0;
            }
            if xi >= f {
                (1.0, 1.0)
            } else {
                let x = (1.0 - (-ac2 * xi).exp2()) / denom;
                (
                    xi,
                    if x >= 1.0 - ONE_TOL {
                        1.0
                    } else {
                        x.clamp(0.0, 1.0)
                    },
                )
            }
        };
        xi_seq.push(xi);
        let prev = trace.x[t];
        if x <= prev {
            break;
        }
        trace.push_x(x);
        if x == 1.0 {
            trace.t_star = Some(t + 1);
            xi_seq.push(1.0);
            break;
        }
    }
    xi_seq.truncate(trace.x.len());
    trace.xi = Some(xi_seq);
    Ok(trace)
}

/// Applies the large-system decodability threshold to a finite allocation:
/// in each step, section `ℓ` counts as decoded iff `L·P_ℓ > 2 ln2 · R · τ_t²`.
/// Stops when all sections are decoded, when progress stalls, or after
/// `t_max` steps.
pub fn threshold_iteration(
    params: &SparcParams,
    alloc: &PowerAllocation,
    t_max: usize,
) -> Result<SeTrace> {
    crate::error::check_len(params.sections, alloc.len())?;
    if alloc.values().windows(2).any(|w| w[1] > w[0]) {
        return Err(invalid(
            "threshold iteration needs a non-increasing allocation",
        ));
    }
    let l = params.sections as f64;
    let total = alloc.total();
    let mut trace = SeTrace::start(SeMode::Threshold, params);
    let mut xi_seq = Vec::new();
    for t in 0..t_max {
        let threshold = 2.0 * LN_2 * params.rate * trace.tau2[t];
        let decoded = alloc
            .values()
            .iter()
            .take_while(|&&p| l * p > threshold)
            .count();
        xi_seq.push(decoded as f64 / l);
        let x = if decoded == alloc.len() {
            1.0
        } else {
            (alloc.values()[..decoded].iter().sum::<f64>() / total).min(1.0)
        };
        if x <= trace.x[t] {
            break;
        }
        trace.push_x(x);
        if x == 1.0 {
            trace.t_star = Some(t + 1);
            xi_seq.push(1.0);
            break;
        }
    }
    xi_seq.truncate(trace.x.len());
    trace.xi = Some(xi_seq);
    Ok(trace)
}

/// Unweighted fraction of correctly decoded sections predicted from a noise
/// schedule: `v_0 = 0` and `v_t` is the Monte Carlo average over sections of
/// the posterior weight on the true column at `τ²_{t−1}`. `1 − v_T` predicts
/// the section error rate after `T` iterations.
pub fn ser_prediction(
    params: &SparcParams,
    alloc: &PowerAllocation,
    tau2_schedule: &[f64],
    mc_samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if tau2_schedule.is_empty() {
        return Err(invalid("tau2 schedule is empty"));
    }
    let mut v = vec![0.0];
    for &tau2 in &tau2_schedule[..tau2_schedule.len() - 1] {
        v.push(mc_expected_fraction(params, alloc, tau2, mc_samples, seed)?.v);
    }
    Ok(v)
}

/// `1 − v_T` where `T` is the trace's decoder iteration count; only one
/// Monte Carlo pass, at `τ²_{T−1}`.
pub fn predicted_ser(
    params: &SparcParams,
    alloc: &PowerAllocation,
    trace: &SeTrace,
    mc_samples: usize,
    seed: u64,
) -> Result<f64> {
    let t = trace.iterations();
    if t == 0 {
        return Ok(1.0);
    }
    let est = mc_expected_fraction(params, alloc, trace.tau2[t - 1], mc_samples, seed)?;
    Ok(1.0 - est.v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_params;

    fn params(l: usize, m: usize, frac: f64) -> SparcParams {
        derive_params(l, m, frac * 2.0, 15.0, 15.0).unwrap()
    }

    #[test]
    fn t_star_values() {
        assert_eq!(t_star(2.0, 1.0).unwrap(), 4);
        assert_eq!(t_star(2.0, 1.4).unwrap(), 8);
        assert!(t_star(2.0, 2.0).is_err());
        assert!(t_star(2.0, 2.5).is_err());
        assert!(t_star(2.0, 2.0 * (1.0 - 1e-14)).is_err());
    }

    #[test]
    fn exponential_trace_values() {
        let p = params(1024, 512, 0.7);
        // realized rate differs slightly from 0.7C; use the exact rate for the check
        let exact = SparcParams { rate: 1.4, ..p };
        let tr = asymptotic_se_exponential(&exact).unwrap();
        assert_eq!(tr.x[0], 0.0);
        assert_eq!(tr.tau2[0], exact.sigma2 + exact.power);
        let xi = tr.xi.as_ref().unwrap();
        assert!((xi[0] - 0.128_643).abs() < 1e-6, "{}", xi[0]);
        // independent evaluation: (16 − 16^(1−ξ0))/15
        let x1 = (16.0 - 16f64.powf(1.0 - (1.0f64 / 0.7).log2() / 4.0)) / 15.0;
        assert!((tr.x[1] - x1).abs() < 1e-12);
        // 2^(−4ξ0) = 0.7, so x̄1 = (16 − 11.2)/15 = 0.32 exactly
        assert!((tr.x[1] - 0.32).abs() < 1e-12);
        assert_eq!(tr.t_star, Some(8));
        assert_eq!(tr.last_t(), 8);
        assert_eq!(tr.x[8], 1.0);
        assert_eq!(tr.tau2[8], exact.sigma2);
        assert!(tr.x[7] < 1.0);
        tr.check_structure().unwrap();
    }

    #[test]
    fn exponential_rejects_rate_at_capacity() {
        let p = params(64, 64, 0.5);
        let bad = SparcParams {
            rate: p.capacity,
            ..p
        };
        assert!(asymptotic_se_exponential(&bad).is_err());
    }

    #[test]
    fn modified_a1_f1_matches_exponential() {
        for frac in [0.5, 0.6, 0.7, 0.8, 0.9, 0.95] {
            let p = params(1024, 512, frac);
            let e = asymptotic_se_exponential(&p).unwrap();
            let m = asymptotic_se_modified(&p, 1.0, 1.0, DEFAULT_T_MAX).unwrap();
            assert_eq!(e.x.len(), m.x.len(), "frac={frac}");
            assert_eq!(e.t_star, m.t_star);
            for t in 0..e.x.len() {
                assert!((e.x[t] - m.x[t]).abs() < 1e-10);
                assert!((e.tau2[t] - m.tau2[t]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn modified_flat_threshold() {
        // a = 0: one-step jump iff P > 2 ln2 R τ0²
        let lo = params(256, 64, 0.3);
        let tr = asymptotic_se_modified(&lo, 0.0, 0.5, 50).unwrap();
        assert!(lo.power > 2.0 * LN_2 * lo.rate * (lo.sigma2 + lo.power));
        assert_eq!(tr.x, vec![0.0, 1.0]);
        assert_eq!(tr.t_star, Some(1));
        let hi = params(256, 64, 0.6);
        assert!(hi.power < 2.0 * LN_2 * hi.rate * (hi.sigma2 + hi.power));
        let tr = asymptotic_se_modified(&hi, 0.0, 0.5, 50).unwrap();
        assert_eq!(tr.x, vec![0.0]);
        assert_eq!(tr.t_star, None);
    }

    #[test]
    fn modified_075_reaches_one_and_agrees_with_threshold() {
        let p = params(1024, 512, 0.75);
        let tr = asymptotic_se_modified(&p, 0.75, 0.75, DEFAULT_T_MAX).unwrap();
        tr.check_structure().unwrap();
        let t = tr.t_star.expect("reaches one");
        assert!(t < 50);
        let alloc = PowerAllocation::modified(&p, 0.75, 0.75).unwrap();
        let th = threshold_iteration(&p, &alloc, DEFAULT_T_MAX).unwrap();
        assert!(th.t_star.is_some());
        // finite-L threshold agrees with the closed form to within a step or two
        assert!((th.t_star.unwrap() as i64 - t as i64).abs() <= 2);
    }

    #[test]
    fn modified_rejects_bad_inputs() {
        let p = params(64, 64, 0.5);
        assert!(asymptotic_se_modified(&p, -1.0, 0.5, 10).is_err());
        assert!(asymptotic_se_modified(&p, 1.0, 1.5, 10).is_err());
        let bad = SparcParams { rate: 2.5, ..p };
        assert!(asymptotic_se_modified(&bad, 1.0, 1.0, 10).is_err());
    }

    #[test]
    fn threshold_zero_case() {
        // tiny first-section power: nobody crosses the threshold at τ0
        let p = params(64, 64, 0.8);
        let alloc = PowerAllocation::flat(&p);
        let tr = threshold_iteration(&p, &alloc, 100).unwrap();
        assert_eq!(tr.x, vec![0.0]);
        assert_eq!(tr.t_star, None);
    }

    #[test]
    fn threshold_flat_near_capacity_never_starts() {
        let p = params(1024, 512, 0.95);
        assert!(p.power <= 2.0 * LN_2 * p.rate * (p.sigma2 + p.power));
        let tr = threshold_iteration(&p, &PowerAllocation::flat(&p), 100).unwrap();
        assert_eq!(tr.last_t(), 0);
    }

    #[test]
    fn threshold_exponential_prefix_growth() {
        let p = params(1 << 16, 2, 0.7);
        let alloc = PowerAllocation::exponential(&p, 2.0 * p.capacity).unwrap();
        let tr = threshold_iteration(&p, &alloc, 100).unwrap();
        let xi = tr.xi.as_ref().unwrap();
        let step = (p.capacity / p.rate).log2() / (2.0 * p.capacity);
        for t in 0..4 {
            let inc = xi[t] - if t == 0 { 0.0 } else { xi[t - 1] };
            assert!((inc - step).abs() < 0.01, "t={t}: {inc} vs {step}");
        }
        assert_eq!(tr.t_star, Some(t_star(p.capacity, p.rate).unwrap()));
        tr.check_structure().unwrap();
    }

    fn degenerate(m: usize, power: f64) -> (SparcParams, PowerAllocation) {
        let p = SparcParams {
            sections: 4,
            section_size: m,
            block_len: 100,
            columns: 4 * m,
            rate: 0.1,
            power,
            sigma2: 1.0,
            snr: power,
            capacity: 0.5 * (1.0 + power).log2(),
        };
        let alloc = PowerAllocation::flat(&p);
        (p, alloc)
    }

    #[test]
    fn mc_single_column_sections_always_decode() {
        let (p, alloc) = degenerate(1, 1.0);
        let tr = mc_state_evolution(&p, &alloc, 5, 10, 0).unwrap();
        assert_eq!(tr.x[1], 1.0);
        assert_eq!(tr.tau2[1], p.sigma2);
        assert_eq!(tr.v.as_ref().unwrap()[1], 1.0);
    }

    #[test]
    fn mc_vanishing_power_is_uniform_guess() {
        let (p, alloc) = degenerate(8, 1e-12);
        let est = mc_expected_fraction(&p, &alloc, 1.0, 200, 1).unwrap();
        assert!((est.x - 1.0 / 8.0).abs() < 1e-4, "{}", est.x);
    }

    #[test]
    fn mc_noiseless_limit() {
        let p = params(16, 16, 0.5);
        let alloc = PowerAllocation::flat(&p);
        let est = mc_expected_fraction(&p, &alloc, 1e-8, 50, 2).unwrap();
        assert!(est.v > 1.0 - 1e-12);
    }

    #[test]
    fn mc_is_reproducible_and_structured() {
        let p = params(64, 32, 0.5);
        let alloc = PowerAllocation::exponential(&p, 2.0 * p.capacity).unwrap();
        let a = mc_state_evolution(&p, &alloc, 10, 100, 7).unwrap();
        let b = mc_state_evolution(&p, &alloc, 10, 100, 7).unwrap();
        assert_eq!(a, b);
        a.check_structure().unwrap();
    }

    #[test]
    fn mc_independent_of_worker_count() {
        let p = params(64, 32, 0.6);
        let alloc = PowerAllocation::exponential(&p, 2.0 * p.capacity).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_state_evolution(&p, &alloc, 6, 50, 3).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn ser_prediction_shapes() {
        let (p, alloc) = degenerate(1, 1.0);
        let v = ser_prediction(&p, &alloc, &[2.0, 1.5, 1.0], 10, 0).unwrap();
        assert_eq!(v, vec![0.0, 1.0, 1.0]);
        assert!(ser_prediction(&p, &alloc, &[], 10, 0).is_err());
    }

    #[test]
    fn csv_columns() {
        let p = params(1024, 512, 0.5);
        let tr = asymptotic_se_exponential(&p).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,tau2,x,xi,v"));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 5);
        assert_eq!(first[0], "0");
        assert_eq!(first[4], "");
    }
}
