//! The AMP decoder.
//!
//! Starting from `β⁰ = 0`, each iteration computes
//!
//! ```text
//! z^t     = y − A·β^t + (z^{t−1} / τ²_{t−1}) · (P − ‖β^t‖²/n)
//! β^{t+1} = η_t(β^t + Aᵀ·z^t)
//! ```
//!
//! where `η_t` is the section-wise posterior mean of `β` given an
//! observation `β + τ_t·Z`. After the last iteration the largest entry of
//! each section is taken as the decoded column.

use serde::{Deserialize, Serialize};

use crate::design::DesignOperator;
use crate::error::{check_len, invalid, Error, Result};
use crate::params::{hard_decision, BetaVector, Message, SparcParams};
use crate::power::PowerAllocation;
use crate::se::SeTrace;
use crate::softmax::scaled_softmax;

/// Posterior-mean denoiser: in section `ℓ`,
/// `β_i = √(nP_ℓ) · softmax_j(s_j·√(nP_ℓ)/τ²)_i`.
pub fn eta_step(
    s: &[f64],
    alloc: &PowerAllocation,
    params: &SparcParams,
    tau2: f64,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; s.len()];
    eta_into(s, alloc, params, tau2, &mut out)?;
    Ok(out)
}

pub(crate) fn eta_into(
    s: &[f64],
    alloc: &PowerAllocation,
    params: &SparcParams,
    tau2: f64,
    out: &mut [f64],
) -> Result<()> {
    if !(tau2 > 0.0) {
        return Err(invalid(format!("tau2 must be positive, got {tau2}")));
    }
    check_len(params.columns, s.len())?;
    check_len(params.columns, out.len())?;
    check_len(params.sections, alloc.len())?;
    let n = params.block_len as f64;
    let m = params.section_size;
    for ((sec_in, sec_out), &p) in s
        .chunks_exact(m)
        .zip(out.chunks_exact_mut(m))
        .zip(alloc.values())
    {
        let amp = (n * p).sqrt();
        scaled_softmax(sec_in, amp / tau2, amp, sec_out);
    }
    Ok(())
}

/// Iterate of the decoder.
#[derive(Debug, Clone)]
pub struct DecoderState {
    /// `β^t`.
    pub beta: Vec<f64>,
    /// `z^{t−1}` before [`residual_step`], `z^t` after.
    pub z: Vec<f64>,
    pub z_prev: Vec<f64>,
    pub t: usize,
    pub tau2_schedule: Vec<f64>,
}

impl DecoderState {
    pub fn new(params: &SparcParams, tau2_schedule: Vec<f64>) -> Self {
        DecoderState {
            beta: vec![0.0; params.columns],
            z: vec![0.0; params.block_len],
            z_prev: vec![0.0; params.block_len],
            t: 0,
            tau2_schedule,
        }
    }

    /// `(P − ‖β^t‖²/n) / τ²_{t−1}`, zero at `t = 0`.
    pub fn onsager_coefficient(&self, params: &SparcParams) -> f64 {
        if self.t == 0 {
            return 0.0;
        }
        let norm_sq: f64 = self.beta.iter().map(|b| b * b).sum();
        (params.power - norm_sq / params.block_len as f64) / self.tau2_schedule[self.t - 1]
    }
}

/// Computes `z^t` from `β^t` and `z^{t−1}`, shifting the old residual into
/// `z_prev`. At `t = 0` the residual is `y` itself.
pub fn residual_step<A: DesignOperator + ?Sized>(
    state: &mut DecoderState,
    y: &[f64],
    design: &A,
    params: &SparcParams,
) -> Result<()> {
    check_len(params.block_len, y.len())?;
    check_len(design.rows(), y.len())?;
    check_len(design.cols(), state.beta.len())?;
    if state.t > 0 && state.tau2_schedule.len() < state.t {
        return Err(Error::ScheduleTooShort {
            required: state.t,
            available: state.tau2_schedule.len(),
        });
    }
    std::mem::swap(&mut state.z_prev, &mut state.z);
    if state.t == 0 {
        state.z.copy_from_slice(y);
        return Ok(());
    }
    let coef = state.onsager_coefficient(params);
    design.forward_into(&state.beta, &mut state.z)?;
    for ((z, &yi), &zp) in state.z.iter_mut().zip(y).zip(&state.z_prev) {
        *z = yi - *z + coef * zp;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationDiagnostics {
    pub t: usize,
    /// `‖β^t − β₀‖²/n`.
    pub nmse: f64,
    /// `β₀ᵀβ^t/(nP)`.
    pub weighted_correct_fraction: f64,
}

#[derive(Debug, Clone, Default)]
pub struct DecodeOptions<'a> {
    /// Overrides the iteration count taken from the schedule.
    pub iterations: Option<usize>,
    /// Stop once an iteration leaves `β` unchanged to within 1e-12.
    pub early_stop: bool,
    /// Transmitted vector; when present, per-iteration diagnostics are recorded.
    pub truth: Option<&'a BetaVector>,
}

#[derive(Debug, Clone)]
pub struct DecodeOutput {
    pub message: Message,
    /// Hard-decision codeword.
    pub beta_hat: BetaVector,
    /// Soft estimate `β^T` before the hard decision.
    pub beta_soft: Vec<f64>,
    pub iterations_run: usize,
    /// One entry per `t = 0..=iterations_run` when the truth was supplied.
    pub diagnostics: Vec<IterationDiagnostics>,
}

fn diagnostics(
    t: usize,
    beta: &[f64],
    truth: &BetaVector,
    params: &SparcParams,
) -> IterationDiagnostics {
    let n = params.block_len as f64;
    let (mut err, mut cross) = (0.0, 0.0);
    for (&b, &b0) in beta.iter().zip(truth.as_slice()) {
        err += (b - b0) * (b - b0);
        cross += b * b0;
    }
    IterationDiagnostics {
        t,
        nmse: err / n,
        weighted_correct_fraction: cross / (n * params.power),
    }
}

/// Runs the decoder against `y` with the noise schedule in `schedule`.
///
/// The iteration count is `opts.iterations`, else the schedule's `t_star`,
/// else the schedule's full length.
pub fn decode<A: DesignOperator + ?Sized>(
    y: &[f64],
    design: &A,
    alloc: &PowerAllocation,
    params: &SparcParams,
    schedule: &SeTrace,
    opts: &DecodeOptions<'_>,
) -> Result<DecodeOutput> {
    params.check_below_capacity()?;
    check_len(params.block_len, y.len())?;
    check_len(params.block_len, design.rows())?;
    check_len(params.columns, design.cols())?;
    check_len(params.sections, alloc.len())?;
    if let Some(truth) = opts.truth {
        check_len(params.columns, truth.len())?;
    }
    let iterations = opts.iterations.unwrap_or_else(|| schedule.iterations());
    if schedule.tau2.len() < iterations {
        return Err(Error::ScheduleTooShort {
            required: iterations,
            available: schedule.tau2.len(),
        });
    }

    let mut state = DecoderState::new(params, schedule.tau2[..iterations].to_vec());
    let mut stat = vec![0.0; params.columns];
    let mut next = vec![0.0; params.columns];
    let mut diags = Vec::new();
    if let Some(truth) = opts.truth {
        diags.push(diagnostics(0, &state.beta, truth, params));
    }
    let mut run = 0;
    for t in 0..iterations {
        residual_step(&mut state, y, design, params)?;
        design.adjoint_into(&state.z, &mut stat)?;
        for (s, &b) in stat.iter_mut().zip(&state.beta) {
            *s += b;
        }
        eta_into(&stat, alloc, params, state.tau2_schedule[t], &mut next)?;
        let unchanged = opts.early_stop
            && next
                .iter()
                .zip(&state.beta)
                .all(|(a, b)| (a - b).abs() <= 1e-12);
        std::mem::swap(&mut state.beta, &mut next);
        state.t += 1;
        run = t + 1;
        if let Some(truth) = opts.truth {
            diags.push(diagnostics(run, &state.beta, truth, params));
        }
        if unchanged {
            break;
        }
    }

    let (beta_hat, message) = hard_decision(&state.beta, alloc, params)?;
    Ok(DecodeOutput {
        message,
        beta_hat,
        beta_soft: state.beta,
        iterations_run: run,
        diagnostics: diags,
    })
}
