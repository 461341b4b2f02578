//! Sparse superposition codes (SPARCs) for the AWGN channel, decoded with
//! approximate message passing (AMP).
//!
//! A codeword is `A·β` where `A` is an `n × ML` design matrix and `β` has
//! exactly one nonzero entry in each of `L` sections of `M` columns. The
//! decoder alternates a residual update carrying an Onsager correction with a
//! section-wise posterior-mean denoiser, driven by a precomputed effective
//! noise schedule (state evolution).
//!
//! Modules:
//! - [`params`]: code geometry, message/bit/β mappings, hard decisions, error metrics.
//! - [`power`]: per-section power allocations.
//! - [`design`]: the design matrix as a forward/adjoint operator (Gaussian, Hadamard).
//! - [`se`]: state evolution (Monte Carlo, closed-form, threshold) and SER prediction.
//! - [`amp`]: the decoder.
//! - [`sim`]: AWGN channel, seeded trial orchestration, sweeps, reports.

pub mod amp;
pub mod design;
pub mod error;
pub mod params;
pub mod power;
pub mod se;
pub mod sim;
mod softmax;
pub mod streams;

pub use amp::{
    decode, eta_step, residual_step, DecodeOptions, DecodeOutput, DecoderState,
    IterationDiagnostics,
};
pub use design::{fwht_in_place, DesignOperator, GaussianDesign, HadamardDesign};
pub use error::{Error, Result};
pub use params::{
    bits_to_message, derive_params, hard_decision, message_to_beta, message_to_bits,
    section_error_rate, BetaVector, Message, SparcParams,
};
pub use power::{AllocScheme, PowerAllocation};
pub use se::{
    asymptotic_se_exponential, asymptotic_se_modified, mc_state_evolution,
    mc_state_evolution_to_plateau, ser_prediction, t_star, threshold_iteration, SeMode, SeTrace,
};
