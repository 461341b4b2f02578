//! Code geometry and the mappings between bits, messages and the sparse
//! message vector β.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, invalid, Error, Result};
use crate::power::PowerAllocation;

/// Geometry and channel parameters of a SPARC.
///
/// `n` is chosen so that `L·log2(M) ≈ n·R`; the stored rate is the realized
/// one, `L·log2(M)/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparcParams {
    /// Number of sections, `L`.
    pub sections: usize,
    /// Columns per section, `M`.
    pub section_size: usize,
    /// Block length in channel uses, `n`.
    pub block_len: usize,
    /// Total number of columns, `N = M·L`.
    pub columns: usize,
    /// Realized rate in bits per channel use.
    pub rate: f64,
    /// Average power constraint `P`.
    pub power: f64,
    /// Noise variance `σ²`.
    pub sigma2: f64,
    pub snr: f64,
    /// Capacity `½·log2(1+snr)` in bits.
    pub capacity: f64,
}

impl SparcParams {
    /// Bits carried by one section, `log2(M)`.
    pub fn bits_per_section(&self) -> f64 {
        (self.section_size as f64).log2()
    }

    /// Total message bits `L·log2(M)`.
    pub fn message_bits(&self) -> f64 {
        self.sections as f64 * self.bits_per_section()
    }

    pub fn rate_fraction(&self) -> f64 {
        self.rate / self.capacity
    }

    /// Fails unless `R < C`.
    pub fn check_below_capacity(&self) -> Result<()> {
        if self.rate < self.capacity {
            Ok(())
        } else {
            Err(Error::RateAboveCapacity {
                rate: self.rate,
                capacity: self.capacity,
            })
        }
    }

    /// Range of global column indices belonging to section `l` (0-based).
    pub fn section_range(&self, l: usize) -> std::ops::Range<usize> {
        l * self.section_size..(l + 1) * self.section_size
    }
}

/// Capacity of the real AWGN channel in bits per channel use.
pub fn capacity(snr: f64) -> f64 {
    0.5 * (1.0 + snr).log2()
}

/// Builds the code geometry for a target rate. `n` is the nearest integer to
/// `L·log2(M)/R_target` and the realized rate is stored.
pub fn derive_params(
    sections: usize,
    section_size: usize,
    target_rate: f64,
    snr: f64,
    power: f64,
) -> Result<SparcParams> {
    if sections == 0 {
        return Err(invalid("L must be at least 1"));
    }
    if section_size < 2 {
        return Err(invalid("M must be at least 2"));
    }
    if !(target_rate > 0.0 && target_rate.is_finite()) {
        return Err(invalid(format!("rate must be positive, got {target_rate}")));
    }
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(invalid(format!("snr must be positive, got {snr}")));
    }
    if !(power > 0.0 && power.is_finite()) {
        return Err(invalid(format!("power must be positive, got {power}")));
    }
    let total_bits = sections as f64 * (section_size as f64).log2();
    let n = (total_bits / target_rate).round();
    if n < 1.0 {
        return Err(invalid(format!(
            "block length rounds to {n} for rate {target_rate}"
        )));
    }
    let block_len = n as usize;
    let columns = sections
        .checked_mul(section_size)
        .ok_or_else(|| invalid("M·L overflows"))?;
    Ok(SparcParams {
        sections,
        section_size,
        block_len,
        columns,
        rate: total_bits / block_len as f64,
        power,
        sigma2: power / snr,
        snr,
        capacity: capacity(snr),
    })
}

/// One column index per section, each in `[0, M)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Message(Vec<usize>);

impl Message {
    pub fn new(sections: Vec<usize>, params: &SparcParams) -> Result<Self> {
        check_len(params.sections, sections.len())?;
        if let Some(&bad) = sections.iter().find(|&&s| s >= params.section_size) {
            return Err(invalid(format!(
                "section index {bad} out of range for M={}",
                params.section_size
            )));
        }
        Ok(Message(sections))
    }

    pub fn sections(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Global column index of the nonzero in each section.
    pub fn support(&self, section_size: usize) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .map(move |(l, &j)| l * section_size + j)
    }
}

/// Dense length-`N` message vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaVector(Vec<f64>);

impl BetaVector {
    pub fn zeros(len: usize) -> Self {
        BetaVector(vec![0.0; len])
    }

    pub fn from_vec(values: Vec<f64>) -> Self {
        BetaVector(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    /// Nonzero entries as `(index, value)` pairs.
    pub fn sparse(&self) -> Vec<(usize, f64)> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i, *v))
            .collect()
    }
}

fn bits_per_section_exact(params: &SparcParams) -> Result<usize> {
    let m = params.section_size;
    if !m.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(m));
    }
    Ok(m.trailing_zeros() as usize)
}

/// Reads each `log2(M)`-bit segment most-significant bit first.
pub fn bits_to_message(bits: &[bool], params: &SparcParams) -> Result<Message> {
    let width = bits_per_section_exact(params)?;
    check_len(params.sections * width, bits.len())?;
    let sections = bits
        .chunks(width)
        .map(|seg| seg.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize))
        .collect();
    Ok(Message(sections))
}

pub fn message_to_bits(msg: &Message, params: &SparcParams) -> Result<Vec<bool>> {
    let width = bits_per_section_exact(params)?;
    check_len(params.sections, msg.len())?;
    let mut bits = Vec::with_capacity(width * msg.len());
    for &s in msg.sections() {
        bits.extend((0..width).rev().map(|k| (s >> k) & 1 == 1));
    }
    Ok(bits)
}

/// Places `√(n·P_ℓ)` at the chosen column of each section.
pub fn message_to_beta(
    msg: &Message,
    alloc: &PowerAllocation,
    params: &SparcParams,
) -> Result<BetaVector> {
    check_len(params.sections, msg.len())?;
    check_len(params.sections, alloc.len())?;
    let n = params.block_len as f64;
    let mut beta = vec![0.0; params.columns];
    for (idx, p) in msg.support(params.section_size).zip(alloc.values()) {
        beta[idx] = (n * p).sqrt();
    }
    Ok(BetaVector(beta))
}

/// Keeps the largest entry of each section (lowest index on ties) and returns
/// the corresponding codebook member.
pub fn hard_decision(
    beta: &[f64],
    alloc: &PowerAllocation,
    params: &SparcParams,
) -> Result<(BetaVector, Message)> {
    check_len(params.columns, beta.len())?;
    let sections = beta
        .chunks(params.section_size)
        .map(|sec| {
            let mut best = 0;
            for (j, &v) in sec.iter().enumerate().skip(1) {
                if v > sec[best] {
                    best = j;
                }
            }
            best
        })
        .collect();
    let msg = Message(sections);
    let decided = message_to_beta(&msg, alloc, params)?;
    Ok((decided, msg))
}

/// Fraction of sections whose decoded index differs from the sent one.
pub fn section_error_rate(sent: &Message, decoded: &Message) -> Result<f64> {
    check_len(sent.len(), decoded.len())?;
    if sent.is_empty() {
        return Ok(0.0);
    }
    Ok(section_errors(sent, decoded) as f64 / sent.len() as f64)
}

pub(crate) fn section_errors(sent: &Message, decoded: &Message) -> usize {
    sent.sections()
        .iter()
        .zip(decoded.sections())
        .filter(|(a, b)| a != b)
        .count()
}
