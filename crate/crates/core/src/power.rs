//! Per-section power allocations `{P_ℓ}`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::params::SparcParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum AllocScheme {
    Flat,
    /// `P_ℓ ∝ 2^(−κ·ℓ/L)`.
    Exponential {
        kappa: f64,
    },
    /// Exponential with exponent `2aC` up to section `⌊fL⌋`, flat afterwards.
    Modified {
        a: f64,
        f: f64,
    },
    Custom,
}

/// Power split across sections. Values are positive, non-increasing and sum
/// to `P`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    values: Vec<f64>,
    total: f64,
    scheme: AllocScheme,
}

impl PowerAllocation {
    /// `P/L` in every section.
    pub fn flat(params: &SparcParams) -> Self {
        let l = params.sections;
        PowerAllocation {
            values: vec![params.power / l as f64; l],
            total: params.power,
            scheme: AllocScheme::Flat,
        }
    }

    /// `P_ℓ ∝ 2^(−κℓ/L)`, ℓ = 1..L, normalized to total `P`. With `κ = 2C`
    /// this is the allocation under which the decoder provably reaches
    /// capacity.
    pub fn exponential(params: &SparcParams, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(invalid(format!("kappa must be positive, got {kappa}")));
        }
        let l = params.sections as f64;
        let weights = (1..=params.sections)
            .map(|i| (-kappa * i as f64 / l).exp2())
            .collect();
        Ok(Self::normalized(
            weights,
            params.power,
            AllocScheme::Exponential { kappa },
        ))
    }

    /// Exponentially decaying with exponent `2aC` for `ℓ ≤ ⌊fL⌋`, then
    /// constant at the level of section `⌊fL⌋`. `a = 0` is flat and `f = 1`
    /// is purely exponential with `κ = 2aC`.
    pub fn modified(params: &SparcParams, a: f64, f: f64) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(invalid(format!("a must be non-negative, got {a}")));
        }
        if !(0.0..=1.0).contains(&f) {
            return Err(invalid(format!("f must lie in [0, 1], got {f}")));
        }
        let l = params.sections;
        let decay = 2.0 * a * params.capacity / l as f64;
        let knee = if f >= 1.0 {
            l
        } else {
            ((f * l as f64).floor() as usize).min(l)
        };
        let tail = (-decay * knee as f64).exp2();
        let weights = (1..=l)
            .map(|i| {
                if i <= knee {
                    (-decay * i as f64).exp2()
                } else {
                    tail
                }
            })
            .collect();
        Ok(Self::normalized(
            weights,
            params.power,
            AllocScheme::Modified { a, f },
        ))
    }

    /// Wraps explicit values. They must be positive and non-increasing; the
    /// total is taken as their sum.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("allocation must have at least one section"));
        }
        if values.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(invalid("allocation entries must be positive"));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(invalid("allocation must be non-increasing"));
        }
        let total = values.iter().sum();
        Ok(PowerAllocation {
            values,
            total,
            scheme: AllocScheme::Custom,
        })
    }

    fn normalized(weights: Vec<f64>, power: f64, scheme: AllocScheme) -> Self {
        let sum: f64 = weights.iter().sum();
        let scale = power / sum;
        PowerAllocation {
            values: weights.into_iter().map(|w| w * scale).collect(),
            total: power,
            scheme,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Nominal total power `P`.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn scheme(&self) -> AllocScheme {
        self.scheme
    }

    /// Checks positivity, monotonicity and the total.
    pub fn validate(&self) -> Result<()> {
        if self.values.iter().any(|&p| !(p > 0.0)) {
            return Err(invalid("allocation has a non-positive entry"));
        }
        if self.values.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-12)) {
            return Err(invalid("allocation is not non-increasing"));
        }
        let sum: f64 = self.values.iter().sum();
        if (sum - self.total).abs() > 1e-9 * self.total {
            return Err(invalid(format!(
                "allocation sums to {sum}, expected {}",
                self.total
            )));
        }
        Ok(())
    }
}
