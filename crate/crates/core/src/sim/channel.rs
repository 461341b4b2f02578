use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::streams::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub sigma2: f64,
    pub seed: u64,
}

/// `y = x + w` with `w` i.i.d. `N(0, σ²)`, deterministic in the seed.
pub fn awgn_transmit(x: &[f64], cfg: &ChannelConfig) -> Result<Vec<f64>> {
    if !(cfg.sigma2 > 0.0) {
        return Err(invalid(format!(
            "noise variance must be positive, got {}",
            cfg.sigma2
        )));
    }
    let sigma = cfg.sigma2.sqrt();
    let mut rng = stream_rng(cfg.seed, 0);
    Ok(x.iter()
        .map(|&xi| {
            let w: f64 = StandardNormal.sample(&mut rng);
            xi + sigma * w
        })
        .collect())
}
