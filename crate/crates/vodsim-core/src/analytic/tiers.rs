//! Level-wise streaming capacity of the peer tiers and active-peer
//! probabilities.
//!
//! Level 0 is the archive storage; level `l` receives streaming from level
//! `l-1`. Each peer level contributes a sharing capacity that shrinks
//! geometrically with the share fraction, so the capacity left at level `l`
//! is the archive output minus everything the tiers below have absorbed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the tier-capacity recursion.
///
/// * `archive_streaming` — `P(0)`, streaming capacity leaving the archive,
///   in concurrent full-stream equivalents.
/// * `level1_sharing` — `C_1`, sharing capacity of the first peer level.
/// * `share_fraction` — fraction of a level's capacity the next level
///   re-shares, strictly inside (0, 1).
/// * `levels` — the level `l` to evaluate at.
/// * `equivalent_capacity` — network equivalent capacity in kbps, the cap
///   used by feasibility checks on aggregate transfer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TierCapacityParams {
    pub archive_streaming: f64,
    pub level1_sharing: f64,
    pub share_fraction: f64,
    pub levels: u32,
    pub equivalent_capacity: f64,
}

impl TierCapacityParams {
    fn validate(&self) -> Result<()> {
        if !(self.share_fraction > 0.0 && self.share_fraction < 1.0) {
            return Err(Error::arg(format!(
                "share fraction must lie in (0,1), got {}",
                self.share_fraction
            )));
        }
        if !(self.archive_streaming >= 0.0) {
            return Err(Error::arg("archive streaming capacity must be >= 0"));
        }
        if !(self.level1_sharing >= 0.0) {
            return Err(Error::arg("level-1 sharing capacity must be >= 0"));
        }
        Ok(())
    }
}

/// Sharing capacity of level `l >= 1`: `N(l) = lambda^(l-1) * C_1`.
pub fn level_sharing_capacity(level1_sharing: f64, share_fraction: f64, level: u32) -> Result<f64> {
    if level < 1 {
        return Err(Error::arg("sharing capacity is defined for levels >= 1"));
    }
    if !(share_fraction > 0.0 && share_fraction < 1.0) {
        return Err(Error::arg("share fraction must lie in (0,1)"));
    }
    Ok(share_fraction.powi(level as i32 - 1) * level1_sharing)
}

/// Capacity remaining at level `l`, by running the recursion
/// `P(l) = P(l-1) - N(l)` level by level from `P(0)`.
pub fn tier_capacity_iterative(params: &TierCapacityParams) -> Result<f64> {
    params.validate()?;
    let mut capacity = params.archive_streaming;
    let mut sharing = params.level1_sharing;
    for _ in 1..=params.levels {
        capacity -= sharing;
        sharing *= params.share_fraction;
    }
    Ok(capacity)
}

/// Capacity remaining at level `l`, via the telescoped geometric sum:
/// `P(l) = P(0) - C_1 * (1 - lambda^l) / (1 - lambda)`.
///
/// Agrees with [`tier_capacity_iterative`] up to floating-point noise.
pub fn tier_capacity_closed(params: &TierCapacityParams) -> Result<f64> {
    params.validate()?;
    let lambda = params.share_fraction;
    let drained = params.level1_sharing * (1.0 - lambda.powi(params.levels as i32)) / (1.0 - lambda);
    Ok(params.archive_streaming - drained)
}

/// Activity parameters of one peer level: `peer_count` peers, each active
/// independently with probability `activity_prob`, against a threshold
/// `threshold` (the level works when strictly more than `threshold` peers
/// are active).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelActivity {
    pub peer_count: u32,
    pub threshold: u32,
    pub activity_prob: f64,
}

impl LevelActivity {
    fn validate(&self) -> Result<()> {
        if self.peer_count < 1 {
            return Err(Error::arg("peer count must be >= 1"));
        }
        if self.threshold > self.peer_count {
            return Err(Error::arg(format!(
                "threshold {} exceeds peer count {}",
                self.threshold, self.peer_count
            )));
        }
        if !(0.0..=1.0).contains(&self.activity_prob) {
            return Err(Error::arg("activity probability must lie in [0,1]"));
        }
        Ok(())
    }
}

/// Binomial tail: probability that strictly more than `k_thresh` out of `n`
/// peers are active, each independently with probability `rho`:
/// `sum_{k=k_thresh+1}^{n} C(n,k) rho^k (1-rho)^(n-k)`.
pub fn active_peer_tail(n: u32, k_thresh: u32, rho: f64) -> Result<f64> {
    if k_thresh > n {
        return Err(Error::arg(format!("threshold {k_thresh} exceeds peer count {n}")));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::arg("activity probability must lie in [0,1]"));
    }
    if k_thresh == n {
        return Ok(0.0);
    }
    if rho == 0.0 {
        return Ok(0.0);
    }
    if rho == 1.0 {
        return Ok(1.0);
    }
    // Walk binomial coefficients multiplicatively; n stays desk-scale here
    // (peer counts per level), so f64 is plenty.
    let mut binom = 1.0_f64; // C(n, 0)
    let mut tail = 0.0;
    for k in 0..=n {
        if k > 0 {
            binom *= (n - k + 1) as f64 / k as f64;
        }
        if k > k_thresh {
            tail += binom * rho.powi(k as i32) * (1.0 - rho).powi((n - k) as i32);
        }
    }
    Ok(tail.clamp(0.0, 1.0))
}

/// Probability that every level in the chain has enough active peers:
/// the product over levels of [`active_peer_tail`]. Never exceeds 1.
pub fn multilevel_active_product(levels: &[LevelActivity]) -> Result<f64> {
    if levels.is_empty() {
        return Err(Error::arg("at least one level is required"));
    }
    let mut product = 1.0;
    for level in levels {
        level.validate()?;
        product *= active_peer_tail(level.peer_count, level.threshold, level.activity_prob)?;
    }
    Ok(product)
}
