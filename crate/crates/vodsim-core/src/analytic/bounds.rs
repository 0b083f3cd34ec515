//! Two-sided bounds on aggregate transfer rate over concurrently active
//! links.
//!
//! The signed-sum model: link rates `x_1..x_n` combine with independent
//! uniform signs, and the expected magnitude of the sum is pinched between
//! multiples of the Euclidean norm,
//!
//! ```text
//! c_p * ||x||_2  <=  ( E |sum_i eps_i x_i|^p )^(1/p)  <=  C_p* * ||x||_2
//! ```
//!
//! [`rademacher_mean_abs`] evaluates the middle term exactly (at p = 1) by
//! enumerating all sign vectors; [`khintchine_bounds`] produces the two ends
//! with the classical sharp constants. The `{0,1}` link-indicator variant,
//! whose mean needs no enumeration at all, is exposed separately as
//! [`bernoulli_indicator_mean`].

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Hard cap on exact sign enumeration: 2^20 sign vectors.
pub const MAX_SIGN_ENUMERATION: usize = 20;

/// Exact `E | sum_i eps_i x_i |` over all `2^n` sign vectors
/// `eps_i in {-1,+1}`, enumerated in Gray-code order so each step updates
/// the running sum in O(1).
pub fn rademacher_mean_abs(x: &[f64]) -> Result<f64> {
    let n = x.len();
    if n > MAX_SIGN_ENUMERATION {
        return Err(Error::SizeLimit(format!(
            "sign enumeration capped at n <= {MAX_SIGN_ENUMERATION}, got {n}"
        )));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let total = 1u64 << n;
    let mut signs = vec![1.0f64; n];
    let mut sum: f64 = x.iter().sum();
    let mut acc = sum.abs();
    for i in 1..total {
        let b = i.trailing_zeros() as usize;
        signs[b] = -signs[b];
        sum += 2.0 * signs[b] * x[b];
        acc += sum.abs();
    }
    Ok(acc / total as f64)
}

/// Mean of `sum_i z_i x_i` when each link indicator `z_i` is an independent
/// uniform `{0,1}` coin: exactly `sum_i x_i / 2`.
pub fn bernoulli_indicator_mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / 2.0
}

/// p-th absolute moment of a standard Gaussian, to the power 1/p:
/// `sqrt(2) * (Gamma((p+1)/2) / sqrt(pi))^(1/p)`.
fn gaussian_moment(p: f64) -> f64 {
    let ln = ln_gamma((p + 1.0) / 2.0) - 0.5 * std::f64::consts::PI.ln();
    std::f64::consts::SQRT_2 * (ln / p).exp()
}

/// Sharp lower constant `c_p`: the worst case is either the two-point
/// vector (giving `2^(1/2 - 1/p)`) or the Gaussian limit; for p >= 2 the
/// bound is 1 by Jensen.
fn lower_constant(p: f64) -> f64 {
    if p >= 2.0 {
        1.0
    } else {
        let two_point = 2.0_f64.powf(0.5 - 1.0 / p);
        two_point.min(gaussian_moment(p))
    }
}

/// Sharp upper constant `C_p*`: 1 for p <= 2 by Jensen, the Gaussian moment
/// for p > 2.
fn upper_constant(p: f64) -> f64 {
    if p <= 2.0 {
        1.0
    } else {
        gaussian_moment(p)
    }
}

/// Two-sided bound `(c_p * ||x||_2, C_p* * ||x||_2)` on the p-th moment of
/// the signed sum of `x`.
///
/// At p = 1 the constants are `(2^(-1/2), 1)`; at p = 2 both are 1 and the
/// second moment equals `||x||_2^2` exactly.
pub fn khintchine_bounds(x: &[f64], p: f64) -> Result<(f64, f64)> {
    if !(p >= 1.0) {
        return Err(Error::arg(format!("moment order p must be >= 1, got {p}")));
    }
    let l2 = p_norm(x, 2.0)?;
    Ok((lower_constant(p) * l2, upper_constant(p) * l2))
}

/// Whether the aggregate mean transfer rate fits the network's equivalent
/// capacity: `sum_i mu_i <= psi`.
pub fn aggregate_transfer_feasible(means: &[f64], equivalent_capacity: f64) -> bool {
    debug_assert!(means.iter().all(|m| *m >= 0.0));
    debug_assert!(equivalent_capacity >= 0.0);
    means.iter().sum::<f64>() <= equivalent_capacity
}

/// `(sum_i |x_i|^p)^(1/p)` for `p >= 1`.
pub fn p_norm(x: &[f64], p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::arg(format!("norm order p must be >= 1, got {p}")));
    }
    let total: f64 = x.iter().map(|v| v.abs().powf(p)).sum();
    Ok(total.powf(1.0 / p))
}

/// A session's worth of concurrent transfers: per-link mean rates, a sampled
/// rate vector, and the moment order with its bound constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferEnsemble {
    pub means: Vec<f64>,
    pub rates: Vec<f64>,
    pub order: f64,
    pub lower_constant: f64,
    pub upper_constant: f64,
}

impl TransferEnsemble {
    /// Validates rates and derives the bound constants for `order`.
    pub fn new(means: Vec<f64>, rates: Vec<f64>, order: f64) -> Result<Self> {
        if !(order >= 1.0) {
            return Err(Error::arg("moment order must be >= 1"));
        }
        if rates.iter().any(|r| !(*r >= 0.0)) {
            return Err(Error::arg("sampled rates must be >= 0"));
        }
        if means.iter().any(|m| !(*m >= 0.0)) {
            return Err(Error::arg("mean rates must be >= 0"));
        }
        let lower = lower_constant(order);
        let upper = upper_constant(order);
        debug_assert!(lower <= upper);
        Ok(Self { means, rates, order, lower_constant: lower, upper_constant: upper })
    }

    /// Bound interval for this ensemble's sampled rates.
    pub fn bounds(&self) -> Result<(f64, f64)> {
        khintchine_bounds(&self.rates, self.order)
    }

    /// Feasibility of the mean aggregate against capacity `psi`.
    pub fn feasible(&self, equivalent_capacity: f64) -> bool {
        aggregate_transfer_feasible(&self.means, equivalent_capacity)
    }
}
