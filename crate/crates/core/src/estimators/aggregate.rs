//! Aggregation of per-chain importance weights into estimates and
//! diagnostics. Everything is computed from log-weights with max-shifted
//! reductions; summation happens in sorted order so that any permutation of
//! the same weights produces a bit-identical summary.

use crate::error::{Error, Result};
use crate::math::log_sum_exp;

/// Log of the arithmetic mean of exp(values). The mean is taken inside the
/// max-shifted log, so a constant input comes back bit-identical; terms are
/// accumulated in ascending sorted order, making the result independent of
/// input permutation.
pub fn log_mean_exp(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("log_mean_exp of empty slice".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let max = *sorted.last().unwrap();
    if max == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let mut sum = 0.0;
    for v in &sorted {
        sum += (v - max).exp();
    }
    Ok(max + (sum / values.len() as f64).ln())
}

/// Effective sample size (sum w)^2 / sum w^2 of a set of log-weights.
pub fn effective_sample_size(log_weights: &[f64]) -> Result<f64> {
    if log_weights.is_empty() {
        return Err(Error::InvalidArgument("effective_sample_size of empty slice".into()));
    }
    let lse = log_sum_exp(log_weights);
    if lse == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let doubled: Vec<f64> = log_weights.iter().map(|&w| 2.0 * w).collect();
    Ok((2.0 * lse - log_sum_exp(&doubled)).exp())
}

/// Fraction of `log_estimates` exceeding `true_log_value + b`. For an
/// estimator unbiased in the linear domain the expected fraction is below
/// `exp(-b)` for every positive `b`.
pub fn tail_bound_check(log_estimates: &[f64], true_log_value: f64, b: f64) -> f64 {
    assert!(b > 0.0, "tail bound offset must be positive");
    if log_estimates.is_empty() {
        return 0.0;
    }
    let exceed = log_estimates.iter().filter(|&&e| e > true_log_value + b).count();
    exceed as f64 / log_estimates.len() as f64
}

/// Aggregate of one estimator run.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateSummary {
    /// log of the mean of the linear-domain chain weights.
    pub log_estimate: f64,
    pub num_chains: usize,
    /// Delta-method standard error of `log_estimate`: sd(w) / (sqrt(M) mean(w)).
    /// Infinite for a single chain.
    pub stderr_log: f64,
    /// (sum w)^2 / sum w^2.
    pub ess: f64,
}

impl EstimateSummary {
    pub fn from_log_weights(log_weights: &[f64]) -> Result<Self> {
        let m = log_weights.len();
        let log_estimate = log_mean_exp(log_weights)?;
        let ess = effective_sample_size(log_weights)?;
        let stderr_log = if m < 2 {
            f64::INFINITY
        } else {
            // log(sum w^2) vs log(M mean(w)^2); their gap gives the sample
            // variance without leaving the log domain
            let doubled: Vec<f64> = log_weights.iter().map(|&w| 2.0 * w).collect();
            let log_sum_sq = log_sum_exp(&doubled);
            let log_m_mean_sq = (m as f64).ln() + 2.0 * log_estimate;
            if log_sum_sq <= log_m_mean_sq {
                0.0
            } else {
                let log_centered = log_m_mean_sq + (log_sum_sq - log_m_mean_sq).exp_m1().ln();
                let log_var = log_centered - ((m - 1) as f64).ln();
                (0.5 * (log_var - (m as f64).ln()) - log_estimate).exp()
            }
        };
        Ok(Self { log_estimate, num_chains: m, stderr_log, ess })
    }

    /// The delta-method error bar is meaningless when a handful of weights
    /// dominate.
    pub fn stderr_reliable(&self) -> bool {
        self.ess >= 10.0
    }
}
