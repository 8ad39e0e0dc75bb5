//! Control-variate averaging of per-example estimates.
//!
//! The expensive estimate Y is computed for n paired examples; a cheap
//! correlated covariate X is available for all N examples. The combined
//! estimator `(1/n) sum(Y_i - alpha X_i) + (alpha/N) sum(X_j)` is unbiased
//! for E[Y] and has lower variance than the plain n-sample mean whenever X
//! tracks Y closely.

use crate::error::{Error, Result};

/// One (expensive estimate, cheap covariate) pair for a single example.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairedSample {
    /// Expensive per-example estimate (the reverse-estimator log-probability).
    pub y: f64,
    /// Covariate for the same example (log unnormalized probability).
    pub x: f64,
}

/// Combination coefficient. `alpha = 1` is the natural choice when Y and X
/// are expected to agree up to a constant; `alpha = 0` ignores the covariate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlVariateConfig {
    pub alpha: f64,
}

impl Default for ControlVariateConfig {
    fn default() -> Self {
        Self { alpha: 1.0 }
    }
}

fn validate(pairs: &[PairedSample], covariates: &[f64], cfg: &ControlVariateConfig) -> Result<()> {
    if pairs.is_empty() || covariates.is_empty() {
        return Err(Error::InvalidArgument("control variates: empty inputs".into()));
    }
    if pairs.len() > covariates.len() {
        return Err(Error::InvalidArgument(format!(
            "control variates: n = {} exceeds N = {}",
            pairs.len(),
            covariates.len()
        )));
    }
    if !cfg.alpha.is_finite() {
        return Err(Error::InvalidArgument("control variates: alpha must be finite".into()));
    }
    Ok(())
}

/// `(1/n) sum(Y_i - alpha X_i) + (alpha/N) sum(X_j)`.
///
/// With `alpha = 0` this is bit-for-bit the plain mean of the Y values.
pub fn cv_estimate(
    pairs: &[PairedSample],
    covariates: &[f64],
    cfg: &ControlVariateConfig,
) -> Result<f64> {
    validate(pairs, covariates, cfg)?;
    let n = pairs.len() as f64;
    if cfg.alpha == 0.0 {
        return Ok(pairs.iter().map(|p| p.y).sum::<f64>() / n);
    }
    let big_n = covariates.len() as f64;
    let paired_term = pairs.iter().map(|p| p.y - cfg.alpha * p.x).sum::<f64>() / n;
    let covariate_term = cfg.alpha * covariates.iter().sum::<f64>() / big_n;
    Ok(paired_term + covariate_term)
}

/// Sample variances feeding the diagnostic variance formula.
#[derive(Clone, Copy, Debug)]
pub struct VarianceReport {
    pub var_y: f64,
    pub var_y_minus_ax: f64,
    pub var_x: f64,
    /// Var(Y - aX)/n + a^2 Var(X)/N + 2a Cov(Y - aX, X)/n, with sample
    /// moments plugged in. Diagnostic only; the empirical variance of
    /// repeated estimates is the authoritative number.
    pub projected_variance: f64,
}

fn sample_variance(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
}

/// Sample-moment plug-in of the combined estimator's variance expression.
/// Needs at least two pairs.
pub fn cv_variance_report(
    pairs: &[PairedSample],
    covariates: &[f64],
    cfg: &ControlVariateConfig,
) -> Result<VarianceReport> {
    validate(pairs, covariates, cfg)?;
    if pairs.len() < 2 {
        return Err(Error::InvalidArgument("variance report needs at least two pairs".into()));
    }
    let n = pairs.len() as f64;
    let big_n = covariates.len() as f64;
    let a = cfg.alpha;
    let var_y = sample_variance(pairs.iter().map(|p| p.y));
    let var_y_minus_ax = sample_variance(pairs.iter().map(|p| p.y - a * p.x));
    let var_x = sample_variance(covariates.iter().copied());

    let mean_d = pairs.iter().map(|p| p.y - a * p.x).sum::<f64>() / n;
    let mean_x_paired = pairs.iter().map(|p| p.x).sum::<f64>() / n;
    let cov_dx = pairs
        .iter()
        .map(|p| (p.y - a * p.x - mean_d) * (p.x - mean_x_paired))
        .sum::<f64>()
        / (n - 1.0);

    let projected_variance = var_y_minus_ax / n + a * a * var_x / big_n + 2.0 * a * cov_dx / n;
    Ok(VarianceReport { var_y, var_y_minus_ax, var_x, projected_variance })
}
