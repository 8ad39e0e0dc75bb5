//! Scalar helpers for log-domain arithmetic.
//!
//! Everything downstream carries probabilities, weights, and partition
//! functions as natural logs; linear-domain values appear only inside
//! max-shifted reductions.

/// Logistic function, stable in both tails.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^x) without overflow for large |x|.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Inverse of `sigmoid`; requires p in (0, 1).
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// log of a Bernoulli probability: ln(mean) if bit is set, ln(1 - mean) otherwise.
pub fn bernoulli_log_prob(bit: u8, mean: f64) -> f64 {
    if bit == 1 {
        mean.ln()
    } else {
        (1.0 - mean).ln()
    }
}

/// Max-shifted log(sum(exp(values))).
///
/// The terms are accumulated in ascending sorted order, so the result is
/// bit-identical for any permutation of the same values. Returns -inf for
/// an input of all -inf.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "log_sum_exp of empty slice");
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let max = *sorted.last().unwrap();
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let mut sum = 0.0;
    for v in &sorted {
        sum += (v - max).exp();
    }
    max + sum.ln()
}
