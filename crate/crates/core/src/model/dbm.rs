//! Two-hidden-layer deep Boltzmann machine.
//!
//! log f(v, h1, h2) = a'v + b1'h1 + b2'h2 + v'W1 h1 + h1'W2 h2. The
//! unnormalized visible probability f(v) is intractable in general; this
//! module provides the exact variant for tiny second layers (h1 summed out
//! analytically, h2 enumerated), the fully factorized mean-field
//! approximation to p(h1, h2 | v), and the simple importance-sampling
//! estimate of log f(v) that uses the mean-field marginal over h2 as its
//! proposal.

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::math::{bernoulli_log_prob, log_sum_exp, sigmoid, softplus};
use crate::model::binary_vector::{dot_bits, BinaryVector};
use crate::model::rbm::DEFAULT_ENUMERATION_CAP;

/// Proposal Bernoulli means are clamped to [EPS, 1 - EPS] before sampling so
/// importance weights stay finite.
pub const PROPOSAL_MEAN_CLAMP: f64 = 1e-6;

pub(crate) fn clamp_mean(m: f64) -> f64 {
    m.clamp(PROPOSAL_MEAN_CLAMP, 1.0 - PROPOSAL_MEAN_CLAMP)
}

#[derive(Clone, Debug)]
pub struct TwoLayerDbm {
    visible_bias: Array1<f64>,
    hidden_bias_1: Array1<f64>,
    hidden_bias_2: Array1<f64>,
    /// Shape (num_visible, num_hidden_1).
    weights_1: Array2<f64>,
    /// Shape (num_hidden_1, num_hidden_2).
    weights_2: Array2<f64>,
}

/// Fixed point of the factorized mean-field updates for p(h1, h2 | v).
#[derive(Clone, Debug)]
pub struct MeanFieldResult {
    pub h1_means: Vec<f64>,
    pub h2_means: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

pub const MEAN_FIELD_MAX_ITERS: usize = 50;
pub const MEAN_FIELD_TOL: f64 = 1e-6;

impl TwoLayerDbm {
    pub fn new(
        visible_bias: Array1<f64>,
        hidden_bias_1: Array1<f64>,
        hidden_bias_2: Array1<f64>,
        weights_1: Array2<f64>,
        weights_2: Array2<f64>,
    ) -> Result<Self> {
        let (nv, nh1) = weights_1.dim();
        let (nh1b, nh2) = weights_2.dim();
        if nv == 0 || nh1 == 0 || nh2 == 0 {
            return Err(Error::DimensionMismatch("dbm layers must be nonempty".into()));
        }
        if nh1 != nh1b {
            return Err(Error::DimensionMismatch(format!(
                "dbm weight matrices disagree on h1 size: {nh1} vs {nh1b}"
            )));
        }
        if visible_bias.len() != nv || hidden_bias_1.len() != nh1 || hidden_bias_2.len() != nh2 {
            return Err(Error::DimensionMismatch("dbm bias lengths inconsistent with weights".into()));
        }
        for (name, it) in [
            ("visible_bias", visible_bias.iter()),
            ("hidden_bias_1", hidden_bias_1.iter()),
            ("hidden_bias_2", hidden_bias_2.iter()),
        ] {
            if it.clone().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} contains non-finite entry")));
            }
        }
        if weights_1.iter().chain(weights_2.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("dbm weights contain non-finite entry".into()));
        }
        Ok(Self { visible_bias, hidden_bias_1, hidden_bias_2, weights_1, weights_2 })
    }

    pub fn zeros(nv: usize, nh1: usize, nh2: usize) -> Self {
        Self::new(
            Array1::zeros(nv),
            Array1::zeros(nh1),
            Array1::zeros(nh2),
            Array2::zeros((nv, nh1)),
            Array2::zeros((nh1, nh2)),
        )
        .expect("zero dbm is valid")
    }

    pub fn num_visible(&self) -> usize {
        self.weights_1.nrows()
    }

    pub fn num_hidden_1(&self) -> usize {
        self.weights_1.ncols()
    }

    pub fn num_hidden_2(&self) -> usize {
        self.weights_2.ncols()
    }

    pub fn visible_bias(&self) -> &Array1<f64> {
        &self.visible_bias
    }

    pub fn hidden_bias_1(&self) -> &Array1<f64> {
        &self.hidden_bias_1
    }

    pub fn hidden_bias_2(&self) -> &Array1<f64> {
        &self.hidden_bias_2
    }

    pub fn weights_1(&self) -> &Array2<f64> {
        &self.weights_1
    }

    pub fn weights_2(&self) -> &Array2<f64> {
        &self.weights_2
    }

    fn check_visible(&self, v: &BinaryVector) -> Result<()> {
        if v.len() != self.num_visible() {
            return Err(Error::DimensionMismatch(format!(
                "visible vector has {} units, model expects {}",
                v.len(),
                self.num_visible()
            )));
        }
        Ok(())
    }

    /// Input to visible unit `i` given h1.
    #[inline]
    pub(crate) fn visible_field(&self, h1: &BinaryVector, i: usize) -> f64 {
        let mut f = self.visible_bias[i];
        for j in h1.iter_ones() {
            f += self.weights_1[(i, j)];
        }
        f
    }

    /// Input to h1 unit `j` given v and h2.
    #[inline]
    pub(crate) fn hidden1_field(&self, v: &BinaryVector, h2: &BinaryVector, j: usize) -> f64 {
        let mut f = self.hidden_bias_1[j];
        for i in v.iter_ones() {
            f += self.weights_1[(i, j)];
        }
        for l in h2.iter_ones() {
            f += self.weights_2[(j, l)];
        }
        f
    }

    /// Input to h2 unit `l` given h1.
    #[inline]
    pub(crate) fn hidden2_field(&self, h1: &BinaryVector, l: usize) -> f64 {
        let mut f = self.hidden_bias_2[l];
        for j in h1.iter_ones() {
            f += self.weights_2[(j, l)];
        }
        f
    }

    /// log f(v, h1, h2).
    pub fn log_unnormalized_joint(&self, v: &BinaryVector, h1: &BinaryVector, h2: &BinaryVector) -> f64 {
        let mut e = dot_bits(self.visible_bias.as_slice().unwrap(), v)
            + dot_bits(self.hidden_bias_1.as_slice().unwrap(), h1)
            + dot_bits(self.hidden_bias_2.as_slice().unwrap(), h2);
        for j in h1.iter_ones() {
            for i in v.iter_ones() {
                e += self.weights_1[(i, j)];
            }
            for l in h2.iter_ones() {
                e += self.weights_2[(j, l)];
            }
        }
        e
    }

    /// log f(v, h2) with h1 summed out analytically:
    /// a'v + b2'h2 + sum_j softplus(b1_j + (v'W1)_j + (W2 h2)_j).
    pub fn log_unnormalized_v_h2(&self, v: &BinaryVector, h2: &BinaryVector) -> f64 {
        let mut acc = dot_bits(self.visible_bias.as_slice().unwrap(), v)
            + dot_bits(self.hidden_bias_2.as_slice().unwrap(), h2);
        for j in 0..self.num_hidden_1() {
            acc += softplus(self.hidden1_field(v, h2, j));
        }
        acc
    }

    /// Exact log f(v): h1 analytic, h2 enumerated. Errors if h2 exceeds the cap.
    pub fn log_unnormalized_v_exact(&self, v: &BinaryVector, cap: usize) -> Result<f64> {
        self.check_visible(v)?;
        let nh2 = self.num_hidden_2();
        if nh2 > cap {
            return Err(Error::CapExceeded(format!(
                "log_unnormalized_v_exact: h2 has {nh2} units, cap is {cap}"
            )));
        }
        let terms: Vec<f64> = (0..(1usize << nh2))
            .map(|idx| self.log_unnormalized_v_h2(v, &BinaryVector::from_index(idx, nh2)))
            .collect();
        Ok(log_sum_exp(&terms))
    }

    /// Exact log f(v) with the default cap.
    pub fn log_unnormalized_v_exact_default(&self, v: &BinaryVector) -> Result<f64> {
        self.log_unnormalized_v_exact(v, DEFAULT_ENUMERATION_CAP)
    }

    /// Exact log Z by enumerating h1 (v and h2 are conditionally independent
    /// given h1 and sum out analytically). Errors if h1 exceeds the cap.
    pub fn exact_log_partition_with_cap(&self, cap: usize) -> Result<f64> {
        let nh1 = self.num_hidden_1();
        if nh1 > cap {
            return Err(Error::CapExceeded(format!(
                "dbm exact_log_partition: h1 has {nh1} units, cap is {cap}"
            )));
        }
        let mut terms = Vec::with_capacity(1usize << nh1);
        for idx in 0..(1usize << nh1) {
            let h1 = BinaryVector::from_index(idx, nh1);
            let mut acc = dot_bits(self.hidden_bias_1.as_slice().unwrap(), &h1);
            for i in 0..self.num_visible() {
                acc += softplus(self.visible_field(&h1, i));
            }
            for l in 0..self.num_hidden_2() {
                acc += softplus(self.hidden2_field(&h1, l));
            }
            terms.push(acc);
        }
        Ok(log_sum_exp(&terms))
    }

    pub fn exact_log_partition(&self) -> Result<f64> {
        self.exact_log_partition_with_cap(DEFAULT_ENUMERATION_CAP)
    }

    /// Coordinate-ascent mean field for p(h1, h2 | v): all means start at 0.5,
    /// each sweep updates the h1 means then the h2 means, and iteration stops
    /// when the largest mean change drops below `tol` or after `max_iters`.
    pub fn mean_field(&self, v: &BinaryVector, max_iters: usize, tol: f64) -> Result<MeanFieldResult> {
        self.check_visible(v)?;
        let (nh1, nh2) = (self.num_hidden_1(), self.num_hidden_2());
        let mut mu1 = vec![0.5; nh1];
        let mut mu2 = vec![0.5; nh2];
        let v_input: Vec<f64> = (0..nh1)
            .map(|j| {
                let mut f = self.hidden_bias_1[j];
                for i in v.iter_ones() {
                    f += self.weights_1[(i, j)];
                }
                f
            })
            .collect();
        let mut converged = false;
        let mut iterations = 0;
        for _ in 0..max_iters {
            iterations += 1;
            let mut delta: f64 = 0.0;
            for j in 0..nh1 {
                let mut f = v_input[j];
                for l in 0..nh2 {
                    f += self.weights_2[(j, l)] * mu2[l];
                }
                let next = sigmoid(f);
                delta = delta.max((next - mu1[j]).abs());
                mu1[j] = next;
            }
            for l in 0..nh2 {
                let mut f = self.hidden_bias_2[l];
                for j in 0..nh1 {
                    f += self.weights_2[(j, l)] * mu1[j];
                }
                let next = sigmoid(f);
                delta = delta.max((next - mu2[l]).abs());
                mu2[l] = next;
            }
            if delta < tol {
                converged = true;
                break;
            }
        }
        Ok(MeanFieldResult { h1_means: mu1, h2_means: mu2, converged, iterations })
    }

    /// Variational lower bound on log f(v) at the given factorized means:
    /// E_q[log f(v, h1, h2)] + H(q).
    pub fn mean_field_lower_bound(&self, v: &BinaryVector, mf: &MeanFieldResult) -> f64 {
        let entropy = |m: f64| -> f64 {
            let mut h = 0.0;
            if m > 0.0 {
                h -= m * m.ln();
            }
            if m < 1.0 {
                h -= (1.0 - m) * (1.0 - m).ln();
            }
            h
        };
        let mut e = dot_bits(self.visible_bias.as_slice().unwrap(), v);
        for (j, &m1) in mf.h1_means.iter().enumerate() {
            let mut f = self.hidden_bias_1[j];
            for i in v.iter_ones() {
                f += self.weights_1[(i, j)];
            }
            for (l, &m2) in mf.h2_means.iter().enumerate() {
                f += self.weights_2[(j, l)] * m2;
            }
            e += m1 * f + entropy(m1);
        }
        for (l, &m2) in mf.h2_means.iter().enumerate() {
            e += m2 * self.hidden_bias_2[l] + entropy(m2);
        }
        e
    }

    /// Importance-sampling estimate of log f(v) with the mean-field product
    /// distribution over h2 as the proposal.
    pub fn is_log_unnormalized_v<R: Rng>(&self, v: &BinaryVector, num_samples: usize, rng: &mut R) -> Result<f64> {
        self.check_visible(v)?;
        if num_samples == 0 {
            return Err(Error::InvalidArgument("num_samples must be at least 1".into()));
        }
        let mf = self.mean_field(v, MEAN_FIELD_MAX_ITERS, MEAN_FIELD_TOL)?;
        let means: Vec<f64> = mf.h2_means.iter().map(|&m| clamp_mean(m)).collect();
        let nh2 = self.num_hidden_2();
        let mut log_ratios = Vec::with_capacity(num_samples);
        let mut h2 = BinaryVector::zeros(nh2);
        for _ in 0..num_samples {
            let mut log_q = 0.0;
            for (l, &m) in means.iter().enumerate() {
                let bit = u8::from(rng.random::<f64>() < m);
                h2.set(l, bit);
                log_q += bernoulli_log_prob(bit, m);
            }
            log_ratios.push(self.log_unnormalized_v_h2(v, &h2) - log_q);
        }
        Ok(log_sum_exp(&log_ratios) - (num_samples as f64).ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use crate::model::rbm::BinaryRbm;
    use crate::rng::chain_rng;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn zero_dbm_log_f_counts_hidden_states() {
        let dbm = TwoLayerDbm::zeros(3, 2, 2);
        let v = BinaryVector::from_index(5, 3);
        assert_abs_diff_eq!(
            dbm.log_unnormalized_v_exact_default(&v).unwrap(),
            4.0 * LN2,
            epsilon = 1e-14
        );
    }

    #[test]
    fn decoupled_dbm_reduces_to_rbm_plus_free_layer() {
        // W2 = 0: f(v) factors into the (v, h1) RBM part times 2^{nh2}
        let dbm = TwoLayerDbm::new(
            array![0.2, -0.4],
            array![0.3, 0.1, -0.2],
            array![0.5, -0.5],
            array![[0.7, -0.3, 0.2], [0.1, 0.4, -0.6]],
            Array2::zeros((3, 2)),
        )
        .unwrap();
        let rbm = BinaryRbm::new(
            array![0.2, -0.4],
            array![0.3, 0.1, -0.2],
            array![[0.7, -0.3, 0.2], [0.1, 0.4, -0.6]],
        )
        .unwrap();
        let free = softplus(0.5) + softplus(-0.5);
        for idx in 0..4 {
            let v = BinaryVector::from_index(idx, 2);
            assert_abs_diff_eq!(
                dbm.log_unnormalized_v_exact_default(&v).unwrap(),
                rbm.log_unnormalized_v(&v).unwrap() + free,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn mean_field_zero_model_is_uniform() {
        let dbm = TwoLayerDbm::zeros(3, 2, 2);
        let v = BinaryVector::from_index(3, 3);
        let mf = dbm.mean_field(&v, 50, 1e-6).unwrap();
        assert!(mf.converged);
        for m in mf.h1_means.iter().chain(&mf.h2_means) {
            assert_abs_diff_eq!(*m, 0.5);
        }
    }

    #[test]
    fn mean_field_exact_when_factorized() {
        let dbm = TwoLayerDbm::new(
            array![0.0, 0.0],
            array![0.4, -0.9],
            array![0.7],
            array![[0.5, -0.2], [0.3, 0.8]],
            Array2::zeros((2, 1)),
        )
        .unwrap();
        let v = BinaryVector::new(vec![1, 0]).unwrap();
        let mf = dbm.mean_field(&v, 50, 1e-10).unwrap();
        assert_abs_diff_eq!(mf.h1_means[0], sigmoid(0.4 + 0.5), epsilon = 1e-12);
        assert_abs_diff_eq!(mf.h1_means[1], sigmoid(-0.9 - 0.2), epsilon = 1e-12);
        assert_abs_diff_eq!(mf.h2_means[0], sigmoid(0.7), epsilon = 1e-12);
    }

    #[test]
    fn is_estimate_exact_when_proposal_matches_conditional() {
        // W2 = 0 makes the mean-field proposal the exact conditional over h2,
        // so every sample returns log f(v) with zero variance.
        let dbm = TwoLayerDbm::new(
            array![0.1],
            array![0.2, -0.3],
            array![0.4, -0.1],
            array![[0.6, -0.5]],
            Array2::zeros((2, 2)),
        )
        .unwrap();
        let v = BinaryVector::new(vec![1]).unwrap();
        let exact = dbm.log_unnormalized_v_exact_default(&v).unwrap();
        let mut rng = chain_rng(11, 0);
        for s in [1, 3, 16] {
            let est = dbm.is_log_unnormalized_v(&v, s, &mut rng).unwrap();
            assert_abs_diff_eq!(est, exact, epsilon = 1e-10);
        }
    }

    #[test]
    fn zero_dbm_is_estimate_exact() {
        let dbm = TwoLayerDbm::zeros(2, 3, 2);
        let v = BinaryVector::from_index(1, 2);
        let mut rng = chain_rng(5, 0);
        let est = dbm.is_log_unnormalized_v(&v, 7, &mut rng).unwrap();
        assert_abs_diff_eq!(est, 5.0 * LN2, epsilon = 1e-12);
    }

    #[test]
    fn invalid_construction_rejected() {
        assert!(TwoLayerDbm::new(
            array![0.0],
            array![0.0],
            array![0.0],
            array![[0.0, 0.0]], // says nh1 = 2
            array![[0.0]],      // says nh1 = 1
        )
        .is_err());
    }
}
