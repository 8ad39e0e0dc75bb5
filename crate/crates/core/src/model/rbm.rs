//! Restricted Boltzmann machine over binary units.
//!
//! The joint unnormalized probability of a visible/hidden pair is
//! `exp(a'v + b'h + v'Wh)`. Summing out the hidden layer is analytic because
//! the conditional factorizes, which gives the closed form used by
//! [`BinaryRbm::log_unnormalized_v`]. The partition function is only
//! available by enumeration and is capped to desk-scale models.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::math::{log_sum_exp, sigmoid, softplus};
use crate::model::binary_vector::{dot_bits, BinaryVector};

/// Largest layer size the exact-partition enumeration will accept by default.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

#[derive(Clone, Debug)]
pub struct BinaryRbm {
    visible_bias: Array1<f64>,
    hidden_bias: Array1<f64>,
    /// Shape (num_visible, num_hidden).
    weights: Array2<f64>,
}

fn check_finite(name: &str, values: impl IntoIterator<Item = f64>) -> Result<()> {
    for v in values {
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!("{name} contains non-finite entry {v}")));
        }
    }
    Ok(())
}

impl BinaryRbm {
    pub fn new(visible_bias: Array1<f64>, hidden_bias: Array1<f64>, weights: Array2<f64>) -> Result<Self> {
        let (nv, nh) = weights.dim();
        if nv == 0 || nh == 0 {
            return Err(Error::DimensionMismatch("rbm layers must be nonempty".into()));
        }
        if visible_bias.len() != nv || hidden_bias.len() != nh {
            return Err(Error::DimensionMismatch(format!(
                "rbm biases ({}, {}) inconsistent with weights {:?}",
                visible_bias.len(),
                hidden_bias.len(),
                weights.dim()
            )));
        }
        check_finite("visible_bias", visible_bias.iter().copied())?;
        check_finite("hidden_bias", hidden_bias.iter().copied())?;
        check_finite("weights", weights.iter().copied())?;
        Ok(Self { visible_bias, hidden_bias, weights })
    }

    pub fn zeros(num_visible: usize, num_hidden: usize) -> Self {
        Self::new(
            Array1::zeros(num_visible),
            Array1::zeros(num_hidden),
            Array2::zeros((num_visible, num_hidden)),
        )
        .expect("zero rbm is valid")
    }

    pub fn num_visible(&self) -> usize {
        self.weights.nrows()
    }

    pub fn num_hidden(&self) -> usize {
        self.weights.ncols()
    }

    pub fn visible_bias(&self) -> &Array1<f64> {
        &self.visible_bias
    }

    pub fn hidden_bias(&self) -> &Array1<f64> {
        &self.hidden_bias
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub(crate) fn visible_bias_mut(&mut self) -> &mut Array1<f64> {
        &mut self.visible_bias
    }

    pub(crate) fn hidden_bias_mut(&mut self) -> &mut Array1<f64> {
        &mut self.hidden_bias
    }

    pub(crate) fn weights_mut(&mut self) -> &mut Array2<f64> {
        &mut self.weights
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

    fn check_hidden(&self, h: &BinaryVector) -> Result<()> {
        if h.len() != self.num_hidden() {
            return Err(Error::DimensionMismatch(format!(
                "hidden vector has {} units, model expects {}",
                h.len(),
                self.num_hidden()
            )));
        }
        Ok(())
    }

    /// Input to hidden unit `j` given a visible state: `b_j + sum_i v_i W_ij`.
    #[inline]
    pub(crate) fn hidden_field(&self, v: &BinaryVector, j: usize) -> f64 {
        let mut f = self.hidden_bias[j];
        for i in v.iter_ones() {
            f += self.weights[(i, j)];
        }
        f
    }

    /// Input to visible unit `i` given a hidden state: `a_i + sum_j W_ij h_j`.
    #[inline]
    pub(crate) fn visible_field(&self, h: &BinaryVector, i: usize) -> f64 {
        let mut f = self.visible_bias[i];
        for j in h.iter_ones() {
            f += self.weights[(i, j)];
        }
        f
    }

    /// log f(v, h) = a'v + b'h + v'Wh.
    pub fn log_unnormalized_joint(&self, v: &BinaryVector, h: &BinaryVector) -> f64 {
        debug_assert_eq!(v.len(), self.num_visible());
        debug_assert_eq!(h.len(), self.num_hidden());
        let mut e = dot_bits(self.visible_bias.as_slice().unwrap(), v)
            + dot_bits(self.hidden_bias.as_slice().unwrap(), h);
        for i in v.iter_ones() {
            for j in h.iter_ones() {
                e += self.weights[(i, j)];
            }
        }
        e
    }

    /// log f(v) = a'v + sum_j softplus(b_j + (v'W)_j), the hidden layer summed out.
    pub fn log_unnormalized_v(&self, v: &BinaryVector) -> Result<f64> {
        self.check_visible(v)?;
        let mut acc = dot_bits(self.visible_bias.as_slice().unwrap(), v);
        for j in 0..self.num_hidden() {
            acc += softplus(self.hidden_field(v, j));
        }
        Ok(acc)
    }

    /// Bernoulli means of the hidden units given a visible state.
    pub fn conditional_hidden(&self, v: &BinaryVector) -> Result<Vec<f64>> {
        self.check_visible(v)?;
        Ok((0..self.num_hidden()).map(|j| sigmoid(self.hidden_field(v, j))).collect())
    }

    /// Bernoulli means of the visible units given a hidden state.
    pub fn conditional_visible(&self, h: &BinaryVector) -> Result<Vec<f64>> {
        self.check_hidden(h)?;
        Ok((0..self.num_visible()).map(|i| sigmoid(self.visible_field(h, i))).collect())
    }

    /// Exact log partition function with the default enumeration cap.
    pub fn exact_log_partition(&self) -> Result<f64> {
        self.exact_log_partition_with_cap(DEFAULT_ENUMERATION_CAP)
    }

    /// Exact log Z, enumerating the smaller layer and summing the other out
    /// analytically. Errors if the smaller layer exceeds `cap` units.
    pub fn exact_log_partition_with_cap(&self, cap: usize) -> Result<f64> {
        let (nv, nh) = (self.num_visible(), self.num_hidden());
        let small = nv.min(nh);
        if small > cap {
            return Err(Error::CapExceeded(format!(
                "exact_log_partition: smaller layer has {small} units, cap is {cap}"
            )));
        }
        let enumerate_hidden = nh <= nv;
        let n = if enumerate_hidden { nh } else { nv };
        let mut terms = Vec::with_capacity(1usize << n);
        for idx in 0..(1usize << n) {
            let s = BinaryVector::from_index(idx, n);
            let term = if enumerate_hidden {
                let mut acc = dot_bits(self.hidden_bias.as_slice().unwrap(), &s);
                for i in 0..nv {
                    acc += softplus(self.visible_field(&s, i));
                }
                acc
            } else {
                // `s` plays the visible role; this is log f(v)
                let mut acc = dot_bits(self.visible_bias.as_slice().unwrap(), &s);
                for j in 0..nh {
                    acc += softplus(self.hidden_field(&s, j));
                }
                acc
            };
            terms.push(term);
        }
        Ok(log_sum_exp(&terms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    const LN2: f64 = std::f64::consts::LN_2;

    fn one_by_one(w: f64) -> BinaryRbm {
        BinaryRbm::new(array![0.0], array![0.0], array![[w]]).unwrap()
    }

    #[test]
    fn zero_rbm_log_f_is_nh_ln2() {
        let rbm = BinaryRbm::zeros(4, 3);
        for idx in 0..16 {
            let v = BinaryVector::from_index(idx, 4);
            assert_abs_diff_eq!(rbm.log_unnormalized_v(&v).unwrap(), 3.0 * LN2, epsilon = 1e-14);
        }
    }

    #[test]
    fn one_by_one_log_f_enumerates_by_hand() {
        // a=0, b=0, w=ln 2, v=[1]: f(v) = 1 + 2 = 3
        let rbm = one_by_one(2.0_f64.ln());
        let v = BinaryVector::new(vec![1]).unwrap();
        assert_abs_diff_eq!(rbm.log_unnormalized_v(&v).unwrap(), 3.0_f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn one_by_one_partition_enumerates_by_hand() {
        // joint states contribute 1 + 1 + 1 + 2 = 5
        let rbm = one_by_one(2.0_f64.ln());
        assert_abs_diff_eq!(rbm.exact_log_partition().unwrap(), 5.0_f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn zero_rbm_partition_is_uniform_count() {
        let rbm = BinaryRbm::zeros(3, 2);
        assert_abs_diff_eq!(rbm.exact_log_partition().unwrap(), 5.0 * LN2, epsilon = 1e-14);
    }

    #[test]
    fn conditional_means_saturate() {
        let rbm = BinaryRbm::new(array![0.0], array![50.0], array![[0.0]]).unwrap();
        let v = BinaryVector::new(vec![0]).unwrap();
        let means = rbm.conditional_hidden(&v).unwrap();
        assert!((means[0] - 1.0).abs() < 1e-15);

        let zero = BinaryRbm::zeros(2, 3);
        let v = BinaryVector::new(vec![0, 1]).unwrap();
        for m in zero.conditional_hidden(&v).unwrap() {
            assert_abs_diff_eq!(m, 0.5);
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let rbm = BinaryRbm::zeros(3, 2);
        let v = BinaryVector::new(vec![0, 1]).unwrap();
        assert!(rbm.log_unnormalized_v(&v).is_err());
        assert!(rbm.conditional_hidden(&v).is_err());
        let h = BinaryVector::new(vec![0, 1, 1]).unwrap();
        assert!(rbm.conditional_visible(&h).is_err());
    }

    #[test]
    fn partition_cap_is_enforced() {
        let rbm = BinaryRbm::zeros(25, 30);
        assert!(rbm.exact_log_partition().is_err());
        assert!(rbm.exact_log_partition_with_cap(25).is_ok());
    }

    #[test]
    fn non_finite_parameters_rejected() {
        let r = BinaryRbm::new(array![f64::NAN], array![0.0], array![[0.0]]);
        assert!(r.is_err());
    }
}
