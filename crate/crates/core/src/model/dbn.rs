//! Two-hidden-layer deep belief network: an RBM prior over (h1, h2) with a
//! directed logistic layer generating v from h1. Approximate inference uses a
//! recognition distribution built from the transpose of the directed weights.

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::math::{bernoulli_log_prob, log_sum_exp, sigmoid, softplus};
use crate::model::binary_vector::BinaryVector;
use crate::model::dbm::clamp_mean;
use crate::model::rbm::BinaryRbm;

#[derive(Clone, Debug)]
pub struct TwoLayerDbn {
    /// RBM over (h1, h2); its visible layer is h1.
    top_rbm: BinaryRbm,
    /// Shape (num_visible, num_hidden_1).
    directed_weights: Array2<f64>,
    directed_visible_bias: Array1<f64>,
    /// Bias of the recognition distribution q(h1 | v). Defaults to the
    /// generative bias over h1 (the top RBM's visible bias).
    recognition_bias: Array1<f64>,
}

impl TwoLayerDbn {
    pub fn new(
        top_rbm: BinaryRbm,
        directed_weights: Array2<f64>,
        directed_visible_bias: Array1<f64>,
        recognition_bias: Option<Array1<f64>>,
    ) -> Result<Self> {
        let (nv, nh1) = directed_weights.dim();
        if nv == 0 || nh1 == 0 {
            return Err(Error::DimensionMismatch("dbn layers must be nonempty".into()));
        }
        if top_rbm.num_visible() != nh1 {
            return Err(Error::DimensionMismatch(format!(
                "top rbm visible size {} must equal h1 size {nh1}",
                top_rbm.num_visible()
            )));
        }
        if directed_visible_bias.len() != nv {
            return Err(Error::DimensionMismatch("directed visible bias length mismatch".into()));
        }
        let recognition_bias = recognition_bias.unwrap_or_else(|| top_rbm.visible_bias().clone());
        if recognition_bias.len() != nh1 {
            return Err(Error::DimensionMismatch("recognition bias length mismatch".into()));
        }
        if directed_weights
            .iter()
            .chain(directed_visible_bias.iter())
            .chain(recognition_bias.iter())
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidArgument("dbn parameters contain non-finite entry".into()));
        }
        Ok(Self { top_rbm, directed_weights, directed_visible_bias, recognition_bias })
    }

    pub fn zeros(nv: usize, nh1: usize, nh2: usize) -> Self {
        Self::new(
            BinaryRbm::zeros(nh1, nh2),
            Array2::zeros((nv, nh1)),
            Array1::zeros(nv),
            None,
        )
        .expect("zero dbn is valid")
    }

    pub fn num_visible(&self) -> usize {
        self.directed_weights.nrows()
    }

    pub fn num_hidden_1(&self) -> usize {
        self.directed_weights.ncols()
    }

    pub fn num_hidden_2(&self) -> usize {
        self.top_rbm.num_hidden()
    }

    pub fn top_rbm(&self) -> &BinaryRbm {
        &self.top_rbm
    }

    pub fn directed_weights(&self) -> &Array2<f64> {
        &self.directed_weights
    }

    pub fn directed_visible_bias(&self) -> &Array1<f64> {
        &self.directed_visible_bias
    }

    pub fn recognition_bias(&self) -> &Array1<f64> {
        &self.recognition_bias
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

    /// Input to visible unit `i` of the directed layer given h1.
    #[inline]
    fn directed_field(&self, h1: &BinaryVector, i: usize) -> f64 {
        let mut f = self.directed_visible_bias[i];
        for j in h1.iter_ones() {
            f += self.directed_weights[(i, j)];
        }
        f
    }

    /// log p(v | h1) under the directed logistic layer.
    pub fn log_p_visible_given_h1(&self, v: &BinaryVector, h1: &BinaryVector) -> f64 {
        debug_assert_eq!(v.len(), self.num_visible());
        debug_assert_eq!(h1.len(), self.num_hidden_1());
        let mut acc = 0.0;
        for i in 0..v.len() {
            let d = self.directed_field(h1, i);
            // log sigmoid(d) = d - softplus(d); log(1 - sigmoid(d)) = -softplus(d)
            acc += f64::from(v.get(i)) * d - softplus(d);
        }
        acc
    }

    /// Recognition means q(h1 | v) = sigmoid(recognition_bias + W' v), using
    /// the transpose of the generative weights.
    pub fn recognition(&self, v: &BinaryVector) -> Result<Vec<f64>> {
        self.check_visible(v)?;
        Ok((0..self.num_hidden_1())
            .map(|j| {
                let mut f = self.recognition_bias[j];
                for i in v.iter_ones() {
                    f += self.directed_weights[(i, j)];
                }
                sigmoid(f)
            })
            .collect())
    }

    /// Importance-sampling estimate of
    /// log f(v) = log sum_{h1} p(v | h1) f_top(h1) with the recognition
    /// distribution as the proposal.
    pub fn is_log_unnormalized_v<R: Rng>(&self, v: &BinaryVector, num_samples: usize, rng: &mut R) -> Result<f64> {
        self.check_visible(v)?;
        if num_samples == 0 {
            return Err(Error::InvalidArgument("num_samples must be at least 1".into()));
        }
        let means: Vec<f64> = self.recognition(v)?.into_iter().map(clamp_mean).collect();
        let nh1 = self.num_hidden_1();
        let mut log_ratios = Vec::with_capacity(num_samples);
        let mut h1 = BinaryVector::zeros(nh1);
        for _ in 0..num_samples {
            let mut log_q = 0.0;
            for (j, &m) in means.iter().enumerate() {
                let bit = u8::from(rng.random::<f64>() < m);
                h1.set(j, bit);
                log_q += bernoulli_log_prob(bit, m);
            }
            let log_f_top = self.top_rbm.log_unnormalized_v(&h1).expect("h1 sized for top rbm");
            log_ratios.push(self.log_p_visible_given_h1(v, &h1) + log_f_top - log_q);
        }
        Ok(log_sum_exp(&log_ratios) - (num_samples as f64).ln())
    }

    /// Exact log f(v) by enumerating h1 (h2 is summed out inside the top RBM).
    pub fn log_unnormalized_v_exact(&self, v: &BinaryVector, cap: usize) -> Result<f64> {
        self.check_visible(v)?;
        let nh1 = self.num_hidden_1();
        if nh1 > cap {
            return Err(Error::CapExceeded(format!(
                "dbn log_unnormalized_v_exact: h1 has {nh1} units, cap is {cap}"
            )));
        }
        let terms: Vec<f64> = (0..(1usize << nh1))
            .map(|idx| {
                let h1 = BinaryVector::from_index(idx, nh1);
                self.log_p_visible_given_h1(v, &h1)
                    + self.top_rbm.log_unnormalized_v(&h1).expect("h1 sized for top rbm")
            })
            .collect();
        Ok(log_sum_exp(&terms))
    }

    /// The DBN's normalizer is the top RBM's partition function.
    pub fn exact_log_partition_with_cap(&self, cap: usize) -> Result<f64> {
        self.top_rbm.exact_log_partition_with_cap(cap)
    }
}
