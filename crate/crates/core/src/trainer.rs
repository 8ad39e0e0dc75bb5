//! Minimal contrastive-divergence / persistent-chain trainer.
//!
//! Exists to manufacture desk-scale RBMs for end-to-end runs, not to chase
//! training quality. Plain SGD, no momentum or weight decay; weights start
//! at Normal(0, 0.01^2), biases at zero. Data-phase statistics use hidden
//! probabilities; model-phase statistics use the sampled visible state and
//! its hidden probabilities. Deterministic given the config seed.

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::math::sigmoid;
use crate::model::{BinaryRbm, BinaryVector};
use crate::rng::chain_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrainAlgorithm {
    /// Contrastive divergence with the given number of Gibbs steps.
    Cd { steps: usize },
    /// Persistent chains, one Gibbs step per minibatch.
    Pcd { num_chains: usize },
}

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub algorithm: TrainAlgorithm,
    pub learning_rate: f64,
    pub epochs: usize,
    pub minibatch_size: usize,
    pub num_hidden: usize,
    pub seed: u64,
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        let alg_ok = match self.algorithm {
            TrainAlgorithm::Cd { steps } => steps > 0,
            TrainAlgorithm::Pcd { num_chains } => num_chains > 0,
        };
        if !alg_ok || self.minibatch_size == 0 || self.num_hidden == 0 {
            return Err(Error::InvalidArgument("train config: counts must be positive".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument("train config: bad learning rate".into()));
        }
        Ok(())
    }
}

struct Phase {
    vh: Array2<f64>,
    v: Array1<f64>,
    h: Array1<f64>,
}

impl Phase {
    fn zeros(nv: usize, nh: usize) -> Self {
        Self { vh: Array2::zeros((nv, nh)), v: Array1::zeros(nv), h: Array1::zeros(nh) }
    }

    /// Accumulate sufficient statistics for one visible state with its
    /// hidden-unit probabilities.
    fn add(&mut self, v: &BinaryVector, h_probs: &[f64]) {
        for i in v.iter_ones() {
            self.v[i] += 1.0;
            for (j, &p) in h_probs.iter().enumerate() {
                self.vh[(i, j)] += p;
            }
        }
        for (j, &p) in h_probs.iter().enumerate() {
            self.h[j] += p;
        }
    }

    fn scale(&mut self, f: f64) {
        self.vh *= f;
        self.v *= f;
        self.h *= f;
    }
}

fn sample_hidden<R: Rng>(rbm: &BinaryRbm, v: &BinaryVector, rng: &mut R) -> BinaryVector {
    let mut h = BinaryVector::zeros(rbm.num_hidden());
    for j in 0..rbm.num_hidden() {
        let m = sigmoid(rbm.hidden_field(v, j));
        h.set(j, u8::from(rng.random::<f64>() < m));
    }
    h
}

fn sample_visible<R: Rng>(rbm: &BinaryRbm, h: &BinaryVector, rng: &mut R) -> BinaryVector {
    let mut v = BinaryVector::zeros(rbm.num_visible());
    for i in 0..rbm.num_visible() {
        let m = sigmoid(rbm.visible_field(h, i));
        v.set(i, u8::from(rng.random::<f64>() < m));
    }
    v
}

fn hidden_probs(rbm: &BinaryRbm, v: &BinaryVector) -> Vec<f64> {
    (0..rbm.num_hidden()).map(|j| sigmoid(rbm.hidden_field(v, j))).collect()
}

/// Standard-normal draw via Box-Muller; two uniforms per call keeps the
/// stream layout simple.
fn normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Run SGD on the log-likelihood with CD or PCD gradient estimates and
/// return the resulting RBM.
pub fn train_rbm(data: &[BinaryVector], config: &TrainConfig) -> Result<BinaryRbm> {
    config.validate()?;
    let first = data
        .first()
        .ok_or_else(|| Error::InvalidArgument("training data must be nonempty".into()))?;
    let nv = first.len();
    if data.iter().any(|d| d.len() != nv) {
        return Err(Error::DimensionMismatch("training examples have inconsistent lengths".into()));
    }
    let nh = config.num_hidden;

    let mut init_rng = chain_rng(config.seed, 0);
    let mut weights = Array2::zeros((nv, nh));
    for w in weights.iter_mut() {
        *w = 0.01 * normal(&mut init_rng);
    }
    let mut rbm = BinaryRbm::new(Array1::zeros(nv), Array1::zeros(nh), weights)?;

    let mut train_rng = chain_rng(config.seed, 1);
    let mut persistent: Vec<BinaryVector> = match config.algorithm {
        TrainAlgorithm::Pcd { num_chains } => (0..num_chains)
            .map(|_| {
                let mut v = BinaryVector::zeros(nv);
                for i in 0..nv {
                    v.set(i, u8::from(train_rng.random::<f64>() < 0.5));
                }
                v
            })
            .collect(),
        TrainAlgorithm::Cd { .. } => Vec::new(),
    };

    let mut order: Vec<usize> = (0..data.len()).collect();
    for _epoch in 0..config.epochs {
        // Fisher-Yates with the training stream
        for i in (1..order.len()).rev() {
            let j = train_rng.random_range(0..=i);
            order.swap(i, j);
        }
        for batch in order.chunks(config.minibatch_size) {
            let mut data_phase = Phase::zeros(nv, nh);
            for &idx in batch {
                data_phase.add(&data[idx], &hidden_probs(&rbm, &data[idx]));
            }
            data_phase.scale(1.0 / batch.len() as f64);

            let mut model_phase = Phase::zeros(nv, nh);
            match config.algorithm {
                TrainAlgorithm::Cd { steps } => {
                    for &idx in batch {
                        let mut v = data[idx].clone();
                        for _ in 0..steps {
                            let h = sample_hidden(&rbm, &v, &mut train_rng);
                            v = sample_visible(&rbm, &h, &mut train_rng);
                        }
                        model_phase.add(&v, &hidden_probs(&rbm, &v));
                    }
                    model_phase.scale(1.0 / batch.len() as f64);
                }
                TrainAlgorithm::Pcd { .. } => {
                    for chain in persistent.iter_mut() {
                        let h = sample_hidden(&rbm, chain, &mut train_rng);
                        *chain = sample_visible(&rbm, &h, &mut train_rng);
                        model_phase.add(chain, &hidden_probs(&rbm, chain));
                    }
                    model_phase.scale(1.0 / persistent.len() as f64);
                }
            }

            let lr = config.learning_rate;
            {
                let w = rbm.weights_mut();
                *w += &((&data_phase.vh - &model_phase.vh) * lr);
            }
            {
                let a = rbm.visible_bias_mut();
                *a += &((&data_phase.v - &model_phase.v) * lr);
            }
            {
                let b = rbm.hidden_bias_mut();
                *b += &((&data_phase.h - &model_phase.h) * lr);
            }
        }
    }
    Ok(rbm)
}
