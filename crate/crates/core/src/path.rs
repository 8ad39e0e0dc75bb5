//! Geometric-averages annealing path between a tractable initial
//! distribution and a target model, plus the inverse-temperature schedule.
//!
//! The intermediate unnormalized distributions are
//! `f_beta(x) = f_ini(x)^(1-beta) * f_tgt(x)^beta`. The uniform initial
//! distribution uses the constant f_ini = 1, so its partition function is
//! 2^(total units). The data-base-rates (DBR) initial distribution has
//! independent visibles with logit means fitted to the training data and
//! uniform hiddens. For either choice, the intermediate distribution of an
//! RBM target is itself an RBM with linearly averaged parameters; the same
//! rule applies layerwise to DBM targets.

use ndarray::Array1;
use rand::Rng;

use crate::error::{Error, Result};
use crate::math::{logit, sigmoid, softplus};
use crate::model::{dot_bits, BinaryRbm, BinaryVector, TwoLayerDbm};
use crate::transitions::JointState;

/// Initial distribution of the annealing run.
#[derive(Clone, Debug)]
pub enum InitialDistribution {
    /// f_ini = 1 on every joint state.
    Uniform,
    /// Independent visibles with the given logit means; hiddens uniform.
    DataBaseRates { visible_bias: Array1<f64> },
}

impl InitialDistribution {
    pub(crate) fn dbr_bias(&self) -> Option<&Array1<f64>> {
        match self {
            InitialDistribution::Uniform => None,
            InitialDistribution::DataBaseRates { visible_bias } => Some(visible_bias),
        }
    }
}

/// Fit a DBR initial distribution to a dataset: each visible bias is the
/// logit of the add-one-smoothed pixel mean, `logit((c_i + 1) / (M + 2))`.
pub fn dbr_from_dataset(examples: &[BinaryVector]) -> Result<InitialDistribution> {
    let first = examples
        .first()
        .ok_or_else(|| Error::InvalidArgument("dbr_from_dataset: empty dataset".into()))?;
    let n = first.len();
    if examples.iter().any(|e| e.len() != n) {
        return Err(Error::DimensionMismatch("dbr_from_dataset: inconsistent example lengths".into()));
    }
    let m = examples.len() as f64;
    let mut bias = Array1::zeros(n);
    for i in 0..n {
        let count: f64 = examples.iter().map(|e| f64::from(e.get(i))).sum();
        bias[i] = logit((count + 1.0) / (m + 2.0));
    }
    Ok(InitialDistribution::DataBaseRates { visible_bias: bias })
}

/// The ascending inverse-temperature grid `0 = beta_0 < ... < beta_K = 1`.
#[derive(Clone, Debug)]
pub struct Schedule {
    betas: Vec<f64>,
}

impl Schedule {
    pub fn new(betas: Vec<f64>) -> Result<Self> {
        if betas.len() < 2 {
            return Err(Error::InvalidSchedule("need at least beta_0 and beta_K".into()));
        }
        if betas[0] != 0.0 || *betas.last().unwrap() != 1.0 {
            return Err(Error::InvalidSchedule("endpoints must be exactly 0 and 1".into()));
        }
        if betas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSchedule("betas must be strictly ascending".into()));
        }
        Ok(Self { betas })
    }

    /// Linearly spaced schedule with `k` intermediate steps: beta_i = i / k.
    pub fn linear(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidSchedule("K must be at least 1".into()));
        }
        let betas = (0..=k).map(|i| i as f64 / k as f64).collect();
        Self::new(betas)
    }

    /// Number of intermediate steps K (one less than the number of grid points).
    pub fn num_steps(&self) -> usize {
        self.betas.len() - 1
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    #[inline]
    pub fn beta(&self, k: usize) -> f64 {
        self.betas[k]
    }
}

/// Annealing targets share the visible layer convention; the path state is
/// the full joint configuration (visible layer first, hidden layers after).
#[derive(Clone, Debug)]
pub enum AnnealTarget {
    Rbm(BinaryRbm),
    Dbm(TwoLayerDbm),
}

impl AnnealTarget {
    pub fn num_visible(&self) -> usize {
        match self {
            AnnealTarget::Rbm(m) => m.num_visible(),
            AnnealTarget::Dbm(m) => m.num_visible(),
        }
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        match self {
            AnnealTarget::Rbm(m) => vec![m.num_visible(), m.num_hidden()],
            AnnealTarget::Dbm(m) => vec![m.num_visible(), m.num_hidden_1(), m.num_hidden_2()],
        }
    }

    pub fn num_hidden_units(&self) -> usize {
        self.layer_sizes().iter().skip(1).sum()
    }
}

/// A geometric-averages path from an initial distribution to a target model.
#[derive(Clone, Debug)]
pub struct GeometricPath {
    initial: InitialDistribution,
    target: AnnealTarget,
}

impl GeometricPath {
    pub fn new(initial: InitialDistribution, target: AnnealTarget) -> Result<Self> {
        if let Some(bias) = initial.dbr_bias() {
            if bias.len() != target.num_visible() {
                return Err(Error::DimensionMismatch(format!(
                    "dbr bias has {} entries, target has {} visible units",
                    bias.len(),
                    target.num_visible()
                )));
            }
            if bias.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("dbr bias contains non-finite entry".into()));
            }
        }
        Ok(Self { initial, target })
    }

    pub fn uniform(target: AnnealTarget) -> Self {
        Self { initial: InitialDistribution::Uniform, target }
    }

    pub fn initial(&self) -> &InitialDistribution {
        &self.initial
    }

    pub fn target(&self) -> &AnnealTarget {
        &self.target
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        self.target.layer_sizes()
    }

    pub fn total_units(&self) -> usize {
        self.layer_sizes().iter().sum()
    }

    fn check_state(&self, state: &JointState) -> Result<()> {
        if state.layer_sizes() != self.layer_sizes() {
            return Err(Error::DimensionMismatch(format!(
                "state layers {:?} do not match path layers {:?}",
                state.layer_sizes(),
                self.layer_sizes()
            )));
        }
        Ok(())
    }

    /// log f_ini(x): zero for the uniform initial distribution, `a0' v` for DBR.
    pub fn log_f_initial(&self, state: &JointState) -> f64 {
        match self.initial.dbr_bias() {
            None => 0.0,
            Some(bias) => dot_bits(bias.as_slice().unwrap(), state.visible()),
        }
    }

    /// log f_tgt(x), the target's joint unnormalized log-probability.
    pub fn log_f_target(&self, state: &JointState) -> f64 {
        match &self.target {
            AnnealTarget::Rbm(m) => m.log_unnormalized_joint(state.visible(), state.layer(1)),
            AnnealTarget::Dbm(m) => {
                m.log_unnormalized_joint(state.visible(), state.layer(1), state.layer(2))
            }
        }
    }

    /// log f_tgt(x) - log f_ini(x); multiplying by a beta increment gives the
    /// change in log f_beta at a fixed state.
    #[inline]
    pub fn annealing_energy(&self, state: &JointState) -> f64 {
        self.log_f_target(state) - self.log_f_initial(state)
    }

    /// log f_beta(x) = (1 - beta) log f_ini(x) + beta log f_tgt(x).
    pub fn intermediate_log_f(&self, beta: f64, state: &JointState) -> Result<f64> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidArgument(format!("beta {beta} outside [0, 1]")));
        }
        self.check_state(state)?;
        Ok((1.0 - beta) * self.log_f_initial(state) + beta * self.log_f_target(state))
    }

    /// log Z of the initial distribution. Uniform: (total units) ln 2;
    /// DBR: (hidden units) ln 2 + sum_i softplus(a0_i).
    pub fn initial_log_partition(&self) -> f64 {
        let ln2 = std::f64::consts::LN_2;
        match self.initial.dbr_bias() {
            None => self.total_units() as f64 * ln2,
            Some(bias) => {
                self.target.num_hidden_units() as f64 * ln2
                    + bias.iter().map(|&a| softplus(a)).sum::<f64>()
            }
        }
    }

    /// log p_0(v), the initial distribution's visible marginal at `v`.
    pub fn initial_log_p_visible(&self, v: &BinaryVector) -> Result<f64> {
        if v.len() != self.target.num_visible() {
            return Err(Error::DimensionMismatch("visible vector size mismatch".into()));
        }
        let ln2 = std::f64::consts::LN_2;
        Ok(match self.initial.dbr_bias() {
            None => -(v.len() as f64) * ln2,
            Some(bias) => {
                dot_bits(bias.as_slice().unwrap(), v)
                    - bias.iter().map(|&a| softplus(a)).sum::<f64>()
            }
        })
    }

    /// Draw a state from p_0: every unit i.i.d. Bernoulli(1/2), except DBR
    /// visibles which use sigmoid(a0_i). Consumes one uniform variate per
    /// unit, visibles first, then hidden layers in order.
    pub fn sample_initial<R: Rng>(&self, rng: &mut R) -> JointState {
        let sizes = self.layer_sizes();
        let mut layers = Vec::with_capacity(sizes.len());
        let visible_means = self.initial.dbr_bias();
        for (li, &size) in sizes.iter().enumerate() {
            let mut layer = BinaryVector::zeros(size);
            for u in 0..size {
                let mean = match (li, visible_means) {
                    (0, Some(bias)) => sigmoid(bias[u]),
                    _ => 0.5,
                };
                layer.set(u, u8::from(rng.random::<f64>() < mean));
            }
            layers.push(layer);
        }
        JointState::new(layers)
    }
}
