//! The forward and reverse annealing estimators.
//!
//! `run_ais` runs the forward annealing chain and averages weights that are
//! unbiased for the target partition function. The reverse estimators
//! simulate the annealing chain backwards from a test example and average
//! weights that are unbiased for the probability the *annealing model*
//! assigns to that example; their logs are stochastic lower bounds on the
//! annealing model's log-probability.
//!
//! Indexing convention, fixed once and validated against the dense-kernel
//! oracle: in a descending loop the state x_k is produced by the reverse
//! sweep at beta_{k+1} and the ratio f_k(x_k)/f_{k+1}(x_k) is accumulated;
//! in the ascending (clamped) loop of the intractable-posterior variant,
//! h'_k is produced by the clamped reverse sweep at beta_{k-1} and the ratio
//! f_k/f_{k-1} at the new state is accumulated. Because log f_beta is affine
//! in beta at a fixed state, each ratio is (delta beta) times
//! log f_tgt(x) - log f_ini(x).
//!
//! Weights accumulate online; chains are never stored. Chain i of a run with
//! master seed s draws from the dedicated stream `substream(s, i)`, so
//! results are reproducible under any parallel schedule.

mod aggregate;
mod annealing_oracle;

pub use aggregate::{effective_sample_size, log_mean_exp, tail_bound_check, EstimateSummary};
pub use annealing_oracle::{
    exact_log_p_ann, exact_log_p_ann_at_betas, ORACLE_STEP_CAP, ORACLE_UNIT_CAP,
};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::math::bernoulli_log_prob;
use crate::model::{clamp_mean, BinaryRbm, BinaryVector, TwoLayerDbn};
use crate::path::{AnnealTarget, GeometricPath, InitialDistribution, Schedule};
use crate::rng::chain_rng;
use crate::transitions::{sweep, JointState, SweepPlan, TransitionKind};

/// One chain's contribution to an estimate.
#[derive(Clone, Debug)]
pub struct ChainResult {
    pub chain_index: usize,
    pub log_weight: f64,
}

/// Reverse-estimator output for a single test example.
#[derive(Clone, Debug)]
pub struct RaiseResult {
    pub test_example: BinaryVector,
    pub summary: EstimateSummary,
    pub per_chain: Vec<ChainResult>,
}

impl RaiseResult {
    fn from_log_weights(test_example: BinaryVector, log_weights: Vec<f64>) -> Result<Self> {
        let summary = EstimateSummary::from_log_weights(&log_weights)?;
        let per_chain = log_weights
            .into_iter()
            .enumerate()
            .map(|(chain_index, log_weight)| ChainResult { chain_index, log_weight })
            .collect();
        Ok(Self { test_example, summary, per_chain })
    }
}

fn check_chains(num_chains: usize) -> Result<()> {
    if num_chains == 0 {
        return Err(Error::InvalidArgument("need at least one chain".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// forward estimator

fn ais_chain<R: Rng>(
    path: &GeometricPath,
    schedule: &Schedule,
    plan: &SweepPlan,
    rng: &mut R,
) -> f64 {
    let mut state = path.sample_initial(rng);
    let mut log_w = path.initial_log_partition();
    for k in 1..=schedule.num_steps() {
        log_w += (schedule.beta(k) - schedule.beta(k - 1)) * path.annealing_energy(&state);
        sweep(path, schedule.beta(k), plan, &mut state, rng);
    }
    log_w
}

/// Per-chain log-weights of the forward estimator; their linear-domain mean
/// is unbiased for Z_tgt.
pub fn ais_log_weights(
    path: &GeometricPath,
    schedule: &Schedule,
    num_chains: usize,
    master_seed: u64,
) -> Result<Vec<f64>> {
    check_chains(num_chains)?;
    let plan = SweepPlan::new(path, TransitionKind::Forward);
    Ok((0..num_chains)
        .into_par_iter()
        .map(|i| {
            let mut rng = chain_rng(master_seed, i as u64);
            ais_chain(path, schedule, &plan, &mut rng)
        })
        .collect())
}

/// Forward annealed-importance-sampling estimate of log Z_tgt.
pub fn run_ais(
    path: &GeometricPath,
    schedule: &Schedule,
    num_chains: usize,
    master_seed: u64,
) -> Result<EstimateSummary> {
    let lw = ais_log_weights(path, schedule, num_chains, master_seed)?;
    EstimateSummary::from_log_weights(&lw)
}

// ---------------------------------------------------------------------------
// reverse estimator, tractable posterior (RBM targets)

/// Exact-conditional start followed by the descending reverse loop. Also the
/// building block of the DBN variant, which runs it on the top RBM.
fn raise_tractable_chain<R: Rng>(
    path: &GeometricPath,
    rbm: &BinaryRbm,
    schedule: &Schedule,
    plan: &SweepPlan,
    v_test: &BinaryVector,
    rng: &mut R,
) -> f64 {
    let means = rbm.conditional_hidden(v_test).expect("v_test checked by caller");
    let mut hidden = BinaryVector::zeros(rbm.num_hidden());
    for (j, &m) in means.iter().enumerate() {
        hidden.set(j, u8::from(rng.random::<f64>() < m));
    }
    let mut state = JointState::new(vec![v_test.clone(), hidden]);
    let mut log_w =
        rbm.log_unnormalized_v(v_test).expect("v_test checked by caller") - path.initial_log_partition();
    for k in (0..schedule.num_steps()).rev() {
        sweep(path, schedule.beta(k + 1), plan, &mut state, rng);
        log_w += (schedule.beta(k) - schedule.beta(k + 1)) * path.annealing_energy(&state);
    }
    log_w
}

/// Per-chain log-weights of the reverse estimator for an RBM target; their
/// linear-domain mean is unbiased for p_ann(v_test).
pub fn raise_tractable_log_weights(
    path: &GeometricPath,
    schedule: &Schedule,
    num_chains: usize,
    v_test: &BinaryVector,
    master_seed: u64,
) -> Result<Vec<f64>> {
    check_chains(num_chains)?;
    let rbm = match path.target() {
        AnnealTarget::Rbm(m) => m,
        AnnealTarget::Dbm(_) => {
            return Err(Error::InvalidArgument(
                "tractable reverse estimator needs an RBM target; use the intractable variant".into(),
            ))
        }
    };
    if v_test.len() != rbm.num_visible() {
        return Err(Error::DimensionMismatch("v_test size mismatch".into()));
    }
    let plan = SweepPlan::new(path, TransitionKind::Reverse);
    Ok((0..num_chains)
        .into_par_iter()
        .map(|i| {
            let mut rng = chain_rng(master_seed, i as u64);
            raise_tractable_chain(path, rbm, schedule, &plan, v_test, &mut rng)
        })
        .collect())
}

/// Reverse estimator for RBM targets (exact posterior start).
pub fn run_raise_tractable(
    path: &GeometricPath,
    schedule: &Schedule,
    num_chains: usize,
    v_test: &BinaryVector,
    master_seed: u64,
) -> Result<RaiseResult> {
    let lw = raise_tractable_log_weights(path, schedule, num_chains, v_test, master_seed)?;
    RaiseResult::from_log_weights(v_test.clone(), lw)
}

// ---------------------------------------------------------------------------
// reverse estimator, intractable posterior (clamped heating pass)

fn raise_intractable_chain<R: Rng>(
    path: &GeometricPath,
    schedule: &Schedule,
    clamped_plan: &SweepPlan,
    full_plan: &SweepPlan,
    v_test: &BinaryVector,
    rng: &mut R,
) -> f64 {
    // h'_0 ~ p_0(h | v_test): hiddens are uniform at beta = 0 for either
    // initial distribution. One draw per hidden unit, layers in order.
    let sizes = path.layer_sizes();
    let mut layers = Vec::with_capacity(sizes.len());
    layers.push(v_test.clone());
    for &size in &sizes[1..] {
        let mut layer = BinaryVector::zeros(size);
        for u in 0..size {
            layer.set(u, u8::from(rng.random::<f64>() < 0.5));
        }
        layers.push(layer);
    }
    let mut state = JointState::new(layers);
    let mut log_w = path.initial_log_p_visible(v_test).expect("v_test checked by caller");

    // ascending heating pass: clamped reverse sweeps, visible never moves
    for k in 1..=schedule.num_steps() {
        sweep(path, schedule.beta(k - 1), clamped_plan, &mut state, rng);
        log_w += (schedule.beta(k) - schedule.beta(k - 1)) * path.annealing_energy(&state);
    }
    // descending full reverse pass from x_K = (v_test, h'_K)
    for k in (0..schedule.num_steps()).rev() {
        sweep(path, schedule.beta(k + 1), full_plan, &mut state, rng);
        log_w += (schedule.beta(k) - schedule.beta(k + 1)) * path.annealing_energy(&state);
    }
    log_w
}

/// Per-chain log-weights of the reverse estimator with an intractable
/// posterior (the augmented-chain variant); unbiased for p_ann(v_test).
pub fn raise_intractable_log_weights(
    path: &GeometricPath,
    schedule: &Schedule,
    num_chains: usize,
    v_test: &BinaryVector,
    master_seed: u64,
) -> Result<Vec<f64>> {
    check_chains(num_chains)?;
    if v_test.len() != path.target().num_visible() {
        return Err(Error::DimensionMismatch("v_test size mismatch".into()));
    }
    let clamped_plan = SweepPlan::new(path, TransitionKind::ClampedReverse);
    let full_plan = SweepPlan::new(path, TransitionKind::Reverse);
    Ok((0..num_chains)
        .into_par_iter()
        .map(|i| {
            let mut rng = chain_rng(master_seed, i as u64);
            raise_intractable_chain(path, schedule, &clamped_plan, &full_plan, v_test, &mut rng)
        })
        .collect())
}

/// Reverse estimator via the clamped heating pass; works for any target with
/// tractable p_0(h | v), which is the route for DBMs.
pub fn run_raise_intractable(
    path: &GeometricPath,
    schedule: &Schedule,
    num_chains: usize,
    v_test: &BinaryVector,
    master_seed: u64,
) -> Result<RaiseResult> {
    let lw = raise_intractable_log_weights(path, schedule, num_chains, v_test, master_seed)?;
    RaiseResult::from_log_weights(v_test.clone(), lw)
}

// ---------------------------------------------------------------------------
// reverse estimator for DBNs (unrolled top RBM plus directed layer)

fn raise_dbn_chain<R: Rng>(
    dbn: &TwoLayerDbn,
    top_path: &GeometricPath,
    top_rbm: &BinaryRbm,
    schedule: &Schedule,
    plan: &SweepPlan,
    recognition_means: &[f64],
    v_test: &BinaryVector,
    rng: &mut R,
) -> f64 {
    let mut h1 = BinaryVector::zeros(recognition_means.len());
    let mut log_q = 0.0;
    for (j, &m) in recognition_means.iter().enumerate() {
        let bit = u8::from(rng.random::<f64>() < m);
        h1.set(j, bit);
        log_q += bernoulli_log_prob(bit, m);
    }
    let log_directed = dbn.log_p_visible_given_h1(v_test, &h1);
    let log_w_top = raise_tractable_chain(top_path, top_rbm, schedule, plan, &h1, rng);
    log_directed + log_w_top - log_q
}

/// Per-chain log-weights of the DBN reverse estimator. Proposal: sample h1
/// from the recognition distribution, then run the tractable reverse
/// procedure on the top RBM with h1 as its visible state. The weight is
/// p(v_test | h1) w_top(h1) / q(h1 | v_test), unbiased for the probability
/// the unrolled generative model assigns to v_test.
pub fn raise_dbn_log_weights(
    dbn: &TwoLayerDbn,
    schedule: &Schedule,
    num_chains: usize,
    v_test: &BinaryVector,
    master_seed: u64,
) -> Result<Vec<f64>> {
    check_chains(num_chains)?;
    if v_test.len() != dbn.num_visible() {
        return Err(Error::DimensionMismatch("v_test size mismatch".into()));
    }
    // only the uniform initial distribution is defined for DBNs
    let top_path = GeometricPath::new(
        InitialDistribution::Uniform,
        AnnealTarget::Rbm(dbn.top_rbm().clone()),
    )?;
    let top_rbm = match top_path.target() {
        AnnealTarget::Rbm(m) => m.clone(),
        AnnealTarget::Dbm(_) => unreachable!(),
    };
    let plan = SweepPlan::new(&top_path, TransitionKind::Reverse);
    let recognition_means: Vec<f64> =
        dbn.recognition(v_test)?.into_iter().map(clamp_mean).collect();
    Ok((0..num_chains)
        .into_par_iter()
        .map(|i| {
            let mut rng = chain_rng(master_seed, i as u64);
            raise_dbn_chain(
                dbn,
                &top_path,
                &top_rbm,
                schedule,
                &plan,
                &recognition_means,
                v_test,
                &mut rng,
            )
        })
        .collect())
}

/// Reverse estimator for two-layer DBNs under the uniform initial distribution.
pub fn run_raise_dbn(
    dbn: &TwoLayerDbn,
    schedule: &Schedule,
    num_chains: usize,
    v_test: &BinaryVector,
    master_seed: u64,
) -> Result<RaiseResult> {
    let lw = raise_dbn_log_weights(dbn, schedule, num_chains, v_test, master_seed)?;
    RaiseResult::from_log_weights(v_test.clone(), lw)
}
