//! Estimator correctness against exact oracles: linear-domain unbiasedness
//! of the forward and reverse chains, conservativeness on moderate models,
//! and convergence of the annealing model to the target.

mod common;

use anneal::estimators::{
    ais_log_weights, exact_log_p_ann, log_mean_exp, raise_dbn_log_weights,
    raise_intractable_log_weights, raise_tractable_log_weights, run_ais, run_raise_tractable,
    EstimateSummary,
};
use anneal::math::log_sum_exp;
use anneal::model::BinaryVector;
use anneal::path::{AnnealTarget, GeometricPath, Schedule};
use common::*;

/// Assert the linear-domain mean of the weights lands within `k` standard
/// errors of the true value (all in log domain to avoid overflow).
fn assert_linear_mean_within(log_weights: &[f64], true_log_value: f64, k: f64, label: &str) {
    let s = EstimateSummary::from_log_weights(log_weights).unwrap();
    let ratio = (s.log_estimate - true_log_value).exp();
    let se_ratio = s.stderr_log * ratio;
    assert!(
        (ratio - 1.0).abs() <= k * se_ratio,
        "{label}: off by {:.2} standard errors (ratio {ratio:.6})",
        (ratio - 1.0).abs() / se_ratio
    );
}

#[test]
fn ais_is_unbiased_for_small_k() {
    // unbiasedness holds for any K, not just asymptotically
    let rbm = random_rbm(5, 4, 0.6, 0.4, 401);
    let log_z = brute_rbm_log_z(&rbm);
    let path = GeometricPath::uniform(AnnealTarget::Rbm(rbm));
    for k in [1, 5, 20] {
        let schedule = Schedule::linear(k).unwrap();
        let lw = ais_log_weights(&path, &schedule, 50_000, 500 + k as u64).unwrap();
        assert_linear_mean_within(&lw, log_z, 4.0, &format!("AIS K={k}"));
    }
}

#[test]
fn ais_is_accurate_on_moderate_model() {
    // weak 10x8 model, K = 10,000: the estimate sits on top of the truth
    let rbm = random_rbm(10, 8, 0.1, 0.05, 402);
    let log_z = rbm.exact_log_partition().unwrap();
    let path = GeometricPath::uniform(AnnealTarget::Rbm(rbm));
    let schedule = Schedule::linear(10_000).unwrap();
    let s = run_ais(&path, &schedule, 100, 403).unwrap();
    assert!(
        (s.log_estimate - log_z).abs() <= 0.1,
        "AIS error {} exceeds 0.1 nats",
        (s.log_estimate - log_z).abs()
    );
}

#[test]
fn raise_tractable_is_unbiased_for_p_ann() {
    let rbm = random_rbm(3, 2, 0.8, 0.5, 404);
    let path = GeometricPath::uniform(AnnealTarget::Rbm(rbm));
    let schedule = Schedule::linear(3).unwrap();
    let v = BinaryVector::new(vec![1, 0, 1]).unwrap();
    let oracle = exact_log_p_ann(&path, &schedule, &v).unwrap();
    let lw = raise_tractable_log_weights(&path, &schedule, 200_000, &v, 405).unwrap();
    assert_linear_mean_within(&lw, oracle, 4.0, "reverse estimator (tractable)");
}

#[test]
fn raise_intractable_is_unbiased_for_p_ann() {
    let dbm = random_dbm(3, 2, 2, 0.7, 0.4, 406);
    let path = GeometricPath::uniform(AnnealTarget::Dbm(dbm));
    let schedule = Schedule::linear(3).unwrap();
    let v = BinaryVector::new(vec![0, 1, 1]).unwrap();
    let oracle = exact_log_p_ann(&path, &schedule, &v).unwrap();
    let lw = raise_intractable_log_weights(&path, &schedule, 200_000, &v, 407).unwrap();
    assert_linear_mean_within(&lw, oracle, 4.0, "reverse estimator (intractable)");
}

#[test]
fn raise_intractable_matches_oracle_under_dbr_init() {
    let dbm = random_dbm(3, 2, 2, 0.6, 0.3, 408);
    let data: Vec<BinaryVector> = (0..6).map(|i| BinaryVector::from_index(i, 3)).collect();
    let init = anneal::dbr_from_dataset(&data).unwrap();
    let path = GeometricPath::new(init, AnnealTarget::Dbm(dbm)).unwrap();
    let schedule = Schedule::linear(4).unwrap();
    let v = BinaryVector::new(vec![1, 1, 0]).unwrap();
    let oracle = exact_log_p_ann(&path, &schedule, &v).unwrap();
    let lw = raise_intractable_log_weights(&path, &schedule, 150_000, &v, 409).unwrap();
    assert_linear_mean_within(&lw, oracle, 4.0, "reverse estimator (DBR init)");
}

#[test]
fn raise_dbn_is_unbiased_for_unrolled_model() {
    // truth: sum over h1 of p(v | h1) p_ann_top(h1), the top factor from the
    // dense-kernel oracle on the top RBM
    let dbn = random_dbn(3, 2, 2, 0.8, 0.5, 410);
    let schedule = Schedule::linear(3).unwrap();
    let v = BinaryVector::new(vec![1, 0, 0]).unwrap();
    let top_path = GeometricPath::uniform(AnnealTarget::Rbm(dbn.top_rbm().clone()));
    let nh1 = dbn.num_hidden_1();
    let terms: Vec<f64> = (0..(1usize << nh1))
        .map(|i1| {
            let h1 = BinaryVector::from_index(i1, nh1);
            dbn.log_p_visible_given_h1(&v, &h1)
                + exact_log_p_ann(&top_path, &schedule, &h1).unwrap()
        })
        .collect();
    let truth = log_sum_exp(&terms);
    let lw = raise_dbn_log_weights(&dbn, &schedule, 200_000, &v, 411).unwrap();
    assert_linear_mean_within(&lw, truth, 4.0, "reverse estimator (DBN)");
}

#[test]
fn raise_is_conservative_on_moderate_model() {
    // 10x8 RBM at K = 10,000: the estimate should not exceed the exact
    // log-probability by more than 0.1 nats in at least 9 of 10 seeds
    let rbm = random_rbm(10, 8, 0.1, 0.05, 412);
    let log_z = rbm.exact_log_partition().unwrap();
    let mut r = rng(413);
    let v = random_visible(10, &mut r);
    let exact_log_p = rbm.log_unnormalized_v(&v).unwrap() - log_z;
    let path = GeometricPath::uniform(AnnealTarget::Rbm(rbm));
    let schedule = Schedule::linear(10_000).unwrap();
    let mut conservative = 0;
    for seed in 0..10u64 {
        let res = run_raise_tractable(&path, &schedule, 50, &v, 1000 + seed).unwrap();
        if res.summary.log_estimate <= exact_log_p + 0.1 {
            conservative += 1;
        }
    }
    assert!(conservative >= 9, "only {conservative}/10 seeds were conservative");
}

#[test]
fn dbm_sandwich_at_scale() {
    // 4-3-2 DBM, K = 10,000: reverse estimate of log p(v) at most the
    // forward estimate plus 0.2 nats
    let dbm = random_dbm(4, 3, 2, 0.4, 0.2, 414);
    let mut r = rng(415);
    let v = random_visible(4, &mut r);
    let log_f = brute_dbm_log_f(&dbm, &v);
    let path = GeometricPath::uniform(AnnealTarget::Dbm(dbm));
    let schedule = Schedule::linear(10_000).unwrap();
    let ais = run_ais(&path, &schedule, 200, 416).unwrap();
    let ais_log_p = log_f - ais.log_estimate;
    let raise = anneal::run_raise_intractable(&path, &schedule, 100, &v, 417).unwrap();
    assert!(
        raise.summary.log_estimate <= ais_log_p + 0.2,
        "reverse {} vs forward {}",
        raise.summary.log_estimate,
        ais_log_p
    );
}

#[test]
fn dbn_raise_agrees_with_forward_route() {
    // tiny DBN at K = 10,000: reverse estimate within 0.3 nats of
    // exact log f(v) minus the forward estimate of the top partition function
    let dbn = random_dbn(3, 2, 2, 0.5, 0.3, 418);
    let mut r = rng(419);
    let v = random_visible(3, &mut r);
    let log_f = brute_dbn_log_f(&dbn, &v);
    let top_path = GeometricPath::uniform(AnnealTarget::Rbm(dbn.top_rbm().clone()));
    let schedule = Schedule::linear(10_000).unwrap();
    let ais = run_ais(&top_path, &schedule, 200, 420).unwrap();
    let forward_log_p = log_f - ais.log_estimate;
    let raise = anneal::run_raise_dbn(&dbn, &schedule, 100, &v, 421).unwrap();
    assert!(
        (raise.summary.log_estimate - forward_log_p).abs() <= 0.3,
        "reverse {} vs forward {}",
        raise.summary.log_estimate,
        forward_log_p
    );
}

#[test]
fn annealing_model_approaches_target_with_k() {
    let rbm = random_rbm(3, 2, 0.5, 0.3, 422);
    let exact_log_p = {
        let mut r = rng(423);
        let v = random_visible(3, &mut r);
        let lp = rbm.log_unnormalized_v(&v).unwrap() - brute_rbm_log_z(&rbm);
        (v, lp)
    };
    let (v, log_p_tgt) = exact_log_p;
    let path = GeometricPath::uniform(AnnealTarget::Rbm(rbm));
    let ks = [1usize, 2, 5, 10, 25, 50, 100, 200];
    let errs: Vec<f64> = ks
        .iter()
        .map(|&k| {
            let s = Schedule::linear(k).unwrap();
            (exact_log_p_ann(&path, &s, &v).unwrap() - log_p_tgt).abs()
        })
        .collect();
    for w in errs.windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "error increased along K: {errs:?}");
    }
    assert!(errs.last().unwrap() < &1e-3, "final error too large: {errs:?}");
}

#[test]
fn log_mean_exp_matches_high_precision_oracle() {
    // 10,000 values from a 64-bit LCG, spread over [-100, 100); the expected
    // value was computed once with 60-digit decimal arithmetic
    let mut s: u64 = 0x1234_5678_DEAD_BEEF;
    let mut vals = Vec::with_capacity(10_000);
    for _ in 0..10_000 {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let u = (s >> 11) as f64 / (1u64 << 53) as f64;
        vals.push(u * 200.0 - 100.0);
    }
    assert_eq!(vals[0], 53.69015971132686);
    assert_eq!(vals[1], 67.57846596617986);
    assert_eq!(vals[2], -76.04194437315459);
    let expected = 94.71894284923067152122674_f64;
    let got = log_mean_exp(&vals).unwrap();
    assert!(
        ((got - expected) / expected).abs() <= 1e-12,
        "log_mean_exp {got} vs oracle {expected}"
    );
}
