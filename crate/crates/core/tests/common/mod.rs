//! Brute-force enumeration oracles, independent of the analytic paths they
//! are used to check: every log f here is a plain sum over full joint
//! assignments, with no layer summed out in closed form.

use anneal::math::log_sum_exp;
use anneal::model::{BinaryRbm, BinaryVector, TwoLayerDbm, TwoLayerDbn};
use anneal::path::GeometricPath;
use anneal::transitions::JointState;
use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal<R: Rng>(r: &mut R) -> f64 {
    let u1: f64 = r.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = r.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_rbm(nv: usize, nh: usize, weight_sigma: f64, bias_sigma: f64, seed: u64) -> BinaryRbm {
    let mut r = rng(seed);
    let weights = Array2::from_shape_fn((nv, nh), |_| weight_sigma * normal(&mut r));
    let vb = Array1::from_shape_fn(nv, |_| bias_sigma * normal(&mut r));
    let hb = Array1::from_shape_fn(nh, |_| bias_sigma * normal(&mut r));
    BinaryRbm::new(vb, hb, weights).unwrap()
}

pub fn random_dbm(
    nv: usize,
    nh1: usize,
    nh2: usize,
    weight_sigma: f64,
    bias_sigma: f64,
    seed: u64,
) -> TwoLayerDbm {
    let mut r = rng(seed);
    let w1 = Array2::from_shape_fn((nv, nh1), |_| weight_sigma * normal(&mut r));
    let w2 = Array2::from_shape_fn((nh1, nh2), |_| weight_sigma * normal(&mut r));
    let a = Array1::from_shape_fn(nv, |_| bias_sigma * normal(&mut r));
    let b1 = Array1::from_shape_fn(nh1, |_| bias_sigma * normal(&mut r));
    let b2 = Array1::from_shape_fn(nh2, |_| bias_sigma * normal(&mut r));
    TwoLayerDbm::new(a, b1, b2, w1, w2).unwrap()
}

pub fn random_dbn(
    nv: usize,
    nh1: usize,
    nh2: usize,
    weight_sigma: f64,
    bias_sigma: f64,
    seed: u64,
) -> TwoLayerDbn {
    let mut r = rng(seed);
    let top = {
        let w = Array2::from_shape_fn((nh1, nh2), |_| weight_sigma * normal(&mut r));
        let vb = Array1::from_shape_fn(nh1, |_| bias_sigma * normal(&mut r));
        let hb = Array1::from_shape_fn(nh2, |_| bias_sigma * normal(&mut r));
        BinaryRbm::new(vb, hb, w).unwrap()
    };
    let dw = Array2::from_shape_fn((nv, nh1), |_| weight_sigma * normal(&mut r));
    let dvb = Array1::from_shape_fn(nv, |_| bias_sigma * normal(&mut r));
    TwoLayerDbn::new(top, dw, dvb, None).unwrap()
}

pub fn random_visible<R: Rng>(n: usize, r: &mut R) -> BinaryVector {
    let bits = (0..n).map(|_| u8::from(r.random::<f64>() < 0.5)).collect();
    BinaryVector::new(bits).unwrap()
}

/// log f(v) of an RBM by summing the joint over all hidden assignments.
pub fn brute_rbm_log_f(rbm: &BinaryRbm, v: &BinaryVector) -> f64 {
    let nh = rbm.num_hidden();
    let terms: Vec<f64> = (0..(1usize << nh))
        .map(|hi| rbm.log_unnormalized_joint(v, &BinaryVector::from_index(hi, nh)))
        .collect();
    log_sum_exp(&terms)
}

/// log Z of an RBM over all 2^(nv+nh) joint assignments.
pub fn brute_rbm_log_z(rbm: &BinaryRbm) -> f64 {
    let (nv, nh) = (rbm.num_visible(), rbm.num_hidden());
    let mut terms = Vec::with_capacity(1 << (nv + nh));
    for vi in 0..(1usize << nv) {
        let v = BinaryVector::from_index(vi, nv);
        for hi in 0..(1usize << nh) {
            terms.push(rbm.log_unnormalized_joint(&v, &BinaryVector::from_index(hi, nh)));
        }
    }
    log_sum_exp(&terms)
}

/// log f(v) of a DBM over all (h1, h2) assignments.
pub fn brute_dbm_log_f(dbm: &TwoLayerDbm, v: &BinaryVector) -> f64 {
    let (nh1, nh2) = (dbm.num_hidden_1(), dbm.num_hidden_2());
    let mut terms = Vec::with_capacity(1 << (nh1 + nh2));
    for i1 in 0..(1usize << nh1) {
        let h1 = BinaryVector::from_index(i1, nh1);
        for i2 in 0..(1usize << nh2) {
            terms.push(dbm.log_unnormalized_joint(v, &h1, &BinaryVector::from_index(i2, nh2)));
        }
    }
    log_sum_exp(&terms)
}

/// log Z of a DBM over every joint assignment.
pub fn brute_dbm_log_z(dbm: &TwoLayerDbm) -> f64 {
    let nv = dbm.num_visible();
    let terms: Vec<f64> = (0..(1usize << nv))
        .map(|vi| brute_dbm_log_f(dbm, &BinaryVector::from_index(vi, nv)))
        .collect();
    log_sum_exp(&terms)
}

/// log f(v) of a DBN: sum over h1 of p(v | h1) f_top(h1), with f_top itself
/// brute-forced over h2.
pub fn brute_dbn_log_f(dbn: &TwoLayerDbn, v: &BinaryVector) -> f64 {
    let nh1 = dbn.num_hidden_1();
    let terms: Vec<f64> = (0..(1usize << nh1))
        .map(|i1| {
            let h1 = BinaryVector::from_index(i1, nh1);
            dbn.log_p_visible_given_h1(v, &h1) + brute_rbm_log_f(dbn.top_rbm(), &h1)
        })
        .collect();
    log_sum_exp(&terms)
}

/// Exact normalized intermediate distribution p_beta over all joint states,
/// indexed like `JointState::index`.
pub fn enumerate_p_beta(path: &GeometricPath, beta: f64) -> Vec<f64> {
    let sizes = path.layer_sizes();
    let total: usize = sizes.iter().sum();
    let log_fs: Vec<f64> = (0..(1usize << total))
        .map(|idx| {
            let s = JointState::from_index(&sizes, idx);
            path.intermediate_log_f(beta, &s).unwrap()
        })
        .collect();
    let log_z = log_sum_exp(&log_fs);
    log_fs.into_iter().map(|lf| (lf - log_z).exp()).collect()
}
