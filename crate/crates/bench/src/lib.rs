//! Shared fixtures for the criterion benchmarks.

use anneal::{AnnealTarget, BinaryRbm, GeometricPath};
use ndarray::{Array1, Array2};

/// Deterministic small RBM with pseudo-random weights; heavy enough to make
/// sweep timings meaningful, small enough to run anywhere.
pub fn bench_rbm(nv: usize, nh: usize) -> BinaryRbm {
    let mut state = 0x9E3779B97F4A7C15u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let weights = Array2::from_shape_fn((nv, nh), |_| 0.2 * next());
    let vb = Array1::from_shape_fn(nv, |_| 0.1 * next());
    let hb = Array1::from_shape_fn(nh, |_| 0.1 * next());
    BinaryRbm::new(vb, hb, weights).expect("valid bench rbm")
}

pub fn bench_path(nv: usize, nh: usize) -> GeometricPath {
    GeometricPath::uniform(AnnealTarget::Rbm(bench_rbm(nv, nh)))
}
