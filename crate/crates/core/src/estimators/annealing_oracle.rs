//! Exact evaluation of the annealing model on tiny instances.
//!
//! The annealing model is the distribution of the final visible state of the
//! forward process: start at p_0, apply the forward sweep kernels at
//! beta_1..beta_K in order, read off the visible marginal. Here the state
//! distribution is propagated exactly through every block conditional, which
//! is the same linear map as multiplying by the dense transition matrix but
//! without materializing it.

use crate::error::{Error, Result};
use crate::model::BinaryVector;
use crate::path::{GeometricPath, Schedule};
use crate::transitions::{unit_mean, JointState, SweepPlan, TransitionKind};

pub const ORACLE_UNIT_CAP: usize = 14;
pub const ORACLE_STEP_CAP: usize = 200;

fn unit_positions(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(sizes.len());
    let mut shift = 0;
    for &s in sizes {
        out.push((shift..shift + s).collect());
        shift += s;
    }
    out
}

/// Push a distribution vector through one block update.
fn apply_block(
    path: &GeometricPath,
    beta: f64,
    block: &[(usize, usize)],
    positions: &[Vec<usize>],
    sizes: &[usize],
    rho: &mut [f64],
    scratch: &mut [f64],
) {
    let dim = rho.len();
    let block_mask: usize = block.iter().map(|&(l, u)| 1usize << positions[l][u]).sum();
    // collapse the block coordinates of the current distribution
    scratch.fill(0.0);
    for s in 0..dim {
        scratch[s & !block_mask] += rho[s];
    }
    rho.fill(0.0);
    for r in 0..dim {
        if r & block_mask != 0 {
            continue;
        }
        let mass = scratch[r];
        if mass == 0.0 {
            continue;
        }
        // the block conditionals ignore block-mate bits, so the zeroed
        // pattern in `r` is a valid conditioning state
        let state = JointState::from_index(sizes, r);
        let means: Vec<f64> = block.iter().map(|&(l, u)| unit_mean(path, beta, &state, l, u)).collect();
        for pattern in 0..(1usize << block.len()) {
            let mut idx = r;
            let mut prob = mass;
            for (bi, &(l, u)) in block.iter().enumerate() {
                if (pattern >> bi) & 1 == 1 {
                    idx |= 1usize << positions[l][u];
                    prob *= means[bi];
                } else {
                    prob *= 1.0 - means[bi];
                }
            }
            rho[idx] += prob;
        }
    }
}

/// Exact log p_ann(v_test) for the given path and schedule.
pub fn exact_log_p_ann(
    path: &GeometricPath,
    schedule: &Schedule,
    v_test: &BinaryVector,
) -> Result<f64> {
    exact_log_p_ann_at_betas(path, &schedule.betas()[1..], v_test)
}

/// Same oracle over an explicit list of transition temperatures beta_1..beta_K.
/// An empty list means no transitions at all, in which case the annealing
/// model is just the initial distribution's visible marginal.
pub fn exact_log_p_ann_at_betas(
    path: &GeometricPath,
    transition_betas: &[f64],
    v_test: &BinaryVector,
) -> Result<f64> {
    let sizes = path.layer_sizes();
    let total: usize = sizes.iter().sum();
    if total > ORACLE_UNIT_CAP {
        return Err(Error::CapExceeded(format!(
            "annealing-model oracle: {total} units exceed cap {ORACLE_UNIT_CAP}"
        )));
    }
    if transition_betas.len() > ORACLE_STEP_CAP {
        return Err(Error::CapExceeded(format!(
            "annealing-model oracle: K = {} exceeds cap {ORACLE_STEP_CAP}",
            transition_betas.len()
        )));
    }
    if v_test.len() != sizes[0] {
        return Err(Error::DimensionMismatch("v_test size mismatch".into()));
    }

    let dim = 1usize << total;
    let log_z0 = path.initial_log_partition();
    let mut rho = vec![0.0f64; dim];
    for (idx, slot) in rho.iter_mut().enumerate() {
        let state = JointState::from_index(&sizes, idx);
        *slot = (path.log_f_initial(&state) - log_z0).exp();
    }

    let plan = SweepPlan::new(path, TransitionKind::Forward);
    let positions = unit_positions(&sizes);
    let mut scratch = vec![0.0f64; dim];
    for &beta in transition_betas {
        for block in plan.blocks() {
            apply_block(path, beta, block, &positions, &sizes, &mut rho, &mut scratch);
        }
    }

    let visible_mask = (1usize << sizes[0]) - 1;
    let target = v_test.index();
    let mut p = 0.0;
    for (idx, &mass) in rho.iter().enumerate() {
        if idx & visible_mask == target {
            p += mass;
        }
    }
    Ok(p.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BinaryRbm;
    use crate::path::AnnealTarget;
    use approx::assert_abs_diff_eq;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn zero_model_is_uniform_for_every_k() {
        let path = GeometricPath::uniform(AnnealTarget::Rbm(BinaryRbm::zeros(3, 2)));
        let v = BinaryVector::from_index(5, 3);
        for k in [1, 2, 7] {
            let s = Schedule::linear(k).unwrap();
            assert_abs_diff_eq!(
                exact_log_p_ann(&path, &s, &v).unwrap(),
                -3.0 * LN2,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn caps_are_enforced() {
        let path = GeometricPath::uniform(AnnealTarget::Rbm(BinaryRbm::zeros(10, 8)));
        let s = Schedule::linear(3).unwrap();
        let v = BinaryVector::zeros(10);
        assert!(exact_log_p_ann(&path, &s, &v).is_err());

        let small = GeometricPath::uniform(AnnealTarget::Rbm(BinaryRbm::zeros(3, 2)));
        let long = Schedule::linear(201).unwrap();
        let v3 = BinaryVector::zeros(3);
        assert!(exact_log_p_ann(&small, &long, &v3).is_err());
    }

    #[test]
    fn no_transitions_gives_initial_marginal() {
        let path = GeometricPath::uniform(AnnealTarget::Rbm(BinaryRbm::zeros(4, 2)));
        let v = BinaryVector::from_index(9, 4);
        let got = exact_log_p_ann_at_betas(&path, &[], &v).unwrap();
        assert_abs_diff_eq!(got, path.initial_log_p_visible(&v).unwrap(), epsilon = 1e-14);
    }
}
