//! Block-Gibbs transition operators along the annealing path.
//!
//! One "transition" is exactly one full block sweep. The forward block order
//! is: hidden given visible, then visible given hidden (for the DBM, the
//! jointly independent (v, h2) block given h1, then h1 given the rest). A
//! reverse sweep applies the same blocks in reversed order; because each
//! block update is reversible with respect to the intermediate distribution
//! p_beta, the reversed composition is exactly the reverse operator
//! `T~(x'|x) = T(x|x') p(x') / p(x)` of the forward sweep.
//!
//! Clamped sweeps update hidden blocks only and never touch the visible
//! layer, preserving p_beta(v, h) at fixed v.
//!
//! Every block update draws one uniform variate per unit, in a fixed unit
//! order, so seeded runs are bit-reproducible no matter how chains are
//! scheduled.

use ndarray::Array2;
use rand::Rng;

use crate::error::{Error, Result};
use crate::math::sigmoid;
use crate::model::BinaryVector;
use crate::path::{AnnealTarget, GeometricPath};

/// Dense transition matrices are only for verification on tiny models.
pub const TRANSITION_MATRIX_UNIT_CAP: usize = 14;

/// A full assignment to all model layers, visible layer first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JointState {
    layers: Vec<BinaryVector>,
}

impl JointState {
    pub fn new(layers: Vec<BinaryVector>) -> Self {
        assert!(!layers.is_empty(), "joint state needs at least one layer");
        Self { layers }
    }

    pub fn visible(&self) -> &BinaryVector {
        &self.layers[0]
    }

    pub fn layer(&self, i: usize) -> &BinaryVector {
        &self.layers[i]
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(BinaryVector::len).collect()
    }

    pub fn total_units(&self) -> usize {
        self.layers.iter().map(BinaryVector::len).sum()
    }

    #[inline]
    pub(crate) fn set_unit(&mut self, layer: usize, unit: usize, bit: u8) {
        self.layers[layer].set(unit, bit);
    }

    /// Decode a global state index: unit `u` of layer `l` occupies bit
    /// `offset(l) + u`, layers concatenated visible-first, LSB first.
    pub fn from_index(sizes: &[usize], index: usize) -> Self {
        let mut layers = Vec::with_capacity(sizes.len());
        let mut shift = 0;
        for &size in sizes {
            let mut layer = BinaryVector::zeros(size);
            for u in 0..size {
                layer.set(u, ((index >> (shift + u)) & 1) as u8);
            }
            shift += size;
            layers.push(layer);
        }
        Self::new(layers)
    }

    /// Inverse of [`from_index`](Self::from_index).
    pub fn index(&self) -> usize {
        let mut idx = 0usize;
        let mut shift = 0;
        for layer in &self.layers {
            idx |= layer.index() << shift;
            shift += layer.len();
        }
        idx
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransitionKind {
    Forward,
    Reverse,
    ClampedForward,
    ClampedReverse,
}

impl TransitionKind {
    pub fn is_clamped(self) -> bool {
        matches!(self, TransitionKind::ClampedForward | TransitionKind::ClampedReverse)
    }
}

/// Precomputed block-update order for one sweep: each block lists its
/// (layer, unit) pairs in draw order. A reverse plan is the forward plan
/// with the block order reversed.
#[derive(Clone, Debug)]
pub struct SweepPlan {
    kind: TransitionKind,
    blocks: Vec<Vec<(usize, usize)>>,
}

impl SweepPlan {
    pub fn new(path: &GeometricPath, kind: TransitionKind) -> Self {
        let sizes = path.layer_sizes();
        let layer_block = |l: usize| -> Vec<(usize, usize)> {
            (0..sizes[l]).map(|u| (l, u)).collect()
        };
        let mut blocks = match path.target() {
            AnnealTarget::Rbm(_) => {
                if kind.is_clamped() {
                    vec![layer_block(1)]
                } else {
                    vec![layer_block(1), layer_block(0)]
                }
            }
            AnnealTarget::Dbm(_) => {
                if kind.is_clamped() {
                    vec![layer_block(2), layer_block(1)]
                } else {
                    // (v, h2) are conditionally independent given h1: one joint block
                    let mut joint = layer_block(0);
                    joint.extend(layer_block(2));
                    vec![joint, layer_block(1)]
                }
            }
        };
        if matches!(kind, TransitionKind::Reverse | TransitionKind::ClampedReverse) {
            blocks.reverse();
        }
        Self { kind, blocks }
    }

    pub fn kind(&self) -> TransitionKind {
        self.kind
    }

    pub fn blocks(&self) -> &[Vec<(usize, usize)>] {
        &self.blocks
    }

    /// Block updates performed by one sweep (cost-accounting unit).
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }
}

/// Conditional input to one unit given every other unit of the state, under
/// the beta-averaged parameters. Within any sweep block this never reads a
/// block-mate, so blocks may be sampled unit by unit in place.
#[inline]
pub(crate) fn unit_field(
    path: &GeometricPath,
    beta: f64,
    state: &JointState,
    layer: usize,
    unit: usize,
) -> f64 {
    let dbr = path.initial().dbr_bias();
    match (path.target(), layer) {
        (AnnealTarget::Rbm(m), 0) => {
            let a0 = dbr.map_or(0.0, |b| b[unit]);
            (1.0 - beta) * a0 + beta * m.visible_field(state.layer(1), unit)
        }
        (AnnealTarget::Rbm(m), 1) => beta * m.hidden_field(state.visible(), unit),
        (AnnealTarget::Dbm(m), 0) => {
            let a0 = dbr.map_or(0.0, |b| b[unit]);
            (1.0 - beta) * a0 + beta * m.visible_field(state.layer(1), unit)
        }
        (AnnealTarget::Dbm(m), 1) => beta * m.hidden1_field(state.visible(), state.layer(2), unit),
        (AnnealTarget::Dbm(m), 2) => beta * m.hidden2_field(state.layer(1), unit),
        _ => unreachable!("layer index out of range for target"),
    }
}

#[inline]
pub(crate) fn unit_mean(
    path: &GeometricPath,
    beta: f64,
    state: &JointState,
    layer: usize,
    unit: usize,
) -> f64 {
    sigmoid(unit_field(path, beta, state, layer, unit))
}

/// Run one sweep in place. Draws exactly one uniform per unit per block.
pub fn sweep<R: Rng>(
    path: &GeometricPath,
    beta: f64,
    plan: &SweepPlan,
    state: &mut JointState,
    rng: &mut R,
) {
    debug_assert_eq!(state.layer_sizes(), path.layer_sizes());
    for block in &plan.blocks {
        for &(layer, unit) in block {
            let mean = unit_mean(path, beta, state, layer, unit);
            state.set_unit(layer, unit, u8::from(rng.random::<f64>() < mean));
        }
    }
}

/// One forward block-Gibbs sweep at inverse temperature `beta`.
pub fn gibbs_forward<R: Rng>(path: &GeometricPath, beta: f64, state: &mut JointState, rng: &mut R) {
    let plan = SweepPlan::new(path, TransitionKind::Forward);
    sweep(path, beta, &plan, state, rng);
}

/// One reverse sweep (forward blocks in reversed order).
pub fn gibbs_reverse<R: Rng>(path: &GeometricPath, beta: f64, state: &mut JointState, rng: &mut R) {
    let plan = SweepPlan::new(path, TransitionKind::Reverse);
    sweep(path, beta, &plan, state, rng);
}

fn check_clamped(state: &JointState, clamped_v: &BinaryVector) -> Result<()> {
    if state.visible() != clamped_v {
        return Err(Error::InvalidArgument(
            "clamped sweep: state visible layer differs from clamped vector".into(),
        ));
    }
    Ok(())
}

/// Hidden-only forward sweep; the visible layer is left bit-identical.
pub fn clamped_forward<R: Rng>(
    path: &GeometricPath,
    beta: f64,
    state: &mut JointState,
    clamped_v: &BinaryVector,
    rng: &mut R,
) -> Result<()> {
    check_clamped(state, clamped_v)?;
    let plan = SweepPlan::new(path, TransitionKind::ClampedForward);
    sweep(path, beta, &plan, state, rng);
    Ok(())
}

/// Hidden-only reverse sweep; the visible layer is left bit-identical.
pub fn clamped_reverse<R: Rng>(
    path: &GeometricPath,
    beta: f64,
    state: &mut JointState,
    clamped_v: &BinaryVector,
    rng: &mut R,
) -> Result<()> {
    check_clamped(state, clamped_v)?;
    let plan = SweepPlan::new(path, TransitionKind::ClampedReverse);
    sweep(path, beta, &plan, state, rng);
    Ok(())
}

fn positions(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(sizes.len());
    let mut shift = 0;
    for &s in sizes {
        out.push((shift..shift + s).collect());
        shift += s;
    }
    out
}

/// Exact row-stochastic matrix of one sweep, by enumerating every block
/// conditional. Full sweeps index all units (visible first, LSB first);
/// clamped sweeps require `clamped_v` and index the hidden units only.
pub fn transition_matrix(
    path: &GeometricPath,
    beta: f64,
    kind: TransitionKind,
    clamped_v: Option<&BinaryVector>,
) -> Result<Array2<f64>> {
    let sizes = path.layer_sizes();
    let clamped = kind.is_clamped();
    let v = match (clamped, clamped_v) {
        (true, Some(v)) => {
            if v.len() != sizes[0] {
                return Err(Error::DimensionMismatch("clamped_v has wrong length".into()));
            }
            Some(v)
        }
        (true, None) => {
            return Err(Error::InvalidArgument("clamped transition matrix needs clamped_v".into()))
        }
        (false, None) => None,
        (false, Some(_)) => {
            return Err(Error::InvalidArgument("clamped_v given for an unclamped kind".into()))
        }
    };
    let total: usize = if clamped { sizes.iter().skip(1).sum() } else { sizes.iter().sum() };
    if total > TRANSITION_MATRIX_UNIT_CAP {
        return Err(Error::CapExceeded(format!(
            "transition_matrix: {total} indexed units exceed cap {TRANSITION_MATRIX_UNIT_CAP}"
        )));
    }
    let plan = SweepPlan::new(path, kind);
    let dim = 1usize << total;

    // position of (layer, unit) within the matrix index space
    let pos = positions(&sizes);
    let unit_pos = |layer: usize, unit: usize| -> usize {
        if clamped {
            pos[layer][unit] - sizes[0]
        } else {
            pos[layer][unit]
        }
    };
    let decode = |idx: usize| -> JointState {
        if clamped {
            let hidden_sizes = &sizes[1..];
            let mut layers = vec![v.unwrap().clone()];
            let mut shift = 0;
            for &s in hidden_sizes {
                let mut layer = BinaryVector::zeros(s);
                for u in 0..s {
                    layer.set(u, ((idx >> (shift + u)) & 1) as u8);
                }
                shift += s;
                layers.push(layer);
            }
            JointState::new(layers)
        } else {
            JointState::from_index(&sizes, idx)
        }
    };

    let mut product: Option<Array2<f64>> = None;
    for block in plan.blocks() {
        let mut m = Array2::<f64>::zeros((dim, dim));
        let block_bits: usize = block.iter().map(|&(l, u)| 1usize << unit_pos(l, u)).sum();
        for row in 0..dim {
            let state = decode(row);
            let means: Vec<f64> =
                block.iter().map(|&(l, u)| unit_mean(path, beta, &state, l, u)).collect();
            let base = row & !block_bits;
            for pattern in 0..(1usize << block.len()) {
                let mut col = base;
                let mut prob = 1.0;
                for (bi, &(l, u)) in block.iter().enumerate() {
                    let bit = (pattern >> bi) & 1;
                    if bit == 1 {
                        col |= 1usize << unit_pos(l, u);
                        prob *= means[bi];
                    } else {
                        prob *= 1.0 - means[bi];
                    }
                }
                m[(row, col)] = prob;
            }
        }
        product = Some(match product {
            None => m,
            Some(p) => p.dot(&m),
        });
    }
    Ok(product.expect("sweep has at least one block"))
}
