//! Partition-function and test log-likelihood estimation for binary Markov
//! random fields.
//!
//! The crate provides the three model families (RBM, two-layer DBM, two-layer
//! DBN), geometric-averages annealing paths, block-Gibbs transition operators
//! and their reverses, the forward annealed-importance-sampling estimator of
//! the partition function, reverse-annealing estimators of per-example
//! probabilities under the annealing model, control-variate averaging over
//! test sets, and exact dense-kernel / enumeration oracles for verifying all
//! of the above on tiny models.
//!
//! All probabilities, weights, and partition functions are carried in the
//! natural-log domain; linear-domain values appear only inside max-shifted
//! reductions. Estimator chains are independent work items on dedicated
//! random streams, so results never depend on scheduling.

pub mod control_variates;
pub mod error;
pub mod estimators;
pub mod math;
pub mod model;
pub mod path;
pub mod rng;
pub mod trainer;
pub mod transitions;

pub use error::{Error, Result};
pub use estimators::{
    effective_sample_size, exact_log_p_ann, log_mean_exp, run_ais, run_raise_dbn,
    run_raise_intractable, run_raise_tractable, tail_bound_check, ChainResult, EstimateSummary,
    RaiseResult,
};
pub use model::{BinaryRbm, BinaryVector, Model, TwoLayerDbm, TwoLayerDbn};
pub use path::{dbr_from_dataset, AnnealTarget, GeometricPath, InitialDistribution, Schedule};
pub use transitions::{JointState, SweepPlan, TransitionKind};
