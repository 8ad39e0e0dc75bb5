//! The three binary model families and their exact/approximate evaluation
//! primitives. All types are immutable after construction and safe to share
//! across threads; sampling always goes through a caller-provided generator.

mod binary_vector;
mod dbm;
mod dbn;
mod io;
mod rbm;

pub use binary_vector::BinaryVector;
pub(crate) use binary_vector::dot_bits;
pub(crate) use dbm::clamp_mean;
pub use dbm::{MeanFieldResult, TwoLayerDbm, MEAN_FIELD_MAX_ITERS, MEAN_FIELD_TOL, PROPOSAL_MEAN_CLAMP};
pub use dbn::TwoLayerDbn;
pub use io::Model;
pub use rbm::{BinaryRbm, DEFAULT_ENUMERATION_CAP};
