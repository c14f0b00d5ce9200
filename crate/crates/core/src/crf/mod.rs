//! Linear-chain CRF: exact inference, Viterbi decoding, and elastic-net
//! training with OWL-QN.

mod lattice;
mod model;
pub mod owlqn;
mod train;

pub use lattice::{ForwardBackward, Lattice};
pub use model::{CrfModel, MODEL_VERSION};
pub use owlqn::StopReason;
pub use train::{neg_log_likelihood_and_gradient, train, Objective, TrainConfig, TrainReport};
