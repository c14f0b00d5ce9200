//! Dictionary learning and sparse coding of embedding tables.
//!
//! Three objectives are supported, all sharing the per-signal lasso step
//! `½‖x − Dα‖² + λ‖α‖₁`:
//!
//! * [`Variant::Sc1`]: dictionary columns constrained to the unit ℓ2 ball.
//! * [`Variant::Sc3`]: unconstrained dictionary with a `τ‖D‖²_F` penalty.
//! * [`Variant::Sc4`]: as `Sc3`, with non-negative codes.

mod codes;
mod dictionary;
mod lasso;
mod learn;
mod stats;

pub use codes::{SparseCodes, SparseVector, ZERO_THRESHOLD};
pub use dictionary::{Dictionary, Variant};
pub use lasso::{kkt_violation, lasso_objective, solve_lasso, Encoder, LassoSettings};
pub use learn::{
    encode, learn_dictionary, objective, EpochStats, LearnedDictionary, SparseCodingConfig,
};
pub use stats::{basis_statistics, pearson, sparsity_level, BasisReport};
