//! Sparse coding of dense word embeddings and linear-chain CRF sequence
//! labeling built on the resulting sign/index indicator features.
//!
//! The numerical core (embedding tables, dictionary learning, the CRF) is
//! generic over a floating-point [`Scalar`]; the aliases at the crate root
//! pin the common `f64` and `f32` instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod crf;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod features;
pub mod io;
pub mod scalar;
pub mod sparse;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type EmbeddingTableF64 = embeddings::EmbeddingTable<f64>;
pub type EmbeddingTableF32 = embeddings::EmbeddingTable<f32>;
pub type DictionaryF64 = sparse::Dictionary<f64>;
pub type DictionaryF32 = sparse::Dictionary<f32>;
pub type SparseCodesF64 = sparse::SparseCodes<f64>;
pub type SparseCodesF32 = sparse::SparseCodes<f32>;
pub type SparseVectorF64 = sparse::SparseVector<f64>;
pub type FeatureVectorF64 = features::FeatureVector<f64>;
pub type CrfModelF64 = crf::CrfModel<f64>;
pub type CrfModelF32 = crf::CrfModel<f32>;
pub type LatticeF64 = crf::Lattice<f64>;
