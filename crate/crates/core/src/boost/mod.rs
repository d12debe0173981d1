//! Plaintext AdaBoost with random linear classifiers (RLC), decision stumps
//! and linear means classifiers. The RLC trainer doubles as the oracle the
//! two-party protocol is checked against.

pub mod adaboost;
pub mod cv;
pub mod lmc;
pub mod model;
pub mod rlc;
pub mod stump;

pub use adaboost::{
    alpha, clamped_alpha, update_weights, weighted_error, BoostState, Decision, InvalidPolicy,
    Round, EPS_FLOOR, HALF_TOL,
};
pub use cv::{accuracy, characterization, cv_accuracy, cv_folds, stratified_folds, CvResult, FoldEval};
pub use lmc::boost_lmc;
pub use model::{BaseClassifier, BoostedModel, ModelKind};
pub use rlc::{apply_and_indicate, boost_rlc, gen_rlc, Rlc, RlcOptions, RlcOutcome, RlcPool};
pub use stump::{boost_ds, Stump};

use crate::encoding::EncodingError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoostError {
    #[error("weighted error {error} is not below 0.5")]
    InvalidBaseClassifier { error: f64 },
    #[error("weighted error {error} is at or below the floor")]
    DegenerateError { error: f64 },
    #[error("expected length {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("only {accepted} valid classifiers after {tried} tries")]
    PoolExhausted { accepted: usize, tried: usize },
    #[error("{n} records cannot fill {folds} folds")]
    FoldTooSmall { n: usize, folds: usize },
    #[error("indicator {index} has length {found}, expected {expected}")]
    RaggedInput {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
}
