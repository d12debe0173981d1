//! Dataset ingestion, synthetic data, experiments and their reports.

pub mod config;
pub mod data;
pub mod experiments;
pub mod leakage;
pub mod schema;
pub mod synth;

pub use data::{builtin, load_csv, LabelColumn, LabelMapping};
pub use experiments::{run_experiment, BaseKind, DatasetRef, ExperimentKind, ExperimentReport, ExperimentSpec};
pub use leakage::{leakage_analysis, LeakageReport};
pub use synth::gen_synthetic;

use crate::boost::BoostError;
use crate::encoding::EncodingError;
use crate::protocol::ProtocolError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("{0}")]
    Io(String),
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },
    #[error("label column has more than two values: {found:?}")]
    NonBinaryLabels { found: Vec<String> },
    #[error("configuration: {0}")]
    Config(String),
    #[error("report does not match its schema: {0}")]
    Schema(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Boost(#[from] BoostError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
}

/// Process exit codes used by the CLI.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const PROTOCOL: i32 = 3;
    pub const CHECK_FAILED: i32 = 4;
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Io(_)
            | HarnessError::Parse { .. }
            | HarnessError::NonBinaryLabels { .. }
            | HarnessError::Config(_) => exit::CONFIG,
            HarnessError::Protocol(ProtocolError::ConfigInvalid(_))
            | HarnessError::Protocol(ProtocolError::BinCountInvalid(_)) => exit::CONFIG,
            HarnessError::Boost(BoostError::InvalidParameter(_))
            | HarnessError::Boost(BoostError::FoldTooSmall { .. }) => exit::CONFIG,
            HarnessError::Schema(_) => exit::CHECK_FAILED,
            _ => exit::PROTOCOL,
        }
    }
}
