//! The two-party learning protocol: Cloud and CSP state machines, both
//! constructions, framing, cost accounting and confidential stump selection.

pub mod config;
pub mod ds_select;
mod engine;
mod gcproto;
pub mod model;
pub mod party;
pub mod transcript;
pub mod transport;
mod wire;

pub use config::{Construction, ProtocolConfig, Seeds};
pub use ds_select::{confidential_ds_select, ds_candidates, DsOutcome, DsSelectConfig, StumpDistributedModel};
pub use engine::{run_learning, run_learning_with, LearningOutcome};
pub use model::{reconstruct_model, DistributedModel};
pub use party::{setup, CloudState, CspState};
pub use transcript::{transcript_report, Direction, PartyCounters, Transcript, TranscriptReport};
pub use transport::{Message, Phase, Transport, TransportKind};

use crate::ahe::AheError;
use crate::boost::BoostError;
use crate::encoding::EncodingError;
use crate::gc::GcError;
use crate::shares::ShareError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("peer closed the transport")]
    TransportClosed,
    #[error("transport i/o: {0}")]
    Io(String),
    #[error("expected a {expected:?} message, got {found:?}")]
    UnexpectedPhase { expected: Phase, found: Phase },
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error("iteration {t} exceeds p_max = {p_max}")]
    IterationOutOfRange { t: usize, p_max: usize },
    #[error("model parts disagree: {cloud} base classifiers vs {csp} weights")]
    PartMismatch { cloud: usize, csp: usize },
    #[error("need at least 2 bins, got {0}")]
    BinCountInvalid(usize),
    #[error("transcript phases out of order: {0}")]
    PhaseOrder(String),
    #[error(transparent)]
    Ahe(#[from] AheError),
    #[error(transparent)]
    Gc(#[from] GcError),
    #[error(transparent)]
    Share(#[from] ShareError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Boost(#[from] BoostError),
}
