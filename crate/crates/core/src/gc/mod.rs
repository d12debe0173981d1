//! Boolean circuits, garbling and oblivious transfer.

pub mod circuit;
pub mod garble;
pub mod ot;

pub use circuit::{build_sub_msb, build_sub_msb_xor, Circuit, CircuitBuilder, Gate, Party, WireId};
pub use garble::{decode_output, evaluate, garble, GarbleMode, GarbledCircuit, GarblerSecrets, Label};
pub use ot::{OtMode, OtReceiver, OtSender};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GcError {
    #[error("circuit width {0} outside 2..=128")]
    WidthOutOfRange(usize),
    #[error("expected {expected} inputs, got {found}")]
    InputCountMismatch { expected: usize, found: usize },
    #[error("garbled output {output} failed its check tag")]
    GarbledRowAuthFailure { output: usize },
    #[error("output label {output} matches neither encoding")]
    UnknownLabel { output: usize },
    #[error("OT message {index} is not a valid group element")]
    GroupElementInvalid { index: usize },
    #[error("trusted-dealer OT is not allowed in the secure profile")]
    ModeNotPermittedInSecureProfile,
    #[error("malformed garbling data: {0}")]
    Malformed(&'static str),
}
