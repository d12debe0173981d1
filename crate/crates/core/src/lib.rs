//! Two-server confidential boosting.
//!
//! A Cloud holds the training data (Paillier-encrypted or additively shared)
//! and a pool of random linear classifiers. A crypto service provider (CSP)
//! holds the AdaBoost record weights. Each round the parties run a masked
//! inner product followed by a garbled comparison so that only the CSP learns
//! which records the candidate classifier gets right, and only the Cloud
//! learns the classifier itself.
//!
//! Modules, bottom up:
//! - [`encoding`]: fixed-point ring encoding, standardization, label folding
//! - [`ahe`]: Paillier additively homomorphic encryption
//! - [`shares`]: additive secret sharing and masked mat-vec steps
//! - [`gc`]: boolean circuits, garbling, oblivious transfer
//! - [`boost`]: plaintext AdaBoost core and base learners
//! - [`protocol`]: the two-party learning protocol and transports
//! - [`harness`]: datasets, experiments and leakage analysis

pub mod ahe;
pub mod boost;
pub mod dataset;
pub mod encoding;
pub mod gc;
pub mod harness;
pub mod matrix;
pub mod protocol;
pub mod shares;

pub use dataset::Dataset;
pub use matrix::Matrix;
