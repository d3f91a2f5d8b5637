//! Thermodynamic formalism on one-sided topological Markov shifts.
//!
//! The crate covers transition matrices and their shift spaces ([`sft`]),
//! locally constant functions ([`locfun`]), Ruelle transfer operators and
//! their Perron–Frobenius eigendata ([`ruelle`]), KMS measures for
//! generalized gauge actions ([`kms`]) and continuous orbit equivalence
//! cocycles with the entropy-limit sequences they produce ([`coe`]).
//! File formats live in [`format`].

pub mod coe;
pub mod error;
pub mod format;
pub mod kms;
pub mod locfun;
pub mod ruelle;
pub mod sft;
mod spectral;

pub use error::{Error, MatrixError, Result};
pub use locfun::{LocallyConstantFunction, ValueKind, Values};
pub use sft::{TransitionMatrix, Word};
pub use spectral::SpectralOptions;
