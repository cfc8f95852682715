//! Bipartite matrices invariant under local diagonal unitary/orthogonal
//! conjugation, the covariant linear maps that correspond to them under the
//! Choi-Jamiolkowski isomorphism, and the separability machinery built on
//! pairwise/triplewise completely positive factorizations.
//!
//! The crate is organized around a single parameterization: a triple
//! `(A, B, C)` of d x d complex matrices with equal diagonals describes
//! * an invariant d^2 x d^2 matrix (`ldoi::build`),
//! * a covariant linear map on d x d matrices (`docmaps::CovariantMap`),
//! and all positivity, PPT, realignment, and separability questions reduce to
//! closed-form conditions on the triple.
//!
//! Modules:
//! * [`matcore`] - dense complex matrices, predicates, norms.
//! * [`ldoi`] - invariant matrices: constructors, projections, block
//!   structure, spectra, symmetries.
//! * [`cones`] - PSD/PPT/realignment tests and TCP/PCP separability
//!   certificates and witnesses.
//! * [`docmaps`] - covariant maps: application, Choi correspondence,
//!   composition, Kraus extraction.
//! * [`gallery`] - named generators for the example families used as the
//!   test corpus.
//! * [`detect`] - the end-to-end entanglement detection pipeline.

pub mod cones;
pub mod detect;
pub mod docmaps;
pub mod gallery;
pub mod ldoi;
mod linalg;
pub mod matcore;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("classification failed: {0}")]
    Classification(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use matcore::{ComplexMatrix, Tolerance};
