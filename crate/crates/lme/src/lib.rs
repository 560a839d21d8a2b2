//! Locally maximally entangled (LME) states of multipart quantum systems.
//!
//! A pure state of a system with subsystem dimensions `(d_1, ..., d_n)` is
//! locally maximally entangled when every single-subsystem reduced density
//! matrix is a scalar multiple of the identity. This crate decides for which
//! dimension vectors such states exist, computes the complex dimension of the
//! space of LME states modulo local unitaries, builds explicit LME states by
//! several independent constructions, verifies states through their reduced
//! density matrices, drives arbitrary states to LME normal forms by gradient
//! flow on the moment-map square, and measures generic SLOCC stabilizer
//! dimensions by randomized exact rank.
//!
//! Module map:
//! - [`dimvec`]: dimension vectors and their arithmetic invariants (N, R, Δ,
//!   g_max),
//! - [`classify`]: existence and dimension via the four-case recursion and the
//!   closed-form trichotomy,
//! - [`sporadic`]: the three-part sporadic families generated by second-order
//!   linear recurrences, and grid-scan data,
//! - [`tensor`]: dense state tensors, partial traces, uniformity checks, and
//!   the moment-map square,
//! - [`statefile`]: the line-oriented text format for states,
//! - [`construct`]: explicit LME constructors (Bell, GHZ, unit-vector,
//!   ladder, Sudoku, 3j, Pauli stabilizer),
//! - [`flow`]: gradient flow of the moment-map square to normal forms,
//! - [`stabilizer`]: randomized-rank measurement of generic stabilizer
//!   dimensions,
//! - [`repgroup`]: finite-group representation machinery and invariant-vector
//!   constructions.

pub mod classify;
pub mod construct;
pub mod dimvec;
pub mod flow;
pub mod repgroup;
pub mod sporadic;
pub mod stabilizer;
pub mod statefile;
pub mod tensor;

use thiserror::Error;

/// Errors shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension vector must not be empty")]
    EmptyDims,
    #[error("dimension parts must be positive")]
    ZeroPart,
    #[error("integer overflow in exact arithmetic")]
    Overflow,
    #[error("operation needs at least {need} parts, got {got}")]
    TooFewParts { need: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("coefficient count {got} does not match dimension product {want}")]
    ShapeMismatch { got: usize, want: usize },
    #[error("subsystem set must be a nonempty proper subset of the factors")]
    BadSubsystemSet,
    #[error("state has zero norm")]
    ZeroState,
    #[error("inconsistent regrouping: {0}")]
    BadRegroup(String),
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("invalid half-integer arguments: {0}")]
    BadHalfInteger(String),
    #[error("stabilizer generators do not pairwise commute")]
    NonCommutingGenerators,
    #[error("stabilizer generators are not independent")]
    DependentGenerators,
    #[error("stabilizer fixed space is empty")]
    EmptyFixedSpace,
    #[error("representations are defined over different groups")]
    GroupMismatch,
    #[error("representation is not irreducible (character norm {0})")]
    NotIrreducible(f64),
    #[error("matrices do not define a representation up to scalars: {0}")]
    NotARepresentation(String),
    #[error("projective factors do not cancel: {0}")]
    CocycleObstruction(String),
    #[error("tensor product contains no invariant vector")]
    NoInvariant,
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by exceeding a configured resource cap, as
    /// opposed to domain errors in the inputs.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::ResourceCap(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
