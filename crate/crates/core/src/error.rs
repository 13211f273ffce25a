use num_bigint::BigInt;
use thiserror::Error;

use crate::lattice::Side;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("values are expressed over different real bases")]
    MixedBasis,
    #[error("invalid real basis: {0}")]
    InvalidBasis(String),
    #[error("sign undecided at {digits} digits; the embeddings are inconsistent with rational independence or too short")]
    PrecisionExhausted { digits: usize },
    #[error("floor ratio hit an exact boundary (inputs are rationally dependent)")]
    BoundaryHit,
    #[error("cone is not nonsingular: determinant {det}")]
    SingularCone { det: BigInt },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("valuation has an exactly zero coordinate {index} in a cone that requires strict interiority")]
    DegenerateValuation { index: usize },
    #[error("valuation is not contained in the {side} cone")]
    NotContained { side: Side },
    #[error("star subdivision at generators {i} and {j} has no unique cone containing the valuation")]
    AmbiguousChoice { i: usize, j: usize },
    #[error("invalid generator pair ({i}, {j}) for a cone of dimension {dim}")]
    InvalidPair { i: usize, j: usize, dim: usize },
    #[error("iteration guard of {guard} steps exceeded in {stage}")]
    IterationGuardExceeded { guard: u64, stage: &'static str },
    #[error("alignment relation broken: {0}")]
    RelationBroken(String),
    #[error("interiors of the two cones do not intersect")]
    DisjointInteriors,
    #[error("exponent matrix does not reduce to the identity: {0}")]
    NotIdentity(String),
    #[error("invalid monomial map: {0}")]
    InvalidMonomialMap(String),
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Error {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self.root() {
            Error::MixedBasis => "MixedBasis",
            Error::InvalidBasis(_) => "InvalidBasis",
            Error::PrecisionExhausted { .. } => "PrecisionExhausted",
            Error::BoundaryHit => "BoundaryHit",
            Error::SingularCone { .. } => "SingularCone",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::DegenerateValuation { .. } => "DegenerateValuation",
            Error::NotContained { .. } => "NotContained",
            Error::AmbiguousChoice { .. } => "AmbiguousChoice",
            Error::InvalidPair { .. } => "InvalidPair",
            Error::IterationGuardExceeded { .. } => "IterationGuardExceeded",
            Error::RelationBroken(_) => "RelationBroken",
            Error::DisjointInteriors => "DisjointInteriors",
            Error::NotIdentity(_) => "NotIdentity",
            Error::InvalidMonomialMap(_) => "InvalidMonomialMap",
            Error::Context { .. } => unreachable!(),
        }
    }
}

pub(crate) trait ResultExt<T> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| e.context(context()))
    }
}
