//! Local strong factorization of nonsingular cones along a valuation vector,
//! with exact arithmetic throughout, and its translation into monoidal
//! transforms of regular local rings related by a monomial map.

pub mod cli;
pub mod error;
pub mod factorization;
pub mod formal_real;
pub mod json;
pub mod lattice;
pub mod monomial;

pub use error::{Error, Result};
pub use formal_real::{FormalReal, RealBasis, Sign};
pub use lattice::{LatticeVector, Side, StepRecord, TraceStep, UnimodularCone, ValuationVector};
