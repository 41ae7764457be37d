//! Matrix-product-operator intertwiners for the open symmetric simple
//! exclusion process.
//!
//! The crate builds the stochastic generators of the boundary-driven process
//! and of its equilibrium dual, constructs the MPO intertwiners `G`, `G′`
//! and their composition `G̃` from a bidiagonal representation of the bulk
//! algebra, and checks every identity they are supposed to satisfy by
//! explicit dense contraction at small system sizes. All algebraic checks
//! run either in `f64` or in exact rational arithmetic.

pub mod cli;
pub mod error;
pub mod model;
pub mod mpo;
pub mod observables;
pub mod report;
pub mod scalar;
pub mod steady;
pub mod suite;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
pub use model::{BoundaryKind, BoundaryRates, ProcessSpec, Side, YVariant};
pub use mpo::{AuxWindow, Direction, MpoIntertwiner, RepMatrices, SiteTensor};
pub use scalar::{Rational, Scalar};
pub use tensor::{DenseOperator, DenseVector, Matrix, Vector};
