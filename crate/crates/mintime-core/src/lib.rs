//! Computes the minimal null control time of 1D first-order linear
//! hyperbolic systems controlled from one side of the boundary.
//!
//! The pipeline removes the diagonal of the internal coupling, computes
//! origin jets of the backstepping kernel rows, iteratively row-reduces the
//! boundary coupling matrix trading derivatives of boundary data for new
//! rows, and reads the minimal time off the canonical form of the reduced
//! matrix. A discretized-controllability oracle brackets the transition
//! numerically as an independent check.

pub mod canonical;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod reduction;
pub mod transport;

pub use error::{Error, Result};
pub use model::{Jet, Poly, Scalar, SystemSpec, TimeVector, Validated};

/// The exact scalar backend.
pub type Rational = num_rational::BigRational;
