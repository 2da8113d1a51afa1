//! Core data model: scalar backends, polynomials, jets, and the system
//! specification with its validation rules.

pub mod jet;
pub mod poly;
pub mod scalar;
pub mod sturm;
pub mod system;

pub use jet::Jet;
pub use poly::Poly;
pub use scalar::Scalar;
pub use system::{SystemSpec, TimeVector, Validated};
