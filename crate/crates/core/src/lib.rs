//! Truncated block Toeplitz and Hankel operators on the vector-valued Hardy
//! space, their Moebius defect maps, constructive Hankel-product decisions
//! and compactness diagnostics.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`). The aliases
//! at the crate root fix `f64`.

pub mod error;
pub mod scalar;
pub mod linalg;
pub mod operators;
pub mod symbols;
pub mod wordalg;
pub mod mobius;
pub mod hankelness;
pub mod compactness;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Symbol = symbols::MatrixSymbol<f64>;
pub type Point = symbols::DiskPoint<f64>;
pub type Operator = operators::TruncatedOperator<f64>;
pub type Frame = mobius::MobiusFrame<f64>;
pub type Gamma = compactness::GammaResult<f64>;
