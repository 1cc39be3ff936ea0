//! Multiparameter noncommutative Laplace transform over Cayley-Dickson
//! algebras: kernels, forward and inverse transforms, operational calculus
//! checks, and a transform-based solver for constant-coefficient PDEs.

pub mod algebra;
pub mod error;
pub mod kernel;
pub mod opcalc;
pub mod originals;
pub mod pde;
pub mod transform;

pub use algebra::CdNumber;
pub use error::{Error, Result};
