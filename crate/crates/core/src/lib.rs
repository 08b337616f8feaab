//! Green functions of the one-dimensional Schrödinger equation -ψ'' + V_S ψ = k²ψ
//! with V_S = f² + f', computed through several independent routes.

pub mod error;
pub mod potential;
pub mod transfer;
pub mod sl3;
pub mod green;
pub mod polyrep;
pub mod born;
pub mod verify;
pub mod cli;

pub use error::{Error, Result};
pub use num_complex::Complex64;
