//! Robust stability certificates for finite-dimensional LTI systems coupled
//! to one-dimensional linear PDEs.
//!
//! The PDE state is replaced by its Legendre projections, produced by a
//! finite-dimensional filter, and integral quadratic constraints on the
//! filter output turn stability into an LMI feasibility problem whose size
//! grows with the projection order. A spectral oracle for delay equations
//! provides ground truth for the transport case.

pub mod affine;
pub mod error;
pub mod legendre;
pub mod linalg;
pub mod lmi;
pub mod model;
pub mod multipliers;
pub mod oracle;
pub mod sweep;
pub mod validate;

pub use error::{Error, Result};
