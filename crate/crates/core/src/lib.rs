//! Numerical laboratory for geometrically linear elastic phase transitions
//! with incompatible energy wells.
//!
//! The energy density of the material is
//!
//! ```text
//! W0(H) = f(Tr ε) + μ |dev ε|²,     ε = (H + Hᵗ)/2
//! ```
//!
//! with a double-well dilatational potential `f`. The crate computes the
//! quasiconvex envelope of `W0` exactly, builds laminate minimizing sequences,
//! constructs free-boundary global minimizers on grids, evaluates
//! stationarity and global-minimality certificates, and solves truncated
//! versions of the complex moment system for square-symmetric inclusions.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod certify;
pub mod energy;
mod error;
pub mod fields;
pub mod matrix;
pub mod quadrature;
pub mod relaxation;
pub mod square_moments;
pub mod tolerance;

pub use error::{Error, Result};
pub use matrix::SquareMatrix;
