//! Higher-order Gamow resonance states.
//!
//! An `r`-th order pole of the S-matrix at `z_R = E_R − iΓ/2` produces an
//! `r`-dimensional space of generalized eigenvectors on which the Hamiltonian
//! acts as a Jordan block. This crate builds that space, evolves kets, bras
//! and state operators under the semigroup `e^{−iHt}` (`t >= 0`), extracts
//! pole terms from concrete test functions by contour differentiation, and
//! certifies in exact arithmetic which state operators decay purely
//! exponentially.

pub mod algebra;
pub mod cli;
pub mod config;
pub mod error;
pub mod jordan;
pub mod smatrix;
pub mod states;
pub mod uniqueness;

pub use error::{Error, Result};
