//! Rotating patches (V-states) of the generalized SQG equation: special functions,
//! conformal boundaries, singular kernels, linearization, branch continuation and
//! contour dynamics.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod continuation;
pub mod error;
pub mod evolution;
pub mod fourier;
pub mod geometry;
pub mod io;
pub mod kernels;
pub mod linearization;
pub mod quadrature;
pub mod specfun;

pub use error::{Result, VStateError};
