//! Small-time large deviations for continuous Gaussian processes.

// `!(x > y)` is used throughout so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gaussian_lab;
pub mod io;
pub mod kernels;
pub mod ld_verify;
pub mod quadrature;
pub mod rv_calculus;
pub mod tolerances;

pub use error::{LdpError, Result};
pub use nalgebra;
pub use tolerances::Tolerances;
