//! Grids, Gram matrices, exact sampling, and finite-dimensional rates.

mod grid;
mod gram;
mod rate;
mod sampler;

pub use grid::Grid;
pub use gram::{gram_assemble, GramMatrix};
pub use rate::{finite_dim_rate, path_rate, rate_speed_scaling, RateEvaluation};
pub use sampler::{cholesky_sample, empirical_covariance, PathSample};
