//! ε-sweeps that check small-time limits numerically.

mod mc;
mod speed;
mod superrough;
mod sweep;
mod tail;

pub use mc::{sup_event_rate_mc, McEstimate, MIN_HITS};
pub use speed::{poly_mixture_integral, speed_asymptote_sweep, speed_ratio_sweep};
pub use superrough::{superrough_diagnostics, SuperRoughReport};
pub use sweep::{cov_limit_sweep, default_eps_grid, geometric_eps_grid, SweepReport, TrendVerdict};
pub use tail::{log_gaussian_survival, tail_rate_exact, TailRateResult};
