use crate::error::{LdpError, Result};
use crate::tolerances::Tolerances;

use super::fbm_cov;
use super::volterra::convolution_offdiag;

/// Normalized Riemann–Liouville covariance
/// `(2α+1) ∫_0^{s∧t} (t-u)^α (s-u)^α du`, so that `k(t,t) = t^{2α+1}`.
pub fn rl_cov(alpha: f64, s: f64, t: f64, tol: &Tolerances) -> Result<f64> {
    if !(alpha > -0.5) {
        return Err(LdpError::InvalidParameter(format!(
            "Riemann-Liouville index alpha={alpha} must exceed -1/2"
        )));
    }
    let (s, t) = if s <= t { (s, t) } else { (t, s) };
    if s <= 0.0 {
        return Ok(0.0);
    }
    let p = 2.0 * alpha + 1.0;
    if s == t {
        return Ok(t.powf(p));
    }
    if alpha == 0.0 {
        return Ok(s);
    }
    let h = |u: f64| u.powf(alpha);
    Ok(p * convolution_offdiag(&h, alpha, s, t - s, tol)?)
}

/// Small-time limit covariances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitKernel {
    RiemannLiouville { alpha: f64 },
    BrownianMotion,
    FBm { hurst: f64 },
    /// `k(t,t) = 1`, zero off the diagonal. Not continuous.
    DiagonalIndicator,
}

impl LimitKernel {
    /// Homogeneity exponent: `k(λs, λt) = λ^β k(s, t)`.
    pub fn beta(&self) -> f64 {
        match *self {
            LimitKernel::RiemannLiouville { alpha } => 2.0 * alpha + 1.0,
            LimitKernel::BrownianMotion => 1.0,
            LimitKernel::FBm { hurst } => 2.0 * hurst,
            LimitKernel::DiagonalIndicator => 0.0,
        }
    }

    pub fn is_continuous(&self) -> bool {
        !matches!(self, LimitKernel::DiagonalIndicator)
    }

    pub fn name(&self) -> String {
        match *self {
            LimitKernel::RiemannLiouville { alpha } => format!("rl({alpha})"),
            LimitKernel::BrownianMotion => "bm".to_string(),
            LimitKernel::FBm { hurst } => format!("fbm({hurst})"),
            LimitKernel::DiagonalIndicator => "diagonal-indicator".to_string(),
        }
    }

    pub fn eval(&self, s: f64, t: f64) -> Result<f64> {
        self.eval_with(s, t, &Tolerances::default())
    }

    pub fn eval_with(&self, s: f64, t: f64, tol: &Tolerances) -> Result<f64> {
        if !(s >= 0.0 && t >= 0.0) {
            return Err(LdpError::InvalidParameter(format!(
                "limit kernel needs nonnegative times, got ({s}, {t})"
            )));
        }
        match *self {
            LimitKernel::RiemannLiouville { alpha } => rl_cov(alpha, s, t, tol),
            LimitKernel::BrownianMotion => Ok(s.min(t)),
            LimitKernel::FBm { hurst } => Ok(fbm_cov(hurst, s, t)),
            LimitKernel::DiagonalIndicator => Ok(if s == t && s > 0.0 { 1.0 } else { 0.0 }),
        }
    }
}
