use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;

use super::SweepReport;
use crate::error::{LdpError, Result};
use crate::kernels::{limit_kernel, KernelSpec};
use crate::rv_calculus::SpeedFunction;
use crate::tolerances::Tolerances;

/// Boundary between the erfc branch and the asymptotic series.
const ASYMPTOTIC_Z: f64 = 8.0;

/// `ln Q(z)` for the standard Gaussian survival function `Q`.
pub fn log_gaussian_survival(z: f64) -> f64 {
    if z > ASYMPTOTIC_Z {
        let z2 = z * z;
        -0.5 * z2 - (z * (2.0 * PI).sqrt()).ln() + (1.0 - 1.0 / z2 + 3.0 / (z2 * z2)).ln()
    } else {
        (0.5 * libm::erfc(z / SQRT_2)).ln()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailRateResult {
    pub level: f64,
    pub t_star: f64,
    pub eps_grid: Vec<f64>,
    /// `(1/g(ε)) ln P(X_{ε t*} > a)`.
    pub normalized_log_probs: Vec<f64>,
    /// `-a² / (2 k⁰(t*, t*))`.
    pub limit_prediction: f64,
    pub final_error: f64,
}

impl TailRateResult {
    pub fn to_sweep(&self, tolerance: f64, tol: &Tolerances) -> Result<SweepReport> {
        let n = self.eps_grid.len();
        SweepReport::new(
            format!("tail_rate[a={}, t={}]", self.level, self.t_star),
            self.eps_grid.clone(),
            self.normalized_log_probs.clone(),
            vec![self.limit_prediction; n],
            self.normalized_log_probs
                .iter()
                .map(|v| (v - self.limit_prediction).abs())
                .collect(),
            tolerance,
            tol,
        )
    }
}

/// Exact marginal tail on the normalized log scale.
pub fn tail_rate_exact(
    k: &KernelSpec,
    g: &SpeedFunction,
    t_star: f64,
    a: f64,
    eps_grid: &[f64],
) -> Result<TailRateResult> {
    if !(a >= 0.0) {
        return Err(LdpError::InvalidParameter(format!("level a={a} must be >= 0")));
    }
    if !(t_star > 0.0 && t_star <= 1.0) {
        return Err(LdpError::InvalidParameter(format!("t*={t_star} outside (0, 1]")));
    }
    if eps_grid.is_empty() {
        return Err(LdpError::InvalidParameter("empty eps grid".into()));
    }
    let k0 = limit_kernel(k)?;
    let limit_prediction = -a * a / (2.0 * k0.eval(t_star, t_star)?);
    let normalized_log_probs = eps_grid
        .par_iter()
        .map(|&eps| {
            let var = k.variance(eps * t_star)?;
            if !(var > 0.0 && var.is_finite()) {
                return Err(LdpError::DegenerateVariance(var));
            }
            let speed = g.at(eps)?;
            Ok(log_gaussian_survival(a / var.sqrt()) / speed)
        })
        .collect::<Result<Vec<f64>>>()?;
    let final_error = (normalized_log_probs[normalized_log_probs.len() - 1] - limit_prediction).abs();
    Ok(TailRateResult {
        level: a,
        t_star,
        eps_grid: eps_grid.to_vec(),
        normalized_log_probs,
        limit_prediction,
        final_error,
    })
}
