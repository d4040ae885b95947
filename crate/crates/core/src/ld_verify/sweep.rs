use rayon::prelude::*;

use crate::error::{LdpError, Result};
use crate::kernels::{rescaled_kernel, Covariance, KernelSpec, LimitKernel};
use crate::rv_calculus::SpeedFunction;
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrendVerdict {
    Converging,
    Stalled,
    Diverging,
}

impl TrendVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            TrendVerdict::Converging => "converging",
            TrendVerdict::Stalled => "stalled",
            TrendVerdict::Diverging => "diverging",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub quantity_name: String,
    pub eps_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub targets: Vec<f64>,
    pub errors: Vec<f64>,
    pub tolerance: f64,
    pub trend_verdict: TrendVerdict,
    pub final_error: f64,
}

impl SweepReport {
    pub fn new(
        quantity_name: impl Into<String>,
        eps_grid: Vec<f64>,
        values: Vec<f64>,
        targets: Vec<f64>,
        errors: Vec<f64>,
        tolerance: f64,
        tol: &Tolerances,
    ) -> Result<Self> {
        let n = eps_grid.len();
        for len in [values.len(), targets.len(), errors.len()] {
            if len != n {
                return Err(LdpError::DimensionMismatch { expected: n, got: len });
            }
        }
        if n == 0 {
            return Err(LdpError::InvalidParameter("empty sweep".into()));
        }
        let final_error = errors[n - 1];
        let trend_verdict = verdict(&errors, tolerance, tol);
        Ok(Self {
            quantity_name: quantity_name.into(),
            eps_grid,
            values,
            targets,
            errors,
            tolerance,
            trend_verdict,
            final_error,
        })
    }

    pub fn pass(&self) -> bool {
        self.trend_verdict == TrendVerdict::Converging
    }

    /// Errors over the trailing window never increase (beyond slack).
    pub fn window_non_increasing(&self, tol: &Tolerances) -> bool {
        window_non_increasing(&self.errors, tol)
    }
}

fn window_non_increasing(errors: &[f64], tol: &Tolerances) -> bool {
    let start = errors.len().saturating_sub(tol.trend_window);
    errors[start..]
        .windows(2)
        .all(|w| w[1] <= w[0] + tol.trend_slack || w[1] <= tol.noise_floor)
}

/// Converging: trailing window non-increasing and final error within
/// tolerance. Diverging: final error above tolerance and above the start of
/// the window. Stalled otherwise.
fn verdict(errors: &[f64], tolerance: f64, tol: &Tolerances) -> TrendVerdict {
    let last = errors[errors.len() - 1];
    if !last.is_finite() {
        return TrendVerdict::Diverging;
    }
    if window_non_increasing(errors, tol) && last <= tolerance {
        return TrendVerdict::Converging;
    }
    let start = errors.len().saturating_sub(tol.trend_window);
    if last > tolerance && last > errors[start] + tol.trend_slack {
        TrendVerdict::Diverging
    } else {
        TrendVerdict::Stalled
    }
}

/// `ε_j = 10^{-j/2}`, `j = 2..=16`.
pub fn default_eps_grid() -> Vec<f64> {
    (2..=16).map(|j| 10f64.powf(-(j as f64) / 2.0)).collect()
}

/// `count` points geometrically spaced from `start` down to `stop`.
pub fn geometric_eps_grid(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if !(start > stop && stop > 0.0 && start < 1.0) || count < 2 {
        return Err(LdpError::InvalidParameter(format!(
            "need 1 > start > stop > 0 and count >= 2, got start={start} stop={stop} count={count}"
        )));
    }
    let (a, b) = (start.log10(), stop.log10());
    Ok((0..count)
        .map(|j| {
            if j == 0 {
                start
            } else if j == count - 1 {
                stop
            } else {
                10f64.powf(a + (b - a) * j as f64 / (count - 1) as f64)
            }
        })
        .collect())
}

/// `errors[j] = max over pairs of |g(ε_j) k(ε_j s, ε_j t) - k⁰(s, t)|`;
/// `values`/`targets` hold the two sides at the worst pair.
pub fn cov_limit_sweep(
    k: &KernelSpec,
    g: &SpeedFunction,
    k0: &LimitKernel,
    times: &[f64],
    eps_grid: &[f64],
    tolerance: f64,
    tol: &Tolerances,
) -> Result<SweepReport> {
    if times.is_empty() {
        return Err(LdpError::InvalidGrid("empty (s, t) grid".into()));
    }
    let pairs: Vec<(f64, f64)> = times
        .iter()
        .enumerate()
        .flat_map(|(i, &s)| times[i..].iter().map(move |&t| (s, t)))
        .collect();
    let targets: Vec<f64> = pairs
        .iter()
        .map(|&(s, t)| k0.eval_with(s, t, tol))
        .collect::<Result<_>>()?;
    let rows = eps_grid
        .par_iter()
        .map(|&eps| {
            let r = rescaled_kernel(k, g, eps)?;
            let mut worst = (0.0f64, f64::NAN, f64::NAN);
            for (&(s, t), &target) in pairs.iter().zip(&targets) {
                let v = r.cov(s, t)?;
                let e = (v - target).abs();
                if !(e <= worst.0) {
                    worst = (e, v, target);
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>>>()?;
    SweepReport::new(
        format!("cov_limit[{} -> {}]", k.name(), k0.name()),
        eps_grid.to_vec(),
        rows.iter().map(|r| r.1).collect(),
        rows.iter().map(|r| r.2).collect(),
        rows.iter().map(|r| r.0).collect(),
        tolerance,
        tol,
    )
}
