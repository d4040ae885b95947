use nalgebra::{Matrix2, SymmetricEigen};
use rayon::prelude::*;

use super::SweepReport;
use crate::error::{LdpError, Result};
use crate::kernels::{VolterraIntegrand, VolterraKernel};
use crate::tolerances::Tolerances;

/// Tolerance on the diagonal ratio.
const DIAG_TOL: f64 = 1e-6;
/// Tolerance on the off-diagonal and on eigenvalue distance from 1.
const OFFDIAG_TOL: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub struct SuperRoughReport {
    pub gamma: f64,
    pub s: f64,
    pub t: f64,
    /// `H2(εt) / H2(ε) -> 1`.
    pub diagonal: SweepReport,
    /// `k^ε(s, t) -> 0`.
    pub off_diagonal: SweepReport,
    /// `√(H2(εs)/H2(ε)) (H2(εt)/H2(ε) - H2(ε(t-s))/H2(ε))^{1/2}` per ε.
    pub off_diagonal_bound: Vec<f64>,
    /// `max |λᵢ - 1|` for the rescaled 2×2 covariance.
    pub eigen: SweepReport,
    /// Ascending eigenvalue pairs per ε.
    pub eigenvalues: Vec<[f64; 2]>,
}

impl SuperRoughReport {
    /// Off-diagonal never exceeds its analytic bound (plus `slack`).
    pub fn bound_respected(&self, slack: f64) -> bool {
        self.off_diagonal
            .values
            .iter()
            .zip(&self.off_diagonal_bound)
            .all(|(v, b)| *v <= b + slack)
    }
}

/// Diagnostics for `h(u) = u^{-1/2}(-ln u)^{-γ}` with closed-form `H2`.
pub fn superrough_diagnostics(
    gamma: f64,
    eps_grid: &[f64],
    s: f64,
    t: f64,
    tol: &Tolerances,
) -> Result<SuperRoughReport> {
    if !(gamma > 1.0) {
        return Err(LdpError::InvalidParameter(format!("gamma={gamma} must exceed 1")));
    }
    if !(s > 0.0 && s < t && t <= 1.0) {
        return Err(LdpError::InvalidParameter(format!("need 0 < s < t <= 1, got s={s} t={t}")));
    }
    if eps_grid.is_empty() {
        return Err(LdpError::InvalidParameter("empty eps grid".into()));
    }
    let integrand = VolterraIntegrand::super_rough(gamma)?;
    let k = VolterraKernel::new(integrand.clone()).with_tolerances(*tol);
    let rows = eps_grid
        .par_iter()
        .map(|&eps| {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(LdpError::InvalidParameter(format!("eps={eps} outside (0, 1)")));
            }
            let norm = integrand.h2(eps)?;
            let rs = integrand.h2(eps * s)? / norm;
            let rt = integrand.h2(eps * t)? / norm;
            let rd = integrand.h2(eps * (t - s))? / norm;
            let off = k.cov(eps * s, eps * t)? / norm;
            let bound = (rs * (rt - rd).max(0.0)).sqrt();
            let m = Matrix2::new(rs, off, off, rt);
            let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            Ok((rt, off, bound, [ev[0], ev[1]]))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = rows.len();
    let diag: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let offd: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let eig_err: Vec<f64> = rows
        .iter()
        .map(|r| (r.3[0] - 1.0).abs().max((r.3[1] - 1.0).abs()))
        .collect();
    let eps = eps_grid.to_vec();
    Ok(SuperRoughReport {
        gamma,
        s,
        t,
        diagonal: SweepReport::new(
            format!("superrough_diagonal[t={t}]"),
            eps.clone(),
            diag.clone(),
            vec![1.0; n],
            diag.iter().map(|v| (v - 1.0).abs()).collect(),
            DIAG_TOL,
            tol,
        )?,
        off_diagonal: SweepReport::new(
            format!("superrough_offdiagonal[s={s},t={t}]"),
            eps.clone(),
            offd.clone(),
            vec![0.0; n],
            offd.iter().map(|v| v.abs()).collect(),
            OFFDIAG_TOL,
            tol,
        )?,
        off_diagonal_bound: rows.iter().map(|r| r.2).collect(),
        eigen: SweepReport::new(
            format!("superrough_eigen[s={s},t={t}]"),
            eps,
            rows.iter().map(|r| r.3[0]).collect(),
            vec![1.0; n],
            eig_err,
            OFFDIAG_TOL,
            tol,
        )?,
        eigenvalues: rows.iter().map(|r| r.3).collect(),
    })
}
