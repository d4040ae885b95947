//! Numerical tolerances shared across the library.
//!
//! Defaults are the values the test and acceptance suites are pinned to.
//! The CLI can override individual fields through `tol.<field>` keys.

use crate::error::{LdpError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative quadrature tolerance for smooth integrands.
    pub quad_rtol: f64,
    /// Relative quadrature tolerance after an endpoint substitution.
    pub quad_rtol_singular: f64,
    /// Subdivision budget for adaptive quadrature.
    pub max_subdivisions: usize,
    /// Relative eigenvalue tolerance for PSD checks.
    pub psd_tol: f64,
    /// Eigenvalues below `eig_rel_tol * max_eig` are treated as zero.
    pub eig_rel_tol: f64,
    /// Relative residual above which a vector is outside the numerical range.
    pub range_tol: f64,
    /// Bound on |rho| at the smallest octave of the rho check.
    pub rho_tol: f64,
    /// Octaves below t0 sampled by the rho check.
    pub rho_octaves: usize,
    /// Number of trailing sweep points used by the trend verdict.
    pub trend_window: usize,
    /// Absolute slack allowed for a "non-increasing" step.
    pub trend_slack: f64,
    /// Errors at or below this level count as flat and never break a trend.
    pub noise_floor: f64,
    /// Largest grid accepted by the Gaussian lab.
    pub n_max: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quad_rtol: 1e-9,
            quad_rtol_singular: 1e-7,
            max_subdivisions: 2000,
            psd_tol: 1e-8,
            eig_rel_tol: 1e-10,
            range_tol: 1e-6,
            rho_tol: 1e-1,
            rho_octaves: 40,
            trend_window: 4,
            trend_slack: 1e-12,
            noise_floor: 1e-7,
            n_max: 512,
        }
    }
}

impl Tolerances {
    /// Set a field by name; used by the config layer.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let as_count = |v: f64| -> Result<usize> {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(LdpError::InvalidParameter(format!(
                    "tolerance {key} must be a positive integer"
                )))
            }
        };
        if !(value.is_finite() && value > 0.0) {
            return Err(LdpError::InvalidParameter(format!(
                "tolerance {key} must be positive and finite"
            )));
        }
        match key {
            "quad_rtol" => self.quad_rtol = value,
            "quad_rtol_singular" => self.quad_rtol_singular = value,
            "max_subdivisions" => self.max_subdivisions = as_count(value)?,
            "psd_tol" => self.psd_tol = value,
            "eig_rel_tol" => self.eig_rel_tol = value,
            "range_tol" => self.range_tol = value,
            "rho_tol" => self.rho_tol = value,
            "rho_octaves" => self.rho_octaves = as_count(value)?,
            "trend_window" => self.trend_window = as_count(value)?,
            "trend_slack" => self.trend_slack = value,
            "noise_floor" => self.noise_floor = value,
            "n_max" => self.n_max = as_count(value)?,
            _ => {
                return Err(LdpError::InvalidParameter(format!(
                    "unknown tolerance {key}"
                )))
            }
        }
        Ok(())
    }
}
