use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use super::Grid;
use crate::error::{LdpError, Result};
use crate::kernels::Covariance;
use crate::tolerances::Tolerances;

/// Jitter ladder, in units of `trace / n`.
const JITTER_START: f64 = 1e-12;
const JITTER_STOP: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub grid: Grid,
    pub values: DMatrix<f64>,
    pub kernel_name: String,
    /// Smallest eigenvalue observed.
    pub eig_floor: f64,
    pub eig_max: f64,
    /// Lower factor with `chol * cholᵀ = values + jitter * I`.
    pub chol: Option<DMatrix<f64>>,
    pub jitter: f64,
}

/// `values[i][j] = (k(tᵢ,tⱼ) + k(tⱼ,tᵢ)) / 2`, entries computed independently
/// in parallel.
pub fn gram_assemble<K: Covariance + ?Sized>(k: &K, grid: &Grid, tol: &Tolerances) -> Result<GramMatrix> {
    let t = grid.times();
    let n = t.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let entries = pairs
        .par_iter()
        .map(|&(i, j)| {
            if i == j {
                k.cov(t[i], t[i])
            } else {
                Ok(0.5 * (k.cov(t[i], t[j])? + k.cov(t[j], t[i])?))
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut values = DMatrix::zeros(n, n);
    for (&(i, j), &v) in pairs.iter().zip(&entries) {
        if !v.is_finite() {
            return Err(LdpError::NonFinite(format!("k({}, {}) = {v}", t[i], t[j])));
        }
        values[(i, j)] = v;
        values[(j, i)] = v;
    }
    from_values(grid.clone(), values, k.label(), tol)
}

/// Wrap an explicit symmetric matrix, checking PSD.
pub(crate) fn from_values(
    grid: Grid,
    values: DMatrix<f64>,
    kernel_name: String,
    tol: &Tolerances,
) -> Result<GramMatrix> {
    let eig = SymmetricEigen::new(values.clone()).eigenvalues;
    let eig_floor = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let eig_max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if eig_floor < -tol.psd_tol * eig_max.abs() {
        return Err(LdpError::PsdViolation {
            min_eig: eig_floor,
            max_eig: eig_max,
        });
    }
    Ok(GramMatrix {
        grid,
        values,
        kernel_name,
        eig_floor,
        eig_max,
        chol: None,
        jitter: 0.0,
    })
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Cholesky with jitter escalation from `1e-12 * trace/n` by factors of
    /// 10 up to `1e-6 * trace/n`. A zero matrix factors as zero.
    pub fn factorize(mut self) -> Result<Self> {
        if self.chol.is_some() {
            return Ok(self);
        }
        let n = self.n();
        let unit = self.values.trace() / n as f64;
        if unit == 0.0 && self.values.iter().all(|&v| v == 0.0) {
            self.chol = Some(DMatrix::zeros(n, n));
            self.jitter = 0.0;
            return Ok(self);
        }
        let mut rel = JITTER_START;
        while rel <= JITTER_STOP * (1.0 + 1e-9) {
            let jitter = rel * unit;
            let m = &self.values + DMatrix::identity(n, n) * jitter;
            if let Some(c) = m.cholesky() {
                self.chol = Some(c.l());
                self.jitter = jitter;
                return Ok(self);
            }
            rel *= 10.0;
        }
        Err(LdpError::FactorizationFailure {
            jitter: JITTER_STOP * unit,
        })
    }
}
