use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{gram_assemble, Grid};
use crate::error::{LdpError, Result};
use crate::kernels::LimitKernel;
use crate::tolerances::Tolerances;

/// `½ xᵀ C⁺ x`, or `+inf` when `x` leaves the numerical range of `C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEvaluation {
    pub value: f64,
    /// Norm of the part of `x` orthogonal to the retained eigenvectors.
    pub residual: f64,
    pub in_range: bool,
}

/// Eigenvalues below `eig_rel_tol * max_eig` count as zero; `x` is in range
/// when the projection residual is at most `range_tol * |x|`.
pub fn finite_dim_rate(c: &DMatrix<f64>, x: &[f64], tol: &Tolerances) -> Result<RateEvaluation> {
    let n = c.nrows();
    if c.ncols() != n {
        return Err(LdpError::DimensionMismatch {
            expected: n,
            got: c.ncols(),
        });
    }
    if x.len() != n {
        return Err(LdpError::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) || c.iter().any(|v| !v.is_finite()) {
        return Err(LdpError::NonFinite("rate input".into()));
    }
    let xv = DVector::from_column_slice(x);
    let sym = (c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let lmax = eig.eigenvalues.iter().copied().fold(0.0f64, f64::max);
    let cutoff = tol.eig_rel_tol * lmax;
    let mut value = 0.0;
    let mut projected = DVector::zeros(n);
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lmax > 0.0 && lambda > cutoff {
            let v = eig.eigenvectors.column(i);
            let coef = v.dot(&xv);
            value += coef * coef / lambda;
            projected += v * coef;
        }
    }
    let residual = (&xv - projected).norm();
    let in_range = residual <= tol.range_tol * xv.norm();
    Ok(RateEvaluation {
        value: if in_range { 0.5 * value } else { f64::INFINITY },
        residual,
        in_range,
    })
}

/// Finite-dimensional rate of the marginals of the limit process on `grid`.
/// A lower bound for the path-space rate, nondecreasing under refinement.
pub fn path_rate(k0: &LimitKernel, grid: &Grid, x: &[f64], tol: &Tolerances) -> Result<RateEvaluation> {
    if !k0.is_continuous() {
        return Err(LdpError::DiscontinuousLimit(k0.name()));
    }
    let g = gram_assemble(k0, grid, tol)?;
    finite_dim_rate(&g.values, x, tol)
}

/// `(rate under C, rate under scale * C)`; the second is the first over `scale`.
pub fn rate_speed_scaling(
    c: &DMatrix<f64>,
    x: &[f64],
    scale: f64,
    tol: &Tolerances,
) -> Result<(RateEvaluation, RateEvaluation)> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(LdpError::InvalidParameter(format!("scale={scale} must be positive")));
    }
    Ok((finite_dim_rate(c, x, tol)?, finite_dim_rate(&(c * scale), x, tol)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn identity_rate() {
        let r = finite_dim_rate(&DMatrix::identity(2, 2), &[1.0, 1.0], &tol()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15 && r.in_range);
    }

    #[test]
    fn image_condition() {
        let c = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.0]));
        let a = finite_dim_rate(&c, &[2.0, 0.0], &tol()).unwrap();
        assert!((a.value - 1.0).abs() < 1e-15);
        let b = finite_dim_rate(&c, &[0.0, 1.0], &tol()).unwrap();
        assert!(b.value.is_infinite() && !b.in_range);
        assert!((b.residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_vector_and_zero_matrix() {
        let c = DMatrix::zeros(2, 2);
        assert_eq!(finite_dim_rate(&c, &[0.0, 0.0], &tol()).unwrap().value, 0.0);
        assert!(finite_dim_rate(&c, &[1.0, 0.0], &tol()).unwrap().value.is_infinite());
    }

    #[test]
    fn brownian_linear_path() {
        let grid = Grid::uniform(16, 512).unwrap();
        let r = path_rate(&LimitKernel::BrownianMotion, &grid, grid.times(), &tol()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-10);
    }

    #[test]
    fn scaling_identity() {
        let c = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0]));
        let (a, b) = rate_speed_scaling(&c, &[3.0, 2.0], 4.0, &tol()).unwrap();
        assert!(((b.value - a.value / 4.0) / b.value).abs() < 1e-12);
        let (a, b) = rate_speed_scaling(&DMatrix::identity(2, 2), &[1.0, 0.0], 2.0, &tol()).unwrap();
        assert_eq!((a.value, b.value), (0.5, 0.25));
    }

    #[test]
    fn discontinuous_limit_refused() {
        let grid = Grid::uniform(2, 512).unwrap();
        assert!(path_rate(&LimitKernel::DiagonalIndicator, &grid, &[1.0, 1.0], &tol()).is_err());
    }

    #[test]
    fn dimension_checked() {
        assert!(finite_dim_rate(&DMatrix::identity(2, 2), &[1.0], &tol()).is_err());
    }
}
