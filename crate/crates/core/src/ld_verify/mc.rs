use crate::error::{LdpError, Result};
use crate::gaussian_lab::{cholesky_sample, gram_assemble, Grid};
use crate::kernels::{KernelSpec, RescaledKernel};
use crate::rv_calculus::SpeedFunction;
use crate::tolerances::Tolerances;

/// Fewest hits accepted before the estimator refuses.
pub const MIN_HITS: usize = 50;

const Z_95: f64 = 1.959963984540054;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    /// `(1/g(ε)) ln p̂`.
    pub estimate: f64,
    /// 95% interval for the same quantity.
    pub ci: (f64, f64),
    pub p_hat: f64,
    pub hits: usize,
    pub n_paths: usize,
}

/// Monte Carlo estimate of `(1/g(ε)) ln P(max_i X_{ε tᵢ} > level)` from exact
/// Gaussian vectors. Refuses with `InsufficientHits` below [`MIN_HITS`].
#[allow(clippy::too_many_arguments)]
pub fn sup_event_rate_mc(
    k: &KernelSpec,
    g: &SpeedFunction,
    grid: &Grid,
    level: f64,
    eps: f64,
    n_paths: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<McEstimate> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(LdpError::InvalidParameter(format!("eps={eps} outside (0, 1)")));
    }
    if n_paths == 0 {
        return Err(LdpError::InvalidParameter("n_paths must be positive".into()));
    }
    let speed = g.at(eps)?;
    let scaled = RescaledKernel {
        kernel: k.clone(),
        eps,
        scale: 1.0,
    };
    let gram = gram_assemble(&scaled, grid, tol)?;
    let hits = cholesky_sample(&gram, seed, n_paths)?
        .iter()
        .filter(|p| p.values.iter().any(|&v| v > level))
        .count();
    if hits < MIN_HITS {
        return Err(LdpError::InsufficientHits {
            hits,
            n_paths,
            required: MIN_HITS,
        });
    }
    let n = n_paths as f64;
    let p_hat = hits as f64 / n;
    let half = Z_95 * (p_hat * (1.0 - p_hat) / n).sqrt();
    let to_rate = |p: f64| if p > 0.0 { p.min(1.0).ln() / speed } else { f64::NEG_INFINITY };
    Ok(McEstimate {
        estimate: to_rate(p_hat),
        ci: (to_rate(p_hat - half), to_rate(p_hat + half)),
        p_hat,
        hits,
        n_paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::VolterraIntegrand;
    use crate::ld_verify::tail_rate_exact;

    fn brownian() -> KernelSpec {
        KernelSpec::volterra(VolterraIntegrand::power(0.0).unwrap())
    }

    #[test]
    fn always_hit() {
        let grid = Grid::uniform(4, 512).unwrap();
        let g = SpeedFunction::power(1.0);
        let r = sup_event_rate_mc(&brownian(), &g, &grid, f64::NEG_INFINITY, 0.01, 100, 1, &Tolerances::default())
            .unwrap();
        assert_eq!((r.estimate, r.hits), (0.0, 100));
    }

    #[test]
    fn refuses_rare_events() {
        let grid = Grid::uniform(4, 512).unwrap();
        let g = SpeedFunction::power(1.0);
        let r = sup_event_rate_mc(&brownian(), &g, &grid, 1.0, 1e-3, 1000, 1, &Tolerances::default());
        assert!(matches!(r, Err(LdpError::InsufficientHits { .. })));
    }

    #[test]
    fn bracketed_by_marginal_and_union_bound() {
        let grid = Grid::uniform(4, 512).unwrap();
        let g = SpeedFunction::power(1.0);
        let (eps, level) = (0.01, 0.2);
        let tol = Tolerances::default();
        let r = sup_event_rate_mc(&brownian(), &g, &grid, level, eps, 20_000, 9, &tol).unwrap();
        let single = tail_rate_exact(&brownian(), &g, 1.0, level, &[eps]).unwrap().normalized_log_probs[0];
        let union = single + (grid.len() as f64).ln() * eps;
        assert!(r.ci.1 >= single && r.ci.0 <= union, "{:?} vs [{single}, {union}]", r.ci);
        let again = sup_event_rate_mc(&brownian(), &g, &grid, level, eps, 20_000, 9, &tol).unwrap();
        assert_eq!(r, again);
    }
}
