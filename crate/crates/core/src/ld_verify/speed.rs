use rayon::prelude::*;

use super::SweepReport;
use crate::error::{LdpError, Result};
use crate::kernels::{Density, MixingMeasure};
use crate::rv_calculus::{mixture_speed, SpeedAsymptote};
use crate::tolerances::Tolerances;

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Regularized lower incomplete gamma `P(n+1, x)` for integer `n`.
fn lower_gamma_regularized(n: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let a = f64::from(n) + 1.0;
    if x < a + 1.0 {
        // e^{-x} x^a Σ_k x^k / Γ(a + k + 1)
        let mut term = (-x + a * x.ln()).exp() / factorial(n + 1);
        let mut sum = term;
        let mut k = 1.0;
        while term > 1e-17 * sum {
            term *= x / (a + k);
            sum += term;
            k += 1.0;
        }
        sum
    } else {
        // 1 - e^{-x} Σ_{k ≤ n} x^k / k!
        let mut term = (-x).exp();
        let mut q = term;
        for k in 1..=n {
            term *= x / f64::from(k);
            q += term;
        }
        1.0 - q
    }
}

/// `∫_{H0}^{H1} ε^{2H} (H - H0)^n dH` in closed form:
/// `ε^{2H0} n!/λ^{n+1} P(n+1, λW)` with `λ = -2 ln ε`, `W = H1 - H0`.
pub fn poly_mixture_integral(n: u32, h0: f64, h1: f64, eps: f64) -> f64 {
    let lambda = -2.0 * eps.ln();
    eps.powf(2.0 * h0) * factorial(n) / lambda.powi(n as i32 + 1)
        * lower_gamma_regularized(n, lambda * (h1 - h0))
}

/// `values[j] = g(ε_j) / asymptote(ε_j)`, target 1.
pub fn speed_ratio_sweep(
    mu: &MixingMeasure,
    asymptote: SpeedAsymptote,
    eps_grid: &[f64],
    tolerance: f64,
    tol: &Tolerances,
) -> Result<SweepReport> {
    let values = eps_grid
        .par_iter()
        .map(|&eps| Ok(mixture_speed(mu, eps)? / asymptote.eval(eps)))
        .collect::<Result<Vec<f64>>>()?;
    let n = values.len();
    SweepReport::new(
        "speed_ratio",
        eps_grid.to_vec(),
        values.clone(),
        vec![1.0; n],
        values.iter().map(|v| (v - 1.0).abs()).collect(),
        tolerance,
        tol,
    )
}

/// Ratio of the mixture speed to `ε^{-2H0} (-2 ln ε)^{n+1} / n!` for
/// `dμ = (H - H0)^n dH`.
pub fn speed_asymptote_sweep(
    mu: &MixingMeasure,
    n: u32,
    eps_grid: &[f64],
    tolerance: f64,
    tol: &Tolerances,
) -> Result<SweepReport> {
    match mu.density() {
        Some(Density::Polynomial { n: m }) if *m == n && mu.atoms().is_empty() => {}
        _ => {
            return Err(LdpError::InvalidMeasure(format!(
                "speed asymptote needs dμ = (H - H0)^{n} dH with no atoms"
            )))
        }
    }
    let asymptote = SpeedAsymptote {
        coefficient: 2f64.powi(n as i32 + 1) / factorial(n),
        eps_power: -2.0 * mu.h0(),
        neglog_power: f64::from(n) + 1.0,
    };
    let mut r = speed_ratio_sweep(mu, asymptote, eps_grid, tolerance, tol)?;
    r.quantity_name = format!("speed_asymptote[n={n}]");
    Ok(r)
}
