//! `check`: the invariant suite, one PASS/FAIL line per invariant.

use smalltime_ldp::gaussian_lab::{
    cholesky_sample, finite_dim_rate, gram_assemble, path_rate, rate_speed_scaling, Grid,
};
use smalltime_ldp::io::paths_csv;
use smalltime_ldp::kernels::{
    homogeneity_check, increment_bounds_check, kernel_eval, limit_kernel, rescaled_kernel, Covariance,
    KernelSpec, LimitKernel, MixingMeasure, MixtureFamily, VolterraIntegrand, VolterraKernel,
};
use smalltime_ldp::ld_verify::log_gaussian_survival;
use smalltime_ldp::nalgebra::DMatrix;
use smalltime_ldp::rv_calculus::{
    mixture_speed_function, potter_verify, speed_from_variance, RVFunction, SpeedFunction,
};
use smalltime_ldp::{Result, Tolerances};

type Check = fn(&KernelSpec, &Tolerances) -> Result<(bool, String)>;

fn unit(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / n as f64).collect()
}

/// Interior grid: the super-rough integrand blows up at `u = 1`.
fn interior(n: usize) -> Vec<f64> {
    unit(n).into_iter().map(|t| 0.9 * t).collect()
}

fn library(k: &KernelSpec) -> Result<Vec<KernelSpec>> {
    Ok(vec![
        k.clone(),
        KernelSpec::fbm(0.75)?,
        KernelSpec::riemann_liouville(-0.25)?,
        KernelSpec::volterra(VolterraIntegrand::power_log(0.25, 1.0)?),
        KernelSpec::volterra(VolterraIntegrand::super_rough(1.5)?),
        KernelSpec::mixture(MixingMeasure::atomic(vec![(0.3, 0.5), (0.6, 0.5)])?, MixtureFamily::FBm),
    ])
}

fn symmetry(k: &KernelSpec, _: &Tolerances) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for k in library(k)? {
        for &s in &interior(8) {
            for &t in &interior(8) {
                let (a, b) = (kernel_eval(&k, s, t)?, kernel_eval(&k, t, s)?);
                worst = worst.max((a - b).abs() / a.abs().max(1e-300));
            }
        }
    }
    Ok((worst <= 1e-7, format!("max relative asymmetry {worst:.2e}")))
}

fn psd(k: &KernelSpec, tol: &Tolerances) -> Result<(bool, String)> {
    let grid = Grid::new(interior(32), tol.n_max)?;
    let mut worst = f64::INFINITY;
    for k in library(k)? {
        let g = gram_assemble(&k, &grid, tol)?;
        worst = worst.min(g.eig_floor / g.eig_max);
    }
    Ok((worst >= -tol.psd_tol, format!("min eigenvalue / max eigenvalue {worst:.2e}")))
}

fn self_similarity(_: &KernelSpec, _: &Tolerances) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for alpha in [-0.25, 0.0, 0.75] {
        let integrand = VolterraIntegrand::power(alpha)?;
        let k = KernelSpec::volterra(integrand.clone());
        let g = speed_from_variance(move |e| integrand.h2(e));
        let k0 = limit_kernel(&k)?;
        let r = rescaled_kernel(&k, &g, 1e-3)?;
        for &s in &unit(4) {
            for &t in &unit(4) {
                worst = worst.max((r.cov(s, t)? - k0.eval(s, t)?).abs());
            }
        }
    }
    Ok((worst <= 1e-6, format!("max deviation at eps=1e-3 {worst:.2e}")))
}

fn homogeneity(_: &KernelSpec, _: &Tolerances) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for k0 in [
        LimitKernel::BrownianMotion,
        LimitKernel::FBm { hurst: 0.3 },
        LimitKernel::RiemannLiouville { alpha: 0.25 },
    ] {
        worst = worst.max(homogeneity_check(&k0, &[0.5, 2.0], &unit(4))?);
    }
    Ok((worst <= 1e-6, format!("max relative deviation {worst:.2e}")))
}

fn reproducing(_: &KernelSpec, tol: &Tolerances) -> Result<(bool, String)> {
    let grid = Grid::uniform(32, tol.n_max)?;
    let k0 = LimitKernel::RiemannLiouville { alpha: 0.25 };
    let gram = gram_assemble(&k0, &grid, tol)?;
    let mut worst = 0.0f64;
    for j in [0, 15, 31] {
        let col: Vec<f64> = gram.values.column(j).iter().copied().collect();
        let r = path_rate(&k0, &grid, &col, tol)?;
        let want = 0.5 * gram.values[(j, j)];
        worst = worst.max((r.value - want).abs() / want);
    }
    Ok((worst <= 1e-5, format!("max relative error {worst:.2e}")))
}

fn bm_linear(_: &KernelSpec, tol: &Tolerances) -> Result<(bool, String)> {
    let grid = Grid::uniform(16, tol.n_max)?;
    let r = path_rate(&LimitKernel::BrownianMotion, &grid, grid.times(), tol)?;
    Ok(((r.value - 0.5).abs() <= 1e-10, format!("rate {}", r.value)))
}

fn scaling(_: &KernelSpec, tol: &Tolerances) -> Result<(bool, String)> {
    let c = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
    let (a, b) = rate_speed_scaling(&c, &[3.0, 2.0], 4.0, tol)?;
    let dev = (b.value * 4.0 - a.value).abs() / a.value;
    Ok((dev <= 1e-12, format!("relative deviation {dev:.2e}")))
}

fn range(_: &KernelSpec, tol: &Tolerances) -> Result<(bool, String)> {
    let c = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
    let inside = finite_dim_rate(&c, &[1.0, 0.0], tol)?;
    let outside = finite_dim_rate(&c, &[0.0, 1.0], tol)?;
    let ok = inside.in_range && (inside.value - 0.25).abs() <= 1e-15 && !outside.in_range && outside.value.is_infinite();
    Ok((ok, format!("in-range {} / out-of-range {}", inside.value, outside.value)))
}

fn refinement(_: &KernelSpec, tol: &Tolerances) -> Result<(bool, String)> {
    let k0 = LimitKernel::FBm { hurst: 0.75 };
    let mut vals = Vec::new();
    for n in [8, 16, 32] {
        let grid = Grid::uniform(n, tol.n_max)?;
        let x: Vec<f64> = grid.times().iter().map(|t| t.sin()).collect();
        vals.push(path_rate(&k0, &grid, &x, tol)?.value);
    }
    let ok = vals.windows(2).all(|w| w[1] >= w[0] - 1e-10);
    Ok((ok, format!("rates {:.6} {:.6} {:.6}", vals[0], vals[1], vals[2])))
}

fn sampler(k: &KernelSpec, tol: &Tolerances) -> Result<(bool, String)> {
    let grid = Grid::uniform(16, tol.n_max)?;
    let gram = gram_assemble(k, &grid, tol)?.factorize()?;
    let a = paths_csv(&cholesky_sample(&gram, 7, 64)?)?;
    let b = paths_csv(&cholesky_sample(&gram, 7, 64)?)?;
    let c = paths_csv(&cholesky_sample(&gram, 8, 64)?)?;
    Ok((a == b && a != c, format!("rerun identical {}, seed-sensitive {}", a == b, a != c)))
}

fn increments(_: &KernelSpec, _: &Tolerances) -> Result<(bool, String)> {
    let k = VolterraKernel::new(VolterraIntegrand::power(-0.25)?);
    let rep = increment_bounds_check(&k, &[0.1, 0.4, 0.7, 1.0])?;
    Ok((rep.all_ok(), format!("{} pairs, h^2 {:?}", rep.records.len(), rep.monotonicity)))
}

fn potter(_: &KernelSpec, _: &Tolerances) -> Result<(bool, String)> {
    let f = RVFunction::power_log(0.5, 1.0)?;
    let eps: Vec<f64> = (1..=4).map(|j| 10f64.powi(-j)).collect();
    let c = potter_verify(&f, 0.25, &eps, &unit(10))?;
    Ok((c.a.is_finite() && c.a >= 1.0, format!("constant A = {:.6}", c.a)))
}

fn speeds(_: &KernelSpec, _: &Tolerances) -> Result<(bool, String)> {
    let eps: Vec<f64> = (4..=30).map(|j| 2f64.powi(-j)).collect();
    let mu = MixingMeasure::polynomial(0.3, 0.8, 1)?;
    let all = [SpeedFunction::power(0.5), mixture_speed_function(&mu)];
    let mut ok = true;
    for g in &all {
        ok &= g.diverges_on(&eps, 0)?;
    }
    Ok((ok, format!("{} speeds increasing on a dyadic grid", all.len())))
}

fn survival(_: &KernelSpec, _: &Tolerances) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for z in [0.0, 1.0, 3.0, 6.0] {
        let want = (0.5 * reference_erfc(z / std::f64::consts::SQRT_2)).ln();
        worst = worst.max((log_gaussian_survival(z) - want).abs());
    }
    Ok((worst <= 1e-12, format!("max deviation {worst:.2e}")))
}

/// `erfc` through its continued fraction, independent of the library path.
fn reference_erfc(x: f64) -> f64 {
    if x < 2.0 {
        // Maclaurin series of erf
        let mut term = x;
        let mut sum = x;
        for n in 1..200 {
            term *= -x * x / n as f64;
            sum += term / (2 * n + 1) as f64;
        }
        1.0 - 2.0 / std::f64::consts::PI.sqrt() * sum
    } else {
        let mut f = 0.0;
        for k in (1..200).rev() {
            f = (k as f64 / 2.0) / (x + f);
        }
        (-x * x).exp() / std::f64::consts::PI.sqrt() / (x + f)
    }
}

pub const CHECKS: &[(&str, Check)] = &[
    ("kernel symmetry", symmetry),
    ("gram psd", psd),
    ("exact self-similarity", self_similarity),
    ("limit homogeneity", homogeneity),
    ("reproducing identity", reproducing),
    ("linear bm rate", bm_linear),
    ("rate-speed scaling", scaling),
    ("range detection", range),
    ("grid refinement", refinement),
    ("sampler determinism", sampler),
    ("increment bounds", increments),
    ("potter bound", potter),
    ("speed divergence", speeds),
    ("gaussian log-survival", survival),
];

/// All checks; a check that errors counts as a failure.
pub fn run_checks(k: &KernelSpec, tol: &Tolerances) -> (bool, String) {
    let mut all = true;
    let mut lines = Vec::new();
    for (name, f) in CHECKS {
        let (ok, detail) = match f(k, tol) {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        all &= ok;
        lines.push(format!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" }));
    }
    (all, lines.join("\n"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erfc_reference_values() {
        assert!((reference_erfc(0.0) - 1.0).abs() < 1e-15);
        assert!((reference_erfc(1.0) - 0.157_299_207_050_285_13).abs() < 1e-14);
        assert!((reference_erfc(3.0) / 2.209_049_699_858_544e-5 - 1.0).abs() < 1e-12);
    }
}
