//! Covariance kernels, small-time rescalings, and limit kernels.

mod limit;
mod mixture;
mod tabulated;
mod volterra;

pub use limit::{rl_cov, LimitKernel};
pub use mixture::{Density, MixingMeasure, MixtureFamily, MixtureKernel};
pub use tabulated::TabulatedKernel;
pub use volterra::{VolterraIntegrand, VolterraKernel};

use crate::error::{LdpError, Result};
use crate::rv_calculus::{classify_monotonicity, Monotonicity, SpeedFunction};
use crate::tolerances::Tolerances;

/// Relative slack for the increment sandwich.
const BOUND_RTOL: f64 = 1e-6;

/// fBm covariance `½(s^{2H} + t^{2H} - |t-s|^{2H})`.
pub fn fbm_cov(hurst: f64, s: f64, t: f64) -> f64 {
    let p = 2.0 * hurst;
    0.5 * (s.powf(p) + t.powf(p) - (t - s).abs().powf(p))
}

/// Anything with a covariance `(s, t) ↦ k(s, t)`.
pub trait Covariance: Send + Sync {
    fn cov(&self, s: f64, t: f64) -> Result<f64>;

    fn label(&self) -> String;

    /// `E|X_t - X_s|² = k(t,t) + k(s,s) - 2k(s,t)`.
    fn increment(&self, s: f64, t: f64) -> Result<f64> {
        if s == t {
            return Ok(0.0);
        }
        Ok(self.cov(t, t)? + self.cov(s, s)? - 2.0 * self.cov(s, t)?)
    }
}

#[derive(Debug, Clone)]
pub enum KernelSpec {
    FBm { hurst: f64 },
    /// Normalized so that `k(t,t) = t^{2α+1}`.
    RiemannLiouville { alpha: f64, tol: Tolerances },
    Volterra(VolterraKernel),
    Mixture(MixtureKernel),
    Tabulated(TabulatedKernel),
}

impl KernelSpec {
    pub fn fbm(hurst: f64) -> Result<Self> {
        if !(hurst > 0.0 && hurst <= 1.0) {
            return Err(LdpError::InvalidParameter(format!("Hurst index {hurst} outside (0, 1]")));
        }
        Ok(KernelSpec::FBm { hurst })
    }

    pub fn riemann_liouville(alpha: f64) -> Result<Self> {
        if !(alpha > -0.5) {
            return Err(LdpError::InvalidParameter(format!(
                "Riemann-Liouville index alpha={alpha} must exceed -1/2"
            )));
        }
        Ok(KernelSpec::RiemannLiouville {
            alpha,
            tol: Tolerances::default(),
        })
    }

    pub fn volterra(integrand: VolterraIntegrand) -> Self {
        KernelSpec::Volterra(VolterraKernel::new(integrand))
    }

    pub fn mixture(measure: MixingMeasure, family: MixtureFamily) -> Self {
        KernelSpec::Mixture(MixtureKernel::new(measure, family))
    }

    pub fn with_tolerances(self, tol: Tolerances) -> Self {
        match self {
            KernelSpec::RiemannLiouville { alpha, .. } => KernelSpec::RiemannLiouville { alpha, tol },
            KernelSpec::Volterra(k) => KernelSpec::Volterra(k.with_tolerances(tol)),
            KernelSpec::Mixture(mut k) => {
                k.tol = tol;
                KernelSpec::Mixture(k)
            }
            other => other,
        }
    }

    pub fn name(&self) -> String {
        match self {
            KernelSpec::FBm { hurst } => format!("fbm({hurst})"),
            KernelSpec::RiemannLiouville { alpha, .. } => format!("rl({alpha})"),
            KernelSpec::Volterra(k) => format!("volterra({})", k.integrand.name()),
            KernelSpec::Mixture(k) => k.name(),
            KernelSpec::Tabulated(k) => format!("tabulated({})", k.name()),
        }
    }

    /// `k(t, t)`.
    pub fn variance(&self, t: f64) -> Result<f64> {
        match self {
            KernelSpec::Volterra(k) => k.variance(t),
            _ => kernel_eval(self, t, t),
        }
    }

    fn eval_unchecked(&self, s: f64, t: f64) -> Result<f64> {
        match self {
            KernelSpec::FBm { hurst } => Ok(fbm_cov(*hurst, s, t)),
            KernelSpec::RiemannLiouville { alpha, tol } => rl_cov(*alpha, s, t, tol),
            KernelSpec::Volterra(k) => k.cov(s, t),
            KernelSpec::Mixture(k) => k.cov(s, t),
            KernelSpec::Tabulated(k) => k.cov(s, t),
        }
    }
}

impl Covariance for KernelSpec {
    fn cov(&self, s: f64, t: f64) -> Result<f64> {
        kernel_eval(self, s, t)
    }

    fn label(&self) -> String {
        self.name()
    }

    fn increment(&self, s: f64, t: f64) -> Result<f64> {
        check_unit(s, t)?;
        match self {
            KernelSpec::FBm { hurst } => Ok((t - s).abs().powf(2.0 * hurst)),
            KernelSpec::Volterra(k) => k.increment_variance(s, t),
            _ => {
                if s == t {
                    return Ok(0.0);
                }
                Ok(self.eval_unchecked(t, t)? + self.eval_unchecked(s, s)?
                    - 2.0 * self.eval_unchecked(s, t)?)
            }
        }
    }
}

impl Covariance for LimitKernel {
    fn cov(&self, s: f64, t: f64) -> Result<f64> {
        self.eval(s, t)
    }

    fn label(&self) -> String {
        self.name()
    }
}

impl Covariance for TabulatedKernel {
    fn cov(&self, s: f64, t: f64) -> Result<f64> {
        TabulatedKernel::cov(self, s, t)
    }

    fn label(&self) -> String {
        format!("tabulated({})", self.name())
    }
}

fn check_unit(s: f64, t: f64) -> Result<()> {
    if !((0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&t)) {
        return Err(LdpError::OutOfDomain { s, t });
    }
    Ok(())
}

/// `k(s, t)` for `s, t ∈ [0, 1]`.
pub fn kernel_eval(k: &KernelSpec, s: f64, t: f64) -> Result<f64> {
    check_unit(s, t)?;
    k.eval_unchecked(s, t)
}

/// `(s, t) ↦ g(ε) k(εs, εt)`.
#[derive(Debug, Clone)]
pub struct RescaledKernel {
    pub kernel: KernelSpec,
    pub eps: f64,
    pub scale: f64,
}

pub fn rescaled_kernel(k: &KernelSpec, g: &SpeedFunction, eps: f64) -> Result<RescaledKernel> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(LdpError::InvalidParameter(format!("eps={eps} outside (0, 1)")));
    }
    let scale = g.at(eps)?;
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(LdpError::InvalidParameter(format!("speed g({eps})={scale} is not positive")));
    }
    Ok(RescaledKernel {
        kernel: k.clone(),
        eps,
        scale,
    })
}

impl Covariance for RescaledKernel {
    fn cov(&self, s: f64, t: f64) -> Result<f64> {
        check_unit(s, t)?;
        Ok(self.scale * kernel_eval(&self.kernel, self.eps * s, self.eps * t)?)
    }

    fn label(&self) -> String {
        format!("rescaled[{}; eps={:e}]", self.kernel.name(), self.eps)
    }

    fn increment(&self, s: f64, t: f64) -> Result<f64> {
        check_unit(s, t)?;
        Ok(self.scale * self.kernel.increment(self.eps * s, self.eps * t)?)
    }
}

fn rl_or_bm(alpha: f64) -> LimitKernel {
    if alpha == 0.0 {
        LimitKernel::BrownianMotion
    } else {
        LimitKernel::RiemannLiouville { alpha }
    }
}

/// Small-time limit of `g(ε) k(ε·, ε·)` with `g = 1/k(ε, ε)`.
pub fn limit_kernel(k: &KernelSpec) -> Result<LimitKernel> {
    match k {
        KernelSpec::FBm { hurst } => Ok(LimitKernel::FBm { hurst: *hurst }),
        KernelSpec::RiemannLiouville { alpha, .. } => Ok(rl_or_bm(*alpha)),
        KernelSpec::Volterra(v) => {
            let alpha = v.integrand.alpha();
            if alpha == -0.5 {
                Ok(LimitKernel::DiagonalIndicator)
            } else {
                Ok(rl_or_bm(alpha))
            }
        }
        KernelSpec::Mixture(m) => {
            let h0 = m.measure.support_min().ok_or(LdpError::EmptyMeasure)?;
            Ok(match m.family {
                MixtureFamily::FBm => LimitKernel::FBm { hurst: h0 },
                MixtureFamily::RiemannLiouville => rl_or_bm(h0 - 0.5),
            })
        }
        KernelSpec::Tabulated(t) => Err(LdpError::Unclassified(format!(
            "no limit kernel for tabulated kernel {}",
            t.name()
        ))),
    }
}

/// Max over `λ` and grid pairs of `|k⁰(λs,λt)/λ^β - k⁰(s,t)| / max(|k⁰(s,t)|, 1e-300)`.
pub fn homogeneity_check(k0: &LimitKernel, lambdas: &[f64], times: &[f64]) -> Result<f64> {
    if !k0.is_continuous() {
        return Err(LdpError::DiscontinuousLimit(k0.name()));
    }
    let beta = k0.beta();
    let mut worst = 0.0f64;
    for &lambda in lambdas {
        if !(lambda > 0.0) {
            return Err(LdpError::InvalidParameter(format!("lambda={lambda} must be positive")));
        }
        for (i, &s) in times.iter().enumerate() {
            for &t in &times[i..] {
                let base = k0.eval(s, t)?;
                let scaled = k0.eval(lambda * s, lambda * t)? / lambda.powf(beta);
                worst = worst.max((scaled - base).abs() / base.abs().max(1e-300));
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KolmogorovEstimate {
    pub c_estimate: f64,
    pub argmax: (f64, f64),
}

/// `sup_{s≠t} E|X_t - X_s|² / |t-s|^β` over pairs of grid points.
pub fn kolmogorov_check<K: Covariance + ?Sized>(
    k: &K,
    beta: f64,
    times: &[f64],
) -> Result<KolmogorovEstimate> {
    if !(beta > 0.0) {
        return Err(LdpError::InvalidParameter(format!("beta={beta} must be positive")));
    }
    let mut best = KolmogorovEstimate {
        c_estimate: 0.0,
        argmax: (f64::NAN, f64::NAN),
    };
    for (i, &s) in times.iter().enumerate() {
        for &t in &times[i + 1..] {
            if s == t {
                continue;
            }
            let r = k.increment(s, t)? / (t - s).abs().powf(beta);
            if r > best.c_estimate || best.argmax.0.is_nan() {
                best = KolmogorovEstimate {
                    c_estimate: r,
                    argmax: (s, t),
                };
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncrementRecord {
    pub s: f64,
    pub t: f64,
    /// `E|X_t - X_s|²`.
    pub increment: f64,
    /// `H2(|t-s|)`.
    pub h2_gap: f64,
    pub upper_bound: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncrementReport {
    pub monotonicity: Monotonicity,
    pub records: Vec<IncrementRecord>,
}

impl IncrementReport {
    pub fn all_ok(&self) -> bool {
        self.records.iter().all(|r| r.lower_ok && r.upper_ok)
    }
}

fn le_rel(a: f64, b: f64) -> bool {
    a <= b + BOUND_RTOL * b.abs().max(a.abs())
}

/// Increment sandwich for a Volterra kernel on all ordered grid pairs
/// (including `s = t`). Lower bound `H2(|t-s|)` always; upper bound
/// `2 H2(|t-s|)` when `h²` is non-increasing, `H2(t) - H2(s) + H2(t-s)` when
/// non-decreasing.
pub fn increment_bounds_check(k: &VolterraKernel, times: &[f64]) -> Result<IncrementReport> {
    let monotonicity = classify_monotonicity(k.integrand.h_squared())?;
    let mut records = Vec::new();
    for (i, &s) in times.iter().enumerate() {
        for &t in &times[i..] {
            check_unit(s, t)?;
            let (s, t) = if s <= t { (s, t) } else { (t, s) };
            let increment = k.increment_variance(s, t)?;
            let h2_gap = k.variance(t - s)?;
            let dec = 2.0 * h2_gap;
            let inc = k.variance(t)? - k.variance(s)? + h2_gap;
            let upper_bound = match monotonicity {
                Monotonicity::NonIncreasing => dec,
                Monotonicity::NonDecreasing => inc,
                Monotonicity::Constant => dec.min(inc),
            };
            records.push(IncrementRecord {
                s,
                t,
                increment,
                h2_gap,
                upper_bound,
                lower_ok: le_rel(h2_gap, increment),
                upper_ok: le_rel(increment, upper_bound),
            });
        }
    }
    Ok(IncrementReport {
        monotonicity,
        records,
    })
}
