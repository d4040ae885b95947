//! Convolution Volterra processes `X_t = ∫_0^t h(t - s) dB_s`.

use std::fmt;
use std::sync::Arc;

use crate::error::{LdpError, Result};
use crate::quadrature::Quadrature;
use crate::rv_calculus::{rv_h2, RVFunction, ScalarFn};
use crate::tolerances::Tolerances;

/// Fraction of `s` handled by the endpoint-substituted piece.
const SPLIT_FRACTION: f64 = 1e-3;

/// The integrand `h`, its index `alpha`, and `h²` in Karamata form.
#[derive(Clone)]
pub struct VolterraIntegrand {
    name: String,
    alpha: f64,
    h: ScalarFn,
    h_squared: RVFunction,
    h2_closed: Option<ScalarFn>,
}

impl fmt::Debug for VolterraIntegrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VolterraIntegrand")
            .field("name", &self.name)
            .field("alpha", &self.alpha)
            .field("h2_closed", &self.h2_closed.is_some())
            .finish()
    }
}

impl VolterraIntegrand {
    pub fn new(
        name: impl Into<String>,
        alpha: f64,
        h: ScalarFn,
        h_squared: RVFunction,
    ) -> Result<Self> {
        if !(alpha >= -0.5) {
            return Err(LdpError::InvalidParameter(format!(
                "index alpha={alpha} must be >= -1/2 for a square integrable h"
            )));
        }
        Ok(Self {
            name: name.into(),
            alpha,
            h,
            h_squared,
            h2_closed: None,
        })
    }

    pub fn with_h2_closed(mut self, h2: ScalarFn) -> Self {
        self.h2_closed = Some(h2);
        self
    }

    /// `h(u) = u^alpha`.
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > -0.5) {
            return Err(LdpError::InvalidParameter(format!(
                "power integrand needs alpha > -1/2, got {alpha}"
            )));
        }
        let p = 2.0 * alpha + 1.0;
        Ok(Self::new(
            format!("u^{alpha}"),
            alpha,
            Arc::new(move |u: f64| u.powf(alpha)),
            RVFunction::power(2.0 * alpha, 1.0)?,
        )?
        .with_h2_closed(Arc::new(move |t: f64| t.powf(p) / p)))
    }

    /// `h(u) = u^alpha (-ln u)^beta` on `(0, 1)`.
    pub fn power_log(alpha: f64, beta: f64) -> Result<Self> {
        if alpha == -0.5 {
            return Self::super_rough(-beta);
        }
        Self::new(
            format!("u^{alpha}(-ln u)^{beta}"),
            alpha,
            Arc::new(move |u: f64| u.powf(alpha) * (-u.ln()).powf(beta)),
            RVFunction::power_log(2.0 * alpha, 2.0 * beta)?,
        )
    }

    /// `h(u) = (sin u / u)^gamma`.
    pub fn sinc_power(gamma: f64) -> Result<Self> {
        Self::new(
            format!("(sin u/u)^{gamma}"),
            0.0,
            Arc::new(move |u: f64| crate::rv_calculus::sinc(u).powf(gamma)),
            RVFunction::sinc_power(2.0 * gamma)?,
        )
    }

    /// Super rough integrand `h(u) = u^{-1/2} (-ln u)^{-gamma}`, `gamma > 1/2`,
    /// with `H2(t) = (-ln t)^{1 - 2 gamma} / (2 gamma - 1)`.
    pub fn super_rough(gamma: f64) -> Result<Self> {
        if !(gamma > 0.5) {
            return Err(LdpError::InvalidParameter(format!(
                "super rough integrand needs gamma > 1/2, got {gamma}"
            )));
        }
        let k = 2.0 * gamma - 1.0;
        Ok(Self::new(
            format!("u^-0.5(-ln u)^-{gamma}"),
            -0.5,
            Arc::new(move |u: f64| u.powf(-0.5) * (-u.ln()).powf(-gamma)),
            RVFunction::power_log(-1.0, -2.0 * gamma)?,
        )?
        .with_h2_closed(Arc::new(move |t: f64| (-t.ln()).powf(-k) / k)))
    }

    /// `h(u) = 1 + u sin(1/u)`.
    pub fn oscillating() -> Result<Self> {
        Self::new(
            "1+u sin(1/u)",
            0.0,
            Arc::new(|u: f64| 1.0 + u * (1.0 / u).sin()),
            RVFunction::oscillating_square()?,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn h(&self, u: f64) -> f64 {
        (self.h)(u)
    }
    pub fn h_squared(&self) -> &RVFunction {
        &self.h_squared
    }
    pub fn has_closed_h2(&self) -> bool {
        self.h2_closed.is_some()
    }

    /// `H2(t) = ∫_0^t h²`; closed form when known, else quadrature.
    pub fn h2(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        match &self.h2_closed {
            Some(f) => Ok(f(t)),
            None => rv_h2(&self.h_squared, t),
        }
    }

    /// [`Self::h2`] forced through quadrature.
    pub fn h2_quadrature(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        rv_h2(&self.h_squared, t)
    }
}

/// `∫_0^s h(d + v) h(v) dv`, the off-diagonal covariance with `d = t - s`.
pub(crate) fn convolution_offdiag<H: Fn(f64) -> f64>(
    h: &H,
    alpha: f64,
    s: f64,
    d: f64,
    tol: &Tolerances,
) -> Result<f64> {
    if s <= 0.0 {
        return Ok(0.0);
    }
    let f = |v: f64| h(d + v) * h(v);
    let m = (SPLIT_FRACTION * s).min(d).min(s);
    let qs = Quadrature::new(tol.quad_rtol_singular, tol.max_subdivisions);
    let q = Quadrature::new(tol.quad_rtol, tol.max_subdivisions);
    let near = qs.integrate_left_singular(f, 0.0, m, alpha)?.value;
    let far = if m < s { q.integrate(f, m, s)?.value } else { 0.0 };
    let v = near + far;
    if !v.is_finite() {
        return Err(LdpError::NonFinite(format!("covariance at s={s}, d={d}")));
    }
    Ok(v)
}

#[derive(Debug, Clone)]
pub struct VolterraKernel {
    pub integrand: VolterraIntegrand,
    pub tol: Tolerances,
}

impl VolterraKernel {
    pub fn new(integrand: VolterraIntegrand) -> Self {
        Self {
            integrand,
            tol: Tolerances::default(),
        }
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn variance(&self, t: f64) -> Result<f64> {
        self.integrand.h2(t)
    }

    pub fn cov(&self, s: f64, t: f64) -> Result<f64> {
        let (s, t) = if s <= t { (s, t) } else { (t, s) };
        if s == 0.0 {
            return Ok(0.0);
        }
        if s == t {
            return self.variance(t);
        }
        let h = |u: f64| self.integrand.h(u);
        convolution_offdiag(&h, self.integrand.alpha, s, t - s, &self.tol)
    }

    /// `E|X_t - X_s|² = H2(|t-s|) + ∫_0^s (h(d+v) - h(v))² dv`, which avoids
    /// the cancellation in `k(t,t) + k(s,s) - 2k(s,t)`.
    pub fn increment_variance(&self, s: f64, t: f64) -> Result<f64> {
        let (s, t) = if s <= t { (s, t) } else { (t, s) };
        let d = t - s;
        if d == 0.0 {
            return Ok(0.0);
        }
        let head = self.integrand.h2(d)?;
        if s == 0.0 {
            return Ok(head);
        }
        let alpha = self.integrand.alpha;
        let h = |u: f64| self.integrand.h(u);
        let f = |v: f64| {
            let diff = h(d + v) - h(v);
            diff * diff
        };
        let m = d.min(s);
        let qs = Quadrature::new(self.tol.quad_rtol_singular, self.tol.max_subdivisions);
        let q = Quadrature::new(self.tol.quad_rtol, self.tol.max_subdivisions);
        let near = if alpha < 0.0 && 2.0 * alpha > -1.0 {
            qs.integrate_left_singular(f, 0.0, m, 2.0 * alpha)?.value
        } else if alpha < 0.0 {
            // log type: v = e^{-x}; past x = 700 only the h(v)² v term survives
            let h2 = self.integrand.h_squared();
            let g = |x: f64| {
                if x > 700.0 {
                    h2.ln_value_neglog(x).map(|l| (l - x).exp()).unwrap_or(f64::NAN)
                } else {
                    let v = (-x).exp();
                    f(v) * v
                }
            };
            qs.integrate_to_infinity(g, -m.ln())?.value
        } else {
            q.integrate(f, 0.0, m)?.value
        };
        let far = if m < s { q.integrate(f, m, s)?.value } else { 0.0 };
        Ok(head + near + far)
    }
}
