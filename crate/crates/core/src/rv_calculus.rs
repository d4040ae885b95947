//! Regularly varying functions at 0 and the speed functions built from them.
//!
//! A regularly varying function of index `beta` is carried in Karamata form
//!
//! ```text
//! f(t) = c(t) * t^beta * exp( ∫_t^{t0} rho(u) / u du ),   c(t) -> c > 0,  rho(t) -> 0
//! ```
//!
//! with `c` and `rho` stored as black boxes. Presets may also carry a direct
//! evaluator, which is preferred by [`RVFunction::value`] and checked against
//! the representation in tests.

use std::fmt;
use std::sync::Arc;

use crate::error::{LdpError, Result};
use crate::kernels::MixingMeasure;
use crate::quadrature::Quadrature;
use crate::tolerances::Tolerances;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `f(t)` and `ln f(e^{-x})`. The log form lets integrals in `x = -ln t`
/// reach depths where `e^{-x}` underflows.
#[derive(Clone)]
pub struct DirectForm {
    pub value: ScalarFn,
    pub ln_at_neglog: ScalarFn,
}

#[derive(Clone)]
pub struct RVFunction {
    name: String,
    beta: f64,
    c: ScalarFn,
    rho: Option<ScalarFn>,
    t0: f64,
    c_limit: f64,
    c_deriv: Option<ScalarFn>,
    direct: Option<DirectForm>,
    tol: Tolerances,
}

impl fmt::Debug for RVFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RVFunction")
            .field("name", &self.name)
            .field("beta", &self.beta)
            .field("t0", &self.t0)
            .field("c_limit", &self.c_limit)
            .field("has_rho", &self.rho.is_some())
            .field("has_c_deriv", &self.c_deriv.is_some())
            .finish()
    }
}

fn arc<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> ScalarFn {
    Arc::new(f)
}

impl RVFunction {
    pub fn new(
        name: impl Into<String>,
        beta: f64,
        c: ScalarFn,
        t0: f64,
        c_limit: f64,
    ) -> Result<Self> {
        if !beta.is_finite() {
            return Err(LdpError::InvalidParameter(format!("index {beta} is not finite")));
        }
        if !(t0 > 0.0 && t0 <= 1.0) {
            return Err(LdpError::InvalidParameter(format!("t0={t0} must lie in (0, 1]")));
        }
        if !(c_limit > 0.0 && c_limit.is_finite()) {
            return Err(LdpError::InvalidParameter(format!(
                "c_limit={c_limit} must be positive"
            )));
        }
        Ok(Self {
            name: name.into(),
            beta,
            c,
            rho: None,
            t0,
            c_limit,
            c_deriv: None,
            direct: None,
            tol: Tolerances::default(),
        })
    }

    pub fn with_rho(mut self, rho: ScalarFn) -> Self {
        self.rho = Some(rho);
        self
    }

    pub fn with_c_deriv(mut self, c_deriv: ScalarFn) -> Self {
        self.c_deriv = Some(c_deriv);
        self
    }

    pub fn with_direct(mut self, value: ScalarFn, ln_at_neglog: ScalarFn) -> Self {
        self.direct = Some(DirectForm {
            value,
            ln_at_neglog,
        });
        self
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    /// `coef * t^beta`.
    pub fn power(beta: f64, coef: f64) -> Result<Self> {
        let f = Self::new(format!("{coef}*t^{beta}"), beta, arc(move |_| coef), 1.0, coef)?;
        Ok(f.with_c_deriv(arc(|_| 0.0)).with_direct(
            arc(move |t| coef * t.powf(beta)),
            arc(move |x| coef.ln() - beta * x),
        ))
    }

    /// `t^beta * (-ln t)^log_power`, represented with `t0 = 1/e`,
    /// `c == 1` and `rho(u) = log_power / (-ln u)`.
    pub fn power_log(beta: f64, log_power: f64) -> Result<Self> {
        let t0 = (-1.0f64).exp();
        let f = Self::new(
            format!("t^{beta}*(-ln t)^{log_power}"),
            beta,
            arc(|_| 1.0),
            t0,
            1.0,
        )?;
        Ok(f.with_rho(arc(move |u| log_power / (-u.ln())))
            .with_c_deriv(arc(|_| 0.0))
            .with_direct(
                arc(move |t| t.powf(beta) * (-t.ln()).powf(log_power)),
                arc(move |x| -beta * x + log_power * x.ln()),
            ))
    }

    /// `(sin t / t)^exponent`: slowly varying with `c = f`, `rho == 0`.
    pub fn sinc_power(exponent: f64) -> Result<Self> {
        let c = arc(move |t| sinc(t).powf(exponent));
        let c_deriv = arc(move |t| exponent * sinc(t).powf(exponent - 1.0) * sinc_deriv(t));
        let f = Self::new(format!("(sin t/t)^{exponent}"), 0.0, c.clone(), 1.0, 1.0)?;
        let c_ln = c.clone();
        Ok(f.with_c_deriv(c_deriv)
            .with_direct(c, arc(move |x| c_ln((-x).exp()).ln())))
    }

    /// `(1 + t sin(1/t))^2`, slowly varying with an unbounded, oscillating `c'`.
    pub fn oscillating_square() -> Result<Self> {
        let c = arc(|t| {
            let b = 1.0 + t * (1.0 / t).sin();
            b * b
        });
        let c_deriv = arc(|t| {
            let b = 1.0 + t * (1.0 / t).sin();
            2.0 * b * ((1.0 / t).sin() - (1.0 / t).cos() / t)
        });
        let f = Self::new("(1+t sin(1/t))^2", 0.0, c.clone(), 1.0, 1.0)?;
        let c_ln = c.clone();
        Ok(f.with_c_deriv(c_deriv)
            .with_direct(c, arc(move |x| c_ln((-x).exp()).ln())))
    }

    /// The integrated function `H(t) = ∫_0^t f(s) ds` in normalized
    /// Karamata form: index `beta + 1`, constant `c`, and
    /// `rho(u) = (beta + 1) - u f(u) / H(u)`.
    pub fn integrated(f: &RVFunction) -> Result<Self> {
        let beta = f.beta + 1.0;
        let t0 = f.t0;
        let h_t0 = rv_h2(f, t0)?;
        let coef = h_t0 / t0.powf(beta);
        let fr = f.clone();
        let rho = arc(move |u| {
            let hu = rv_h2(&fr, u).unwrap_or(f64::NAN);
            let fu = fr.value(u).unwrap_or(f64::NAN);
            beta - u * fu / hu
        });
        let fv = f.clone();
        let fl = f.clone();
        let out = Self::new(format!("int_0^t {}", f.name), beta, arc(move |_| coef), t0, coef)?
            .with_rho(rho)
            .with_c_deriv(arc(|_| 0.0))
            .with_direct(
                arc(move |t| rv_h2(&fv, t).unwrap_or(f64::NAN)),
                arc(move |x| rv_h2_neglog(&fl, x).map(f64::ln).unwrap_or(f64::NAN)),
            )
            .with_tolerances(f.tol);
        Ok(out)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn t0(&self) -> f64 {
        self.t0
    }
    pub fn c_limit(&self) -> f64 {
        self.c_limit
    }
    pub fn c_at(&self, t: f64) -> f64 {
        (self.c)(t)
    }
    pub fn rho_at(&self, t: f64) -> f64 {
        self.rho.as_ref().map_or(0.0, |r| r(t))
    }
    pub fn has_rho(&self) -> bool {
        self.rho.is_some()
    }
    pub fn c_deriv_at(&self, t: f64) -> Option<f64> {
        self.c_deriv.as_ref().map(|d| d(t))
    }
    pub fn has_direct(&self) -> bool {
        self.direct.is_some()
    }
    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    /// `∫_t^{t0} rho(u)/u du`, integrated in `x = -ln u`.
    pub fn rho_integral(&self, t: f64) -> Result<f64> {
        let Some(rho) = &self.rho else {
            return Ok(0.0);
        };
        let x0 = -self.t0.ln();
        let x1 = -t.ln();
        // abs error in the exponent is relative error in the value
        let q = Quadrature::new(self.tol.quad_rtol, self.tol.max_subdivisions)
            .with_abs_tol(self.tol.quad_rtol);
        let r = q.integrate(|x| rho((-x).exp()), x0, x1)?;
        Ok(r.value)
    }

    /// Evaluate through the Karamata representation.
    pub fn rv_eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(LdpError::NonPositiveTime(t));
        }
        let c = (self.c)(t);
        let v = c * t.powf(self.beta) * self.rho_integral(t)?.exp();
        if !v.is_finite() || v <= 0.0 {
            return Err(LdpError::NonFinite(format!("{} at t={t}: {v}", self.name)));
        }
        Ok(v)
    }

    /// Direct evaluator when present, else the representation.
    pub fn value(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(LdpError::NonPositiveTime(t));
        }
        match &self.direct {
            Some(d) => Ok((d.value)(t)),
            None => self.rv_eval(t),
        }
    }

    /// `ln f(e^{-x})`.
    pub fn ln_value_neglog(&self, x: f64) -> Result<f64> {
        match &self.direct {
            Some(d) => Ok((d.ln_at_neglog)(x)),
            None => {
                let t = (-x).exp();
                let c = (self.c)(t);
                Ok(c.ln() - self.beta * x + self.rho_integral(t)?)
            }
        }
    }

    /// `f'(t) = (c'(t)/c(t) + (beta - rho(t))/t) f(t)`.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        let cd = self.c_deriv_at(t).ok_or(LdpError::MissingDerivative)?;
        let f = self.value(t)?;
        Ok((cd / (self.c)(t) + (self.beta - self.rho_at(t)) / t) * f)
    }

    /// Trend test for `rho -> 0` on `t0 * 2^{-j}`, `j = 0..=rho_octaves`.
    pub fn check_rho(&self) -> RhoCheck {
        let n = self.tol.rho_octaves;
        let abs_values: Vec<f64> = (0..=n)
            .map(|j| self.rho_at(self.t0 * 0.5f64.powi(j as i32)).abs())
            .collect();
        let first = abs_values[0];
        let last = abs_values[n];
        let tail = &abs_values[n / 2..];
        let trend_non_increasing = tail.windows(2).all(|w| w[1] <= w[0] + 1e-15);
        let bound = self.tol.rho_tol * first.max(1.0);
        RhoCheck {
            passed: trend_non_increasing && last <= bound,
            final_abs: last,
            bound,
            trend_non_increasing,
            abs_values,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhoCheck {
    pub passed: bool,
    pub final_abs: f64,
    pub bound: f64,
    pub trend_non_increasing: bool,
    pub abs_values: Vec<f64>,
}

pub(crate) fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        let t2 = t * t;
        1.0 - t2 / 6.0 + t2 * t2 / 120.0
    } else {
        t.sin() / t
    }
}

fn sinc_deriv(t: f64) -> f64 {
    // (t cos t - sin t) / t^2, series below 1e-3 to avoid cancellation
    if t.abs() < 1e-3 {
        let t2 = t * t;
        -t / 3.0 + t * t2 / 30.0 - t * t2 * t2 / 840.0
    } else {
        (t * t.cos() - t.sin()) / (t * t)
    }
}

/// `H(t) = ∫_0^t h²(s) ds`.
///
/// Power type (index > -1): substitute `v = s^{index+1}`. Log type
/// (index == -1): substitute `s = e^{-x}` and integrate to infinity after a
/// tail-decay test.
pub fn rv_h2(h_squared: &RVFunction, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(LdpError::NonPositiveTime(t));
    }
    rv_h2_neglog(h_squared, -t.ln())
}

/// [`rv_h2`] at `t = e^{-x}`.
pub fn rv_h2_neglog(h_squared: &RVFunction, x_lower: f64) -> Result<f64> {
    let tol = &h_squared.tol;
    let idx = h_squared.beta;
    if (idx + 1.0).abs() < 1e-12 {
        return log_type_h2(h_squared, x_lower);
    }
    if idx < -1.0 {
        return Err(LdpError::NonIntegrable(format!(
            "index {idx} < -1 for {}",
            h_squared.name
        )));
    }
    let p = idx + 1.0;
    let rtol = if idx < 0.0 { tol.quad_rtol_singular } else { tol.quad_rtol };
    let q = Quadrature::new(rtol, tol.max_subdivisions);
    // ∫_0^{t^p} (1/p) f(v^{1/p}) v^{1/p - 1} dv, assembled in log space
    let upper = (-p * x_lower).exp();
    let ln_p = p.ln();
    let mut failure = None;
    let g = |v: f64| {
        if v <= 0.0 {
            return 0.0;
        }
        let x = -v.ln() / p;
        match h_squared.ln_value_neglog(x) {
            Ok(lf) => (lf - (1.0 - p) * x - ln_p).exp(),
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let r = q.integrate(g, 0.0, upper);
    if let Some(e) = failure {
        return Err(e);
    }
    let v = r?.value;
    if !v.is_finite() || v < 0.0 {
        return Err(LdpError::NonFinite(format!("H2 = {v}")));
    }
    Ok(v)
}

fn log_type_h2(h_squared: &RVFunction, x_lower: f64) -> Result<f64> {
    let tol = &h_squared.tol;
    // f(e^{-x}) e^{-x}, the integrand in x
    let integrand = |x: f64| h_squared.ln_value_neglog(x).map(|lf| (lf - x).exp());
    // local decay exponent of the x-integrand far out; must exceed 1
    let x1 = x_lower.max(1.0) * 1e6;
    let x2 = x1 * 10.0;
    let (g1, g2) = (integrand(x1)?, integrand(x2)?);
    let decay = if g1 > 0.0 && g2 > 0.0 {
        -(g2.ln() - g1.ln()) / 10f64.ln()
    } else if g1 == 0.0 && g2 == 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    if !(decay > 1.0 + 1e-6) {
        return Err(LdpError::NonIntegrable(format!(
            "tail of {} decays like x^-{decay:.4}",
            h_squared.name
        )));
    }
    let q = Quadrature::new(tol.quad_rtol_singular, tol.max_subdivisions);
    let mut failure = None;
    let g = |x: f64| match integrand(x) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let r = q.integrate_to_infinity(g, x_lower);
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r?.value)
}

/// Smallest `A` with `f(εt)/f(ε) <= A t^{β-δ}` over the grids.
#[derive(Debug, Clone, PartialEq)]
pub struct PotterCertificate {
    pub delta: f64,
    pub a: f64,
    pub argmax_eps: f64,
    pub argmax_t: f64,
    /// Per-eps maximum, aligned with the input eps grid.
    pub per_eps: Vec<f64>,
}

pub fn potter_verify(
    f: &RVFunction,
    delta: f64,
    eps_grid: &[f64],
    t_grid: &[f64],
) -> Result<PotterCertificate> {
    let beta = f.beta;
    if !(delta > 0.0) || (beta > 0.0 && delta >= beta) {
        return Err(LdpError::InvalidDelta { delta, beta });
    }
    let mut cert = PotterCertificate {
        delta,
        a: f64::NEG_INFINITY,
        argmax_eps: f64::NAN,
        argmax_t: f64::NAN,
        per_eps: Vec::with_capacity(eps_grid.len()),
    };
    for &eps in eps_grid {
        let base = f.value(eps)?;
        let mut best = f64::NEG_INFINITY;
        for &t in t_grid {
            if !(t > 0.0 && t <= 1.0) {
                return Err(LdpError::InvalidParameter(format!("t={t} outside (0, 1]")));
            }
            let ratio = f.value(eps * t)? / base / t.powf(beta - delta);
            if ratio > best {
                best = ratio;
            }
            if ratio > cert.a {
                cert.a = ratio;
                cert.argmax_eps = eps;
                cert.argmax_t = t;
            }
        }
        cert.per_eps.push(best);
    }
    Ok(cert)
}

/// `ε f'(εt) / f(ε)`; tends to `β t^{β-1}`.
pub fn rv_deriv_ratio(f: &RVFunction, eps: f64, t: f64) -> Result<f64> {
    let x = eps * t;
    if !(x > 0.0) {
        return Err(LdpError::NonPositiveTime(x));
    }
    let cd = f.c_deriv_at(x).ok_or(LdpError::MissingDerivative)?;
    let ratio = f.value(x)? / f.value(eps)?;
    Ok((eps * cd / f.c_at(x) + (f.beta - f.rho_at(x)) / t) * ratio)
}

/// Monotonicity class of `h²` in a right neighbourhood of 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    NonDecreasing,
    NonIncreasing,
    Constant,
}

impl Monotonicity {
    pub fn is_non_increasing(self) -> bool {
        matches!(self, Monotonicity::NonIncreasing | Monotonicity::Constant)
    }
    pub fn is_non_decreasing(self) -> bool {
        matches!(self, Monotonicity::NonDecreasing | Monotonicity::Constant)
    }
}

/// Sign logic: a nonzero index decides by its sign; index 0 decides by the
/// sign of `rho`, then by the sign of `c'` when `rho == 0`. A `c'` that
/// changes sign or grows without bound near 0 is rejected.
pub fn classify_monotonicity(f: &RVFunction) -> Result<Monotonicity> {
    let octaves = f.tol.rho_octaves;
    let per_octave = 16;
    let top = 0.5 * f.t0;
    let grid: Vec<f64> = (0..=octaves * per_octave)
        .map(|j| top * 2f64.powf(-(j as f64) / per_octave as f64))
        .collect();

    if let Some(cd) = &f.c_deriv {
        let vals: Vec<f64> = grid.iter().map(|&t| cd(t)).collect();
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(LdpError::UnclassifiedMonotonicity(format!(
                "c' is not finite for {}",
                f.name
            )));
        }
        let half = vals.len() / 2;
        let shallow = vals[..half].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let deep = vals[half..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if deep > 10.0 * shallow.max(1.0) {
            return Err(LdpError::UnclassifiedMonotonicity(format!(
                "c' of {} is unbounded near 0 (|c'| reaches {deep:.3e})",
                f.name
            )));
        }
        if f.beta == 0.0 && f.rho.is_none() {
            let pos = vals.iter().any(|&v| v > 0.0);
            let neg = vals.iter().any(|&v| v < 0.0);
            return match (pos, neg) {
                (true, true) => Err(LdpError::UnclassifiedMonotonicity(format!(
                    "c' of {} changes sign near 0",
                    f.name
                ))),
                (true, false) => Ok(Monotonicity::NonDecreasing),
                (false, true) => Ok(Monotonicity::NonIncreasing),
                (false, false) => Ok(Monotonicity::Constant),
            };
        }
    }

    if f.beta > 0.0 {
        return Ok(Monotonicity::NonDecreasing);
    }
    if f.beta < 0.0 {
        return Ok(Monotonicity::NonIncreasing);
    }
    match &f.rho {
        Some(rho) => {
            let vals: Vec<f64> = grid.iter().map(|&t| rho(t)).collect();
            if vals.iter().all(|&v| v > 0.0) {
                Ok(Monotonicity::NonIncreasing)
            } else if vals.iter().all(|&v| v < 0.0) {
                Ok(Monotonicity::NonDecreasing)
            } else {
                Err(LdpError::UnclassifiedMonotonicity(format!(
                    "rho of {} has no constant sign near 0",
                    f.name
                )))
            }
        }
        None => Err(LdpError::UnclassifiedMonotonicity(format!(
            "{} is slowly varying with rho == 0 and no c'",
            f.name
        ))),
    }
}

/// `coefficient * ε^{eps_power} * (-ln ε)^{neglog_power}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedAsymptote {
    pub coefficient: f64,
    pub eps_power: f64,
    pub neglog_power: f64,
}

impl SpeedAsymptote {
    pub fn eval(&self, eps: f64) -> f64 {
        self.coefficient * eps.powf(self.eps_power) * (-eps.ln()).powf(self.neglog_power)
    }
}

type FallibleFn = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// A speed `g(ε) -> +inf` as `ε -> 0`.
#[derive(Clone)]
pub struct SpeedFunction {
    label: String,
    eval: FallibleFn,
    asymptote: Option<SpeedAsymptote>,
}

impl fmt::Debug for SpeedFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpeedFunction")
            .field("label", &self.label)
            .field("asymptote", &self.asymptote)
            .finish()
    }
}

impl SpeedFunction {
    pub fn from_fn<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            eval: Arc::new(f),
            asymptote: None,
        }
    }

    /// `g(ε) = ε^{-power}`.
    pub fn power(power: f64) -> Self {
        let asymptote = SpeedAsymptote {
            coefficient: 1.0,
            eps_power: -power,
            neglog_power: 0.0,
        };
        Self::from_fn(format!("eps^-{power}"), move |eps| Ok(eps.powf(-power)))
            .with_asymptote(asymptote)
    }

    pub fn with_asymptote(mut self, asymptote: SpeedAsymptote) -> Self {
        self.asymptote = Some(asymptote);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn asymptote(&self) -> Option<SpeedAsymptote> {
        self.asymptote
    }

    pub fn at(&self, eps: f64) -> Result<f64> {
        (self.eval)(eps)
    }

    /// Strictly increasing as ε decreases along `eps_grid` after `burn_in`
    /// points. `eps_grid` must be decreasing.
    pub fn diverges_on(&self, eps_grid: &[f64], burn_in: usize) -> Result<bool> {
        let vals = eps_grid
            .iter()
            .skip(burn_in)
            .map(|&e| self.at(e))
            .collect::<Result<Vec<_>>>()?;
        Ok(vals.windows(2).all(|w| w[1] > w[0]))
    }
}

/// `g(ε) = 1 / variance_at(ε)`.
pub fn speed_from_variance<F>(variance_at: F) -> SpeedFunction
where
    F: Fn(f64) -> Result<f64> + Send + Sync + 'static,
{
    SpeedFunction::from_fn("1/variance", move |eps| {
        let v = variance_at(eps)?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(LdpError::NonPositiveVariance { eps, value: v });
        }
        Ok(1.0 / v)
    })
}

/// `g(ε) = 1 / ∫ ε^{2H} dμ(H)`: atoms summed exactly, density by quadrature.
pub fn mixture_speed(mu: &MixingMeasure, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(LdpError::InvalidParameter(format!("eps={eps} outside (0, 1)")));
    }
    let h_min = mu.support_min().ok_or(LdpError::EmptyMeasure)?;
    // factor out ε^{2 H_min} so tiny ε does not underflow
    let reduced = mu.integrate_against(|h| eps.powf(2.0 * (h - h_min)))?;
    if !(reduced > 0.0) {
        return Err(LdpError::EmptyMeasure);
    }
    Ok(eps.powf(-2.0 * h_min) / reduced)
}

/// Speed function of a mixture, with the closed-form asymptote when the
/// measure has an atom at its lower end.
pub fn mixture_speed_function(mu: &MixingMeasure) -> SpeedFunction {
    let m = mu.clone();
    let mut g = SpeedFunction::from_fn("mixture", move |eps| mixture_speed(&m, eps));
    if let Some(h0) = mu.support_min() {
        if let Some(mass) = mu.atom_mass_at(h0) {
            g = g.with_asymptote(SpeedAsymptote {
                coefficient: 1.0 / mass,
                eps_power: -2.0 * h0,
                neglog_power: 0.0,
            });
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn rv_eval_pure_power() {
        let f = RVFunction::power(0.5, 2.0).unwrap();
        assert_eq!(f.rv_eval(0.25).unwrap(), 1.0);
        let id = RVFunction::power(1.0, 1.0).unwrap();
        for &t in &[0.1, 0.37, 1.0] {
            assert!(rel(id.rv_eval(t).unwrap(), t) < 1e-15);
        }
    }

    #[test]
    fn rv_eval_log_rho_matches_antiderivative() {
        // ∫_t^{1/e} du / (u(-ln u)) = ln(-ln t), so f(t) = -ln t
        let f = RVFunction::new("-ln t", 0.0, Arc::new(|_| 1.0), (-1.0f64).exp(), 1.0)
            .unwrap()
            .with_rho(Arc::new(|u: f64| 1.0 / (-u.ln())));
        let v = f.rv_eval((-2.0f64).exp()).unwrap();
        assert!((v - 2.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn rv_eval_rejects_nonpositive_time() {
        let f = RVFunction::power(0.5, 1.0).unwrap();
        assert_eq!(f.rv_eval(0.0), Err(LdpError::NonPositiveTime(0.0)));
        assert!(matches!(f.rv_eval(-1.0), Err(LdpError::NonPositiveTime(_))));
    }

    #[test]
    fn representation_agrees_with_direct_forms() {
        let presets = [
            RVFunction::power_log(0.5, 2.0).unwrap(),
            RVFunction::power_log(-1.0, -3.0).unwrap(),
            RVFunction::sinc_power(1.7).unwrap(),
        ];
        for f in &presets {
            for &t in &[1e-9, 1e-4, 0.01, 0.2, f.t0()] {
                let a = f.rv_eval(t).unwrap();
                let b = f.value(t).unwrap();
                assert!(rel(a, b) < 1e-8, "{} at {t}: {a} vs {b}", f.name());
                let ln = f.ln_value_neglog(-t.ln()).unwrap();
                assert!((ln - b.ln()).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn h2_power_law() {
        let h2 = RVFunction::power(0.5, 1.0).unwrap();
        let v = rv_h2(&h2, 1.0).unwrap();
        assert!(rel(v, 1.0 / 1.5) < 1e-9);
        // α = -0.25: ∫_0^t s^{-1/2} = 2√t
        let h2 = RVFunction::power(-0.5, 1.0).unwrap();
        assert!(rel(rv_h2(&h2, 0.09).unwrap(), 0.6) < 1e-9);
    }

    #[test]
    fn h2_super_rough_closed_form() {
        // s^{-1}(-ln s)^{-3}: H2(t) = (-ln t)^{-2} / 2
        let h2 = RVFunction::power_log(-1.0, -3.0).unwrap();
        let v = rv_h2(&h2, (-2.0f64).exp()).unwrap();
        assert!(rel(v, 0.125) < 1e-7, "{v}");
        let v = rv_h2(&h2, 1e-12).unwrap();
        let l = -(1e-12f64).ln();
        assert!(rel(v, 0.5 / (l * l)) < 1e-7, "{v}");
    }

    #[test]
    fn h2_non_integrable_is_rejected() {
        let h2 = RVFunction::power_log(-1.0, -1.0).unwrap();
        assert!(matches!(rv_h2(&h2, 0.1), Err(LdpError::NonIntegrable(_))));
        let h2 = RVFunction::power(-1.2, 1.0).unwrap();
        assert!(matches!(rv_h2(&h2, 0.1), Err(LdpError::NonIntegrable(_))));
    }

    #[test]
    fn h2_power_log_against_expansion() {
        // ∫_0^ε u^{1/2} (-ln u)^2 du = ε^{3/2}/1.5 (L² + (4/3)L + 8/9), L = -ln ε
        let h2 = RVFunction::power_log(0.5, 2.0).unwrap();
        let eps: f64 = 1e-3;
        let l = -eps.ln();
        let exact = eps.powf(1.5) / 1.5 * (l * l + 4.0 / 3.0 * l + 8.0 / 9.0);
        let v = rv_h2(&h2, eps).unwrap();
        assert!(rel(v, exact) < 1e-7, "{v} vs {exact}");
        // leading term alone is off by the next-order factor
        let leading = eps.powf(1.5) / 1.5 * l * l;
        assert!(rel(v, leading) > 0.05);
    }

    #[test]
    fn potter_pure_power_is_one() {
        let f = RVFunction::power(1.5, 1.0).unwrap();
        let eps: Vec<f64> = (2..=6).map(|k| 10f64.powi(-k)).collect();
        let ts: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
        let c = potter_verify(&f, 0.1, &eps, &ts).unwrap();
        assert!((c.a - 1.0).abs() < 1e-12);
        assert_eq!(c.argmax_t, 1.0);
    }

    #[test]
    fn potter_rejects_bad_delta() {
        let f = RVFunction::power(0.0, 1.0).unwrap();
        assert!(matches!(
            potter_verify(&f, 0.0, &[0.1], &[1.0]),
            Err(LdpError::InvalidDelta { .. })
        ));
        let f = RVFunction::power(0.5, 1.0).unwrap();
        assert!(matches!(
            potter_verify(&f, 0.6, &[0.1], &[1.0]),
            Err(LdpError::InvalidDelta { .. })
        ));
    }

    #[test]
    fn potter_h2_power_log_is_stable() {
        let h2 = RVFunction::power_log(0.5, 2.0).unwrap();
        let big_h = RVFunction::integrated(&h2).unwrap();
        let eps: Vec<f64> = (2..=6).map(|k| 10f64.powi(-k)).collect();
        let ts: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
        let c = potter_verify(&big_h, 0.1, &eps, &ts).unwrap();
        assert!(c.a.is_finite());
        let n = c.per_eps.len();
        assert!(rel(c.per_eps[n - 1], c.per_eps[n - 2]) < 0.05);
    }

    #[test]
    fn deriv_ratio_pure_power() {
        let f = RVFunction::power(1.5, 1.0).unwrap();
        for &eps in &[1e-1, 1e-4, 1e-9] {
            assert!((rv_deriv_ratio(&f, eps, 1.0).unwrap() - 1.5).abs() < 1e-14);
            let r = rv_deriv_ratio(&f, eps, 0.5).unwrap();
            assert!(rel(r, 1.5 * 0.5f64.sqrt()) < 1e-14);
        }
    }

    #[test]
    fn deriv_ratio_missing_derivative() {
        let f = RVFunction::new("c", 1.0, Arc::new(|_| 1.0), 1.0, 1.0).unwrap();
        assert_eq!(rv_deriv_ratio(&f, 0.1, 0.5), Err(LdpError::MissingDerivative));
    }

    #[test]
    fn deriv_ratio_of_integrated_power_log_approaches_limit() {
        let h2 = RVFunction::power_log(0.5, 2.0).unwrap();
        let big_h = RVFunction::integrated(&h2).unwrap();
        let target = 1.5 * 0.5f64.sqrt();
        let errs: Vec<f64> = (2..=8)
            .map(|k| (rv_deriv_ratio(&big_h, 10f64.powi(-k), 0.5).unwrap() - target).abs())
            .collect();
        assert!(errs[errs.len() - 1] / target < 0.05, "{errs:?}");
        // the ratio equals ε h²(εt)/H(ε) by construction
        let eps = 1e-5;
        let direct = eps * h2.value(eps * 0.5).unwrap() / rv_h2(&h2, eps).unwrap();
        assert!(rel(rv_deriv_ratio(&big_h, eps, 0.5).unwrap(), direct) < 1e-9);
    }

    #[test]
    fn speeds_from_variance() {
        let g = speed_from_variance(Ok);
        assert!(rel(g.at(1e-4).unwrap(), 1e4) < 1e-15);
        let g = speed_from_variance(|e: f64| Ok(e.powf(1.5)));
        assert!(rel(g.at(0.01).unwrap(), 0.01f64.powf(-1.5)) < 1e-15);
        let g = speed_from_variance(|e: f64| Ok(0.5 * (-e.ln()).powi(-2)));
        let e: f64 = 1e-6;
        assert!(rel(g.at(e).unwrap(), 2.0 * e.ln().powi(2)) < 1e-14);
        let bad = speed_from_variance(|_| Ok(0.0));
        assert!(matches!(bad.at(0.1), Err(LdpError::NonPositiveVariance { .. })));
    }

    #[test]
    fn classification_follows_sign_logic() {
        let cases = [
            (RVFunction::power(0.5, 1.0).unwrap(), Monotonicity::NonDecreasing),
            (RVFunction::power(-0.5, 1.0).unwrap(), Monotonicity::NonIncreasing),
            (RVFunction::power(0.0, 1.0).unwrap(), Monotonicity::Constant),
            (RVFunction::power_log(0.0, 2.0).unwrap(), Monotonicity::NonIncreasing),
            (RVFunction::power_log(0.0, -2.0).unwrap(), Monotonicity::NonDecreasing),
            (RVFunction::sinc_power(2.0).unwrap(), Monotonicity::NonIncreasing),
            (RVFunction::sinc_power(-2.0).unwrap(), Monotonicity::NonDecreasing),
        ];
        for (f, want) in &cases {
            assert_eq!(classify_monotonicity(f).unwrap(), *want, "{}", f.name());
        }
        assert!(matches!(
            classify_monotonicity(&RVFunction::oscillating_square().unwrap()),
            Err(LdpError::UnclassifiedMonotonicity(_))
        ));
    }

    #[test]
    fn rho_trend_check() {
        assert!(RVFunction::power_log(0.5, 2.0).unwrap().check_rho().passed);
        assert!(RVFunction::power_log(-1.0, -3.0).unwrap().check_rho().passed);
        let wobbly = RVFunction::new("w", 0.0, Arc::new(|_| 1.0), 1.0, 1.0)
            .unwrap()
            .with_rho(Arc::new(|u: f64| 0.5 * (1.0 / u).sin()));
        assert!(!wobbly.check_rho().passed);
    }

    #[test]
    fn mixture_speed_single_atom() {
        let mu = MixingMeasure::atomic(vec![(0.3, 1.0)]).unwrap();
        let g = mixture_speed(&mu, 1e-2).unwrap();
        assert!(rel(g, 10f64.powf(1.2)) < 1e-14);
    }

    #[test]
    fn mixture_speed_atom_at_lower_end_dominates() {
        let mu = MixingMeasure::atomic(vec![(0.3, 0.25), (0.7, 2.0)]).unwrap();
        let mut last = f64::INFINITY;
        for k in 1..=12 {
            let eps = 10f64.powi(-k);
            let r = (mixture_speed(&mu, eps).unwrap() * eps.powf(0.6) * 0.25 - 1.0).abs();
            assert!(r <= last);
            last = r;
        }
        assert!(last < 1e-8);
    }
}
