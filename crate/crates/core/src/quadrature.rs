//! Adaptive Gauss–Kronrod (10/21) quadrature with endpoint substitutions.
//!
//! The driver bisects the interval with the largest error estimate until the
//! summed estimate falls below `max(abs_tol, rel_tol * |I|)`. Two helpers
//! regularize the integrals that show up for regularly varying kernels:
//!
//! * [`Quadrature::integrate_left_singular`] removes an algebraic endpoint
//!   singularity `(x - a)^index` by the substitution `v = (x - a)^(index + 1)`;
//! * [`Quadrature::integrate_to_infinity`] maps `[a, inf)` onto `[0, 1)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{LdpError, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_600_525_478,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// 10-point Gauss weights for the odd-indexed Kronrod nodes.
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Result of a converged integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 0.0,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    res_abs: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut res_abs = kronrod.abs();
    let mut fv = [0.0f64; 20];
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    if !kronrod.is_finite() || !fc.is_finite() {
        return Err(LdpError::NonFinite(format!(
            "integrand not finite on [{a}, {b}]"
        )));
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((value, err, res_abs))
}

impl Quadrature {
    pub fn new(rel_tol: f64, max_intervals: usize) -> Self {
        Self {
            rel_tol,
            abs_tol: 0.0,
            max_intervals,
        }
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    /// Integrate `f` over `[a, b]`. Reversed bounds flip the sign.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> Result<QuadResult> {
        if a == b {
            return Ok(QuadResult {
                value: 0.0,
                error: 0.0,
                intervals: 0,
            });
        }
        if b < a {
            let r = self.integrate(f, b, a)?;
            return Ok(QuadResult {
                value: -r.value,
                ..r
            });
        }
        let (v0, e0, r0) = gauss_kronrod(&mut f, a, b)?;
        let mut heap = BinaryHeap::new();
        heap.push(Segment {
            a,
            b,
            value: v0,
            error: e0,
            res_abs: r0,
        });
        let mut total = v0;
        let mut total_err = e0;
        let mut total_abs = r0;
        // segments too narrow to split further; their error is final
        let mut frozen_err = 0.0;
        let mut frozen_val = 0.0;
        loop {
            // roundoff floor: at most 100 ulps of ∫|f|
            let tol = self
                .abs_tol
                .max(self.rel_tol * total.abs())
                .max(100.0 * f64::EPSILON * total_abs);
            if total_err <= tol {
                break;
            }
            if heap.len() >= self.max_intervals {
                return Err(LdpError::QuadratureFailure {
                    estimate: total,
                    error: total_err,
                    intervals: heap.len(),
                });
            }
            let Some(seg) = heap.pop() else { break };
            let mid = 0.5 * (seg.a + seg.b);
            if mid <= seg.a || mid >= seg.b || (seg.b - seg.a) < 1e-15 * seg.a.abs().max(seg.b.abs()) {
                frozen_err += seg.error;
                frozen_val += seg.value;
                if heap.is_empty() {
                    break;
                }
                continue;
            }
            let (v1, e1, r1) = gauss_kronrod(&mut f, seg.a, mid)?;
            let (v2, e2, r2) = gauss_kronrod(&mut f, mid, seg.b)?;
            total += v1 + v2 - seg.value;
            total_err += e1 + e2 - seg.error;
            total_abs += r1 + r2 - seg.res_abs;
            heap.push(Segment {
                a: seg.a,
                b: mid,
                value: v1,
                error: e1,
                res_abs: r1,
            });
            heap.push(Segment {
                a: mid,
                b: seg.b,
                value: v2,
                error: e2,
                res_abs: r2,
            });
        }
        // resum to shed accumulated drift in the running totals
        let n = heap.len();
        let mut value = frozen_val;
        let mut error = frozen_err;
        for seg in heap {
            value += seg.value;
            error += seg.error;
        }
        let tol = self
            .abs_tol
            .max(self.rel_tol * value.abs())
            .max(100.0 * f64::EPSILON * total_abs);
        if error > tol && frozen_err > 0.0 && frozen_err > tol {
            return Err(LdpError::QuadratureFailure {
                estimate: value,
                error,
                intervals: n,
            });
        }
        Ok(QuadResult {
            value,
            error,
            intervals: n,
        })
    }

    /// Integrate `f` over `[a, b]` where `f(x) ~ (x - a)^index` near `a`,
    /// `index > -1`. Uses `v = (x - a)^p`, `p = index + 1`, which turns the
    /// leading power into a constant.
    pub fn integrate_left_singular<F: FnMut(f64) -> f64>(
        &self,
        mut f: F,
        a: f64,
        b: f64,
        index: f64,
    ) -> Result<QuadResult> {
        if !(index > -1.0) {
            return Err(LdpError::NonIntegrable(format!(
                "endpoint index {index} <= -1"
            )));
        }
        if b <= a {
            return Ok(QuadResult {
                value: 0.0,
                error: 0.0,
                intervals: 0,
            });
        }
        let p = index + 1.0;
        let inv_p = 1.0 / p;
        let upper = (b - a).powf(p);
        let g = |v: f64| {
            if v <= 0.0 {
                return 0.0;
            }
            let lv = v.ln();
            let x_off = (inv_p * lv).exp();
            if x_off == 0.0 {
                // below representable offsets; measure-zero contribution
                return 0.0;
            }
            let jac = ((inv_p - 1.0) * lv).exp() * inv_p;
            f(a + x_off) * jac
        };
        self.integrate(g, 0.0, upper)
    }

    /// Integrate `f` over `[a, inf)` with `x = a + y / (1 - y)`.
    pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64) -> Result<QuadResult> {
        let g = |y: f64| {
            let one_minus = 1.0 - y;
            if one_minus <= 0.0 {
                return 0.0;
            }
            let x = a + y / one_minus;
            if !x.is_finite() {
                return 0.0;
            }
            f(x) / (one_minus * one_minus)
        };
        self.integrate(g, 0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let q = Quadrature::default();
        let r = q.integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0).unwrap();
        assert!((r.value - 0.0).abs() < 1e-14);
        let r = q.integrate(|x| x.powi(6), -1.0, 1.0).unwrap();
        assert!((r.value - 2.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let q = Quadrature::default();
        let r = q.integrate(f64::exp, 1.0, 0.0).unwrap();
        assert!((r.value + (std::f64::consts::E - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn algebraic_singularity_via_substitution() {
        let q = Quadrature::new(1e-10, 500);
        // ∫_0^1 x^{-0.9} dx = 10
        let r = q
            .integrate_left_singular(|x| x.powf(-0.9), 0.0, 1.0, -0.9)
            .unwrap();
        assert!((r.value - 10.0).abs() < 1e-8, "{}", r.value);
        // log singularity survives the substitution but stays integrable
        let r = q
            .integrate_left_singular(|x| x.powf(-0.5) * (-x.ln()), 0.0, 1.0, -0.5)
            .unwrap();
        assert!((r.value - 4.0).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn semi_infinite_power_tail() {
        let q = Quadrature::new(1e-10, 500);
        let r = q.integrate_to_infinity(|x| x.powi(-3), 2.0).unwrap();
        assert!((r.value - 0.125).abs() < 1e-11);
        let r = q.integrate_to_infinity(|x| (-x).exp(), 0.0).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let q = Quadrature::new(1e-14, 4);
        let err = q.integrate(|x| (1.0 / x).sin(), 1e-6, 1.0).unwrap_err();
        assert!(matches!(err, LdpError::QuadratureFailure { .. }));
    }
}
