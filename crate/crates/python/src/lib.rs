//! Python bindings for `smalltime-ldp`.

use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use smalltime_ldp::gaussian_lab::{self, Grid, RateEvaluation};
use smalltime_ldp::kernels::{self, KernelSpec, MixingMeasure, MixtureFamily, TabulatedKernel, VolterraIntegrand};
use smalltime_ldp::ld_verify::{self, SweepReport};
use smalltime_ldp::nalgebra::DMatrix;
use smalltime_ldp::rv_calculus::{self, mixture_speed_function, speed_from_variance, SpeedFunction};
use smalltime_ldp::{LdpError, Tolerances};

create_exception!(smalltime_ldp, Refusal, PyException);

fn to_py(e: LdpError) -> PyErr {
    match e {
        LdpError::InsufficientHits { .. }
        | LdpError::Unclassified(_)
        | LdpError::UnclassifiedMonotonicity(_)
        | LdpError::DiscontinuousLimit(_) => Refusal::new_err(e.to_string()),
        e if e.is_numerical() => PyArithmeticError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

trait IntoPyResult<T> {
    fn or_raise(self) -> PyResult<T>;
}

impl<T> IntoPyResult<T> for smalltime_ldp::Result<T> {
    fn or_raise(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn family(name: &str) -> PyResult<MixtureFamily> {
    match name {
        "fbm" => Ok(MixtureFamily::FBm),
        "rl" => Ok(MixtureFamily::RiemannLiouville),
        other => Err(PyValueError::new_err(format!("unknown mixture family {other:?}"))),
    }
}

fn grid(times: Vec<f64>) -> PyResult<Grid> {
    Grid::new(times, Tolerances::default().n_max).or_raise()
}

/// Covariance kernel on `[0, 1]²`.
#[pyclass(module = "smalltime_ldp", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Kernel {
    inner: KernelSpec,
}

#[pymethods]
impl Kernel {
    #[staticmethod]
    fn fbm(hurst: f64) -> PyResult<Self> {
        Ok(Self { inner: KernelSpec::fbm(hurst).or_raise()? })
    }

    /// Normalized Riemann–Liouville kernel, `k(t,t) = t^(2α+1)`.
    #[staticmethod]
    fn rl(alpha: f64) -> PyResult<Self> {
        Ok(Self { inner: KernelSpec::riemann_liouville(alpha).or_raise()? })
    }

    #[staticmethod]
    fn bm() -> PyResult<Self> {
        Self::rl(0.0)
    }

    /// Volterra kernel with `h(u) = u^α (-ln u)^log_power`.
    #[staticmethod]
    #[pyo3(signature = (alpha, log_power = 0.0))]
    fn volterra(alpha: f64, log_power: f64) -> PyResult<Self> {
        let h = if log_power == 0.0 {
            VolterraIntegrand::power(alpha)
        } else {
            VolterraIntegrand::power_log(alpha, log_power)
        };
        Ok(Self { inner: KernelSpec::volterra(h.or_raise()?) })
    }

    /// Volterra kernel with `h(u) = (sin u / u)^γ`.
    #[staticmethod]
    fn volterra_sinc(gamma: f64) -> PyResult<Self> {
        Ok(Self { inner: KernelSpec::volterra(VolterraIntegrand::sinc_power(gamma).or_raise()?) })
    }

    #[staticmethod]
    fn superrough(gamma: f64) -> PyResult<Self> {
        Ok(Self { inner: KernelSpec::volterra(VolterraIntegrand::super_rough(gamma).or_raise()?) })
    }

    /// Mixture over Hurst indices; `atoms` are `(H, mass)` pairs.
    #[staticmethod]
    #[pyo3(signature = (atoms, family = "fbm"))]
    fn mixture(atoms: Vec<(f64, f64)>, family: &str) -> PyResult<Self> {
        let mu = MixingMeasure::atomic(atoms).or_raise()?;
        Ok(Self { inner: KernelSpec::mixture(mu, self::family(family)?) })
    }

    /// Mixture with density `(H - h0)^n dH` on `[h0, h1]`.
    #[staticmethod]
    #[pyo3(signature = (h0, h1, n, family = "fbm"))]
    fn mixture_poly(h0: f64, h1: f64, n: u32, family: &str) -> PyResult<Self> {
        let mu = MixingMeasure::polynomial(h0, h1, n).or_raise()?;
        Ok(Self { inner: KernelSpec::mixture(mu, self::family(family)?) })
    }

    /// Kernel read from an `s,t,k` CSV file.
    #[staticmethod]
    fn tabulated(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(Self { inner: KernelSpec::Tabulated(TabulatedKernel::from_csv_path(&path).or_raise()?) })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name()
    }

    fn __call__(&self, s: f64, t: f64) -> PyResult<f64> {
        kernels::kernel_eval(&self.inner, s, t).or_raise()
    }

    fn variance(&self, t: f64) -> PyResult<f64> {
        self.inner.variance(t).or_raise()
    }

    /// Small-time limit kernel.
    fn limit(&self) -> PyResult<Limit> {
        Ok(Limit { inner: kernels::limit_kernel(&self.inner).or_raise()? })
    }

    /// Gram matrix on `times` as nested lists.
    fn gram(&self, times: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        let g = gaussian_lab::gram_assemble(&self.inner, &grid(times)?, &Tolerances::default()).or_raise()?;
        Ok(g.values.row_iter().map(|r| r.iter().copied().collect()).collect())
    }

    /// Exact Gaussian paths; deterministic in `seed`.
    #[pyo3(signature = (times, n_paths, seed = 0x5EED))]
    fn sample(&self, py: Python<'_>, times: Vec<f64>, n_paths: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
        let grid = grid(times)?;
        let k = self.inner.clone();
        py.detach(move || {
            let g = gaussian_lab::gram_assemble(&k, &grid, &Tolerances::default())?;
            gaussian_lab::cholesky_sample(&g, seed, n_paths)
        })
        .or_raise()
        .map(|ps| ps.into_iter().map(|p| p.values).collect())
    }

    fn __repr__(&self) -> String {
        format!("Kernel({})", self.inner.name())
    }
}

impl Kernel {
    fn default_speed(&self) -> SpeedFunction {
        match &self.inner {
            KernelSpec::Mixture(m) => mixture_speed_function(&m.measure),
            k => {
                let k = k.clone();
                speed_from_variance(move |e| k.variance(e))
            }
        }
    }
}

/// Small-time limit covariance.
#[pyclass(module = "smalltime_ldp", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Limit {
    inner: kernels::LimitKernel,
}

#[pymethods]
impl Limit {
    #[getter]
    fn name(&self) -> String {
        self.inner.name()
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta()
    }

    fn __call__(&self, s: f64, t: f64) -> PyResult<f64> {
        self.inner.eval(s, t).or_raise()
    }

    /// Rate of the grid path `x`.
    fn rate(&self, py: Python<'_>, times: Vec<f64>, x: Vec<f64>) -> PyResult<Py<PyDict>> {
        let r = gaussian_lab::path_rate(&self.inner, &grid(times)?, &x, &Tolerances::default()).or_raise()?;
        rate_dict(py, &r)
    }

    fn __repr__(&self) -> String {
        format!("Limit({})", self.inner.name())
    }
}

/// Regularly varying function at 0.
#[pyclass(module = "smalltime_ldp", frozen)]
struct RegularlyVarying {
    inner: rv_calculus::RVFunction,
}

#[pymethods]
impl RegularlyVarying {
    #[staticmethod]
    #[pyo3(signature = (beta, coef = 1.0))]
    fn power(beta: f64, coef: f64) -> PyResult<Self> {
        Ok(Self { inner: rv_calculus::RVFunction::power(beta, coef).or_raise()? })
    }

    /// `t^beta (-ln t)^log_power`.
    #[staticmethod]
    fn power_log(beta: f64, log_power: f64) -> PyResult<Self> {
        Ok(Self { inner: rv_calculus::RVFunction::power_log(beta, log_power).or_raise()? })
    }

    #[staticmethod]
    fn sinc_power(exponent: f64) -> PyResult<Self> {
        Ok(Self { inner: rv_calculus::RVFunction::sinc_power(exponent).or_raise()? })
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta()
    }

    fn __call__(&self, t: f64) -> PyResult<f64> {
        self.inner.value(t).or_raise()
    }

    /// `∫_0^t f(u) du`.
    fn h2(&self, t: f64) -> PyResult<f64> {
        rv_calculus::rv_h2(&self.inner, t).or_raise()
    }

    /// `ε f'(εt) / f(ε)`.
    fn deriv_ratio(&self, eps: f64, t: f64) -> PyResult<f64> {
        rv_calculus::rv_deriv_ratio(&self.inner, eps, t).or_raise()
    }

    /// Smallest constant in the Potter bound over the given grids.
    fn potter(&self, delta: f64, eps_grid: Vec<f64>, t_grid: Vec<f64>) -> PyResult<f64> {
        Ok(rv_calculus::potter_verify(&self.inner, delta, &eps_grid, &t_grid).or_raise()?.a)
    }

    /// `"non_increasing"` or `"non_decreasing"` near 0.
    fn monotonicity(&self) -> PyResult<&'static str> {
        let m = rv_calculus::classify_monotonicity(&self.inner).or_raise()?;
        Ok(if m.is_non_increasing() { "non_increasing" } else { "non_decreasing" })
    }
}

fn rate_dict(py: Python<'_>, r: &RateEvaluation) -> PyResult<Py<PyDict>> {
    let d = PyDict::new(py);
    d.set_item("value", r.value)?;
    d.set_item("residual", r.residual)?;
    d.set_item("in_range", r.in_range)?;
    Ok(d.unbind())
}

fn sweep_dict(py: Python<'_>, r: &SweepReport) -> PyResult<Py<PyDict>> {
    let d = PyDict::new(py);
    d.set_item("quantity_name", &r.quantity_name)?;
    d.set_item("eps", r.eps_grid.clone())?;
    d.set_item("values", r.values.clone())?;
    d.set_item("targets", r.targets.clone())?;
    d.set_item("errors", r.errors.clone())?;
    d.set_item("tolerance", r.tolerance)?;
    d.set_item("trend_verdict", r.trend_verdict.as_str())?;
    d.set_item("final_error", r.final_error)?;
    d.set_item("pass", r.pass())?;
    Ok(d.unbind())
}

/// Rate `½ xᵀ C⁺ x` of a vector, `inf` outside the range of `C`.
#[pyfunction]
fn finite_dim_rate(py: Python<'_>, matrix: Vec<Vec<f64>>, x: Vec<f64>) -> PyResult<Py<PyDict>> {
    let n = matrix.len();
    if matrix.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    let c = DMatrix::from_fn(n, n, |i, j| matrix[i][j]);
    let r = gaussian_lab::finite_dim_rate(&c, &x, &Tolerances::default()).or_raise()?;
    rate_dict(py, &r)
}

/// Sweep of `g(ε) k(εs, εt)` against the limit kernel on `times`.
#[pyfunction]
#[pyo3(signature = (kernel, times, eps_grid = None, tolerance = 1e-2))]
fn limit_sweep(
    py: Python<'_>,
    kernel: &Kernel,
    times: Vec<f64>,
    eps_grid: Option<Vec<f64>>,
    tolerance: f64,
) -> PyResult<Py<PyDict>> {
    let eps = eps_grid.unwrap_or_else(ld_verify::default_eps_grid);
    let k = kernel.inner.clone();
    let g = kernel.default_speed();
    let r = py
        .detach(move || {
            let k0 = kernels::limit_kernel(&k)?;
            ld_verify::cov_limit_sweep(&k, &g, &k0, &times, &eps, tolerance, &Tolerances::default())
        })
        .or_raise()?;
    sweep_dict(py, &r)
}

/// Mixture speed `1 / ∫ ε^{2H} dμ(H)` for a polynomial density.
#[pyfunction]
fn mixture_speed(h0: f64, h1: f64, n: u32, eps: f64) -> PyResult<f64> {
    let mu = MixingMeasure::polynomial(h0, h1, n).or_raise()?;
    rv_calculus::mixture_speed(&mu, eps).or_raise()
}

/// Ratio of the polynomial-density mixture speed to its asymptote.
#[pyfunction]
#[pyo3(signature = (h0, h1, n, eps_grid = None, tolerance = 0.15))]
fn speed_asymptote_sweep(
    py: Python<'_>,
    h0: f64,
    h1: f64,
    n: u32,
    eps_grid: Option<Vec<f64>>,
    tolerance: f64,
) -> PyResult<Py<PyDict>> {
    let mu = MixingMeasure::polynomial(h0, h1, n).or_raise()?;
    let eps = eps_grid.unwrap_or_else(ld_verify::default_eps_grid);
    let r = ld_verify::speed_asymptote_sweep(&mu, n, &eps, tolerance, &Tolerances::default()).or_raise()?;
    sweep_dict(py, &r)
}

/// `(1/g(ε)) ln P(X_{εt*} > a)` per ε, with the limit prediction.
#[pyfunction]
#[pyo3(signature = (kernel, t_star, a, eps_grid, speed_power = None))]
fn tail_rate(
    py: Python<'_>,
    kernel: &Kernel,
    t_star: f64,
    a: f64,
    eps_grid: Vec<f64>,
    speed_power: Option<f64>,
) -> PyResult<Py<PyDict>> {
    let g = match speed_power {
        Some(p) => SpeedFunction::power(p),
        None => kernel.default_speed(),
    };
    let r = ld_verify::tail_rate_exact(&kernel.inner, &g, t_star, a, &eps_grid).or_raise()?;
    let d = PyDict::new(py);
    d.set_item("normalized_log_probs", r.normalized_log_probs)?;
    d.set_item("limit_prediction", r.limit_prediction)?;
    d.set_item("final_error", r.final_error)?;
    Ok(d.unbind())
}

/// Monte Carlo sup-event rate; raises `Refusal` with too few hits.
#[pyfunction]
#[pyo3(signature = (kernel, times, level, eps, n_paths, seed = 0x5EED))]
fn sup_rate_mc(
    py: Python<'_>,
    kernel: &Kernel,
    times: Vec<f64>,
    level: f64,
    eps: f64,
    n_paths: usize,
    seed: u64,
) -> PyResult<Py<PyDict>> {
    let grid = grid(times)?;
    let k = kernel.inner.clone();
    let g = kernel.default_speed();
    let est = py
        .detach(move || ld_verify::sup_event_rate_mc(&k, &g, &grid, level, eps, n_paths, seed, &Tolerances::default()))
        .or_raise()?;
    let d = PyDict::new(py);
    d.set_item("estimate", est.estimate)?;
    d.set_item("ci", est.ci)?;
    d.set_item("p_hat", est.p_hat)?;
    d.set_item("hits", est.hits)?;
    d.set_item("n_paths", est.n_paths)?;
    Ok(d.unbind())
}

/// Diagonal, off-diagonal and eigenvalue sweeps for the super-rough kernel.
#[pyfunction]
#[pyo3(signature = (gamma, eps_grid, s = 0.5, t = 1.0))]
fn superrough_diagnostics(py: Python<'_>, gamma: f64, eps_grid: Vec<f64>, s: f64, t: f64) -> PyResult<Py<PyDict>> {
    let r = ld_verify::superrough_diagnostics(gamma, &eps_grid, s, t, &Tolerances::default()).or_raise()?;
    let d = PyDict::new(py);
    d.set_item("diagonal", sweep_dict(py, &r.diagonal)?)?;
    d.set_item("off_diagonal", sweep_dict(py, &r.off_diagonal)?)?;
    d.set_item("eigen", sweep_dict(py, &r.eigen)?)?;
    d.set_item("off_diagonal_bound", r.off_diagonal_bound.clone())?;
    d.set_item("eigenvalues", r.eigenvalues.iter().map(|e| (e[0], e[1])).collect::<Vec<_>>())?;
    d.set_item("bound_respected", r.bound_respected(1e-6))?;
    Ok(d.unbind())
}

#[pymodule]
#[pyo3(name = "smalltime_ldp")]
fn init_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Kernel>()?;
    m.add_class::<Limit>()?;
    m.add_class::<RegularlyVarying>()?;
    m.add("Refusal", m.py().get_type::<Refusal>())?;
    m.add_function(wrap_pyfunction!(finite_dim_rate, m)?)?;
    m.add_function(wrap_pyfunction!(limit_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(mixture_speed, m)?)?;
    m.add_function(wrap_pyfunction!(speed_asymptote_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(tail_rate, m)?)?;
    m.add_function(wrap_pyfunction!(sup_rate_mc, m)?)?;
    m.add_function(wrap_pyfunction!(superrough_diagnostics, m)?)?;
    m.add("DEFAULT_SEED", 0x5EEDu64)?;
    Ok(())
}
