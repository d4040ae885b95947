//! One function per subcommand. Each returns the text printed on stdout.

use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use smalltime_ldp::gaussian_lab::{cholesky_sample, finite_dim_rate, gram_assemble, path_rate};
use smalltime_ldp::io::{fmt_f64, gram_csv, paths_csv, rate_json, sweep_json, write_atomic, write_sweep};
use smalltime_ldp::kernels::{kernel_eval, limit_kernel, Density, KernelSpec};
use smalltime_ldp::ld_verify::{
    cov_limit_sweep, speed_asymptote_sweep, speed_ratio_sweep, sup_event_rate_mc, superrough_diagnostics,
    tail_rate_exact, SweepReport,
};
use smalltime_ldp::nalgebra::DMatrix;
use smalltime_ldp::Tolerances;

use crate::build;
use crate::config::{config_err, parse_list, CliError, CliResult, Config};

fn output_dir(c: &Config) -> CliResult<PathBuf> {
    let dir = PathBuf::from(c.get_str("output_dir").unwrap_or("."));
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Config(format!("cannot create output_dir {}: {e}", dir.display())))?;
    Ok(dir)
}

fn json_line(v: &Value) -> String {
    serde_json::to_string(v).expect("json values always serialize")
}

/// Shortest decimal that survives a round trip at 15 significant digits.
pub fn display_value(v: f64) -> String {
    if !v.is_finite() {
        return fmt_f64(v);
    }
    let rounded: f64 = format!("{v:.14e}").parse().unwrap_or(v);
    format!("{rounded:?}")
}

fn emit_sweep(dir: &Path, name: &str, r: &SweepReport) -> CliResult<Value> {
    write_sweep(dir, name, r)?;
    Ok(sweep_json(r))
}

pub fn kernel_eval_cmd(c: &Config, tol: &Tolerances) -> CliResult<String> {
    let k = build::kernel(c, tol)?;
    let (s, t): (f64, f64) = (c.require("s")?, c.require("t")?);
    Ok(display_value(kernel_eval(&k, s, t)?))
}

fn sweep_tolerance(c: &Config, default: f64) -> CliResult<f64> {
    c.get_or("sweep.tol", default)
}

pub fn limit_sweep(c: &Config, tol: &Tolerances) -> CliResult<String> {
    if build::family(c)? == "superrough" {
        return superrough(c, tol);
    }
    let k = build::kernel(c, tol)?;
    let g = build::speed(c, &k)?;
    let k0 = limit_kernel(&k)?;
    let times = build::grid(c, tol, 5)?;
    let eps = build::eps_grid(c, build::default_eps())?;
    let r = cov_limit_sweep(&k, &g, &k0, times.times(), &eps, sweep_tolerance(c, 1e-2)?, tol)?;
    let name = c.get_str("sweep.name").unwrap_or("limit");
    Ok(json_line(&emit_sweep(&output_dir(c)?, name, &r)?))
}

pub fn speed_sweep(c: &Config, tol: &Tolerances) -> CliResult<String> {
    let mu = build::measure(c)?;
    let eps = build::eps_grid(c, build::default_eps())?;
    let tolerance = sweep_tolerance(c, 0.15)?;
    let r = match mu.density() {
        Some(Density::Polynomial { n }) if mu.atoms().is_empty() => {
            speed_asymptote_sweep(&mu, *n, &eps, tolerance, tol)?
        }
        _ => {
            let g = smalltime_ldp::rv_calculus::mixture_speed_function(&mu);
            let Some(asymptote) = g.asymptote() else {
                return config_err("speed-sweep needs a pure poly:n=k density or an atom at mixture.h0");
            };
            speed_ratio_sweep(&mu, asymptote, &eps, tolerance, tol)?
        }
    };
    let name = c.get_str("sweep.name").unwrap_or("speed");
    Ok(json_line(&emit_sweep(&output_dir(c)?, name, &r)?))
}

pub fn tail_rate(c: &Config, tol: &Tolerances) -> CliResult<String> {
    let k = build::kernel(c, tol)?;
    let g = build::speed(c, &k)?;
    let eps = build::eps_grid(c, build::default_eps())?;
    let r = tail_rate_exact(&k, &g, c.get_or("tail.t", 1.0)?, c.get_or("tail.a", 1.0)?, &eps)?;
    let sweep = r.to_sweep(sweep_tolerance(c, 1e-3)?, tol)?;
    let name = c.get_str("sweep.name").unwrap_or("tail");
    Ok(json_line(&emit_sweep(&output_dir(c)?, name, &sweep)?))
}

pub fn sup_rate_mc(c: &Config, tol: &Tolerances) -> CliResult<String> {
    let k = build::kernel(c, tol)?;
    let g = build::speed(c, &k)?;
    let grid = build::grid(c, tol, 16)?;
    let est = sup_event_rate_mc(
        &k,
        &g,
        &grid,
        c.get_or("mc.level", 1.0)?,
        c.require("mc.eps")?,
        c.get_or("mc.paths", 10_000)?,
        c.seed()?,
        tol,
    )?;
    Ok(json_line(&json!({
        "ci_high": est.ci.1,
        "ci_low": est.ci.0,
        "estimate": est.estimate,
        "hits": est.hits,
        "n_paths": est.n_paths,
        "p_hat": est.p_hat,
    })))
}

pub fn superrough(c: &Config, tol: &Tolerances) -> CliResult<String> {
    let gamma = c.get_or("kernel.gamma", 1.5)?;
    let default: Vec<f64> = (1..=12).map(|j| 10f64.powi(-j)).collect();
    let eps = build::eps_grid(c, default)?;
    let r = superrough_diagnostics(gamma, &eps, c.get_or("s", 0.5)?, c.get_or("t", 1.0)?, tol)?;
    let dir = output_dir(c)?;
    let mut out = Map::new();
    for (name, sweep) in [
        ("superrough_diagonal", &r.diagonal),
        ("superrough_offdiagonal", &r.off_diagonal),
        ("superrough_eigen", &r.eigen),
    ] {
        out.insert(name.into(), emit_sweep(&dir, name, sweep)?);
    }
    out.insert("bound_respected".into(), json!(r.bound_respected(1e-6)));
    Ok(json_line(&Value::Object(out)))
}

/// `a,b;c,d` rows.
fn parse_matrix(v: &str) -> CliResult<DMatrix<f64>> {
    let rows = v
        .split(';')
        .map(|r| parse_list("rate.matrix", r))
        .collect::<CliResult<Vec<_>>>()?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return config_err("rate.matrix must be square, rows separated by ';'");
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn rate(c: &Config, tol: &Tolerances) -> CliResult<String> {
    let r = match c.get_str("rate.mode").unwrap_or("fd") {
        "fd" => {
            let m = parse_matrix(&c.require::<String>("rate.matrix")?)?;
            let x = parse_list("rate.x", &c.require::<String>("rate.x")?)?;
            finite_dim_rate(&m, &x, tol)?
        }
        "path" => {
            let k0 = limit_kernel(&build::kernel(c, tol)?)?;
            let grid = build::grid(c, tol, 16)?;
            let x = match (c.get_str("rate.x"), c.get_str("rate.path")) {
                (Some(v), None) => parse_list("rate.x", v)?,
                (None, Some(p)) => {
                    let slope: f64 = p
                        .strip_prefix("linear:")
                        .and_then(|a| a.trim().parse().ok())
                        .ok_or_else(|| CliError::Config(format!("rate.path: expected linear:<slope>, got {p:?}")))?;
                    grid.times().iter().map(|t| slope * t).collect()
                }
                _ => return config_err("rate mode=path needs exactly one of rate.x or rate.path"),
            };
            path_rate(&k0, &grid, &x, tol)?
        }
        other => return config_err(format!("unknown rate.mode {other:?} (expected fd or path)")),
    };
    Ok(json_line(&rate_json(&r)))
}

pub fn simulate(c: &Config, tol: &Tolerances) -> CliResult<String> {
    let k = build::kernel(c, tol)?;
    let grid = build::grid(c, tol, 64)?;
    let gram = gram_assemble(&k, &grid, tol)?.factorize()?;
    let paths = cholesky_sample(&gram, c.seed()?, c.get_or("paths.n", 3)?)?;
    let dir = output_dir(c)?;
    let (p, g) = (dir.join("paths.csv"), dir.join("gram.csv"));
    write_atomic(&p, &paths_csv(&paths)?)?;
    write_atomic(&g, &gram_csv(&gram)?)?;
    Ok(format!("{}\n{}", p.display(), g.display()))
}

/// Kernel used by `check` when the config names none.
pub fn kernel_or_default(c: &Config, tol: &Tolerances) -> CliResult<KernelSpec> {
    if c.get_str("kernel.family").is_some() {
        build::kernel(c, tol)
    } else {
        Ok(KernelSpec::riemann_liouville(0.25)?.with_tolerances(*tol))
    }
}
