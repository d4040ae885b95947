//! Turning a [`Config`] into library objects.

use std::path::PathBuf;

use smalltime_ldp::gaussian_lab::Grid;
use smalltime_ldp::kernels::{
    Density, KernelSpec, MixingMeasure, MixtureFamily, TabulatedKernel, VolterraIntegrand,
};
use smalltime_ldp::ld_verify::{default_eps_grid, geometric_eps_grid};
use smalltime_ldp::rv_calculus::{mixture_speed_function, speed_from_variance, SpeedFunction};
use smalltime_ldp::Tolerances;

use crate::config::{config_err, parse_list, CliError, CliResult, Config};

pub fn tolerances(c: &Config) -> CliResult<Tolerances> {
    let mut tol = Tolerances::default();
    for (field, v) in c.tol_entries() {
        let value: f64 = v
            .parse()
            .map_err(|_| CliError::Config(format!("cannot parse tol.{field}={v:?}")))?;
        tol.set(field, value)
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(tol)
}

fn hurst(c: &Config) -> CliResult<f64> {
    match c.get::<f64>("kernel.hurst")? {
        Some(h) => Ok(h),
        None => c.require("kernel.H"),
    }
}

pub fn family(c: &Config) -> CliResult<&str> {
    c.get_str("kernel.family")
        .ok_or_else(|| CliError::Config("missing required key kernel.family".into()))
}

pub fn kernel(c: &Config, tol: &Tolerances) -> CliResult<KernelSpec> {
    let k = match family(c)? {
        "fbm" => KernelSpec::fbm(hurst(c)?)?,
        "bm" => KernelSpec::riemann_liouville(0.0)?,
        "rl" => KernelSpec::riemann_liouville(c.require("kernel.alpha")?)?,
        "volterra" => KernelSpec::volterra(integrand(c)?),
        "superrough" => KernelSpec::volterra(VolterraIntegrand::super_rough(c.require("kernel.gamma")?)?),
        "mixture" => {
            let fam = match c.get_str("mixture.family").unwrap_or("fbm") {
                "fbm" => MixtureFamily::FBm,
                "rl" => MixtureFamily::RiemannLiouville,
                other => return config_err(format!("unknown mixture family {other:?}")),
            };
            KernelSpec::mixture(measure(c)?, fam)
        }
        "tabulated" => {
            let path: PathBuf = c.require("kernel.csv")?;
            let t = TabulatedKernel::from_csv_path(&path)
                .map_err(|e| CliError::Config(format!("kernel.csv {}: {e}", path.display())))?;
            KernelSpec::Tabulated(t)
        }
        other => return config_err(format!("unknown kernel family {other:?}")),
    };
    Ok(k.with_tolerances(*tol))
}

fn integrand(c: &Config) -> CliResult<VolterraIntegrand> {
    let log_power = c.get_or("kernel.log_power", 0.0)?;
    let h = c
        .get_str("kernel.h")
        .unwrap_or(if log_power != 0.0 { "power_log" } else { "power" });
    Ok(match h {
        "power" => VolterraIntegrand::power(c.require("kernel.alpha")?)?,
        "power_log" => VolterraIntegrand::power_log(c.require("kernel.alpha")?, log_power)?,
        "sinc" => VolterraIntegrand::sinc_power(c.require("kernel.gamma")?)?,
        "superrough" => VolterraIntegrand::super_rough(c.require("kernel.gamma")?)?,
        "oscillating" => VolterraIntegrand::oscillating()?,
        other => return config_err(format!("unknown Volterra integrand {other:?}")),
    })
}

/// `mixture.atoms=H:m,H:m`, `mixture.density=poly:n=k`, `mixture.h0`, `mixture.h1`.
pub fn measure(c: &Config) -> CliResult<MixingMeasure> {
    let atoms = match c.get_str("mixture.atoms") {
        None | Some("") => Vec::new(),
        Some(v) => v
            .split(',')
            .map(|a| {
                let parsed = a
                    .split_once(':')
                    .and_then(|(h, m)| Some((h.trim().parse().ok()?, m.trim().parse().ok()?)));
                parsed.ok_or_else(|| CliError::Config(format!("mixture.atoms: cannot parse {a:?} as H:mass")))
            })
            .collect::<CliResult<Vec<(f64, f64)>>>()?,
    };
    let density = match c.get_str("mixture.density") {
        None | Some("none") => None,
        Some(v) => {
            let n = v
                .strip_prefix("poly:n=")
                .and_then(|n| n.trim().parse::<u32>().ok())
                .ok_or_else(|| CliError::Config(format!("mixture.density: expected poly:n=<k>, got {v:?}")))?;
            Some(Density::Polynomial { n })
        }
    };
    let lo = atoms.iter().map(|a| a.0).fold(f64::INFINITY, f64::min);
    let hi = atoms.iter().map(|a| a.0).fold(f64::NEG_INFINITY, f64::max);
    let (h0, h1) = match (c.get::<f64>("mixture.h0")?, c.get::<f64>("mixture.h1")?) {
        (Some(a), Some(b)) => (a, b),
        (a, b) if density.is_none() && !atoms.is_empty() => (a.unwrap_or(lo), b.unwrap_or(hi)),
        _ => return config_err("mixture with a density needs mixture.h0 and mixture.h1"),
    };
    Ok(MixingMeasure::new(h0, h1, atoms, density)?)
}

/// `speed=auto|variance|mixture|power`; auto picks mixture for mixtures.
pub fn speed(c: &Config, k: &KernelSpec) -> CliResult<SpeedFunction> {
    let mode = c.get_str("speed").unwrap_or("auto");
    Ok(match (mode, k) {
        ("auto" | "mixture", KernelSpec::Mixture(m)) => mixture_speed_function(&m.measure),
        ("mixture", _) => return config_err("speed=mixture needs kernel.family=mixture"),
        ("auto" | "variance", _) => {
            let k = k.clone();
            speed_from_variance(move |e| k.variance(e))
        }
        ("power", _) => SpeedFunction::power(c.require("speed.power")?),
        (other, _) => return config_err(format!("unknown speed {other:?}")),
    })
}

pub fn grid(c: &Config, tol: &Tolerances, default_n: usize) -> CliResult<Grid> {
    Ok(match c.get_str("grid.times") {
        Some(v) => Grid::new(parse_list("grid.times", v)?, tol.n_max)?,
        None => Grid::uniform(c.get_or("grid.n", default_n)?, tol.n_max)?,
    })
}

pub fn eps_grid(c: &Config, default: Vec<f64>) -> CliResult<Vec<f64>> {
    let eps = if let Some(v) = c.get_str("eps.list") {
        parse_list("eps.list", v)?
    } else if c.get_str("eps.start").is_some() || c.get_str("eps.stop").is_some() {
        geometric_eps_grid(
            c.require("eps.start")?,
            c.require("eps.stop")?,
            c.get_or("eps.count", 8)?,
        )?
    } else {
        default
    };
    if eps.is_empty() {
        return config_err("eps grid is empty");
    }
    if eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) || eps.windows(2).any(|w| !(w[1] < w[0])) {
        return config_err("eps grid must be strictly decreasing inside (0, 1)");
    }
    Ok(eps)
}

pub fn default_eps() -> Vec<f64> {
    default_eps_grid()
}
