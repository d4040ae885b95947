//! Batch command-line driver for `smalltime-ldp`.
//!
//! ```text
//! smalltime-ldp [--config FILE] [--threads N] <subcommand> [key=value | --key=value]...
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod build;
mod check;
mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use check::run_checks;
pub use commands::display_value;
pub use config::{parse_seed, CliError, Config, DEFAULT_SEED, SEED_ENV};

#[derive(Parser, Debug)]
#[command(name = "smalltime-ldp", version, about = "Small-time large deviations for Gaussian processes")]
struct Cli {
    /// Flat `key = value` config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Overrides {
    /// Config overrides, `key=value` or `--key=value`
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print k(s, t)
    KernelEval(Overrides),
    /// Covariance-limit sweep, writes sweep_<name>.csv/json
    LimitSweep(Overrides),
    /// Mixture speed against its asymptote
    SpeedSweep(Overrides),
    /// Exact marginal tail on the normalized log scale
    TailRate(Overrides),
    /// Monte Carlo estimate of the sup-event rate
    SupRateMc(Overrides),
    /// Super-rough diagnostics, three sweeps
    Superrough(Overrides),
    /// Rate function of a vector (fd) or a grid path (path)
    Rate(Overrides),
    /// Sample paths, writes paths.csv and gram.csv
    Simulate(Overrides),
    /// Run the invariant suite
    Check(Overrides),
}

fn dispatch(command: &Command, cfg: &Config) -> Result<(i32, String), CliError> {
    let tol = build::tolerances(cfg)?;
    let out = match command {
        Command::KernelEval(_) => commands::kernel_eval_cmd(cfg, &tol)?,
        Command::LimitSweep(_) => commands::limit_sweep(cfg, &tol)?,
        Command::SpeedSweep(_) => commands::speed_sweep(cfg, &tol)?,
        Command::TailRate(_) => commands::tail_rate(cfg, &tol)?,
        Command::SupRateMc(_) => commands::sup_rate_mc(cfg, &tol)?,
        Command::Superrough(_) => commands::superrough(cfg, &tol)?,
        Command::Rate(_) => commands::rate(cfg, &tol)?,
        Command::Simulate(_) => commands::simulate(cfg, &tol)?,
        Command::Check(_) => {
            let k = commands::kernel_or_default(cfg, &tol)?;
            let (ok, text) = run_checks(&k, &tol);
            return Ok((if ok { 0 } else { 3 }, text));
        }
    };
    Ok((0, out))
}

fn overrides(c: &Command) -> &[String] {
    match c {
        Command::KernelEval(o)
        | Command::LimitSweep(o)
        | Command::SpeedSweep(o)
        | Command::TailRate(o)
        | Command::SupRateMc(o)
        | Command::Superrough(o)
        | Command::Rate(o)
        | Command::Simulate(o)
        | Command::Check(o) => &o.set,
    }
}

struct Globals {
    config: Option<PathBuf>,
    threads: Option<usize>,
    rest: Vec<String>,
}

/// Pull `--config`/`--threads` out of the trailing overrides, where clap
/// leaves them when they follow the subcommand.
fn split_globals(cli: &Cli) -> Result<Globals, CliError> {
    let (mut config, mut threads) = (cli.config.clone(), cli.threads);
    let mut rest = Vec::new();
    let mut it = overrides(&cli.command).iter();
    while let Some(a) = it.next() {
        let (flag, inline) = match a.split_once('=') {
            Some((f, v)) => (f, Some(v.to_string())),
            None => (a.as_str(), None),
        };
        if flag != "--config" && flag != "--threads" {
            rest.push(a.clone());
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => it
                .next()
                .cloned()
                .ok_or_else(|| CliError::Config(format!("{flag} needs a value")))?,
        };
        if flag == "--config" {
            config = Some(PathBuf::from(value));
        } else {
            threads = Some(
                value
                    .parse()
                    .map_err(|_| CliError::Config(format!("cannot parse --threads {value:?}")))?,
            );
        }
    }
    Ok(Globals { config, threads, rest })
}

fn execute(cli: &Cli) -> Result<(i32, String), CliError> {
    let Globals { config, threads, rest } = split_globals(cli)?;
    let mut cfg = match &config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    cfg.apply_overrides(&rest)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("cannot start thread pool: {e}")))?;
    pool.install(|| dispatch(&cli.command, &cfg))
}

/// Run with full argv (program name first); returns the exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok((code, text)) => {
            if !text.is_empty() {
                println!("{text}");
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
