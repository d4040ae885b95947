//! Flat `key = value` configuration with dotted keys.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use smalltime_ldp::LdpError;

/// Seed used when neither the config nor the environment provides one.
pub const DEFAULT_SEED: u64 = 0x5EED;
pub const SEED_ENV: &str = "SMALLTIME_LDP_SEED";

const KNOWN: &[&str] = &[
    "kernel.family",
    "kernel.hurst",
    "kernel.H",
    "kernel.alpha",
    "kernel.log_power",
    "kernel.gamma",
    "kernel.h",
    "kernel.csv",
    "mixture.atoms",
    "mixture.density",
    "mixture.h0",
    "mixture.h1",
    "mixture.family",
    "speed",
    "speed.power",
    "grid.n",
    "grid.times",
    "eps.start",
    "eps.stop",
    "eps.count",
    "eps.list",
    "seed",
    "output_dir",
    "s",
    "t",
    "sweep.name",
    "sweep.tol",
    "rate.mode",
    "rate.x",
    "rate.matrix",
    "rate.path",
    "paths.n",
    "tail.a",
    "tail.t",
    "mc.level",
    "mc.eps",
    "mc.paths",
];

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Lib(LdpError),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<LdpError> for CliError {
    fn from(e: LdpError) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    /// 0 ok, 2 configuration, 3 numerical failure, 4 refusal.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Lib(e) => match e {
                LdpError::InsufficientHits { .. }
                | LdpError::Unclassified(_)
                | LdpError::UnclassifiedMonotonicity(_)
                | LdpError::DiscontinuousLimit(_) => 4,
                LdpError::Io(_) => 3,
                e if e.is_numerical() => 3,
                _ => 2,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn config_err<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Config(msg.into()))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    /// Parse `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut c = Config::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return config_err(format!("line {}: expected key = value, got {raw:?}", n + 1));
            };
            c.set(k.trim(), v.trim())?;
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Apply `key=value` or `--key=value` overrides.
    pub fn apply_overrides(&mut self, args: &[String]) -> CliResult<()> {
        for a in args {
            let body = a.strip_prefix("--").unwrap_or(a);
            let Some((k, v)) = body.split_once('=') else {
                return config_err(format!("override {a:?} is not key=value"));
            };
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        if !(KNOWN.contains(&key) || key.starts_with("tol.")) {
            return config_err(format!("unknown key {key:?}"));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| CliError::Config(format!("cannot parse {key}={v:?}"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> CliResult<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> CliResult<T> {
        self.get(key)?
            .ok_or_else(|| CliError::Config(format!("missing required key {key}")))
    }

    pub fn tol_entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries
            .iter()
            .filter_map(|(k, v)| k.strip_prefix("tol.").map(|f| (f, v.as_str())))
    }

    /// Config seed, overridden by the environment variable.
    pub fn seed(&self) -> CliResult<u64> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            return parse_seed(&v).ok_or_else(|| CliError::Config(format!("cannot parse {SEED_ENV}={v:?}")));
        }
        match self.get_str("seed") {
            None => Ok(DEFAULT_SEED),
            Some(v) => parse_seed(v).ok_or_else(|| CliError::Config(format!("cannot parse seed={v:?}"))),
        }
    }
}

/// Decimal or `0x`-prefixed hexadecimal.
pub fn parse_seed(v: &str) -> Option<u64> {
    let v = v.trim();
    match v.strip_prefix("0x").or_else(|| v.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => v.parse().ok(),
    }
}

/// Comma-separated reals.
pub fn parse_list(key: &str, v: &str) -> CliResult<Vec<f64>> {
    v.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("cannot parse {key}: {x:?} is not a number")))
        })
        .collect()
}
