//! Deterministic CSV/JSON emission with atomic writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::{LdpError, Result};
use crate::gaussian_lab::{GramMatrix, PathSample, RateEvaluation};
use crate::ld_verify::SweepReport;

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

fn json_f64(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(fmt_f64(v))
    }
}

/// Write via a sibling temp file and rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let name = path
        .file_name()
        .ok_or_else(|| LdpError::Io(format!("{} has no file name", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        LdpError::from(e)
    })
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| LdpError::Io(e.to_string()))
}

/// Columns `eps,value,target,error`.
pub fn sweep_csv(r: &SweepReport) -> Result<Vec<u8>> {
    csv_bytes(
        &["eps", "value", "target", "error"],
        (0..r.eps_grid.len()).map(|j| {
            vec![
                fmt_f64(r.eps_grid[j]),
                fmt_f64(r.values[j]),
                fmt_f64(r.targets[j]),
                fmt_f64(r.errors[j]),
            ]
        }),
    )
}

/// Summary with sorted keys.
pub fn sweep_json(r: &SweepReport) -> Value {
    json!({
        "final_error": json_f64(r.final_error),
        "pass": r.pass(),
        "quantity_name": r.quantity_name,
        "tolerance": json_f64(r.tolerance),
        "trend_verdict": r.trend_verdict.as_str(),
    })
}

pub fn to_json_bytes(v: &Value) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| LdpError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s.into_bytes())
}

/// Writes `sweep_<name>.csv` and `sweep_<name>.json`; returns both paths.
pub fn write_sweep(dir: &Path, name: &str, r: &SweepReport) -> Result<(PathBuf, PathBuf)> {
    let csv_path = dir.join(format!("sweep_{name}.csv"));
    let json_path = dir.join(format!("sweep_{name}.json"));
    write_atomic(&csv_path, &sweep_csv(r)?)?;
    write_atomic(&json_path, &to_json_bytes(&sweep_json(r))?)?;
    Ok((csv_path, json_path))
}

/// Columns `path_id,t,value`.
pub fn paths_csv(samples: &[PathSample]) -> Result<Vec<u8>> {
    csv_bytes(
        &["path_id", "t", "value"],
        samples.iter().flat_map(|p| {
            p.grid
                .times()
                .iter()
                .zip(&p.values)
                .map(move |(t, v)| vec![p.path_id.to_string(), fmt_f64(*t), fmt_f64(*v)])
        }),
    )
}

/// Columns `s,t,k`.
pub fn gram_csv(g: &GramMatrix) -> Result<Vec<u8>> {
    let t = g.grid.times();
    csv_bytes(
        &["s", "t", "k"],
        (0..t.len()).flat_map(|i| {
            (0..t.len()).map(move |j| vec![fmt_f64(t[i]), fmt_f64(t[j]), fmt_f64(g.values[(i, j)])])
        }),
    )
}

/// `{"in_range", "residual", "value"}`; out-of-range values print as `"infinity"`.
pub fn rate_json(r: &RateEvaluation) -> Value {
    let value = if r.value.is_infinite() {
        json!("infinity")
    } else {
        json!(r.value)
    };
    json!({
        "in_range": r.in_range,
        "residual": json_f64(r.residual),
        "value": value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tolerances::Tolerances;

    #[test]
    fn sweep_outputs() {
        let r = SweepReport::new(
            "demo",
            vec![0.1, 0.01],
            vec![1.5, 1.05],
            vec![1.0, 1.0],
            vec![0.5, 0.05],
            0.1,
            &Tolerances::default(),
        )
        .unwrap();
        let csv = String::from_utf8(sweep_csv(&r).unwrap()).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "eps,value,target,error");
        assert_eq!(lines[1], "1.0000000000000001e-1,1.5000000000000000e0,1.0000000000000000e0,5.0000000000000000e-1");
        assert!(!csv.contains('\r'));
        let json = String::from_utf8(to_json_bytes(&sweep_json(&r)).unwrap()).unwrap();
        let keys: Vec<usize> = ["final_error", "pass", "quantity_name", "tolerance", "trend_verdict"]
            .iter()
            .map(|k| json.find(k).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("x.csv");
        write_atomic(&p, b"a\n").unwrap();
        write_atomic(&p, b"b\n").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"b\n");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn rate_infinity() {
        let r = RateEvaluation {
            value: f64::INFINITY,
            residual: 1.0,
            in_range: false,
        };
        assert_eq!(rate_json(&r)["value"], "infinity");
    }
}
