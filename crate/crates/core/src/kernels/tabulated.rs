use std::io::Read;
use std::path::Path;

use crate::error::{LdpError, Result};

/// Kernel sampled on a tensor grid, bilinearly interpolated inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedKernel {
    name: String,
    grid: Vec<f64>,
    /// Row-major `n × n` values, `values[i * n + j] = k(grid[i], grid[j])`.
    values: Vec<f64>,
}

impl TabulatedKernel {
    pub fn new(name: impl Into<String>, grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        if n < 2 {
            return Err(LdpError::InvalidGrid("tabulated kernel needs at least 2 nodes".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(LdpError::InvalidGrid("tabulated grid must be strictly increasing".into()));
        }
        if values.len() != n * n {
            return Err(LdpError::DimensionMismatch {
                expected: n * n,
                got: values.len(),
            });
        }
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        for i in 0..n {
            for j in 0..i {
                if (values[i * n + j] - values[j * n + i]).abs() > 1e-12 * scale {
                    return Err(LdpError::InvalidParameter(format!(
                        "tabulated kernel is not symmetric at ({}, {})",
                        grid[i], grid[j]
                    )));
                }
            }
        }
        Ok(Self {
            name: name.into(),
            grid,
            values,
        })
    }

    /// Read `s,t,k` rows (with header) covering the full tensor grid.
    pub fn from_csv_reader<R: Read>(name: impl Into<String>, reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != 3 {
                return Err(LdpError::Parse(format!("expected 3 columns (s,t,k), got {}", rec.len())));
            }
            let parse = |i: usize| -> Result<f64> {
                rec[i]
                    .parse::<f64>()
                    .map_err(|e| LdpError::Parse(format!("{:?}: {e}", &rec[i])))
            };
            rows.push((parse(0)?, parse(1)?, parse(2)?));
        }
        let mut grid: Vec<f64> = rows.iter().map(|r| r.0).collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let n = grid.len();
        if rows.len() != n * n {
            return Err(LdpError::Parse(format!(
                "expected {} rows for a {n}-node grid, got {}",
                n * n,
                rows.len()
            )));
        }
        let mut values = vec![f64::NAN; n * n];
        let index = |x: f64| {
            grid.binary_search_by(|g| g.total_cmp(&x))
                .map_err(|_| LdpError::Parse(format!("node {x} not on the s grid")))
        };
        for &(s, t, k) in &rows {
            values[index(s)? * n + index(t)?] = k;
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(LdpError::Parse("tabulated grid has missing entries".into()));
        }
        Self::new(name, grid, values)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(path.display().to_string(), file)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let g = &self.grid;
        let n = g.len();
        if !(x >= g[0] && x <= g[n - 1]) {
            return None;
        }
        let i = match g.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i - 1,
        };
        let w = (x - g[i]) / (g[i + 1] - g[i]);
        Some((i, w))
    }

    pub fn cov(&self, s: f64, t: f64) -> Result<f64> {
        let n = self.grid.len();
        let ((i, wi), (j, wj)) = match (self.locate(s), self.locate(t)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(LdpError::OutOfDomain { s, t }),
        };
        let v = |a: usize, b: usize| self.values[a * n + b];
        Ok((1.0 - wi) * (1.0 - wj) * v(i, j)
            + wi * (1.0 - wj) * v(i + 1, j)
            + (1.0 - wi) * wj * v(i, j + 1)
            + wi * wj * v(i + 1, j + 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bm_table() -> TabulatedKernel {
        let mut csv = String::from("s,t,k\n");
        let g = [0.25, 0.5, 0.75, 1.0];
        for &s in &g {
            for &t in &g {
                csv.push_str(&format!("{s},{t},{}\n", f64::min(s, t)));
            }
        }
        TabulatedKernel::from_csv_reader("bm", csv.as_bytes()).unwrap()
    }

    #[test]
    fn nodes_are_reproduced() {
        let k = bm_table();
        assert_eq!(k.cov(0.5, 0.75).unwrap(), 0.5);
        assert_eq!(k.cov(1.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn bilinear_between_nodes() {
        let k = bm_table();
        // off-diagonal cell: min is linear in the smaller argument
        assert!((k.cov(0.3, 0.9).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn extrapolation_is_an_error() {
        let k = bm_table();
        assert!(matches!(k.cov(0.1, 0.5), Err(LdpError::OutOfDomain { .. })));
    }

    #[test]
    fn incomplete_table_is_rejected() {
        let csv = "s,t,k\n0.5,0.5,0.5\n0.5,1.0,0.5\n1.0,1.0,1.0\n";
        assert!(TabulatedKernel::from_csv_reader("x", csv.as_bytes()).is_err());
        let asym = "s,t,k\n0.5,0.5,0.5\n0.5,1.0,0.5\n1.0,0.5,0.4\n1.0,1.0,1.0\n";
        assert!(TabulatedKernel::from_csv_reader("x", asym.as_bytes()).is_err());
    }
}
