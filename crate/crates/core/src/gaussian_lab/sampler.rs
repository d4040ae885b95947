use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{GramMatrix, Grid};
use crate::error::{LdpError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub grid: Grid,
    pub path_id: usize,
    pub values: Vec<f64>,
    pub seed: u64,
    pub kernel_name: String,
}

/// Stream for path `path_id`: ChaCha20 keyed by `seed`, stream number
/// `path_id`. Independent of the number of workers.
pub fn path_rng(seed: u64, path_id: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(path_id as u64);
    rng
}

/// Draws `L z` with `z` standard normal, `L Lᵀ = G + jitter I`.
pub fn cholesky_sample(g: &GramMatrix, seed: u64, n_paths: usize) -> Result<Vec<PathSample>> {
    let owned;
    let g = if g.chol.is_some() {
        g
    } else {
        owned = g.clone().factorize()?;
        &owned
    };
    let l = g.chol.as_ref().expect("factorized");
    let n = g.n();
    Ok((0..n_paths)
        .into_par_iter()
        .map(|path_id| {
            let mut rng = path_rng(seed, path_id);
            let z = DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
            let x = l * z;
            PathSample {
                grid: g.grid.clone(),
                path_id,
                values: x.iter().copied().collect(),
                seed,
                kernel_name: g.kernel_name.clone(),
            }
        })
        .collect())
}

/// `(1/N) Σ x xᵀ` (the processes are centred).
pub fn empirical_covariance(samples: &[PathSample]) -> Result<DMatrix<f64>> {
    let first = samples
        .first()
        .ok_or_else(|| LdpError::InvalidParameter("no samples".into()))?;
    let n = first.values.len();
    let mut acc = DMatrix::zeros(n, n);
    for s in samples {
        if s.values.len() != n {
            return Err(LdpError::DimensionMismatch {
                expected: n,
                got: s.values.len(),
            });
        }
        let x = DVector::from_column_slice(&s.values);
        acc.ger(1.0, &x, &x, 1.0);
    }
    Ok(acc / samples.len() as f64)
}
