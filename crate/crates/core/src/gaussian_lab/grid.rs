use std::sync::Arc;

use crate::error::{LdpError, Result};

/// Strictly increasing times in `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    times: Arc<[f64]>,
}

impl Grid {
    pub fn new(times: Vec<f64>, n_max: usize) -> Result<Self> {
        if times.is_empty() {
            return Err(LdpError::InvalidGrid("grid is empty".into()));
        }
        if times.len() > n_max {
            return Err(LdpError::InvalidGrid(format!("grid exceeds n_max={n_max}")));
        }
        if let Some(&t) = times.iter().find(|&&t| !(t > 0.0 && t <= 1.0)) {
            return Err(LdpError::InvalidGrid(format!("time {t} outside (0, 1]")));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(LdpError::InvalidGrid("times must be strictly increasing".into()));
        }
        Ok(Self { times: times.into() })
    }

    /// `{1/n, 2/n, ..., 1}`.
    pub fn uniform(n: usize, n_max: usize) -> Result<Self> {
        if n == 0 {
            return Err(LdpError::InvalidGrid("grid is empty".into()));
        }
        Self::new((1..=n).map(|i| i as f64 / n as f64).collect(), n_max)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}
