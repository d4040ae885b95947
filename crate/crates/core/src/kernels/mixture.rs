use std::fmt;

use crate::error::{LdpError, Result};
use crate::quadrature::Quadrature;
use crate::rv_calculus::ScalarFn;

use super::fbm_cov;
use super::limit::rl_cov;
use crate::tolerances::Tolerances;

/// Density part of a mixing measure.
#[derive(Clone)]
pub enum Density {
    /// `(H - H0)^n dH`.
    Polynomial { n: u32 },
    Custom(ScalarFn),
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::Polynomial { n } => write!(f, "Polynomial {{ n: {n} }}"),
            Density::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Finite measure on `[h0, h1]`: atoms plus an optional density.
#[derive(Clone, Debug)]
pub struct MixingMeasure {
    h0: f64,
    h1: f64,
    atoms: Vec<(f64, f64)>,
    density: Option<Density>,
    quad: Quadrature,
}

impl MixingMeasure {
    pub fn new(
        h0: f64,
        h1: f64,
        atoms: Vec<(f64, f64)>,
        density: Option<Density>,
    ) -> Result<Self> {
        if !(h0 > 0.0 && h0 <= h1 && h1 <= 1.0) {
            return Err(LdpError::InvalidMeasure(format!(
                "need 0 < H0 <= H1 <= 1, got [{h0}, {h1}]"
            )));
        }
        for &(loc, mass) in &atoms {
            if !(loc >= h0 && loc <= h1) {
                return Err(LdpError::InvalidMeasure(format!(
                    "atom at {loc} outside [{h0}, {h1}]"
                )));
            }
            if !(mass > 0.0 && mass.is_finite()) {
                return Err(LdpError::InvalidMeasure(format!("atom mass {mass} must be positive")));
            }
        }
        if atoms.is_empty() && (density.is_none() || h0 == h1) {
            return Err(LdpError::EmptyMeasure);
        }
        let mut atoms = atoms;
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            h0,
            h1,
            atoms,
            density,
            // integrands in H are smooth exponentials
            quad: Quadrature::new(1e-12, Tolerances::default().max_subdivisions),
        })
    }

    /// `Σ mass_j δ_{H_j}` on `[min H_j, max H_j]`.
    pub fn atomic(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(LdpError::EmptyMeasure);
        }
        let h0 = atoms.iter().map(|a| a.0).fold(f64::INFINITY, f64::min);
        let h1 = atoms.iter().map(|a| a.0).fold(f64::NEG_INFINITY, f64::max);
        Self::new(h0, h1, atoms, None)
    }

    /// `(H - h0)^n dH` on `[h0, h1]`.
    pub fn polynomial(h0: f64, h1: f64, n: u32) -> Result<Self> {
        Self::new(h0, h1, Vec::new(), Some(Density::Polynomial { n }))
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }
    pub fn h1(&self) -> f64 {
        self.h1
    }
    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }
    pub fn density(&self) -> Option<&Density> {
        self.density.as_ref()
    }

    fn density_at(&self, h: f64) -> f64 {
        match &self.density {
            Some(Density::Polynomial { n }) => (h - self.h0).powi(*n as i32),
            Some(Density::Custom(f)) => f(h),
            None => 0.0,
        }
    }

    /// Lowest point of the support.
    pub fn support_min(&self) -> Option<f64> {
        let atom_min = self.atoms.first().map(|a| a.0);
        let dens_min = self.density.as_ref().map(|_| self.h0);
        match (atom_min, dens_min) {
            (Some(a), Some(d)) => Some(a.min(d)),
            (a, d) => a.or(d),
        }
    }

    pub fn atom_mass_at(&self, h: f64) -> Option<f64> {
        let m: f64 = self
            .atoms
            .iter()
            .filter(|a| a.0 == h)
            .map(|a| a.1)
            .sum();
        (m > 0.0).then_some(m)
    }

    pub fn total_mass(&self) -> Result<f64> {
        self.integrate_against(|_| 1.0)
    }

    /// `∫ f(H) dμ(H)`.
    pub fn integrate_against<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        let atoms: f64 = self.atoms.iter().map(|&(h, m)| m * f(h)).sum();
        let dens = match &self.density {
            Some(_) if self.h1 > self.h0 => {
                self.quad
                    .integrate(|h| self.density_at(h) * f(h), self.h0, self.h1)?
                    .value
            }
            _ => 0.0,
        };
        Ok(atoms + dens)
    }

    /// Fallible integrand version of [`Self::integrate_against`].
    pub fn try_integrate_against<F: Fn(f64) -> Result<f64>>(&self, f: F) -> Result<f64> {
        let mut atoms = 0.0;
        for &(h, m) in &self.atoms {
            atoms += m * f(h)?;
        }
        let mut failure = None;
        let dens = match &self.density {
            Some(_) if self.h1 > self.h0 => {
                self.quad
                    .integrate(
                        |h| match f(h) {
                            Ok(v) => self.density_at(h) * v,
                            Err(e) => {
                                failure.get_or_insert(e);
                                f64::NAN
                            }
                        },
                        self.h0,
                        self.h1,
                    )
                    .map(|r| r.value)
            }
            _ => Ok(0.0),
        };
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(atoms + dens?)
    }
}

/// Self-similar family `H ↦ k^H` superposed by a mixing measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixtureFamily {
    /// Fractional Brownian motion with Hurst index `H`.
    FBm,
    /// Normalized Riemann–Liouville process with `alpha = H - 1/2`.
    RiemannLiouville,
}

impl MixtureFamily {
    pub fn name(self) -> &'static str {
        match self {
            MixtureFamily::FBm => "fbm",
            MixtureFamily::RiemannLiouville => "rl",
        }
    }

    pub fn member_cov(self, hurst: f64, s: f64, t: f64, tol: &Tolerances) -> Result<f64> {
        match self {
            MixtureFamily::FBm => Ok(fbm_cov(hurst, s, t)),
            MixtureFamily::RiemannLiouville => rl_cov(hurst - 0.5, s, t, tol),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MixtureKernel {
    pub measure: MixingMeasure,
    pub family: MixtureFamily,
    pub tol: Tolerances,
}

impl MixtureKernel {
    pub fn new(measure: MixingMeasure, family: MixtureFamily) -> Self {
        Self {
            measure,
            family,
            tol: Tolerances::default(),
        }
    }

    pub fn cov(&self, s: f64, t: f64) -> Result<f64> {
        self.measure
            .try_integrate_against(|h| self.family.member_cov(h, s, t, &self.tol))
    }

    pub fn name(&self) -> String {
        let atoms: Vec<String> = self
            .measure
            .atoms()
            .iter()
            .map(|(h, m)| format!("{m}*d{h}"))
            .collect();
        let dens = match self.measure.density() {
            Some(Density::Polynomial { n }) => {
                format!("(H-{})^{n}dH[{},{}]", self.measure.h0(), self.measure.h0(), self.measure.h1())
            }
            Some(Density::Custom(_)) => "density".to_string(),
            None => String::new(),
        };
        let parts: Vec<String> = atoms.into_iter().chain((!dens.is_empty()).then_some(dens)).collect();
        format!("mixture-{}({})", self.family.name(), parts.join("+"))
    }
}
