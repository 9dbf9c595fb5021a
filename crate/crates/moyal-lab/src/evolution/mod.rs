//! Phase-space equations of motion and their time integration.
//!
//! Four interchangeable right-hand sides drive ∂w/∂t:
//!
//! * [`liouville_rhs`] — the classical flow −(p/m)∂w/∂x + V′(x)∂w/∂p,
//! * [`moyal_rhs_spectral`] — the full sine-operator (Moyal) evolution,
//!   evaluated exactly for separable H by a pseudo-differential kernel,
//! * [`moyal_rhs_truncated`] — the Moyal series cut at a finite order,
//! * [`sinh_rhs`] — the hyperbolic counterpart, identical except that the
//!   odd-order correction terms enter without the alternating sign.

mod integrate;
mod nonlocal;
mod rhs;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PhaseSpaceGrid;
use ndarray::Array2;

pub use integrate::{evolve, evolve_with, stability_bound, step, Trajectory};
pub use nonlocal::{check_sin_sinh_substitution, nonlocal_derivative, ShiftVariant, SubstitutionReport};
pub use rhs::{evaluate_rhs, liouville_rhs, moyal_rhs_spectral, moyal_rhs_truncated, series_term, sinh_rhs};

/// Evolution law selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Liouville,
    MoyalSpectral,
    MoyalTruncated { k_max: usize },
    SinhTruncated { k_max: usize },
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Liouville => write!(f, "liouville"),
            Method::MoyalSpectral => write!(f, "moyal_spectral"),
            Method::MoyalTruncated { k_max } => write!(f, "moyal_truncated({k_max})"),
            Method::SinhTruncated { k_max } => write!(f, "sinh_truncated({k_max})"),
        }
    }
}

/// Fixed-step integration schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub steps: usize,
    pub method: Method,
    pub record_every: usize,
}

impl EvolutionConfig {
    pub fn new(dt: f64, steps: usize, method: Method, record_every: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Config(format!("evolution.dt must be positive, got {dt}")));
        }
        if steps == 0 {
            return Err(Error::Config("evolution.steps must be at least 1".into()));
        }
        if record_every == 0 {
            return Err(Error::Config("evolution.record_every must be at least 1".into()));
        }
        Ok(Self {
            dt,
            steps,
            method,
            record_every,
        })
    }

    pub fn total_time(&self) -> f64 {
        self.dt * self.steps as f64
    }
}

/// ∂w/∂t field produced by one of the evolution laws.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsField {
    grid: PhaseSpaceGrid,
    values: Array2<f64>,
}

impl RhsField {
    pub(crate) fn new(grid: PhaseSpaceGrid, values: Array2<f64>) -> Self {
        Self { grid, values }
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    /// Σ rhs·dx·dp; zero (to roundoff) for every conservative law here.
    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn l2_norm(&self) -> f64 {
        let acc: f64 = self.values.iter().map(|v| v * v).sum();
        (acc * self.grid.cell_area()).sqrt()
    }

    pub fn l2_distance(&self, other: &RhsField) -> Result<f64> {
        if self.values.raw_dim() != other.values.raw_dim() {
            return Err(Error::Contract("rhs fields live on different grids".into()));
        }
        let mut acc = 0.0;
        for (a, b) in self.values.iter().zip(other.values.iter()) {
            let d = a - b;
            acc += d * d;
        }
        Ok((acc * self.grid.cell_area()).sqrt())
    }

    pub fn linf_distance(&self, other: &RhsField) -> Result<f64> {
        if self.values.raw_dim() != other.values.raw_dim() {
            return Err(Error::Contract("rhs fields live on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}
