//! Rectangular phase-space grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform rectangular grid over a periodic phase-space box.
///
/// Sample points are `x_i = x_min + i·dx` and `p_j = p_min + j·dp`; the upper
/// edges are identified with the lower ones by periodicity, so they carry no
/// sample of their own. Sizes must be powers of two for the spectral
/// transforms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceGrid {
    nx: usize,
    np: usize,
    x_min: f64,
    x_max: f64,
    p_min: f64,
    p_max: f64,
}

fn check_axis(n: usize, lo: f64, hi: f64, n_name: &str, range_name: &str) -> Result<()> {
    if n < 8 || !n.is_power_of_two() {
        return Err(Error::Config(format!(
            "{n_name} not a power of two >= 8: {n}"
        )));
    }
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::Config(format!(
            "{range_name} must be a strictly increasing finite pair, got ({lo}, {hi})"
        )));
    }
    Ok(())
}

impl PhaseSpaceGrid {
    pub fn new(nx: usize, np: usize, x_range: (f64, f64), p_range: (f64, f64)) -> Result<Self> {
        check_axis(nx, x_range.0, x_range.1, "nx", "x_range")?;
        check_axis(np, p_range.0, p_range.1, "np", "p_range")?;
        Ok(Self {
            nx,
            np,
            x_min: x_range.0,
            x_max: x_range.1,
            p_min: p_range.0,
            p_max: p_range.1,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn np(&self) -> usize {
        self.np
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / self.np as f64
    }

    /// Phase-space cell area `dx·dp`.
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dp()
    }

    pub fn x_length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn p_length(&self) -> f64 {
        self.p_max - self.p_min
    }

    pub fn x_points(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.nx).map(|i| self.x_min + i as f64 * dx).collect()
    }

    pub fn p_points(&self) -> Vec<f64> {
        let dp = self.dp();
        (0..self.np).map(|j| self.p_min + j as f64 * dp).collect()
    }

    /// Largest |p| represented on the grid.
    pub fn p_abs_max(&self) -> f64 {
        self.p_min.abs().max(self.p_max.abs())
    }
}

/// Build a grid; the free-function spelling mirrors the other constructors.
pub fn make_grid(nx: usize, np: usize, x_range: (f64, f64), p_range: (f64, f64)) -> Result<PhaseSpaceGrid> {
    PhaseSpaceGrid::new(nx, np, x_range, p_range)
}

/// Momentum range matched to the position grid so that the discrete Wigner
/// transform lands exactly on FFT frequencies: `dp = πℏ/L_x`, centered at 0.
pub fn natural_momentum_range(nx: usize, x_length: f64, hbar: f64) -> (f64, f64) {
    let half = std::f64::consts::PI * hbar * nx as f64 / (2.0 * x_length);
    (-half, half)
}
