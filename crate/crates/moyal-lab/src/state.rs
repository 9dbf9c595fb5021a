//! Wigner states and marginal densities on the phase-space grid.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PhaseSpaceGrid;

/// Tolerance on Σw·dx·dp for a freshly constructed or normalized state.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Marginals may ring slightly negative after spectral round trips.
pub const MARGINAL_NEGATIVITY_TOL: f64 = -1e-9;
/// Tolerance on Σρ·spacing for a marginal density.
pub const MARGINAL_NORMALIZATION_TOL: f64 = 1e-8;

/// Non-fatal conditions detected during construction.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// σx·σp below ℏ/2: no physical pure or mixed state has this Wigner
    /// function, but the grid object is still well defined.
    SubHeisenbergDispersion { sigma_product: f64, bound: f64 },
    /// Less than 3σ of clearance between the packet center and a grid edge.
    TailsBeyondGrid { axis: MarginalAxis, clearance_sigmas: f64 },
    /// The momentum window missed part of the transform's support.
    MomentumAliasing { leaked_mass: f64 },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::SubHeisenbergDispersion { sigma_product, bound } => write!(
                f,
                "sub-Heisenberg dispersion: sigma_x*sigma_p = {sigma_product} < {bound}"
            ),
            Warning::TailsBeyondGrid { axis, clearance_sigmas } => write!(
                f,
                "{axis:?} tails extend beyond the grid ({clearance_sigmas:.2} sigma clearance < 3)"
            ),
            Warning::MomentumAliasing { leaked_mass } => {
                write!(f, "momentum window aliases the transform; leaked mass {leaked_mass:.3e}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalAxis {
    Position,
    Momentum,
}

/// Real-valued quasi-probability density w(x, p, t) on a rectangular grid.
/// Values may be negative; the total integral is 1 for constructed states.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerState {
    grid: PhaseSpaceGrid,
    values: Array2<f64>,
    time: f64,
}

impl WignerState {
    /// Validating constructor: finite values, shape matching the grid, and
    /// unit total mass within [`NORMALIZATION_TOL`].
    pub fn new(grid: PhaseSpaceGrid, values: Array2<f64>, time: f64) -> Result<Self> {
        if values.nrows() != grid.nx() || values.ncols() != grid.np() {
            return Err(Error::Contract(format!(
                "value matrix is {}x{} but the grid is {}x{}",
                values.nrows(),
                values.ncols(),
                grid.nx(),
                grid.np()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Contract("Wigner values must be finite".into()));
        }
        let state = Self { grid, values, time };
        let mass = state.total_mass();
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Contract(format!(
                "state mass {mass} deviates from 1 by more than {NORMALIZATION_TOL}"
            )));
        }
        Ok(state)
    }

    /// Internal constructor for evolution intermediates, where normalization
    /// drift is a measured quantity rather than an invariant.
    pub(crate) fn unchecked(grid: PhaseSpaceGrid, values: Array2<f64>, time: f64) -> Self {
        Self { grid, values, time }
    }

    /// Build from finite values of any total mass, normalizing to 1.
    pub fn from_unnormalized(grid: PhaseSpaceGrid, values: Array2<f64>, time: f64) -> Result<Self> {
        if values.nrows() != grid.nx() || values.ncols() != grid.np() {
            return Err(Error::Contract(format!(
                "value matrix is {}x{} but the grid is {}x{}",
                values.nrows(),
                values.ncols(),
                grid.nx(),
                grid.np()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Contract("Wigner values must be finite".into()));
        }
        Self { grid, values, time }.normalized()
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Σ w·dx·dp over the grid.
    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    /// Rescaled copy with total mass exactly 1.
    pub fn normalized(&self) -> Result<Self> {
        let mass = self.total_mass();
        if !(mass.is_finite() && mass.abs() > f64::MIN_POSITIVE) {
            return Err(Error::Contract(format!("cannot normalize state with mass {mass}")));
        }
        Ok(Self {
            grid: self.grid.clone(),
            values: &self.values / mass,
            time: self.time,
        })
    }

    /// Purity 2πℏ·Σw²·dx·dp; 1 for pure states.
    pub fn purity(&self, hbar: f64) -> f64 {
        let sum_sq: f64 = self.values.iter().map(|v| v * v).sum();
        2.0 * std::f64::consts::PI * hbar * sum_sq * self.grid.cell_area()
    }

    /// Σ observable·w·dx·dp.
    pub fn expectation(&self, observable: &Array2<f64>) -> Result<f64> {
        if observable.raw_dim() != self.values.raw_dim() {
            return Err(Error::Contract(format!(
                "observable is {}x{} but the state is {}x{}",
                observable.nrows(),
                observable.ncols(),
                self.values.nrows(),
                self.values.ncols()
            )));
        }
        let mut acc = 0.0;
        for (o, w) in observable.iter().zip(self.values.iter()) {
            acc += o * w;
        }
        Ok(acc * self.grid.cell_area())
    }

    pub fn mean_x(&self) -> f64 {
        let xs = self.grid.x_points();
        let dxdp = self.grid.cell_area();
        let mut acc = 0.0;
        for (i, row) in self.values.outer_iter().enumerate() {
            acc += xs[i] * row.sum();
        }
        acc * dxdp
    }

    pub fn mean_p(&self) -> f64 {
        let ps = self.grid.p_points();
        let dxdp = self.grid.cell_area();
        let mut acc = 0.0;
        for row in self.values.outer_iter() {
            for (j, w) in row.iter().enumerate() {
                acc += ps[j] * w;
            }
        }
        acc * dxdp
    }

    pub fn var_x(&self) -> f64 {
        let xs = self.grid.x_points();
        let mean = self.mean_x();
        let dxdp = self.grid.cell_area();
        let mut acc = 0.0;
        for (i, row) in self.values.outer_iter().enumerate() {
            let d = xs[i] - mean;
            acc += d * d * row.sum();
        }
        acc * dxdp
    }

    pub fn var_p(&self) -> f64 {
        let ps = self.grid.p_points();
        let mean = self.mean_p();
        let dxdp = self.grid.cell_area();
        let mut acc = 0.0;
        for row in self.values.outer_iter() {
            for (j, w) in row.iter().enumerate() {
                let d = ps[j] - mean;
                acc += d * d * w;
            }
        }
        acc * dxdp
    }

    /// Marginal density along the requested axis (no renormalization, so
    /// summing the marginal reproduces the 2-D quadrature exactly).
    pub fn marginal(&self, axis: MarginalAxis) -> Result<DensityProfile> {
        let values: Vec<f64> = match axis {
            MarginalAxis::Position => {
                let dp = self.grid.dp();
                self.values.outer_iter().map(|row| row.sum() * dp).collect()
            }
            MarginalAxis::Momentum => {
                let dx = self.grid.dx();
                (0..self.grid.np())
                    .map(|j| self.values.column(j).sum() * dx)
                    .collect()
            }
        };
        let spacing = match axis {
            MarginalAxis::Position => self.grid.dx(),
            MarginalAxis::Momentum => self.grid.dp(),
        };
        DensityProfile::new(axis, values, spacing)
    }

    /// L2 norm of the value difference, √(Σ(a−b)²·dx·dp).
    pub fn l2_distance(&self, other: &WignerState) -> Result<f64> {
        if self.values.raw_dim() != other.values.raw_dim() {
            return Err(Error::Contract("states live on different grids".into()));
        }
        let mut acc = 0.0;
        for (a, b) in self.values.iter().zip(other.values.iter()) {
            let d = a - b;
            acc += d * d;
        }
        Ok((acc * self.grid.cell_area()).sqrt())
    }

    /// L2 norm of the values themselves.
    pub fn l2_norm(&self) -> f64 {
        let acc: f64 = self.values.iter().map(|v| v * v).sum();
        (acc * self.grid.cell_area()).sqrt()
    }

    pub fn linf_distance(&self, other: &WignerState) -> Result<f64> {
        if self.values.raw_dim() != other.values.raw_dim() {
            return Err(Error::Contract("states live on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// One-dimensional probability density on a uniform axis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    axis: MarginalAxis,
    values: Vec<f64>,
    spacing: f64,
}

impl DensityProfile {
    pub fn new(axis: MarginalAxis, values: Vec<f64>, spacing: f64) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| **v < MARGINAL_NEGATIVITY_TOL) {
            return Err(Error::Contract(format!(
                "density entry {v} below the ringing tolerance {MARGINAL_NEGATIVITY_TOL}"
            )));
        }
        let total: f64 = values.iter().sum::<f64>() * spacing;
        if (total - 1.0).abs() > MARGINAL_NORMALIZATION_TOL {
            return Err(Error::Contract(format!(
                "density total {total} deviates from 1 by more than {MARGINAL_NORMALIZATION_TOL}"
            )));
        }
        Ok(Self { axis, values, spacing })
    }

    pub fn axis(&self) -> MarginalAxis {
        self.axis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spacing
    }

    /// Variance about the mean, with coordinates `origin + i·spacing`.
    pub fn variance(&self, origin: f64) -> f64 {
        let mean: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| (origin + i as f64 * self.spacing) * v)
            .sum::<f64>()
            * self.spacing;
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let d = origin + i as f64 * self.spacing - mean;
                d * d * v
            })
            .sum::<f64>()
            * self.spacing
    }
}

/// Build an observable grid field from a function of (x, p).
pub fn observable_from_fn(grid: &PhaseSpaceGrid, f: impl Fn(f64, f64) -> f64) -> Array2<f64> {
    let xs = grid.x_points();
    let ps = grid.p_points();
    Array2::from_shape_fn((grid.nx(), grid.np()), |(i, j)| f(xs[i], ps[j]))
}

/// Normalized Gaussian Wigner state centered at (x0, p0).
///
/// Warns (rather than rejecting) when the packet's 3σ ellipse leaves the grid
/// or when σx·σp falls below ℏ/2.
pub fn gaussian_wigner(
    grid: &PhaseSpaceGrid,
    x0: f64,
    p0: f64,
    sigma_x: f64,
    sigma_p: f64,
    hbar: f64,
) -> Result<(WignerState, Vec<Warning>)> {
    if !(sigma_x.is_finite() && sigma_x > 0.0) {
        return Err(Error::Config(format!("sigma_x must be positive, got {sigma_x}")));
    }
    if !(sigma_p.is_finite() && sigma_p > 0.0) {
        return Err(Error::Config(format!("sigma_p must be positive, got {sigma_p}")));
    }
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::Config(format!("hbar must be positive, got {hbar}")));
    }
    let mut warnings = Vec::new();
    let x_clear = ((grid.x_max() - x0) / sigma_x).min((x0 - grid.x_min()) / sigma_x);
    if x_clear < 3.0 {
        warnings.push(Warning::TailsBeyondGrid {
            axis: MarginalAxis::Position,
            clearance_sigmas: x_clear,
        });
    }
    let p_clear = ((grid.p_max() - p0) / sigma_p).min((p0 - grid.p_min()) / sigma_p);
    if p_clear < 3.0 {
        warnings.push(Warning::TailsBeyondGrid {
            axis: MarginalAxis::Momentum,
            clearance_sigmas: p_clear,
        });
    }
    let product = sigma_x * sigma_p;
    if product < hbar / 2.0 {
        warnings.push(Warning::SubHeisenbergDispersion {
            sigma_product: product,
            bound: hbar / 2.0,
        });
    }

    let xs = grid.x_points();
    let ps = grid.p_points();
    let mut values = Array2::from_shape_fn((grid.nx(), grid.np()), |(i, j)| {
        let dx = (xs[i] - x0) / sigma_x;
        let dp = (ps[j] - p0) / sigma_p;
        (-0.5 * (dx * dx + dp * dp)).exp()
    });
    let total: f64 = values.iter().sum::<f64>() * grid.cell_area();
    values /= total;
    Ok((WignerState::unchecked(grid.clone(), values, 0.0), warnings))
}

/// Seeded random band-limited state: a uniform background plus random Fourier
/// modes with |m| ≤ max_mode on each axis, normalized to unit mass.
///
/// Built from an explicitly Hermitian spectrum so the field is real, and with
/// a zeroed DC perturbation so normalization is exact. Deterministic per seed.
pub fn random_band_limited(
    grid: &PhaseSpaceGrid,
    max_mode_x: usize,
    max_mode_p: usize,
    relative_amplitude: f64,
    seed: u64,
) -> Result<WignerState> {
    let (nx, np) = (grid.nx(), grid.np());
    if max_mode_x >= nx / 2 || max_mode_p >= np / 2 {
        return Err(Error::Config(format!(
            "band limit ({max_mode_x}, {max_mode_p}) must stay below half the grid ({nx}, {np})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spectrum = Array2::<Complex64>::zeros((nx, np));
    let signed = |m: usize, n: usize| -> i64 {
        if m < n / 2 {
            m as i64
        } else {
            m as i64 - n as i64
        }
    };
    for mi in 0..nx {
        for mj in 0..np {
            let sx = signed(mi, nx);
            let sp = signed(mj, np);
            if sx.unsigned_abs() as usize > max_mode_x || sp.unsigned_abs() as usize > max_mode_p {
                continue;
            }
            if sx == 0 && sp == 0 {
                continue;
            }
            // Fill each conjugate pair once.
            if (sx, sp) < (-sx, -sp) {
                continue;
            }
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let conj_i = ((nx as i64 - sx) % nx as i64) as usize;
            let conj_j = ((np as i64 - sp) % np as i64) as usize;
            spectrum[[mi, mj]] = c;
            spectrum[[conj_i, conj_j]] = c.conj();
        }
    }
    // Inverse transform row-by-row then column-by-column.
    let mut field = Array2::<f64>::zeros((nx, np));
    let mut work = spectrum;
    for mut row in work.outer_iter_mut() {
        let mut buf = row.to_vec();
        crate::fourier::ifft_1d(&mut buf);
        for (dst, src) in row.iter_mut().zip(buf) {
            *dst = src;
        }
    }
    for j in 0..np {
        let mut buf: Vec<Complex64> = work.column(j).to_vec();
        crate::fourier::ifft_1d(&mut buf);
        for (i, v) in buf.iter().enumerate() {
            field[[i, j]] = v.re;
        }
    }
    let base = 1.0 / (grid.x_length() * grid.p_length());
    let peak = field.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let scale = relative_amplitude * base / peak;
    let values = field.mapv(|v| base + v * scale);
    let state = WignerState::unchecked(grid.clone(), values, 0.0);
    // DC mode untouched, so the mass is exact up to roundoff; normalize anyway.
    state.normalized()
}
