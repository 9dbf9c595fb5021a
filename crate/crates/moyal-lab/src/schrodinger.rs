//! Independent ground truth: split-operator propagation of ψ(x, t) and the
//! transform connecting ψ to the phase-space density w(x, p).

use ndarray::parallel::prelude::*;
use ndarray::{Array2, Axis};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier;
use crate::grid::PhaseSpaceGrid;
use crate::hamiltonian::Hamiltonian;
use crate::state::{Warning, WignerState};

/// Tolerance on Σ|ψ|²·dx for a constructed wavefunction.
pub const WAVE_NORM_TOL: f64 = 1e-10;
/// Mass allowed in the outer quarter of the domain before the periodic
/// wraparound of the transform's y integration becomes unsound.
pub const BOUNDARY_MASS_LIMIT: f64 = 1e-12;

/// Complex position-space amplitude on a uniform periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    nx: usize,
    x_min: f64,
    x_max: f64,
    values: Vec<Complex64>,
    time: f64,
}

impl WaveFunction {
    pub fn new(x_min: f64, x_max: f64, values: Vec<Complex64>, time: f64) -> Result<Self> {
        let nx = values.len();
        if nx < 8 || !nx.is_power_of_two() {
            return Err(Error::Config(format!("nx not a power of two >= 8: {nx}")));
        }
        if !(x_max > x_min) {
            return Err(Error::Config(format!(
                "x_range must be strictly increasing, got ({x_min}, {x_max})"
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Contract("wavefunction values must be finite".into()));
        }
        let wf = Self {
            nx,
            x_min,
            x_max,
            values,
            time,
        };
        let norm = wf.norm_squared();
        if (norm - 1.0).abs() > WAVE_NORM_TOL {
            return Err(Error::Contract(format!(
                "wavefunction norm² {norm} deviates from 1 by more than {WAVE_NORM_TOL}"
            )));
        }
        Ok(wf)
    }

    fn unchecked(x_min: f64, x_max: f64, values: Vec<Complex64>, time: f64) -> Self {
        Self {
            nx: values.len(),
            x_min,
            x_max,
            values,
            time,
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn x_length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn x_points(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.nx).map(|i| self.x_min + i as f64 * dx).collect()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Σ|ψ|²·dx.
    pub fn norm_squared(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dx()
    }

    /// |ψ(x)|² on the grid.
    pub fn probability_density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// ⟨self|other⟩ = Σ ψ₁*·ψ₂·dx.
    pub fn overlap(&self, other: &WaveFunction) -> Result<Complex64> {
        if self.nx != other.nx {
            return Err(Error::Contract("wavefunctions live on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.dx())
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm_squared().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Contract(format!("cannot normalize wavefunction with norm {norm}")));
        }
        Ok(Self::unchecked(
            self.x_min,
            self.x_max,
            self.values.iter().map(|v| v / norm).collect(),
            self.time,
        ))
    }

    /// Fraction of |ψ|² mass in the outer quarter of the domain (the first
    /// and last eighths).
    pub fn boundary_mass(&self) -> f64 {
        let eighth = self.nx / 8;
        let dx = self.dx();
        let mut acc = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            if i < eighth || i >= self.nx - eighth {
                acc += v.norm_sqr();
            }
        }
        acc * dx
    }
}

/// Gaussian packet with position spread σ (standard deviation of |ψ|²) and
/// mean momentum p0, numerically normalized on the grid.
pub fn gaussian_packet(
    nx: usize,
    x_range: (f64, f64),
    x0: f64,
    p0: f64,
    sigma: f64,
    hbar: f64,
) -> Result<WaveFunction> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Config(format!("sigma must be positive, got {sigma}")));
    }
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::Config(format!("hbar must be positive, got {hbar}")));
    }
    let dx = (x_range.1 - x_range.0) / nx as f64;
    let mut values: Vec<Complex64> = (0..nx)
        .map(|i| {
            let x = x_range.0 + i as f64 * dx;
            let envelope = (-(x - x0) * (x - x0) / (4.0 * sigma * sigma)).exp();
            let phase = Complex64::new(0.0, p0 * x / hbar).exp();
            envelope * phase
        })
        .collect();
    let norm = (values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx).sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::Config("packet has no mass on the grid".into()));
    }
    for v in values.iter_mut() {
        *v /= norm;
    }
    WaveFunction::new(x_range.0, x_range.1, values, 0.0)
}

/// One Strang-split step: half potential phase, full kinetic phase in
/// momentum space, half potential phase. Unitary up to roundoff.
pub fn split_step(psi: &WaveFunction, h: &Hamiltonian, dt: f64) -> Result<WaveFunction> {
    let xs = psi.x_points();
    let v = h.potential_at(&xs)?;
    let hbar = h.hbar();
    let half_phase: Vec<Complex64> = v
        .iter()
        .map(|&vx| Complex64::new(0.0, -vx * dt / (2.0 * hbar)).exp())
        .collect();
    let ks = fourier::wavenumbers(psi.nx, psi.x_length());
    let kinetic_phase: Vec<Complex64> = ks
        .iter()
        .map(|&k| Complex64::new(0.0, -hbar * k * k * dt / (2.0 * h.mass())).exp())
        .collect();

    let mut buf: Vec<Complex64> = psi
        .values
        .iter()
        .zip(&half_phase)
        .map(|(p, ph)| p * ph)
        .collect();
    fourier::fft_1d(&mut buf);
    for (b, ph) in buf.iter_mut().zip(&kinetic_phase) {
        *b *= ph;
    }
    fourier::ifft_1d(&mut buf);
    for (b, ph) in buf.iter_mut().zip(&half_phase) {
        *b *= ph;
    }
    if buf.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::WaveDivergence { step: 1 });
    }
    Ok(WaveFunction::unchecked(
        psi.x_min,
        psi.x_max,
        buf,
        psi.time + dt,
    ))
}

/// Repeated split stepping.
pub fn evolve_wavefunction(
    psi0: &WaveFunction,
    h: &Hamiltonian,
    dt: f64,
    steps: usize,
) -> Result<WaveFunction> {
    let mut psi = psi0.clone();
    for step_idx in 1..=steps {
        psi = split_step(&psi, h, dt).map_err(|e| match e {
            Error::WaveDivergence { .. } => Error::WaveDivergence { step: step_idx },
            other => other,
        })?;
    }
    Ok(psi)
}

/// Extra numbers measured while building a transform.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformDiagnostics {
    pub warnings: Vec<Warning>,
    /// Largest imaginary part discarded when realizing the output.
    pub max_imag_residue: f64,
    /// Σ W·dx·dp before any interpretation; 1 when the momentum window
    /// captures the full support.
    pub raw_mass: f64,
}

/// Phase-space density W(x, p) = (1/πℏ)∫ψ*(x+y)ψ(x−y)e^{2ipy/ℏ}dy, with the
/// y integration living on the position grid with periodic wraparound.
///
/// Lags are windowed to |y| ≤ L/4: on a periodic box the half-box lag terms
/// assemble a mirror image of the state at x + L/2, and the boundary-mass
/// precondition makes the windowed terms the only ones that carry weight.
/// The output is not renormalized; a momentum window that misses part of the
/// support shows up as `raw_mass` ≠ 1 plus an aliasing warning.
pub fn wigner_transform(
    psi: &WaveFunction,
    np: usize,
    p_range: (f64, f64),
    hbar: f64,
) -> Result<(WignerState, TransformDiagnostics)> {
    if np < 8 || !np.is_power_of_two() {
        return Err(Error::Config(format!("np not a power of two >= 8: {np}")));
    }
    let boundary = psi.boundary_mass();
    if boundary >= BOUNDARY_MASS_LIMIT {
        return Err(Error::Precondition(format!(
            "wavefunction carries {boundary:.3e} mass in the outer quarter of the domain \
             (limit {BOUNDARY_MASS_LIMIT:.0e}); enlarge the box before transforming"
        )));
    }
    let grid = PhaseSpaceGrid::new(psi.nx, np, (psi.x_min, psi.x_max), p_range)?;
    let nx = psi.nx;
    let dx = psi.dx();
    let ps = grid.p_points();
    let signed_lag = |j: usize| -> isize {
        if j < nx / 2 {
            j as isize
        } else {
            j as isize - nx as isize
        }
    };
    let lag_window = (nx / 4) as isize;
    // kernel[l][j] = e^{2i·p_l·y_j/ℏ} on the windowed lags, 0 elsewhere
    let kernel = Array2::from_shape_fn((np, nx), |(l, j)| {
        let s = signed_lag(j);
        if s.abs() > lag_window {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, 2.0 * ps[l] * s as f64 * dx / hbar).exp()
        }
    });
    let prefactor = dx / (std::f64::consts::PI * hbar);

    let mut values = Array2::<f64>::zeros((nx, np));
    let max_imag_residue = values
        .axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .map(|(i, mut row)| {
            let g: Vec<Complex64> = (0..nx)
                .map(|j| {
                    let s = signed_lag(j);
                    if s.abs() > lag_window {
                        return Complex64::new(0.0, 0.0);
                    }
                    let plus = (i as isize + s).rem_euclid(nx as isize) as usize;
                    let minus = (i as isize - s).rem_euclid(nx as isize) as usize;
                    psi.values[plus].conj() * psi.values[minus]
                })
                .collect();
            let mut residue = 0.0f64;
            for (l, out) in row.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (gj, kj) in g.iter().zip(kernel.row(l)) {
                    acc += gj * kj;
                }
                acc *= prefactor;
                *out = acc.re;
                residue = residue.max(acc.im.abs());
            }
            residue
        })
        .reduce(|| 0.0, f64::max);

    let state = WignerState::unchecked(grid, values, psi.time);
    let raw_mass = state.total_mass();
    let mut warnings = Vec::new();
    if (raw_mass - 1.0).abs() > 1e-6 {
        warnings.push(Warning::MomentumAliasing {
            leaked_mass: 1.0 - raw_mass,
        });
    }
    Ok((
        state,
        TransformDiagnostics {
            warnings,
            max_imag_residue,
            raw_mass,
        },
    ))
}

/// Split-operator trajectory reported as phase-space snapshots on the same
/// schedule the direct evolution uses (step 0, every `record_every`, final).
pub struct OracleTrajectory {
    pub snapshots: Vec<WignerState>,
    pub snapshot_steps: Vec<usize>,
    pub diagnostics: Vec<TransformDiagnostics>,
}

pub fn evolve_oracle(
    psi0: &WaveFunction,
    h: &Hamiltonian,
    total_time: f64,
    dt: f64,
    np: usize,
    p_range: (f64, f64),
    record_every: usize,
) -> Result<OracleTrajectory> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Config(format!("dt must be positive, got {dt}")));
    }
    if record_every == 0 {
        return Err(Error::Config("record_every must be at least 1".into()));
    }
    let steps_f = total_time / dt;
    let steps = steps_f.round() as usize;
    if (steps_f - steps as f64).abs() > 1e-9 * steps_f.abs().max(1.0) {
        return Err(Error::Config(format!(
            "total_time {total_time} is not an integer number of dt = {dt} steps"
        )));
    }
    let mut snapshots = Vec::new();
    let mut snapshot_steps = Vec::new();
    let mut diagnostics = Vec::new();
    let mut record = |step_idx: usize, psi: &WaveFunction| -> Result<()> {
        let (w, diag) = wigner_transform(psi, np, p_range, h.hbar())?;
        snapshots.push(w);
        snapshot_steps.push(step_idx);
        diagnostics.push(diag);
        Ok(())
    };
    record(0, psi0)?;
    let mut psi = psi0.clone();
    for step_idx in 1..=steps {
        psi = split_step(&psi, h, dt).map_err(|e| match e {
            Error::WaveDivergence { .. } => Error::WaveDivergence { step: step_idx },
            other => other,
        })?;
        if step_idx % record_every == 0 || step_idx == steps {
            record(step_idx, &psi)?;
        }
    }
    Ok(OracleTrajectory {
        snapshots,
        snapshot_steps,
        diagnostics,
    })
}
