//! Stochastic phase-space coordinates: zero-mean offsets (ξ, η) whose
//! variances obey ⟨ξ²⟩⟨η²⟩ = ℏ²/4, an ensemble sampler, the histogram
//! realization of a smeared point, and the Gaussian-state check of the
//! first-order operator correspondences.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier;
use crate::grid::PhaseSpaceGrid;
use crate::state::WignerState;

/// Fraction of samples allowed to fall outside the histogram grid.
pub const OFF_GRID_LIMIT: f64 = 1e-3;

/// Zero-mean Gaussian statistics for the coordinate offsets, with the
/// momentum spread slaved to the position spread: ση = ℏ/(2σξ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmearingDistribution {
    sigma_xi: f64,
    sigma_eta: f64,
    hbar: f64,
}

impl SmearingDistribution {
    pub fn new(sigma_xi: f64, hbar: f64) -> Result<Self> {
        if !(sigma_xi.is_finite() && sigma_xi > 0.0) {
            return Err(Error::Config(format!(
                "sigma_xi must be positive, got {sigma_xi}"
            )));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::Config(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self {
            sigma_xi,
            sigma_eta: hbar / (2.0 * sigma_xi),
            hbar,
        })
    }

    pub fn sigma_xi(&self) -> f64 {
        self.sigma_xi
    }

    pub fn sigma_eta(&self) -> f64 {
        self.sigma_eta
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// ⟨ξ²⟩⟨η²⟩, which the constructor pins to ℏ²/4.
    pub fn variance_product(&self) -> f64 {
        self.sigma_xi * self.sigma_xi * self.sigma_eta * self.sigma_eta
    }
}

/// Convenience spelling of the constructor.
pub fn make_distribution(sigma_xi: f64, hbar: f64) -> Result<SmearingDistribution> {
    SmearingDistribution::new(sigma_xi, hbar)
}

/// Sampled coordinate offsets; reproducible bit-for-bit per (seed, index).
#[derive(Debug, Clone, PartialEq)]
pub struct SmearingEnsemble {
    samples: Vec<(f64, f64)>,
    seed: u64,
    distribution: SmearingDistribution,
}

impl SmearingEnsemble {
    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn distribution(&self) -> &SmearingDistribution {
        &self.distribution
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean_xi(&self) -> f64 {
        self.samples.iter().map(|s| s.0).sum::<f64>() / self.len() as f64
    }

    pub fn mean_eta(&self) -> f64 {
        self.samples.iter().map(|s| s.1).sum::<f64>() / self.len() as f64
    }

    pub fn var_xi(&self) -> f64 {
        let m = self.mean_xi();
        self.samples.iter().map(|s| (s.0 - m) * (s.0 - m)).sum::<f64>() / self.len() as f64
    }

    pub fn var_eta(&self) -> f64 {
        let m = self.mean_eta();
        self.samples.iter().map(|s| (s.1 - m) * (s.1 - m)).sum::<f64>() / self.len() as f64
    }
}

/// Draw `n` independent (ξ, η) pairs.
///
/// Sample `i` comes from its own ChaCha stream keyed by (seed, i), so the
/// batch can be generated in parallel and is identical for every thread
/// count.
pub fn sample(dist: &SmearingDistribution, n: usize, seed: u64) -> Result<SmearingEnsemble> {
    if n == 0 {
        return Err(Error::Config("ensemble size must be at least 1".into()));
    }
    let xi_dist = Normal::new(0.0, dist.sigma_xi).expect("validated sigma");
    let eta_dist = Normal::new(0.0, dist.sigma_eta).expect("validated sigma");
    let samples: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let xi = xi_dist.sample(&mut rng);
            let eta = eta_dist.sample(&mut rng);
            (xi, eta)
        })
        .collect();
    Ok(SmearingEnsemble {
        samples,
        seed,
        distribution: dist.clone(),
    })
}

/// Histogram of the smeared point (x0 + ξᵢ, p0 + ηᵢ) on the grid, normalized
/// to unit mass. Cells are centered on the grid points.
pub fn smeared_density(
    x0: f64,
    p0: f64,
    ensemble: &SmearingEnsemble,
    grid: &PhaseSpaceGrid,
) -> Result<WignerState> {
    let d = ensemble.distribution();
    let x_cover = (grid.x_max() - x0).min(x0 - grid.x_min()) / d.sigma_xi();
    let p_cover = (grid.p_max() - p0).min(p0 - grid.p_min()) / d.sigma_eta();
    if x_cover < 5.0 || p_cover < 5.0 {
        return Err(Error::Config(format!(
            "grid must cover (x0, p0) ± 5σ; clearance is {x_cover:.2}σ in x, {p_cover:.2}σ in p"
        )));
    }
    let (nx, np) = (grid.nx(), grid.np());
    let (dx, dp) = (grid.dx(), grid.dp());
    let mut counts = vec![0u64; nx * np];
    let mut off_grid = 0usize;
    for &(xi, eta) in ensemble.samples() {
        let x = x0 + xi;
        let p = p0 + eta;
        let i = ((x - grid.x_min()) / dx).round();
        let j = ((p - grid.p_min()) / dp).round();
        if i < 0.0 || j < 0.0 || i >= nx as f64 || j >= np as f64 {
            off_grid += 1;
            continue;
        }
        counts[i as usize * np + j as usize] += 1;
    }
    let total = ensemble.len();
    if off_grid as f64 > OFF_GRID_LIMIT * total as f64 {
        return Err(Error::Coverage {
            off_grid,
            total,
            limit_fraction: OFF_GRID_LIMIT,
        });
    }
    let kept = (total - off_grid) as f64;
    let norm = 1.0 / (kept * grid.cell_area());
    let values = Array2::from_shape_fn((nx, np), |(i, j)| counts[i * np + j] as f64 * norm);
    Ok(WignerState::unchecked(grid.clone(), values, 0.0))
}

/// Residuals of the first-order correspondences on a (nominally Gaussian)
/// state: (ℏ/2)∂w/∂p against −(ℏ/(2σp²))·p·w, and the x-axis analogue.
///
/// Relative residuals are L∞ differences normalized by the L∞ of the
/// reference field. They vanish exactly only for centered Gaussians, whose
/// log-derivative is linear; `exactly_testable` records whether the state
/// looked Gaussian enough for the contract to apply.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorRelationReport {
    pub exactly_testable: bool,
    pub gaussian_linf_mismatch: f64,
    pub momentum_relation_residual: f64,
    pub position_relation_residual: f64,
}

/// Contract for the Gaussian case.
pub const RELATION_TOL: f64 = 1e-8;

pub fn check_operator_relations(
    w: &WignerState,
    dist: &SmearingDistribution,
) -> Result<OperatorRelationReport> {
    let grid = w.grid();
    let hbar = dist.hbar();
    let mean_x = w.mean_x();
    let mean_p = w.mean_p();
    let var_x = w.var_x();
    let var_p = w.var_p();

    // Moment-matched Gaussian reference to decide testability.
    let (reference, _) = crate::state::gaussian_wigner(
        grid,
        mean_x,
        mean_p,
        var_x.sqrt(),
        var_p.sqrt(),
        hbar,
    )?;
    let scale = w
        .values()
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let gaussian_linf_mismatch = w.linf_distance(&reference)? / scale;
    let exactly_testable = gaussian_linf_mismatch < 1e-6;

    let xs = grid.x_points();
    let ps = grid.p_points();

    // (ℏ/2)·∂w/∂p vs −(ℏ/(2σp²))·(p−p̄)·w
    let dwdp = fourier::derivative_axis1(w.values(), grid.p_length(), 1);
    let mut max_diff_p = 0.0f64;
    let mut max_ref_p = 0.0f64;
    for (i, row) in dwdp.outer_iter().enumerate() {
        let _ = i;
        for (j, d) in row.iter().enumerate() {
            let lhs = 0.5 * hbar * d;
            let rhs = -(hbar / (2.0 * var_p)) * (ps[j] - mean_p) * w.values()[[i, j]];
            max_diff_p = max_diff_p.max((lhs - rhs).abs());
            max_ref_p = max_ref_p.max(rhs.abs());
        }
    }

    // (ℏ/2)·∂w/∂x vs −(ℏ/(2σx²))·(x−x̄)·w
    let dwdx = fourier::derivative_axis0(w.values(), grid.x_length(), 1);
    let mut max_diff_x = 0.0f64;
    let mut max_ref_x = 0.0f64;
    for (i, row) in dwdx.outer_iter().enumerate() {
        for (j, d) in row.iter().enumerate() {
            let lhs = 0.5 * hbar * d;
            let rhs = -(hbar / (2.0 * var_x)) * (xs[i] - mean_x) * w.values()[[i, j]];
            max_diff_x = max_diff_x.max((lhs - rhs).abs());
            max_ref_x = max_ref_x.max(rhs.abs());
        }
    }

    Ok(OperatorRelationReport {
        exactly_testable,
        gaussian_linf_mismatch,
        momentum_relation_residual: max_diff_p / max_ref_p.max(f64::MIN_POSITIVE),
        position_relation_residual: max_diff_x / max_ref_x.max(f64::MIN_POSITIVE),
    })
}
