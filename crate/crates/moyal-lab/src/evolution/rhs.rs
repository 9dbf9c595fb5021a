//! The four right-hand sides.
//!
//! For separable H = p²/2m + V(x) the kinetic part of every law reduces to
//! the exact advection −(p/m)∂w/∂x, because p²/2m has no third or higher
//! momentum derivatives. The laws differ only in their potential part:
//!
//! * classical:  V′(x)·∂w/∂p
//! * sine operator, exactly: multiply the p-transform ŵ(x, y) by
//!   (i/ℏ)·[V(x + ℏy/2) − V(x − ℏy/2)] and transform back,
//! * series forms: V′∂w/∂p + Σ_k σ_k (ℏ/2)^{2k}/(2k+1)! · V^{(2k+1)} ∂^{2k+1}w/∂p^{2k+1}
//!   with σ_k = (−1)^k for the sine series and σ_k = +1 for the sinh series.
//!
//! Coefficients come from the Taylor expansion of the sine/sinh of the
//! bidifferential operator; the shared k = 0 term is the classical flow.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier;
use crate::grid::PhaseSpaceGrid;
use crate::hamiltonian::{poly_derivative_n, poly_eval, Hamiltonian, Potential};
use crate::state::WignerState;

use super::{Method, RhsField};

/// (2k+1)! for the series orders that can survive with degree ≤ 8 potentials.
fn odd_factorial(k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => 6.0,
        2 => 120.0,
        3 => 5040.0,
        k => (1..=2 * k + 1).map(|n| n as f64).product(),
    }
}

fn check_shapes(grid: &PhaseSpaceGrid, values: &Array2<f64>) -> Result<()> {
    if values.nrows() != grid.nx() || values.ncols() != grid.np() {
        return Err(Error::Contract(format!(
            "field is {}x{} but the grid is {}x{}",
            values.nrows(),
            values.ncols(),
            grid.nx(),
            grid.np()
        )));
    }
    Ok(())
}

/// −(p/m)·∂w/∂x, shared by all four laws.
fn kinetic_term(h: &Hamiltonian, grid: &PhaseSpaceGrid, values: &Array2<f64>) -> Array2<f64> {
    let mut dwdx = fourier::derivative_axis0(values, grid.x_length(), 1);
    let ps = grid.p_points();
    let inv_m = 1.0 / h.mass();
    for (j, &p) in ps.iter().enumerate() {
        let factor = -p * inv_m;
        dwdx.column_mut(j).mapv_inplace(|v| v * factor);
    }
    dwdx
}

/// +V′(x)·∂w/∂p.
fn classical_potential_term(
    h: &Hamiltonian,
    grid: &PhaseSpaceGrid,
    values: &Array2<f64>,
) -> Result<Array2<f64>> {
    let vprime = h.potential_derivative_on_grid(grid)?;
    let mut dwdp = fourier::derivative_axis1(values, grid.p_length(), 1);
    for (i, &vp) in vprime.iter().enumerate() {
        dwdp.row_mut(i).mapv_inplace(|v| v * vp);
    }
    Ok(dwdp)
}

/// Row-wise multiplier (i/ℏ)·[V(x + ℏy/2) − V(x − ℏy/2)] on the p-transform.
///
/// Polynomial potentials use the exact odd-order Taylor form of the shift
/// difference (no cancellation); tabulated potentials are shifted by spectral
/// interpolation along x. The unpaired Nyquist row is zeroed.
fn spectral_potential_multiplier(
    h: &Hamiltonian,
    grid: &PhaseSpaceGrid,
) -> Result<Array2<Complex64>> {
    let (nx, np) = (grid.nx(), grid.np());
    let ys = fourier::wavenumbers(np, grid.p_length());
    let hbar = h.hbar();
    let mut mult = Array2::<Complex64>::zeros((nx, np));
    match h.potential() {
        Potential::Polynomial { coefficients } => {
            // ΔV(x; s) = 2·Σ_{n odd} V^{(n)}(x)·sⁿ/n!
            let xs = grid.x_points();
            let mut odd_derivs: Vec<Vec<f64>> = Vec::new();
            let mut n = 1;
            loop {
                let c = poly_derivative_n(coefficients, n);
                if c.is_empty() {
                    break;
                }
                odd_derivs.push(xs.iter().map(|&x| poly_eval(&c, x)).collect());
                n += 2;
            }
            for (m, &y) in ys.iter().enumerate() {
                if m == np / 2 {
                    continue; // unpaired Nyquist mode
                }
                let s = 0.5 * hbar * y;
                for i in 0..nx {
                    let mut delta = 0.0;
                    let mut s_pow = s;
                    for (idx, deriv) in odd_derivs.iter().enumerate() {
                        let order = 2 * idx + 1;
                        delta += deriv[i] * s_pow / odd_factorial(idx);
                        let _ = order;
                        s_pow *= s * s;
                    }
                    mult[[i, m]] = Complex64::new(0.0, 2.0 * delta / hbar);
                }
            }
        }
        Potential::Tabulated { .. } => {
            let table = h.potential_on_grid(grid)?;
            let mut vhat: Vec<Complex64> =
                table.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fourier::fft_1d(&mut vhat);
            let kx = fourier::wavenumbers(nx, grid.x_length());
            for (m, &y) in ys.iter().enumerate() {
                if m == np / 2 {
                    continue;
                }
                let s = 0.5 * hbar * y;
                // V(x+s) − V(x−s) = IFFT[ V̂_k · 2i·sin(k·s) ]
                let mut shifted: Vec<Complex64> = vhat
                    .iter()
                    .zip(&kx)
                    .enumerate()
                    .map(|(kidx, (&vk, &k))| {
                        if kidx == nx / 2 {
                            Complex64::new(0.0, 0.0)
                        } else {
                            vk * Complex64::new(0.0, 2.0 * (k * s).sin())
                        }
                    })
                    .collect();
                fourier::ifft_1d(&mut shifted);
                for i in 0..nx {
                    mult[[i, m]] = Complex64::new(0.0, shifted[i].re / hbar);
                }
            }
        }
    }
    Ok(mult)
}

pub(crate) fn liouville_raw(
    h: &Hamiltonian,
    grid: &PhaseSpaceGrid,
    values: &Array2<f64>,
) -> Result<Array2<f64>> {
    check_shapes(grid, values)?;
    let mut out = kinetic_term(h, grid, values);
    out += &classical_potential_term(h, grid, values)?;
    Ok(out)
}

pub(crate) fn moyal_spectral_raw(
    h: &Hamiltonian,
    grid: &PhaseSpaceGrid,
    values: &Array2<f64>,
) -> Result<Array2<f64>> {
    check_shapes(grid, values)?;
    let mut out = kinetic_term(h, grid, values);
    let mult = spectral_potential_multiplier(h, grid)?;
    let (kernel, _residue) = fourier::apply_rowwise_multiplier_axis1(values, &mult);
    out += &kernel;
    Ok(out)
}

/// Correction term t_k = (ℏ/2)^{2k}/(2k+1)!·V^{(2k+1)}(x)·∂^{2k+1}w/∂p^{2k+1}
/// without its series sign; identically zero when V^{(2k+1)} ≡ 0.
fn series_term_raw(
    h: &Hamiltonian,
    grid: &PhaseSpaceGrid,
    values: &Array2<f64>,
    k: usize,
) -> Result<Option<Array2<f64>>> {
    let coefficients = match h.potential() {
        Potential::Polynomial { coefficients } => coefficients,
        Potential::Tabulated { .. } => {
            return Err(Error::Unsupported {
                what: "truncated series with a tabulated potential".into(),
                hint: "exact high derivatives need a polynomial potential; use moyal_rhs_spectral"
                    .into(),
            })
        }
    };
    let order = 2 * k + 1;
    let dcoef = poly_derivative_n(coefficients, order);
    if dcoef.iter().all(|&c| c == 0.0) {
        return Ok(None);
    }
    let xs = grid.x_points();
    let vn: Vec<f64> = xs.iter().map(|&x| poly_eval(&dcoef, x)).collect();
    let mut dnw = fourier::derivative_axis1(values, grid.p_length(), order as u32);
    let coeff = (0.5 * h.hbar()).powi(2 * k as i32) / odd_factorial(k);
    for (i, &v) in vn.iter().enumerate() {
        let factor = coeff * v;
        dnw.row_mut(i).mapv_inplace(|w| w * factor);
    }
    Ok(Some(dnw))
}

fn truncated_raw(
    h: &Hamiltonian,
    grid: &PhaseSpaceGrid,
    values: &Array2<f64>,
    k_max: usize,
    alternating: bool,
) -> Result<Array2<f64>> {
    check_shapes(grid, values)?;
    if !h.potential().is_polynomial() {
        return Err(Error::Unsupported {
            what: "truncated series with a tabulated potential".into(),
            hint: "exact high derivatives need a polynomial potential; use moyal_rhs_spectral".into(),
        });
    }
    let mut out = kinetic_term(h, grid, values);
    out += &classical_potential_term(h, grid, values)?;
    // Terms beyond the polynomial degree vanish identically and are skipped.
    let k_eff = match h.poly_degree() {
        Some(d) if d >= 1 => k_max.min((d - 1) / 2),
        _ => 0,
    };
    for k in 1..=k_eff {
        if let Some(term) = series_term_raw(h, grid, values, k)? {
            let sign = if alternating && k % 2 == 1 { -1.0 } else { 1.0 };
            out.zip_mut_with(&term, |o, t| *o += sign * t);
        }
    }
    Ok(out)
}

pub(crate) fn rhs_raw(
    method: Method,
    h: &Hamiltonian,
    grid: &PhaseSpaceGrid,
    values: &Array2<f64>,
) -> Result<Array2<f64>> {
    match method {
        Method::Liouville => liouville_raw(h, grid, values),
        Method::MoyalSpectral => moyal_spectral_raw(h, grid, values),
        Method::MoyalTruncated { k_max } => truncated_raw(h, grid, values, k_max, true),
        Method::SinhTruncated { k_max } => truncated_raw(h, grid, values, k_max, false),
    }
}

/// Classical Liouville flow: ∂w/∂t = −(p/m)∂w/∂x + V′(x)∂w/∂p.
pub fn liouville_rhs(h: &Hamiltonian, w: &WignerState) -> Result<RhsField> {
    let values = liouville_raw(h, w.grid(), w.values())?;
    Ok(RhsField::new(w.grid().clone(), values))
}

/// Exact sine-operator evolution for separable H, evaluated spectrally.
pub fn moyal_rhs_spectral(h: &Hamiltonian, w: &WignerState) -> Result<RhsField> {
    let values = moyal_spectral_raw(h, w.grid(), w.values())?;
    Ok(RhsField::new(w.grid().clone(), values))
}

/// Sine series truncated after the k_max-th correction term.
pub fn moyal_rhs_truncated(h: &Hamiltonian, w: &WignerState, k_max: usize) -> Result<RhsField> {
    let values = truncated_raw(h, w.grid(), w.values(), k_max, true)?;
    Ok(RhsField::new(w.grid().clone(), values))
}

/// Hyperbolic-sine series: identical to [`moyal_rhs_truncated`] except that
/// every correction term enters with a positive sign.
pub fn sinh_rhs(h: &Hamiltonian, w: &WignerState, k_max: usize) -> Result<RhsField> {
    let values = truncated_raw(h, w.grid(), w.values(), k_max, false)?;
    Ok(RhsField::new(w.grid().clone(), values))
}

/// The k-th correction term in isolation (unsigned); k ≥ 1.
pub fn series_term(h: &Hamiltonian, w: &WignerState, k: usize) -> Result<RhsField> {
    if k == 0 {
        return Err(Error::Contract("series_term is defined for k >= 1".into()));
    }
    let values = series_term_raw(h, w.grid(), w.values(), k)?
        .unwrap_or_else(|| Array2::zeros((w.grid().nx(), w.grid().np())));
    Ok(RhsField::new(w.grid().clone(), values))
}

/// Dispatch on the configured method.
pub fn evaluate_rhs(method: Method, h: &Hamiltonian, w: &WignerState) -> Result<RhsField> {
    let values = rhs_raw(method, h, w.grid(), w.values())?;
    Ok(RhsField::new(w.grid().clone(), values))
}
