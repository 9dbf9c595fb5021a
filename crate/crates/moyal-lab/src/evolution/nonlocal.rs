//! Finite-shift derivatives along x and the sin↔sinh substitution check.
//!
//! The shift-difference operator [F(x+ξ) − F(x−ξ)]/(2ξ) = (1/ξ)sinh(ξ∂x)F
//! acts on the mode e^{iκx} as multiplication by sinh(iκξ)/ξ = i·sin(κξ)/ξ.
//! Continuing the shift to an imaginary value, ξ → iξ, turns it into
//! (1/ξ)sin(ξ∂x), whose multiplier is sin(iκξ)/ξ = i·sinh(κξ)/ξ. The two
//! variants therefore trade a bounded multiplier for an exponentially
//! amplifying one, which is the entire difference between them.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier;
use crate::grid::PhaseSpaceGrid;

/// Tolerance for the operator-level identity sin x = −i·sinh(ix).
pub const SIN_SINH_IDENTITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftVariant {
    /// (1/ξ)sinh(ξ∂x): the central difference with real shift ξ.
    Sinh,
    /// (1/ξ)sin(ξ∂x): the same operator continued to imaginary shift.
    Sin,
}

fn validate(grid: &PhaseSpaceGrid, field: &Array2<f64>, xi: f64) -> Result<()> {
    if field.nrows() != grid.nx() || field.ncols() != grid.np() {
        return Err(Error::Contract(format!(
            "field is {}x{} but the grid is {}x{}",
            field.nrows(),
            field.ncols(),
            grid.nx(),
            grid.np()
        )));
    }
    if !(xi.is_finite() && xi > 0.0) {
        return Err(Error::Config(format!("shift xi must be positive, got {xi}")));
    }
    let half = 0.5 * grid.x_length();
    if xi > half {
        return Err(Error::DomainWrap { xi, half_length: half });
    }
    Ok(())
}

/// Shift-difference derivative of a field along the x axis.
pub fn nonlocal_derivative(
    grid: &PhaseSpaceGrid,
    field: &Array2<f64>,
    xi: f64,
    variant: ShiftVariant,
) -> Result<Array2<f64>> {
    validate(grid, field, xi)?;
    let nx = grid.nx();
    let ks = fourier::wavenumbers(nx, grid.x_length());
    let mult: Vec<Complex64> = ks
        .iter()
        .enumerate()
        .map(|(m, &k)| {
            if m == nx / 2 {
                return Complex64::new(0.0, 0.0); // unpaired Nyquist mode
            }
            match variant {
                ShiftVariant::Sinh => Complex64::new(0.0, (k * xi).sin() / xi),
                ShiftVariant::Sin => Complex64::new(0.0, (k * xi).sinh() / xi),
            }
        })
        .collect();
    Ok(fourier::apply_multiplier_axis0(field, &mult).0)
}

/// Result of re-evaluating the shift operator along two algebraic routes.
#[derive(Debug, Clone, PartialEq)]
pub struct SubstitutionReport {
    pub xi: f64,
    pub max_abs_difference: f64,
    pub tolerance: f64,
}

impl SubstitutionReport {
    pub fn passed(&self) -> bool {
        self.max_abs_difference <= self.tolerance
    }
}

/// Evaluate the sinh-variant multiplier at the imaginary shift iξ (via the
/// complex sinh) and the sin-variant multiplier at the real shift ξ (via the
/// complex sin), apply both to the field, and report the largest pointwise
/// difference. The identity sin x = −i·sinh(ix) makes the two fields equal up
/// to the arithmetic of the two special-function routes.
pub fn check_sin_sinh_substitution(
    grid: &PhaseSpaceGrid,
    field: &Array2<f64>,
    xi: f64,
) -> Result<SubstitutionReport> {
    validate(grid, field, xi)?;
    let nx = grid.nx();
    let ks = fourier::wavenumbers(nx, grid.x_length());
    let imaginary_shift = Complex64::new(0.0, xi);
    let mut sinh_route = Vec::with_capacity(nx);
    let mut sin_route = Vec::with_capacity(nx);
    for (m, &k) in ks.iter().enumerate() {
        if m == nx / 2 {
            sinh_route.push(Complex64::new(0.0, 0.0));
            sin_route.push(Complex64::new(0.0, 0.0));
            continue;
        }
        // sinh(a·iκ)/a at a = iξ
        sinh_route.push((imaginary_shift * Complex64::new(0.0, k)).sinh() / imaginary_shift);
        // sin(ξ·iκ)/ξ
        sin_route.push(Complex64::new(0.0, xi * k).sin() / xi);
    }
    let (field_sinh, _) = fourier::apply_multiplier_axis0(field, &sinh_route);
    let (field_sin, _) = fourier::apply_multiplier_axis0(field, &sin_route);
    let max_abs_difference = field_sinh
        .iter()
        .zip(field_sin.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(SubstitutionReport {
        xi,
        max_abs_difference,
        tolerance: SIN_SINH_IDENTITY_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::state::random_band_limited;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn grid() -> PhaseSpaceGrid {
        make_grid(128, 8, (-8.0, 8.0), (-1.0, 1.0)).unwrap()
    }

    fn on_grid(g: &PhaseSpaceGrid, f: impl Fn(f64) -> f64) -> Array2<f64> {
        let xs = g.x_points();
        Array2::from_shape_fn((g.nx(), g.np()), |(i, _)| f(xs[i]))
    }

    #[test]
    fn central_difference_of_sampled_line_is_one_inside() {
        // F = x sampled periodically; integer-sample shifts make the circular
        // shift exact, so interior points see the true central difference.
        let g = grid();
        let f = on_grid(&g, |x| x);
        for xi in [0.5, 1.0] {
            let df = nonlocal_derivative(&g, &f, xi, ShiftVariant::Sinh).unwrap();
            let xs = g.x_points();
            for (i, &x) in xs.iter().enumerate() {
                if x.abs() <= 4.0 {
                    assert_abs_diff_eq!(df[[i, 0]], 1.0, epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn fundamental_mode_gains() {
        // On sin(κx): the real-shift variant applies gain sin(κξ)/ξ to the
        // rotated mode, the imaginary-shift variant applies sinh(κξ)/ξ.
        let g = grid();
        let k = 2.0 * PI / g.x_length();
        let f = on_grid(&g, |x| (k * x).sin());
        let xs = g.x_points();

        let xi = 1.0;
        let sinh_variant = nonlocal_derivative(&g, &f, xi, ShiftVariant::Sinh).unwrap();
        for (i, &x) in xs.iter().enumerate() {
            let expected = (k * xi).sin() / xi * (k * x).cos();
            assert_abs_diff_eq!(sinh_variant[[i, 3]], expected, epsilon = 1e-10);
        }

        // The amplifying variant magnifies the FFT's roundoff floor by
        // sinh(κ_max·ξ), so the pointwise bar scales with the shift: tight
        // at ξ = 0.25, loose at ξ = 1 where sinh(κ_max) ≈ 3e10.
        for (xi, tol) in [(0.25, 1e-10), (1.0, 1e-5)] {
            let sin_variant = nonlocal_derivative(&g, &f, xi, ShiftVariant::Sin).unwrap();
            for (i, &x) in xs.iter().enumerate() {
                let expected = (k * xi).sinh() / xi * (k * x).cos();
                assert_abs_diff_eq!(sin_variant[[i, 3]], expected, epsilon = tol);
            }
        }
    }

    #[test]
    fn both_variants_reduce_to_the_derivative_as_xi_vanishes() {
        let g = grid();
        let f = on_grid(&g, |x| (-0.5 * x * x).exp());
        let exact = fourier::derivative_axis0(&f, g.x_length(), 1);
        let scale = exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for variant in [ShiftVariant::Sinh, ShiftVariant::Sin] {
            let df = nonlocal_derivative(&g, &f, 1e-4, variant).unwrap();
            let max_rel = df
                .iter()
                .zip(exact.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                / scale;
            assert!(max_rel <= 1e-6, "{variant:?} deviates by {max_rel}");
        }
    }

    #[test]
    fn oversized_shift_is_rejected() {
        let g = grid();
        let f = on_grid(&g, |x| x);
        let err = nonlocal_derivative(&g, &f, 9.0, ShiftVariant::Sinh).unwrap_err();
        assert!(matches!(err, Error::DomainWrap { .. }));
    }

    #[test]
    fn substitution_identity_on_gaussian() {
        let g = grid();
        let f = on_grid(&g, |x| (-0.5 * x * x).exp());
        let report = check_sin_sinh_substitution(&g, &f, 0.5).unwrap();
        assert!(report.passed(), "difference {}", report.max_abs_difference);
    }

    #[test]
    fn substitution_identity_on_single_mode() {
        let g = grid();
        let k = 2.0 * PI / g.x_length();
        let f = on_grid(&g, |x| (k * x).sin());
        let report = check_sin_sinh_substitution(&g, &f, 1.0).unwrap();
        assert!(report.max_abs_difference <= 1e-12, "{}", report.max_abs_difference);
    }

    #[test]
    fn substitution_identity_on_seeded_random_fields() {
        let g = make_grid(128, 16, (-8.0, 8.0), (-1.0, 1.0)).unwrap();
        for seed in 0..5u64 {
            let w = random_band_limited(&g, 8, 2, 1.0, seed).unwrap();
            let report = check_sin_sinh_substitution(&g, w.values(), 0.25).unwrap();
            assert!(report.passed(), "seed {seed}: {}", report.max_abs_difference);
        }
    }
}
