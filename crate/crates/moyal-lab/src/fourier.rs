//! Thin spectral layer over rustfft: cached plans, signed wavenumbers, and
//! multiplier application along either axis of a 2-D real field.
//!
//! Convention: the forward transform uses the e^{-i} kernel, so a field
//! expanded as Σ c_m e^{+iκ_m u} has ∂/∂u act as multiplication by `i·κ_m`
//! on the forward coefficients.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use ndarray::parallel::prelude::*;
use ndarray::{Array2, ArrayView1, ArrayViewMut1, Axis};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

type PlanMap = Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>;

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<PlanMap> = OnceLock::new();
    let plans = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = plans.lock().expect("fft plan cache poisoned");
    map.entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// Signed wavenumbers `κ_m = 2π·m̃/length` in FFT storage order
/// (`m̃ = m` for `m < n/2`, `m̃ = m − n` otherwise).
pub fn wavenumbers(n: usize, length: f64) -> Vec<f64> {
    let step = 2.0 * std::f64::consts::PI / length;
    (0..n)
        .map(|m| {
            let signed = if m < n / 2 {
                m as isize
            } else {
                m as isize - n as isize
            };
            signed as f64 * step
        })
        .collect()
}

/// Multiplier `(iκ)^order` for spectral differentiation. The unpaired Nyquist
/// mode is zeroed for odd orders to keep real fields real.
pub fn derivative_multiplier(n: usize, length: f64, order: u32) -> Vec<Complex64> {
    let ks = wavenumbers(n, length);
    ks.iter()
        .enumerate()
        .map(|(m, &k)| {
            if order % 2 == 1 && m == n / 2 {
                Complex64::new(0.0, 0.0)
            } else {
                (Complex64::new(0.0, k)).powi(order as i32)
            }
        })
        .collect()
}

fn transform_lane(
    input: ArrayView1<'_, f64>,
    mut output: ArrayViewMut1<'_, f64>,
    mult: &[Complex64],
    fwd: &Arc<dyn Fft<f64>>,
    inv: &Arc<dyn Fft<f64>>,
) -> f64 {
    let n = input.len();
    let mut buf: Vec<Complex64> = input.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    for (b, m) in buf.iter_mut().zip(mult) {
        *b *= m;
    }
    inv.process(&mut buf);
    let scale = 1.0 / n as f64;
    let mut residue = 0.0f64;
    for (out, b) in output.iter_mut().zip(&buf) {
        *out = b.re * scale;
        residue = residue.max((b.im * scale).abs());
    }
    residue
}

/// Apply one spectral multiplier along axis 0 (the x axis, lanes = columns).
/// Returns the real result and the largest imaginary residue seen.
pub fn apply_multiplier_axis0(field: &Array2<f64>, mult: &[Complex64]) -> (Array2<f64>, f64) {
    let nx = field.nrows();
    assert_eq!(mult.len(), nx, "multiplier length must match axis 0");
    let fwd = plan(nx, false);
    let inv = plan(nx, true);
    let mut out = Array2::zeros(field.raw_dim());
    let residue = out
        .axis_iter_mut(Axis(1))
        .into_par_iter()
        .zip(field.axis_iter(Axis(1)))
        .map(|(lane_out, lane_in)| transform_lane(lane_in, lane_out, mult, &fwd, &inv))
        .reduce(|| 0.0, f64::max);
    (out, residue)
}

/// Apply one spectral multiplier along axis 1 (the p axis, lanes = rows).
pub fn apply_multiplier_axis1(field: &Array2<f64>, mult: &[Complex64]) -> (Array2<f64>, f64) {
    let np = field.ncols();
    assert_eq!(mult.len(), np, "multiplier length must match axis 1");
    let fwd = plan(np, false);
    let inv = plan(np, true);
    let mut out = Array2::zeros(field.raw_dim());
    let residue = out
        .axis_iter_mut(Axis(0))
        .into_par_iter()
        .zip(field.axis_iter(Axis(0)))
        .map(|(lane_out, lane_in)| transform_lane(lane_in, lane_out, mult, &fwd, &inv))
        .reduce(|| 0.0, f64::max);
    (out, residue)
}

/// Apply a row-dependent multiplier along axis 1: row `i` of the field is
/// multiplied, in transform space, by row `i` of `mult`.
pub fn apply_rowwise_multiplier_axis1(
    field: &Array2<f64>,
    mult: &Array2<Complex64>,
) -> (Array2<f64>, f64) {
    assert_eq!(field.raw_dim(), mult.raw_dim(), "multiplier shape mismatch");
    let np = field.ncols();
    let fwd = plan(np, false);
    let inv = plan(np, true);
    let mut out = Array2::zeros(field.raw_dim());
    let residue = out
        .axis_iter_mut(Axis(0))
        .into_par_iter()
        .zip(field.axis_iter(Axis(0)))
        .zip(mult.axis_iter(Axis(0)))
        .map(|((lane_out, lane_in), lane_mult)| {
            transform_lane(
                lane_in,
                lane_out,
                lane_mult.as_slice().expect("contiguous multiplier row"),
                &fwd,
                &inv,
            )
        })
        .reduce(|| 0.0, f64::max);
    (out, residue)
}

/// Spectral ∂^order/∂x^order along axis 0.
pub fn derivative_axis0(field: &Array2<f64>, length: f64, order: u32) -> Array2<f64> {
    let mult = derivative_multiplier(field.nrows(), length, order);
    apply_multiplier_axis0(field, &mult).0
}

/// Spectral ∂^order/∂p^order along axis 1.
pub fn derivative_axis1(field: &Array2<f64>, length: f64, order: u32) -> Array2<f64> {
    let mult = derivative_multiplier(field.ncols(), length, order);
    apply_multiplier_axis1(field, &mult).0
}

/// Spectral derivative of a 1-D real signal on a periodic domain.
pub fn derivative_1d(values: &[f64], length: f64, order: u32) -> Vec<f64> {
    let n = values.len();
    let mult = derivative_multiplier(n, length, order);
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_1d(&mut buf);
    for (b, m) in buf.iter_mut().zip(&mult) {
        *b *= m;
    }
    ifft_1d(&mut buf);
    buf.iter().map(|c| c.re).collect()
}

/// In-place 1-D FFT of a complex buffer (unnormalized forward).
pub fn fft_1d(buf: &mut [Complex64]) {
    plan(buf.len(), false).process(buf);
}

/// In-place 1-D inverse FFT, normalized by 1/n.
pub fn ifft_1d(buf: &mut [Complex64]) {
    let n = buf.len();
    plan(n, true).process(buf);
    let scale = 1.0 / n as f64;
    for b in buf.iter_mut() {
        *b *= scale;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn single_mode(nx: usize, np: usize, length: f64) -> Array2<f64> {
        // f(x, p) = sin(κ x) with κ the fundamental wavenumber
        let k = 2.0 * PI / length;
        Array2::from_shape_fn((nx, np), |(i, _)| (k * (i as f64) * (length / nx as f64)).sin())
    }

    #[test]
    fn wavenumbers_are_signed() {
        let ks = wavenumbers(8, 2.0 * PI);
        assert_eq!(ks, vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
    }

    #[test]
    fn derivative_of_single_mode_is_exact() {
        let (nx, np, length) = (32, 8, 16.0);
        let f = single_mode(nx, np, length);
        let df = derivative_axis0(&f, length, 1);
        let k = 2.0 * PI / length;
        for i in 0..nx {
            let x = i as f64 * length / nx as f64;
            assert_abs_diff_eq!(df[[i, 0]], k * (k * x).cos(), epsilon = 1e-12);
        }
    }

    #[test]
    fn third_derivative_flips_sign_of_first() {
        // ∂³ sin(κx) = -κ² ∂ sin(κx)
        let (nx, np, length) = (32, 8, 16.0);
        let f = single_mode(nx, np, length);
        let d1 = derivative_axis0(&f, length, 1);
        let d3 = derivative_axis0(&f, length, 3);
        let k = 2.0 * PI / length;
        for i in 0..nx {
            assert_abs_diff_eq!(d3[[i, 3]], -k * k * d1[[i, 3]], epsilon = 1e-12);
        }
    }

    #[test]
    fn gaussian_derivative_matches_analytic() {
        let (n, length) = (128usize, 16.0);
        let dx = length / n as f64;
        let f = Array2::from_shape_fn((8, n), |(_, j)| {
            let p = -8.0 + j as f64 * dx;
            (-p * p / 2.0).exp()
        });
        let df = derivative_axis1(&f, length, 1);
        for j in 0..n {
            let p = -8.0 + j as f64 * dx;
            assert_abs_diff_eq!(df[[2, j]], -p * (-p * p / 2.0).exp(), epsilon = 1e-10);
        }
    }

    #[test]
    fn imaginary_residue_is_tiny_for_real_multipliers_pipeline() {
        let (nx, np, length) = (32, 16, 16.0);
        let f = single_mode(nx, np, length);
        let mult = derivative_multiplier(nx, length, 1);
        let (_, residue) = apply_multiplier_axis0(&f, &mult);
        assert!(residue < 1e-12, "residue {residue}");
    }

    #[test]
    fn round_trip_1d() {
        let mut buf: Vec<Complex64> = (0..16)
            .map(|i| Complex64::new((i as f64 * 0.7).sin(), 0.0))
            .collect();
        let orig = buf.clone();
        fft_1d(&mut buf);
        ifft_1d(&mut buf);
        for (a, b) in buf.iter().zip(&orig) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-13);
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-13);
        }
    }
}
