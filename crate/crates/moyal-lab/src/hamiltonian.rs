//! Separable Hamiltonians H = p²/2m + V(x).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PhaseSpaceGrid;

/// Highest polynomial degree the terminating bidifferential series supports.
pub const MAX_POLY_DEGREE: usize = 8;

/// Potential energy V(x): polynomial coefficients `c_0..c_d` (so
/// `V(x) = Σ c_k x^k`), or values tabulated on the position grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Potential {
    Polynomial { coefficients: Vec<f64> },
    Tabulated { values: Vec<f64> },
}

impl Potential {
    pub fn polynomial(coefficients: Vec<f64>) -> Self {
        Potential::Polynomial { coefficients }
    }

    pub fn tabulated(values: Vec<f64>) -> Self {
        Potential::Tabulated { values }
    }

    pub fn is_polynomial(&self) -> bool {
        matches!(self, Potential::Polynomial { .. })
    }
}

/// Evaluate `Σ c_k x^k` by Horner's rule.
pub fn poly_eval(coefficients: &[f64], x: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Coefficients of the derivative polynomial.
pub fn poly_derivative(coefficients: &[f64]) -> Vec<f64> {
    coefficients
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| k as f64 * c)
        .collect()
}

/// Coefficients of the n-th derivative polynomial.
pub fn poly_derivative_n(coefficients: &[f64], n: usize) -> Vec<f64> {
    let mut c = coefficients.to_vec();
    for _ in 0..n {
        c = poly_derivative(&c);
    }
    c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian {
    mass: f64,
    hbar: f64,
    potential: Potential,
}

impl Hamiltonian {
    pub fn new(mass: f64, hbar: f64, potential: Potential) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::Config(format!("mass must be positive, got {mass}")));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::Config(format!("hbar must be positive, got {hbar}")));
        }
        match &potential {
            Potential::Polynomial { coefficients } => {
                if coefficients.len() > MAX_POLY_DEGREE + 1 {
                    return Err(Error::Config(format!(
                        "polynomial degree {} exceeds the supported maximum {MAX_POLY_DEGREE}",
                        coefficients.len().saturating_sub(1)
                    )));
                }
                if coefficients.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Config("polynomial coefficients must be finite".into()));
                }
            }
            Potential::Tabulated { values } => {
                if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Config(
                        "tabulated potential must be non-empty and finite".into(),
                    ));
                }
            }
        }
        Ok(Self {
            mass,
            hbar,
            potential,
        })
    }

    /// Harmonic oscillator `V = ½ m ω² x²` in natural units.
    pub fn harmonic(mass: f64, omega: f64, hbar: f64) -> Result<Self> {
        Self::new(
            mass,
            hbar,
            Potential::polynomial(vec![0.0, 0.0, 0.5 * mass * omega * omega]),
        )
    }

    /// Free particle, V = 0.
    pub fn free(mass: f64, hbar: f64) -> Result<Self> {
        Self::new(mass, hbar, Potential::polynomial(vec![0.0]))
    }

    /// Quartic well `V = x⁴/4`.
    pub fn quartic(mass: f64, hbar: f64) -> Result<Self> {
        Self::new(mass, hbar, Potential::polynomial(vec![0.0, 0.0, 0.0, 0.0, 0.25]))
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// Degree of the polynomial potential, if polynomial.
    pub fn poly_degree(&self) -> Option<usize> {
        match &self.potential {
            Potential::Polynomial { coefficients } => {
                let d = coefficients
                    .iter()
                    .rposition(|&c| c != 0.0)
                    .unwrap_or(0);
                Some(d)
            }
            Potential::Tabulated { .. } => None,
        }
    }

    /// V at arbitrary sample points; tabulated potentials require the point
    /// count to match the table (same grid).
    pub fn potential_at(&self, xs: &[f64]) -> Result<Vec<f64>> {
        match &self.potential {
            Potential::Polynomial { coefficients } => {
                Ok(xs.iter().map(|&x| poly_eval(coefficients, x)).collect())
            }
            Potential::Tabulated { values } => {
                if values.len() != xs.len() {
                    return Err(Error::Contract(format!(
                        "tabulated potential has {} samples but {} were requested",
                        values.len(),
                        xs.len()
                    )));
                }
                Ok(values.clone())
            }
        }
    }

    /// V sampled on the grid's x points.
    pub fn potential_on_grid(&self, grid: &PhaseSpaceGrid) -> Result<Vec<f64>> {
        self.potential_at(&grid.x_points())
    }

    /// V'(x) on the grid; only defined for polynomial potentials.
    pub fn potential_derivative_on_grid(&self, grid: &PhaseSpaceGrid) -> Result<Vec<f64>> {
        match &self.potential {
            Potential::Polynomial { coefficients } => {
                let d = poly_derivative(coefficients);
                Ok(grid.x_points().iter().map(|&x| poly_eval(&d, x)).collect())
            }
            Potential::Tabulated { .. } => Err(Error::Config(
                "tabulated potential carries no derivative data; use a polynomial potential or the spectral method"
                    .into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use approx::assert_abs_diff_eq;

    #[test]
    fn horner_and_derivatives() {
        // V = 1 + 2x + 3x²
        let c = vec![1.0, 2.0, 3.0];
        assert_abs_diff_eq!(poly_eval(&c, 2.0), 17.0);
        assert_eq!(poly_derivative(&c), vec![2.0, 6.0]);
        assert_eq!(poly_derivative_n(&c, 2), vec![6.0]);
        assert!(poly_derivative_n(&c, 3).is_empty());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Hamiltonian::new(0.0, 1.0, Potential::polynomial(vec![0.0])).is_err());
        assert!(Hamiltonian::new(1.0, -1.0, Potential::polynomial(vec![0.0])).is_err());
        let too_high = Potential::polynomial(vec![0.0; 10]);
        assert!(Hamiltonian::new(1.0, 1.0, too_high).is_err());
    }

    #[test]
    fn tabulated_needs_matching_grid() {
        let grid = make_grid(16, 8, (-1.0, 1.0), (-1.0, 1.0)).unwrap();
        let h = Hamiltonian::new(1.0, 1.0, Potential::tabulated(vec![0.0; 8])).unwrap();
        assert!(h.potential_on_grid(&grid).is_err());
        let h = Hamiltonian::new(1.0, 1.0, Potential::tabulated(vec![0.0; 16])).unwrap();
        assert_eq!(h.potential_on_grid(&grid).unwrap().len(), 16);
        assert!(h.potential_derivative_on_grid(&grid).is_err());
    }

    #[test]
    fn harmonic_degree_is_two() {
        let h = Hamiltonian::harmonic(1.0, 1.0, 1.0).unwrap();
        assert_eq!(h.poly_degree(), Some(2));
        let grid = make_grid(8, 8, (-2.0, 2.0), (-2.0, 2.0)).unwrap();
        let v = h.potential_on_grid(&grid).unwrap();
        assert_abs_diff_eq!(v[0], 2.0); // V(-2) = 2
    }
}
