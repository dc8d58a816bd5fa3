//! Periodic spatial grid and field snapshots for the method of lines.

use num_complex::Complex64;

use crate::error::{ModelError, SimError};

/// Uniform periodic grid x_j = j*h on [0, L), h = L/n.
///
/// Plane waves fit the grid only at wavenumbers q = 2*pi*m/L with integer m;
/// everything that takes a wavenumber goes through [`Grid::mode_of`] so an
/// incommensurate request fails loudly instead of aliasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n_points: usize,
    length: f64,
}

impl Grid {
    pub const MIN_POINTS: usize = 16;

    pub fn new(n_points: usize, length: f64) -> Result<Self, SimError> {
        if n_points < Self::MIN_POINTS {
            return Err(ModelError::InvalidParameter {
                name: "n_points",
                value: n_points as f64,
                reason: "grid needs at least 16 points",
            }
            .into());
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: "length",
                value: length,
                reason: "domain length must be positive and finite",
            }
            .into());
        }
        Ok(Self { n_points, length })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n_points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    /// Integer mode index of an admissible wavenumber, or
    /// `InadmissibleWavenumber` when q*L/(2*pi) is not an integer.
    pub fn mode_of(&self, q: f64) -> Result<i64, SimError> {
        let m = q * self.length / (2.0 * std::f64::consts::PI);
        let rounded = m.round();
        if (m - rounded).abs() > 1e-9 * m.abs().max(1.0) {
            return Err(SimError::InadmissibleWavenumber {
                q,
                length: self.length,
            });
        }
        Ok(rounded as i64)
    }

    pub fn wavenumber(&self, mode: i64) -> f64 {
        2.0 * std::f64::consts::PI * mode as f64 / self.length
    }

    pub fn nearest_mode(&self, q: f64) -> i64 {
        (q * self.length / (2.0 * std::f64::consts::PI)).round() as i64
    }

    /// Eigenvalue of minus the three-point Laplacian on a discrete plane
    /// wave: 2(1 - cos(q h))/h^2, the grid-corrected stand-in for q^2.
    pub fn discrete_dispersion(&self, q: f64) -> f64 {
        let h = self.spacing();
        2.0 * (1.0 - (q * h).cos()) / (h * h)
    }
}

impl Default for Grid {
    /// 500 points over 16 fundamental periods of a unit-wavenumber wave.
    fn default() -> Self {
        Self {
            n_points: 500,
            length: 32.0 * std::f64::consts::PI,
        }
    }
}

/// Complex field on a [`Grid`] at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub t: f64,
    pub values: Vec<Complex64>,
}

impl FieldState {
    pub fn new(t: f64, values: Vec<Complex64>) -> Self {
        Self { t, values }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn mean_modulus(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().map(|v| v.norm()).sum::<f64>() / self.values.len() as f64
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Discrete L2 norm sqrt(h * sum |A_j|^2).
    pub fn l2_norm(&self, grid: &Grid) -> f64 {
        (grid.spacing() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }
}
