//! Dirichlet sine basis on `[0, L]`: eigenpairs of `−K d²/dx²`, analysis and
//! synthesis against the orthonormal functions `√(2/L) sin(iπx/L)`, and the
//! spectral Sobolev seminorm `(Σ λ_i^γ c_i²)^{1/2}`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Tolerance on `f(0)` and `f(L)` accepted by [`SpectralBasis::analyze`].
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBasis {
    diffusivity: f64,
    length: f64,
    modes: usize,
}

/// One orthonormal eigenfunction `φ̂_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenfunction {
    wavenumber: f64,
    amplitude: f64,
}

impl Eigenfunction {
    pub fn eval(&self, x: f64) -> f64 {
        self.amplitude * (self.wavenumber * x).sin()
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        -self.wavenumber * self.wavenumber * self.eval(x)
    }
}

/// Coefficients `c_i = (v, φ̂_i)`, `i = 1..=N` stored at index `i - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoefficients(pub Vec<f64>);

impl SpectralCoefficients {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl SpectralBasis {
    pub fn new(diffusivity: f64, length: f64, modes: usize) -> Result<Self> {
        if !(diffusivity > 0.0 && diffusivity.is_finite()) {
            return Err(Error::Domain(format!("diffusivity K must be positive, got {diffusivity}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Domain(format!("domain length L must be positive, got {length}")));
        }
        if modes == 0 {
            return Err(Error::Domain("mode count N must be at least 1".into()));
        }
        Ok(Self { diffusivity, length, modes })
    }

    pub fn diffusivity(&self) -> f64 {
        self.diffusivity
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// `λ_i = K i² π² / L²`.
    pub fn eigenvalue(&self, i: usize) -> f64 {
        let w = i as f64 * PI / self.length;
        self.diffusivity * w * w
    }

    pub fn eigenfunction(&self, i: usize) -> Eigenfunction {
        Eigenfunction { wavenumber: i as f64 * PI / self.length, amplitude: (2.0 / self.length).sqrt() }
    }

    pub fn eigenpair(&self, i: usize) -> Result<(f64, Eigenfunction)> {
        if i == 0 || i > self.modes {
            return Err(Error::Domain(format!("mode index {i} outside 1..={}", self.modes)));
        }
        Ok((self.eigenvalue(i), self.eigenfunction(i)))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        (1..=self.modes).map(|i| self.eigenvalue(i)).collect()
    }

    /// Uniform grid of `points` nodes on `[0, L]`, endpoints included.
    pub fn grid(&self, points: usize) -> Vec<f64> {
        let h = self.length / (points - 1) as f64;
        (0..points).map(|j| j as f64 * h).collect()
    }

    /// Projects samples of `f` on a uniform grid (see [`grid`](Self::grid))
    /// onto the first `N` modes with composite Simpson quadrature.
    ///
    /// The grid must have an odd number of points, at least `4N + 1`, and the
    /// samples must vanish at both endpoints.
    pub fn analyze(&self, samples: &[f64]) -> Result<SpectralCoefficients> {
        let points = samples.len();
        if points < 4 * self.modes + 1 {
            return Err(Error::InvalidInput(format!(
                "{points} grid points cannot resolve {} modes (need >= {})",
                self.modes,
                4 * self.modes + 1
            )));
        }
        if points.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "composite Simpson needs an odd number of grid points, got {points}"
            )));
        }
        let (first, last) = (samples[0], samples[points - 1]);
        if first.abs() > BOUNDARY_TOLERANCE || last.abs() > BOUNDARY_TOLERANCE {
            return Err(Error::InvalidInput(format!("samples must satisfy f(0) = f(L) = 0 (got {first:e}, {last:e})")));
        }
        let xs = self.grid(points);
        let h = self.length / (points - 1) as f64;
        let weights = simpson_weights(points, h);
        let coeffs = (1..=self.modes)
            .map(|i| {
                let phi = self.eigenfunction(i);
                xs.iter().zip(samples).zip(&weights).map(|((&x, &f), &w)| w * f * phi.eval(x)).sum()
            })
            .collect();
        Ok(SpectralCoefficients(coeffs))
    }

    /// `Σ_i c_i φ̂_i(x)` at each point.
    pub fn synthesize(&self, coeffs: &SpectralCoefficients, x_points: &[f64]) -> Vec<f64> {
        x_points.iter().map(|&x| self.synthesize_at(coeffs.values(), x)).collect()
    }

    pub(crate) fn synthesize_at(&self, coeffs: &[f64], x: f64) -> f64 {
        coeffs.iter().enumerate().map(|(k, c)| c * self.eigenfunction(k + 1).eval(x)).sum()
    }

    /// `sqrt(Σ λ_i^γ c_i²)`; `γ = 0` is the L² norm.
    pub fn sobolev_norm(&self, coeffs: &SpectralCoefficients, gamma: f64) -> f64 {
        self.sobolev_norm_of(coeffs.values(), gamma)
    }

    pub(crate) fn sobolev_norm_of(&self, coeffs: &[f64], gamma: f64) -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let weight = if gamma == 0.0 { 1.0 } else { self.eigenvalue(k + 1).powf(gamma) };
                weight * c * c
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Composite Simpson weights for an odd number of equispaced points.
pub fn simpson_weights(points: usize, h: f64) -> Vec<f64> {
    (0..points)
        .map(|j| {
            let base = if j == 0 || j == points - 1 {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            base * h / 3.0
        })
        .collect()
}
