//! Variable-order time-fractional diffusion in one space dimension.
//!
//! Solves `u_t + k(t) D^{α(t)} u − K u_xx = 0` on `[0, L] × (0, T]` with
//! homogeneous Dirichlet data, measures the initial-time regularity of the
//! solution, and recovers the order `α(t)` from interior observations.
//!
//! - [`fracops`]: variable-order fractional integral, L1 Caputo derivative and its order sensitivity
//! - [`spectral`]: Dirichlet sine basis, analysis/synthesis, spectral Sobolev norms
//! - [`forward`]: time stepping of the decoupled mode equations
//! - [`diagnostics`]: second-derivative growth and weighted-norm regularity checks
//! - [`inverse`]: observations, mode extraction, Gauss–Newton order recovery, misfit scans
//! - [`app`]: configuration files, CSV formats and the command-line driver

pub mod app;
pub mod diagnostics;
pub mod error;
pub mod forward;
pub mod fracops;
pub mod inverse;
pub mod mesh;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use forward::{InitialDatum, ModeTrajectory, ModelSpec, SolutionField};
pub use fracops::{OrderFunction, Polynomial, SampledFunction};
pub use mesh::TimeMesh;
pub use spectral::{SpectralBasis, SpectralCoefficients};
