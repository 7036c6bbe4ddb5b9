//! Experiment drivers behind the `vofrac` command line.

pub mod config;
pub mod io;

use std::path::{Path, PathBuf};

pub use config::{InitialProfile, RunConfig};

use crate::diagnostics::{default_window, regularity_report};
use crate::error::{Error, Result};
use crate::forward::{solve_forward, stability_ratio};
use crate::inverse::{constant_grid, recover_order, synthesize_observations, uniqueness_scan};

pub const SOLUTION_FILE: &str = "solution.csv";
pub const MODES_FILE: &str = "modes.csv";
pub const STABILITY_FILE: &str = "stability.csv";
pub const OBSERVATIONS_FILE: &str = "observations.csv";
pub const INVERSION_FILE: &str = "inversion.csv";
pub const HISTORY_FILE: &str = "residual_history.csv";
pub const REGULARITY_FILE: &str = "regularity.csv";
pub const SCAN_FILE: &str = "scan.csv";

fn prepare(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::Io(format!("cannot create {}: {e}", out.display())))
}

/// Solves the forward problem; writes the solution, modes and stability files.
pub fn run_forward(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let spec = cfg.model()?;
    let field = solve_forward(&spec, &cfg.mesh()?, cfg.modes)?;
    let u0 = spec.initial.coefficients(&field.basis)?;
    let stability = io::StabilityRow {
        gamma: cfg.gamma,
        ratio: stability_ratio(&field, &u0, cfg.gamma).unwrap_or(0.0),
        truncation: field.truncation_indicator(),
    };
    prepare(out)?;
    let paths = [SOLUTION_FILE, MODES_FILE, STABILITY_FILE].map(|f| out.join(f));
    io::write_solution(&paths[0], &io::solution_rows(&field, cfg.x_points))?;
    io::write_modes(&paths[1], &io::mode_rows(&field))?;
    io::write_stability(&paths[2], &stability)?;
    Ok(paths.to_vec())
}

/// Generates synthetic observations of the configured model.
pub fn run_synth(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let obs = synthesize_observations(&cfg.model()?, &cfg.design()?)?;
    prepare(out)?;
    let path = out.join(OBSERVATIONS_FILE);
    io::write_observations(&path, &obs)?;
    Ok(vec![path])
}

/// Recovers the order from an observation file; the configured order is
/// ignored except for `α_*`.
pub fn run_invert(cfg: &RunConfig, observations: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let obs = io::read_observations(observations)?;
    let result = recover_order(&obs, &cfg.model()?, &cfg.inversion()?)?;
    prepare(out)?;
    let paths = [INVERSION_FILE, HISTORY_FILE].map(|f| out.join(f));
    io::write_inversion(&paths[0], &result)?;
    io::write_residual_history(&paths[1], &result.residual_history)?;
    Ok(paths.to_vec())
}

/// Regularity report of the configured model.
pub fn run_diagnose(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let field = solve_forward(&cfg.model()?, &cfg.mesh()?, cfg.modes)?;
    let window = cfg.fit_window.unwrap_or_else(|| default_window(cfg.horizon));
    let report = regularity_report(&field, cfg.alpha0(), cfg.gamma, window)?;
    prepare(out)?;
    let path = out.join(REGULARITY_FILE);
    io::write_regularity(&path, &[report])?;
    Ok(vec![path])
}

/// Misfit of constant orders against data synthesized from the configured model.
pub fn run_scan(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let spec = cfg.model()?;
    let obs = synthesize_observations(&spec, &cfg.design()?)?;
    let (lo, hi, step) = cfg.scan;
    let scan = uniqueness_scan(&obs, &spec, &cfg.inversion()?, &constant_grid(lo, hi, step))?;
    prepare(out)?;
    let path = out.join(SCAN_FILE);
    io::write_scan(&path, &scan)?;
    Ok(vec![path])
}
