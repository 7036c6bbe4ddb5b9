//! Initial-time regularity diagnostics.
//!
//! When `α(0) > 0` the second time derivative of the solution blows up like
//! `t^{−α(0)}` while `t^{α(0)} ‖∂²_t u‖` stays bounded; when `α(0) = 0` (and
//! `α(t) ln t → 0`) the solution is `C²` up to `t = 0`. These routines measure
//! both behaviours on a computed [`SolutionField`].

use crate::error::{Error, Result};
use crate::forward::SolutionField;

/// Minimum mesh size for second differences near `t = 0`.
pub const MIN_STEPS: usize = 64;
/// Minimum number of samples inside the fit window.
pub const MIN_FIT_SAMPLES: usize = 8;
/// `|slope|` below this is reported as smooth.
pub const SMOOTH_SLOPE_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Smooth,
    Singular,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Smooth => "smooth",
            Self::Singular => "singular",
        }
    }
}

impl std::str::FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smooth" => Ok(Self::Smooth),
            "singular" => Ok(Self::Singular),
            other => Err(Error::InvalidInput(format!("unknown verdict '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub alpha0: f64,
    pub fitted_slope: f64,
    pub expected_slope: f64,
    pub weighted_norm: f64,
    pub fit_window: (f64, f64),
    pub verdict: Verdict,
}

/// Default fit window `[T·10⁻³, T·10⁻¹]`.
pub fn default_window(horizon: f64) -> (f64, f64) {
    (1e-3 * horizon, 1e-1 * horizon)
}

/// Three-point second divided difference on non-uniform nodes, from the
/// stored increments `du[n-1] = u_n − u_{n−1}`.
fn second_difference(t: &[f64], du: &[f64], n: usize) -> f64 {
    let h1 = t[n] - t[n - 1];
    let h2 = t[n + 1] - t[n];
    2.0 * (du[n] / h2 - du[n - 1] / h1) / (h1 + h2)
}

/// `(t_n, ‖∂²_t u(·, t_n)‖_γ)` at every interior node.
pub fn second_derivative_norms(field: &SolutionField, gamma: f64) -> Result<Vec<(f64, f64)>> {
    let steps = field.mesh.steps();
    if steps < MIN_STEPS {
        return Err(Error::Domain(format!("second-derivative diagnostics need M >= {MIN_STEPS}, got {steps}")));
    }
    let t = field.mesh.nodes();
    let mut d2 = vec![0.0; field.modes.len()];
    Ok((1..steps)
        .map(|n| {
            for (slot, mode) in d2.iter_mut().zip(&field.modes) {
                *slot = second_difference(t, &mode.increments, n);
            }
            (t[n], field.basis.sobolev_norm_of(&d2, gamma))
        })
        .collect())
}

/// Least-squares slope of `ln(value)` against `ln(t)` over the window.
pub fn fit_singularity_exponent(norms: &[(f64, f64)], window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Domain(format!("degenerate fit window ({lo}, {hi})")));
    }
    let samples: Vec<(f64, f64)> = norms.iter().copied().filter(|&(t, _)| t >= lo && t <= hi).collect();
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(Error::Domain(format!(
            "fit window ({lo}, {hi}) holds {} samples, need >= {MIN_FIT_SAMPLES}",
            samples.len()
        )));
    }
    if let Some(&(t, v)) = samples.iter().find(|&&(_, v)| !(v > 0.0)) {
        return Err(Error::InvalidInput(format!("non-positive norm {v} at t = {t}")));
    }
    let count = samples.len() as f64;
    let (sx, sy) = samples.iter().fold((0.0, 0.0), |(sx, sy), &(t, v)| (sx + t.ln(), sy + v.ln()));
    let (mx, my) = (sx / count, sy / count);
    let (sxy, sxx) = samples.iter().fold((0.0, 0.0), |(sxy, sxx), &(t, v)| {
        let dx = t.ln() - mx;
        (sxy + dx * (v.ln() - my), sxx + dx * dx)
    });
    if sxx <= 0.0 {
        return Err(Error::Domain("fit window has no spread in log t".into()));
    }
    Ok(sxy / sxx)
}

/// C¹ part `max(sup ‖u‖_γ, sup ‖∂_t u‖_γ)` plus `sup t^{weight} ‖∂²_t u‖_γ`.
fn weighted_c2(field: &SolutionField, weight: f64, gamma: f64) -> Result<f64> {
    let t = field.mesh.nodes();
    let basis = &field.basis;
    let steps = field.mesh.steps();
    let mut c0 = 0.0f64;
    for n in 0..=steps {
        c0 = c0.max(basis.sobolev_norm_of(&field.coefficients_at(n), gamma));
    }
    let mut c1 = 0.0f64;
    let mut d = vec![0.0; field.modes.len()];
    for n in 1..=steps {
        let h = t[n] - t[n - 1];
        for (slot, mode) in d.iter_mut().zip(&field.modes) {
            *slot = mode.increments[n - 1] / h;
        }
        c1 = c1.max(basis.sobolev_norm_of(&d, gamma));
    }
    let weighted =
        second_derivative_norms(field, gamma)?.into_iter().map(|(tn, v)| tn.powf(weight) * v).fold(0.0, f64::max);
    Ok(c0.max(c1) + weighted)
}

/// Discrete `C^m_μ((0, T]; Ȟ^γ)` norm; only `m = 2` is supported.
pub fn weighted_cm_norm(field: &SolutionField, m: usize, mu: f64, gamma: f64) -> Result<f64> {
    if m != 2 {
        return Err(Error::Domain(format!("only m = 2 is supported, got {m}")));
    }
    if !(0.0..1.0).contains(&mu) {
        return Err(Error::Domain(format!("weight exponent mu must lie in [0, 1), got {mu}")));
    }
    weighted_c2(field, 1.0 - mu, gamma)
}

/// Fits the near-zero growth of `‖∂²_t u‖_γ` and evaluates the matching norm:
/// `C²_{1−α(0)}` when `α(0) > 0`, the plain `C²` norm when `α(0) = 0`.
pub fn regularity_report(
    field: &SolutionField,
    alpha0: f64,
    gamma: f64,
    window: (f64, f64),
) -> Result<RegularityReport> {
    let norms = second_derivative_norms(field, gamma)?;
    let in_window: Vec<(f64, f64)> = norms.iter().copied().filter(|&(t, _)| t >= window.0 && t <= window.1).collect();
    let fitted_slope = if !in_window.is_empty() && in_window.iter().all(|&(_, v)| v == 0.0) {
        0.0
    } else {
        fit_singularity_exponent(&norms, window)?
    };
    let weighted_norm =
        if alpha0 > 0.0 { weighted_cm_norm(field, 2, 1.0 - alpha0, gamma)? } else { weighted_c2(field, 0.0, gamma)? };
    let verdict = if fitted_slope.abs() < SMOOTH_SLOPE_THRESHOLD { Verdict::Smooth } else { Verdict::Singular };
    Ok(RegularityReport { alpha0, fitted_slope, expected_slope: -alpha0, weighted_norm, fit_window: window, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_data_slope() {
        let norms: Vec<(f64, f64)> = (1..200)
            .map(|i| {
                let t = 1e-4 * 1.05f64.powi(i);
                (t, 3.7 * t.powf(-0.5))
            })
            .collect();
        let slope = fit_singularity_exponent(&norms, (1e-3, 1e-1)).unwrap();
        assert!((slope + 0.5).abs() < 1e-6);
    }

    #[test]
    fn fit_rejects_degenerate_windows() {
        let norms: Vec<(f64, f64)> = (1..20).map(|i| (i as f64 * 0.01, 1.0)).collect();
        assert!(fit_singularity_exponent(&norms, (0.5, 0.4)).is_err());
        assert!(fit_singularity_exponent(&norms, (0.01, 0.05)).is_err());
        let mut zeros = norms.clone();
        zeros[3].1 = 0.0;
        assert!(fit_singularity_exponent(&zeros, (0.01, 0.2)).is_err());
    }

    #[test]
    fn verdict_round_trip() {
        for v in [Verdict::Smooth, Verdict::Singular] {
            assert_eq!(v.as_str().parse::<Verdict>().unwrap(), v);
        }
        assert!("bumpy".parse::<Verdict>().is_err());
    }
}
