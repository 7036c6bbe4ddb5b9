//! Browser bindings: small, flat-array entry points for the static demo page.

use vofrac::diagnostics::{default_window, regularity_report, second_derivative_norms};
use vofrac::forward::{solve_forward, solve_mode};
use vofrac::inverse::{constant_grid, synthesize_observations, uniqueness_scan, InversionConfig, ObservationDesign};
use vofrac::{InitialDatum, ModelSpec, OrderFunction, Polynomial, TimeMesh};
use wasm_bindgen::prelude::*;

fn js_err(e: vofrac::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn spec(diffusivity: f64, k: f64, alpha: Vec<f64>, initial: InitialDatum) -> Result<ModelSpec, JsValue> {
    Ok(ModelSpec {
        diffusivity,
        length: 1.0,
        horizon: 1.0,
        reaction: Polynomial::constant(k),
        alpha: OrderFunction::new(alpha, 0.95, 1.0).map_err(js_err)?,
        initial,
    })
}

/// Unit-amplitude mode trajectory for α(t) = a0 + a1 t, returned as interleaved `[t0, u0, t1, u1, ...]`.
#[wasm_bindgen]
pub fn mode_trajectory(a0: f64, a1: f64, k: f64, lambda: f64, steps: usize) -> Result<Vec<f64>, JsValue> {
    let model = spec(1.0, k, vec![a0, a1], InitialDatum::Zero)?;
    let mesh = TimeMesh::graded(1.0, steps, TimeMesh::default_grading(a0)).map_err(js_err)?;
    let mode = solve_mode(1.0, lambda, &model, &mesh).map_err(js_err)?;
    Ok(mesh.nodes().iter().zip(&mode.values).flat_map(|(&t, &u)| [t, u]).collect())
}

/// Sup of |u_tt| per time node for a weakly damped single mode, interleaved `[t, norm, ...]`
/// followed by the fitted log-log slope as the final element.
#[wasm_bindgen]
pub fn regularity_profile(a0: f64, a1: f64, steps: usize) -> Result<Vec<f64>, JsValue> {
    let model = spec(1e-3, 0.1, vec![a0, a1], InitialDatum::Mode(1))?;
    let mesh = TimeMesh::graded(1.0, steps, TimeMesh::default_grading(a0)).map_err(js_err)?;
    let field = solve_forward(&model, &mesh, 2).map_err(js_err)?;
    let norms = second_derivative_norms(&field, 0.0).map_err(js_err)?;
    let report = regularity_report(&field, a0, 0.0, default_window(1.0)).map_err(js_err)?;
    let mut out: Vec<f64> = norms.iter().flat_map(|&(t, v)| [t, v]).collect();
    out.push(report.fitted_slope);
    Ok(out)
}

/// Misfit of constant candidate orders against noise-free data generated with `truth`,
/// interleaved `[candidate, misfit, ...]`.
#[wasm_bindgen]
pub fn misfit_scan(truth: f64, lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, JsValue> {
    let model = spec(0.1, 1.0, vec![truth], InitialDatum::Parabola)?;
    let mesh = TimeMesh::graded(1.0, 128, 2.0).map_err(js_err)?;
    let design = ObservationDesign {
        window: (0.2, 0.8),
        x_count: 16,
        t_stride: 1,
        noise_level: 0.0,
        seed: 0,
        inversion_mesh: mesh.clone(),
        refinement: 4,
        modes: 8,
    };
    let obs = synthesize_observations(&model, &design).map_err(js_err)?;
    let config = InversionConfig {
        degree: 0,
        max_iter: 1,
        gn_tolerance: 1e-12,
        tikhonov: 0.0,
        alpha_star: 0.95,
        modes: 8,
        mesh,
        initial: None,
    };
    let scan = uniqueness_scan(&obs, &model, &config, &constant_grid(lo, hi, step)).map_err(js_err)?;
    Ok(scan.entries.iter().flat_map(|(c, m)| [c[0], *m]).collect())
}
