use vofrac::diagnostics::{
    default_window, fit_singularity_exponent, regularity_report, second_derivative_norms, weighted_cm_norm, Verdict,
};
use vofrac::forward::solve_forward;
use vofrac::{Error, InitialDatum, ModelSpec, OrderFunction, Polynomial, SolutionField, TimeMesh};

/// Weak diffusion and reaction so that the initial layer dominates the fit window.
fn weak_model(alpha: Vec<f64>) -> ModelSpec {
    ModelSpec {
        diffusivity: 1e-3,
        length: 1.0,
        horizon: 1.0,
        reaction: Polynomial::constant(0.1),
        alpha: OrderFunction::new(alpha, 0.95, 1.0).unwrap(),
        initial: InitialDatum::Mode(1),
    }
}

fn run(alpha: Vec<f64>, m: usize) -> SolutionField {
    let r = TimeMesh::default_grading(alpha[0]);
    solve_forward(&weak_model(alpha), &TimeMesh::graded(1.0, m, r).unwrap(), 2).unwrap()
}

fn heat(m: usize) -> SolutionField {
    let spec = ModelSpec { diffusivity: 1.0, reaction: Polynomial::constant(0.0), ..weak_model(vec![0.5]) };
    solve_forward(&spec, &TimeMesh::uniform(1.0, m).unwrap(), 1).unwrap()
}

#[test]
fn heat_second_derivative_matches_closed_form() {
    let field = heat(4096);
    let lambda = field.modes[0].lambda;
    for (t, v) in second_derivative_norms(&field, 0.0).unwrap() {
        let exact = lambda * lambda * (-lambda * t).exp();
        assert!((v - exact).abs() <= 0.05 * exact, "t = {t}: {v} vs {exact}");
    }
}

#[test]
fn heat_weighted_norm_matches_closed_form() {
    let field = heat(4096);
    let lambda = field.modes[0].lambda;
    // max(sup|u|, sup|u'|) + sup_t t^{1/2} λ² e^{−λt}, the last at t = 1/(2λ)
    let t_star = 0.5 / lambda;
    let exact = lambda.max(1.0) + t_star.sqrt() * lambda * lambda * (-lambda * t_star).exp();
    let v = weighted_cm_norm(&field, 2, 0.5, 0.0).unwrap();
    assert!((v - exact).abs() <= 0.1 * exact, "{v} vs {exact}");
}

#[test]
fn zero_field_has_zero_norms() {
    let spec = ModelSpec { initial: InitialDatum::Zero, ..weak_model(vec![0.5]) };
    let field = solve_forward(&spec, &TimeMesh::graded(1.0, 128, 4.0).unwrap(), 3).unwrap();
    assert!(second_derivative_norms(&field, 1.0).unwrap().iter().all(|&(_, v)| v == 0.0));
    assert_eq!(weighted_cm_norm(&field, 2, 0.5, 1.0).unwrap(), 0.0);
    let report = regularity_report(&field, 0.5, 1.0, default_window(1.0)).unwrap();
    assert_eq!(report.verdict, Verdict::Smooth);
}

#[test]
fn singular_slopes_follow_initial_order() {
    for alpha in [vec![0.2], vec![0.5], vec![0.8], vec![0.5, 0.25]] {
        let a0 = alpha[0];
        let report = regularity_report(&run(alpha.clone(), 1024), a0, 0.0, default_window(1.0)).unwrap();
        assert!((report.fitted_slope + a0).abs() <= 0.1, "{alpha:?}: {}", report.fitted_slope);
        assert_eq!(report.expected_slope, -a0);
        assert_eq!(report.verdict, Verdict::Singular);
    }
}

#[test]
fn vanishing_initial_order_is_smooth() {
    let report = regularity_report(&run(vec![0.0, 0.5], 1024), 0.0, 0.0, default_window(1.0)).unwrap();
    assert!(report.fitted_slope >= -0.1, "{}", report.fitted_slope);
    assert_eq!(report.verdict, Verdict::Smooth);
}

#[test]
fn weighted_norm_is_mesh_stable_while_sup_grows() {
    let sup = |f: &SolutionField| second_derivative_norms(f, 0.0).unwrap().iter().map(|p| p.1).fold(0.0, f64::max);
    let (coarse, fine) = (run(vec![0.5], 512), run(vec![0.5], 1024));
    let (w1, w2) = (weighted_cm_norm(&coarse, 2, 0.5, 0.0).unwrap(), weighted_cm_norm(&fine, 2, 0.5, 0.0).unwrap());
    assert!((w2 - w1).abs() <= 0.2 * w1, "{w1} {w2}");
    assert!(sup(&fine) >= 1.3 * sup(&coarse));
}

#[test]
fn preconditions() {
    let field = run(vec![0.5], 32);
    assert!(matches!(second_derivative_norms(&field, 0.0), Err(Error::Domain(_))));
    let field = run(vec![0.5], 128);
    assert!(weighted_cm_norm(&field, 3, 0.5, 0.0).is_err());
    assert!(weighted_cm_norm(&field, 2, 1.0, 0.0).is_err());
    let norms = second_derivative_norms(&field, 0.0).unwrap();
    assert!(fit_singularity_exponent(&norms, (0.5, 0.5)).is_err());
}
