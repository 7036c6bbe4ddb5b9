//! Forward solver for `u_t + k(t) D^{α(t)} u − K u_xx = 0` with homogeneous
//! Dirichlet data.
//!
//! The sine expansion decouples the problem into scalar fractional ODEs
//! `u_i' + k(t) D^{α(t)} u_i = −λ_i u_i`. Each is stepped implicitly: backward
//! difference for `u_i'`, L1 rule with the order frozen at `t_n` for the Caputo
//! term, and `k`, `λ_i u_i` taken at the new node. Every step solves one scalar
//! linear equation; the history sum makes the cost `O(M²)` per mode.

use crate::error::{Error, Result};
use crate::fracops::{L1Row, OrderFunction, Polynomial, SensitivityRow};
use crate::mesh::TimeMesh;
use crate::spectral::{SpectralBasis, SpectralCoefficients, BOUNDARY_TOLERANCE};

/// Default number of sine modes.
pub const DEFAULT_MODES: usize = 32;

/// Initial datum `u_0(x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialDatum {
    Zero,
    /// The orthonormal eigenfunction `φ̂_i`.
    Mode(usize),
    /// `x (L − x)`.
    Parabola,
    /// Samples on a uniform grid over `[0, L]` with an odd point count.
    Samples(Vec<f64>),
}

impl InitialDatum {
    /// Spectral coefficients of the datum against the first `N` modes.
    pub fn coefficients(&self, basis: &SpectralBasis) -> Result<SpectralCoefficients> {
        let n = basis.modes();
        match self {
            Self::Zero => Ok(SpectralCoefficients(vec![0.0; n])),
            Self::Mode(i) => {
                if *i == 0 {
                    return Err(Error::InvalidInput("initial mode index starts at 1".into()));
                }
                let mut c = vec![0.0; n];
                if *i <= n {
                    c[i - 1] = 1.0;
                }
                Ok(SpectralCoefficients(c))
            }
            Self::Parabola => {
                let points = (16 * n + 1).max(2049);
                let l = basis.length();
                let mut samples: Vec<f64> = basis.grid(points).iter().map(|&x| x * (l - x)).collect();
                samples[points - 1] = 0.0;
                basis.analyze(&samples)
            }
            Self::Samples(values) => basis.analyze(values),
        }
    }

    /// Pointwise value, for boundary checks and reporting.
    pub fn eval(&self, basis: &SpectralBasis, x: f64) -> f64 {
        let l = basis.length();
        match self {
            Self::Zero => 0.0,
            Self::Mode(i) => basis.eigenfunction(*i).eval(x),
            Self::Parabola => x * (l - x),
            Self::Samples(v) => {
                let h = l / (v.len() - 1) as f64;
                let pos = (x / h).clamp(0.0, (v.len() - 1) as f64);
                let j = (pos.floor() as usize).min(v.len() - 2);
                let frac = pos - j as f64;
                v[j] * (1.0 - frac) + v[j + 1] * frac
            }
        }
    }
}

/// Coefficients and data of the model problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub diffusivity: f64,
    pub length: f64,
    pub horizon: f64,
    /// Coefficient `k(t)` of the fractional term.
    pub reaction: Polynomial,
    pub alpha: OrderFunction,
    pub initial: InitialDatum,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        SpectralBasis::new(self.diffusivity, self.length, 1)?;
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Domain(format!("horizon T must be positive, got {}", self.horizon)));
        }
        if (self.alpha.horizon() - self.horizon).abs() > 1e-12 * self.horizon {
            return Err(Error::InvalidInput(format!(
                "order defined on [0, {}] but the model horizon is {}",
                self.alpha.horizon(),
                self.horizon
            )));
        }
        if self.reaction.coeffs().iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite k(t) coefficient".into()));
        }
        if let InitialDatum::Samples(v) = &self.initial {
            if v.len() < 3 {
                return Err(Error::InvalidInput("initial samples need at least 3 points".into()));
            }
        }
        if let InitialDatum::Mode(0) = self.initial {
            return Err(Error::InvalidInput("initial mode index starts at 1".into()));
        }
        let basis = self.basis(1)?;
        for x in [0.0, self.length] {
            let v = self.initial.eval(&basis, x);
            if v.abs() > BOUNDARY_TOLERANCE.max(1e-9) {
                return Err(Error::InvalidInput(format!("initial datum must vanish at the boundary, u0({x}) = {v}")));
            }
        }
        Ok(())
    }

    pub fn basis(&self, modes: usize) -> Result<SpectralBasis> {
        SpectralBasis::new(self.diffusivity, self.length, modes)
    }

    /// The same problem with a different order.
    pub fn with_alpha(&self, alpha: OrderFunction) -> Self {
        Self { alpha, ..self.clone() }
    }
}

/// `u_i(t_n)` for one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTrajectory {
    pub lambda: f64,
    pub u0i: f64,
    pub mesh: TimeMesh,
    pub values: Vec<f64>,
    /// `u_i(t_n) − u_i(t_{n−1})` for `n = 1..=M`, as computed by the stepper.
    pub increments: Vec<f64>,
}

/// Truncated sine expansion of the solution on a time mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    pub basis: SpectralBasis,
    pub mesh: TimeMesh,
    pub modes: Vec<ModeTrajectory>,
}

impl SolutionField {
    /// Coefficients of `u(·, t_n)`.
    pub fn coefficients_at(&self, n: usize) -> Vec<f64> {
        self.modes.iter().map(|m| m.values[n]).collect()
    }

    /// `|u_{0,N}| / ‖u_0‖`, a cheap truncation indicator.
    pub fn truncation_indicator(&self) -> f64 {
        let norm = self.modes.iter().map(|m| m.u0i * m.u0i).sum::<f64>().sqrt();
        match self.modes.last() {
            Some(last) if norm > 0.0 => last.u0i.abs() / norm,
            _ => 0.0,
        }
    }
}

/// Per-mode state while marching; `diffs[j]` holds `u_{j+1} − u_j`.
struct ModeState {
    lambda: f64,
    values: Vec<f64>,
    diffs: Vec<f64>,
}

impl ModeState {
    fn new(lambda: f64, u0: f64, steps: usize) -> Self {
        let mut values = Vec::with_capacity(steps + 1);
        values.push(u0);
        Self { lambda, values, diffs: Vec::with_capacity(steps) }
    }

    fn push(&mut self, delta: f64) {
        let prev = *self.values.last().expect("initial value present");
        self.diffs.push(delta);
        self.values.push(prev + delta);
    }
}

/// Coefficients of one implicit step, `(u_n − u_{n−1}) · lhs = rhs`.
#[derive(Debug, Clone, Copy)]
struct StepCoefficients {
    inv_tau: f64,
    k: f64,
    /// L1 weight of the newest difference; `None` for the identity limit `α_n = 0`.
    diag: Option<f64>,
}

impl StepCoefficients {
    fn lhs(&self, lambda: f64) -> f64 {
        match self.diag {
            Some(w) => self.inv_tau + self.k * w + lambda,
            None => self.inv_tau + self.k + lambda,
        }
    }

    /// Increment `u_n − u_{n−1}` of a trajectory whose history is
    /// `values`/`diffs`, with an extra right-hand side `source`. Solving for the
    /// increment keeps full relative precision in `u_n − u_{n−1}` on tiny steps.
    fn solve(&self, lambda: f64, values: &[f64], diffs: &[f64], weights: &[f64], source: f64) -> Result<f64> {
        let prev = *values.last().expect("non-empty history");
        let rhs = match self.diag {
            Some(_) => {
                let hist: f64 = weights[..diffs.len()].iter().zip(diffs).map(|(a, b)| a * b).sum();
                -(self.k * hist + lambda * prev)
            }
            // D^0 u = u_n − u_0
            None => -(self.k * (prev - values[0]) + lambda * prev),
        } + source;
        let lhs = self.lhs(lambda);
        if !(lhs.is_finite() && lhs.abs() > f64::MIN_POSITIVE) {
            return Err(Error::Numerical(format!(
                "non-invertible step coefficient {lhs:e} (1/tau = {}, k = {}, lambda = {lambda})",
                self.inv_tau, self.k
            )));
        }
        let delta = rhs / lhs;
        if !delta.is_finite() {
            return Err(Error::Numerical(format!("non-finite mode increment (lhs = {lhs:e}, rhs = {rhs:e})")));
        }
        Ok(delta)
    }
}

fn step_coefficients(spec: &ModelSpec, mesh: &TimeMesh, n: usize, weights: &mut Vec<f64>) -> (StepCoefficients, f64) {
    let nodes = mesh.nodes();
    let tn = nodes[n];
    let a = spec.alpha.at(tn);
    let k = spec.reaction.eval(tn);
    let diag = if a == 0.0 {
        weights.clear();
        None
    } else {
        L1Row::fill(nodes, n, a, weights);
        Some(weights[n - 1])
    };
    (StepCoefficients { inv_tau: 1.0 / mesh.step(n), k, diag }, a)
}

fn check_mesh(spec: &ModelSpec, mesh: &TimeMesh) -> Result<()> {
    if (mesh.horizon() - spec.horizon).abs() > 1e-12 * spec.horizon {
        return Err(Error::InvalidInput(format!(
            "mesh horizon {} differs from model horizon {}",
            mesh.horizon(),
            spec.horizon
        )));
    }
    Ok(())
}

/// Marches all modes together, sharing the L1 weights of each row.
fn march(spec: &ModelSpec, mesh: &TimeMesh, lambdas: &[f64], u0: &[f64]) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    check_mesh(spec, mesh)?;
    let steps = mesh.steps();
    let mut states: Vec<ModeState> = lambdas.iter().zip(u0).map(|(&l, &v)| ModeState::new(l, v, steps)).collect();
    let mut weights = Vec::with_capacity(steps);
    for n in 1..=steps {
        let (step, _) = step_coefficients(spec, mesh, n, &mut weights);
        for st in states.iter_mut() {
            let v = step.solve(st.lambda, &st.values, &st.diffs, &weights, 0.0)?;
            st.push(v);
        }
    }
    Ok(states.into_iter().map(|s| (s.values, s.diffs)).collect())
}

/// Trajectories and their derivatives with respect to each monomial
/// coefficient of the order, `∂u_i(t_n)/∂c_j`.
pub(crate) struct TangentSolution {
    pub values: Vec<Vec<f64>>,
    /// `tangents[mode][j][n]`
    pub tangents: Vec<Vec<Vec<f64>>>,
}

/// Forward march plus the discrete tangent equations. Differentiating the
/// step equation in `c_j` gives the same implicit step for `∂u/∂c_j` with
/// source `−k_n t_n^j ∂_α D_n(u)`, where `∂_α D_n` is the L1 order sensitivity.
pub(crate) fn march_with_tangents(
    spec: &ModelSpec,
    mesh: &TimeMesh,
    lambdas: &[f64],
    u0: &[f64],
    n_coeffs: usize,
) -> Result<TangentSolution> {
    check_mesh(spec, mesh)?;
    let steps = mesh.steps();
    let nodes = mesh.nodes();
    let mut states: Vec<ModeState> = lambdas.iter().zip(u0).map(|(&l, &v)| ModeState::new(l, v, steps)).collect();
    let mut tangents: Vec<Vec<ModeState>> =
        lambdas.iter().map(|&l| (0..n_coeffs).map(|_| ModeState::new(l, 0.0, steps)).collect()).collect();
    let mut weights = Vec::with_capacity(steps);
    for n in 1..=steps {
        let (step, a) = step_coefficients(spec, mesh, n, &mut weights);
        let sens = SensitivityRow::new(nodes, n, a);
        let tn = nodes[n];
        for (st, tan) in states.iter_mut().zip(tangents.iter_mut()) {
            let v = step.solve(st.lambda, &st.values, &st.diffs, &weights, 0.0)?;
            st.push(v);
            let ds: f64 = sens.weights.iter().zip(&st.diffs).map(|(a, b)| a * b).sum();
            let mut power = 1.0;
            for tj in tan.iter_mut() {
                let w = step.solve(tj.lambda, &tj.values, &tj.diffs, &weights, -step.k * power * ds)?;
                tj.push(w);
                power *= tn;
            }
        }
    }
    Ok(TangentSolution {
        values: states.into_iter().map(|s| s.values).collect(),
        tangents: tangents.into_iter().map(|t| t.into_iter().map(|s| s.values).collect()).collect(),
    })
}

/// Solves one mode ODE `u' + k(t) D^{α(t)} u = −λ u`, `u(0) = u0i`.
pub fn solve_mode(lambda: f64, u0i: f64, spec: &ModelSpec, mesh: &TimeMesh) -> Result<ModeTrajectory> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("eigenvalue must be positive, got {lambda}")));
    }
    let (values, increments) = march(spec, mesh, &[lambda], &[u0i])?.pop().expect("one mode");
    Ok(ModeTrajectory { lambda, u0i, mesh: mesh.clone(), values, increments })
}

/// Expands the initial datum in `modes` sine modes and solves every mode.
pub fn solve_forward(spec: &ModelSpec, mesh: &TimeMesh, modes: usize) -> Result<SolutionField> {
    spec.validate()?;
    let basis = spec.basis(modes)?;
    let u0 = spec.initial.coefficients(&basis)?;
    let lambdas = basis.eigenvalues();
    let values = march(spec, mesh, &lambdas, u0.values())?;
    let modes = lambdas
        .into_iter()
        .zip(u0.values())
        .zip(values)
        .map(|((lambda, &u0i), (values, increments))| ModeTrajectory {
            lambda,
            u0i,
            mesh: mesh.clone(),
            values,
            increments,
        })
        .collect();
    Ok(SolutionField { basis, mesh: mesh.clone(), modes })
}

/// `u(x, t_n)` from the stored expansion.
pub fn evaluate(field: &SolutionField, x: f64, t_index: usize) -> Result<f64> {
    if !(0.0..=field.basis.length()).contains(&x) {
        return Err(Error::Domain(format!("x = {x} outside [0, {}]", field.basis.length())));
    }
    if t_index > field.mesh.steps() {
        return Err(Error::Domain(format!("time index {t_index} beyond M = {}", field.mesh.steps())));
    }
    Ok(field.basis.synthesize_at(&field.coefficients_at(t_index), x))
}

/// `max_n |u(t_n)|_γ / |u_0|_γ` in the spectral Sobolev seminorm.
pub fn stability_ratio(field: &SolutionField, u0_coeffs: &SpectralCoefficients, gamma: f64) -> Result<f64> {
    if gamma < 0.0 {
        return Err(Error::Domain(format!("gamma must be >= 0, got {gamma}")));
    }
    let denom = field.basis.sobolev_norm(u0_coeffs, gamma);
    if denom == 0.0 {
        return Err(Error::InvalidInput("stability ratio undefined for a zero initial datum".into()));
    }
    let max = (0..=field.mesh.steps())
        .map(|n| field.basis.sobolev_norm_of(&field.coefficients_at(n), gamma))
        .fold(0.0, f64::max);
    Ok(max / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(alpha: Vec<f64>, k: Vec<f64>, initial: InitialDatum) -> ModelSpec {
        ModelSpec {
            diffusivity: 1.0,
            length: 1.0,
            horizon: 1.0,
            reaction: Polynomial::new(k),
            alpha: OrderFunction::new(alpha, 0.95, 1.0).unwrap(),
            initial,
        }
    }

    #[test]
    fn heat_limit_single_mode() {
        let s = spec(vec![0.5], vec![0.0], InitialDatum::Mode(1));
        let mesh = TimeMesh::uniform(1.0, 2048).unwrap();
        let traj = solve_mode(1.0, 1.0, &s, &mesh).unwrap();
        assert!((traj.values[2048] - (-1.0f64).exp()).abs() < 1e-4);
        assert_eq!(traj.values[0], 1.0);
    }

    #[test]
    fn identity_limit_closed_form() {
        let s = spec(vec![0.0], vec![1.0], InitialDatum::Mode(1));
        let mesh = TimeMesh::uniform(1.0, 4096).unwrap();
        let traj = solve_mode(1.0, 1.0, &s, &mesh).unwrap();
        let expected = (1.0 + (-2.0f64).exp()) / 2.0;
        assert!((expected - 0.567_667_641_618_306_4).abs() < 1e-12);
        assert!((traj.values[4096] - expected).abs() < 1e-4);
    }

    #[test]
    fn zero_datum_gives_zero_field() {
        let s = spec(vec![0.4], vec![1.0], InitialDatum::Zero);
        let mesh = TimeMesh::uniform(1.0, 64).unwrap();
        let field = solve_forward(&s, &mesh, 8).unwrap();
        assert!(field.modes.iter().all(|m| m.values.iter().all(|&v| v == 0.0)));
        assert!(stability_ratio(&field, &SpectralCoefficients(vec![0.0; 8]), 0.0).is_err());
    }

    #[test]
    fn single_mode_datum_stays_single_mode() {
        let s = spec(vec![0.3, 0.2], vec![0.0], InitialDatum::Mode(1));
        let mesh = TimeMesh::uniform(1.0, 128).unwrap();
        let field = solve_forward(&s, &mesh, 6).unwrap();
        for m in &field.modes[1..] {
            assert!(m.values.iter().all(|v| v.abs() <= 1e-10));
        }
        assert!(field.modes[0].values.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn joint_and_independent_solves_agree_bitwise() {
        let s = spec(vec![0.3, 0.2], vec![1.0, 0.5], InitialDatum::Parabola);
        let mesh = TimeMesh::graded(1.0, 200, 2.5).unwrap();
        let field = solve_forward(&s, &mesh, 5).unwrap();
        for m in &field.modes {
            let alone = solve_mode(m.lambda, m.u0i, &s, &mesh).unwrap();
            assert_eq!(alone.values, m.values);
        }
    }

    #[test]
    fn stability_ratio_heat_and_single_mode() {
        let s = spec(vec![0.5], vec![0.0], InitialDatum::Parabola);
        let mesh = TimeMesh::uniform(1.0, 100).unwrap();
        let field = solve_forward(&s, &mesh, 8).unwrap();
        let u0 = s.initial.coefficients(&field.basis).unwrap();
        assert!(stability_ratio(&field, &u0, 1.0).unwrap() <= 1.0 + 1e-8);

        let s = spec(vec![0.5], vec![2.0], InitialDatum::Mode(1));
        let field = solve_forward(&s, &mesh, 4).unwrap();
        let u0 = s.initial.coefficients(&field.basis).unwrap();
        let ratio = stability_ratio(&field, &u0, 1.5).unwrap();
        let expected = field.modes[0].values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!((ratio - expected).abs() < 1e-14);
    }

    #[test]
    fn evaluate_checks_bounds_and_matches_datum() {
        let s = spec(vec![0.5], vec![1.0], InitialDatum::Parabola);
        let mesh = TimeMesh::uniform(1.0, 10).unwrap();
        let field = solve_forward(&s, &mesh, 32).unwrap();
        assert!((evaluate(&field, 0.5, 0).unwrap() - 0.25).abs() < 1e-4);
        assert!(evaluate(&field, 1.5, 0).is_err());
        assert!(evaluate(&field, 0.5, 11).is_err());
    }

    #[test]
    fn rejects_nonzero_boundary_samples() {
        let mut s = spec(vec![0.5], vec![1.0], InitialDatum::Samples(vec![1.0, 2.0, 0.0]));
        assert!(s.validate().is_err());
        s.initial = InitialDatum::Samples(vec![0.0, 2.0, 0.0]);
        assert!(s.validate().is_ok());
    }

    #[test]
    fn negative_reaction_can_break_the_step() {
        // 1/tau + k w + lambda = 0 for a suitably negative k
        let mesh = TimeMesh::uniform(1.0, 1).unwrap();
        let s = spec(vec![0.0], vec![-2.0], InitialDatum::Mode(1));
        assert!(matches!(solve_mode(1.0, 1.0, &s, &mesh), Err(Error::Numerical(_))));
    }
}
