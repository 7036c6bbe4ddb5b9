//! Recovery of the variable order from interior observations.
//!
//! Observations `u(x_j, t_m)` on a window `(a, b) ⊂ [0, L]` determine every
//! sine mode (the Vandermonde structure of the eigenvalues), and a nonzero
//! mode with `k(0) ≠ 0` pins down `α(t)` near `t = 0`, hence everywhere for
//! analytic orders. Numerically the order is sought among polynomials of a
//! fixed degree by projected Gauss–Newton on the raw observation misfit. The
//! Jacobian comes from the discrete tangent equations, whose source term is
//! the L1 order sensitivity.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::forward::{march_with_tangents, solve_forward, ModelSpec};
use crate::fracops::{admissibility_violation, OrderFunction, Polynomial, MAX_ORDER_DEGREE};
use crate::mesh::TimeMesh;
use crate::spectral::SpectralBasis;

/// Largest design-matrix condition number accepted by [`extract_modes`].
pub const MAX_EXTRACTION_CONDITION: f64 = 1e8;
/// Ratio between synthesis and inversion steps below which a run is flagged.
pub const MIN_SYNTHESIS_REFINEMENT: usize = 4;
/// Largest relative noise level accepted when synthesizing data.
pub const MAX_NOISE_LEVEL: f64 = 0.1;

const STEP_HALVINGS: usize = 30;

/// Point values `u(x_j, t_m)` with `values[m][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    pub window: (f64, f64),
    pub x_points: Vec<f64>,
    pub t_points: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub noise_level: f64,
    pub seed: u64,
    /// Mesh the data were generated on, `(M, r)`, when known.
    pub synthesis_mesh: Option<(usize, f64)>,
}

impl ObservationSet {
    pub fn validate(&self, length: f64) -> Result<()> {
        let (a, b) = self.window;
        if !(0.0 <= a && a < b && b <= length) {
            return Err(Error::InvalidInput(format!(
                "observation window ({a}, {b}) must satisfy 0 <= a < b <= L = {length}"
            )));
        }
        if let Some(x) = self.x_points.iter().find(|&&x| !(x > a && x < b)) {
            return Err(Error::InvalidInput(format!("x = {x} not strictly inside ({a}, {b})")));
        }
        if self.x_points.is_empty() || self.t_points.is_empty() {
            return Err(Error::InvalidInput("empty observation set".into()));
        }
        if self.values.len() != self.t_points.len() || self.values.iter().any(|row| row.len() != self.x_points.len()) {
            return Err(Error::InvalidInput(format!(
                "value matrix does not match {} times x {} points",
                self.t_points.len(),
                self.x_points.len()
            )));
        }
        if self.t_points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("observation times must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn flat_values(&self) -> Vec<f64> {
        self.values.iter().flatten().copied().collect()
    }
}

/// Where and how to sample synthetic data.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationDesign {
    pub window: (f64, f64),
    pub x_count: usize,
    /// Observation times are every `t_stride`-th node of the inversion mesh.
    pub t_stride: usize,
    pub noise_level: f64,
    pub seed: u64,
    /// Inversion mesh; data are generated on its `refinement`-fold refinement.
    pub inversion_mesh: TimeMesh,
    pub refinement: usize,
    pub modes: usize,
}

/// Equispaced points strictly inside `(a, b)`.
pub fn interior_points(window: (f64, f64), count: usize) -> Vec<f64> {
    let (a, b) = window;
    let h = (b - a) / (count + 1) as f64;
    (1..=count).map(|j| a + j as f64 * h).collect()
}

/// Forward-solves on the refined synthesis mesh and samples the solution,
/// optionally with multiplicative Gaussian noise `u (1 + σ z)`.
pub fn synthesize_observations(spec: &ModelSpec, design: &ObservationDesign) -> Result<ObservationSet> {
    let (a, b) = design.window;
    if !(0.0 <= a && a < b && b <= spec.length) {
        return Err(Error::InvalidInput(format!("observation window ({a}, {b}) outside [0, {}]", spec.length)));
    }
    if !(0.0..=MAX_NOISE_LEVEL).contains(&design.noise_level) {
        return Err(Error::InvalidInput(format!("noise level {} outside [0, {MAX_NOISE_LEVEL}]", design.noise_level)));
    }
    if design.x_count == 0 || design.t_stride == 0 || design.refinement == 0 {
        return Err(Error::InvalidInput("x_count, t_stride and refinement must be >= 1".into()));
    }
    let coarse = &design.inversion_mesh;
    let fine = coarse.refined(design.refinement)?;
    let field = solve_forward(spec, &fine, design.modes)?;
    let x_points = interior_points(design.window, design.x_count);
    let t_indices: Vec<usize> = (design.t_stride..=coarse.steps()).step_by(design.t_stride).collect();
    let t_points: Vec<f64> = t_indices.iter().map(|&n| coarse.node(n)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(design.seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let values = t_indices
        .iter()
        .map(|&n| {
            let coeffs = field.coefficients_at(n * design.refinement);
            x_points
                .iter()
                .map(|&x| {
                    let clean = field.basis.synthesize_at(&coeffs, x);
                    if design.noise_level > 0.0 {
                        clean * (1.0 + design.noise_level * normal.sample(&mut rng))
                    } else {
                        clean
                    }
                })
                .collect()
        })
        .collect();
    Ok(ObservationSet {
        window: design.window,
        x_points,
        t_points,
        values,
        noise_level: design.noise_level,
        seed: design.seed,
        synthesis_mesh: Some((fine.steps(), fine.grading())),
    })
}

/// Least-squares mode estimates `u_i(t_m)`, `i = 1..=N′`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeExtraction {
    pub t_points: Vec<f64>,
    /// `modes[m][i-1]`
    pub modes: Vec<Vec<f64>>,
    /// Fit residual norm at each time.
    pub residuals: Vec<f64>,
    pub condition_number: f64,
}

impl ModeExtraction {
    /// Time series of mode `i` (1-based).
    pub fn mode_series(&self, i: usize) -> Vec<f64> {
        self.modes.iter().map(|row| row[i - 1]).collect()
    }
}

/// Solves `values(·, t_m) ≈ Σ_{i ≤ N′} u_i(t_m) φ̂_i(x_j)` in least squares.
pub fn extract_modes(obs: &ObservationSet, basis: &SpectralBasis, modes: usize) -> Result<ModeExtraction> {
    obs.validate(basis.length())?;
    if modes == 0 {
        return Err(Error::InvalidInput("at least one mode must be extracted".into()));
    }
    let rows = obs.x_points.len();
    if rows < 2 * modes {
        return Err(Error::InvalidInput(format!(
            "{rows} observation points cannot determine {modes} modes (need >= {})",
            2 * modes
        )));
    }
    let design = DMatrix::from_fn(rows, modes, |j, i| basis.eigenfunction(i + 1).eval(obs.x_points[j]));
    let svd = design.clone().svd(true, true);
    let (smax, smin) = svd.singular_values.iter().fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    let condition_number = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition_number <= MAX_EXTRACTION_CONDITION) {
        return Err(Error::IllPosedExtraction { condition: condition_number, limit: MAX_EXTRACTION_CONDITION });
    }
    let mut estimates = Vec::with_capacity(obs.t_points.len());
    let mut residuals = Vec::with_capacity(obs.t_points.len());
    for row in &obs.values {
        let rhs = DVector::from_column_slice(row);
        let sol = svd.solve(&rhs, 0.0).map_err(|e| Error::Numerical(format!("mode extraction solve failed: {e}")))?;
        residuals.push((&design * &sol - &rhs).norm());
        estimates.push(sol.iter().copied().collect());
    }
    Ok(ModeExtraction { t_points: obs.t_points.clone(), modes: estimates, residuals, condition_number })
}

/// Settings of the order recovery.
#[derive(Debug, Clone, PartialEq)]
pub struct InversionConfig {
    /// Degree of the polynomial ansatz for `α(t)`.
    pub degree: usize,
    pub max_iter: usize,
    /// Stop once the regularized residual norm falls below this value.
    pub gn_tolerance: f64,
    pub tikhonov: f64,
    pub alpha_star: f64,
    /// Modes used by the inversion forward model.
    pub modes: usize,
    pub mesh: TimeMesh,
    /// Initial coefficients; constant 0.5 when absent.
    pub initial: Option<Vec<f64>>,
}

impl InversionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.degree > MAX_ORDER_DEGREE {
            return Err(Error::InvalidInput(format!("ansatz degree {} exceeds {MAX_ORDER_DEGREE}", self.degree)));
        }
        if !(self.alpha_star > 0.0 && self.alpha_star < 1.0) {
            return Err(Error::InadmissibleOrder(format!("alpha_* = {} must lie in (0, 1)", self.alpha_star)));
        }
        if !(self.tikhonov >= 0.0 && self.tikhonov.is_finite()) {
            return Err(Error::InvalidInput(format!("tikhonov weight {} must be >= 0", self.tikhonov)));
        }
        if self.modes == 0 {
            return Err(Error::InvalidInput("inversion needs at least one mode".into()));
        }
        if let Some(init) = &self.initial {
            if init.len() != self.degree + 1 {
                return Err(Error::InvalidInput(format!(
                    "initial guess has {} coefficients, degree {} needs {}",
                    init.len(),
                    self.degree,
                    self.degree + 1
                )));
            }
        }
        Ok(())
    }

    pub fn initial_coeffs(&self) -> Vec<f64> {
        self.initial.clone().unwrap_or_else(|| {
            let mut c = vec![0.0; self.degree + 1];
            c[0] = 0.5f64.min(self.alpha_star);
            c
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InversionResult {
    pub coeffs: Vec<f64>,
    /// Regularized residual norm `(‖r‖² + τ‖c − c_prior‖²)^{1/2}` per accepted iterate.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// Mean squared data misfit at the final coefficients.
    pub final_misfit: f64,
    pub iterations: usize,
    /// Synthesis mesh less than 4x finer than the inversion mesh (or unknown).
    pub inverse_crime: bool,
    /// Condition number of the mode-extraction design matrix, when extraction succeeded.
    pub extraction_condition: Option<f64>,
}

/// Mean squared residual.
pub fn misfit(residual: &[f64]) -> f64 {
    if residual.is_empty() {
        return 0.0;
    }
    residual.iter().map(|r| r * r).sum::<f64>() / residual.len() as f64
}

/// Index of the last mesh node at or below `t`, with the interpolation weight
/// of the next node (zero on exact hits).
fn locate(mesh: &TimeMesh, t: f64) -> (usize, f64) {
    let nodes = mesh.nodes();
    let tol = 1e-12 * mesh.horizon();
    let idx = nodes.partition_point(|&s| s <= t + tol).saturating_sub(1);
    if (nodes[idx] - t).abs() <= tol || idx == nodes.len() - 1 {
        (idx, 0.0)
    } else {
        (idx, (t - nodes[idx]) / (nodes[idx + 1] - nodes[idx]))
    }
}

fn sample_series(series: &[f64], (idx, w): (usize, f64)) -> f64 {
    if w == 0.0 {
        series[idx]
    } else {
        series[idx] * (1.0 - w) + series[idx + 1] * w
    }
}

/// Forward model restricted to the observation points, with optional Jacobian.
struct ObservationModel<'a> {
    spec: &'a ModelSpec,
    config: &'a InversionConfig,
    lambdas: Vec<f64>,
    u0: Vec<f64>,
    /// `phi[j][i]` = `φ̂_{i+1}(x_j)`
    phi: Vec<Vec<f64>>,
    locations: Vec<(usize, f64)>,
    data: Vec<f64>,
}

impl<'a> ObservationModel<'a> {
    fn new(spec: &'a ModelSpec, obs: &'a ObservationSet, config: &'a InversionConfig) -> Result<Self> {
        spec.validate()?;
        config.validate()?;
        obs.validate(spec.length)?;
        let basis = spec.basis(config.modes)?;
        let horizon = config.mesh.horizon();
        if (horizon - spec.horizon).abs() > 1e-12 * spec.horizon {
            return Err(Error::InvalidInput("inversion mesh horizon differs from model horizon".into()));
        }
        if let Some(t) = obs.t_points.iter().find(|&&t| !(0.0..=horizon * (1.0 + 1e-12)).contains(&t)) {
            return Err(Error::InvalidInput(format!("observation time {t} outside [0, {horizon}]")));
        }
        let u0 = spec.initial.coefficients(&basis)?.0;
        let phi = obs
            .x_points
            .iter()
            .map(|&x| (1..=config.modes).map(|i| basis.eigenfunction(i).eval(x)).collect())
            .collect();
        let locations = obs.t_points.iter().map(|&t| locate(&config.mesh, t)).collect();
        Ok(Self { spec, config, lambdas: basis.eigenvalues(), u0, phi, locations, data: obs.flat_values() })
    }

    fn order(&self, coeffs: &[f64]) -> Result<OrderFunction> {
        OrderFunction::new(coeffs.to_vec(), self.config.alpha_star, self.spec.horizon)
    }

    fn point_values(&self, series: &[Vec<f64>]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.data.len());
        for &loc in &self.locations {
            let modal: Vec<f64> = series.iter().map(|s| sample_series(s, loc)).collect();
            for phi_x in &self.phi {
                out.push(phi_x.iter().zip(&modal).map(|(p, u)| p * u).sum());
            }
        }
        out
    }

    /// Residual and Jacobian (`rows × coeffs`) at `coeffs`.
    fn evaluate(&self, coeffs: &[f64], with_jacobian: bool) -> Result<(Vec<f64>, Option<DMatrix<f64>>)> {
        let spec = self.spec.with_alpha(self.order(coeffs)?);
        let n_coeffs = if with_jacobian { coeffs.len() } else { 0 };
        let sol = march_with_tangents(&spec, &self.config.mesh, &self.lambdas, &self.u0, n_coeffs)?;
        let model = self.point_values(&sol.values);
        let residual: Vec<f64> = model.iter().zip(&self.data).map(|(m, d)| m - d).collect();
        if !with_jacobian {
            return Ok((residual, None));
        }
        let mut jac = DMatrix::zeros(residual.len(), n_coeffs);
        for j in 0..n_coeffs {
            let series: Vec<Vec<f64>> = sol.tangents.iter().map(|t| t[j].clone()).collect();
            for (row, v) in self.point_values(&series).into_iter().enumerate() {
                jac[(row, j)] = v;
            }
        }
        Ok((residual, Some(jac)))
    }
}

/// Stacked misfit `u_candidate(x_j, t_m) − obs(x_j, t_m)`, time-major.
pub fn residual(
    alpha_coeffs: &[f64],
    obs: &ObservationSet,
    spec: &ModelSpec,
    config: &InversionConfig,
) -> Result<Vec<f64>> {
    let model = ObservationModel::new(spec, obs, config)?;
    Ok(model.evaluate(alpha_coeffs, false)?.0)
}

/// Residual together with its Jacobian with respect to the order coefficients.
pub fn residual_jacobian(
    alpha_coeffs: &[f64],
    obs: &ObservationSet,
    spec: &ModelSpec,
    config: &InversionConfig,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let model = ObservationModel::new(spec, obs, config)?;
    let (r, j) = model.evaluate(alpha_coeffs, true)?;
    Ok((r, j.expect("jacobian requested")))
}

/// Moves `coeffs` into the admissible box `0 <= α(t) <= α_*` on a dense
/// sample: scales the non-constant part when the range is too wide, then
/// shifts the constant term.
pub fn repair_bounds(coeffs: &mut [f64], alpha_star: f64, horizon: f64) {
    let samples = 1000;
    let poly = Polynomial::new(coeffs.to_vec());
    let (lo, hi) = (0..=samples)
        .map(|i| poly.eval(horizon * i as f64 / samples as f64))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    let mut lo = lo;
    if range > alpha_star {
        let scale = alpha_star / range;
        let c0 = coeffs[0];
        for c in coeffs.iter_mut().skip(1) {
            *c *= scale;
        }
        lo = c0 + (lo - c0) * scale;
    }
    let span = range.min(alpha_star);
    if lo < 0.0 {
        coeffs[0] -= lo;
    } else if lo + span > alpha_star {
        coeffs[0] -= lo + span - alpha_star;
    }
    // clear roundoff left by the shift
    if admissibility_violation(&Polynomial::new(coeffs.to_vec()), alpha_star, horizon).is_some() {
        coeffs[0] = coeffs[0].clamp(0.0, alpha_star);
    }
}

/// Projected Gauss–Newton with Tikhonov regularization towards the initial
/// guess and step halving.
pub fn recover_order(obs: &ObservationSet, spec: &ModelSpec, config: &InversionConfig) -> Result<InversionResult> {
    let model = ObservationModel::new(spec, obs, config)?;
    if spec.reaction.eval(0.0) == 0.0 {
        return Err(Error::InvalidInput("order recovery requires k(0) != 0".into()));
    }
    let scale = model.u0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::InvalidInput("order recovery requires a nonzero initial datum".into()));
    }
    let extraction_condition =
        extract_modes(obs, &spec.basis(config.modes)?, config.modes.min(obs.x_points.len() / 2).max(1))
            .ok()
            .map(|e| e.condition_number);
    let inverse_crime = match obs.synthesis_mesh {
        Some((steps, _)) => steps < MIN_SYNTHESIS_REFINEMENT * config.mesh.steps(),
        None => true,
    };

    let prior = config.initial_coeffs();
    let mut coeffs = prior.clone();
    repair_bounds(&mut coeffs, config.alpha_star, spec.horizon);
    let tau = config.tikhonov;
    let objective = |r: &[f64], c: &[f64]| -> f64 {
        let data: f64 = r.iter().map(|v| v * v).sum();
        let reg: f64 = c.iter().zip(&prior).map(|(a, b)| (a - b) * (a - b)).sum();
        data + tau * reg
    };

    let (mut r, mut jac) = model.evaluate(&coeffs, true)?;
    let mut current = objective(&r, &coeffs);
    let mut history = vec![current.sqrt()];
    let mut converged = current.sqrt() <= config.gn_tolerance;
    let mut iterations = 0;
    let p = coeffs.len();

    while !converged && iterations < config.max_iter {
        let j = jac.take().expect("jacobian available");
        // [J; √τ I] δ = −[r; √τ (c − c_prior)]
        let rows = r.len();
        let mut a = DMatrix::zeros(rows + p, p);
        let mut b = DVector::zeros(rows + p);
        a.rows_mut(0, rows).copy_from(&j);
        for (i, v) in r.iter().enumerate() {
            b[i] = -v;
        }
        let sqrt_tau = tau.sqrt();
        for i in 0..p {
            a[(rows + i, i)] = sqrt_tau;
            b[rows + i] = -sqrt_tau * (coeffs[i] - prior[i]);
        }
        let delta = a
            .svd(true, true)
            .solve(&b, 1e-14)
            .map_err(|e| Error::Numerical(format!("Gauss-Newton solve failed: {e}")))?;

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..STEP_HALVINGS {
            let mut trial: Vec<f64> = coeffs.iter().zip(delta.iter()).map(|(c, d)| c + step * d).collect();
            repair_bounds(&mut trial, config.alpha_star, spec.horizon);
            if let Ok((tr, tj)) = model.evaluate(&trial, true) {
                let value = objective(&tr, &trial);
                if value <= current {
                    accepted = Some((trial, tr, tj, value));
                    break;
                }
            }
            step *= 0.5;
        }
        iterations += 1;
        let Some((trial, tr, tj, value)) = accepted else {
            // no descent along the Gauss-Newton direction: stationary to working precision
            converged = true;
            break;
        };
        let moved: f64 = trial.iter().zip(&coeffs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let decrease = current - value;
        coeffs = trial;
        r = tr;
        jac = tj;
        current = value;
        history.push(current.sqrt());
        if current.sqrt() <= config.gn_tolerance || moved <= 1e-10 || decrease <= 1e-14 * current {
            converged = true;
        }
    }

    Ok(InversionResult {
        final_misfit: misfit(&r),
        coeffs,
        residual_history: history,
        converged,
        iterations,
        inverse_crime,
        extraction_condition,
    })
}

/// Misfit of every candidate on the grid, with the minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub entries: Vec<(Vec<f64>, f64)>,
    pub argmin: usize,
    /// No other candidate comes within the tie tolerance of the minimum.
    pub unique: bool,
}

impl ScanResult {
    pub fn minimum(&self) -> f64 {
        self.entries[self.argmin].1
    }

    /// Smallest misfit among the other candidates.
    pub fn second_best(&self) -> Option<f64> {
        self.entries.iter().enumerate().filter(|(i, _)| *i != self.argmin).map(|(_, e)| e.1).min_by(f64::total_cmp)
    }
}

/// Relative gap below which two misfits count as a tie.
pub const SCAN_TIE_TOLERANCE: f64 = 1e-9;

/// Evaluates [`misfit`] for every candidate coefficient vector.
pub fn uniqueness_scan(
    obs: &ObservationSet,
    spec: &ModelSpec,
    config: &InversionConfig,
    grid: &[Vec<f64>],
) -> Result<ScanResult> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty candidate grid".into()));
    }
    let model = ObservationModel::new(spec, obs, config)?;
    let eval = |c: &Vec<f64>| -> Result<(Vec<f64>, f64)> {
        let (r, _) = model.evaluate(c, false)?;
        Ok((c.clone(), misfit(&r)))
    };
    #[cfg(feature = "parallel")]
    let entries: Result<Vec<_>> = {
        use rayon::prelude::*;
        grid.par_iter().map(eval).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let entries: Result<Vec<_>> = grid.iter().map(eval).collect();
    let entries = entries?;
    let argmin =
        entries.iter().enumerate().min_by(|a, b| a.1 .1.total_cmp(&b.1 .1)).map(|(i, _)| i).expect("non-empty grid");
    let best = entries[argmin].1;
    let tol = SCAN_TIE_TOLERANCE * best.abs().max(f64::MIN_POSITIVE);
    let unique = entries.iter().enumerate().all(|(i, e)| i == argmin || e.1 - best > tol);
    Ok(ScanResult { entries, argmin, unique })
}

/// Constant-order candidates `lo, lo + step, …, hi`.
pub fn constant_grid(lo: f64, hi: f64, step: f64) -> Vec<Vec<f64>> {
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=count).map(|i| vec![((lo + i as f64 * step) * 1e12).round() / 1e12]).collect()
}
