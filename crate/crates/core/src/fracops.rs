//! Variable-order fractional integrals and Caputo derivatives.
//!
//! All discretizations are product-integration rules on a [`TimeMesh`]: the
//! sampled function is interpolated piecewise linearly and the weakly singular
//! kernel is integrated exactly on every subinterval. The kernel exponent is
//! evaluated only at the current node `t_n`, so a variable-order value at `t_n`
//! is the constant-order value with `ᾱ = α(t_n)`.

use crate::error::{Error, Result};
use crate::mesh::TimeMesh;
use crate::special::{digamma, gamma};

/// Highest polynomial degree accepted for an order function.
pub const MAX_ORDER_DEGREE: usize = 6;

/// Number of interior sample points used to check order bounds.
const ORDER_CHECK_SAMPLES: usize = 1000;

const BOUND_SLACK: f64 = 1e-12;

/// Polynomial in the monomial basis, `Σ c_j t^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let coeffs = if coeffs.is_empty() { vec![0.0] } else { coeffs };
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }
}

/// An admissible variable order: a polynomial with `0 <= α(t) <= α_* < 1` on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderFunction {
    poly: Polynomial,
    alpha_star: f64,
    horizon: f64,
}

impl OrderFunction {
    pub fn new(coeffs: Vec<f64>, alpha_star: f64, horizon: f64) -> Result<Self> {
        if !(alpha_star > 0.0 && alpha_star < 1.0) {
            return Err(Error::InadmissibleOrder(format!("alpha_* = {alpha_star} must lie in (0, 1)")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Domain(format!("horizon T must be positive, got {horizon}")));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InadmissibleOrder("non-finite coefficient".into()));
        }
        let poly = Polynomial::new(coeffs);
        if poly.degree() > MAX_ORDER_DEGREE {
            return Err(Error::InadmissibleOrder(format!(
                "degree {} exceeds the maximum {MAX_ORDER_DEGREE}",
                poly.degree()
            )));
        }
        let order = Self { poly, alpha_star, horizon };
        if let Some((t, value)) = order.first_violation() {
            return Err(Error::InadmissibleOrder(format!("alpha({t}) = {value} outside [0, {alpha_star}]")));
        }
        Ok(order)
    }

    pub fn constant(alpha: f64, alpha_star: f64, horizon: f64) -> Result<Self> {
        Self::new(vec![alpha], alpha_star, horizon)
    }

    /// Dense-sample check of the bounds, endpoints included.
    fn first_violation(&self) -> Option<(f64, f64)> {
        admissibility_violation(&self.poly, self.alpha_star, self.horizon)
    }

    pub fn coeffs(&self) -> &[f64] {
        self.poly.coeffs()
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.poly
    }

    pub fn alpha_star(&self) -> f64 {
        self.alpha_star
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `α(t)` for `t ∈ [0, T]`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t <= self.horizon) {
            return Err(Error::Domain(format!("t = {t} outside [0, {}]", self.horizon)));
        }
        Ok(self.at(t))
    }

    /// Unchecked evaluation, clamped into `[0, α_*]` to absorb roundoff.
    pub(crate) fn at(&self, t: f64) -> f64 {
        self.poly.eval(t).clamp(0.0, self.alpha_star)
    }
}

/// First sampled point where `p` leaves `[0, alpha_star]`, if any.
pub(crate) fn admissibility_violation(poly: &Polynomial, alpha_star: f64, horizon: f64) -> Option<(f64, f64)> {
    (0..=ORDER_CHECK_SAMPLES)
        .map(|i| horizon * i as f64 / ORDER_CHECK_SAMPLES as f64)
        .chain([horizon])
        .map(|t| (t, poly.eval(t)))
        .find(|&(_, v)| !(v >= -BOUND_SLACK && v <= alpha_star + BOUND_SLACK))
}

/// Samples `g(t_n)` on a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    mesh: TimeMesh,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(mesh: TimeMesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.nodes().len() {
            return Err(Error::InvalidInput(format!(
                "{} samples for a mesh with {} nodes",
                values.len(),
                mesh.nodes().len()
            )));
        }
        Ok(Self { mesh, values })
    }

    pub fn from_fn(mesh: TimeMesh, f: impl Fn(f64) -> f64) -> Self {
        let values = mesh.nodes().iter().map(|&t| f(t)).collect();
        Self { mesh, values }
    }

    pub fn mesh(&self) -> &TimeMesh {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn check_node(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::Domain("operator is evaluated at t_n > 0 (n >= 1)".into()));
        }
        if n > self.mesh.steps() {
            return Err(Error::Domain(format!("node index {n} beyond mesh with M = {}", self.mesh.steps())));
        }
        Ok(())
    }
}

/// Kernel moments of one L1 row: the Caputo value at `t_n` is
/// `Σ_{j=1..n} weights[j-1] · (g_j − g_{j-1})`.
#[derive(Debug, Clone)]
pub(crate) struct L1Row {
    pub weights: Vec<f64>,
}

impl L1Row {
    /// Row `n` of the L1 rule with constant order `a ∈ (0, 1)`.
    pub fn new(nodes: &[f64], n: usize, a: f64) -> Self {
        let mut weights = Vec::with_capacity(n);
        Self::fill(nodes, n, a, &mut weights);
        Self { weights }
    }

    /// Reuses `weights` as scratch space.
    pub fn fill(nodes: &[f64], n: usize, a: f64, weights: &mut Vec<f64>) {
        weights.clear();
        let p = 1.0 - a;
        let scale = 1.0 / gamma(2.0 - a);
        let tn = nodes[n];
        let mut right = (tn - nodes[0]).powf(p);
        for j in 1..=n {
            let left = right;
            right = if j == n { 0.0 } else { (tn - nodes[j]).powf(p) };
            let tau = nodes[j] - nodes[j - 1];
            weights.push(scale * (left - right) / tau);
        }
    }
}

/// Weights of the α-derivative of an L1 row:
/// `∂_α D_n = Σ_j weights[j-1] · (g_j − g_{j-1})`.
#[derive(Debug, Clone)]
pub(crate) struct SensitivityRow {
    pub weights: Vec<f64>,
}

impl SensitivityRow {
    pub fn new(nodes: &[f64], n: usize, a: f64) -> Self {
        let p = 1.0 - a;
        let inv_gamma = 1.0 / gamma(p);
        let psi = digamma(p);
        let tn = nodes[n];
        // y^p / p and ∫_0^y ln(s) s^{-a} ds = y^p (ln y − 1/p) / p
        let moments = |y: f64| -> (f64, f64) {
            if y <= 0.0 {
                (0.0, 0.0)
            } else {
                let yp = y.powf(p);
                (yp / p, yp * (y.ln() - 1.0 / p) / p)
            }
        };
        let mut weights = Vec::with_capacity(n);
        let (mut m0_right, mut m1_right) = moments(tn - nodes[0]);
        for j in 1..=n {
            let (m0_left, m1_left) = (m0_right, m1_right);
            (m0_right, m1_right) = if j == n { (0.0, 0.0) } else { moments(tn - nodes[j]) };
            let i0 = m0_left - m0_right;
            let i1 = m1_left - m1_right;
            let tau = nodes[j] - nodes[j - 1];
            weights.push(inv_gamma * (psi * i0 - i1) / tau);
        }
        Self { weights }
    }
}

pub(crate) fn apply_row(weights: &[f64], values: &[f64]) -> f64 {
    weights.iter().enumerate().map(|(i, w)| w * (values[i + 1] - values[i])).sum()
}

/// `α(t)`; see [`OrderFunction::eval`].
pub fn eval_order(alpha: &OrderFunction, t: f64) -> Result<f64> {
    alpha.eval(t)
}

/// Variable-order Riemann–Liouville integral `I^{α(t_n)} g` at node `n`.
pub fn frac_integral_vo(g: &SampledFunction, alpha: &OrderFunction, n: usize) -> Result<f64> {
    g.check_node(n)?;
    let nodes = g.mesh.nodes();
    let a = alpha.at(nodes[n]);
    if a <= 0.0 {
        return Err(Error::SingularOrder(a));
    }
    let tn = nodes[n];
    let v = &g.values;
    let mut acc = 0.0;
    let mut a_pow = tn.powf(a);
    let mut a_pow1 = tn.powf(a + 1.0);
    for j in 1..=n {
        let big = tn - nodes[j - 1];
        let (left_pow, left_pow1) = (a_pow, a_pow1);
        (a_pow, a_pow1) = if j == n {
            (0.0, 0.0)
        } else {
            let small = tn - nodes[j];
            (small.powf(a), small.powf(a + 1.0))
        };
        let tau = nodes[j] - nodes[j - 1];
        let i0 = (left_pow - a_pow) / a;
        // ∫ (s − t_{j-1}) (t_n − s)^{a−1} ds over the subinterval
        let i1 = big * i0 - (left_pow1 - a_pow1) / (a + 1.0);
        acc += v[j - 1] * i0 + (v[j] - v[j - 1]) / tau * i1;
    }
    Ok(acc / gamma(a))
}

/// Constant-order L1 Caputo derivative at node `n`.
///
/// `a = 0` returns `g(t_n) − g(t_0)` exactly.
pub fn caputo_const(g: &SampledFunction, a: f64, n: usize) -> Result<f64> {
    g.check_node(n)?;
    if !(0.0..1.0).contains(&a) {
        return Err(Error::InadmissibleOrder(format!("order {a} outside [0, 1)")));
    }
    if a == 0.0 {
        return Ok(g.values[n] - g.values[0]);
    }
    let row = L1Row::new(g.mesh.nodes(), n, a);
    Ok(apply_row(&row.weights, &g.values[..=n]))
}

/// Variable-order Caputo derivative `D^{α(t_n)} g` at node `n` (L1 rule).
pub fn caputo_vo(g: &SampledFunction, alpha: &OrderFunction, n: usize) -> Result<f64> {
    g.check_node(n)?;
    caputo_const(g, alpha.at(g.mesh.node(n)), n)
}

/// Derivative of the L1 Caputo value at node `n` with respect to the order,
/// evaluated at `alpha_value`.
///
/// This discretizes `(1/Γ(1−α)) ∫ (ψ(1−α) − ln(t−s)) g'(s) (t−s)^{−α} ds` with
/// piecewise-constant `g'`, which is exactly `∂/∂α` of [`caputo_const`].
pub fn caputo_order_sensitivity(g: &SampledFunction, alpha_value: f64, n: usize) -> Result<f64> {
    g.check_node(n)?;
    if !(0.0..1.0).contains(&alpha_value) {
        return Err(Error::InadmissibleOrder(format!("order {alpha_value} outside [0, 1)")));
    }
    let row = SensitivityRow::new(g.mesh.nodes(), n, alpha_value);
    Ok(apply_row(&row.weights, &g.values[..=n]))
}
