use crate::error::{Error, Result};

/// Time nodes `t_n = T (n/M)^r`, `n = 0..=M`, on `[0, T]`.
///
/// `r = 1` gives a uniform mesh; `r > 1` clusters nodes near `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeMesh {
    horizon: f64,
    steps: usize,
    grading: f64,
    nodes: Vec<f64>,
}

impl TimeMesh {
    pub fn graded(horizon: f64, steps: usize, grading: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Domain(format!("horizon T must be positive, got {horizon}")));
        }
        if steps == 0 {
            return Err(Error::Domain("mesh needs at least one step (M >= 1)".into()));
        }
        if !(grading >= 1.0 && grading.is_finite()) {
            return Err(Error::Domain(format!("grading r must be >= 1, got {grading}")));
        }
        let m = steps as f64;
        let nodes: Vec<f64> = (0..=steps).map(|n| horizon * (n as f64 / m).powf(grading)).collect();
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain(format!(
                "mesh with M = {steps}, r = {grading} is not strictly increasing in floating point"
            )));
        }
        Ok(Self { horizon, steps, grading, nodes })
    }

    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        Self::graded(horizon, steps, 1.0)
    }

    /// Grading used when none is configured: `r = min(4, 2 / (1 - α(0)))` for
    /// `α(0) > 0`, and a uniform mesh otherwise.
    pub fn default_grading(alpha0: f64) -> f64 {
        if alpha0 > 0.0 {
            (2.0 / (1.0 - alpha0)).clamp(1.0, 4.0)
        } else {
            1.0
        }
    }

    /// The same grading with `factor` times as many steps. Every node of
    /// `self` is also a node of the refined mesh.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::graded(self.horizon, self.steps * factor, self.grading)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of steps `M` (the mesh has `M + 1` nodes).
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, n: usize) -> f64 {
        self.nodes[n]
    }

    /// Step length `t_n - t_{n-1}` for `n >= 1`.
    pub fn step(&self, n: usize) -> f64 {
        self.nodes[n] - self.nodes[n - 1]
    }
}
