//! Line-oriented run configuration.
//!
//! One `section.key = value` per line, lists comma-separated, `#` starts a
//! comment. Unknown keys, duplicates and malformed values are rejected with
//! the offending line number.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::forward::{InitialDatum, ModelSpec, DEFAULT_MODES};
use crate::fracops::{OrderFunction, Polynomial};
use crate::inverse::{InversionConfig, ObservationDesign};
use crate::mesh::TimeMesh;

const KEYS: &[&str] = &[
    "model.K",
    "model.L",
    "model.T",
    "model.k",
    "model.alpha",
    "model.alpha_star",
    "model.u0",
    "mesh.M",
    "mesh.r",
    "basis.N",
    "observe.window",
    "observe.x_count",
    "observe.t_stride",
    "observe.noise_level",
    "observe.refinement",
    "inverse.degree",
    "inverse.max_iter",
    "inverse.tolerance",
    "inverse.tikhonov",
    "inverse.modes",
    "inverse.initial",
    "scan.lo",
    "scan.hi",
    "scan.step",
    "diagnose.gamma",
    "diagnose.window",
    "output.dir",
    "output.x_points",
    "run.seed",
];

/// Initial datum as written in the config.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialProfile {
    Zero,
    Parabola,
    Mode(usize),
    /// Whitespace- or comma-separated samples on a uniform grid over `[0, L]`.
    File(PathBuf),
}

impl InitialProfile {
    fn parse(s: &str) -> std::result::Result<Self, String> {
        match s {
            "zero" => Ok(Self::Zero),
            "parabola" => Ok(Self::Parabola),
            _ => {
                if let Some(i) = s.strip_prefix("mode:") {
                    let i: usize = i.trim().parse().map_err(|_| format!("bad mode index in '{s}'"))?;
                    if i == 0 {
                        return Err("mode index starts at 1".into());
                    }
                    Ok(Self::Mode(i))
                } else if let Some(p) = s.strip_prefix("file:") {
                    Ok(Self::File(PathBuf::from(p.trim())))
                } else {
                    Err(format!("unknown profile '{s}' (expected zero, parabola, mode:<i> or file:<path>)"))
                }
            }
        }
    }

    fn emit(&self) -> String {
        match self {
            Self::Zero => "zero".into(),
            Self::Parabola => "parabola".into(),
            Self::Mode(i) => format!("mode:{i}"),
            Self::File(p) => format!("file:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub diffusivity: f64,
    pub length: f64,
    pub horizon: f64,
    pub reaction: Vec<f64>,
    pub alpha: Vec<f64>,
    pub alpha_star: f64,
    pub initial: InitialProfile,
    pub steps: usize,
    /// Mesh grading; the default follows `α(0)`.
    pub grading: Option<f64>,
    pub modes: usize,
    pub window: (f64, f64),
    pub x_count: usize,
    pub t_stride: usize,
    pub noise_level: f64,
    pub refinement: usize,
    pub degree: usize,
    pub max_iter: usize,
    pub tolerance: f64,
    pub tikhonov: f64,
    pub inverse_modes: usize,
    pub inverse_initial: Option<Vec<f64>>,
    pub scan: (f64, f64, f64),
    pub gamma: f64,
    pub fit_window: Option<(f64, f64)>,
    pub output_dir: PathBuf,
    pub x_points: usize,
    pub seed: u64,
}

struct Entry {
    line: usize,
    value: String,
}

struct Table {
    entries: BTreeMap<String, Entry>,
}

impl Table {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(config_error(line, format!("expected 'section.key = value', got '{content}'")));
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(config_error(line, format!("unknown key '{key}'")));
            }
            if value.is_empty() {
                return Err(config_error(line, format!("empty value for '{key}'")));
            }
            if let Some(prev) = entries.insert(key.to_string(), Entry { line, value: value.to_string() }) {
                return Err(config_error(line, format!("duplicate key '{key}' (first set at line {})", prev.line)));
            }
        }
        Ok(Self { entries })
    }

    fn raw(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    fn required<T>(&self, key: &str, parse: impl Fn(&str) -> std::result::Result<T, String>) -> Result<T> {
        match self.raw(key) {
            Some(e) => parse(&e.value).map_err(|m| config_error(e.line, format!("{key}: {m}"))),
            None => Err(Error::Config { line: None, message: format!("missing required key '{key}'") }),
        }
    }

    fn optional<T>(&self, key: &str, parse: impl Fn(&str) -> std::result::Result<T, String>) -> Result<Option<T>> {
        self.raw(key).map(|e| parse(&e.value).map_err(|m| config_error(e.line, format!("{key}: {m}")))).transpose()
    }

    fn or<T>(&self, key: &str, default: T, parse: impl Fn(&str) -> std::result::Result<T, String>) -> Result<T> {
        Ok(self.optional(key, parse)?.unwrap_or(default))
    }

    /// Runs a semantic check, blaming the line of `key` when present.
    fn check(&self, key: &str, ok: bool, message: impl FnOnce() -> String) -> Result<()> {
        if ok {
            return Ok(());
        }
        let line = self.raw(key).map(|e| e.line);
        Err(Error::Config { line, message: format!("{key}: {}", message()) })
    }
}

fn config_error(line: usize, message: String) -> Error {
    Error::Config { line: Some(line), message }
}

fn real(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

fn count(s: &str) -> std::result::Result<usize, String> {
    s.parse().map_err(|_| format!("'{s}' is not a non-negative integer"))
}

fn seed(s: &str) -> std::result::Result<u64, String> {
    s.parse().map_err(|_| format!("'{s}' is not a 64-bit unsigned seed"))
}

fn list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',').map(|p| real(p.trim())).collect()
}

fn pair(s: &str) -> std::result::Result<(f64, f64), String> {
    match list(s)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        other => Err(format!("expected two comma-separated values, got {}", other.len())),
    }
}

fn path(s: &str) -> std::result::Result<PathBuf, String> {
    Ok(PathBuf::from(s))
}

fn fmt_list(values: &[f64]) -> String {
    values.iter().map(|v| fmt_real(*v)).collect::<Vec<_>>().join(", ")
}

/// Shortest round-trip decimal.
pub fn fmt_real(v: f64) -> String {
    format!("{v:?}")
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let t = Table::parse(text)?;
        let length = t.required("model.L", real)?;
        let cfg = Self {
            diffusivity: t.required("model.K", real)?,
            length,
            horizon: t.required("model.T", real)?,
            reaction: t.or("model.k", vec![1.0], list)?,
            alpha: t.required("model.alpha", list)?,
            alpha_star: t.or("model.alpha_star", 0.95, real)?,
            initial: t.or("model.u0", InitialProfile::Parabola, InitialProfile::parse)?,
            steps: t.required("mesh.M", count)?,
            grading: t.optional("mesh.r", real)?,
            modes: t.or("basis.N", DEFAULT_MODES, count)?,
            window: t.or("observe.window", (0.2 * length, 0.8 * length), pair)?,
            x_count: t.or("observe.x_count", 16, count)?,
            t_stride: t.or("observe.t_stride", 1, count)?,
            noise_level: t.or("observe.noise_level", 0.0, real)?,
            refinement: t.or("observe.refinement", 4, count)?,
            degree: t.or("inverse.degree", 1, count)?,
            max_iter: t.or("inverse.max_iter", 30, count)?,
            tolerance: t.or("inverse.tolerance", 1e-10, real)?,
            tikhonov: t.or("inverse.tikhonov", 0.0, real)?,
            inverse_modes: t.or("inverse.modes", 8, count)?,
            inverse_initial: t.optional("inverse.initial", list)?,
            scan: (t.or("scan.lo", 0.1, real)?, t.or("scan.hi", 0.9, real)?, t.or("scan.step", 0.05, real)?),
            gamma: t.or("diagnose.gamma", 0.0, real)?,
            fit_window: t.optional("diagnose.window", pair)?,
            output_dir: t.or("output.dir", PathBuf::from("out"), path)?,
            x_points: t.or("output.x_points", 21, count)?,
            seed: t.or("run.seed", 0, seed)?,
        };
        cfg.check(&t)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config { line: None, message: format!("cannot read {}: {e}", path.display()) })?;
        let mut cfg = Self::parse(&text)?;
        if let InitialProfile::File(p) = &cfg.initial {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    cfg.initial = InitialProfile::File(dir.join(p));
                }
            }
        }
        Ok(cfg)
    }

    fn check(&self, t: &Table) -> Result<()> {
        t.check("model.K", self.diffusivity > 0.0, || "diffusivity must be positive".into())?;
        t.check("model.L", self.length > 0.0, || "length must be positive".into())?;
        t.check("model.T", self.horizon > 0.0, || "horizon must be positive".into())?;
        if let Err(e) = OrderFunction::new(self.alpha.clone(), self.alpha_star, self.horizon) {
            let key = if t.raw("model.alpha_star").is_some() && !(self.alpha_star > 0.0 && self.alpha_star < 1.0) {
                "model.alpha_star"
            } else {
                "model.alpha"
            };
            return t.check(key, false, || e.to_string());
        }
        t.check("mesh.M", self.steps >= 1, || "need at least one step".into())?;
        if let Some(r) = self.grading {
            t.check("mesh.r", r >= 1.0, || format!("grading must be >= 1, got {r}"))?;
        }
        t.check("basis.N", self.modes >= 1, || "need at least one mode".into())?;
        let (a, b) = self.window;
        t.check("observe.window", 0.0 <= a && a < b && b <= self.length, || {
            format!("window ({a}, {b}) must satisfy 0 <= a < b <= L")
        })?;
        t.check("observe.x_count", self.x_count >= 1, || "need at least one point".into())?;
        t.check("observe.t_stride", (1..=self.steps).contains(&self.t_stride), || {
            format!("stride must lie in 1..=M = {}", self.steps)
        })?;
        t.check("observe.noise_level", (0.0..=0.1).contains(&self.noise_level), || {
            "noise level must lie in [0, 0.1]".into()
        })?;
        t.check("observe.refinement", self.refinement >= 1, || "refinement must be >= 1".into())?;
        t.check("inverse.tikhonov", self.tikhonov >= 0.0, || "weight must be >= 0".into())?;
        t.check("inverse.modes", self.inverse_modes >= 1, || "need at least one mode".into())?;
        let (lo, hi, step) = self.scan;
        t.check("scan.step", step > 0.0 && lo <= hi, || format!("bad scan range {lo}..{hi} step {step}"))?;
        t.check("diagnose.gamma", self.gamma >= 0.0, || "gamma must be >= 0".into())?;
        t.check("output.x_points", self.x_points >= 2, || "need at least two output points".into())?;
        Ok(())
    }

    /// Canonical text form; `parse(emit())` reproduces `self`.
    pub fn emit(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        line("model.K", fmt_real(self.diffusivity));
        line("model.L", fmt_real(self.length));
        line("model.T", fmt_real(self.horizon));
        line("model.k", fmt_list(&self.reaction));
        line("model.alpha", fmt_list(&self.alpha));
        line("model.alpha_star", fmt_real(self.alpha_star));
        line("model.u0", self.initial.emit());
        line("mesh.M", self.steps.to_string());
        if let Some(r) = self.grading {
            line("mesh.r", fmt_real(r));
        }
        line("basis.N", self.modes.to_string());
        line("observe.window", fmt_list(&[self.window.0, self.window.1]));
        line("observe.x_count", self.x_count.to_string());
        line("observe.t_stride", self.t_stride.to_string());
        line("observe.noise_level", fmt_real(self.noise_level));
        line("observe.refinement", self.refinement.to_string());
        line("inverse.degree", self.degree.to_string());
        line("inverse.max_iter", self.max_iter.to_string());
        line("inverse.tolerance", fmt_real(self.tolerance));
        line("inverse.tikhonov", fmt_real(self.tikhonov));
        line("inverse.modes", self.inverse_modes.to_string());
        if let Some(c) = &self.inverse_initial {
            line("inverse.initial", fmt_list(c));
        }
        line("scan.lo", fmt_real(self.scan.0));
        line("scan.hi", fmt_real(self.scan.1));
        line("scan.step", fmt_real(self.scan.2));
        line("diagnose.gamma", fmt_real(self.gamma));
        if let Some((a, b)) = self.fit_window {
            line("diagnose.window", fmt_list(&[a, b]));
        }
        line("output.dir", self.output_dir.display().to_string());
        line("output.x_points", self.x_points.to_string());
        line("run.seed", self.seed.to_string());
        s
    }

    pub fn order(&self) -> Result<OrderFunction> {
        OrderFunction::new(self.alpha.clone(), self.alpha_star, self.horizon)
    }

    pub fn model(&self) -> Result<ModelSpec> {
        let initial = match &self.initial {
            InitialProfile::Zero => InitialDatum::Zero,
            InitialProfile::Parabola => InitialDatum::Parabola,
            InitialProfile::Mode(i) => InitialDatum::Mode(*i),
            InitialProfile::File(p) => InitialDatum::Samples(read_samples(p)?),
        };
        let spec = ModelSpec {
            diffusivity: self.diffusivity,
            length: self.length,
            horizon: self.horizon,
            reaction: Polynomial::new(self.reaction.clone()),
            alpha: self.order()?,
            initial,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha.first().copied().unwrap_or(0.0)
    }

    pub fn mesh(&self) -> Result<TimeMesh> {
        let r = self.grading.unwrap_or_else(|| TimeMesh::default_grading(self.alpha0()));
        TimeMesh::graded(self.horizon, self.steps, r)
    }

    pub fn design(&self) -> Result<ObservationDesign> {
        Ok(ObservationDesign {
            window: self.window,
            x_count: self.x_count,
            t_stride: self.t_stride,
            noise_level: self.noise_level,
            seed: self.seed,
            inversion_mesh: self.mesh()?,
            refinement: self.refinement,
            modes: self.modes,
        })
    }

    pub fn inversion(&self) -> Result<InversionConfig> {
        Ok(InversionConfig {
            degree: self.degree,
            max_iter: self.max_iter,
            gn_tolerance: self.tolerance,
            tikhonov: self.tikhonov,
            alpha_star: self.alpha_star,
            modes: self.inverse_modes,
            mesh: self.mesh()?,
            initial: self.inverse_initial.clone(),
        })
    }
}

fn read_samples(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config { line: None, message: format!("cannot read {}: {e}", path.display()) })?;
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::Config { line: None, message: format!("bad sample '{s}' in {}", path.display()) })
        })
        .collect()
}
