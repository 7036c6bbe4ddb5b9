//! CSV outputs and their readers.
//!
//! Floats are written in shortest round-trip form, so every file reads back
//! bit-for-bit. Metadata that has no column lives in leading `# key = value`
//! comment lines.

use std::io::Write;
use std::path::Path;

use super::config::fmt_real;
use crate::diagnostics::{RegularityReport, Verdict};
use crate::error::{Error, Result};
use crate::forward::SolutionField;
use crate::inverse::{InversionResult, ObservationSet, ScanResult};

/// Parsed CSV: comment metadata, header and string records.
struct Table {
    meta: Vec<(String, String)>,
    header: Vec<String>,
    rows: Vec<csv::StringRecord>,
}

impl Table {
    fn read(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn parse(text: &str) -> Result<Self> {
        let mut meta = Vec::new();
        let mut body = String::new();
        for line in text.lines() {
            if let Some(c) = line.strip_prefix('#') {
                if let Some((k, v)) = c.split_once('=') {
                    meta.push((k.trim().to_string(), v.trim().to_string()));
                }
            } else {
                body.push_str(line);
                body.push('\n');
            }
        }
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
        let header = rdr.headers()?.iter().map(str::to_string).collect();
        let rows = rdr.records().collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self { meta, header, rows })
    }

    fn expect_header(&self, expected: &[&str]) -> Result<()> {
        if self.header.iter().map(String::as_str).ne(expected.iter().copied()) {
            return Err(Error::InvalidInput(format!("unexpected CSV header {:?}, want {expected:?}", self.header)));
        }
        Ok(())
    }

    fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize) -> Result<T> {
    let raw = rec.get(idx).ok_or_else(|| Error::InvalidInput(format!("missing column {idx}")))?;
    raw.parse().map_err(|_| Error::InvalidInput(format!("cannot parse '{raw}' in column {idx}")))
}

fn parse_reals(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad number '{p}'"))))
        .collect()
}

fn parse_pair(s: &str) -> Result<(f64, f64)> {
    match parse_reals(s)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::InvalidInput(format!("expected a pair, got '{s}'"))),
    }
}

/// Writes comment lines, then the CSV rows.
fn write_file(path: &Path, meta: &[(&str, String)], header: &[String], rows: Vec<Vec<String>>) -> Result<()> {
    let mut buf = Vec::new();
    for (k, v) in meta {
        writeln!(buf, "# {k} = {v}")?;
    }
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush()?;
    }
    std::fs::write(path, buf).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionRow {
    pub t: f64,
    pub x: f64,
    pub u: f64,
}

/// `u(x, t_n)` on `x_points` equispaced points of `[0, L]` at every node.
pub fn solution_rows(field: &SolutionField, x_points: usize) -> Vec<SolutionRow> {
    let xs = field.basis.grid(x_points);
    let mut rows = Vec::with_capacity(xs.len() * (field.mesh.steps() + 1));
    for (n, &t) in field.mesh.nodes().iter().enumerate() {
        let c = field.coefficients_at(n);
        for &x in &xs {
            rows.push(SolutionRow { t, x, u: field.basis.synthesize_at(&c, x) });
        }
    }
    rows
}

pub fn write_solution(path: &Path, rows: &[SolutionRow]) -> Result<()> {
    let body = rows.iter().map(|r| vec![fmt_real(r.t), fmt_real(r.x), fmt_real(r.u)]).collect();
    write_file(path, &[], &header(&["t", "x", "u"]), body)
}

pub fn read_solution(path: &Path) -> Result<Vec<SolutionRow>> {
    let t = Table::read(path)?;
    t.expect_header(&["t", "x", "u"])?;
    t.rows.iter().map(|r| Ok(SolutionRow { t: field(r, 0)?, x: field(r, 1)?, u: field(r, 2)? })).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeRow {
    pub t: f64,
    pub i: usize,
    pub value: f64,
}

pub fn mode_rows(field: &SolutionField) -> Vec<ModeRow> {
    let mut rows = Vec::new();
    for (n, &t) in field.mesh.nodes().iter().enumerate() {
        for (k, m) in field.modes.iter().enumerate() {
            rows.push(ModeRow { t, i: k + 1, value: m.values[n] });
        }
    }
    rows
}

pub fn write_modes(path: &Path, rows: &[ModeRow]) -> Result<()> {
    let body = rows.iter().map(|r| vec![fmt_real(r.t), r.i.to_string(), fmt_real(r.value)]).collect();
    write_file(path, &[], &header(&["t", "i", "u_i"]), body)
}

pub fn read_modes(path: &Path) -> Result<Vec<ModeRow>> {
    let t = Table::read(path)?;
    t.expect_header(&["t", "i", "u_i"])?;
    t.rows.iter().map(|r| Ok(ModeRow { t: field(r, 0)?, i: field(r, 1)?, value: field(r, 2)? })).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityRow {
    pub gamma: f64,
    pub ratio: f64,
    pub truncation: f64,
}

pub fn write_stability(path: &Path, row: &StabilityRow) -> Result<()> {
    let body = vec![vec![fmt_real(row.gamma), fmt_real(row.ratio), fmt_real(row.truncation)]];
    write_file(path, &[], &header(&["gamma", "stability_ratio", "truncation_indicator"]), body)
}

pub fn read_stability(path: &Path) -> Result<StabilityRow> {
    let t = Table::read(path)?;
    t.expect_header(&["gamma", "stability_ratio", "truncation_indicator"])?;
    let r = t.rows.first().ok_or_else(|| Error::InvalidInput("empty stability file".into()))?;
    Ok(StabilityRow { gamma: field(r, 0)?, ratio: field(r, 1)?, truncation: field(r, 2)? })
}

/// Rows `x,t,value`, time-major, with window, seed, noise level and
/// synthesis mesh in comments.
pub fn write_observations(path: &Path, obs: &ObservationSet) -> Result<()> {
    let mut meta = vec![
        ("window", format!("{}, {}", fmt_real(obs.window.0), fmt_real(obs.window.1))),
        ("seed", obs.seed.to_string()),
        ("noise_level", fmt_real(obs.noise_level)),
    ];
    if let Some((m, r)) = obs.synthesis_mesh {
        meta.push(("synthesis_mesh", format!("{m}, {}", fmt_real(r))));
    }
    let mut body = Vec::with_capacity(obs.t_points.len() * obs.x_points.len());
    for (&t, row) in obs.t_points.iter().zip(&obs.values) {
        for (&x, &v) in obs.x_points.iter().zip(row) {
            body.push(vec![fmt_real(x), fmt_real(t), fmt_real(v)]);
        }
    }
    write_file(path, &meta, &header(&["x", "t", "value"]), body)
}

pub fn read_observations(path: &Path) -> Result<ObservationSet> {
    let t = Table::read(path)?;
    t.expect_header(&["x", "t", "value"])?;
    let window = parse_pair(t.meta("window").ok_or_else(|| Error::InvalidInput("missing '# window' line".into()))?)?;
    let seed = t.meta("seed").map(str::parse).transpose().map_err(|_| Error::InvalidInput("bad seed".into()))?;
    let noise_level = t.meta("noise_level").map(parse_reals).transpose()?.and_then(|v| v.first().copied());
    let synthesis_mesh = match t.meta("synthesis_mesh") {
        Some(s) => {
            let (m, r) = parse_pair(s)?;
            Some((m as usize, r))
        }
        None => None,
    };
    let mut x_points: Vec<f64> = Vec::new();
    let mut t_points: Vec<f64> = Vec::new();
    let mut values: Vec<Vec<f64>> = Vec::new();
    for rec in &t.rows {
        let (x, tm, v): (f64, f64, f64) = (field(rec, 0)?, field(rec, 1)?, field(rec, 2)?);
        if t_points.last() != Some(&tm) {
            t_points.push(tm);
            values.push(Vec::new());
        }
        let row = values.last_mut().expect("row opened");
        if t_points.len() == 1 {
            x_points.push(x);
        } else if x_points.get(row.len()) != Some(&x) {
            return Err(Error::InvalidInput(format!("observation grid is not rectangular at x = {x}, t = {tm}")));
        }
        row.push(v);
    }
    let obs = ObservationSet {
        window,
        x_points,
        t_points,
        values,
        noise_level: noise_level.unwrap_or(0.0),
        seed: seed.unwrap_or(0),
        synthesis_mesh,
    };
    obs.validate(f64::INFINITY)?;
    Ok(obs)
}

pub fn write_inversion(path: &Path, result: &InversionResult) -> Result<()> {
    let meta = [
        ("converged", result.converged.to_string()),
        ("iterations", result.iterations.to_string()),
        ("final_misfit", fmt_real(result.final_misfit)),
        ("inverse_crime", result.inverse_crime.to_string()),
    ];
    let body = result.coeffs.iter().enumerate().map(|(j, c)| vec![j.to_string(), fmt_real(*c)]).collect();
    write_file(path, &meta, &header(&["coeff_index", "value"]), body)
}

/// Recovered coefficients, `c_0` first.
pub fn read_inversion(path: &Path) -> Result<Vec<f64>> {
    let t = Table::read(path)?;
    t.expect_header(&["coeff_index", "value"])?;
    let mut out = Vec::with_capacity(t.rows.len());
    for (j, r) in t.rows.iter().enumerate() {
        let idx: usize = field(r, 0)?;
        if idx != j {
            return Err(Error::InvalidInput(format!("coefficient index {idx} out of order")));
        }
        out.push(field(r, 1)?);
    }
    Ok(out)
}

pub fn write_residual_history(path: &Path, history: &[f64]) -> Result<()> {
    let body = history.iter().enumerate().map(|(k, v)| vec![k.to_string(), fmt_real(*v)]).collect();
    write_file(path, &[], &header(&["iteration", "residual_norm"]), body)
}

pub fn read_residual_history(path: &Path) -> Result<Vec<f64>> {
    let t = Table::read(path)?;
    t.expect_header(&["iteration", "residual_norm"])?;
    t.rows.iter().map(|r| field(r, 1)).collect()
}

/// `candidate_id,c0,...,cd,misfit`; `d` is the largest candidate degree.
pub fn write_scan(path: &Path, scan: &ScanResult) -> Result<()> {
    let width = scan.entries.iter().map(|e| e.0.len()).max().unwrap_or(1);
    let mut cols = vec!["candidate_id".to_string()];
    cols.extend((0..width).map(|j| format!("c{j}")));
    cols.push("misfit".into());
    let body = scan
        .entries
        .iter()
        .enumerate()
        .map(|(id, (c, m))| {
            let mut row = vec![id.to_string()];
            row.extend((0..width).map(|j| fmt_real(c.get(j).copied().unwrap_or(0.0))));
            row.push(fmt_real(*m));
            row
        })
        .collect();
    write_file(path, &[], &cols, body)
}

pub fn read_scan(path: &Path) -> Result<Vec<(Vec<f64>, f64)>> {
    let t = Table::read(path)?;
    let width = t.header.len().saturating_sub(2);
    let mut expected = vec!["candidate_id".to_string()];
    expected.extend((0..width).map(|j| format!("c{j}")));
    expected.push("misfit".into());
    if width == 0 || t.header != expected {
        return Err(Error::InvalidInput(format!("unexpected scan header {:?}", t.header)));
    }
    t.rows
        .iter()
        .map(|r| {
            let c = (0..width).map(|j| field(r, j + 1)).collect::<Result<Vec<f64>>>()?;
            Ok((c, field(r, width + 1)?))
        })
        .collect()
}

const REGULARITY_COLUMNS: [&str; 5] = ["alpha0", "fitted_slope", "expected_slope", "weighted_norm", "verdict"];

pub fn write_regularity(path: &Path, reports: &[RegularityReport]) -> Result<()> {
    let meta: Vec<(&str, String)> = reports
        .first()
        .map(|r| vec![("fit_window", format!("{}, {}", fmt_real(r.fit_window.0), fmt_real(r.fit_window.1)))])
        .unwrap_or_default();
    let body = reports
        .iter()
        .map(|r| {
            vec![
                fmt_real(r.alpha0),
                fmt_real(r.fitted_slope),
                fmt_real(r.expected_slope),
                fmt_real(r.weighted_norm),
                r.verdict.as_str().to_string(),
            ]
        })
        .collect();
    write_file(path, &meta, &header(&REGULARITY_COLUMNS), body)
}

pub fn read_regularity(path: &Path) -> Result<Vec<RegularityReport>> {
    let t = Table::read(path)?;
    t.expect_header(&REGULARITY_COLUMNS)?;
    let fit_window = t.meta("fit_window").map(parse_pair).transpose()?.unwrap_or((f64::NAN, f64::NAN));
    t.rows
        .iter()
        .map(|r| {
            Ok(RegularityReport {
                alpha0: field(r, 0)?,
                fitted_slope: field(r, 1)?,
                expected_slope: field(r, 2)?,
                weighted_norm: field(r, 3)?,
                fit_window,
                verdict: field::<String>(r, 4)?.parse::<Verdict>()?,
            })
        })
        .collect()
}
