//! On-disk representations: path and distance JSON, experiment configs, and
//! the CSV tables written by the command line.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use timesub_core::convergence::{ConvergenceReport, ExperimentConfig, FunctionalSpec};
use timesub_core::counterexamples::ExampleReport;
use timesub_core::processes::{InnerFamily, OuterFamily};
use timesub_core::{DistanceResult, PiecewisePath};

use crate::error::CliError;

/// `{"horizon", "breakpoints", "values", "slopes", "terminal"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathJson {
    pub horizon: f64,
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
    pub terminal: f64,
}

impl From<&PiecewisePath> for PathJson {
    fn from(p: &PiecewisePath) -> Self {
        Self {
            horizon: p.horizon(),
            breakpoints: p.breakpoints().to_vec(),
            values: p.values().to_vec(),
            slopes: p.slopes().to_vec(),
            terminal: p.terminal(),
        }
    }
}

impl PathJson {
    /// Validated, canonical path. The horizon must equal the last breakpoint.
    pub fn into_path(self) -> Result<PiecewisePath, CliError> {
        if self.breakpoints.last() != Some(&self.horizon) {
            return Err(CliError::Input(format!(
                "horizon {} does not match the last breakpoint",
                self.horizon
            )));
        }
        let p = PiecewisePath::from_parts(self.breakpoints, self.values, self.slopes, self.terminal)
            .map_err(|e| CliError::Input(e.to_string()))?;
        Ok(p.canonicalize())
    }
}

/// `{"value", "gap", "witness"}`; the witness is the reparametrization as a
/// path, or `null`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceJson {
    pub value: f64,
    pub gap: f64,
    pub witness: Option<PathJson>,
}

impl DistanceJson {
    pub fn new(r: &DistanceResult, with_witness: bool) -> Self {
        Self {
            value: r.value,
            gap: r.certified_gap,
            witness: if with_witness {
                r.witness.as_ref().map(|w| PathJson::from(w.path()))
            } else {
                None
            },
        }
    }
}

/// A scalar or a list; configs accept `"n": 100` as well as `"n": [100, 1000]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(u64),
    Many(Vec<u64>),
}

impl OneOrMany {
    pub fn into_vec(self) -> Vec<u64> {
        match self {
            OneOrMany::One(n) => vec![n],
            OneOrMany::Many(v) => v,
        }
    }
}

fn default_inner() -> InnerFamily {
    InnerFamily::Linear { a: 1.0 }
}

fn default_functionals() -> Vec<FunctionalSpec> {
    vec![FunctionalSpec::Terminal]
}

/// Convergence experiment as written on disk. `seed` may instead come from
/// the command line, which takes precedence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub n: OneOrMany,
    pub outer: OuterFamily,
    #[serde(default = "default_inner")]
    pub inner: InnerFamily,
    #[serde(default = "default_functionals")]
    pub functionals: Vec<FunctionalSpec>,
    pub samples: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub experiment: u64,
}

impl ExperimentFile {
    pub fn into_config(self, seed: Option<u64>) -> Result<ExperimentConfig, CliError> {
        let seed = seed
            .or(self.seed)
            .ok_or_else(|| CliError::Input("a seed is required: pass --seed or set \"seed\"".into()))?;
        Ok(ExperimentConfig {
            n: self.n.into_vec(),
            outer: self.outer,
            inner: self.inner,
            functionals: self.functionals,
            samples: self.samples,
            seed,
            experiment: self.experiment,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulateOutput {
    /// One row per sample, one column per functional.
    #[default]
    Functionals,
    /// `sample,t,value` rows for each sampled path.
    Paths,
}

/// Simulation request: `samples` draws of the substituted process at a
/// single portfolio size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateFile {
    pub n: u64,
    pub outer: OuterFamily,
    #[serde(default = "default_inner")]
    pub inner: InnerFamily,
    #[serde(default = "default_functionals")]
    pub functionals: Vec<FunctionalSpec>,
    pub samples: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub experiment: u64,
    #[serde(default)]
    pub output: SimulateOutput,
    /// Extra uniform evaluation points per path in `paths` output.
    #[serde(default)]
    pub mesh: Option<usize>,
}

pub fn read_json<T: serde::de::DeserializeOwned>(file: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(file).map_err(|e| CliError::Input(format!("{}: {e}", file.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", file.display())))
}

pub fn read_path(file: &Path) -> Result<PiecewisePath, CliError> {
    read_json::<PathJson>(file)?.into_path()
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Internal(e.to_string())
}

/// Evaluation times: every breakpoint, the horizon, and `mesh + 1` uniform
/// points if requested; sorted and deduplicated.
pub fn sample_times(p: &PiecewisePath, mesh: Option<usize>) -> Vec<f64> {
    let h = p.horizon();
    let mut ts: Vec<f64> = p.breakpoints().to_vec();
    if let Some(m) = mesh.filter(|&m| m > 0) {
        ts.extend((0..=m).map(|i| h * i as f64 / m as f64));
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

/// `t,value` with right-continuous values.
pub fn path_csv(p: &PiecewisePath, mesh: Option<usize>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "value"]).map_err(csv_err)?;
    for t in sample_times(p, mesh) {
        let v = p.eval(t)?;
        w.write_record([t.to_string(), v.to_string()]).map_err(csv_err)?;
    }
    finish(w)
}

pub fn distance_csv(d: &DistanceJson) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["value", "gap"]).map_err(csv_err)?;
    w.write_record([d.value.to_string(), d.gap.to_string()]).map_err(csv_err)?;
    finish(w)
}

/// `n,functional,statistic,critical_99,pass`.
pub fn report_csv(r: &ConvergenceReport) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "functional", "statistic", "critical_99", "pass"]).map_err(csv_err)?;
    for row in &r.rows {
        w.write_record([
            row.n.to_string(),
            row.functional.clone(),
            row.statistic.to_string(),
            row.critical_99.to_string(),
            row.pass.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

/// Log-log plotting data: `functional,n,log10_n,statistic,log10_statistic,wasserstein`.
/// A zero statistic has an empty logarithm.
pub fn plot_csv(r: &ConvergenceReport) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["functional", "n", "log10_n", "statistic", "log10_statistic", "wasserstein"])
        .map_err(csv_err)?;
    let mut rows: Vec<_> = r.rows.iter().collect();
    rows.sort_by(|a, b| a.functional.cmp(&b.functional).then(a.n.cmp(&b.n)));
    for row in rows {
        let log_stat = if row.statistic > 0.0 {
            row.statistic.log10().to_string()
        } else {
            String::new()
        };
        w.write_record([
            row.functional.clone(),
            row.n.to_string(),
            (row.n as f64).log10().to_string(),
            row.statistic.to_string(),
            log_stat,
            row.wasserstein.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

pub fn example_csv(r: &ExampleReport) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &r.rows {
        w.serialize(row).map_err(csv_err)?;
    }
    if r.rows.is_empty() {
        return Ok(String::new());
    }
    finish(w)
}

/// `sample,<label>...`; a header alone when there are no samples.
pub fn functionals_csv(labels: &[String], columns: &[Vec<f64>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["sample".to_string()];
    header.extend(labels.iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    let m = columns.first().map_or(0, Vec::len);
    for i in 0..m {
        let mut rec = vec![i.to_string()];
        rec.extend(columns.iter().map(|c| c[i].to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    finish(w)
}

/// `sample,t,value` rows for each path in turn.
pub fn paths_csv(paths: &[PiecewisePath], mesh: Option<usize>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["sample", "t", "value"]).map_err(csv_err)?;
    for (i, p) in paths.iter().enumerate() {
        for t in sample_times(p, mesh) {
            w.write_record([i.to_string(), t.to_string(), p.eval(t)?.to_string()])
                .map_err(csv_err)?;
        }
    }
    finish(w)
}
