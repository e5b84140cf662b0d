//! Reproducible experiment runner: configuration, validation, the canned
//! studies and their artifact files.
//!
//! A run writes into `output_dir`:
//! - `results.csv`: `model,param,N,u,functional,estimate,stderr,samples,seed`
//! - `spectrum.csv` (spectral studies):
//!   `functional,model,param,u,q,var_q,stderr_q,samples,seed,condition_number`
//! - `meta.json`: resolved config, versions, checks, summary, wall time
//! - `plotdata/*.dat`: two-column series
//!
//! Every Monte Carlo draw comes from a counter-keyed stream, so the CSV
//! files are byte-identical across re-runs and thread counts.

mod config;
mod studies;

pub use config::{validate, AnalysisSpec, ExperimentConfig, Finding, GridSpec, ModelSpec, Study};

use crate::error::Error;
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

/// One row of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub model: String,
    pub param: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub u: Option<f64>,
    pub functional: String,
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

/// One row of `spectrum.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub functional: String,
    pub model: String,
    pub param: String,
    pub u: Option<f64>,
    pub q: usize,
    pub var_q: f64,
    pub stderr_q: f64,
    pub samples: usize,
    pub seed: u64,
    pub condition_number: f64,
}

/// A two-column series written to `plotdata/<name>.dat`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub name: String,
    pub columns: [String; 2],
    pub points: Vec<(f64, f64)>,
}

/// A named pass/fail outcome. Failed audit checks make the run fail with
/// exit status 3; other checks are reported only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
    pub audit: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64, audit: bool) -> Self {
        Self { name: name.into(), value, limit, passed: value <= limit, audit }
    }
}

/// Everything a study produces.
#[derive(Debug, Default)]
pub struct StudyOutput {
    pub results: Vec<ResultRow>,
    pub spectrum: Vec<SpectrumRow>,
    pub plots: Vec<PlotSeries>,
    pub checks: Vec<Check>,
    pub summary: serde_json::Map<String, serde_json::Value>,
    /// Extra text artifacts `(file name, contents)`.
    pub extra_files: Vec<(String, String)>,
}

/// Why a run stopped. Each variant maps to a process exit status.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid config: {}", .0.join("; "))]
    Config(Vec<String>),
    #[error("numerical audit failed: {invariant} ({detail})")]
    Audit { invariant: String, detail: String },
    #[error("I/O failure: {0}")]
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Audit { .. } => 3,
            RunError::Io(_) => 4,
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::Audit { invariant, detail } => RunError::Audit { invariant, detail },
            Error::IllConditioned(c) => {
                RunError::Audit { invariant: "coupling design conditioning".into(), detail: format!("{c:.3e}") }
            }
            Error::NoConvergence(d) => RunError::Audit { invariant: "quadrature convergence".into(), detail: d },
            Error::NonFinite(d) => RunError::Audit { invariant: "finite Monte Carlo moments".into(), detail: d },
            Error::Io(e) => RunError::Io(e.to_string()),
            other => RunError::Config(vec![other.to_string()]),
        }
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> RunError + '_ {
    move |e| RunError::Io(format!("{}: {e}", path.display()))
}

/// Summary of a completed run.
#[derive(Debug)]
pub struct RunReport {
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub checks: Vec<Check>,
    pub wall_time: f64,
}

/// Runs the study without writing anything.
pub fn execute(config: &ExperimentConfig) -> Result<StudyOutput, RunError> {
    let findings = validate(config);
    if !findings.is_empty() {
        return Err(RunError::Config(findings.iter().map(|f| f.to_string()).collect()));
    }
    let study = config.study.expect("validated");
    Ok(match study {
        Study::CancellationScan => studies::cancellation_scan(config)?,
        Study::CovarianceCheck => studies::covariance_check(config)?,
        Study::CoefficientOracle => studies::coefficient_oracle(config)?,
        Study::Asymptotics => studies::asymptotics(config)?,
        Study::TensorVerify => studies::tensor_verify(config)?,
        Study::Louis2Check => studies::louis2_check(config)?,
    })
}

/// Validates, runs and writes the artifacts. Artifacts are written even
/// when an audit check fails; the error names the first failing check.
pub fn run(config: &ExperimentConfig) -> Result<RunReport, RunError> {
    let start = Instant::now();
    let out = execute(config)?;
    let wall_time = start.elapsed().as_secs_f64();
    let files = write_artifacts(config, &out, wall_time)?;
    if let Some(c) = out.checks.iter().find(|c| c.audit && !c.passed) {
        return Err(RunError::Audit {
            invariant: c.name.clone(),
            detail: format!("value {:e} exceeds {:e}", c.value, c.limit),
        });
    }
    Ok(RunReport { output_dir: config.output_dir.clone(), files, checks: out.checks, wall_time })
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &str) -> Result<(), RunError> {
    if rows.is_empty() {
        return fs::write(path, format!("{header}\n")).map_err(io_err(path));
    }
    let csv_err = |e: csv::Error| RunError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

pub const RESULTS_HEADER: &str = "model,param,N,u,functional,estimate,stderr,samples,seed";
pub const SPECTRUM_HEADER: &str = "functional,model,param,u,q,var_q,stderr_q,samples,seed,condition_number";

fn write_artifacts(config: &ExperimentConfig, out: &StudyOutput, wall_time: f64) -> Result<Vec<PathBuf>, RunError> {
    let dir = &config.output_dir;
    let plot_dir = dir.join("plotdata");
    fs::create_dir_all(&plot_dir).map_err(io_err(&plot_dir))?;
    let mut files = Vec::new();

    let results = dir.join("results.csv");
    write_csv(&results, &out.results, RESULTS_HEADER)?;
    files.push(results);
    if !out.spectrum.is_empty() {
        let spectrum = dir.join("spectrum.csv");
        write_csv(&spectrum, &out.spectrum, SPECTRUM_HEADER)?;
        files.push(spectrum);
    }
    for series in &out.plots {
        let path = plot_dir.join(format!("{}.dat", series.name));
        let mut text = format!("# {} {}\n", series.columns[0], series.columns[1]);
        for (x, y) in &series.points {
            text.push_str(&format!("{x} {y}\n"));
        }
        fs::write(&path, text).map_err(io_err(&path))?;
        files.push(path);
    }
    for (name, text) in &out.extra_files {
        let path = dir.join(name);
        fs::write(&path, text).map_err(io_err(&path))?;
        files.push(path);
    }

    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let meta = serde_json::json!({
        "study": config.study.map(|s| s.name()),
        "config": config,
        "versions": {
            "chaoswave": env!("CARGO_PKG_VERSION"),
            "format": 1,
        },
        "threads": rayon::current_num_threads(),
        "wall_time_seconds": wall_time,
        "timestamp_unix": timestamp,
        "checks": out.checks,
        "summary": out.summary,
    });
    let path = dir.join("meta.json");
    let mut f = fs::File::create(&path).map_err(io_err(&path))?;
    serde_json::to_writer_pretty(&mut f, &meta).map_err(|e| RunError::Io(e.to_string()))?;
    f.write_all(b"\n").map_err(io_err(&path))?;
    files.push(path);
    Ok(files)
}
