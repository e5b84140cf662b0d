use super::RunError;
use crate::projector::{Functional, MehlerOptions};
use crate::wave::{canonical_representatives, lattice_points, FieldKind, Manifold};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

/// The canned studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Study {
    CancellationScan,
    CovarianceCheck,
    CoefficientOracle,
    Asymptotics,
    TensorVerify,
    Louis2Check,
}

impl Study {
    pub const ALL: [Study; 6] = [
        Study::CancellationScan,
        Study::CovarianceCheck,
        Study::CoefficientOracle,
        Study::Asymptotics,
        Study::TensorVerify,
        Study::Louis2Check,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Study::CancellationScan => "cancellation-scan",
            Study::CovarianceCheck => "covariance-check",
            Study::CoefficientOracle => "coefficient-oracle",
            Study::Asymptotics => "asymptotics",
            Study::TensorVerify => "tensor-verify",
            Study::Louis2Check => "louis2-check",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    fn uses_thresholds(self) -> bool {
        matches!(self, Study::CancellationScan | Study::CoefficientOracle | Study::Asymptotics | Study::Louis2Check)
    }

    fn uses_spectrum(self) -> bool {
        matches!(self, Study::CancellationScan | Study::Louis2Check)
    }
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSpec {
    pub manifold: Manifold,
    /// Sphere degrees ℓ, one model each.
    pub degrees: Vec<usize>,
    /// Torus frequencies `n = |λ|²`, one monochromatic model each.
    pub n: Vec<u64>,
    /// Lattice shells of a multi-frequency torus window.
    pub window: Vec<u64>,
    pub kinds: Vec<FieldKind>,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            manifold: Manifold::Sphere,
            degrees: Vec::new(),
            n: Vec::new(),
            window: Vec::new(),
            kinds: vec![FieldKind::Uniform],
        }
    }
}

/// Grid resolution; unset values fall back to [`GridSpec::lat_order_for`]
/// and [`GridSpec::resolution_for`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub lat_order: Option<usize>,
    pub resolution: Option<usize>,
}

impl GridSpec {
    pub fn lat_order_for(&self, l: usize) -> usize {
        self.lat_order.unwrap_or(2 * l + 4)
    }

    /// Torus grid side for shells with largest lattice coordinate `max_coord`.
    pub fn resolution_for(&self, max_coord: i64) -> usize {
        self.resolution.unwrap_or((8 * (max_coord as usize + 1)).max(24))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSpec {
    pub thresholds: Vec<f64>,
    pub functionals: Vec<Functional>,
    pub q_max: usize,
    pub t_grid: Vec<f64>,
    pub blocks: usize,
    pub ridge: f64,
    /// Cosines `⟨x, z⟩` of the point pairs used by the covariance check.
    pub pair_cosines: Vec<f64>,
    /// Highest order summed in the pointwise Parseval check.
    pub parseval_order: usize,
    /// Dimension at which closed-form coefficients are compared with their limits.
    pub limit_n: usize,
    /// Samples for entry-wise tensor extraction.
    pub tensor_samples: usize,
    pub wick_tensors: usize,
    pub wick_points: usize,
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        let m = MehlerOptions::default();
        Self {
            thresholds: Vec::new(),
            functionals: vec![Functional::Area, Functional::Betti0],
            q_max: m.q_max,
            t_grid: m.t_grid,
            blocks: m.blocks,
            ridge: m.ridge,
            pair_cosines: vec![0.0, 0.9],
            parseval_order: 12,
            limit_n: 10_000,
            tensor_samples: 40_000,
            wick_tensors: 20,
            wick_points: 100,
        }
    }
}

fn default_samples() -> usize {
    10_000
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("chaoswave-out")
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub study: Option<Study>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub analysis: AnalysisSpec,
}

impl ExperimentConfig {
    pub fn new(study: Study) -> Self {
        Self {
            study: Some(study),
            seed: 0,
            samples: default_samples(),
            output_dir: default_output_dir(),
            model: ModelSpec::default(),
            grid: GridSpec::default(),
            analysis: AnalysisSpec::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn from_json_str(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    /// Reads TOML, or JSON when the extension is `.json`. Unreadable files
    /// are I/O failures; malformed ones are config errors.
    pub fn from_path(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
        let parsed = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        };
        parsed.map_err(|e| RunError::Config(vec![format!("{}: {e}", path.display())]))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn mehler_options(&self) -> MehlerOptions {
        MehlerOptions {
            q_max: self.analysis.q_max,
            t_grid: self.analysis.t_grid.clone(),
            samples: self.samples,
            seed: self.seed,
            blocks: self.analysis.blocks,
            ridge: self.analysis.ridge,
        }
    }
}

/// A problem found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Dimension, volume and label of one model named by the config.
struct ModelDims {
    label: String,
    n: usize,
    vol: f64,
}

fn torus_dims(shells: &[u64], label: String, field: &str, out: &mut Vec<Finding>) -> Option<(ModelDims, i64)> {
    let mut n = 0;
    let mut max_coord = 0;
    for &s in shells {
        match canonical_representatives(s) {
            Ok(r) => n += 2 * r.len(),
            Err(e) => {
                out.push(Finding { field: field.into(), message: e.to_string() });
                return None;
            }
        }
        max_coord = lattice_points(s).iter().flat_map(|p| [p[0].abs(), p[1].abs()]).fold(max_coord, i64::max);
    }
    Some((ModelDims { label, n, vol: 1.0 }, max_coord))
}

fn push(out: &mut Vec<Finding>, field: &str, message: impl Into<String>) {
    out.push(Finding { field: field.into(), message: message.into() });
}

/// Schema and physics checks. Returns every problem found; an empty list
/// means the config can be run.
pub fn validate(config: &ExperimentConfig) -> Vec<Finding> {
    let mut out = Vec::new();
    let Some(study) = config.study else {
        push(&mut out, "study", "no study selected");
        return out;
    };
    let a = &config.analysis;
    let m = &config.model;
    if config.samples == 0 {
        push(&mut out, "samples", "must be positive");
    }
    if study.uses_thresholds() && a.thresholds.is_empty() {
        push(&mut out, "analysis.thresholds", "nothing to do: no thresholds given");
    }
    if a.thresholds.iter().any(|u| !u.is_finite()) {
        push(&mut out, "analysis.thresholds", "thresholds must be finite");
    }
    if study.uses_spectrum() {
        if a.q_max == 0 {
            push(&mut out, "analysis.q_max", "must be positive");
        }
        if a.t_grid.len() < a.q_max + 1 {
            push(
                &mut out,
                "analysis.t_grid",
                format!("q_max = {} needs at least {} coupling values, got {}", a.q_max, a.q_max + 1, a.t_grid.len()),
            );
        }
        if a.t_grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
            push(&mut out, "analysis.t_grid", "coupling values must lie in [0, 1]");
        }
        if a.blocks < 2 || config.samples < 2 * a.blocks {
            push(
                &mut out,
                "analysis.blocks",
                format!("{} samples cannot fill {} jackknife blocks", config.samples, a.blocks),
            );
        }
    }

    let needs_sphere = matches!(study, Study::CovarianceCheck | Study::CoefficientOracle | Study::Asymptotics);
    if needs_sphere && m.manifold != Manifold::Sphere {
        push(&mut out, "model.manifold", format!("{study} runs on the sphere"));
    }
    if study == Study::Louis2Check {
        if m.manifold != Manifold::Torus {
            push(&mut out, "model.manifold", "louis2-check runs on the torus");
        }
        let mut w = m.window.clone();
        w.sort_unstable();
        w.dedup();
        if w.len() != 2 {
            push(&mut out, "model.window", format!("need exactly two lattice shells, got {:?}", m.window));
        }
        if a.tensor_samples == 0 {
            push(&mut out, "analysis.tensor_samples", "must be positive");
        }
    }
    if study == Study::TensorVerify && (a.wick_tensors == 0 || a.wick_points == 0 || a.tensor_samples == 0) {
        push(&mut out, "analysis", "nothing to do: tensor and point counts must be positive");
    }
    if study == Study::CovarianceCheck {
        if a.pair_cosines.is_empty() {
            push(&mut out, "analysis.pair_cosines", "nothing to do: no point pairs");
        }
        if a.pair_cosines.iter().any(|c| !(-1.0..=1.0).contains(c)) {
            push(&mut out, "analysis.pair_cosines", "cosines must lie in [-1, 1]");
        }
    }
    if study == Study::CancellationScan {
        if a.functionals.is_empty() {
            push(&mut out, "analysis.functionals", "nothing to do: no functionals");
        }
        if m.kinds.is_empty() {
            push(&mut out, "model.kinds", "nothing to do: no field kinds");
        }
    }
    if study == Study::CoefficientOracle && a.limit_n < 2 {
        push(&mut out, "analysis.limit_n", "must be at least 2");
    }

    // Models named by the config.
    let mut dims = Vec::new();
    if study != Study::TensorVerify {
        match m.manifold {
            Manifold::Sphere => {
                if m.degrees.is_empty() {
                    push(&mut out, "model.degrees", "nothing to do: no degrees given");
                }
                for &l in &m.degrees {
                    if l == 0 {
                        push(&mut out, "model.degrees", "degree must be at least 1");
                        continue;
                    }
                    let lat = config.grid.lat_order_for(l);
                    // The asymptotics sweep is quadrature-only and never builds a grid.
                    if study != Study::Asymptotics && lat < 2 * l + 2 {
                        push(
                            &mut out,
                            "grid.lat_order",
                            format!("quadrature under-resolved: lat_order {lat} < 2ℓ+2 = {} at ℓ = {l}", 2 * l + 2),
                        );
                    }
                    dims.push(ModelDims { label: format!("ℓ = {l}"), n: 2 * l + 1, vol: 4.0 * PI });
                }
            }
            Manifold::Torus => {
                let mut models: Vec<(Vec<u64>, &str)> = Vec::new();
                if study == Study::Louis2Check {
                    models.push((m.window.clone(), "model.window"));
                } else {
                    if m.n.is_empty() {
                        push(&mut out, "model.n", "nothing to do: no torus frequencies given");
                    }
                    models.extend(m.n.iter().map(|&n| (vec![n], "model.n")));
                }
                for (shells, field) in models {
                    if shells.is_empty() {
                        continue;
                    }
                    if let Some((d, max_coord)) = torus_dims(&shells, format!("n = {shells:?}"), field, &mut out) {
                        let res = config.grid.resolution_for(max_coord);
                        if res <= 2 * max_coord as usize {
                            push(
                                &mut out,
                                "grid.resolution",
                                format!(
                                    "quadrature under-resolved: resolution {res} ≤ 2·{max_coord} for shells {shells:?}"
                                ),
                            );
                        }
                        dims.push(d);
                    }
                }
            }
        }
    }
    if study.uses_thresholds() {
        for d in &dims {
            let band = (d.n as f64 / d.vol).sqrt();
            for &u in &a.thresholds {
                if u.abs() >= band {
                    push(
                        &mut out,
                        "analysis.thresholds",
                        format!("threshold outside admissible band: u = {u} at {} (|u| < {band:.4})", d.label),
                    );
                }
            }
        }
    }
    out
}
