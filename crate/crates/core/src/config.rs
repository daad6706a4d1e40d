//! Experiment configuration.
//!
//! The file is flat `section.key = value` text (valid TOML with dotted
//! keys); lists use brackets:
//!
//! ```text
//! seed.master = 20240101
//! spa.n = [1000, 2000, 3000]
//! spa.p = ["inf"]
//! infection.scenarios = ["A", "B"]
//! infection.gamma = [1, 10, 100]
//! ```
//!
//! Every key is optional; missing keys take the defaults of the reference
//! protocol (modified SPA, `A1 = 0.5`, `A2 = 1`, `d = 1`, `n = 1000..=10000`
//! step 1000, scenarios A and B, `γ ∈ {1, 10, 100}`, 50 runs on one graph
//! per cell, origin at the oldest vertex).

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::analysis;
use crate::contagion::{ContagionModel, DegreeEstimate, MeanDegree, ScenarioKind, DEFAULT_DEGREE_FLOOR};
use crate::generator::Variant;
use crate::geometry::{MetricConfig, Norm};
use crate::sir::Origin;

pub const DEFAULT_MASTER_SEED: u64 = 20_170_601;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Read { path: PathBuf, message: String },
    #[error("malformed config: {0}")]
    Syntax(String),
    #[error("invalid value for `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, message: message.into() }
}

/// A number or a word, for keys such as `spa.p` that accept both.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Scalar {
    fn text(&self) -> String {
        match self {
            Scalar::Int(v) => v.to_string(),
            Scalar::Float(v) => v.to_string(),
            Scalar::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSeed {
    pub master: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSpa {
    pub n: Option<Vec<i64>>,
    pub a1: Option<Vec<f64>>,
    pub a2: Option<Vec<f64>>,
    pub d: Option<Vec<i64>>,
    pub p: Option<Vec<Scalar>>,
    pub variant: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawInfection {
    pub scenarios: Option<Vec<String>>,
    pub gamma: Option<Vec<f64>>,
    pub tau: Option<f64>,
    pub origin: Option<Scalar>,
    pub runs: Option<i64>,
    pub graphs_per_cell: Option<i64>,
    pub max_steps: Option<i64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawContagion {
    pub expected_degree: Option<String>,
    pub mean_degree: Option<String>,
    pub degree_floor: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawBounds {
    pub n: Option<Vec<f64>>,
    pub phi: Option<f64>,
    pub gamma: Option<f64>,
}

/// Configuration as written, before defaults and validation.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub seed: RawSeed,
    #[serde(default)]
    pub output: RawOutput,
    #[serde(default)]
    pub spa: RawSpa,
    #[serde(default)]
    pub infection: RawInfection,
    #[serde(default)]
    pub contagion: RawContagion,
    #[serde(default)]
    pub bounds: RawBounds,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Read { path: path.to_path_buf(), message: e.to_string() })?;
        Self::parse(&text)
    }
}

/// Graph-generation grid: every combination is one graph cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaGrid {
    pub n: Vec<usize>,
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    pub d: Vec<usize>,
    pub p: Vec<Norm>,
    pub variant: Vec<Variant>,
}

/// Parameters of one graph cell (everything but the seed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphCell {
    pub n: usize,
    pub a1: f64,
    pub a2: f64,
    pub metric: MetricConfig,
    pub variant: Variant,
}

impl SpaGrid {
    /// Cells in canonical order: variant, A1, A2, d, p, then n fastest.
    pub fn cells(&self) -> Vec<GraphCell> {
        let mut cells = Vec::new();
        for &variant in &self.variant {
            for &a1 in &self.a1 {
                for &a2 in &self.a2 {
                    for &d in &self.d {
                        for &p in &self.p {
                            for &n in &self.n {
                                let metric = MetricConfig::new(d, p).expect("validated grid");
                                cells.push(GraphCell { n, a1, a2, metric, variant });
                            }
                        }
                    }
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsConfig {
    pub n: Vec<f64>,
    /// `None` selects the midpoint of `(0, phi_bound)` per parameter set.
    pub phi: Option<f64>,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub grid: SpaGrid,
    pub scenarios: Vec<ScenarioKind>,
    pub gammas: Vec<f64>,
    pub tau: f64,
    pub origin: Origin,
    pub runs_per_graph: usize,
    pub graphs_per_cell: usize,
    pub max_steps: Option<u32>,
    pub model: ContagionModel,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub bounds: BoundsConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::resolve(RawConfig::default()).expect("defaults are valid")
    }
}

fn non_empty<T>(field: &'static str, values: Vec<T>) -> Result<Vec<T>, ConfigError> {
    if values.is_empty() {
        Err(invalid(field, "list must not be empty"))
    } else {
        Ok(values)
    }
}

fn positive(field: &'static str, value: i64) -> Result<usize, ConfigError> {
    usize::try_from(value).ok().filter(|&v| v >= 1).ok_or_else(|| invalid(field, format!("must be >= 1, got {value}")))
}

impl ExperimentConfig {
    /// Applies defaults and checks every value against its module's rules.
    pub fn resolve(raw: RawConfig) -> Result<Self, ConfigError> {
        let spa = raw.spa;
        let n = non_empty("spa.n", spa.n.unwrap_or_else(|| (1..=10).map(|k| k * 1000).collect()))?
            .into_iter()
            .map(|v| {
                let n = positive("spa.n", v)?;
                if n > u32::MAX as usize - 1 {
                    return Err(invalid("spa.n", format!("{n} exceeds the supported maximum")));
                }
                Ok(n)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let a1 = non_empty("spa.a1", spa.a1.unwrap_or_else(|| vec![0.5]))?;
        if let Some(bad) = a1.iter().find(|&&v| !(v > 0.0 && v < 1.0)) {
            return Err(invalid("spa.a1", format!("must lie in (0, 1), got {bad}")));
        }
        let a2 = non_empty("spa.a2", spa.a2.unwrap_or_else(|| vec![1.0]))?;
        if let Some(bad) = a2.iter().find(|&&v| !(v.is_finite() && v >= 0.0)) {
            return Err(invalid("spa.a2", format!("must be finite and >= 0, got {bad}")));
        }
        let d = non_empty("spa.d", spa.d.unwrap_or_else(|| vec![1]))?
            .into_iter()
            .map(|v| positive("spa.d", v))
            .collect::<Result<Vec<_>, _>>()?;
        let p = non_empty("spa.p", spa.p.unwrap_or_else(|| vec![Scalar::Text("inf".into())]))?
            .iter()
            .map(|s| s.text().parse::<Norm>().map_err(|e| invalid("spa.p", e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let variant = non_empty("spa.variant", spa.variant.unwrap_or_else(|| vec!["modified".into()]))?
            .iter()
            .map(|s| s.parse::<Variant>().map_err(|e| invalid("spa.variant", e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;

        let inf = raw.infection;
        let scenarios = non_empty("infection.scenarios", inf.scenarios.unwrap_or_else(|| vec!["A".into(), "B".into()]))?
            .iter()
            .map(|s| s.parse::<ScenarioKind>().map_err(|e| invalid("infection.scenarios", e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let tau = inf.tau.unwrap_or(1.0);
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(invalid("infection.tau", format!("must lie in (0, 1], got {tau}")));
        }
        let gammas = non_empty("infection.gamma", inf.gamma.unwrap_or_else(|| vec![1.0, 10.0, 100.0]))?;
        if let Some(bad) = gammas.iter().find(|&&g| !(g.is_finite() && g >= 0.0)) {
            return Err(invalid("infection.gamma", format!("must be finite and >= 0, got {bad}")));
        }
        let origin = match inf.origin {
            None => Origin::Oldest,
            Some(Scalar::Int(i)) => Origin::Index(positive("infection.origin", i)?),
            Some(Scalar::Text(s)) => match s.trim().to_ascii_lowercase().as_str() {
                "oldest" => Origin::Oldest,
                "random" | "uniform" => Origin::UniformRandom,
                other => match other.parse::<i64>() {
                    Ok(i) => Origin::Index(positive("infection.origin", i)?),
                    Err(_) => return Err(invalid("infection.origin", format!("expected oldest, random or an index, got `{s}`"))),
                },
            },
            Some(other) => return Err(invalid("infection.origin", format!("unsupported value {}", other.text()))),
        };
        if let Origin::Index(i) = origin {
            if let Some(&small) = n.iter().find(|&&n| n < i) {
                return Err(invalid("infection.origin", format!("index {i} exceeds network size {small}")));
            }
        }
        let runs_per_graph = positive("infection.runs", inf.runs.unwrap_or(50))?;
        let graphs_per_cell = positive("infection.graphs_per_cell", inf.graphs_per_cell.unwrap_or(1))?;
        let max_steps = inf
            .max_steps
            .map(|v| u32::try_from(v).ok().filter(|&v| v >= 1).ok_or_else(|| invalid("infection.max_steps", "must be >= 1")))
            .transpose()?;

        let c = raw.contagion;
        let degree_estimate = match c.expected_degree.as_deref().map(str::trim) {
            None | Some("closed") => DegreeEstimate::Closed,
            Some("exact") => DegreeEstimate::Exact,
            Some(other) => return Err(invalid("contagion.expected_degree", format!("expected closed or exact, got `{other}`"))),
        };
        let mean_degree = match c.mean_degree.as_deref().map(str::trim) {
            None | Some("asymptotic") => MeanDegree::Asymptotic,
            Some("empirical") => MeanDegree::Empirical,
            Some(other) => {
                return Err(invalid("contagion.mean_degree", format!("expected asymptotic or empirical, got `{other}`")))
            }
        };
        let degree_floor = c.degree_floor.unwrap_or(DEFAULT_DEGREE_FLOOR);
        if !(degree_floor.is_finite() && degree_floor >= 0.0) {
            return Err(invalid("contagion.degree_floor", format!("must be finite and >= 0, got {degree_floor}")));
        }
        if mean_degree == MeanDegree::Asymptotic && scenarios.contains(&ScenarioKind::B) && a2.contains(&0.0) {
            return Err(invalid("spa.a2", "scenario B needs A2 > 0"));
        }

        let b = raw.bounds;
        let bound_n = non_empty(
            "bounds.n",
            b.n.unwrap_or_else(|| (0..=27).map(|k| 10f64.powf(3.0 + k as f64 / 3.0).round()).collect()),
        )?;
        if let Some(bad) = bound_n.iter().find(|&&v| !(v.is_finite() && v > 1.0)) {
            return Err(invalid("bounds.n", format!("must be > 1, got {bad}")));
        }
        if let Some(phi) = b.phi {
            if !(phi.is_finite() && phi > 0.0) {
                return Err(invalid("bounds.phi", format!("must be > 0, got {phi}")));
            }
        }
        let bound_gamma = b.gamma.unwrap_or(10.0);
        if !(bound_gamma.is_finite() && bound_gamma >= 0.0) {
            return Err(invalid("bounds.gamma", format!("must be finite and >= 0, got {bound_gamma}")));
        }

        Ok(Self {
            grid: SpaGrid { n, a1, a2, d, p, variant },
            scenarios,
            gammas,
            tau,
            origin,
            runs_per_graph,
            graphs_per_cell,
            max_steps,
            model: ContagionModel { degree_estimate, mean_degree, degree_floor },
            master_seed: raw.seed.master.unwrap_or(DEFAULT_MASTER_SEED),
            output_dir: raw.output.dir.unwrap_or_else(|| PathBuf::from("out")),
            bounds: BoundsConfig { n: bound_n, phi: b.phi, gamma: bound_gamma },
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::resolve(RawConfig::load(path)?)
    }

    /// Infection cells: graph cells × scenarios × gammas.
    pub fn cell_count(&self) -> usize {
        self.grid.cells().len() * self.scenarios.len() * self.gammas.len()
    }

    pub fn runs_per_cell(&self) -> usize {
        self.graphs_per_cell * self.runs_per_graph
    }

    pub fn expected_rows(&self) -> usize {
        self.cell_count() * self.runs_per_cell()
    }

    /// `φ` used for bound tables at the given `A1` and `d`.
    pub fn bound_phi(&self, a1: f64, d: usize) -> f64 {
        self.bounds.phi.unwrap_or_else(|| analysis::default_phi(a1, d))
    }
}
