use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::EstimatorTable;
use crate::error::Error;
use crate::manifold::{
    family_from_spec, prior_from_spec, validate_model, BayesianModel, FamilySpec, PriorSpec,
    ThetaPoint, CHRISTOFFEL_STEP, METRIC_STEP, SCORE_STEP,
};
use crate::measures::AlphaOrder;
use crate::quadrature::{QuadratureGrid, QuadratureRule};

/// Default number of evaluation points per axis when `points` is absent.
pub const DEFAULT_POINTS_PER_AXIS: usize = 5;
pub const DEFAULT_FUZZ_SAMPLES: usize = 10_000;
const MAX_GRID_NODES: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Divergence,
    Metric,
    MetricFdCheck,
    Bound,
    Reductions,
    Fuzz,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Divergence => "divergence",
            Task::Metric => "metric",
            Task::MetricFdCheck => "metric_fd_check",
            Task::Bound => "bound",
            Task::Reductions => "reductions",
            Task::Fuzz => "fuzz",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub rule: QuadratureRule,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum EstimatorSpec {
    Builtin,
    Table { values: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdSteps {
    #[serde(default = "default_metric_step")]
    pub metric: f64,
    #[serde(default = "default_christoffel_step")]
    pub christoffel: f64,
}

fn default_metric_step() -> f64 {
    METRIC_STEP
}

fn default_christoffel_step() -> f64 {
    CHRISTOFFEL_STEP
}

impl Default for FdSteps {
    fn default() -> Self {
        FdSteps {
            metric: METRIC_STEP,
            christoffel: CHRISTOFFEL_STEP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuzzSpec {
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: String,
}

/// The experiment file, exactly as written on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: FamilySpec,
    pub prior: PriorSpec,
    pub alphas: Vec<f64>,
    pub grid: GridSpec,
    #[serde(default = "default_estimator")]
    pub estimator: EstimatorSpec,
    #[serde(default)]
    pub fd: FdSteps,
    pub tasks: Vec<Task>,
    /// Evaluation points for the pointwise tasks; a cell-centred grid when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fuzz: Option<FuzzSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
    #[serde(default)]
    pub seed: u64,
}

fn default_estimator() -> EstimatorSpec {
    EstimatorSpec::Builtin
}

impl ExperimentConfig {
    /// Parses a JSON document. Errors carry the field path.
    pub fn from_json(text: &str) -> Result<Self, Error> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(if path == "." { String::new() } else { path }, e.into_inner().to_string())
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the compact serialization, hex encoded.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

/// A config with every derived object built and checked.
#[derive(Debug, Clone)]
pub struct ValidatedConfig {
    pub config: ExperimentConfig,
    pub model: BayesianModel,
    pub estimator: EstimatorTable,
    pub grid: QuadratureGrid,
    pub alphas: Vec<AlphaOrder>,
    pub points: Vec<ThetaPoint>,
    pub digest: String,
}

impl ValidatedConfig {
    pub fn fuzz_samples(&self) -> usize {
        self.config
            .fuzz
            .as_ref()
            .map_or(DEFAULT_FUZZ_SAMPLES, |f| f.samples)
    }
}

/// Reads and validates a config file, returning every problem found.
pub fn validate_config(path: &Path) -> Result<ValidatedConfig, Vec<Error>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| vec![Error::config("", format!("cannot read {}: {e}", path.display()))])?;
    let cfg = ExperimentConfig::from_json(&text).map_err(|e| vec![e])?;
    validate(cfg)
}

/// Semantic validation of a parsed config.
pub fn validate(cfg: ExperimentConfig) -> Result<ValidatedConfig, Vec<Error>> {
    let mut errs = Vec::new();

    let mut alphas = Vec::new();
    if cfg.alphas.is_empty() {
        errs.push(Error::config("alphas", "at least one order is required"));
    }
    for (i, &a) in cfg.alphas.iter().enumerate() {
        match AlphaOrder::new(a) {
            Ok(a) if a.value().is_finite() => alphas.push(a),
            _ => errs.push(Error::config(format!("alphas[{i}]"), format!("order must be a finite number > 0, got {a}"))),
        }
    }

    if cfg.tasks.is_empty() {
        errs.push(Error::config("tasks", "task list is empty"));
    }
    for (i, t) in cfg.tasks.iter().enumerate() {
        if cfg.tasks[..i].contains(t) {
            errs.push(Error::config(format!("tasks[{i}]"), format!("`{}` is listed twice", t.name())));
        }
    }

    for (name, v) in [("fd.metric", cfg.fd.metric), ("fd.christoffel", cfg.fd.christoffel)] {
        if !(v > 0.0 && v < 0.1) {
            errs.push(Error::config(name, format!("step must lie in (0, 0.1), got {v}")));
        }
    }
    if let Some(f) = &cfg.fuzz {
        if f.samples == 0 {
            errs.push(Error::config("fuzz.samples", "must be positive"));
        }
    }

    let model = build_model(&cfg).map_err(|e| errs.push(e)).ok();

    let grid = model.as_ref().and_then(|m| {
        let k = m.family().k();
        if cfg.grid.n.checked_pow(k as u32).is_none_or(|t| t > MAX_GRID_NODES) {
            errs.push(Error::config("grid.n", format!("{}^{k} nodes is too many", cfg.grid.n)));
            return None;
        }
        QuadratureGrid::new(cfg.grid.rule, cfg.grid.n, m.domain())
            .map_err(|e| errs.push(Error::config("grid.n", strip(&e))))
            .ok()
    });

    let estimator = model.as_ref().and_then(|m| {
        let est = match &cfg.estimator {
            EstimatorSpec::Builtin => EstimatorTable::builtin(&cfg.family),
            EstimatorSpec::Table { values } => EstimatorTable::new(values.clone())
                .map_err(|e| Error::config("estimator.values", strip(&e))),
        };
        match est {
            Ok(e) if e.k() != m.family().k() || e.d() != m.family().d() => {
                errs.push(Error::config(
                    "estimator.values",
                    format!(
                        "table is {}x{}, family needs {}x{}",
                        e.k(),
                        e.d(),
                        m.family().k(),
                        m.family().d()
                    ),
                ));
                None
            }
            Ok(e) => Some(e),
            Err(e) => {
                errs.push(e);
                None
            }
        }
    });

    let points = model.as_ref().and_then(|m| build_points(&cfg, m).map_err(|e| errs.push(e)).ok());

    if !errs.is_empty() {
        return Err(errs);
    }
    let digest = cfg.digest();
    Ok(ValidatedConfig {
        model: model.expect("checked"),
        estimator: estimator.expect("checked"),
        grid: grid.expect("checked"),
        points: points.expect("checked"),
        alphas,
        digest,
        config: cfg,
    })
}

fn strip(e: &Error) -> String {
    match e {
        Error::Domain(s) | Error::Prior(s) | Error::Io(s) => s.clone(),
        Error::Config { reason, .. } => reason.clone(),
        other => other.to_string(),
    }
}

fn build_model(cfg: &ExperimentConfig) -> Result<BayesianModel, Error> {
    let prior = prior_from_spec(&cfg.prior).map_err(|e| match e {
        Error::Config { .. } => e,
        other => Error::config("prior", strip(&other)),
    })?;
    let family = family_from_spec(&cfg.family, prior.domain().clone()).map_err(|e| match e {
        Error::Config { .. } => e,
        other => Error::config("family", strip(&other)),
    })?;
    let domain_path = match cfg.prior {
        PriorSpec::Tabulated { .. } => "prior.knots",
        _ => "prior.domain",
    };
    family.check_box_safe(SCORE_STEP).map_err(|e| {
        Error::config(
            domain_path,
            format!("boundary not interior-safe: {}", strip(&e)),
        )
    })?;
    let model = BayesianModel::new(family, prior).map_err(|e| Error::config("prior", strip(&e)))?;
    let report = validate_model(&model);
    if let Some(c) = report.failures().next() {
        return Err(Error::config(
            "family",
            format!(
                "model check `{}` failed: {}",
                c.name,
                c.detail.clone().unwrap_or_else(|| format!("residual {:e}", c.worst_residual))
            ),
        ));
    }
    Ok(model)
}

/// Margin the pointwise tasks need around each evaluation point.
fn point_margin(cfg: &ExperimentConfig) -> f64 {
    if cfg.tasks.contains(&Task::MetricFdCheck) {
        (2.0 * cfg.fd.metric).max(3.0 * cfg.fd.christoffel)
    } else {
        0.0
    }
}

fn build_points(cfg: &ExperimentConfig, m: &BayesianModel) -> Result<Vec<ThetaPoint>, Error> {
    let dom = m.domain();
    let margin = point_margin(cfg);
    let mut step = cfg.fd.metric.max(cfg.fd.christoffel);
    if margin == 0.0 {
        step = 0.0;
    }
    match &cfg.points {
        Some(list) => {
            if list.is_empty() {
                return Err(Error::config("points", "point list is empty"));
            }
            list.iter()
                .enumerate()
                .map(|(i, c)| {
                    let t = ThetaPoint::new(c.clone());
                    let path = format!("points[{i}]");
                    if t.dim() != dom.dim() {
                        return Err(Error::config(path, format!("expected {} coordinates", dom.dim())));
                    }
                    if !(dom.margin(t.coords()) >= margin) || !dom.contains(t.coords()) {
                        return Err(Error::config(
                            path,
                            format!("point must lie at least {margin:e} inside the box"),
                        ));
                    }
                    if !m.prior().is_smooth_at(&t, 3.0 * step) {
                        return Err(Error::config(path, "point is too close to a prior knot"));
                    }
                    Ok(t)
                })
                .collect()
        }
        None => {
            let pts: Vec<ThetaPoint> = dom
                .interior_grid(DEFAULT_POINTS_PER_AXIS)
                .into_iter()
                .filter(|t| dom.margin(t.coords()) >= margin && m.prior().is_smooth_at(t, 3.0 * step))
                .collect();
            if pts.is_empty() {
                return Err(Error::config("points", "no default point fits inside the box; give points explicitly"));
            }
            Ok(pts)
        }
    }
}
