//! Campaign orchestration: experiment configs, seeded batch execution,
//! aggregation into summary rows, and the figure/table reproduction presets.
//!
//! A campaign is a grid of (experiment point × algorithm × repetition) runs.
//! Every run's seed is derived from the campaign seed and the run's own
//! coordinates, so re-running any subset of the grid reproduces exactly the
//! same records. Aggregation never mixes conclusive and budget-truncated
//! runs: means cover conclusive runs only, truncations are counted.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::algorithms::{
    run_algorithm, Algorithm, PhaseSchedule, RunParams, RunRecord, TraceMode, DEFAULT_BUDGET,
    DEFAULT_LAMBDA, DEFAULT_LAMBDA_STATIC,
};
use crate::error::{Error, Result};
use crate::model::{
    build_real_instance, setting_one_with_angle, setting_two, FeatureOutcomeTable, Instance,
    InstanceSpec, RngSeed,
};

/// Environment variable limiting the number of worker threads for a batch.
pub const WORKERS_ENV: &str = "LINGAPE_WORKERS";

/// Dimension of the canonical gap-sweep family (five basis arms).
pub const GAP_SWEEP_DIM: usize = 5;

/// Ridge regularisation of the least-squares fit that turns a
/// feature/outcome table into an instance parameter.
pub const REAL_FIT_LAMBDA: f64 = 0.01;

/// Which instance family a campaign sweeps over.
#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    /// Basis arms plus one interloper at `angle`, swept over dimension.
    SettingOneSweep { dims: Vec<usize>, angle: f64 },
    /// Canonical `K = d = 5` bandit reduction, swept over the gap Δ.
    SettingTwoSweep { gaps: Vec<f64> },
    /// Instances sampled from a feature/outcome table, swept over arm count.
    RealDataSweep { arm_counts: Vec<usize>, data: PathBuf, min_gap: f64 },
    /// A single instance loaded from a JSON description.
    Custom { instance: PathBuf },
}

impl Experiment {
    fn kind(&self) -> &'static str {
        match self {
            Experiment::SettingOneSweep { .. } => "setting_one_sweep",
            Experiment::SettingTwoSweep { .. } => "setting_two_sweep",
            Experiment::RealDataSweep { .. } => "real_data_sweep",
            Experiment::Custom { .. } => "custom",
        }
    }
}

/// One sweep coordinate of a campaign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Dim(usize),
    Gap(f64),
    Arms(usize),
    Custom,
}

impl Point {
    /// Stable integer tag used in seed derivation — a function of the point's
    /// value, not its position, so sub-sweeps reproduce the full sweep's
    /// seeds.
    fn tag(self) -> u64 {
        match self {
            Point::Dim(d) => d as u64,
            Point::Gap(g) => g.to_bits(),
            Point::Arms(k) => k as u64,
            Point::Custom => 0,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Dim(d) => write!(f, "{d}"),
            Point::Gap(g) => write!(f, "{g}"),
            Point::Arms(k) => write!(f, "{k}"),
            Point::Custom => f.write_str("custom"),
        }
    }
}

/// A full campaign description.
///
/// Every algorithm is valid for every experiment here: even the data-derived
/// instances are simulations around a fitted parameter, so the oracle's
/// ground-truth gaps always exist.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub algorithms: Vec<Algorithm>,
    pub epsilon: f64,
    pub delta: f64,
    /// Regularisation for the adaptive algorithm.
    pub lambda: f64,
    /// Regularisation for the three fixed-design baselines.
    pub lambda_static: f64,
    pub repetitions: u64,
    pub seed: RngSeed,
    pub budget: u64,
    pub trace_sampling: TraceMode,
}

impl ExperimentConfig {
    /// A config with the standard protocol parameters (ε = 0, δ = 0.05,
    /// λ = 1, λ_static = 0.01, 10 repetitions, every algorithm, no tracing).
    pub fn with_defaults(experiment: Experiment) -> Self {
        Self {
            experiment,
            algorithms: Algorithm::all().to_vec(),
            epsilon: 0.0,
            delta: 0.05,
            lambda: DEFAULT_LAMBDA,
            lambda_static: DEFAULT_LAMBDA_STATIC,
            repetitions: 10,
            seed: RngSeed(0),
            budget: DEFAULT_BUDGET,
            trace_sampling: TraceMode::Off,
        }
    }

    /// Check every invariant a batch run relies on.
    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::InvalidParameter("algorithms must not be empty".into()));
        }
        for (i, a) in self.algorithms.iter().enumerate() {
            if self.algorithms[..i].contains(a) {
                return Err(Error::InvalidParameter(format!("duplicate algorithm {a}")));
            }
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidParameter("repetitions must be at least 1".into()));
        }
        if self.budget == 0 {
            return Err(Error::InvalidParameter("budget must be at least 1".into()));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be a finite non-negative number, got {}",
                self.epsilon
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        for (name, v) in [("lambda", self.lambda), ("lambda_static", self.lambda_static)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        match &self.experiment {
            Experiment::SettingOneSweep { dims, angle } => {
                if dims.is_empty() {
                    return Err(Error::InvalidParameter("points must not be empty".into()));
                }
                if dims.iter().any(|&d| d < 2) {
                    return Err(Error::InvalidParameter("dimensions must be at least 2".into()));
                }
                if !(*angle > 0.0 && *angle < std::f64::consts::FRAC_PI_2) {
                    return Err(Error::InvalidParameter(format!(
                        "angle must lie strictly inside (0, π/2), got {angle}"
                    )));
                }
            }
            Experiment::SettingTwoSweep { gaps } => {
                if gaps.is_empty() {
                    return Err(Error::InvalidParameter("points must not be empty".into()));
                }
                if gaps.iter().any(|&g| !(g > 0.0) || !g.is_finite()) {
                    return Err(Error::InvalidParameter("gaps must be positive and finite".into()));
                }
            }
            Experiment::RealDataSweep { arm_counts, min_gap, .. } => {
                if arm_counts.is_empty() {
                    return Err(Error::InvalidParameter("points must not be empty".into()));
                }
                if arm_counts.iter().any(|&k| k < 2) {
                    return Err(Error::InvalidParameter("arm counts must be at least 2".into()));
                }
                if !(*min_gap >= 0.0) || !min_gap.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "min_gap must be a finite non-negative number, got {min_gap}"
                    )));
                }
            }
            Experiment::Custom { .. } => {}
        }
        Ok(())
    }

    /// The sweep coordinates in declaration order.
    pub fn points(&self) -> Vec<Point> {
        match &self.experiment {
            Experiment::SettingOneSweep { dims, .. } => {
                dims.iter().map(|&d| Point::Dim(d)).collect()
            }
            Experiment::SettingTwoSweep { gaps } => gaps.iter().map(|&g| Point::Gap(g)).collect(),
            Experiment::RealDataSweep { arm_counts, .. } => {
                arm_counts.iter().map(|&k| Point::Arms(k)).collect()
            }
            Experiment::Custom { .. } => vec![Point::Custom],
        }
    }

    /// Echo of the config as JSON (used by run manifests).
    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = json!({
            "experiment": self.experiment.kind(),
            "algorithms": self.algorithms.iter().map(|a| a.name()).collect::<Vec<_>>(),
            "epsilon": self.epsilon,
            "delta": self.delta,
            "lambda": self.lambda,
            "lambda_static": self.lambda_static,
            "repetitions": self.repetitions,
            "seed": self.seed.0,
            "budget": self.budget,
            "trace_sampling": trace_mode_string(self.trace_sampling),
        });
        let extra = match &self.experiment {
            Experiment::SettingOneSweep { dims, angle } => json!({
                "points": dims,
                "angle": angle,
            }),
            Experiment::SettingTwoSweep { gaps } => json!({ "points": gaps }),
            Experiment::RealDataSweep { arm_counts, data, min_gap } => json!({
                "points": arm_counts,
                "data": data.display().to_string(),
                "min_gap": min_gap,
            }),
            Experiment::Custom { instance } => json!({
                "instance": instance.display().to_string(),
            }),
        };
        for (k, v) in extra.as_object().unwrap() {
            obj.as_object_mut().unwrap().insert(k.clone(), v.clone());
        }
        obj
    }
}

fn trace_mode_string(mode: TraceMode) -> String {
    match mode {
        TraceMode::Off => "off".to_string(),
        TraceMode::Every(n) => format!("every:{n}"),
    }
}

fn parse_trace_mode(s: &str) -> Result<TraceMode> {
    if s == "off" {
        return Ok(TraceMode::Off);
    }
    if let Some(n) = s.strip_prefix("every:") {
        let n: u64 = n.parse().map_err(|_| {
            Error::InvalidParameter(format!("trace_sampling stride '{n}' is not a positive integer"))
        })?;
        if n == 0 {
            return Err(Error::InvalidParameter("trace_sampling stride must be at least 1".into()));
        }
        return Ok(TraceMode::Every(n));
    }
    Err(Error::InvalidParameter(format!(
        "trace_sampling must be 'off' or 'every:N', got '{s}'"
    )))
}

const VALID_KEYS: &[&str] = &[
    "experiment",
    "points",
    "angle",
    "data",
    "min_gap",
    "instance",
    "algorithms",
    "epsilon",
    "delta",
    "lambda",
    "lambda_static",
    "repetitions",
    "seed",
    "budget",
    "trace_sampling",
];

fn split_list(value: &str) -> Vec<&str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn parse_usize_list(value: &str, key: &str) -> Result<Vec<usize>> {
    split_list(value)
        .into_iter()
        .map(|s| {
            s.parse::<usize>().map_err(|_| {
                Error::InvalidParameter(format!("{key} entry '{s}' is not an unsigned integer"))
            })
        })
        .collect()
}

fn parse_f64_list(value: &str, key: &str) -> Result<Vec<f64>> {
    split_list(value)
        .into_iter()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("{key} entry '{s}' is not a number")))
        })
        .collect()
}

fn parse_scalar<T: FromStr>(value: &str, key: &str, what: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| Error::InvalidParameter(format!("{key} value '{value}' is not {what}")))
}

/// Parse the flat `key = value` campaign-config format.
///
/// Lines are `key = value`; `#` starts a comment; blank lines are skipped.
/// Unknown and duplicate keys are errors, as are keys that do not apply to
/// the chosen experiment (e.g. `angle` outside `setting_one_sweep`). See the
/// project README for the full schema and defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::InvalidParameter(format!(
                "config line {}: expected 'key = value', got '{line}'",
                lineno + 1
            )));
        };
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim().to_string();
        if !VALID_KEYS.contains(&key.as_str()) {
            return Err(Error::InvalidParameter(format!(
                "unknown config key '{key}' (valid keys: {})",
                VALID_KEYS.join(", ")
            )));
        }
        if pairs.iter().any(|(k, _)| *k == key) {
            return Err(Error::InvalidParameter(format!("duplicate config key '{key}'")));
        }
        pairs.push((key, value));
    }
    let get = |key: &str| pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());

    let kind = get("experiment").ok_or_else(|| {
        Error::InvalidParameter("config is missing the required 'experiment' key".into())
    })?;
    let require = |key: &str| {
        get(key).ok_or_else(|| {
            Error::InvalidParameter(format!("experiment '{kind}' requires the '{key}' key"))
        })
    };
    let forbid = |key: &str| -> Result<()> {
        if get(key).is_some() {
            return Err(Error::InvalidParameter(format!(
                "key '{key}' does not apply to experiment '{kind}'"
            )));
        }
        Ok(())
    };

    let experiment = match kind {
        "setting_one_sweep" => {
            forbid("data")?;
            forbid("min_gap")?;
            forbid("instance")?;
            Experiment::SettingOneSweep {
                dims: parse_usize_list(require("points")?, "points")?,
                angle: match get("angle") {
                    Some(v) => parse_scalar(v, "angle", "a number")?,
                    None => 0.01,
                },
            }
        }
        "setting_two_sweep" => {
            forbid("angle")?;
            forbid("data")?;
            forbid("min_gap")?;
            forbid("instance")?;
            Experiment::SettingTwoSweep { gaps: parse_f64_list(require("points")?, "points")? }
        }
        "real_data_sweep" => {
            forbid("angle")?;
            forbid("instance")?;
            Experiment::RealDataSweep {
                arm_counts: parse_usize_list(require("points")?, "points")?,
                data: PathBuf::from(require("data")?),
                min_gap: match get("min_gap") {
                    Some(v) => parse_scalar(v, "min_gap", "a number")?,
                    None => 0.0,
                },
            }
        }
        "custom" => {
            forbid("points")?;
            forbid("angle")?;
            forbid("data")?;
            forbid("min_gap")?;
            Experiment::Custom { instance: PathBuf::from(require("instance")?) }
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown experiment '{other}' (expected setting_one_sweep, setting_two_sweep, \
                 real_data_sweep, or custom)"
            )))
        }
    };

    let mut config = ExperimentConfig::with_defaults(experiment);
    if let Some(v) = get("algorithms") {
        config.algorithms = split_list(v)
            .into_iter()
            .map(Algorithm::from_str)
            .collect::<Result<Vec<_>>>()?;
    }
    if let Some(v) = get("epsilon") {
        config.epsilon = parse_scalar(v, "epsilon", "a number")?;
    }
    if let Some(v) = get("delta") {
        config.delta = parse_scalar(v, "delta", "a number")?;
    }
    if let Some(v) = get("lambda") {
        config.lambda = parse_scalar(v, "lambda", "a number")?;
    }
    if let Some(v) = get("lambda_static") {
        config.lambda_static = parse_scalar(v, "lambda_static", "a number")?;
    }
    if let Some(v) = get("repetitions") {
        config.repetitions = parse_scalar(v, "repetitions", "an unsigned integer")?;
    }
    if let Some(v) = get("seed") {
        config.seed = RngSeed(parse_scalar(v, "seed", "an unsigned integer")?);
    }
    if let Some(v) = get("budget") {
        config.budget = parse_scalar(v, "budget", "an unsigned integer")?;
    }
    if let Some(v) = get("trace_sampling") {
        config.trace_sampling = parse_trace_mode(v)?;
    }
    config.validate()?;
    Ok(config)
}

/// [`parse_config`] over a file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::InvalidParameter(format!("cannot read config {}: {e}", path.display()))
    })?;
    parse_config(&text)
}

/// A run record annotated with its sweep coordinate.
#[derive(Debug, Clone, Serialize)]
pub struct PointRecord {
    /// Sweep coordinate, as its display string ("5", "0.5", "custom", …).
    pub point: String,
    /// Repetition index within the (point, algorithm) cell.
    pub repetition: u64,
    #[serde(flatten)]
    pub record: RunRecord,
}

/// Stable per-algorithm id used in seed derivation (independent of the
/// position of the algorithm in the config's list).
fn algorithm_id(algorithm: Algorithm) -> u64 {
    match algorithm {
        Algorithm::LingapeGreedy => 0,
        Algorithm::LingapeRatio => 1,
        Algorithm::XyStatic => 2,
        Algorithm::XyAdaptive => 3,
        Algorithm::XyOracle => 4,
    }
}

fn parse_workers(raw: Option<&str>) -> Result<Option<usize>> {
    let Some(raw) = raw else { return Ok(None) };
    let n: usize = raw.trim().parse().map_err(|_| {
        Error::InvalidParameter(format!("{WORKERS_ENV} must be a positive integer, got '{raw}'"))
    })?;
    if n == 0 {
        return Err(Error::InvalidParameter(format!("{WORKERS_ENV} must be at least 1")));
    }
    Ok(Some(n))
}

fn build_instances(config: &ExperimentConfig) -> Result<Vec<(Point, Instance)>> {
    let context = |point: Point, e: Error| {
        Error::Construction(format!("experiment point {point}: {e}"))
    };
    match &config.experiment {
        Experiment::SettingOneSweep { dims, angle } => dims
            .iter()
            .map(|&d| {
                setting_one_with_angle(d, *angle)
                    .map(|inst| (Point::Dim(d), inst))
                    .map_err(|e| context(Point::Dim(d), e))
            })
            .collect(),
        Experiment::SettingTwoSweep { gaps } => gaps
            .iter()
            .map(|&g| {
                setting_two(GAP_SWEEP_DIM, g)
                    .map(|inst| (Point::Gap(g), inst))
                    .map_err(|e| context(Point::Gap(g), e))
            })
            .collect(),
        Experiment::RealDataSweep { arm_counts, data, min_gap } => {
            let table = FeatureOutcomeTable::load(data)?;
            arm_counts
                .iter()
                .map(|&k| {
                    let mut rng = config.seed.child(Point::Arms(k).tag()).child(u64::MAX).stream();
                    build_real_instance(&table, k, REAL_FIT_LAMBDA, *min_gap, &mut rng)
                        .map(|inst| (Point::Arms(k), inst))
                        .map_err(|e| context(Point::Arms(k), e))
                })
                .collect()
        }
        Experiment::Custom { instance } => {
            let inst = InstanceSpec::load(instance)?
                .build()
                .map_err(|e| context(Point::Custom, e))?;
            Ok(vec![(Point::Custom, inst)])
        }
    }
}

/// Run the whole campaign grid and return one record per run, in grid order
/// (points × algorithms × repetitions).
///
/// Each run's seed is `child(child(child(campaign, point), algorithm), rep)`,
/// a pure function of the run's coordinates, so any sub-grid of a campaign
/// reproduces the full campaign's records bit-for-bit. Runs execute in
/// parallel; set `LINGAPE_WORKERS` to cap the worker count.
pub fn run_batch(config: &ExperimentConfig) -> Result<Vec<PointRecord>> {
    config.validate()?;
    let instances = build_instances(config)?;
    let mut jobs = Vec::new();
    for (point, instance) in &instances {
        for &algorithm in &config.algorithms {
            let lambda = match algorithm {
                Algorithm::LingapeGreedy | Algorithm::LingapeRatio => config.lambda,
                _ => config.lambda_static,
            };
            let params = RunParams {
                epsilon: config.epsilon,
                delta: config.delta,
                lambda,
                budget: config.budget,
                trace: config.trace_sampling,
            };
            for rep in 0..config.repetitions {
                let seed = config.seed.child(point.tag()).child(algorithm_id(algorithm)).child(rep);
                jobs.push((*point, instance, algorithm, params, rep, seed));
            }
        }
    }

    let schedule = PhaseSchedule::default();
    let execute = || {
        jobs.par_iter()
            .map(|&(point, instance, algorithm, params, rep, seed)| {
                run_algorithm(algorithm, instance, &params, &schedule, seed)
                    .map(|record| PointRecord { point: point.to_string(), repetition: rep, record })
                    .map_err(|e| {
                        Error::Construction(format!(
                            "run {algorithm} at point {point}, repetition {rep}: {e}"
                        ))
                    })
            })
            .collect::<Result<Vec<_>>>()
    };
    match parse_workers(std::env::var(WORKERS_ENV).ok().as_deref())? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("cannot build worker pool: {e}")))?
            .install(execute),
        None => execute(),
    }
}

/// Aggregated statistics for one (point, algorithm) cell.
///
/// Means and extrema cover conclusive runs only; budget-truncated runs are
/// never averaged in, only counted. When every run was truncated the
/// aggregates are absent. The error rate is the fraction of *all* runs whose
/// returned arm was not ε-correct.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub point: String,
    pub algorithm: Algorithm,
    pub mean_tau: Option<f64>,
    pub min_tau: Option<u64>,
    pub max_tau: Option<u64>,
    pub error_rate: f64,
    /// Mean pull count per arm over conclusive runs (empty if none).
    pub mean_counts: Vec<f64>,
    /// Number of budget-truncated runs in the cell.
    pub inconclusive: u64,
}

/// Group records by (point, algorithm) in first-appearance order and reduce
/// each cell to a [`SummaryRow`].
pub fn summarize(records: &[PointRecord]) -> Vec<SummaryRow> {
    let mut groups: Vec<((String, Algorithm), Vec<&PointRecord>)> = Vec::new();
    for pr in records {
        let key = (pr.point.clone(), pr.record.algorithm);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(pr),
            None => groups.push((key, vec![pr])),
        }
    }
    groups
        .into_iter()
        .map(|((point, algorithm), members)| {
            let total = members.len() as f64;
            let wrong = members.iter().filter(|pr| !pr.record.correct).count() as f64;
            let conclusive: Vec<&&PointRecord> =
                members.iter().filter(|pr| !pr.record.inconclusive).collect();
            let inconclusive = (members.len() - conclusive.len()) as u64;
            let (mean_tau, min_tau, max_tau, mean_counts) = if conclusive.is_empty() {
                (None, None, None, Vec::new())
            } else {
                let n = conclusive.len() as f64;
                let mean = conclusive.iter().map(|pr| pr.record.tau as f64).sum::<f64>() / n;
                let min = conclusive.iter().map(|pr| pr.record.tau).min().unwrap();
                let max = conclusive.iter().map(|pr| pr.record.tau).max().unwrap();
                let arms = conclusive[0].record.counts.len();
                let mut counts = vec![0.0; arms];
                for pr in &conclusive {
                    for (acc, &c) in counts.iter_mut().zip(&pr.record.counts) {
                        *acc += c as f64;
                    }
                }
                for c in &mut counts {
                    *c /= n;
                }
                (Some(mean), Some(min), Some(max), counts)
            };
            SummaryRow {
                point,
                algorithm,
                mean_tau,
                min_tau,
                max_tau,
                error_rate: wrong / total,
                mean_counts,
                inconclusive,
            }
        })
        .collect()
}

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn fmt_opt_u64(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Render summary rows as the standard figure CSV
/// (`point,algorithm,mean_tau,min_tau,max_tau,error_rate,inconclusive`).
///
/// Formatting is byte-stable: floats print in Rust's shortest round-trip
/// form, rows keep their input order.
pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("point,algorithm,mean_tau,min_tau,max_tau,error_rate,inconclusive\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.point,
            row.algorithm,
            fmt_opt_f64(row.mean_tau),
            fmt_opt_u64(row.min_tau),
            fmt_opt_u64(row.max_tau),
            row.error_rate,
            row.inconclusive
        ));
    }
    out
}

/// Render per-arm mean pull counts as a CSV with one column per algorithm
/// (`arm,<algorithm>,…`; arms numbered from 1).
///
/// All rows must describe the same experiment point and arm count.
pub fn counts_csv(rows: &[SummaryRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter("no summary rows to tabulate".into()));
    }
    let arms = rows[0].mean_counts.len();
    if arms == 0 {
        return Err(Error::InvalidParameter(
            "cannot tabulate counts: every run was inconclusive".into(),
        ));
    }
    for row in rows {
        if row.point != rows[0].point || row.mean_counts.len() != arms {
            return Err(Error::InvalidParameter(
                "count tables need rows from a single experiment point".into(),
            ));
        }
    }
    let mut out = String::from("arm");
    for row in rows {
        out.push(',');
        out.push_str(row.algorithm.name());
    }
    out.push('\n');
    for arm in 0..arms {
        out.push_str(&(arm + 1).to_string());
        for row in rows {
            out.push(',');
            out.push_str(&row.mean_counts[arm].to_string());
        }
        out.push('\n');
    }
    Ok(out)
}

/// Build the reproducibility manifest for a batch: software version, config
/// echo, and the derived seed of every run in grid order.
pub fn manifest_json(
    config: &ExperimentConfig,
    preset: Option<&str>,
    scale: Option<&str>,
) -> serde_json::Value {
    let mut runs = Vec::new();
    for point in config.points() {
        for &algorithm in &config.algorithms {
            for rep in 0..config.repetitions {
                let seed = config.seed.child(point.tag()).child(algorithm_id(algorithm)).child(rep);
                runs.push(json!({
                    "point": point.to_string(),
                    "algorithm": algorithm.name(),
                    "repetition": rep,
                    "seed": seed.0,
                }));
            }
        }
    }
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "preset": preset,
        "scale": scale,
        "config": config.to_json(),
        "runs": runs,
    })
}

/// The four reproduction presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigurePreset {
    Fig1,
    Fig2,
    Fig3,
    Table1,
}

impl FigurePreset {
    pub fn name(self) -> &'static str {
        match self {
            FigurePreset::Fig1 => "fig1",
            FigurePreset::Fig2 => "fig2",
            FigurePreset::Fig3 => "fig3",
            FigurePreset::Table1 => "table1",
        }
    }
}

impl fmt::Display for FigurePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigurePreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(FigurePreset::Fig1),
            "fig2" => Ok(FigurePreset::Fig2),
            "fig3" => Ok(FigurePreset::Fig3),
            "table1" => Ok(FigurePreset::Table1),
            other => Err(Error::InvalidParameter(format!(
                "unknown preset '{other}' (expected fig1, fig2, fig3, or table1)"
            ))),
        }
    }
}

/// Campaign scale: `Ci` is a scaled-down sweep that finishes in seconds to a
/// couple of minutes; `Full` is the original protocol (tens of millions of
/// pulls — opt in deliberately).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Ci,
    Full,
}

impl Scale {
    pub fn name(self) -> &'static str {
        match self {
            Scale::Ci => "ci",
            Scale::Full => "full",
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ci" => Ok(Scale::Ci),
            "full" => Ok(Scale::Full),
            other => {
                Err(Error::InvalidParameter(format!("unknown scale '{other}' (expected ci or full)")))
            }
        }
    }
}

/// Options for [`reproduce`].
#[derive(Debug, Clone)]
pub struct ReproduceOptions {
    pub scale: Scale,
    pub out_dir: PathBuf,
    /// Feature/outcome table for `fig3` (unused by the other presets).
    pub data: Option<PathBuf>,
}

/// The canonical campaign behind each preset at each scale.
pub fn preset_config(
    figure: FigurePreset,
    scale: Scale,
    data: Option<&Path>,
) -> Result<ExperimentConfig> {
    let seed = RngSeed(2017);
    let config = match (figure, scale) {
        (FigurePreset::Fig1, Scale::Ci) => ExperimentConfig {
            repetitions: 3,
            budget: 1_000_000,
            seed,
            ..ExperimentConfig::with_defaults(Experiment::SettingOneSweep {
                dims: vec![2, 3, 5],
                angle: 0.1,
            })
        },
        (FigurePreset::Fig1, Scale::Full) => ExperimentConfig {
            seed,
            ..ExperimentConfig::with_defaults(Experiment::SettingOneSweep {
                dims: vec![2, 3, 5, 8, 10],
                angle: 0.01,
            })
        },
        (FigurePreset::Fig2, Scale::Ci) => ExperimentConfig {
            repetitions: 3,
            budget: 1_000_000,
            seed,
            ..ExperimentConfig::with_defaults(Experiment::SettingTwoSweep {
                gaps: vec![2.0, 1.0, 0.5],
            })
        },
        (FigurePreset::Fig2, Scale::Full) => ExperimentConfig {
            seed,
            ..ExperimentConfig::with_defaults(Experiment::SettingTwoSweep {
                gaps: vec![1.0, 0.5, 0.25, 0.1],
            })
        },
        (FigurePreset::Fig3, _) => {
            let Some(data) = data else {
                return Err(Error::InvalidParameter(
                    "fig3 needs a feature/outcome table: pass --data <path>; generate one with \
                     `lingape surrogate-data --rows 10000 --dim 36 --out <path>` if you have no \
                     dataset"
                        .into(),
                ));
            };
            let arm_counts = match scale {
                Scale::Ci => vec![10, 20],
                Scale::Full => vec![10, 20, 30, 40],
            };
            ExperimentConfig {
                algorithms: vec![
                    Algorithm::LingapeGreedy,
                    Algorithm::LingapeRatio,
                    Algorithm::XyStatic,
                    Algorithm::XyOracle,
                ],
                epsilon: 0.2,
                repetitions: if scale == Scale::Ci { 3 } else { 10 },
                budget: if scale == Scale::Ci { 5_000_000 } else { DEFAULT_BUDGET },
                seed,
                ..ExperimentConfig::with_defaults(Experiment::RealDataSweep {
                    arm_counts,
                    data: data.to_path_buf(),
                    min_gap: 0.05,
                })
            }
        }
        (FigurePreset::Table1, _) => ExperimentConfig {
            algorithms: vec![Algorithm::LingapeGreedy, Algorithm::XyStatic, Algorithm::XyOracle],
            repetitions: if scale == Scale::Ci { 1 } else { 10 },
            seed,
            ..ExperimentConfig::with_defaults(Experiment::SettingOneSweep {
                dims: vec![5],
                angle: 0.01,
            })
        },
    };
    config.validate()?;
    Ok(config)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes)
        .map_err(|e| Error::InvalidParameter(format!("cannot write {}: {e}", path.display())))
}

/// Run a reproduction preset and write its CSV(s) and manifest into
/// `options.out_dir`. Returns the written paths.
///
/// Figures emit `<name>.csv` (the standard summary table); `table1` instead
/// emits the per-arm count table as `table1.csv` plus `table1_summary.csv`.
/// Every preset also writes `<name>_manifest.json` recording the config, the
/// software version, and each run's derived seed.
pub fn reproduce(figure: FigurePreset, options: &ReproduceOptions) -> Result<Vec<PathBuf>> {
    if figure == FigurePreset::Fig3 {
        if let Some(data) = &options.data {
            if !data.exists() {
                return Err(Error::InvalidParameter(format!(
                    "fig3 table not found at {}: generate one with `lingape surrogate-data \
                     --rows 10000 --dim 36 --out {}`",
                    data.display(),
                    data.display()
                )));
            }
        }
    }
    let config = preset_config(figure, options.scale, options.data.as_deref())?;
    let records = run_batch(&config)?;
    let rows = summarize(&records);

    std::fs::create_dir_all(&options.out_dir).map_err(|e| {
        Error::InvalidParameter(format!("cannot create {}: {e}", options.out_dir.display()))
    })?;
    let name = figure.name();
    let mut written = Vec::new();

    let main_csv = options.out_dir.join(format!("{name}.csv"));
    if figure == FigurePreset::Table1 {
        write_file(&main_csv, counts_csv(&rows)?.as_bytes())?;
        written.push(main_csv);
        let summary = options.out_dir.join("table1_summary.csv");
        write_file(&summary, summary_csv(&rows).as_bytes())?;
        written.push(summary);
    } else {
        write_file(&main_csv, summary_csv(&rows).as_bytes())?;
        written.push(main_csv);
    }

    let manifest = manifest_json(&config, Some(name), Some(options.scale.name()));
    let manifest_path = options.out_dir.join(format!("{name}_manifest.json"));
    let mut text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::InvalidParameter(format!("cannot encode manifest: {e}")))?;
    text.push('\n');
    write_file(&manifest_path, text.as_bytes())?;
    written.push(manifest_path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL_CONFIG: &str = "\
# smallest possible campaign
experiment = setting_two_sweep
points = 2.0
algorithms = lingape_greedy
repetitions = 1
seed = 11
budget = 10000
";

    #[test]
    fn config_parsing_round_trips_every_field() {
        let text = "\
experiment = setting_two_sweep
points = 2.0, 1.0, 0.5
algorithms = lingape_greedy, xy_static
epsilon = 0.1
delta = 0.2
lambda = 2.0
lambda_static = 0.5
repetitions = 4
seed = 99
budget = 5000
trace_sampling = every:10
";
        let config = parse_config(text).unwrap();
        assert_eq!(
            config.experiment,
            Experiment::SettingTwoSweep { gaps: vec![2.0, 1.0, 0.5] }
        );
        assert_eq!(config.algorithms, vec![Algorithm::LingapeGreedy, Algorithm::XyStatic]);
        assert_eq!(config.epsilon, 0.1);
        assert_eq!(config.delta, 0.2);
        assert_eq!(config.lambda, 2.0);
        assert_eq!(config.lambda_static, 0.5);
        assert_eq!(config.repetitions, 4);
        assert_eq!(config.seed, RngSeed(99));
        assert_eq!(config.budget, 5000);
        assert_eq!(config.trace_sampling, TraceMode::Every(10));

        // Defaults fill everything else in.
        let config = parse_config(SMALL_CONFIG).unwrap();
        assert_eq!(config.epsilon, 0.0);
        assert_eq!(config.delta, 0.05);
        assert_eq!(config.lambda, DEFAULT_LAMBDA);
        assert_eq!(config.lambda_static, DEFAULT_LAMBDA_STATIC);
        assert_eq!(config.trace_sampling, TraceMode::Off);
    }

    #[test]
    fn config_parsing_rejects_bad_input() {
        let unknown = parse_config("experiment = setting_two_sweep\npoints = 1.0\nfrobnicate = 3\n");
        assert!(unknown.unwrap_err().to_string().contains("frobnicate"));

        let duplicate =
            parse_config("experiment = setting_two_sweep\npoints = 1.0\npoints = 2.0\n");
        assert!(duplicate.unwrap_err().to_string().contains("duplicate"));

        assert!(parse_config("points = 1.0\n").unwrap_err().to_string().contains("experiment"));

        let misplaced =
            parse_config("experiment = setting_two_sweep\npoints = 1.0\nangle = 0.1\n");
        assert!(misplaced.unwrap_err().to_string().contains("angle"));

        let bad_alg = parse_config(
            "experiment = setting_two_sweep\npoints = 1.0\nalgorithms = linucb\n",
        );
        assert!(bad_alg.is_err());

        let bad_delta = parse_config("experiment = setting_two_sweep\npoints = 1.0\ndelta = 1.5\n");
        assert!(bad_delta.unwrap_err().to_string().contains("delta"));

        assert!(parse_config("experiment = custom\n").unwrap_err().to_string().contains("instance"));
    }

    #[test]
    fn run_batch_produces_the_grid_deterministically() {
        let config = parse_config(SMALL_CONFIG).unwrap();
        let records = run_batch(&config).unwrap();
        assert_eq!(records.len(), 1, "1 point × 1 algorithm × 1 repetition");

        let twice = run_batch(&config).unwrap();
        assert_eq!(
            serde_json::to_string(&records).unwrap(),
            serde_json::to_string(&twice).unwrap(),
            "identical configs must give bit-identical record sets"
        );

        let mut bigger = config.clone();
        bigger.algorithms = vec![Algorithm::LingapeGreedy, Algorithm::LingapeRatio];
        bigger.repetitions = 2;
        bigger.experiment = Experiment::SettingTwoSweep { gaps: vec![2.0, 1.0] };
        let records = run_batch(&bigger).unwrap();
        assert_eq!(records.len(), 8, "2 points × 2 algorithms × 2 repetitions");
    }

    #[test]
    fn sub_grids_reproduce_the_full_grid() {
        let mut config = parse_config(SMALL_CONFIG).unwrap();
        config.algorithms = vec![Algorithm::LingapeGreedy, Algorithm::LingapeRatio];
        config.experiment = Experiment::SettingTwoSweep { gaps: vec![2.0, 1.0] };
        let full = run_batch(&config).unwrap();

        let mut subset = config.clone();
        subset.algorithms = vec![Algorithm::LingapeRatio];
        subset.experiment = Experiment::SettingTwoSweep { gaps: vec![1.0] };
        let sub = run_batch(&subset).unwrap();
        assert_eq!(sub.len(), 1);

        let matching = full
            .iter()
            .find(|pr| {
                pr.point == "1" && pr.record.algorithm == Algorithm::LingapeRatio
            })
            .expect("full grid contains the subset cell");
        assert_eq!(
            serde_json::to_string(matching).unwrap(),
            serde_json::to_string(&sub[0]).unwrap(),
            "seeds must depend on coordinates, not grid shape"
        );
    }

    fn fake_record(tau: u64, correct: bool, inconclusive: bool) -> PointRecord {
        PointRecord {
            point: "5".to_string(),
            repetition: 0,
            record: RunRecord {
                algorithm: Algorithm::LingapeGreedy,
                tau,
                returned_arm: 0,
                counts: vec![tau / 2, tau - tau / 2],
                correct,
                inconclusive,
                epsilon: 0.0,
                delta: 0.05,
                lambda: 1.0,
                seed: 0,
                oracle_access: false,
                phase_active_sizes: None,
                trace: Vec::new(),
            },
        }
    }

    #[test]
    fn summaries_partition_conclusive_and_truncated_runs() {
        // 10 runs, one incorrect: error rate 0.1.
        let mut records: Vec<PointRecord> = (0..9).map(|i| fake_record(100 + i, true, false)).collect();
        records.push(fake_record(200, false, false));
        let rows = summarize(&records);
        assert_eq!(rows.len(), 1);
        assert!((rows[0].error_rate - 0.1).abs() < 1e-15);
        assert_eq!(rows[0].inconclusive, 0);

        // A single record's row echoes the record.
        let one = summarize(&records[..1]);
        assert_eq!(one[0].mean_tau, Some(100.0));
        assert_eq!(one[0].min_tau, Some(100));
        assert_eq!(one[0].max_tau, Some(100));
        assert_eq!(one[0].mean_counts, vec![50.0, 50.0]);

        // Mixed cells never average truncated runs into τ.
        let mixed = vec![
            fake_record(100, true, false),
            fake_record(300, true, false),
            fake_record(10_000, true, true),
        ];
        let rows = summarize(&mixed);
        assert_eq!(rows[0].mean_tau, Some(200.0));
        assert_eq!(rows[0].max_tau, Some(300));
        assert_eq!(rows[0].inconclusive, 1);

        // All-truncated cells report no aggregates at all.
        let rows = summarize(&[fake_record(10_000, true, true)]);
        assert_eq!(rows[0].mean_tau, None);
        assert!(rows[0].mean_counts.is_empty());
        assert_eq!(rows[0].inconclusive, 1);

        assert!(summarize(&[]).is_empty());
    }

    #[test]
    fn csv_renderings_are_byte_stable() {
        let records = vec![
            fake_record(100, true, false),
            fake_record(301, true, false),
            fake_record(10_000, false, true),
        ];
        let rows = summarize(&records);
        assert_eq!(
            summary_csv(&rows),
            "point,algorithm,mean_tau,min_tau,max_tau,error_rate,inconclusive\n\
             5,lingape_greedy,200.5,100,301,0.3333333333333333,1\n"
        );
        let counts = counts_csv(&rows).unwrap();
        assert_eq!(counts, "arm,lingape_greedy\n1,100\n2,100.5\n");

        // Rows from different points cannot share a counts table.
        let mut other = fake_record(50, true, false);
        other.point = "7".to_string();
        let rows = summarize(&[fake_record(100, true, false), other]);
        assert!(counts_csv(&rows).is_err());
    }

    #[test]
    fn fig2_ci_reproduction_is_self_consistent() {
        let dir = tempfile::tempdir().unwrap();
        let options = ReproduceOptions {
            scale: Scale::Ci,
            out_dir: dir.path().join("a"),
            data: None,
        };
        let written = reproduce(FigurePreset::Fig2, &options).unwrap();
        assert_eq!(written.len(), 2);
        let csv_a = std::fs::read(&written[0]).unwrap();
        let manifest: serde_json::Value =
            serde_json::from_slice(&std::fs::read(&written[1]).unwrap()).unwrap();
        assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
        assert_eq!(manifest["preset"], "fig2");
        assert_eq!(manifest["scale"], "ci");
        assert_eq!(
            manifest["runs"].as_array().unwrap().len(),
            3 * Algorithm::all().len() * 3,
            "3 gaps × all algorithms × 3 repetitions"
        );

        let again = ReproduceOptions { out_dir: dir.path().join("b"), ..options };
        let rewritten = reproduce(FigurePreset::Fig2, &again).unwrap();
        assert_eq!(
            csv_a,
            std::fs::read(&rewritten[0]).unwrap(),
            "reproduction must be byte-identical"
        );

        let header = String::from_utf8(csv_a).unwrap();
        assert!(header.starts_with("point,algorithm,mean_tau,min_tau,max_tau,error_rate,inconclusive\n"));
    }

    #[test]
    fn fig3_without_data_points_at_the_surrogate_generator() {
        let options = ReproduceOptions {
            scale: Scale::Ci,
            out_dir: PathBuf::from("unused"),
            data: None,
        };
        let err = reproduce(FigurePreset::Fig3, &options).unwrap_err().to_string();
        assert!(err.contains("surrogate-data"), "unhelpful error: {err}");

        let missing = ReproduceOptions { data: Some(PathBuf::from("no/such/table.csv")), ..options };
        let err = reproduce(FigurePreset::Fig3, &missing).unwrap_err().to_string();
        assert!(err.contains("surrogate-data"), "unhelpful error: {err}");
    }

    #[test]
    fn worker_env_parsing_is_strict() {
        assert_eq!(parse_workers(None).unwrap(), None);
        assert_eq!(parse_workers(Some("4")).unwrap(), Some(4));
        assert!(parse_workers(Some("0")).is_err());
        assert!(parse_workers(Some("many")).is_err());
    }

    #[test]
    fn presets_parse_and_validate() {
        for name in ["fig1", "fig2", "fig3", "table1"] {
            let preset: FigurePreset = name.parse().unwrap();
            assert_eq!(preset.name(), name);
        }
        assert!("fig9".parse::<FigurePreset>().is_err());
        assert_eq!("ci".parse::<Scale>().unwrap(), Scale::Ci);
        assert!("huge".parse::<Scale>().is_err());

        // Every non-fig3 preset builds a valid config outright.
        for figure in [FigurePreset::Fig1, FigurePreset::Fig2, FigurePreset::Table1] {
            for scale in [Scale::Ci, Scale::Full] {
                preset_config(figure, scale, None).unwrap();
            }
        }
        assert!(preset_config(FigurePreset::Fig3, Scale::Ci, None).is_err());
        let with_data = preset_config(FigurePreset::Fig3, Scale::Ci, Some(Path::new("t.csv")));
        assert_eq!(with_data.unwrap().epsilon, 0.2);
    }
}
