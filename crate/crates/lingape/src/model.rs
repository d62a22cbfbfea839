//! Problem instances: arm features, reward models, canonical constructions,
//! and instances fitted from feature/outcome tables.
//!
//! An [`Instance`] bundles the arm features with the true parameter vector
//! and a reward model; everything downstream (runners, complexity
//! calculators, the bench harness) consumes instances. Two canonical
//! families are built in:
//!
//! - [`setting_one`]: `d+1` arms — the canonical basis plus one arm at a
//!   small angle to the best arm, so one pairwise gap is tiny while the rest
//!   are large. The classic case where pulling the *best* arm is wasteful and
//!   a third, informative arm must be pulled instead.
//! - [`setting_two`]: `d` canonical arms with a single reward gap `Δ`,
//!   equivalent to a standard `d`-armed bandit.
//!
//! Real-data style instances come from a [`FeatureOutcomeTable`] (rows of
//! features with ±1 outcomes): a ridge fit over the whole table yields the
//! ground-truth parameter, and arms are sampled from the rows subject to a
//! minimum-gap filter. [`surrogate_table`] generates synthetic tables of the
//! same shape for tests and demos.

use crate::error::{Error, Result};
use crate::linalg::{dot, DesignState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

/// Expected rewards closer than this count as tied everywhere in the crate.
pub const TIE_TOL: f64 = 1e-12;

/// Attempts at sampling an arm set before real-data construction gives up.
pub const SAMPLE_RETRY_CAP: usize = 1000;

/// Default ridge regularisation for the table fit.
pub const DEFAULT_LAMBDA_FIT: f64 = 0.01;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Seed for a deterministic random stream.
///
/// Seeds are plain `u64`s; independent child streams (one per run of a
/// campaign, for instance) are derived with [`RngSeed::child`] so that
/// parallel runs never share or re-order a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// The random stream for this seed.
    pub fn stream(self) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(self.0)
    }

    /// Deterministically derive an independent child seed.
    pub fn child(self, index: u64) -> RngSeed {
        RngSeed(splitmix64(self.0 ^ splitmix64(index)))
    }
}

/// A finite set of arm feature vectors in `ℝᵈ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmSet {
    dim: usize,
    features: Vec<Vec<f64>>,
    max_norm: f64,
}

impl ArmSet {
    /// At least two arms, all of the same positive dimension, all finite.
    pub fn new(features: Vec<Vec<f64>>) -> Result<Self> {
        if features.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "an arm set needs at least 2 arms, got {}",
                features.len()
            )));
        }
        let dim = features[0].len();
        if dim == 0 {
            return Err(Error::InvalidParameter("arm features must have dimension ≥ 1".into()));
        }
        let mut max_norm: f64 = 0.0;
        for (i, x) in features.iter().enumerate() {
            if x.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: x.len() });
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Construction(format!("arm {i} has a non-finite feature")));
            }
            max_norm = max_norm.max(dot(x, x).sqrt());
        }
        Ok(Self { dim, features, max_norm })
    }

    pub fn k(&self) -> usize {
        self.features.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn feature(&self, i: usize) -> &[f64] {
        &self.features[i]
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    /// Largest feature L2 norm (the `L` in the sample-size bounds).
    pub fn max_norm(&self) -> f64 {
        self.max_norm
    }

    /// The pairwise direction `x_i − x_j`.
    pub fn direction(&self, i: usize, j: usize) -> Vec<f64> {
        self.features[i].iter().zip(&self.features[j]).map(|(a, b)| a - b).collect()
    }
}

/// Reward noise around the linear mean `xᵀθ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum NoiseModel {
    /// `r = xᵀθ + σ·z`, `z ~ N(0,1)`.
    Gaussian { sigma: f64 },
    /// `r ∈ {−1,+1}` with `P(r = +1) = (1 + xᵀθ)/2`; requires `|xᵀθ| ≤ 1`.
    #[serde(rename = "signflip")]
    SignFlip,
}

/// A fully specified identification problem: arms, true parameter, reward
/// model, sub-Gaussian scale `R`, and parameter-norm bound `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    arms: ArmSet,
    theta: Vec<f64>,
    noise: NoiseModel,
    r: f64,
    s: f64,
    rewards: Vec<f64>,
    best: usize,
}

impl Instance {
    /// Validates and freezes an instance.
    ///
    /// Checks: dimensions agree; `‖θ‖ ≤ S`; `R > 0` and consistent with the
    /// noise model (`R ≥ σ` for gaussian — a N(0,σ²) variable is
    /// R-sub-Gaussian for any R ≥ σ; `R = 2` for signflip, whose support has
    /// diameter 2); signflip means stay in `[−1, 1]`; and the best arm is
    /// unique at tolerance [`TIE_TOL`].
    pub fn new(arms: ArmSet, theta: Vec<f64>, noise: NoiseModel, r: f64, s: f64) -> Result<Self> {
        if theta.len() != arms.dim() {
            return Err(Error::DimensionMismatch { expected: arms.dim(), got: theta.len() });
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "theta" });
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidParameter(format!("R must be positive and finite, got {r}")));
        }
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidParameter(format!("S must be positive and finite, got {s}")));
        }
        let norm = dot(&theta, &theta).sqrt();
        if norm > s * (1.0 + 1e-12) + 1e-15 {
            return Err(Error::Construction(format!(
                "‖θ‖ = {norm} exceeds the declared bound S = {s}"
            )));
        }
        match noise {
            NoiseModel::Gaussian { sigma } => {
                if !(sigma >= 0.0) || !sigma.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "gaussian σ must be a finite non-negative number, got {sigma}"
                    )));
                }
                if r < sigma {
                    return Err(Error::Construction(format!(
                        "R = {r} is below the gaussian σ = {sigma}; the noise would not be R-sub-Gaussian"
                    )));
                }
            }
            NoiseModel::SignFlip => {
                if r != 2.0 {
                    return Err(Error::Construction(format!(
                        "signflip rewards are 2-sub-Gaussian; R must be 2, got {r}"
                    )));
                }
            }
        }
        let rewards: Vec<f64> = arms.features().iter().map(|x| dot(x, &theta)).collect();
        if let NoiseModel::SignFlip = noise {
            for (i, &m) in rewards.iter().enumerate() {
                if m.abs() > 1.0 {
                    return Err(Error::Construction(format!(
                        "signflip mean of arm {i} is {m}, outside [−1, 1]"
                    )));
                }
            }
        }
        let best = unique_argmax(&rewards).ok_or_else(|| {
            Error::Construction("best arm is not unique (tied expected rewards)".into())
        })?;
        Ok(Self { arms, theta, noise, r, s, rewards, best })
    }

    pub fn arms(&self) -> &ArmSet {
        &self.arms
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn noise(&self) -> NoiseModel {
        self.noise
    }

    /// Sub-Gaussian scale of the reward noise.
    pub fn r(&self) -> f64 {
        self.r
    }

    /// Declared bound on `‖θ‖`.
    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn k(&self) -> usize {
        self.arms.k()
    }

    pub fn dim(&self) -> usize {
        self.arms.dim()
    }

    /// Index of the unique best arm.
    pub fn best_arm(&self) -> usize {
        self.best
    }

    /// `x_iᵀθ` for every arm.
    pub fn expected_rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn expected_reward(&self, arm: usize) -> f64 {
        self.rewards[arm]
    }

    /// Draw one reward for `arm` from the noise model.
    pub fn sample_reward(&self, arm: usize, rng: &mut impl Rng) -> Result<f64> {
        if arm >= self.k() {
            return Err(Error::ArmOutOfRange { index: arm, len: self.k() });
        }
        let mean = self.rewards[arm];
        Ok(match self.noise {
            NoiseModel::Gaussian { sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + sigma * z
            }
            NoiseModel::SignFlip => {
                let u: f64 = rng.random();
                if u < (1.0 + mean) / 2.0 {
                    1.0
                } else {
                    -1.0
                }
            }
        })
    }
}

/// First index attaining the maximum, or `None` if another entry comes
/// within [`TIE_TOL`] of it.
fn unique_argmax(values: &[f64]) -> Option<usize> {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    let near = values
        .iter()
        .enumerate()
        .filter(|&(i, &v)| i != best && v >= values[best] - TIE_TOL)
        .count();
    if near == 0 {
        Some(best)
    } else {
        None
    }
}

/// Canonical hard instance: `d` basis arms plus one arm at angle `0.01` to
/// the best, `θ = (2, 0, …, 0)`, unit gaussian noise.
pub fn setting_one(d: usize) -> Result<Instance> {
    setting_one_with_angle(d, 0.01)
}

/// [`setting_one`] with a configurable angle between the best arm and the
/// interloper (smaller angle ⇒ smaller final gap ⇒ harder instance).
pub fn setting_one_with_angle(d: usize, angle: f64) -> Result<Instance> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("setting one needs d ≥ 2, got {d}")));
    }
    if !(angle > 0.0 && angle < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidParameter(format!(
            "angle must lie strictly inside (0, π/2), got {angle}"
        )));
    }
    let mut features = Vec::with_capacity(d + 1);
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        features.push(e);
    }
    let mut extra = vec![0.0; d];
    extra[0] = angle.cos();
    extra[1] = angle.sin();
    features.push(extra);
    let mut theta = vec![0.0; d];
    theta[0] = 2.0;
    Instance::new(ArmSet::new(features)?, theta, NoiseModel::Gaussian { sigma: 1.0 }, 1.0, 2.0)
}

/// Canonical multi-armed reduction: `d` basis arms, `θ = (Δ, 0, …, 0)`, every
/// suboptimal arm at gap exactly `Δ`, unit gaussian noise.
pub fn setting_two(d: usize, delta: f64) -> Result<Instance> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("setting two needs d ≥ 2, got {d}")));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("gap Δ must be positive, got {delta}")));
    }
    let mut features = Vec::with_capacity(d);
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        features.push(e);
    }
    let mut theta = vec![0.0; d];
    theta[0] = delta;
    Instance::new(ArmSet::new(features)?, theta, NoiseModel::Gaussian { sigma: 1.0 }, 1.0, delta)
}

/// Rows of feature vectors with ±1 outcomes, as parsed from a delimited text
/// file with a header `f1,…,fd,outcome`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureOutcomeTable {
    dim: usize,
    features: Vec<Vec<f64>>,
    outcomes: Vec<f64>,
}

impl FeatureOutcomeTable {
    pub fn new(features: Vec<Vec<f64>>, outcomes: Vec<f64>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::Table("table has no rows".into()));
        }
        if features.len() != outcomes.len() {
            return Err(Error::Table(format!(
                "{} feature rows but {} outcomes",
                features.len(),
                outcomes.len()
            )));
        }
        let dim = features[0].len();
        if dim == 0 {
            return Err(Error::Table("feature rows must have at least one column".into()));
        }
        for (i, row) in features.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Table(format!(
                    "row {} has {} features, expected {dim}",
                    i + 1,
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Table(format!("row {} has a non-finite feature", i + 1)));
            }
        }
        for (i, &o) in outcomes.iter().enumerate() {
            if o != 1.0 && o != -1.0 {
                return Err(Error::Table(format!(
                    "row {} has outcome {o}; outcomes must be -1 or +1",
                    i + 1
                )));
            }
        }
        Ok(Self { dim, features, outcomes })
    }

    pub fn rows(&self) -> usize {
        self.features.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn feature(&self, row: usize) -> &[f64] {
        &self.features[row]
    }

    pub fn outcome(&self, row: usize) -> f64 {
        self.outcomes[row]
    }

    /// Parse from delimited text. The header row is required and must end in
    /// an `outcome` column; the delimiter is auto-detected (comma, semicolon,
    /// tab, or whitespace).
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Table("empty table".into()))?;
        let delim = detect_delimiter(header);
        let cols = split_fields(header, delim);
        if cols.len() < 2 {
            return Err(Error::Table("header needs at least one feature column and an outcome".into()));
        }
        if !cols.last().unwrap().eq_ignore_ascii_case("outcome") {
            if cols.iter().all(|c| c.parse::<f64>().is_ok()) {
                return Err(Error::Table(
                    "first row is numeric; a header row ending in 'outcome' is required".into(),
                ));
            }
            return Err(Error::Table(format!(
                "last header column must be 'outcome', got '{}'",
                cols.last().unwrap()
            )));
        }
        let dim = cols.len() - 1;
        let mut features = Vec::new();
        let mut outcomes = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let fields = split_fields(line, delim);
            if fields.len() != dim + 1 {
                return Err(Error::Table(format!(
                    "row {} has {} fields, expected {}",
                    lineno + 1,
                    fields.len(),
                    dim + 1
                )));
            }
            let mut row = Vec::with_capacity(dim);
            for f in &fields[..dim] {
                row.push(f.parse::<f64>().map_err(|_| {
                    Error::Table(format!("row {}: '{}' is not a number", lineno + 1, f))
                })?);
            }
            let outcome = fields[dim].parse::<f64>().map_err(|_| {
                Error::Table(format!("row {}: outcome '{}' is not a number", lineno + 1, fields[dim]))
            })?;
            features.push(row);
            outcomes.push(outcome);
        }
        Self::new(features, outcomes)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Table(msg) => Error::Table(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Serialise as comma-separated text with the standard header.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for i in 1..=self.dim {
            let _ = write!(out, "f{i},");
        }
        out.push_str("outcome\n");
        for (row, &outcome) in self.features.iter().zip(&self.outcomes) {
            for v in row {
                let _ = write!(out, "{v},");
            }
            let _ = writeln!(out, "{outcome}");
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }
}

fn detect_delimiter(header: &str) -> Option<char> {
    for c in [',', ';', '\t'] {
        if header.contains(c) {
            return Some(c);
        }
    }
    None // whitespace
}

fn split_fields(line: &str, delim: Option<char>) -> Vec<&str> {
    match delim {
        Some(c) => line.split(c).map(str::trim).collect(),
        None => line.split_whitespace().collect(),
    }
}

/// Generate a synthetic feature/outcome table with the shape of a
/// recommendation log: unit-norm feature rows whose linear reward
/// `xᵀθ` is spread over `[−0.9, 0.9]`, with a small high-reward cluster so
/// that sampled arm sets usually contain one clearly best arm.
///
/// Outcomes are ±1 draws from the signflip model under a hidden unit-norm
/// parameter. The same `(rows, dim, seed)` always yields the same table.
pub fn surrogate_table(rows: usize, dim: usize, seed: RngSeed) -> Result<FeatureOutcomeTable> {
    if rows < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 rows, got {rows}")));
    }
    if dim < 2 {
        return Err(Error::InvalidParameter(format!("need dimension ≥ 2, got {dim}")));
    }
    let mut rng = seed.stream();
    let hidden = random_unit(dim, &mut rng);
    let mut features = Vec::with_capacity(rows);
    let mut outcomes = Vec::with_capacity(rows);
    for _ in 0..rows {
        // Reward level: mostly mediocre, occasionally excellent.
        let c: f64 = if rng.random::<f64>() < 0.05 {
            rng.random_range(0.6..0.9)
        } else {
            rng.random_range(-0.9..0.3)
        };
        // Unit vector with xᵀ·hidden = c exactly: c·hidden + √(1−c²)·w, w ⊥ hidden.
        let w = random_unit_orthogonal(&hidden, &mut rng);
        let scale = (1.0 - c * c).sqrt();
        let x: Vec<f64> = hidden.iter().zip(&w).map(|(h, wi)| c * h + scale * wi).collect();
        let u: f64 = rng.random();
        let outcome = if u < (1.0 + c) / 2.0 { 1.0 } else { -1.0 };
        features.push(x);
        outcomes.push(outcome);
    }
    FeatureOutcomeTable::new(features, outcomes)
}

fn random_unit(dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = dot(&v, &v).sqrt();
        if n > 1e-6 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

fn random_unit_orthogonal(u: &[f64], rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let mut v = random_unit(u.len(), rng);
        let proj = dot(&v, u);
        for (vi, ui) in v.iter_mut().zip(u) {
            *vi -= proj * ui;
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-6 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Smallest number with two significant digits that is ≥ `x`.
fn round_up_two_significant(x: f64) -> f64 {
    let exp = x.log10().floor() as i32;
    let scale = 10f64.powi(exp - 1);
    (x / scale).ceil() * scale
}

/// Build a signflip instance from a table: ridge-fit the parameter on all
/// rows, then sample `k` distinct rows as arms, retrying until the best
/// sampled arm leads every other by at least `min_gap` (up to
/// [`SAMPLE_RETRY_CAP`] attempts).
///
/// The declared norm bound `S` is `‖θ*‖` rounded up to two significant
/// digits. Fails if any table row has `|xᵀθ*| > 1` (the signflip model would
/// be invalid), naming the offending row.
pub fn build_real_instance(
    table: &FeatureOutcomeTable,
    k: usize,
    lambda_fit: f64,
    min_gap: f64,
    rng: &mut impl Rng,
) -> Result<Instance> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 arms, got k = {k}")));
    }
    if k > table.rows() {
        return Err(Error::InvalidParameter(format!(
            "cannot sample {k} distinct arms from {} rows",
            table.rows()
        )));
    }
    if !(lambda_fit > 0.0) || !lambda_fit.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "fit regularisation must be positive, got {lambda_fit}"
        )));
    }
    if !(min_gap >= 0.0) || !min_gap.is_finite() {
        return Err(Error::InvalidParameter(format!("min gap must be ≥ 0, got {min_gap}")));
    }

    let dim = table.dim();
    let mut fit = DesignState::new(dim, lambda_fit, 1)?;
    for row in 0..table.rows() {
        fit.rank_one_update(table.feature(row), table.outcome(row), 0)?;
    }
    let mut theta = vec![0.0; dim];
    fit.solve_response_into(&mut theta);

    for row in 0..table.rows() {
        let m = dot(table.feature(row), &theta);
        if m.abs() > 1.0 {
            return Err(Error::Construction(format!(
                "row {} has |xᵀθ*| = {} > 1; the ±1 outcome model cannot hold",
                row + 1,
                m.abs()
            )));
        }
    }

    let norm = dot(&theta, &theta).sqrt();
    if norm < 1e-12 {
        return Err(Error::Construction("fitted parameter is numerically zero".into()));
    }
    let s = round_up_two_significant(norm);

    for _ in 0..SAMPLE_RETRY_CAP {
        let picks = rand::seq::index::sample(rng, table.rows(), k).into_vec();
        let rewards: Vec<f64> = picks.iter().map(|&row| dot(table.feature(row), &theta)).collect();
        let Some(best) = unique_argmax(&rewards) else { continue };
        let ok = rewards
            .iter()
            .enumerate()
            .all(|(i, &r)| i == best || rewards[best] - r >= min_gap.max(TIE_TOL));
        if !ok {
            continue;
        }
        let features: Vec<Vec<f64>> = picks.iter().map(|&row| table.feature(row).to_vec()).collect();
        let arms = ArmSet::new(features)?;
        return Instance::new(arms, theta, NoiseModel::SignFlip, 2.0, s);
    }
    Err(Error::Construction(format!(
        "no {k}-arm sample satisfied the min-gap filter ({min_gap}) in {SAMPLE_RETRY_CAP} attempts"
    )))
}

/// Serialisable instance description (the on-disk JSON format).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub features: Vec<Vec<f64>>,
    pub theta: Vec<f64>,
    pub noise: NoiseModel,
    pub r: f64,
    pub s: f64,
}

impl InstanceSpec {
    pub fn build(self) -> Result<Instance> {
        Instance::new(ArmSet::new(self.features)?, self.theta, self.noise, self.r, self.s)
    }

    pub fn from_instance(instance: &Instance) -> Self {
        Self {
            features: instance.arms().features().to_vec(),
            theta: instance.theta().to_vec(),
            noise: instance.noise(),
            r: instance.r(),
            s: instance.s(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}
