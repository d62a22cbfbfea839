//! The identification runners: the fully adaptive gap-based loop (two arm
//! selectors) and the static / phased-adaptive / oracle design baselines.
//!
//! All four runners share the same contract: given an [`Instance`], a
//! parameter block, and a seed, simulate until the stopping rule fires or
//! the hard pull budget runs out, and return a [`RunRecord`] with the
//! stopping time `τ`, the returned arm, per-arm pull counts, and a
//! correctness flag measured against the instance's ground truth. Runs are
//! bit-reproducible: same inputs, same record.
//!
//! Stopping semantics are uniform: each runner maintains a certificate value
//! `B(t)` and stops as soon as `B(t) ≤ ε`.
//!
//! - LinGapE: `B(t) = max_{j≠i_t} Δ̂_t(j, i_t) + β_t(j, i_t)` — an upper
//!   confidence bound on how much any challenger could still beat the
//!   empirical best `i_t`. The next pull shrinks the width of the single
//!   `(i_t, j_t)` direction that attains the max.
//! - Baselines: `B(t) = max_{j≠î} width(î,j) − Δ̂_t(î,j)` under the
//!   fixed-design widths of [`static_width`] — the empirical best must lead
//!   every rival by more than the width (up to ε). Checks begin once
//!   `t ≥ K`, before which the estimate can be degenerate enough to stop
//!   spuriously on ties.

use crate::allocation::{
    design_greedy_step, greedy_arm, lowest_argmax, ratio_arm, AllocationCache, WeightedDirection,
};
use crate::error::{Error, Result};
use crate::estimator::{static_width, EstimatorState};
use crate::linalg::dot;
use crate::model::{ArmSet, Instance, RngSeed};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Hard cap on total pulls per run unless overridden.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Default design regularisation for the adaptive algorithm.
pub const DEFAULT_LAMBDA: f64 = 1.0;

/// Default design regularisation for the fixed-design baselines.
pub const DEFAULT_LAMBDA_STATIC: f64 = 0.01;

/// The algorithms the bench harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    LingapeGreedy,
    LingapeRatio,
    XyStatic,
    XyAdaptive,
    XyOracle,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::LingapeGreedy => "lingape_greedy",
            Algorithm::LingapeRatio => "lingape_ratio",
            Algorithm::XyStatic => "xy_static",
            Algorithm::XyAdaptive => "xy_adaptive",
            Algorithm::XyOracle => "xy_oracle",
        }
    }

    pub fn all() -> [Algorithm; 5] {
        [
            Algorithm::LingapeGreedy,
            Algorithm::LingapeRatio,
            Algorithm::XyStatic,
            Algorithm::XyAdaptive,
            Algorithm::XyOracle,
        ]
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::all()
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm '{s}'")))
    }
}

/// Arm-selection rule inside the adaptive loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selector {
    /// Pull whichever arm most shrinks the active direction's width.
    Greedy,
    /// Track the L1-optimal pull proportions of the active direction.
    Ratio,
}

/// How much trajectory to keep in the record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceMode {
    Off,
    /// Record every `n`-th decision, plus always the final one.
    Every(u64),
}

impl TraceMode {
    fn hits(self, index: u64) -> bool {
        match self {
            TraceMode::Off => false,
            TraceMode::Every(n) => index % n.max(1) == 0,
        }
    }

    fn is_on(self) -> bool {
        !matches!(self, TraceMode::Off)
    }
}

/// Run parameters shared by all runners. `lambda` regularises whatever
/// design the runner builds: the adaptive loop defaults to
/// [`DEFAULT_LAMBDA`], the baselines to [`DEFAULT_LAMBDA_STATIC`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunParams {
    pub epsilon: f64,
    pub delta: f64,
    pub lambda: f64,
    pub budget: u64,
    pub trace: TraceMode,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            epsilon: 0.0,
            delta: 0.05,
            lambda: DEFAULT_LAMBDA,
            budget: DEFAULT_BUDGET,
            trace: TraceMode::Off,
        }
    }
}

impl RunParams {
    /// Defaults with the baseline regularisation.
    pub fn baseline_default() -> Self {
        Self { lambda: DEFAULT_LAMBDA_STATIC, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!("ε must be ≥ 0, got {}", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!("δ must lie in (0,1), got {}", self.delta)));
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("λ must be > 0, got {}", self.lambda)));
        }
        if self.budget == 0 {
            return Err(Error::InvalidParameter("budget must be at least 1".into()));
        }
        Ok(())
    }
}

/// Phase lengths for the phased baseline: phase `j` (1-based) runs for
/// `max(10·d, ⌈n₀·growthʲ⁻¹⌉)` pulls, with `n₀ = 10·d` unless overridden.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSchedule {
    pub initial: Option<u64>,
    pub growth: f64,
}

impl Default for PhaseSchedule {
    fn default() -> Self {
        Self { initial: None, growth: 2.0 }
    }
}

impl PhaseSchedule {
    fn validate(&self) -> Result<()> {
        if let Some(n0) = self.initial {
            if n0 == 0 {
                return Err(Error::InvalidParameter("phase length must be ≥ 1".into()));
            }
        }
        if !(self.growth >= 1.0) || !self.growth.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "phase growth must be ≥ 1, got {}",
                self.growth
            )));
        }
        Ok(())
    }

    fn length(&self, dim: usize, phase: u32) -> u64 {
        let floor = 10 * dim as u64;
        let n0 = self.initial.unwrap_or(floor).max(1) as f64;
        let raw = (n0 * self.growth.powi(phase as i32 - 1)).ceil();
        // f64→u64 casts saturate, so schedule overflow degrades gracefully
        // into "one giant phase" and the budget check catches it.
        (raw as u64).max(floor).max(1)
    }
}

/// One sampled decision: round count when the decision was made, the
/// empirical best and its challenger, the stopping certificate `B(t)`, the
/// pair width `β_t`, and the arm pulled next (`None` on the final decision).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceStep {
    pub t: u64,
    pub best: usize,
    pub challenger: usize,
    pub b_value: f64,
    pub beta: f64,
    pub pulled: Option<usize>,
}

/// Everything one simulated run produced.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    /// Total pulls, initialisation included.
    pub tau: u64,
    pub returned_arm: usize,
    /// Pulls per arm; sums to `tau`.
    pub counts: Vec<u64>,
    /// Whether the returned arm is ε-optimal under the ground truth.
    pub correct: bool,
    /// Set when the budget ran out before the stopping rule fired; `tau`
    /// and `returned_arm` then describe the truncated run.
    pub inconclusive: bool,
    pub epsilon: f64,
    pub delta: f64,
    pub lambda: f64,
    pub seed: u64,
    /// The oracle baseline reads the true gaps; nothing else does.
    pub oracle_access: bool,
    /// Active-set size at the start of each phase (phased baseline only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_active_sizes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceStep>,
}

/// ε-optimality of a returned arm: returning the unique best arm is always
/// correct; any other arm errs exactly when its gap reaches ε.
fn is_correct(instance: &Instance, returned: usize, epsilon: f64) -> bool {
    let gap = instance.expected_reward(instance.best_arm()) - instance.expected_reward(returned);
    gap <= 0.0 || gap < epsilon
}

/// The adaptive loop's per-round decision: empirical best `i_t`, the
/// challenger `j_t` maximising `Δ̂_t(j, i_t) + β_t(j, i_t)`, and that
/// maximum `B(t)`.
pub fn select_direction(est: &EstimatorState, arms: &ArmSet) -> Result<(usize, usize, f64)> {
    if arms.k() != est.k() {
        return Err(Error::InvalidParameter(format!(
            "estimator sized for {} arms, got {}",
            est.k(),
            arms.k()
        )));
    }
    if arms.dim() != est.design().dim() {
        return Err(Error::DimensionMismatch { expected: est.design().dim(), got: arms.dim() });
    }
    let theta = est.theta_hat();
    let values: Vec<f64> = arms.features().iter().map(|x| dot(x, &theta)).collect();
    let best = lowest_argmax(&values);
    let scale = est.confidence_scale();
    let mut objective = vec![f64::NEG_INFINITY; arms.k()];
    for j in 0..arms.k() {
        if j == best {
            continue;
        }
        let width = est.design().weighted_norm(&arms.direction(j, best))? * scale;
        objective[j] = (values[j] - values[best]) + width;
    }
    let challenger = lowest_argmax(&objective);
    Ok((best, challenger, objective[challenger]))
}

/// Per-decision snapshot handed to observers (before the pull, so the
/// estimator still reflects exactly `t` rounds).
#[derive(Debug, Clone, Copy)]
pub struct LingapeStep {
    pub t: u64,
    pub best: usize,
    pub challenger: usize,
    pub b_value: f64,
    pub beta: f64,
}

/// Run the adaptive gap-based algorithm.
///
/// Initialisation pulls every arm once (counted in `τ`), then each round
/// estimates the best arm, finds its strongest challenger, stops when the
/// certificate `B(t)` drops to ε, and otherwise pulls the arm chosen by the
/// `selector` for the active direction.
pub fn lingape_run(
    instance: &Instance,
    selector: Selector,
    params: &RunParams,
    seed: RngSeed,
) -> Result<RunRecord> {
    lingape_run_observed(instance, selector, params, seed, |_, _| {})
}

/// [`lingape_run`] with a per-decision observer; tests use it to check
/// trajectory invariants without paying for full traces.
pub fn lingape_run_observed<F>(
    instance: &Instance,
    selector: Selector,
    params: &RunParams,
    seed: RngSeed,
    mut observer: F,
) -> Result<RunRecord>
where
    F: FnMut(&EstimatorState, &LingapeStep),
{
    params.validate()?;
    let arms = instance.arms();
    let k = instance.k();
    let algorithm = match selector {
        Selector::Greedy => Algorithm::LingapeGreedy,
        Selector::Ratio => Algorithm::LingapeRatio,
    };
    let cache = match selector {
        Selector::Ratio => Some(AllocationCache::new(arms)?),
        Selector::Greedy => None,
    };
    let mut est = EstimatorState::for_instance(instance, params.lambda, params.delta)?;
    let mut rng = seed.stream();
    let mut trace = Vec::new();

    let record = |est: &EstimatorState, returned: usize, inconclusive: bool, trace: Vec<TraceStep>| {
        RunRecord {
            algorithm,
            tau: est.design().rounds(),
            returned_arm: returned,
            counts: est.design().counts().to_vec(),
            correct: is_correct(instance, returned, params.epsilon),
            inconclusive,
            epsilon: params.epsilon,
            delta: params.delta,
            lambda: params.lambda,
            seed: seed.0,
            oracle_access: false,
            phase_active_sizes: None,
            trace,
        }
    };

    for arm in 0..k {
        if est.design().rounds() >= params.budget {
            // Budget too small even for initialisation.
            let theta = est.theta_hat();
            let values: Vec<f64> = arms.features().iter().map(|x| dot(x, &theta)).collect();
            return Ok(record(&est, lowest_argmax(&values), true, trace));
        }
        let reward = instance.sample_reward(arm, &mut rng)?;
        est.update(arms.feature(arm), reward, arm)?;
    }

    let mut decision: u64 = 0;
    loop {
        let (best, challenger, b_value) = select_direction(&est, arms)?;
        let beta = est.gap_width(best, challenger, arms)?;
        let t = est.design().rounds();
        observer(&est, &LingapeStep { t, best, challenger, b_value, beta });

        if b_value <= params.epsilon {
            if params.trace.is_on() {
                trace.push(TraceStep { t, best, challenger, b_value, beta, pulled: None });
            }
            return Ok(record(&est, best, false, trace));
        }
        if t >= params.budget {
            if params.trace.is_on() {
                trace.push(TraceStep { t, best, challenger, b_value, beta, pulled: None });
            }
            return Ok(record(&est, best, true, trace));
        }

        let direction = arms.direction(best, challenger);
        let arm = match selector {
            Selector::Greedy => greedy_arm(est.design(), &direction, arms)?,
            Selector::Ratio => {
                ratio_arm(est.design().counts(), cache.as_ref().unwrap().pair(best, challenger)?)?
            }
        };
        if params.trace.hits(decision) {
            trace.push(TraceStep { t, best, challenger, b_value, beta, pulled: Some(arm) });
        }
        let reward = instance.sample_reward(arm, &mut rng)?;
        est.update(arms.feature(arm), reward, arm)?;
        decision += 1;
    }
}

/// Empirical best arm under the current estimate.
fn empirical_best(est: &EstimatorState, arms: &ArmSet) -> (usize, Vec<f64>) {
    let theta = est.theta_hat();
    let values: Vec<f64> = arms.features().iter().map(|x| dot(x, &theta)).collect();
    (lowest_argmax(&values), values)
}

/// Fixed-design stopping certificate over a direction family anchored at the
/// empirical best: `B = max (width − Δ̂)` together with the attaining rival
/// and the pair width. `rivals` lists the arms checked against `best`.
fn static_certificate(
    est: &EstimatorState,
    arms: &ArmSet,
    best: usize,
    values: &[f64],
    rivals: impl Iterator<Item = usize>,
    sigma: f64,
    n: u64,
) -> Result<(f64, usize, f64)> {
    let mut b_value = f64::NEG_INFINITY;
    let mut worst = best;
    let mut worst_width = 0.0;
    for j in rivals {
        if j == best {
            continue;
        }
        let width =
            static_width(est.design(), &arms.direction(best, j), sigma, arms.k(), n, est.delta())?;
        let margin = width - (values[best] - values[j]);
        if margin > b_value {
            b_value = margin;
            worst = j;
            worst_width = width;
        }
    }
    Ok((b_value, worst, worst_width))
}

/// Shared skeleton of the two fixed-design runners: pull by the greedy
/// design step over `directions`, stop once every rival is cleared.
///
/// `stop_rivals` restricts which comparisons the stopping rule makes (the
/// oracle variant only clears directions out of the known best arm);
/// `forced_return` overrides the returned arm on a conclusive stop.
fn fixed_design_run(
    algorithm: Algorithm,
    instance: &Instance,
    params: &RunParams,
    seed: RngSeed,
    directions: &[WeightedDirection],
    stop_rivals: &dyn Fn(usize) -> Vec<usize>,
    forced_return: Option<usize>,
) -> Result<RunRecord> {
    params.validate()?;
    let arms = instance.arms();
    let k = instance.k();
    let mut est = EstimatorState::for_instance(instance, params.lambda, params.delta)?;
    let mut rng = seed.stream();
    let mut trace = Vec::new();

    let record = |est: &EstimatorState, returned: usize, inconclusive: bool, trace: Vec<TraceStep>| {
        RunRecord {
            algorithm,
            tau: est.design().rounds(),
            returned_arm: returned,
            counts: est.design().counts().to_vec(),
            correct: is_correct(instance, returned, params.epsilon),
            inconclusive,
            epsilon: params.epsilon,
            delta: params.delta,
            lambda: params.lambda,
            seed: seed.0,
            oracle_access: algorithm == Algorithm::XyOracle,
            phase_active_sizes: None,
            trace,
        }
    };

    loop {
        let n = est.design().rounds();
        if n >= params.budget {
            let (best, _) = empirical_best(&est, arms);
            return Ok(record(&est, forced_return.unwrap_or(best), true, trace));
        }
        let arm = design_greedy_step(est.design(), directions, arms)?;
        let reward = instance.sample_reward(arm, &mut rng)?;
        est.update(arms.feature(arm), reward, arm)?;
        let n = n + 1;

        // Estimates can stop on spurious ties while arms are still unseen;
        // the certificate is only consulted once n ≥ K.
        if n < k as u64 {
            continue;
        }
        let (best, values) = empirical_best(&est, arms);
        let anchor = forced_return.unwrap_or(best);
        let (b_value, worst, width) = static_certificate(
            &est,
            arms,
            anchor,
            &values,
            stop_rivals(anchor).into_iter(),
            instance.r(),
            n,
        )?;
        let stopped = b_value <= params.epsilon;
        if params.trace.hits(n - k as u64) || (stopped && params.trace.is_on()) {
            trace.push(TraceStep {
                t: n,
                best: anchor,
                challenger: worst,
                b_value,
                beta: width,
                pulled: if stopped { None } else { Some(arm) },
            });
        }
        if stopped {
            return Ok(record(&est, anchor, false, trace));
        }
    }
}

/// Static design over all pairwise directions: allocate pulls ahead of any
/// reward information, stop when the empirical best clears every rival under
/// the fixed-design widths.
pub fn xy_static_run(instance: &Instance, params: &RunParams, seed: RngSeed) -> Result<RunRecord> {
    let arms = instance.arms();
    let mut directions = Vec::with_capacity(arms.k() * (arms.k() - 1) / 2);
    for i in 0..arms.k() {
        for j in (i + 1)..arms.k() {
            directions.push(WeightedDirection::new(arms.direction(i, j), 1.0)?);
        }
    }
    let all: Vec<usize> = (0..arms.k()).collect();
    fixed_design_run(
        Algorithm::XyStatic,
        instance,
        params,
        seed,
        &directions,
        &|_| all.clone(),
        None,
    )
}

/// The oracle design: it reads the true best arm and the true gaps, weights
/// each direction `x* − xᵢ` by its gap (wide-gap directions tolerate wide
/// intervals), and only needs to clear those `K−1` directions to stop. The
/// returned arm is always the true best; the record carries
/// `oracle_access = true`.
pub fn xy_oracle_run(instance: &Instance, params: &RunParams, seed: RngSeed) -> Result<RunRecord> {
    let arms = instance.arms();
    let best = instance.best_arm();
    let mut directions = Vec::with_capacity(arms.k() - 1);
    for i in 0..arms.k() {
        if i == best {
            continue;
        }
        let gap = instance.expected_reward(best) - instance.expected_reward(i);
        directions.push(WeightedDirection::new(arms.direction(best, i), gap)?);
    }
    let rivals: Vec<usize> = (0..arms.k()).filter(|&i| i != best).collect();
    fixed_design_run(
        Algorithm::XyOracle,
        instance,
        params,
        seed,
        &directions,
        &|_| rivals.clone(),
        Some(best),
    )
}

/// Phased elimination baseline. Each phase builds a *fresh* design aimed at
/// the surviving directions, pulls for the scheduled length (with the same
/// in-phase stopping certificate as the static runner, over all arms), and
/// at the phase boundary re-derives the surviving set from this phase's data
/// alone: an arm survives unless some rival beats it by more than the width.
///
/// Because each phase forgets the previous ones, a phase whose directions
/// exclude some arm cannot eliminate that arm at its boundary — the active
/// set can grow back, which is exactly the pathology that makes this
/// baseline slow on close-pair instances.
pub fn xy_adaptive_run(
    instance: &Instance,
    params: &RunParams,
    schedule: &PhaseSchedule,
    seed: RngSeed,
) -> Result<RunRecord> {
    params.validate()?;
    schedule.validate()?;
    let arms = instance.arms();
    let k = instance.k();
    let dim = instance.dim();
    let mut rng = seed.stream();
    let mut counts = vec![0u64; k];
    let mut total: u64 = 0;
    let mut trace = Vec::new();
    let mut phase_sizes = Vec::new();
    let mut active: Vec<usize> = (0..k).collect();

    let record = |returned: usize,
                  inconclusive: bool,
                  total: u64,
                  counts: Vec<u64>,
                  phase_sizes: Vec<usize>,
                  trace: Vec<TraceStep>| {
        RunRecord {
            algorithm: Algorithm::XyAdaptive,
            tau: total,
            returned_arm: returned,
            counts,
            correct: is_correct(instance, returned, params.epsilon),
            inconclusive,
            epsilon: params.epsilon,
            delta: params.delta,
            lambda: params.lambda,
            seed: seed.0,
            oracle_access: false,
            phase_active_sizes: Some(phase_sizes),
            trace,
        }
    };

    let mut phase: u32 = 1;
    loop {
        phase_sizes.push(active.len());
        if active.len() == 1 {
            return Ok(record(active[0], false, total, counts, phase_sizes, trace));
        }
        let mut directions = Vec::new();
        for (pos, &i) in active.iter().enumerate() {
            for &j in &active[pos + 1..] {
                directions.push(WeightedDirection::new(arms.direction(i, j), 1.0)?);
            }
        }
        let mut est = EstimatorState::for_instance(instance, params.lambda, params.delta)?;
        let phase_len = schedule.length(dim, phase);

        for step in 1..=phase_len {
            if total >= params.budget {
                let (best, _) = empirical_best(&est, arms);
                return Ok(record(best, true, total, counts, phase_sizes, trace));
            }
            let arm = design_greedy_step(est.design(), &directions, arms)?;
            let reward = instance.sample_reward(arm, &mut rng)?;
            est.update(arms.feature(arm), reward, arm)?;
            counts[arm] += 1;
            total += 1;

            if step < k as u64 {
                continue;
            }
            let (best, values) = empirical_best(&est, arms);
            let (b_value, worst, width) =
                static_certificate(&est, arms, best, &values, 0..k, instance.r(), step)?;
            let stopped = b_value <= params.epsilon;
            if params.trace.hits(total) || (stopped && params.trace.is_on()) {
                trace.push(TraceStep {
                    t: total,
                    best,
                    challenger: worst,
                    b_value,
                    beta: width,
                    pulled: if stopped { None } else { Some(arm) },
                });
            }
            if stopped {
                return Ok(record(best, false, total, counts, phase_sizes, trace));
            }
        }

        // Phase boundary: survivors re-derived from this phase's data alone.
        let (_, values) = empirical_best(&est, arms);
        let mut survivors = Vec::new();
        for x in 0..k {
            let mut eliminated = false;
            for rival in 0..k {
                if rival == x {
                    continue;
                }
                let width = static_width(
                    est.design(),
                    &arms.direction(rival, x),
                    instance.r(),
                    k,
                    phase_len,
                    params.delta,
                )?;
                if values[rival] - values[x] > width {
                    eliminated = true;
                    break;
                }
            }
            if !eliminated {
                survivors.push(x);
            }
        }
        debug_assert!(!survivors.is_empty(), "the empirical best can never be eliminated");
        active = survivors;
        phase += 1;
    }
}

/// Dispatch by algorithm id. The schedule only matters for the phased
/// baseline; `params.lambda` should carry the regularisation appropriate to
/// the algorithm (adaptive vs static).
pub fn run_algorithm(
    algorithm: Algorithm,
    instance: &Instance,
    params: &RunParams,
    schedule: &PhaseSchedule,
    seed: RngSeed,
) -> Result<RunRecord> {
    match algorithm {
        Algorithm::LingapeGreedy => lingape_run(instance, Selector::Greedy, params, seed),
        Algorithm::LingapeRatio => lingape_run(instance, Selector::Ratio, params, seed),
        Algorithm::XyStatic => xy_static_run(instance, params, seed),
        Algorithm::XyAdaptive => xy_adaptive_run(instance, params, schedule, seed),
        Algorithm::XyOracle => xy_oracle_run(instance, params, seed),
    }
}
