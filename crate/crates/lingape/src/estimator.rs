//! Regularised least-squares estimation and the confidence widths used by
//! the stopping and selection rules.
//!
//! Two kinds of width live here:
//!
//! - The *adaptive* width `β_t(i,j) = ‖xᵢ−xⱼ‖_{A_t⁻¹} · C_t`, where the
//!   scale `C_t` is a self-normalised deviation bound that grows with the
//!   log-determinant of the design matrix and holds uniformly over time and
//!   over all arm pairs (hence the `K²` union-bound factor inside the log).
//!   With probability at least `1 − δ`, every pairwise gap estimate stays
//!   within `β_t` of the truth at every round simultaneously.
//! - The *static* width ([`static_width`]): a fixed-allocation bound for a
//!   design built ahead of time, with a `6n²K/π²` union bound over rounds
//!   and arms. Reward noise enters through its sub-Gaussian scale, so the
//!   σ passed by callers here is the instance's `R`.
//!
//! The estimator never sees the true parameter; everything is a function of
//! the running [`DesignState`].

use crate::error::{Error, Result};
use crate::linalg::DesignState;
use crate::model::ArmSet;

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("δ must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

/// Running estimate `θ̂_t` plus everything needed to price its uncertainty:
/// sub-Gaussian scale `R`, norm bound `S`, confidence level `δ`, and the
/// union-bound factor over arm pairs.
#[derive(Debug, Clone)]
pub struct EstimatorState {
    design: DesignState,
    r: f64,
    s: f64,
    delta: f64,
    k: usize,
    pair_correction: f64,
}

impl EstimatorState {
    pub fn new(dim: usize, lambda: f64, k: usize, r: f64, s: f64, delta: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 arms, got {k}")));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidParameter(format!("R must be positive and finite, got {r}")));
        }
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidParameter(format!("S must be positive and finite, got {s}")));
        }
        check_delta(delta)?;
        Ok(Self {
            design: DesignState::new(dim, lambda, k)?,
            r,
            s,
            delta,
            k,
            pair_correction: (k * k) as f64,
        })
    }

    /// Estimator sized for an instance (dimension, arm count, `R`, `S` all
    /// taken from it).
    pub fn for_instance(instance: &crate::model::Instance, lambda: f64, delta: f64) -> Result<Self> {
        Self::new(instance.dim(), lambda, instance.k(), instance.r(), instance.s(), delta)
    }

    /// Replace the default `K²` union-bound factor (for ablations). Must be
    /// at least 1 so the confidence scale stays real.
    pub fn with_pair_correction(mut self, factor: f64) -> Result<Self> {
        if !(factor >= 1.0) || !factor.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "pair correction must be ≥ 1, got {factor}"
            )));
        }
        self.pair_correction = factor;
        Ok(self)
    }

    pub fn design(&self) -> &DesignState {
        &self.design
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn pair_correction(&self) -> f64 {
        self.pair_correction
    }

    /// Fold one observed pull into the design.
    pub fn update(&mut self, x: &[f64], reward: f64, arm: usize) -> Result<()> {
        self.design.rank_one_update(x, reward, arm)
    }

    /// `θ̂_t = A_t⁻¹ b_t` (the all-zeros vector before any pull).
    pub fn theta_hat(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.design.dim()];
        self.design.solve_response_into(&mut out);
        out
    }

    /// The confidence scale
    /// `C_t = R·√(2·log(pair·det(A_t)^½·det(λI)^(−½)/δ)) + √λ·S`,
    /// evaluated from the maintained log-determinant.
    ///
    /// Nondecreasing in `t`, since `det(A_t)` only grows.
    pub fn confidence_scale(&self) -> f64 {
        let d = self.design.dim() as f64;
        let lambda = self.design.lambda();
        let log_det_ratio = self.design.log_det() - d * lambda.ln();
        let inner = self.pair_correction.ln() + 0.5 * log_det_ratio - self.delta.ln();
        self.r * (2.0 * inner).sqrt() + lambda.sqrt() * self.s
    }

    /// Estimated pairwise gap `Δ̂_t(i,j) = (xᵢ − xⱼ)ᵀ θ̂_t`.
    pub fn gap_estimate(&self, i: usize, j: usize, arms: &ArmSet) -> Result<f64> {
        self.check_pair(i, j, arms)?;
        let theta = self.theta_hat();
        let xi = arms.feature(i);
        let xj = arms.feature(j);
        Ok((0..arms.dim()).map(|c| (xi[c] - xj[c]) * theta[c]).sum())
    }

    /// Confidence width `β_t(i,j) = ‖xᵢ − xⱼ‖_{A_t⁻¹} · C_t` on the pairwise
    /// gap. Symmetric in `(i,j)`.
    pub fn gap_width(&self, i: usize, j: usize, arms: &ArmSet) -> Result<f64> {
        self.check_pair(i, j, arms)?;
        self.width(&arms.direction(i, j))
    }

    /// `‖y‖_{A_t⁻¹} · C_t` for an arbitrary direction.
    pub fn width(&self, y: &[f64]) -> Result<f64> {
        Ok(self.design.weighted_norm(y)? * self.confidence_scale())
    }

    fn check_pair(&self, i: usize, j: usize, arms: &ArmSet) -> Result<()> {
        if arms.dim() != self.design.dim() {
            return Err(Error::DimensionMismatch { expected: self.design.dim(), got: arms.dim() });
        }
        if i >= arms.k() {
            return Err(Error::ArmOutOfRange { index: i, len: arms.k() });
        }
        if j >= arms.k() {
            return Err(Error::ArmOutOfRange { index: j, len: arms.k() });
        }
        Ok(())
    }
}

/// Fixed-design confidence width for a direction `y` after `n` pulls:
/// `2σ·‖y‖_{A⁻¹}·√(2·log(6n²K / (δπ²)))`.
///
/// `σ` is the sub-Gaussian scale of the reward noise (pass the instance's
/// `R`); `n ≥ 1` is required — the bound is meaningless before any pull.
pub fn static_width(
    design: &DesignState,
    y: &[f64],
    sigma: f64,
    k: usize,
    n: u64,
    delta: f64,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("static width needs n ≥ 1 pulls".into()));
    }
    if k < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 arms, got {k}")));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("σ must be finite and ≥ 0, got {sigma}")));
    }
    check_delta(delta)?;
    let nf = n as f64;
    let log_arg = 6.0 * nf * nf * k as f64 / (delta * std::f64::consts::PI.powi(2));
    Ok(2.0 * sigma * design.weighted_norm(y)? * (2.0 * log_arg.ln()).sqrt())
}
