//! Regularised design matrix with a maintained inverse.
//!
//! Every algorithm in this crate works against the same running state: the
//! regularised Gram matrix `A_t = λI + Σ x xᵀ` of pulled features, its
//! inverse, its log-determinant, and the reward-weighted feature sum
//! `b_t = Σ r·x`. Pulls arrive one at a time, so the inverse is maintained
//! with Sherman–Morrison rank-one updates in O(d²) instead of refactoring;
//! the exact matrix is kept alongside and the inverse is recomputed from it
//! by Cholesky factorisation every `REFRESH_INTERVAL` updates to stop
//! floating-point drift from accumulating over very long runs.
//!
//! Matrices are dense row-major `Vec<f64>` throughout; dimensions stay small
//! (tens) while round counts grow large (up to 10⁸), so flat buffers and
//! explicit loops beat any sparse or generic-matrix machinery here.

use crate::error::{Error, Result};

/// Rank-one updates between full Cholesky recomputations of the inverse.
pub const REFRESH_INTERVAL: u64 = 1 << 20;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// `out = m · x` for a row-major `dim × dim` matrix.
pub(crate) fn mat_vec(m: &[f64], dim: usize, x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(m.len(), dim * dim);
    debug_assert_eq!(x.len(), dim);
    debug_assert_eq!(out.len(), dim);
    for (i, o) in out.iter_mut().enumerate() {
        *o = dot(&m[i * dim..(i + 1) * dim], x);
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
pub(crate) fn cholesky(dim: usize, a: &[f64]) -> Result<Vec<f64>> {
    let mut l = vec![0.0; dim * dim];
    for j in 0..dim {
        let mut diag = a[j * dim + j];
        for k in 0..j {
            diag -= l[j * dim + k] * l[j * dim + k];
        }
        if !(diag > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let root = diag.sqrt();
        l[j * dim + j] = root;
        for i in (j + 1)..dim {
            let mut s = a[i * dim + j];
            for k in 0..j {
                s -= l[i * dim + k] * l[j * dim + k];
            }
            l[i * dim + j] = s / root;
        }
    }
    Ok(l)
}

/// Inverse of `L·Lᵀ` given the lower factor `L`.
fn cholesky_inverse(dim: usize, l: &[f64]) -> Vec<f64> {
    // Forward-substitute L⁻¹ column by column, then A⁻¹ = L⁻ᵀ·L⁻¹.
    let mut linv = vec![0.0; dim * dim];
    for c in 0..dim {
        for i in c..dim {
            let mut s = if i == c { 1.0 } else { 0.0 };
            for k in c..i {
                s -= l[i * dim + k] * linv[k * dim + c];
            }
            linv[i * dim + c] = s / l[i * dim + i];
        }
    }
    let mut inv = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in i..dim {
            let mut s = 0.0;
            for k in j..dim {
                s += linv[k * dim + i] * linv[k * dim + j];
            }
            inv[i * dim + j] = s;
            inv[j * dim + i] = s;
        }
    }
    inv
}

/// Running regularised least-squares design: `A_t = λI + Σ xxᵀ`, its inverse
/// and log-determinant, the response vector `b_t = Σ r·x`, and per-arm pull
/// counts.
#[derive(Debug, Clone)]
pub struct DesignState {
    dim: usize,
    lambda: f64,
    matrix: Vec<f64>,
    inverse: Vec<f64>,
    log_det: f64,
    response: Vec<f64>,
    counts: Vec<u64>,
    rounds: u64,
}

impl DesignState {
    /// Fresh design `A₀ = λI` for `arms` arms in `dim` dimensions.
    pub fn new(dim: usize, lambda: f64, arms: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if arms == 0 {
            return Err(Error::InvalidParameter("arm count must be at least 1".into()));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "regularisation must be a positive finite number, got {lambda}"
            )));
        }
        let mut matrix = vec![0.0; dim * dim];
        let mut inverse = vec![0.0; dim * dim];
        for i in 0..dim {
            matrix[i * dim + i] = lambda;
            inverse[i * dim + i] = 1.0 / lambda;
        }
        Ok(Self {
            dim,
            lambda,
            matrix,
            inverse,
            log_det: dim as f64 * lambda.ln(),
            response: vec![0.0; dim],
            counts: vec![0; arms],
            rounds: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Total number of pulls folded into the state.
    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Row-major `A_t`.
    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    /// Row-major `A_t⁻¹` (maintained, refreshed periodically).
    pub fn inverse(&self) -> &[f64] {
        &self.inverse
    }

    /// `log det A_t`, maintained incrementally.
    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// `b_t = Σ r·x`.
    pub fn response(&self) -> &[f64] {
        &self.response
    }

    /// Fold one observed pull `(x, reward)` of `arm` into the state.
    ///
    /// Updates the inverse by Sherman–Morrison and the log-determinant by the
    /// matching identity `log det(A + xxᵀ) = log det A + log(1 + xᵀA⁻¹x)`.
    pub fn rank_one_update(&mut self, x: &[f64], reward: f64, arm: usize) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "feature vector" });
        }
        if !reward.is_finite() {
            return Err(Error::NonFinite { what: "reward" });
        }
        if arm >= self.counts.len() {
            return Err(Error::ArmOutOfRange { index: arm, len: self.counts.len() });
        }

        let dim = self.dim;
        let mut v = vec![0.0; dim];
        mat_vec(&self.inverse, dim, x, &mut v);
        let s = dot(x, &v);
        let denom = 1.0 + s;
        self.log_det += s.ln_1p();
        for i in 0..dim {
            let vi = v[i] / denom;
            for j in 0..dim {
                self.inverse[i * dim + j] -= vi * v[j];
            }
        }
        for i in 0..dim {
            let xi = x[i];
            for j in 0..dim {
                self.matrix[i * dim + j] += xi * x[j];
            }
            self.response[i] += reward * x[i];
        }
        self.counts[arm] += 1;
        self.rounds += 1;
        if self.rounds % REFRESH_INTERVAL == 0 {
            self.refresh()?;
        }
        Ok(())
    }

    /// `yᵀ A_t⁻¹ y`, clamped at zero (the form is PSD; tiny negatives are
    /// floating-point noise).
    pub fn quad_form(&self, y: &[f64]) -> Result<f64> {
        if y.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: y.len() });
        }
        let mut acc = 0.0;
        for i in 0..self.dim {
            acc += y[i] * dot(&self.inverse[i * self.dim..(i + 1) * self.dim], y);
        }
        Ok(acc.max(0.0))
    }

    /// The weighted norm `‖y‖_{A_t⁻¹} = √(yᵀA_t⁻¹y)`.
    pub fn weighted_norm(&self, y: &[f64]) -> Result<f64> {
        Ok(self.quad_form(y)?.sqrt())
    }

    /// `yᵀ (A_t + xxᵀ)⁻¹ y` without materialising the update, via
    /// Sherman–Morrison: `yᵀA⁻¹y − (yᵀA⁻¹x)² / (1 + xᵀA⁻¹x)`.
    ///
    /// This is the squared post-update norm of `y`; the candidate pull `x` is
    /// evaluated, not applied.
    pub fn norm_sq_if_added(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        if y.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: y.len() });
        }
        let dim = self.dim;
        let mut v = vec![0.0; dim];
        mat_vec(&self.inverse, dim, x, &mut v);
        let s = dot(x, &v);
        let q = dot(y, &v);
        let yy = self.quad_form(y)?;
        Ok((yy - q * q / (1.0 + s)).max(0.0))
    }

    /// `out = A_t⁻¹ · b_t`, the regularised least-squares estimate.
    pub(crate) fn solve_response_into(&self, out: &mut [f64]) {
        mat_vec(&self.inverse, self.dim, &self.response, out);
    }

    /// Recompute inverse and log-determinant from the exact matrix.
    fn refresh(&mut self) -> Result<()> {
        let l = cholesky(self.dim, &self.matrix)?;
        let mut log_det = 0.0;
        for i in 0..self.dim {
            log_det += l[i * self.dim + i].ln();
        }
        self.log_det = 2.0 * log_det;
        self.inverse = cholesky_inverse(self.dim, &l);
        Ok(())
    }
}
