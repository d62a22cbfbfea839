//! Closed-form problem-complexity quantities and sample-size bounds.
//!
//! Everything here is a pure function of an [`Instance`] (plus the L1
//! allocation cache where pull proportions are needed): the reward gaps Δᵢ,
//! the gap-weighted complexity `H_ε` that governs the adaptive algorithm's
//! stopping time, the oracle complexities built from the best-vs-rest
//! directions, the two-regime worst-case stopping-time bound, and the
//! numeric check `H₀ ≤ 72·H'_oracle` tying them together.

use serde::{Deserialize, Serialize};

use crate::allocation::AllocationCache;
use crate::error::{Error, Result};
use crate::model::{Instance, TIE_TOL};

/// Which worst-case stopping-time bound applies for a given regularisation λ.
///
/// The small-λ bound needs `λ ≤ (2R²/S²)·ln(K²/δ)`; the large-λ bound needs
/// `λ > 4·H·R²·L²`. Between the two cutoffs neither proof applies, which
/// [`Regime::NoGuarantee`] reports honestly (the small-λ formula is still
/// returned as a reference value).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    SmallLambda,
    LargeLambda,
    NoGuarantee,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::SmallLambda => "small-lambda",
            Regime::LargeLambda => "large-lambda",
            Regime::NoGuarantee => "no-guarantee",
        })
    }
}

/// Everything the stopping-time bound needs besides the complexity itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    /// Sub-Gaussian noise scale.
    pub r: f64,
    /// Norm bound on the parameter vector.
    pub s: f64,
    /// Number of arms.
    pub k: usize,
    /// Feature dimension.
    pub d: usize,
    /// Largest arm-feature norm.
    pub l: f64,
    /// Ridge regularisation.
    pub lambda: f64,
    /// Confidence level.
    pub delta: f64,
}

impl BoundParams {
    /// Read `R`, `S`, `K`, `d`, and `L` off an instance.
    pub fn for_instance(instance: &Instance, lambda: f64, delta: f64) -> Self {
        Self {
            r: instance.r(),
            s: instance.s(),
            k: instance.k(),
            d: instance.dim(),
            l: instance.arms().max_norm(),
            lambda,
            delta,
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("R", self.r),
            ("S", self.s),
            ("L", self.l),
            ("lambda", self.lambda),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if self.k < 2 {
            return Err(Error::InvalidParameter(format!(
                "the bound needs at least two arms, got {}",
                self.k
            )));
        }
        if self.d == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        Ok(())
    }
}

/// The full set of complexity quantities for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    /// Per-arm gaps Δᵢ (the best arm carries the minimal rival gap).
    pub gaps: Vec<f64>,
    /// Index of the unique best arm.
    pub best_arm: usize,
    /// Gap-weighted complexity `H_ε` at the requested ε.
    pub h_epsilon: f64,
    /// `max_{i≠a*} ρ(y(a*,i))/Δᵢ²`.
    pub h_oracle: f64,
    /// `Σ_{i≠a*} ρ(y(a*,i))/Δᵢ²`.
    pub h_oracle_prime: f64,
    /// Whether `H₀ ≤ 72·H'_oracle` holds numerically.
    pub theorem3_ok: bool,
    /// Which stopping-time bound applies at the requested λ.
    pub regime: Regime,
}

/// Per-arm reward gaps and the best-arm index.
///
/// `Δᵢ = (x_{a*} − x_i)ᵀθ` for `i ≠ a*`; the best arm itself carries the
/// minimal rival gap `Δ_{a*} = min_{j≠a*} Δⱼ` — that is the quantity every
/// downstream complexity formula wants (a literal self-gap would be zero and
/// blow the ε = 0 denominators). A tie for the best arm is rejected; instance
/// construction already enforces uniqueness, so this is a defensive recheck.
pub fn instance_gaps(instance: &Instance) -> Result<(Vec<f64>, usize)> {
    let values = instance.expected_rewards();
    let best = instance.best_arm();
    let mut gaps: Vec<f64> = values.iter().map(|&v| values[best] - v).collect();
    let min_rival = gaps
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .map(|(_, &g)| g)
        .fold(f64::INFINITY, f64::min);
    if !(min_rival > TIE_TOL) {
        return Err(Error::Construction(
            "best arm is not unique (tied expected rewards)".into(),
        ));
    }
    gaps[best] = min_rival;
    Ok((gaps, best))
}

fn check_cache(instance: &Instance, cache: &AllocationCache) -> Result<()> {
    if cache.k() != instance.k() {
        return Err(Error::InvalidParameter(format!(
            "allocation cache covers {} arms but the instance has {}",
            cache.k(),
            instance.k()
        )));
    }
    Ok(())
}

/// The gap-weighted problem complexity
/// `H_ε = Σ_a max_{i<j} p*_a(y(i,j))·ρ(y(i,j)) / max(ε, (ε+Δᵢ)/3, (ε+Δⱼ)/3)²`.
///
/// Finite and positive for every valid instance; nonincreasing in ε and
/// vanishing as ε → ∞. At ε = 0 the denominators reduce to `max(Δᵢ,Δⱼ)/3`,
/// which positive gaps keep away from zero.
pub fn h_epsilon(instance: &Instance, epsilon: f64, cache: &AllocationCache) -> Result<f64> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be a finite non-negative number, got {epsilon}"
        )));
    }
    check_cache(instance, cache)?;
    let (gaps, _) = instance_gaps(instance)?;
    let k = instance.k();
    let mut terms = vec![0.0_f64; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let dec = cache.pair(i, j)?;
            let denom = epsilon
                .max((epsilon + gaps[i]) / 3.0)
                .max((epsilon + gaps[j]) / 3.0);
            let scale = dec.rho / (denom * denom);
            for (term, &p) in terms.iter_mut().zip(&dec.ratio) {
                *term = term.max(p * scale);
            }
        }
    }
    Ok(terms.iter().sum())
}

/// The best-vs-rest oracle complexities
/// `(max_{i≠a*} ρ(y(a*,i))/Δᵢ², Σ_{i≠a*} ρ(y(a*,i))/Δᵢ²)`.
///
/// The pair always satisfies `H_oracle ≤ H'_oracle ≤ K·H_oracle`, with
/// equality of the first two at `K = 2`.
pub fn oracle_complexity(instance: &Instance, cache: &AllocationCache) -> Result<(f64, f64)> {
    check_cache(instance, cache)?;
    let (gaps, best) = instance_gaps(instance)?;
    let mut h_oracle = 0.0_f64;
    let mut h_prime = 0.0_f64;
    for i in 0..instance.k() {
        if i == best {
            continue;
        }
        let v = cache.pair(best, i)?.rho / (gaps[i] * gaps[i]);
        h_oracle = h_oracle.max(v);
        h_prime += v;
    }
    Ok((h_oracle, h_prime))
}

/// The worst-case stopping-time bound for complexity `h`, with the regime it
/// was proved in.
///
/// Small-λ (`λ ≤ (2R²/S²)·ln(K²/δ)`): `8HR²·ln(K²/δ) + C(H,δ)` with
/// `N = 8HR²·ln(K²/δ) + K`, `M = 2·sqrt(16H²R⁴dL²/λ + N²)`, and
/// `C(H,δ) = K + 4HR²d·ln(1 + M²L²/(λd))`.
/// Large-λ (`λ > 4HR²L²`): `2·(4HR²·ln(K²/δ) + 2HλS² + K)`.
/// When neither condition holds the small-λ value is returned for reference
/// under [`Regime::NoGuarantee`]. The small-λ branch wins if both hold.
pub fn theorem2_bound(h: f64, params: &BoundParams) -> Result<(f64, Regime)> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "complexity must be positive and finite, got {h}"
        )));
    }
    params.validate()?;
    let BoundParams { r, s, k, d, l, lambda, delta } = *params;
    let (kf, df) = (k as f64, d as f64);
    let log_term = (kf * kf / delta).ln();
    let hr2 = h * r * r;

    if lambda <= 2.0 * r * r / (s * s) * log_term {
        let n = 8.0 * hr2 * log_term + kf;
        let m = 2.0 * (16.0 * hr2 * hr2 * df * l * l / lambda + n * n).sqrt();
        let c = kf + 4.0 * hr2 * df * (1.0 + m * m * l * l / (lambda * df)).ln();
        Ok((8.0 * hr2 * log_term + c, Regime::SmallLambda))
    } else if lambda > 4.0 * hr2 * l * l {
        Ok((2.0 * (4.0 * hr2 * log_term + 2.0 * h * lambda * s * s + kf), Regime::LargeLambda))
    } else {
        let n = 8.0 * hr2 * log_term + kf;
        let m = 2.0 * (16.0 * hr2 * hr2 * df * l * l / lambda + n * n).sqrt();
        let c = kf + 4.0 * hr2 * df * (1.0 + m * m * l * l / (lambda * df)).ln();
        Ok((8.0 * hr2 * log_term + c, Regime::NoGuarantee))
    }
}

/// Compute every complexity quantity for `instance` in one pass.
///
/// `h_epsilon` is evaluated at the requested ε; the `theorem3_ok` check uses
/// `H₀` (ε = 0) as the inequality demands; the regime is decided at the
/// requested `(λ, δ)` with `H_ε`.
pub fn complexity_report(
    instance: &Instance,
    epsilon: f64,
    delta: f64,
    lambda: f64,
    cache: &AllocationCache,
) -> Result<ComplexityReport> {
    let (gaps, best_arm) = instance_gaps(instance)?;
    let h_eps = h_epsilon(instance, epsilon, cache)?;
    let h_zero = if epsilon == 0.0 { h_eps } else { h_epsilon(instance, 0.0, cache)? };
    let (h_oracle, h_oracle_prime) = oracle_complexity(instance, cache)?;
    let params = BoundParams::for_instance(instance, lambda, delta);
    let (_, regime) = theorem2_bound(h_eps, &params)?;
    Ok(ComplexityReport {
        gaps,
        best_arm,
        h_epsilon: h_eps,
        h_oracle,
        h_oracle_prime,
        theorem3_ok: h_zero <= 72.0 * h_oracle_prime,
        regime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::allocation_cache;
    use crate::model::{setting_one, setting_two, ArmSet, Instance, NoiseModel, RngSeed};
    use rand::Rng;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn gaps_of_canonical_settings() {
        let inst = setting_two(5, 0.5).unwrap();
        let (gaps, best) = instance_gaps(&inst).unwrap();
        assert_eq!(best, 0);
        for g in gaps {
            assert!((g - 0.5).abs() < 1e-15);
        }

        let inst = setting_one(5).unwrap();
        let (gaps, best) = instance_gaps(&inst).unwrap();
        assert_eq!(best, 0);
        let close = 2.0 * (1.0 - (0.01_f64).cos());
        assert!((gaps[5] - close).abs() < 1e-12, "interloper gap {}", gaps[5]);
        assert!((gaps[0] - close).abs() < 1e-12, "best-arm gap {}", gaps[0]);
        for i in 1..5 {
            assert!((gaps[i] - 2.0).abs() < 1e-12);
        }

        // K = 2: the best arm inherits its single competitor's gap.
        let inst = setting_two(2, 0.7).unwrap();
        let (gaps, _) = instance_gaps(&inst).unwrap();
        assert_eq!(gaps[0], gaps[1]);
    }

    #[test]
    fn h_epsilon_matches_the_mab_closed_form() {
        let inst = setting_two(5, 0.5).unwrap();
        let cache = allocation_cache(inst.arms()).unwrap();

        let h0 = h_epsilon(&inst, 0.0, &cache).unwrap();
        assert!(rel_close(h0, 18.0 * 5.0 / 0.25, 1e-10), "H0 = {h0}");

        // Canonical-basis instances reduce to the plain bandit formula
        // Σ_k 2 / max(ε, (ε+Δ_k)/3)² at every ε.
        let (gaps, _) = instance_gaps(&inst).unwrap();
        let mut last = f64::INFINITY;
        for eps in [0.0, 0.05, 0.1, 0.3, 1.0, 5.0] {
            let h = h_epsilon(&inst, eps, &cache).unwrap();
            let mab: f64 = gaps
                .iter()
                .map(|&g| {
                    let denom = eps.max((eps + g) / 3.0);
                    2.0 / (denom * denom)
                })
                .sum();
            assert!(rel_close(h, mab, 1e-10), "ε={eps}: {h} vs {mab}");
            assert!(h <= last * (1.0 + 1e-12), "H_ε must be nonincreasing");
            last = h;
        }

        // ε → ∞ sends the complexity to zero.
        assert!(h_epsilon(&inst, 1e9, &cache).unwrap() < 1e-15);

        assert!(h_epsilon(&inst, -0.1, &cache).is_err());
        assert!(h_epsilon(&inst, f64::NAN, &cache).is_err());
    }

    #[test]
    fn oracle_complexity_closed_forms() {
        let inst = setting_two(5, 0.5).unwrap();
        let cache = allocation_cache(inst.arms()).unwrap();
        let (h, hp) = oracle_complexity(&inst, &cache).unwrap();
        assert!(rel_close(h, 16.0, 1e-10), "H_oracle = {h}");
        assert!(rel_close(hp, 64.0, 1e-10), "H'_oracle = {hp}");
        assert!(h <= hp && hp <= 5.0 * h);

        // The canonical inequality instance: H0 = 360 ≤ 72·64.
        let h0 = h_epsilon(&inst, 0.0, &cache).unwrap();
        assert!(h0 <= 72.0 * hp);

        let inst = setting_two(2, 0.7).unwrap();
        let cache = allocation_cache(inst.arms()).unwrap();
        let (h, hp) = oracle_complexity(&inst, &cache).unwrap();
        assert_eq!(h, hp, "K = 2 has a single summand");
    }

    #[test]
    fn theorem2_bound_regimes_and_values() {
        let params = BoundParams { r: 1.0, s: 0.5, k: 5, d: 5, l: 1.0, lambda: 1.0, delta: 0.05 };
        let (bound, regime) = theorem2_bound(360.0, &params).unwrap();
        assert_eq!(regime, Regime::SmallLambda);
        assert!(rel_close(bound, 157540.92862602466, 1e-9), "small-λ bound {bound}");

        // λ far above 4HR²L² flips to the large-λ branch, linear in λ.
        let big = BoundParams { lambda: 14_400.0, ..params };
        let (bound, regime) = theorem2_bound(360.0, &big).unwrap();
        assert_eq!(regime, Regime::LargeLambda);
        assert!(rel_close(bound, 5_201_908.071323456, 1e-9), "large-λ bound {bound}");

        // Between the cutoffs neither proof applies.
        let mid = BoundParams { lambda: 100.0, ..params };
        let (_, regime) = theorem2_bound(360.0, &mid).unwrap();
        assert_eq!(regime, Regime::NoGuarantee);

        // H → 0⁺ in the large-λ regime approaches the 2K floor.
        let floor = BoundParams { lambda: 50.0, ..params };
        let (bound, regime) = theorem2_bound(1e-12, &floor).unwrap();
        assert_eq!(regime, Regime::LargeLambda);
        assert!((bound - 10.0).abs() < 1e-6, "floor bound {bound}");

        // Nondecreasing in H within a regime.
        let (b1, _) = theorem2_bound(100.0, &params).unwrap();
        let (b2, _) = theorem2_bound(200.0, &params).unwrap();
        assert!(b1 < b2);

        assert!(theorem2_bound(0.0, &params).is_err());
        assert!(theorem2_bound(f64::INFINITY, &params).is_err());
        let bad = BoundParams { delta: 1.5, ..params };
        assert!(theorem2_bound(1.0, &bad).is_err());
    }

    #[test]
    fn theorem3_holds_on_random_instances() {
        let mut rng = RngSeed(0x7e03).stream();
        let mut checked = 0;
        while checked < 100 {
            let d = rng.random_range(2..=6usize);
            let k = rng.random_range(d..=d + 4);
            let features: Vec<Vec<f64>> = (0..k)
                .map(|_| {
                    let v: Vec<f64> =
                        (0..d).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    v.iter().map(|x| x / norm).collect()
                })
                .collect();
            let theta: Vec<f64> =
                (0..d).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
            let norm = theta.iter().map(|x| x * x).sum::<f64>().sqrt();
            let arms = ArmSet::new(features).unwrap();
            let Ok(inst) =
                Instance::new(arms, theta, NoiseModel::Gaussian { sigma: 1.0 }, 1.0, norm * 1.01)
            else {
                continue; // tied best arm — resample
            };
            let cache = allocation_cache(inst.arms()).unwrap();
            let h0 = h_epsilon(&inst, 0.0, &cache).unwrap();
            let (_, hp) = oracle_complexity(&inst, &cache).unwrap();
            assert!(
                h0 <= 72.0 * hp * (1.0 + 1e-12),
                "H0 = {h0} breaches 72·H' = {}",
                72.0 * hp
            );
            checked += 1;
        }
    }

    #[test]
    fn report_collects_everything_and_serializes() {
        let inst = setting_two(5, 0.5).unwrap();
        let cache = allocation_cache(inst.arms()).unwrap();
        let report = complexity_report(&inst, 0.0, 0.05, 1.0, &cache).unwrap();
        assert_eq!(report.best_arm, 0);
        assert!(rel_close(report.h_epsilon, 360.0, 1e-10));
        assert!(rel_close(report.h_oracle, 16.0, 1e-10));
        assert!(rel_close(report.h_oracle_prime, 64.0, 1e-10));
        assert!(report.theorem3_ok);
        assert_eq!(report.regime, Regime::SmallLambda);

        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"small-lambda\""));
        let back: ComplexityReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }
}
