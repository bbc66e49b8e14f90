//! Sampling plans for subset Bell tests.
//!
//! The single-draw estimator is `X = M*beta_j` for a context `j` chosen
//! uniformly; its mean is `beta` and its variance is bounded by `M*beta`
//! whenever every context term lies in `[0, 1]`. Chebyshev's inequality then
//! gives `p(|Y - beta| >= eps) <= delta` for the average `Y` over
//! `L = ceil(M*beta/(eps^2*delta))` draws, and Hoeffding's inequality gives
//! the round count `K` needed to pin down a single context term.

use crate::bell::{Context, ContextValue};
use crate::error::{Error, Result};

/// Decision taken after the subset estimate is in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certification {
    /// `Y - eps` clears the local bound: the violation survives the
    /// worst-case estimation error.
    ViolationCertified,
    /// The margin does not clear the local bound. Not a refutation.
    Inconclusive,
}

impl std::fmt::Display for Certification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Certification::ViolationCertified => write!(f, "violation-certified"),
            Certification::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// Round plan for estimating one context term from `K` finite rounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundPlan {
    pub epsilon: f64,
    pub delta: f64,
    /// Bound on the value a single round can contribute.
    pub per_round_bound: f64,
    pub rounds: u64,
}

/// Output of the Chebyshev planner.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    /// Total number of contexts `M` of the target inequality.
    pub num_contexts: u64,
    /// Bell value the plan was built for.
    pub beta: f64,
    /// Allowed estimation error on `beta`.
    pub epsilon: f64,
    /// Allowed failure probability.
    pub delta: f64,
    /// Chebyshev deviation parameter, `1/sqrt(delta)`.
    pub lambda: f64,
    /// Contexts to sample, `L = ceil(M*beta/(eps^2*delta))`.
    pub contexts_required: u64,
    /// `L/M` after the ceiling.
    pub fraction: f64,
    /// Whether `L <= M`, i.e. a (non-strict) subset suffices.
    pub feasible: bool,
    /// Optional finite-round plan for the per-context estimates.
    pub rounds: Option<RoundPlan>,
}

impl SamplingPlan {
    /// Attaches a Hoeffding round plan for the per-context estimation stage.
    pub fn with_rounds(mut self, epsilon: f64, delta: f64, per_round_bound: f64) -> Result<Self> {
        let rounds = rounds_required(epsilon, delta, per_round_bound)?;
        self.rounds = Some(RoundPlan {
            epsilon,
            delta,
            per_round_bound,
            rounds,
        });
        Ok(self)
    }
}

/// Chebyshev plan: how many uniformly chosen contexts are needed to estimate
/// `beta` to within `epsilon` with failure probability at most `delta`.
///
/// `L` is rounded up; the guarantee must hold, not approximately hold. The
/// plan is infeasible when `L > M`: no strict subset (indeed not even the
/// full set, under this bound) meets the target.
pub fn chebyshev_plan(
    num_contexts: u64,
    beta: f64,
    epsilon: f64,
    delta: f64,
) -> Result<SamplingPlan> {
    if num_contexts == 0 {
        return Err(Error::domain("need at least one context"));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::domain(format!("beta must be positive, got {beta}")));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::domain(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let m = num_contexts as f64;
    let l_real = m * beta / (epsilon * epsilon * delta);
    let l_ceil = l_real.ceil();
    let feasible = l_ceil <= m;
    let contexts_required = if l_ceil >= u64::MAX as f64 {
        u64::MAX
    } else {
        l_ceil as u64
    };
    Ok(SamplingPlan {
        num_contexts,
        beta,
        epsilon,
        delta,
        lambda: 1.0 / delta.sqrt(),
        contexts_required,
        fraction: l_ceil / m,
        feasible,
        rounds: None,
    })
}

/// Like [`chebyshev_plan`] but with the error target shrunk by a safety
/// factor in `(0, 1]`. `safety = 1` reproduces the borderline plan in which
/// `epsilon` consumes the whole violation margin.
pub fn chebyshev_plan_with_safety(
    num_contexts: u64,
    beta: f64,
    epsilon: f64,
    delta: f64,
    safety: f64,
) -> Result<SamplingPlan> {
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::domain(format!(
            "safety factor must lie in (0, 1], got {safety}"
        )));
    }
    chebyshev_plan(num_contexts, beta, epsilon * safety, delta)
}

/// Minimum number of rounds so that the empirical mean of a per-round value
/// bounded by `per_round_bound` is within `epsilon` of its mean except with
/// probability `delta`: `K = ceil(-ln(delta)*b^2 / (2*eps^2))`.
pub fn rounds_required(epsilon: f64, delta: f64, per_round_bound: f64) -> Result<u64> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::domain(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if !(per_round_bound > 0.0) || !per_round_bound.is_finite() {
        return Err(Error::domain(format!(
            "per-round bound must be positive, got {per_round_bound}"
        )));
    }
    let k = (-delta.ln()) * per_round_bound * per_round_bound / (2.0 * epsilon * epsilon);
    Ok(k.ceil().max(1.0) as u64)
}

/// Subset estimate: the chosen contexts, their single-draw estimators
/// `X_l = M*beta_l`, and their average `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetEstimate {
    pub chosen_contexts: Vec<Context>,
    pub estimator_values: Vec<f64>,
    pub mean: f64,
}

/// Builds the subset estimator from evaluated context terms. Contexts must be
/// distinct; if all `M` contexts are supplied the mean reproduces `beta`
/// exactly.
pub fn estimate_from_subset(values: &[ContextValue], num_contexts: u64) -> Result<SubsetEstimate> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut seen = std::collections::BTreeSet::new();
    for v in values {
        if !seen.insert(v.context) {
            return Err(Error::DuplicateContext(v.context));
        }
    }
    let m = num_contexts as f64;
    let estimator_values: Vec<f64> = values.iter().map(|v| m * v.value).collect();
    let mean = estimator_values.iter().sum::<f64>() / estimator_values.len() as f64;
    Ok(SubsetEstimate {
        chosen_contexts: values.iter().map(|v| v.context).collect(),
        estimator_values,
        mean,
    })
}

/// Certifies a violation when the estimate minus its error margin strictly
/// exceeds the local bound.
pub fn certify(y: f64, epsilon: f64, local_bound: f64) -> Certification {
    if y - epsilon > local_bound {
        Certification::ViolationCertified
    } else {
        Certification::Inconclusive
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{Behavior, BellInequality};

    #[test]
    fn chsh_visibility_example_is_infeasible() {
        let plan = chebyshev_plan(4, 3.272, 0.272, 3e-5).unwrap();
        assert_eq!(plan.contexts_required, 5_896_771);
        assert!(!plan.feasible);
        assert!((plan.lambda - 1.0 / 3e-5f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn product_visibility_example_is_feasible() {
        // Ten CHSH copies at V = 0.9: the fraction drops below one.
        let m = 4f64.powi(10) as u64;
        let beta = (2.0 + 0.9 * std::f64::consts::SQRT_2).powi(10);
        let eps = beta - 3f64.powi(10);
        let plan = chebyshev_plan(m, beta, eps, 3e-5).unwrap();
        assert!(plan.feasible);
        // The pre-ceiling fraction is 0.69996...; the stored one uses the
        // integer L, which moves the last decimals.
        let expected = (m as f64 * beta / (eps * eps * 3e-5)).ceil() / m as f64;
        assert_eq!(plan.fraction, expected);
        assert!((plan.fraction - 0.69996).abs() < 2e-5);
    }

    #[test]
    fn boundary_case_is_feasible() {
        // beta chosen so L = M exactly.
        let plan = chebyshev_plan(10, 0.125, 0.5, 0.5).unwrap();
        assert_eq!(plan.contexts_required, 10);
        assert!(plan.feasible);
        assert_eq!(plan.fraction, 1.0);
    }

    #[test]
    fn planner_domain_errors() {
        assert!(chebyshev_plan(0, 1.0, 0.1, 0.1).is_err());
        assert!(chebyshev_plan(4, 0.0, 0.1, 0.1).is_err());
        assert!(chebyshev_plan(4, 1.0, 0.0, 0.1).is_err());
        assert!(chebyshev_plan(4, 1.0, 0.1, 0.0).is_err());
        assert!(chebyshev_plan(4, 1.0, 0.1, 1.0).is_err());
        assert!(chebyshev_plan_with_safety(4, 1.0, 0.1, 0.1, 0.0).is_err());
        assert!(chebyshev_plan_with_safety(4, 1.0, 0.1, 0.1, 1.5).is_err());
    }

    #[test]
    fn safety_factor_shrinks_epsilon() {
        let loose = chebyshev_plan(4, 3.272, 0.272, 3e-5).unwrap();
        let tight = chebyshev_plan_with_safety(4, 3.272, 0.272, 3e-5, 0.5).unwrap();
        assert!(tight.contexts_required > loose.contexts_required);
        assert!((tight.epsilon - 0.136).abs() < 1e-12);
    }

    #[test]
    fn round_counts_match_direct_evaluation() {
        assert_eq!(rounds_required(1.0, (-2.0f64).exp(), 1.0).unwrap(), 1);
        assert_eq!(rounds_required(0.01, 3e-5, 1.0).unwrap(), 52_072);
        assert_eq!(rounds_required(0.1, 3e-5, 1.0).unwrap(), 521);
        assert!(rounds_required(0.0, 0.5, 1.0).is_err());
        assert!(rounds_required(0.1, 1.5, 1.0).is_err());
        assert!(rounds_required(0.1, 0.5, 0.0).is_err());
    }

    #[test]
    fn with_rounds_attaches_hoeffding_plan() {
        let plan = chebyshev_plan(4, 3.272, 0.272, 3e-5)
            .unwrap()
            .with_rounds(0.1, 3e-5, 1.0)
            .unwrap();
        assert_eq!(plan.rounds.unwrap().rounds, 521);
    }

    #[test]
    fn full_coverage_reproduces_beta() {
        let chsh = BellInequality::chsh();
        let beh = Behavior::chsh_quantum(1.0).unwrap();
        let values = chsh.context_terms(&beh).unwrap();
        let est = estimate_from_subset(&values, 4).unwrap();
        assert!((est.mean - (2.0 + std::f64::consts::SQRT_2)).abs() < 1e-12);
    }

    #[test]
    fn single_context_estimate_is_scaled() {
        let chsh = BellInequality::chsh();
        let beh = Behavior::chsh_quantum(1.0).unwrap();
        let j = chsh.contexts().next().unwrap();
        let v = chsh.context_term(&beh, j).unwrap();
        let est = estimate_from_subset(&[v], 4).unwrap();
        assert!((est.mean - (2.0 + std::f64::consts::SQRT_2)).abs() < 1e-12);
    }

    #[test]
    fn synthetic_three_context_example() {
        let values = [
            ContextValue {
                context: Context::new(0, 0),
                value: 0.1,
            },
            ContextValue {
                context: Context::new(2, 2),
                value: 0.3,
            },
        ];
        let est = estimate_from_subset(&values, 3).unwrap();
        assert!((est.mean - 0.6).abs() < 1e-12);
    }

    #[test]
    fn subset_input_errors() {
        assert!(matches!(
            estimate_from_subset(&[], 4),
            Err(Error::EmptyInput)
        ));
        let v = ContextValue {
            context: Context::new(0, 0),
            value: 0.5,
        };
        assert!(matches!(
            estimate_from_subset(&[v, v], 4),
            Err(Error::DuplicateContext(_))
        ));
    }

    #[test]
    fn certification_is_strict() {
        assert_eq!(certify(3.41, 0.2, 3.0), Certification::ViolationCertified);
        assert_eq!(certify(3.41, 0.5, 3.0), Certification::Inconclusive);
        assert_eq!(certify(3.0, 0.0001, 3.0), Certification::Inconclusive);
    }

    #[test]
    fn monotone_in_epsilon_and_delta() {
        let mut prev = u64::MAX;
        for eps in [0.05, 0.1, 0.2, 0.4, 0.8] {
            let l = chebyshev_plan(100, 2.0, eps, 0.01)
                .unwrap()
                .contexts_required;
            assert!(l <= prev, "L must be nonincreasing in epsilon");
            prev = l;
        }
        let mut prev = u64::MAX;
        for delta in [0.001, 0.01, 0.1, 0.5] {
            let l = chebyshev_plan(100, 2.0, 0.1, delta)
                .unwrap()
                .contexts_required;
            assert!(l <= prev, "L must be nonincreasing in delta");
            prev = l;
        }
    }
}
