//! Seeded stochastic validation of the sampling plans.
//!
//! A trial binds everything together: bin the behavior through the detector
//! model, draw contexts (uniformly, with or without replacement), estimate
//! each context term either exactly or from `K` multinomial rounds, average
//! the single-draw estimators into `Y`, and apply the certification rule.
//! Trials are deterministic functions of `(seed, stream)`: the RNG is a
//! ChaCha stream cipher and each trial owns stream `trial_index`, so a batch
//! can run on any number of threads and still aggregate identically.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bell::{Behavior, BellInequality, Outcome};
use crate::error::{Error, Result};
use crate::graph::ContextDistribution;
use crate::planner::{certify, Certification, SamplingPlan};

/// Detector parameters for one side-symmetric pair of measurement stations:
/// click probability, the outcome no-clicks are binned to, and the source
/// visibility the station pair is fed with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    pub efficiency: f64,
    pub bin_outcome: Outcome,
    pub visibility: f64,
}

impl DetectorModel {
    pub fn new(efficiency: f64, visibility: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&efficiency) {
            return Err(Error::domain(format!(
                "efficiency must lie in [0, 1], got {efficiency}"
            )));
        }
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::domain(format!(
                "visibility must lie in [0, 1], got {visibility}"
            )));
        }
        Ok(DetectorModel {
            efficiency,
            bin_outcome: 0,
            visibility,
        })
    }

    pub fn with_bin_outcome(mut self, outcome: Outcome) -> Self {
        self.bin_outcome = outcome;
        self
    }
}

/// Exact no-click binning: with probability `eta^2` both sides click and the
/// original table applies; with `eta*(1 - eta)` exactly one side clicks and
/// the silent side is replaced by the bin outcome; with `(1 - eta)^2` both
/// entries are binned. The result is again a normalized behavior.
pub fn simulate_detector(behavior: &Behavior, detector: &DetectorModel) -> Result<Behavior> {
    let eta = detector.efficiency;
    let bin = detector.bin_outcome;
    let mut out = std::collections::BTreeMap::new();
    for context in behavior.contexts() {
        let alphabet = behavior.outcome_alphabet(context);
        if !alphabet.contains(&bin) {
            return Err(Error::InvalidOutcome(bin));
        }
        let table = behavior.context_table(context).expect("context listed");
        let mut binned: std::collections::BTreeMap<(Outcome, Outcome), f64> =
            std::collections::BTreeMap::new();
        for (&(a, b), &p) in table {
            *binned.entry((a, b)).or_insert(0.0) += eta * eta * p;
            *binned.entry((a, bin)).or_insert(0.0) += eta * (1.0 - eta) * p;
            *binned.entry((bin, b)).or_insert(0.0) += (1.0 - eta) * eta * p;
        }
        *binned.entry((bin, bin)).or_insert(0.0) += (1.0 - eta) * (1.0 - eta);
        out.insert(context, binned);
    }
    Behavior::new(out)
}

/// How the `L` contexts are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContextSampling {
    /// Protocol mode: `L` distinct contexts.
    WithoutReplacement,
    /// Analysis mode: `L` i.i.d. draws, matching the variance bound used by
    /// the Chebyshev plan.
    WithReplacement,
}

/// Draws `L` context indices from `0..M`, uniformly.
pub fn sample_contexts(
    num_contexts: u64,
    draws: u64,
    mode: ContextSampling,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<u64>> {
    if num_contexts == 0 || draws == 0 {
        return Err(Error::domain("need at least one context and one draw"));
    }
    match mode {
        ContextSampling::WithoutReplacement => {
            if draws > num_contexts {
                return Err(Error::SampleTooLarge {
                    requested: draws,
                    available: num_contexts,
                });
            }
            Ok(
                rand::seq::index::sample(rng, num_contexts as usize, draws as usize)
                    .into_iter()
                    .map(|i| i as u64)
                    .collect(),
            )
        }
        ContextSampling::WithReplacement => Ok((0..draws)
            .map(|_| rng.gen_range(0..num_contexts))
            .collect()),
    }
}

/// Draws contexts of an orthogonality graph according to its (uniform)
/// context distribution.
pub fn sample_graph_contexts(
    distribution: &ContextDistribution,
    draws: u64,
    mode: ContextSampling,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(u32, u32)>> {
    let indices = sample_contexts(distribution.len() as u64, draws, mode, rng)?;
    Ok(indices
        .into_iter()
        .map(|i| distribution.contexts()[i as usize])
        .collect())
}

/// Outcome of a single protocol run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    /// Subset average of the single-draw estimators.
    pub y: f64,
    /// Exact Bell value of the binned behavior the trial sampled from.
    pub beta_true: f64,
    /// Whether `|Y - beta_true| < epsilon` of the plan.
    pub within_epsilon: bool,
    /// Whether the certification rule fired.
    pub certified: bool,
    pub contexts_used: u64,
    /// Rounds per context; zero in exact-estimation mode.
    pub rounds_used: u64,
    pub seed: u64,
    pub stream: u64,
}

/// Runs one seeded trial of the subset protocol. The per-context estimates
/// are exact when the plan carries no round plan, otherwise each chosen
/// context is estimated from `K` multinomial rounds.
pub fn run_trial(
    inequality: &BellInequality,
    behavior: &Behavior,
    detector: &DetectorModel,
    plan: &SamplingPlan,
    mode: ContextSampling,
    seed: u64,
    stream: u64,
) -> Result<TrialResult> {
    let binned = simulate_detector(behavior, detector)?;
    let beta_true = inequality.evaluate(&binned)?;
    trial_on_binned(inequality, &binned, beta_true, plan, mode, seed, stream)
}

fn trial_on_binned(
    inequality: &BellInequality,
    binned: &Behavior,
    beta_true: f64,
    plan: &SamplingPlan,
    mode: ContextSampling,
    seed: u64,
    stream: u64,
) -> Result<TrialResult> {
    let contexts: Vec<_> = inequality.contexts().collect();
    let m = contexts.len() as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let chosen = sample_contexts(m, plan.contexts_required, mode, &mut rng)?;

    // Exact mode reads the same M values over and over; compute them once.
    let exact_terms = match plan.rounds {
        None => Some(
            contexts
                .iter()
                .map(|&c| inequality.context_term(binned, c).map(|cv| cv.value))
                .collect::<Result<Vec<f64>>>()?,
        ),
        Some(_) => None,
    };

    let mut sum = 0.0;
    for &index in &chosen {
        let term = match (&exact_terms, plan.rounds) {
            (Some(terms), _) => terms[index as usize],
            (None, Some(round_plan)) => estimate_term_by_rounds(
                inequality,
                binned,
                contexts[index as usize],
                round_plan.rounds,
                &mut rng,
            )?,
            (None, None) => unreachable!("exact terms exist when no round plan is set"),
        };
        sum += m as f64 * term;
    }
    let y = sum / chosen.len() as f64;
    Ok(TrialResult {
        y,
        beta_true,
        within_epsilon: (y - beta_true).abs() < plan.epsilon,
        certified: certify(y, plan.epsilon, inequality.local_bound())
            == Certification::ViolationCertified,
        contexts_used: chosen.len() as u64,
        rounds_used: plan.rounds.map(|r| r.rounds).unwrap_or(0),
        seed,
        stream,
    })
}

/// Estimates one context term as the average coefficient of `rounds`
/// outcomes drawn from the context's joint distribution.
fn estimate_term_by_rounds(
    inequality: &BellInequality,
    behavior: &Behavior,
    context: crate::bell::Context,
    rounds: u64,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let table = behavior
        .context_table(context)
        .ok_or(Error::MissingContext(context))?;
    let outcomes: Vec<((Outcome, Outcome), f64)> = table.iter().map(|(&k, &p)| (k, p)).collect();
    let mut cumulative = Vec::with_capacity(outcomes.len());
    let mut acc = 0.0;
    for &(_, p) in &outcomes {
        acc += p;
        cumulative.push(acc);
    }
    let coeffs = inequality
        .context_coefficients(context)
        .ok_or(Error::UnknownContext(context))?;
    let coeff_of = |a: Outcome, b: Outcome| -> f64 {
        coeffs
            .iter()
            .find(|&&(ca, cb, _)| ca == a && cb == b)
            .map(|&(_, _, c)| c)
            .unwrap_or(0.0)
    };
    let mut sum = 0.0;
    for _ in 0..rounds {
        let u: f64 = rng.gen::<f64>() * acc;
        let idx = cumulative.partition_point(|&c| c <= u).min(outcomes.len() - 1);
        let (a, b) = outcomes[idx].0;
        sum += coeff_of(a, b);
    }
    Ok(sum / rounds as f64)
}

/// Aggregate of a batch of trials against the plan's `(epsilon, delta)`
/// guarantee. The acceptance bound allows three binomial standard deviations
/// of slack on top of `delta`, since `delta` bounds the failure rate rather
/// than equalling it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageReport {
    pub trials: u64,
    pub failures: u64,
    pub failure_rate: f64,
    pub delta: f64,
    /// `delta + 3*sqrt(delta/trials)`.
    pub bound: f64,
    pub within_bound: bool,
}

/// Minimum batch size for a coverage experiment.
pub const MIN_COVERAGE_TRIALS: u64 = 1000;

/// Runs `trials` independent seeded trials in parallel and reports the
/// empirical rate of `|Y - beta| >= epsilon`.
pub fn coverage_experiment(
    inequality: &BellInequality,
    behavior: &Behavior,
    detector: &DetectorModel,
    plan: &SamplingPlan,
    mode: ContextSampling,
    trials: u64,
    base_seed: u64,
) -> Result<CoverageReport> {
    if trials < MIN_COVERAGE_TRIALS {
        return Err(Error::domain(format!(
            "coverage experiment needs at least {MIN_COVERAGE_TRIALS} trials, got {trials}"
        )));
    }
    let binned = simulate_detector(behavior, detector)?;
    let beta_true = inequality.evaluate(&binned)?;
    let failures = (0..trials)
        .into_par_iter()
        .map(|stream| {
            trial_on_binned(inequality, &binned, beta_true, plan, mode, base_seed, stream)
                .map(|t| u64::from(!t.within_epsilon))
        })
        .try_reduce(|| 0u64, |a, b| Ok(a + b))?;
    let failure_rate = failures as f64 / trials as f64;
    let bound = plan.delta + 3.0 * (plan.delta / trials as f64).sqrt();
    Ok(CoverageReport {
        trials,
        failures,
        failure_rate,
        delta: plan.delta,
        bound,
        within_bound: failure_rate <= bound,
    })
}
