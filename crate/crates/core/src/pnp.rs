//! The penalized n-product CHSH family.
//!
//! Taking n parallel copies of CHSH and adding a marginal-consistency penalty
//! `kappa*(A + B)` keeps the local bound at `3^n` while the quantum value
//! grows as `(2 + sqrt(2))^n`. With detector efficiency `eta` and no-clicks
//! binned to outcome 0 on the silent side, the observed value has the closed
//! form
//!
//! ```text
//! beta(n, eta, V) = eta^2 * Q(V)^n + eta*(1 - eta)*(A^n + B^n) + (1 - eta)^2 * 3^n
//! ```
//!
//! where `Q(V) = 2 + sqrt(2)*V` and `A = B = 2` are the one-sided values of a
//! single copy under uniform marginals. Everything downstream (required
//! context fraction, minimum efficiency for a given fraction, smallest n at
//! which a strict subset suffices) is derived from this form together with
//! the Chebyshev planner.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Search cap for [`min_n_for_subset`].
pub const MAX_COPIES_SCAN: u32 = 64;

/// Largest number of copies for which marginal tables are materialized.
pub const MAX_MARGINAL_COPIES: u32 = 8;

/// Bisection tolerance for efficiency inversions.
const ETA_TOL: f64 = 1e-9;

/// Single-copy constants of the CHSH building block at visibility `V`:
/// the quantum value `Q(V)`, the one-sided (partner binned to 0) values, and
/// the local and algebraic bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleCopy {
    pub quantum: f64,
    pub alice_marginal: f64,
    pub bob_marginal: f64,
    pub local: f64,
    pub algebraic: f64,
}

/// Single-copy values for the noisy CHSH-optimal behavior.
///
/// `Q(V)` interpolates linearly between 2 and `2 + sqrt(2)`. The one-sided
/// values are visibility-independent: with the partner binned to outcome 0,
/// each context contributes `p(a = x*y | x) = 1/2`, so the four contexts sum
/// to 2 on either side.
pub fn single_copy_values(visibility: f64) -> Result<SingleCopy> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::domain(format!(
            "visibility must lie in [0, 1], got {visibility}"
        )));
    }
    Ok(SingleCopy {
        quantum: 2.0 + std::f64::consts::SQRT_2 * visibility,
        alice_marginal: 2.0,
        bob_marginal: 2.0,
        local: 3.0,
        algebraic: 4.0,
    })
}

/// Penalty constant `kappa = 2^(n-1) * (sigma^n - c^n)`.
///
/// The n-copy algebraic bound is taken as `sigma^n`; for CHSH
/// (`sigma = 4, c = 3`) this makes `kappa` positive and exponentially large,
/// which is why the penalty sum must stay tiny for a violation to survive.
pub fn penalty_kappa(copies: u32, sigma: f64, c: f64) -> Result<f64> {
    if copies == 0 {
        return Err(Error::domain("need at least one copy"));
    }
    if sigma < c {
        return Err(Error::domain(format!(
            "algebraic bound {sigma} must be at least the local bound {c}"
        )));
    }
    let n = copies as i32;
    Ok(2f64.powi(n - 1) * (sigma.powi(n) - c.powi(n)))
}

/// Observed value of the n-copy CHSH product under detector efficiency `eta`
/// and visibility `V`, with no-clicks binned to outcome 0.
pub fn pnp_quantum_value(copies: u32, eta: f64, visibility: f64) -> Result<f64> {
    if copies == 0 {
        return Err(Error::domain("need at least one copy"));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::domain(format!(
            "efficiency must lie in [0, 1], got {eta}"
        )));
    }
    let sc = single_copy_values(visibility)?;
    let n = copies as i32;
    Ok(eta * eta * sc.quantum.powi(n)
        + eta * (1.0 - eta) * (sc.alice_marginal.powi(n) + sc.bob_marginal.powi(n))
        + (1.0 - eta) * (1.0 - eta) * sc.local.powi(n))
}

/// Fraction of the `4^n` contexts needed for a loophole-free violation:
/// `nu = beta_eff / (eps^2 * delta)` with `beta_eff` the penalized observed
/// value and `eps = beta_eff - 3^n` the full violation margin.
///
/// The returned value may exceed 1, meaning that even the full context set
/// does not meet the target under the Chebyshev bound; callers treat that as
/// infeasible.
pub fn fraction_required(
    copies: u32,
    eta: f64,
    visibility: f64,
    delta: f64,
    penalty: f64,
) -> Result<f64> {
    fraction_required_with_safety(copies, eta, visibility, delta, penalty, 1.0)
}

/// [`fraction_required`] with the error target shrunk by `safety` in
/// `(0, 1]`; `safety = 1` spends the entire margin on statistics.
pub fn fraction_required_with_safety(
    copies: u32,
    eta: f64,
    visibility: f64,
    delta: f64,
    penalty: f64,
    safety: f64,
) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if !(penalty >= 0.0) || !penalty.is_finite() {
        return Err(Error::domain(format!(
            "penalty must be nonnegative, got {penalty}"
        )));
    }
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::domain(format!(
            "safety factor must lie in (0, 1], got {safety}"
        )));
    }
    let local = 3f64.powi(copies as i32);
    let beta_eff = pnp_quantum_value(copies, eta, visibility)?
        - penalty_kappa(copies, 4.0, 3.0)? * penalty;
    let margin = beta_eff - local;
    if margin <= 0.0 {
        return Err(Error::NoViolation {
            beta_eff,
            local_bound: local,
        });
    }
    let eps = margin * safety;
    Ok(beta_eff / (eps * eps * delta))
}

/// Detection efficiency below which the binned value no longer exceeds the
/// local bound, i.e. the threshold available when every context is measured
/// exactly. Solves `beta(n, eta, V) = 3^n` in closed form; the observed value
/// is quadratic in `eta` with `beta(0) = 3^n`, so the nonzero root is the
/// threshold.
pub fn critical_efficiency(copies: u32, visibility: f64) -> Result<f64> {
    if copies == 0 {
        return Err(Error::domain("need at least one copy"));
    }
    let sc = single_copy_values(visibility)?;
    let n = copies as i32;
    let marginal_sum = sc.alice_marginal.powi(n) + sc.bob_marginal.powi(n);
    let denom = sc.quantum.powi(n) + sc.local.powi(n) - marginal_sum;
    let eta = (2.0 * sc.local.powi(n) - marginal_sum) / denom;
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Infeasible(format!(
            "no violation below unit efficiency for n = {copies}, V = {visibility}"
        )));
    }
    Ok(eta)
}

/// Minimum detection efficiency at which a fraction `nu` of the contexts
/// suffices for a loophole-free violation.
///
/// For `nu < 1` this is the smallest `eta` with
/// `fraction_required(n, eta, V, delta, 0) <= nu`, found by bisection to
/// 1e-9 (the fraction is strictly decreasing in `eta` on the violating
/// region, but the three powers of `eta` admit no clean inverse). At
/// `nu = 1` every context is measured and the subset average reproduces the
/// exact value, so no statistics term applies and the threshold is
/// [`critical_efficiency`].
pub fn min_efficiency(copies: u32, nu: f64, visibility: f64, delta: f64) -> Result<f64> {
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::domain(format!(
            "fraction must lie in (0, 1], got {nu}"
        )));
    }
    if nu == 1.0 {
        return critical_efficiency(copies, visibility);
    }
    let at_unit = fraction_required(copies, 1.0, visibility, delta, 0.0)?;
    if at_unit > nu {
        return Err(Error::Infeasible(format!(
            "even eta = 1 needs fraction {at_unit:.6e} > {nu:.6e} for n = {copies}"
        )));
    }
    // fraction_required is undefined at or below the critical efficiency and
    // decreases monotonically above it, so bisect on [crit, 1].
    let mut lo = critical_efficiency(copies, visibility)?;
    let mut hi = 1.0;
    while hi - lo > ETA_TOL {
        let mid = 0.5 * (lo + hi);
        match fraction_required(copies, mid, visibility, delta, 0.0) {
            Ok(f) if f <= nu => hi = mid,
            _ => lo = mid,
        }
    }
    Ok(hi)
}

/// Smallest number of copies at which a strict subset of contexts suffices
/// at unit efficiency: the first n with
/// `fraction_required(n, 1, V, delta, 0) < 1`, scanned up to
/// [`MAX_COPIES_SCAN`].
pub fn min_n_for_subset(visibility: f64, delta: f64) -> Result<u32> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    // Validate visibility once up front so a domain error is not misreported
    // as "not found".
    single_copy_values(visibility)?;
    for n in 1..=MAX_COPIES_SCAN {
        match fraction_required(n, 1.0, visibility, delta, 0.0) {
            Ok(nu) if nu < 1.0 => return Ok(n),
            Ok(_) => continue,
            Err(Error::NoViolation { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NotFound {
        cap: MAX_COPIES_SCAN,
    })
}

/// Per-slot single-party marginals of an n-copy behavior, indexed by the
/// full setting vector (bit-encoded, one bit per copy). Entry `[i][a]` of a
/// vector's table is `p(a_i = a | x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalTables {
    copies: u32,
    alice: BTreeMap<u64, Vec<[f64; 2]>>,
    bob: BTreeMap<u64, Vec<[f64; 2]>>,
}

impl MarginalTables {
    /// Validates that both parties cover every setting vector of length
    /// `copies` and that each slot's outcome probabilities form a valid
    /// marginal.
    pub fn new(
        copies: u32,
        alice: BTreeMap<u64, Vec<[f64; 2]>>,
        bob: BTreeMap<u64, Vec<[f64; 2]>>,
    ) -> Result<Self> {
        if copies == 0 {
            return Err(Error::domain("need at least one copy"));
        }
        if copies > MAX_MARGINAL_COPIES {
            return Err(Error::domain(format!(
                "marginal tables limited to {MAX_MARGINAL_COPIES} copies"
            )));
        }
        let vectors = 1u64 << copies;
        for (party, table) in [("alice", &alice), ("bob", &bob)] {
            for x in 0..vectors {
                let slots = table.get(&x).ok_or_else(|| {
                    Error::IncompleteTable(format!("{party} lacks setting vector {x:#b}"))
                })?;
                if slots.len() != copies as usize {
                    return Err(Error::IncompleteTable(format!(
                        "{party} vector {x:#b} has {} slots, expected {copies}",
                        slots.len()
                    )));
                }
                for (i, slot) in slots.iter().enumerate() {
                    let sum: f64 = slot.iter().sum();
                    if slot.iter().any(|&p| !(0.0..=1.0).contains(&p)) || sum > 1.0 + 1e-9 {
                        return Err(Error::IncompleteTable(format!(
                            "{party} vector {x:#b} slot {i} is not a marginal: {slot:?}"
                        )));
                    }
                }
            }
        }
        Ok(MarginalTables { copies, alice, bob })
    }

    /// Product-form tables: the same slot marginal for every copy and every
    /// setting vector. The penalty sum of such tables is exactly zero.
    pub fn from_product(copies: u32, alice_slot: [f64; 2], bob_slot: [f64; 2]) -> Result<Self> {
        let vectors = 1u64 << copies.min(63);
        let alice = (0..vectors)
            .map(|x| (x, vec![alice_slot; copies as usize]))
            .collect();
        let bob = (0..vectors)
            .map(|x| (x, vec![bob_slot; copies as usize]))
            .collect();
        Self::new(copies, alice, bob)
    }

    pub fn copies(&self) -> u32 {
        self.copies
    }
}

/// Total penalty `A + B`: for each slot i and each unordered pair of setting
/// vectors agreeing on slot i, the absolute difference of the slot-i
/// marginal of outcome 0 (the two outcomes differ by the same amount, so one
/// representative term per comparison).
pub fn penalty_sum(marginals: &MarginalTables) -> Result<f64> {
    let n = marginals.copies;
    let vectors = 1u64 << n;
    let mut total = 0.0;
    for table in [&marginals.alice, &marginals.bob] {
        for i in 0..n {
            for x in 0..vectors {
                for xp in (x + 1)..vectors {
                    if (x >> i) & 1 != (xp >> i) & 1 {
                        continue;
                    }
                    let p = table[&x][i as usize][0];
                    let pp = table[&xp][i as usize][0];
                    total += (p - pp).abs();
                }
            }
        }
    }
    Ok(total)
}
