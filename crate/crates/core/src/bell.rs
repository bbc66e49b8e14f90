//! Generic bipartite Bell functionals and the behaviors they are evaluated on.
//!
//! A Bell functional is a linear form `beta = sum_{a,b,x,y} c_{a,b}^{x,y}
//! p(a,b|x,y)` over joint conditional probabilities. Each pair of settings
//! `j = (x, y)` is a *context*; the per-context term is
//! `beta_j = sum_{a,b} c_{a,b}^{x,y} p(a,b|j)` and `beta = sum_j beta_j`.
//!
//! Everything here is immutable after construction and evaluation is pure, so
//! the types can be shared freely across threads.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// Absolute tolerance for per-context normalization checks. All behaviors in
/// this crate are built from analytic or rational expressions, so anything
/// looser would hide construction bugs.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Largest number of CHSH copies for which the product inequality is stored
/// as an explicit coefficient table (`4^n` contexts, `2^n` nonzero
/// coefficients each).
pub const MAX_PRODUCT_INEQUALITY_COPIES: u32 = 6;

/// Largest number of CHSH copies for which a product behavior is stored as a
/// dense table (`4^n` contexts with `4^n` outcome pairs each).
pub const MAX_PRODUCT_BEHAVIOR_COPIES: u32 = 4;

pub type Outcome = u32;

/// One pair of local measurement settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Context {
    pub x: u32,
    pub y: u32,
}

impl Context {
    pub fn new(x: u32, y: u32) -> Self {
        Context { x, y }
    }
}

impl std::fmt::Display for Context {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// The value of one context term `beta_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContextValue {
    pub context: Context,
    pub value: f64,
}

/// A bipartite Bell inequality: sparse coefficient tensor plus its local
/// realistic bound `C` and algebraic bound `Sigma`.
#[derive(Debug, Clone, PartialEq)]
pub struct BellInequality {
    /// Nonzero coefficients grouped by context, each entry `(a, b, c)`.
    terms: BTreeMap<Context, Vec<(Outcome, Outcome, f64)>>,
    local_bound: f64,
    algebraic_bound: f64,
}

impl BellInequality {
    /// Builds an inequality from a coefficient list. Contexts are the
    /// distinct `(x, y)` pairs carrying at least one nonzero coefficient.
    pub fn new(
        coefficients: impl IntoIterator<Item = ((Outcome, Outcome, u32, u32), f64)>,
        local_bound: f64,
        algebraic_bound: f64,
    ) -> Result<Self> {
        if local_bound > algebraic_bound {
            return Err(Error::domain(format!(
                "local bound {local_bound} exceeds algebraic bound {algebraic_bound}"
            )));
        }
        let mut terms: BTreeMap<Context, Vec<(Outcome, Outcome, f64)>> = BTreeMap::new();
        for ((a, b, x, y), c) in coefficients {
            if !c.is_finite() {
                return Err(Error::domain("coefficients must be finite"));
            }
            if c != 0.0 {
                terms
                    .entry(Context::new(x, y))
                    .or_default()
                    .push((a, b, c));
            }
        }
        if terms.is_empty() {
            return Err(Error::domain("inequality has no nonzero coefficient"));
        }
        for list in terms.values_mut() {
            list.sort_unstable_by_key(|&(a, b, _)| (a, b));
        }
        Ok(BellInequality {
            terms,
            local_bound,
            algebraic_bound,
        })
    }

    /// The CHSH inequality in probability form: `c_{a,b}^{x,y} = 1` iff
    /// `a xor b = x*y`, with `M = 4`, `C = 3`, `Sigma = 4`.
    pub fn chsh() -> Self {
        Self::chsh_product(1).expect("single-copy CHSH is always constructible")
    }

    /// The n-fold product of CHSH: settings and outcomes are bit vectors
    /// (encoded as integers), the coefficient is the product of the per-copy
    /// CHSH coefficients, `C = 3^n`, `Sigma = 4^n`.
    pub fn chsh_product(copies: u32) -> Result<Self> {
        if copies == 0 {
            return Err(Error::domain("need at least one copy"));
        }
        if copies > MAX_PRODUCT_INEQUALITY_COPIES {
            return Err(Error::domain(format!(
                "product inequality limited to {MAX_PRODUCT_INEQUALITY_COPIES} copies \
                 (use the closed forms in `pnp` beyond that)"
            )));
        }
        let settings = 1u32 << copies;
        let mut coeffs = Vec::new();
        for x in 0..settings {
            for y in 0..settings {
                // For each Alice outcome vector there is exactly one Bob
                // vector with coefficient 1: b_i = a_i xor (x_i and y_i).
                for a in 0..settings {
                    let b = a ^ (x & y);
                    coeffs.push(((a, b, x, y), 1.0));
                }
            }
        }
        Self::new(
            coeffs,
            3f64.powi(copies as i32),
            4f64.powi(copies as i32),
        )
    }

    /// Number of contexts `M`.
    pub fn num_contexts(&self) -> usize {
        self.terms.len()
    }

    pub fn local_bound(&self) -> f64 {
        self.local_bound
    }

    pub fn algebraic_bound(&self) -> f64 {
        self.algebraic_bound
    }

    pub fn contexts(&self) -> impl Iterator<Item = Context> + '_ {
        self.terms.keys().copied()
    }

    pub fn has_context(&self, context: Context) -> bool {
        self.terms.contains_key(&context)
    }

    /// Nonzero coefficients of one context.
    pub fn context_coefficients(&self, context: Context) -> Option<&[(Outcome, Outcome, f64)]> {
        self.terms.get(&context).map(|v| v.as_slice())
    }

    /// Largest coefficient magnitude over all contexts. This bounds the value
    /// a single experimental round can contribute, which is the per-round
    /// range entering the Hoeffding round count.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms
            .values()
            .flat_map(|v| v.iter())
            .map(|&(_, _, c)| c.abs())
            .fold(0.0, f64::max)
    }

    /// `beta = sum_j beta_j` for the given behavior.
    pub fn evaluate(&self, behavior: &Behavior) -> Result<f64> {
        let mut total = 0.0;
        for context in self.contexts() {
            total += self.context_term(behavior, context)?.value;
        }
        Ok(total)
    }

    /// A single term `beta_j = sum_{a,b} c_{a,b}^{x,y} p(a,b|j)`.
    pub fn context_term(&self, behavior: &Behavior, context: Context) -> Result<ContextValue> {
        let coeffs = self
            .terms
            .get(&context)
            .ok_or(Error::UnknownContext(context))?;
        let table = behavior
            .context_table(context)
            .ok_or(Error::MissingContext(context))?;
        let value = coeffs
            .iter()
            .map(|&(a, b, c)| c * table.get(&(a, b)).copied().unwrap_or(0.0))
            .sum();
        Ok(ContextValue { context, value })
    }

    /// All context terms in context order.
    pub fn context_terms(&self, behavior: &Behavior) -> Result<Vec<ContextValue>> {
        self.contexts()
            .map(|j| self.context_term(behavior, j))
            .collect()
    }
}

/// A behavior: the full table of joint conditional probabilities
/// `p(a,b|x,y)`, stored per context. Outcome pairs absent from a table have
/// probability zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Behavior {
    probs: BTreeMap<Context, BTreeMap<(Outcome, Outcome), f64>>,
}

impl Behavior {
    /// Validates nonnegativity and per-context normalization to
    /// [`NORMALIZATION_TOL`].
    pub fn new(probs: BTreeMap<Context, BTreeMap<(Outcome, Outcome), f64>>) -> Result<Self> {
        for (&context, table) in &probs {
            let mut sum = 0.0;
            for (&(a, b), &p) in table {
                if !p.is_finite() || p < 0.0 {
                    return Err(Error::InvalidBehavior {
                        context,
                        reason: format!("p({a},{b}) = {p} is not a probability"),
                    });
                }
                sum += p;
            }
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::InvalidBehavior {
                    context,
                    reason: format!("outcome probabilities sum to {sum}"),
                });
            }
        }
        Ok(Behavior { probs })
    }

    /// The behavior of the CHSH-optimal two-qubit state mixed with white
    /// noise at visibility `v`. Every context term equals
    /// `v*cos^2(pi/8) + (1-v)/2`, all single-party marginals are 1/2, and the
    /// Bell value interpolates linearly between 2 (v = 0) and 2 + sqrt(2)
    /// (v = 1).
    pub fn chsh_quantum(visibility: f64) -> Result<Self> {
        Self::chsh_product_quantum(1, visibility)
    }

    /// n-fold product of the noisy CHSH-optimal behavior, used to exercise
    /// the penalized-product family at desk scale.
    pub fn chsh_product_quantum(copies: u32, visibility: f64) -> Result<Self> {
        if copies == 0 {
            return Err(Error::domain("need at least one copy"));
        }
        if copies > MAX_PRODUCT_BEHAVIOR_COPIES {
            return Err(Error::domain(format!(
                "dense product behavior limited to {MAX_PRODUCT_BEHAVIOR_COPIES} copies"
            )));
        }
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::domain(format!(
                "visibility must lie in [0, 1], got {visibility}"
            )));
        }
        // Single-copy table: the two outcome pairs with a xor b = x*y carry
        // probability win each, the other two lose each. The context term is
        // then 2*win = v*cos^2(pi/8) + (1-v)/2 and the table sums to one.
        let win = visibility * (2.0 + std::f64::consts::SQRT_2) / 8.0 + (1.0 - visibility) / 4.0;
        let lose = visibility * (2.0 - std::f64::consts::SQRT_2) / 8.0 + (1.0 - visibility) / 4.0;

        let settings = 1u32 << copies;
        let outcomes = 1u32 << copies;
        let mut probs = BTreeMap::new();
        for x in 0..settings {
            for y in 0..settings {
                let mut table = BTreeMap::new();
                for a in 0..outcomes {
                    for b in 0..outcomes {
                        let mut p = 1.0;
                        for i in 0..copies {
                            let ai = (a >> i) & 1;
                            let bi = (b >> i) & 1;
                            let xi = (x >> i) & 1;
                            let yi = (y >> i) & 1;
                            p *= if ai ^ bi == (xi & yi) { win } else { lose };
                        }
                        table.insert((a, b), p);
                    }
                }
                probs.insert(Context::new(x, y), table);
            }
        }
        Self::new(probs)
    }

    pub fn contexts(&self) -> impl Iterator<Item = Context> + '_ {
        self.probs.keys().copied()
    }

    pub fn context_table(&self, context: Context) -> Option<&BTreeMap<(Outcome, Outcome), f64>> {
        self.probs.get(&context)
    }

    pub fn prob(&self, context: Context, a: Outcome, b: Outcome) -> f64 {
        self.probs
            .get(&context)
            .and_then(|t| t.get(&(a, b)))
            .copied()
            .unwrap_or(0.0)
    }

    /// Alice's marginal `p(a|x)` within one context.
    pub fn marginal_a(&self, context: Context, a: Outcome) -> f64 {
        self.probs
            .get(&context)
            .map(|t| {
                t.iter()
                    .filter(|&(&(ta, _), _)| ta == a)
                    .map(|(_, &p)| p)
                    .sum()
            })
            .unwrap_or(0.0)
    }

    /// Bob's marginal `p(b|y)` within one context.
    pub fn marginal_b(&self, context: Context, b: Outcome) -> f64 {
        self.probs
            .get(&context)
            .map(|t| {
                t.iter()
                    .filter(|&(&(_, tb), _)| tb == b)
                    .map(|(_, &p)| p)
                    .sum()
            })
            .unwrap_or(0.0)
    }

    /// The outcome alphabet actually used in a context's table.
    pub fn outcome_alphabet(&self, context: Context) -> BTreeSet<Outcome> {
        let mut set = BTreeSet::new();
        if let Some(table) = self.probs.get(&context) {
            for &(a, b) in table.keys() {
                set.insert(a);
                set.insert(b);
            }
        }
        set
    }

    /// Convex mixture `t*self + (1-t)*other` over the shared context set.
    pub fn mix(&self, other: &Behavior, t: f64) -> Result<Behavior> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::domain(format!("mixture weight {t} outside [0, 1]")));
        }
        let mut probs = BTreeMap::new();
        for (&context, table) in &self.probs {
            let other_table = other
                .context_table(context)
                .ok_or(Error::MissingContext(context))?;
            let mut mixed: BTreeMap<(Outcome, Outcome), f64> = BTreeMap::new();
            for (&k, &p) in table {
                *mixed.entry(k).or_insert(0.0) += t * p;
            }
            for (&k, &p) in other_table {
                *mixed.entry(k).or_insert(0.0) += (1.0 - t) * p;
            }
            probs.insert(context, mixed);
        }
        Behavior::new(probs)
    }
}
