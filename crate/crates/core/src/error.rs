//! Error type shared by all modules of the crate.

use crate::bell::Context;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A numeric argument is outside its documented domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The behavior does not define probabilities for a context of the
    /// inequality being evaluated.
    #[error("behavior has no table for context ({}, {})", .0.x, .0.y)]
    MissingContext(Context),

    /// The requested context is not part of the inequality.
    #[error("inequality has no context ({}, {})", .0.x, .0.y)]
    UnknownContext(Context),

    /// A probability table fails normalization or nonnegativity.
    #[error("invalid behavior in context ({}, {}): {reason}", context.x, context.y)]
    InvalidBehavior { context: Context, reason: String },

    /// A subset estimate was given the same context twice.
    #[error("duplicate context ({}, {}) in subset", .0.x, .0.y)]
    DuplicateContext(Context),

    #[error("empty input: at least one context value is required")]
    EmptyInput,

    /// The effective Bell value does not exceed the local bound, so no
    /// fraction of contexts can certify a violation.
    #[error("no violation: effective value {beta_eff} does not exceed local bound {local_bound}")]
    NoViolation { beta_eff: f64, local_bound: f64 },

    /// A scan over the number of copies hit its cap without success.
    #[error("no copy count up to {cap} satisfies the requirement")]
    NotFound { cap: u32 },

    /// The requested target cannot be met even at unit detection efficiency.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A marginal table does not cover every setting vector.
    #[error("incomplete marginal table: {0}")]
    IncompleteTable(String),

    /// A graph behavior lacks a required joint probability.
    #[error("missing probability for graph context ({i}, {j})")]
    MissingProbability { i: u32, j: u32 },

    /// The pair (i, j) is neither a diagonal context nor an edge of the graph.
    #[error("({i}, {j}) is not a context of the orthogonality graph")]
    InvalidGraphContext { i: u32, j: u32 },

    /// The graph exceeds the exact-search budget; supply catalog constants.
    #[error("graph with {vertices} vertices exceeds the exact-search budget of {budget}")]
    GraphTooLarge { vertices: usize, budget: usize },

    #[error("degenerate graph: operation requires at least one edge")]
    DegenerateGraph,

    /// An operation needs a graph constant (independence number, quantum
    /// value) that is neither stored nor computable.
    #[error("missing graph constant: {0}")]
    MissingGraphConstant(&'static str),

    /// A catalog row deviates from the calibrated prediction by more than the
    /// consistency threshold.
    #[error(
        "inconsistent catalog rows for {name}: at eta = {eta}, predicted nu = {predicted:.4e} \
         but listed nu = {listed:.4e} ({rel_err:.1}% relative error)"
    )]
    InconsistentRows {
        name: String,
        eta: f64,
        predicted: f64,
        listed: f64,
        rel_err: f64,
    },

    /// The binning outcome is not part of the behavior's outcome alphabet.
    #[error("bin outcome {0} does not appear in the behavior's outcome alphabet")]
    InvalidOutcome(u32),

    /// More distinct contexts were requested than exist.
    #[error("cannot draw {requested} distinct contexts from {available}")]
    SampleTooLarge { requested: u64, available: u64 },

    /// Catalog file failed structural validation.
    #[error("catalog validation failed: {0}")]
    Catalog(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("catalog parse error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
