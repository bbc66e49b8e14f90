//! Planning and validation of loophole-free Bell tests that evaluate only a
//! randomly chosen fraction of the measurement contexts.
//!
//! The crate answers three questions about a bipartite Bell experiment:
//!
//! * How many contexts `L` (out of `M`) must be sampled so that the subset
//!   average certifies a Bell violation with error `epsilon` and failure
//!   probability `delta`? ([`planner`])
//! * For the penalized n-product CHSH family and for graph-theoretic Bell
//!   inequalities, how do the required context fraction and the minimum
//!   detection efficiency trade off? ([`pnp`], [`graph`])
//! * Do the concentration guarantees actually hold when the protocol is run?
//!   ([`montecarlo`] runs seeded trials and checks empirical coverage.)
//!
//! [`bell`] holds the generic Bell-functional machinery and [`catalog`] the
//! serialized constants for inequality families whose graphs are too large to
//! store explicitly.

// Negated comparisons are deliberate throughout: `!(x > 0.0)` also rejects
// NaN, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bell;
pub mod catalog;
pub mod error;
pub mod graph;
pub mod montecarlo;
pub mod planner;
pub mod pnp;

pub use bell::{Behavior, BellInequality, Context, ContextValue};
pub use error::{Error, Result};
pub use planner::{Certification, SamplingPlan, SubsetEstimate};
