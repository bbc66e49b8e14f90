//! Graph-theoretic Bell inequalities.
//!
//! Vertices of an orthogonality graph stand for two-outcome projective
//! measurements available to both parties; edges join orthogonal pairs. The
//! Bell functional rewards agreement on a vertex and penalizes joint clicks
//! across an edge:
//!
//! ```text
//! beta_G = sum_{i in V} p(i,i) - 1/(2*Xi) * sum_{(i,j) in E} [p(i,j) + p(j,i)]
//! ```
//!
//! with `p(i,j)` the probability that both projectors give outcome 1. The
//! local bound is the independence number of the graph and the quantum value
//! is `|V|/xi` (orthogonal rank); both enter the closed-form minimum
//! detection efficiency. Contexts are the `M = |V| + 2|E|` diagonal and
//! ordered-edge pairs; sampling is uniform over them, which makes the signed
//! estimator below unbiased.
//!
//! Graphs too large to store (the catalog families reach `M ~ 10^24`) are
//! handled through [`GraphCatalogEntry`] constants instead; see
//! [`calibrate_from_rows`].

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact-search budget for [`independence_number`].
pub const MAX_EXACT_VERTICES: usize = 64;

/// Relative deviation above which catalog rows are declared inconsistent
/// with the closed-form ratio law.
pub const ROW_CONSISTENCY_TOL: f64 = 0.10;

/// An explicitly stored orthogonality graph plus optional derived constants.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalityGraph {
    num_vertices: usize,
    edges: BTreeSet<(u32, u32)>,
    xi: f64,
    independence: Option<u32>,
    quantum: Option<f64>,
    dimension: Option<u32>,
}

impl OrthogonalityGraph {
    /// Builds a graph from an edge list. Edges are stored as unordered pairs
    /// `(min, max)`; self-loops and out-of-range endpoints are rejected. The
    /// xi number defaults to 1.
    pub fn new(num_vertices: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        if num_vertices == 0 {
            return Err(Error::domain("graph needs at least one vertex"));
        }
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            if i == j {
                return Err(Error::domain(format!("self-loop at vertex {i}")));
            }
            if i as usize >= num_vertices || j as usize >= num_vertices {
                return Err(Error::domain(format!(
                    "edge ({i}, {j}) exceeds vertex count {num_vertices}"
                )));
            }
            set.insert((i.min(j), i.max(j)));
        }
        Ok(OrthogonalityGraph {
            num_vertices,
            edges: set,
            xi: 1.0,
            independence: None,
            quantum: None,
            dimension: None,
        })
    }

    /// An n-cycle, handy as a small test instance.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::domain("cycle needs at least three vertices"));
        }
        Self::new(n, (0..n as u32).map(|i| (i, (i + 1) % n as u32)))
    }

    pub fn with_xi(mut self, xi: f64) -> Result<Self> {
        if !(xi > 0.0) || !xi.is_finite() {
            return Err(Error::domain(format!("xi must be positive, got {xi}")));
        }
        self.xi = xi;
        Ok(self)
    }

    pub fn with_independence(mut self, c: u32) -> Result<Self> {
        if c == 0 || c as usize > self.num_vertices {
            return Err(Error::domain(format!(
                "independence number {c} outside 1..={}",
                self.num_vertices
            )));
        }
        self.independence = Some(c);
        Ok(self)
    }

    pub fn with_quantum(mut self, q: f64) -> Result<Self> {
        if !(q > 0.0) || !q.is_finite() {
            return Err(Error::domain(format!(
                "quantum value must be positive, got {q}"
            )));
        }
        self.quantum = Some(q);
        Ok(self)
    }

    pub fn with_dimension(mut self, d: u32) -> Self {
        self.dimension = Some(d);
        self
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Total number of contexts, `M = |V| + 2|E|`.
    pub fn total_contexts(&self) -> usize {
        self.num_vertices + 2 * self.edges.len()
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn independence(&self) -> Option<u32> {
        self.independence
    }

    pub fn quantum(&self) -> Option<f64> {
        self.quantum
    }

    pub fn dimension(&self) -> Option<u32> {
        self.dimension
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, i: u32, j: u32) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }
}

/// The joint click probabilities a graph Bell test needs: `p(i,i)` for every
/// vertex and `p(i,j)`, `p(j,i)` for every edge.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GraphBehavior {
    probs: std::collections::BTreeMap<(u32, u32), f64>,
}

impl GraphBehavior {
    pub fn new(probs: impl IntoIterator<Item = ((u32, u32), f64)>) -> Result<Self> {
        let mut map = std::collections::BTreeMap::new();
        for ((i, j), p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::domain(format!(
                    "p({i},{j}) = {p} is not a probability"
                )));
            }
            map.insert((i, j), p);
        }
        Ok(GraphBehavior { probs: map })
    }

    pub fn get(&self, i: u32, j: u32) -> Option<f64> {
        self.probs.get(&(i, j)).copied()
    }
}

/// Evaluates `beta_G` for the graph on the given click probabilities.
pub fn graph_bell_value(graph: &OrthogonalityGraph, behavior: &GraphBehavior) -> Result<f64> {
    let mut value = 0.0;
    for i in 0..graph.num_vertices as u32 {
        value += behavior
            .get(i, i)
            .ok_or(Error::MissingProbability { i, j: i })?;
    }
    let edge_weight = 1.0 / (2.0 * graph.xi);
    for (i, j) in graph.edges() {
        let pij = behavior.get(i, j).ok_or(Error::MissingProbability { i, j })?;
        let pji = behavior.get(j, i).ok_or(Error::MissingProbability { i: j, j: i })?;
        value -= edge_weight * (pij + pji);
    }
    Ok(value)
}

/// Exact maximum independent set size by branch and bound.
///
/// Candidate sets are u64 bitmasks, branching on the highest-degree remaining
/// vertex and pruning with a greedy clique-cover bound (any independent set
/// picks at most one vertex per clique). Deterministic regardless of
/// scheduling: the search order is fixed by vertex index.
pub fn independence_number(graph: &OrthogonalityGraph) -> Result<u32> {
    let n = graph.num_vertices;
    if n > MAX_EXACT_VERTICES {
        return Err(Error::GraphTooLarge {
            vertices: n,
            budget: MAX_EXACT_VERTICES,
        });
    }
    let mut adj = vec![0u64; n];
    for (i, j) in graph.edges() {
        adj[i as usize] |= 1 << j;
        adj[j as usize] |= 1 << i;
    }
    let all: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut best = 0u32;
    branch(all, 0, &mut best, &adj);
    Ok(best)
}

fn branch(candidates: u64, size: u32, best: &mut u32, adj: &[u64]) {
    if candidates == 0 {
        *best = (*best).max(size);
        return;
    }
    if size + clique_cover_bound(candidates, adj) <= *best {
        return;
    }
    // Branch on the candidate with the most candidate neighbors; including it
    // removes the most vertices, excluding it is the fallback.
    let mut pick = 0usize;
    let mut pick_deg = -1i32;
    let mut rest = candidates;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let deg = (adj[v] & candidates).count_ones() as i32;
        if deg > pick_deg {
            pick_deg = deg;
            pick = v;
        }
    }
    let bit = 1u64 << pick;
    branch(candidates & !(bit | adj[pick]), size + 1, best, adj);
    branch(candidates & !bit, size, best, adj);
}

/// Greedy clique cover of the candidate set: each vertex joins the first
/// clique it is fully adjacent to, else starts a new one. The number of
/// cliques bounds the independent set size from above.
fn clique_cover_bound(candidates: u64, adj: &[u64]) -> u32 {
    let mut cliques: Vec<u64> = Vec::new();
    let mut rest = candidates;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let bit = 1u64 << v;
        // v joins the first clique all of whose members are its neighbors.
        match cliques.iter_mut().find(|members| **members & adj[v] == **members) {
            Some(members) => *members |= bit,
            None => cliques.push(bit),
        }
    }
    cliques.len() as u32
}

/// The sampling distribution over contexts: uniform weight `1/M` on each of
/// the `M = |V| + 2|E|` diagonal and ordered-edge contexts (so the diagonal
/// block carries total weight `|V|/M` and the edge block `2|E|/M`), and zero
/// on non-edge pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextDistribution {
    contexts: Vec<(u32, u32)>,
    num_vertices: usize,
    num_edges: usize,
}

impl ContextDistribution {
    pub fn contexts(&self) -> &[(u32, u32)] {
        &self.contexts
    }

    pub fn len(&self) -> usize {
        self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }

    /// Probability of one concrete context.
    pub fn probability(&self, i: u32, j: u32) -> f64 {
        if self.contexts.binary_search(&(i, j)).is_ok() {
            1.0 / self.contexts.len() as f64
        } else {
            0.0
        }
    }

    /// Total weight of the diagonal block, `|V|/M`.
    pub fn diagonal_weight(&self) -> f64 {
        self.num_vertices as f64 / self.contexts.len() as f64
    }

    /// Total weight of the edge block, `2|E|/M`.
    pub fn edge_weight(&self) -> f64 {
        2.0 * self.num_edges as f64 / self.contexts.len() as f64
    }
}

pub fn context_distribution(graph: &OrthogonalityGraph) -> ContextDistribution {
    let mut contexts = Vec::with_capacity(graph.total_contexts());
    for i in 0..graph.num_vertices as u32 {
        contexts.push((i, i));
    }
    for (i, j) in graph.edges() {
        contexts.push((i, j));
        contexts.push((j, i));
    }
    contexts.sort_unstable();
    ContextDistribution {
        contexts,
        num_vertices: graph.num_vertices,
        num_edges: graph.edges.len(),
    }
}

/// Single-draw estimator for the context `(i, j)` with observed click
/// probability `beta_ij`: `M*beta` on the diagonal and `-M/(2*Xi) * beta` on
/// ordered edges, so that its expectation under the uniform context
/// distribution is exactly `beta_G`.
pub fn graph_estimator(graph: &OrthogonalityGraph, i: u32, j: u32, beta_ij: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&beta_ij) {
        return Err(Error::domain(format!(
            "beta_ij = {beta_ij} is not a probability"
        )));
    }
    let m = graph.total_contexts() as f64;
    if i == j {
        if (i as usize) < graph.num_vertices {
            Ok(m * beta_ij)
        } else {
            Err(Error::InvalidGraphContext { i, j })
        }
    } else if graph.has_edge(i, j) {
        Ok(-m / (2.0 * graph.xi) * beta_ij)
    } else {
        Err(Error::InvalidGraphContext { i, j })
    }
}

/// Hoeffding bound on the number of contexts to sample:
/// `L = ceil(-ln(delta) * M^4 / (8 * eps^2 * |E|^2 * |V|^2))`, from the
/// extreme values `M/|V|` and `-M/(2|E|)` the signed estimator can take.
pub fn hoeffding_contexts(graph: &OrthogonalityGraph, epsilon: f64, delta: f64) -> Result<u64> {
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
    if graph.num_edges() == 0 {
        return Err(Error::DegenerateGraph);
    }
    let m = graph.total_contexts() as f64;
    let v = graph.num_vertices as f64;
    let e = graph.num_edges() as f64;
    let l = (-delta.ln()) * m.powi(4) / (8.0 * epsilon * epsilon * e * e * v * v);
    Ok(l.ceil() as u64)
}

/// Closed-form minimum detection efficiency for a context fraction `nu`,
/// given the structural counts and the local/quantum values:
///
/// ```text
/// eta_nu = sqrt( (1/Q) * sqrt( -ln(delta) * M^3 / (2*nu*|V|^2*|E|^2) ) + C/Q )
/// ```
///
/// No-clicks are binned to outcome 0, which carries no Bell term, so only
/// `C` and `Q` enter besides the statistics term.
pub fn min_efficiency_from_counts(
    num_vertices: u64,
    num_edges: u64,
    independence: f64,
    quantum: f64,
    nu: f64,
    delta: f64,
) -> Result<f64> {
    if num_vertices == 0 || num_edges == 0 {
        return Err(Error::DegenerateGraph);
    }
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::domain(format!(
            "fraction must lie in (0, 1], got {nu}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if !(quantum > independence) {
        return Err(Error::domain(format!(
            "quantum value {quantum} must exceed local bound {independence}"
        )));
    }
    let v = num_vertices as f64;
    let e = num_edges as f64;
    let m = v + 2.0 * e;
    let stat = ((-delta.ln()) * m.powi(3) / (2.0 * nu * v * v * e * e)).sqrt();
    let eta_sq = stat / quantum + independence / quantum;
    let eta = eta_sq.sqrt();
    if eta > 1.0 {
        return Err(Error::Infeasible(format!(
            "required efficiency {eta:.6} exceeds 1 at fraction {nu:.3e}"
        )));
    }
    Ok(eta)
}

/// Inverse of [`min_efficiency_from_counts`]: the context fraction needed at
/// efficiency `eta`, `nu = -ln(delta) * M^3 / (2*|V|^2*|E|^2*(eta^2*Q - C)^2)`.
/// Values above 1 mean no fraction up to the full set meets the target.
pub fn fraction_from_counts(
    num_vertices: u64,
    num_edges: u64,
    independence: f64,
    quantum: f64,
    eta: f64,
    delta: f64,
) -> Result<f64> {
    if num_vertices == 0 || num_edges == 0 {
        return Err(Error::DegenerateGraph);
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::domain(format!(
            "efficiency must lie in (0, 1], got {eta}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let head = eta * eta * quantum - independence;
    if head <= 0.0 {
        return Err(Error::NoViolation {
            beta_eff: eta * eta * quantum,
            local_bound: independence,
        });
    }
    let v = num_vertices as f64;
    let e = num_edges as f64;
    let m = v + 2.0 * e;
    Ok((-delta.ln()) * m.powi(3) / (2.0 * v * v * e * e * head * head))
}

/// [`min_efficiency_from_counts`] for an explicitly stored graph; requires
/// its independence number and quantum value to be present.
pub fn graph_min_efficiency(graph: &OrthogonalityGraph, nu: f64, delta: f64) -> Result<f64> {
    let c = graph
        .independence
        .ok_or(Error::MissingGraphConstant("independence number"))?;
    let q = graph
        .quantum
        .ok_or(Error::MissingGraphConstant("quantum value"))?;
    min_efficiency_from_counts(
        graph.num_vertices as u64,
        graph.num_edges() as u64,
        c as f64,
        q,
        nu,
        delta,
    )
}

/// One `(eta, nu)` row of a published efficiency/fraction table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyRow {
    pub eta: f64,
    pub nu: f64,
}

/// Catalog entry for an inequality family whose graph is too large to store:
/// the dimension, total context count, critical efficiency and the published
/// `(eta, nu)` rows, plus optional structural constants when known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphCatalogEntry {
    pub name: String,
    pub dimension: u32,
    pub total_contexts: f64,
    pub eta_crit: f64,
    pub rows: Vec<EfficiencyRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjacency: Option<Vec<(u32, u32)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub independence: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantum: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

impl GraphCatalogEntry {
    /// Structural validation used both directly and at catalog load.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::Catalog("entry with empty name".into()));
        }
        if !(self.eta_crit > 0.0 && self.eta_crit <= 1.0) {
            return Err(Error::Catalog(format!(
                "{}: eta_crit {} outside (0, 1]",
                self.name, self.eta_crit
            )));
        }
        if !(self.total_contexts >= 1.0) || !self.total_contexts.is_finite() {
            return Err(Error::Catalog(format!(
                "{}: total_contexts {} invalid",
                self.name, self.total_contexts
            )));
        }
        for w in self.rows.windows(2) {
            if w[1].eta <= w[0].eta || w[1].nu >= w[0].nu {
                return Err(Error::Catalog(format!(
                    "{}: rows must be sorted by eta ascending with nu descending",
                    self.name
                )));
            }
        }
        for row in &self.rows {
            if !(row.eta > 0.0 && row.eta <= 1.0) || !(row.nu > 0.0) || !row.nu.is_finite() {
                return Err(Error::Catalog(format!(
                    "{}: row (eta = {}, nu = {}) out of domain",
                    self.name, row.eta, row.nu
                )));
            }
        }
        if let Some(q) = self.quantum {
            if !q.is_finite() || q <= 0.0 {
                return Err(Error::Catalog(format!(
                    "{}: quantum value {q} out of domain",
                    self.name
                )));
            }
        }
        if let Some(adj) = &self.adjacency {
            let v = self
                .vertices
                .ok_or_else(|| Error::Catalog(format!("{}: adjacency without vertices", self.name)))?;
            let graph = OrthogonalityGraph::new(v as usize, adj.iter().copied())
                .map_err(|e| Error::Catalog(format!("{}: {e}", self.name)))?;
            if let Some(ec) = self.edge_count {
                if graph.num_edges() as u64 != ec {
                    return Err(Error::Catalog(format!(
                        "{}: edge_count {} does not match adjacency ({} edges)",
                        self.name,
                        ec,
                        graph.num_edges()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Rebuilds the explicit graph when the entry carries an adjacency list.
    pub fn to_graph(&self) -> Option<Result<OrthogonalityGraph>> {
        let adj = self.adjacency.as_ref()?;
        let v = self.vertices? as usize;
        let mut graph = match OrthogonalityGraph::new(v, adj.iter().copied()) {
            Ok(g) => g,
            Err(e) => return Some(Err(e)),
        };
        if let Some(c) = self.independence {
            graph = match graph.with_independence(c) {
                Ok(g) => g,
                Err(e) => return Some(Err(e)),
            };
        }
        if let Some(q) = self.quantum {
            graph = match graph.with_quantum(q) {
                Ok(g) => g,
                Err(e) => return Some(Err(e)),
            };
        }
        Some(Ok(graph.with_dimension(self.dimension)))
    }
}

/// Calibration of the closed form against a published table. Squaring the
/// efficiency relation gives `eta^2 = sqrt(G/nu) + C/Q`, so `C/Q` is pinned
/// by the critical efficiency (where the statistics term is negligible for
/// these huge graphs) and the single constant `G` absorbs all structural
/// counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    /// `C/Q`, the squared critical efficiency.
    pub c_over_q: f64,
    /// Statistics constant `G` with `eta^2 = sqrt(G/nu) + C/Q`, fitted to
    /// the first data row exactly.
    pub stat_const: f64,
}

/// Prediction for one catalog row from a calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowPrediction {
    pub eta: f64,
    pub listed_nu: f64,
    pub predicted_nu: f64,
    pub rel_err: f64,
}

/// Fits a [`Calibration`] to the entry's first data row and predicts every
/// remaining row. Does not enforce consistency; see [`calibrate_from_rows`].
pub fn calibration_rows(entry: &GraphCatalogEntry) -> Result<(Calibration, Vec<RowPrediction>)> {
    let first = entry
        .rows
        .first()
        .ok_or_else(|| Error::Catalog(format!("{}: no (eta, nu) rows to calibrate", entry.name)))?;
    let c_over_q = entry.eta_crit * entry.eta_crit;
    let head = first.eta * first.eta - c_over_q;
    if head <= 0.0 {
        return Err(Error::Catalog(format!(
            "{}: first row eta {} does not exceed eta_crit {}",
            entry.name, first.eta, entry.eta_crit
        )));
    }
    let calibration = Calibration {
        c_over_q,
        stat_const: first.nu * head * head,
    };
    let predictions = entry.rows[1..]
        .iter()
        .map(|row| {
            let predicted_nu = calibrated_fraction(&calibration, row.eta)?;
            Ok(RowPrediction {
                eta: row.eta,
                listed_nu: row.nu,
                predicted_nu,
                rel_err: (predicted_nu - row.nu).abs() / row.nu,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((calibration, predictions))
}

/// Calibrates from the first data row and verifies that every remaining row
/// is reproduced within [`ROW_CONSISTENCY_TOL`]; a deviating row signals a
/// misprint or a structural mismatch and is reported as an error.
pub fn calibrate_from_rows(entry: &GraphCatalogEntry) -> Result<Calibration> {
    let (calibration, predictions) = calibration_rows(entry)?;
    for p in predictions {
        if p.rel_err > ROW_CONSISTENCY_TOL {
            return Err(Error::InconsistentRows {
                name: entry.name.clone(),
                eta: p.eta,
                predicted: p.predicted_nu,
                listed: p.listed_nu,
                rel_err: 100.0 * p.rel_err,
            });
        }
    }
    Ok(calibration)
}

/// Fraction predicted by a calibration at efficiency `eta`:
/// `nu = G / (eta^2 - C/Q)^2`.
pub fn calibrated_fraction(calibration: &Calibration, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::domain(format!(
            "efficiency must lie in (0, 1], got {eta}"
        )));
    }
    let head = eta * eta - calibration.c_over_q;
    if head <= 0.0 {
        return Err(Error::Infeasible(format!(
            "eta = {eta} is at or below the critical efficiency"
        )));
    }
    Ok(calibration.stat_const / (head * head))
}
