//! Property tests for the algebraic invariants.

use std::collections::BTreeMap;

use proptest::prelude::*;

use bellplan::bell::{Behavior, BellInequality, Context};
use bellplan::graph::{
    context_distribution, graph_bell_value, graph_estimator, independence_number, GraphBehavior,
    OrthogonalityGraph,
};
use bellplan::planner::estimate_from_subset;

/// A random normalized behavior on the four CHSH contexts.
fn chsh_behavior_strategy() -> impl Strategy<Value = Behavior> {
    proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, 4), 4).prop_map(|raw| {
        let mut probs = BTreeMap::new();
        for (idx, weights) in raw.iter().enumerate() {
            let context = Context::new(idx as u32 / 2, idx as u32 % 2);
            let total: f64 = weights.iter().sum::<f64>().max(1e-9);
            let mut table = BTreeMap::new();
            let mut acc = 0.0;
            for (k, w) in weights.iter().enumerate() {
                let p = w / total;
                table.insert(((k as u32 / 2), (k as u32 % 2)), p);
                acc += p;
            }
            // Force exact normalization against rounding.
            if let Some(p) = table.get_mut(&(1, 1)) {
                *p += 1.0 - acc;
            }
            probs.insert(context, table);
        }
        Behavior::new(probs).expect("normalized by construction")
    })
}

proptest! {
    #[test]
    fn additivity_of_context_terms(beh in chsh_behavior_strategy()) {
        let chsh = BellInequality::chsh();
        let total = chsh.evaluate(&beh).unwrap();
        let sum: f64 = chsh
            .context_terms(&beh)
            .unwrap()
            .iter()
            .map(|cv| cv.value)
            .sum();
        prop_assert!((total - sum).abs() <= 1e-10 * total.abs().max(1.0));
    }

    #[test]
    fn linearity_in_the_behavior(
        b1 in chsh_behavior_strategy(),
        b2 in chsh_behavior_strategy(),
        t in 0.0f64..=1.0,
    ) {
        let chsh = BellInequality::chsh();
        let mixed = b1.mix(&b2, t).unwrap();
        let lhs = chsh.evaluate(&mixed).unwrap();
        let rhs = t * chsh.evaluate(&b1).unwrap() + (1.0 - t) * chsh.evaluate(&b2).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10);
    }

    #[test]
    fn noisy_quantum_behavior_is_valid_and_linear(v in 0.0f64..=1.0) {
        // Construction validates normalization and nonnegativity internally.
        let beh = Behavior::chsh_quantum(v).unwrap();
        let beta = BellInequality::chsh().evaluate(&beh).unwrap();
        let expected = 2.0 + ((2.0 + std::f64::consts::SQRT_2) - 2.0) * v;
        prop_assert!((beta - expected).abs() <= 1e-12);
    }

    #[test]
    fn single_draw_variance_premise(
        terms in proptest::collection::vec(0.0f64..=1.0, 1..64),
    ) {
        // With every context term in [0, 1], the uniform single-draw
        // estimator X = M*beta_j satisfies Var(X) <= M*beta.
        let m = terms.len() as f64;
        let beta: f64 = terms.iter().sum();
        let second_moment: f64 = terms.iter().map(|b| m * b * b).sum();
        let variance = second_moment - beta * beta;
        prop_assert!(variance <= m * beta + 1e-9);
    }

    #[test]
    fn full_coverage_average_is_exact(
        terms in proptest::collection::vec(0.0f64..=1.0, 1..40),
    ) {
        let values: Vec<_> = terms
            .iter()
            .enumerate()
            .map(|(i, &v)| bellplan::bell::ContextValue {
                context: Context::new(i as u32, i as u32),
                value: v,
            })
            .collect();
        let est = estimate_from_subset(&values, values.len() as u64).unwrap();
        let beta: f64 = terms.iter().sum();
        prop_assert!((est.mean - beta).abs() <= 1e-12 * beta.max(1.0));
    }
}

/// Random graph on up to 12 vertices with the given edge density.
fn graph_strategy() -> impl Strategy<Value = OrthogonalityGraph> {
    (2usize..=12, any::<u64>()).prop_map(|(n, seed)| {
        let mut state = seed | 1;
        let mut edges = Vec::new();
        for i in 0..n as u32 {
            for j in (i + 1)..n as u32 {
                // xorshift as a cheap deterministic coin
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                if state % 100 < 40 {
                    edges.push((i, j));
                }
            }
        }
        OrthogonalityGraph::new(n, edges).unwrap()
    })
}

fn brute_force_mis(graph: &OrthogonalityGraph) -> u32 {
    let n = graph.num_vertices();
    let mut adj = vec![0u64; n];
    for (i, j) in graph.edges() {
        adj[i as usize] |= 1 << j;
        adj[j as usize] |= 1 << i;
    }
    let mut best = 0;
    for set in 0u64..(1 << n) {
        let ok = adj
            .iter()
            .enumerate()
            .all(|(v, &mask)| set & (1 << v) == 0 || mask & set == 0);
        if ok {
            best = best.max(set.count_ones());
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn branch_and_bound_matches_exhaustive(g in graph_strategy()) {
        prop_assert_eq!(independence_number(&g).unwrap(), brute_force_mis(&g));
    }

    #[test]
    fn graph_estimator_is_unbiased(
        g in graph_strategy(),
        raw in proptest::collection::vec(0.0f64..=1.0, 200),
    ) {
        let dist = context_distribution(&g);
        let probs: Vec<_> = dist
            .contexts()
            .iter()
            .enumerate()
            .map(|(k, &c)| (c, raw[k % raw.len()]))
            .collect();
        let behavior = GraphBehavior::new(probs.iter().copied()).unwrap();
        let expectation: f64 = probs
            .iter()
            .map(|&((i, j), p)| {
                dist.probability(i, j) * graph_estimator(&g, i, j, p).unwrap()
            })
            .sum();
        let direct = graph_bell_value(&g, &behavior).unwrap();
        prop_assert!(
            (expectation - direct).abs() <= 1e-10,
            "expectation {} vs direct {}",
            expectation,
            direct
        );
    }
}
