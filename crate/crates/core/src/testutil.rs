//! Proptest strategies shared by the unit tests.

use proptest::prelude::*;

use crate::graph::Graph;
use crate::partition::Coloration;

const WEIGHTS: [f64; 4] = [0.5, 1.0, 2.0, 3.0];

/// Edge list on `n` nodes; every unordered pair (loops included) is present
/// with probability about `density`.
pub fn edges(n: usize, density: f64) -> impl Strategy<Value = Vec<(usize, usize, f64)>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u..n).map(move |v| (u, v))).collect();
    let len = pairs.len();
    proptest::collection::vec((proptest::bool::weighted(density), 0..WEIGHTS.len()), len).prop_map(
        move |picks| {
            pairs
                .iter()
                .zip(picks)
                .filter(|(_, (keep, _))| *keep)
                .map(|(&(u, v), (_, w))| (u, v, WEIGHTS[w]))
                .collect()
        },
    )
}

/// Graph with `min..=max` nodes and positive total weight.
pub fn graph(min: usize, max: usize, density: f64) -> impl Strategy<Value = Graph> {
    (min..=max)
        .prop_flat_map(move |n| edges(n, density).prop_map(move |e| (n, e)))
        .prop_filter("needs an edge", |(_, e)| !e.is_empty())
        .prop_map(|(n, e)| Graph::from_edge_list(n, &e).expect("valid edges"))
}

/// Labels `0..n` drawn from at most `n` classes.
pub fn labels(n: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(0..n.max(1), n)
}

pub fn colored_graph(min: usize, max: usize, density: f64) -> impl Strategy<Value = (Graph, Coloration)> {
    graph(min, max, density).prop_flat_map(|g| {
        let n = g.node_count();
        labels(n).prop_map(move |l| {
            let c = Coloration::from_labels(&g, &l).expect("one label per node");
            (g.clone(), c)
        })
    })
}
