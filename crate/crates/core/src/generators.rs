//! Seeded random graphs for tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Planted-partition graph: `n` nodes in `k` contiguous blocks of near-equal
/// size, each pair joined with probability `p_in` inside a block and `p_out`
/// across blocks. Returns the graph and the block of every node.
pub fn planted_partition(n: usize, k: usize, p_in: f64, p_out: f64, seed: u64) -> Result<(Graph, Vec<usize>)> {
    if k == 0 || k > n {
        return Err(Error::Input(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    for p in [p_in, p_out] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Input(format!("probability {p} outside [0, 1]")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let block: Vec<usize> = (0..n).map(|i| i * k / n).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if block[u] == block[v] { p_in } else { p_out };
            if rng.gen_bool(p) {
                edges.push((u, v, 1.0));
            }
        }
    }
    Ok((Graph::from_edge_list(n, &edges)?, block))
}

/// Connected unit-weight graph: a random recursive tree plus every other pair
/// with probability `p`.
pub fn random_connected(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if n < 2 || !(0.0..=1.0).contains(&p) {
        return Err(Error::Input(format!("need n >= 2 and p in [0, 1], got n = {n}, p = {p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parent: Vec<usize> = (1..n).map(|v| rng.gen_range(0..v)).collect();
    let mut edges = Vec::new();
    for v in 1..n {
        for u in 0..v {
            if parent[v - 1] == u || rng.gen_bool(p) {
                edges.push((u, v, 1.0));
            }
        }
    }
    Graph::from_edge_list(n, &edges)
}

/// Writes `graph` as an edge list with labels `1..=n`.
pub fn to_edge_list(graph: &Graph) -> String {
    graph
        .edges()
        .map(|(u, v, w)| if w == 1.0 { format!("{} {}\n", u + 1, v + 1) } else { format!("{} {} {w}\n", u + 1, v + 1) })
        .collect()
}
