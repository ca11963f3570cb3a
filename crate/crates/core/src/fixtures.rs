//! Small named graphs used by tests, benchmarks and examples.

use crate::graph::Graph;

/// Zachary's karate club as an edge list with labels `1..=34`.
pub const KARATE_EDGE_LIST: &str = include_str!("../fixtures/karate.txt");

/// One unit edge between nodes 0 and 1.
pub fn single_edge() -> Graph {
    Graph::from_edge_list(0, &[(0, 1, 1.0)]).expect("valid")
}

/// Unit-weight triangle.
pub fn k3() -> Graph {
    Graph::from_edge_list(0, &[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]).expect("valid")
}

/// Two unit triangles `{0,1,2}` and `{3,4,5}` bridged by the edge 2-3.
pub fn two_triangles() -> Graph {
    Graph::from_edge_list(0, &two_triangle_edges()).expect("valid")
}

pub fn two_triangle_edges() -> Vec<(usize, usize, f64)> {
    vec![
        (0, 1, 1.0),
        (0, 2, 1.0),
        (1, 2, 1.0),
        (3, 4, 1.0),
        (3, 5, 1.0),
        (4, 5, 1.0),
        (2, 3, 1.0),
    ]
}

/// Star with center 0 and `leaves` unit spokes.
pub fn star(leaves: usize) -> Graph {
    let edges: Vec<_> = (1..=leaves).map(|j| (0, j, 1.0)).collect();
    Graph::from_edge_list(0, &edges).expect("valid")
}

/// Unit path `0 - 1 - ... - (n-1)`.
pub fn path(n: usize) -> Graph {
    let edges: Vec<_> = (1..n).map(|j| (j - 1, j, 1.0)).collect();
    Graph::from_edge_list(n, &edges).expect("valid")
}

/// Karate club with dense ids `0..34` (label `l` becomes node `l - 1`).
pub fn karate_club() -> Graph {
    let edges: Vec<_> = KARATE_EDGE_LIST
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let mut it = l.split_whitespace().map(|x| x.parse::<usize>().expect("fixture"));
            (it.next().unwrap() - 1, it.next().unwrap() - 1, 1.0)
        })
        .collect();
    Graph::from_edge_list(34, &edges).expect("valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn karate_shape() {
        let g = karate_club();
        assert_eq!(g.node_count(), 34);
        assert_eq!(g.edge_count(), 78);
        assert_eq!(g.total_weight(), 78.0);
        assert_eq!(g.degree(33).unwrap(), 17.0);
        assert_eq!(g.degree(0).unwrap(), 16.0);
    }
}
