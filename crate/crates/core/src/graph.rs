//! Weighted undirected graph with self-loops.
//!
//! Nodes are dense indices `0..node_count`. A self-loop of weight `w` is
//! stored once and contributes `w` once to the node degree, so that
//! `m = sum(k_i) / 2` holds with loops counted at half weight in `m`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Relative threshold under which a stored weight is treated as zero.
pub const WEIGHT_EPS: f64 = 1e-12;

/// One local change to a graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GraphEdit {
    AddEdge { u: NodeId, v: NodeId, w: f64 },
    DelEdge { u: NodeId, v: NodeId, w: f64 },
    /// Appends one isolated node.
    AddNode,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Graph {
    /// Per-node neighbor lists sorted by neighbor id. Loops appear once.
    adjacency: Vec<Vec<(NodeId, f64)>>,
    degree: Vec<f64>,
    total_weight: f64,
    /// Number of nodes with at least one non-loop edge.
    linked: usize,
}

impl Graph {
    /// Graph with `n` isolated nodes.
    pub fn with_nodes(n: usize) -> Self {
        Graph {
            adjacency: vec![Vec::new(); n],
            degree: vec![0.0; n],
            total_weight: 0.0,
            linked: 0,
        }
    }

    /// Builds a graph from `(u, v, w)` entries. Duplicate pairs are summed and
    /// `(u, v)` is the same edge as `(v, u)`. The node set is `0..max(n, max id + 1)`,
    /// so isolated nodes can be declared through `n`.
    ///
    /// The result does not depend on the order of `entries`.
    pub fn from_edge_list(n: usize, entries: &[(NodeId, NodeId, f64)]) -> Result<Self> {
        let mut sorted = Vec::with_capacity(entries.len());
        let mut nodes = n;
        for &(u, v, w) in entries {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::Input(format!(
                    "edge ({u}, {v}) has non-positive weight {w}"
                )));
            }
            nodes = nodes.max(u.max(v) + 1);
            sorted.push((u.min(v), u.max(v), w));
        }
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));

        let mut graph = Graph::with_nodes(nodes);
        let mut iter = sorted.into_iter().peekable();
        while let Some((u, v, mut w)) = iter.next() {
            while let Some(&(nu, nv, nw)) = iter.peek() {
                if (nu, nv) != (u, v) {
                    break;
                }
                w += nw;
                iter.next();
            }
            graph.add_weight(u, v, w)?;
        }
        Ok(graph)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn contains(&self, i: NodeId) -> bool {
        i < self.adjacency.len()
    }

    /// Weighted degree `k_i`.
    pub fn degree(&self, i: NodeId) -> Result<f64> {
        self.degree.get(i).copied().ok_or(Error::UnknownNode(i))
    }

    /// Unchecked degree for hot loops.
    #[inline]
    pub fn k(&self, i: NodeId) -> f64 {
        self.degree[i]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degree
    }

    /// `m = sum(k_i) / 2`.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// Neighbors of `i` sorted by id, including `i` itself when it has a loop.
    #[inline]
    pub fn neighbors(&self, i: NodeId) -> &[(NodeId, f64)] {
        &self.adjacency[i]
    }

    pub fn weight(&self, u: NodeId, v: NodeId) -> f64 {
        match self.adjacency.get(u) {
            Some(row) => match row.binary_search_by_key(&v, |&(j, _)| j) {
                Ok(pos) => row[pos].1,
                Err(_) => 0.0,
            },
            None => 0.0,
        }
    }

    /// Loop weight `A_ii`.
    #[inline]
    pub fn self_loop(&self, i: NodeId) -> f64 {
        self.weight(i, i)
    }

    /// Number of nodes having at least one non-loop edge.
    pub fn linked_node_count(&self) -> usize {
        self.linked
    }

    /// Number of stored unordered pairs, loops included.
    pub fn edge_count(&self) -> usize {
        self.adjacency
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().filter(|&&(j, _)| j >= i).count())
            .sum()
    }

    /// Unordered edges `(u, v, w)` with `u <= v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .filter(move |&&(j, _)| j >= i)
                .map(move |&(j, w)| (i, j, w))
        })
    }

    pub fn add_node(&mut self) -> NodeId {
        self.adjacency.push(Vec::new());
        self.degree.push(0.0);
        self.adjacency.len() - 1
    }

    pub fn apply_edit(&mut self, edit: &GraphEdit) -> Result<()> {
        match *edit {
            GraphEdit::AddEdge { u, v, w } => {
                if !w.is_finite() || w <= 0.0 {
                    return Err(Error::Input(format!("edge weight must be positive, got {w}")));
                }
                while self.node_count() <= u.max(v) {
                    self.add_node();
                }
                self.add_weight(u, v, w)
            }
            GraphEdit::DelEdge { u, v, w } => {
                if !w.is_finite() || w <= 0.0 {
                    return Err(Error::Input(format!("edge weight must be positive, got {w}")));
                }
                for x in [u, v] {
                    if !self.contains(x) {
                        return Err(Error::UnknownNode(x));
                    }
                }
                let stored = self.weight(u, v);
                if stored == 0.0 {
                    return Err(Error::Domain(format!("cannot delete absent edge ({u}, {v})")));
                }
                self.add_weight(u, v, -w)
            }
            GraphEdit::AddNode => {
                self.add_node();
                Ok(())
            }
        }
    }

    /// Adds a signed `delta` to `A_uv` (and `A_vu`). Entries that reach zero are
    /// dropped; driving a weight below zero is a domain error and leaves the
    /// graph untouched.
    pub fn add_weight(&mut self, u: NodeId, v: NodeId, delta: f64) -> Result<()> {
        for x in [u, v] {
            if !self.contains(x) {
                return Err(Error::UnknownNode(x));
            }
        }
        let old = self.weight(u, v);
        let new = old + delta;
        let scale = old.abs().max(delta.abs());
        if new < -WEIGHT_EPS * scale {
            return Err(Error::Domain(format!(
                "removing {} from edge ({u}, {v}) with weight {old}",
                -delta
            )));
        }
        let new = if new <= WEIGHT_EPS * scale { 0.0 } else { new };
        let change = new - old;

        self.set_entry(u, v, new);
        if u != v {
            self.set_entry(v, u, new);
            self.degree[u] += change;
            self.degree[v] += change;
            self.total_weight += change;
        } else {
            self.degree[u] += change;
            self.total_weight += change / 2.0;
        }
        for x in [u, v] {
            if self.adjacency[x].is_empty() {
                self.degree[x] = 0.0;
            }
        }
        Ok(())
    }

    fn set_entry(&mut self, u: NodeId, v: NodeId, w: f64) {
        let was_linked = self.has_foreign_neighbor(u);
        let row = &mut self.adjacency[u];
        match row.binary_search_by_key(&v, |&(j, _)| j) {
            Ok(pos) if w == 0.0 => {
                row.remove(pos);
            }
            Ok(pos) => row[pos].1 = w,
            Err(pos) if w != 0.0 => row.insert(pos, (v, w)),
            Err(_) => {}
        }
        let now_linked = self.has_foreign_neighbor(u);
        match (was_linked, now_linked) {
            (false, true) => self.linked += 1,
            (true, false) => self.linked -= 1,
            _ => {}
        }
    }

    fn has_foreign_neighbor(&self, u: NodeId) -> bool {
        self.adjacency[u].iter().any(|&(j, _)| j != u)
    }

    /// Removes node `i` together with any remaining incident weight, moving
    /// the last node into slot `i`. Returns the old id of the moved node, if any.
    pub(crate) fn swap_remove_node(&mut self, i: NodeId) -> Option<NodeId> {
        let incident: Vec<(NodeId, f64)> = self.adjacency[i].clone();
        for (j, w) in incident {
            self.add_weight(i, j, -w)
                .expect("removing stored weight cannot underflow");
        }
        let last = self.adjacency.len() - 1;
        self.adjacency.swap_remove(i);
        self.degree.swap_remove(i);
        if last == i {
            return None;
        }
        // Rename `last` to `i` in every neighbor list.
        let row = self.adjacency[i].clone();
        for (j, _) in &row {
            let j = if *j == last { i } else { *j };
            if j == i {
                continue;
            }
            let nrow = &mut self.adjacency[j];
            let pos = nrow
                .binary_search_by_key(&last, |&(x, _)| x)
                .expect("symmetric adjacency");
            let (_, w) = nrow.remove(pos);
            let ins = nrow.binary_search_by_key(&i, |&(x, _)| x).unwrap_err();
            nrow.insert(ins, (i, w));
        }
        let own = &mut self.adjacency[i];
        for entry in own.iter_mut() {
            if entry.0 == last {
                entry.0 = i;
            }
        }
        own.sort_by_key(|&(j, _)| j);
        Some(last)
    }

    /// Degrees and `m` recomputed from the stored adjacency.
    pub fn recomputed_weights(&self) -> (Vec<f64>, f64) {
        let degrees: Vec<f64> = self
            .adjacency
            .iter()
            .map(|row| row.iter().map(|&(_, w)| w).sum())
            .collect();
        let m = degrees.iter().sum::<f64>() / 2.0;
        (degrees, m)
    }
}
