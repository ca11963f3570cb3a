//! The family of aggregated graphs `(G_l, C_l)` and its maintenance.
//!
//! Every community of `C_l` is represented by exactly one super-node of
//! `G_{l+1}`. A super-node loop carries the ordered-pair internal weight of its
//! community (twice the internal edge weight plus member loops), which keeps
//! degrees, total weight and modularity identical at every level.
//!
//! Levels are indexed from 0 (the base graph) to `level_count() - 1` (the top).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphEdit, NodeId, WEIGHT_EPS};
use crate::partition::{Coloration, CommunityId, Target};

#[derive(Debug, Clone)]
pub struct Level {
    pub graph: Graph,
    pub coloration: Coloration,
}

/// Result of contracting every community of a coloration into one node.
#[derive(Debug, Clone)]
pub struct Aggregation {
    pub graph: Graph,
    /// Node of the input graph -> super-node.
    pub upmap: Vec<NodeId>,
    /// Super-node -> the community it contracts.
    pub communities: Vec<CommunityId>,
}

/// Contracts each community of `coloration` into a super-node. Super-nodes are
/// numbered by first appearance of their community in node order.
pub fn aggregate(graph: &Graph, coloration: &Coloration) -> Aggregation {
    let mut index: BTreeMap<CommunityId, NodeId> = BTreeMap::new();
    let mut communities = Vec::new();
    let upmap: Vec<NodeId> = coloration
        .assignment()
        .iter()
        .map(|c| {
            *index.entry(*c).or_insert_with(|| {
                communities.push(*c);
                communities.len() - 1
            })
        })
        .collect();
    let entries: Vec<(NodeId, NodeId, f64)> = graph
        .edges()
        .map(|(i, j, w)| {
            let (si, sj) = (upmap[i], upmap[j]);
            if si == sj && i != j {
                (si, sj, 2.0 * w)
            } else {
                (si, sj, w)
            }
        })
        .collect();
    let graph = Graph::from_edge_list(communities.len(), &entries)
        .expect("aggregated weights are positive");
    Aggregation {
        graph,
        upmap,
        communities,
    }
}

#[derive(Debug, Clone)]
pub struct HierarchyState {
    levels: Vec<Level>,
    /// `supernode_of[l]`: community of `C_l` -> node of `G_{l+1}`.
    supernode_of: Vec<BTreeMap<CommunityId, NodeId>>,
    /// `source_community[l][s]`: the community of `C_l` contracted into node `s` of `G_{l+1}`.
    source_community: Vec<Vec<CommunityId>>,
}

impl HierarchyState {
    /// `levels` levels, singleton colorations everywhere, so every `G_{l+1}`
    /// is a copy of `G_l`.
    pub fn cold_start(graph: Graph, levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::Input("a hierarchy needs at least one level".into()));
        }
        let n = graph.node_count();
        let labels: Vec<Vec<usize>> = vec![(0..n).collect(); levels];
        Self::from_labels(graph, &labels)
    }

    /// Builds a hierarchy from one label vector per level. `labels[0]` colors
    /// the base graph; `labels[l]` colors the super-nodes of `G_l`, which are
    /// numbered by first appearance of their community at level `l - 1`.
    pub fn from_labels(graph: Graph, labels: &[Vec<usize>]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Input("a hierarchy needs at least one level".into()));
        }
        let mut levels = Vec::with_capacity(labels.len());
        let mut supernode_of = Vec::new();
        let mut source_community = Vec::new();
        let mut current = graph;
        for (l, level_labels) in labels.iter().enumerate() {
            let coloration = Coloration::from_labels(&current, level_labels)?;
            let next = if l + 1 < labels.len() {
                let agg = aggregate(&current, &coloration);
                supernode_of.push(
                    agg.communities
                        .iter()
                        .enumerate()
                        .map(|(s, c)| (*c, s))
                        .collect(),
                );
                source_community.push(agg.communities);
                Some(agg.graph)
            } else {
                None
            };
            levels.push(Level {
                graph: current,
                coloration,
            });
            match next {
                Some(g) => current = g,
                None => break,
            }
        }
        Ok(HierarchyState {
            levels,
            supernode_of,
            source_community,
        })
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn top(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, l: usize) -> Result<&Level> {
        self.levels.get(l).ok_or(Error::LevelOutOfRange {
            level: l,
            levels: self.levels.len(),
        })
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn base_graph(&self) -> &Graph {
        &self.levels[0].graph
    }

    /// Node of `G_{l+1}` holding node `x` of `G_l`, i.e. `map^{C_l}(x)`.
    #[inline]
    pub fn supernode(&self, l: usize, x: NodeId) -> NodeId {
        self.supernode_of[l][&self.levels[l].coloration.of(x)]
    }

    /// Node of `G_{l+1}` standing for community `c` of `C_l`.
    pub fn supernode_of_community(&self, l: usize, c: CommunityId) -> Option<NodeId> {
        self.supernode_of.get(l)?.get(&c).copied()
    }

    /// `C_{L,l}(x)`: top-level community reached from node `x` of level `l`.
    pub fn top_community(&self, l: usize, x: NodeId) -> CommunityId {
        let mut node = x;
        for k in l..self.top() {
            node = self.supernode(k, node);
        }
        self.levels[self.top()].coloration.of(node)
    }

    /// Base-node partition read through every level.
    pub fn flatten(&self) -> Coloration {
        let base = self.base_graph();
        let labels: Vec<usize> = (0..base.node_count())
            .map(|i| self.top_community(0, i).0 as usize)
            .collect();
        Coloration::from_labels(base, &labels).expect("one label per node")
    }

    /// Applies `Φ(i, target)` to `C_l` and re-maps the moved node at every
    /// upper level: after a join it follows the super-node of its new
    /// community, after a split it gets a fresh super-node that sits alone in
    /// a fresh community at every level above. Returns the community `i` ends
    /// up in at level `l`.
    pub fn apply_move(&mut self, l: usize, i: NodeId, target: Target) -> Result<CommunityId> {
        self.level(l)?;
        let level = &self.levels[l];
        if i >= level.graph.node_count() {
            return Err(Error::UnknownNode(i));
        }
        let source = level.coloration.of(i);
        let identity = match target {
            Target::Join(c) => c == source,
            Target::NewSingleton => level.coloration.size(source) == 1,
        };
        if l == self.top() || identity {
            let level = &mut self.levels[l];
            return level.coloration.apply_move(&level.graph, i, target);
        }

        let from = self.supernode_of[l][&source];
        let level = &mut self.levels[l];
        let dest = level.coloration.apply_move(&level.graph, i, target)?;
        let to = match self.supernode_of[l].get(&dest) {
            Some(&s) => s,
            None => self.push_supernode(l, dest),
        };

        let row = self.levels[l].graph.neighbors(i).to_vec();
        for (y, w) in row {
            if y == i {
                self.add_weight_at(l + 1, from, from, -w)?;
                self.add_weight_at(l + 1, to, to, w)?;
            } else {
                let t = self.supernode(l, y);
                self.add_pair_at(l + 1, from, t, -w)?;
                self.add_pair_at(l + 1, to, t, w)?;
            }
        }
        if !self.levels[l].coloration.is_live(source) {
            self.remove_supernode(l + 1, from)?;
        }
        Ok(dest)
    }

    /// Applies an edit to the base graph and mirrors the weight change between
    /// the images of its endpoints at every upper level. New base nodes enter
    /// each level as fresh singletons. Returns the new node id for `AddNode`.
    pub fn propagate_edit(&mut self, edit: &GraphEdit) -> Result<Option<NodeId>> {
        match *edit {
            GraphEdit::AddEdge { u, v, w } => {
                if !w.is_finite() || w <= 0.0 {
                    return Err(Error::Input(format!("edge weight must be positive, got {w}")));
                }
                while self.base_graph().node_count() <= u.max(v) {
                    self.push_base_node();
                }
                self.add_weight_at(0, u, v, w)?;
                Ok(None)
            }
            GraphEdit::DelEdge { u, v, w } => {
                if !w.is_finite() || w <= 0.0 {
                    return Err(Error::Input(format!("edge weight must be positive, got {w}")));
                }
                let base = self.base_graph();
                for x in [u, v] {
                    if !base.contains(x) {
                        return Err(Error::UnknownNode(x));
                    }
                }
                let stored = base.weight(u, v);
                if stored == 0.0 {
                    return Err(Error::Domain(format!("cannot delete absent edge ({u}, {v})")));
                }
                if w - stored > WEIGHT_EPS * w.max(stored) {
                    return Err(Error::Domain(format!(
                        "removing {w} from edge ({u}, {v}) with weight {stored}"
                    )));
                }
                self.add_weight_at(0, u, v, -w)?;
                Ok(None)
            }
            GraphEdit::AddNode => Ok(Some(self.push_base_node())),
        }
    }

    fn push_base_node(&mut self) -> NodeId {
        let base = &mut self.levels[0];
        let i = base.graph.add_node();
        let c = base.coloration.push_node(&base.graph);
        if self.top() > 0 {
            self.push_supernode(0, c);
        }
        i
    }

    /// Creates the node of `G_{l+1}` for the new community `c` of `C_l`,
    /// recursively up to the top.
    fn push_supernode(&mut self, l: usize, c: CommunityId) -> NodeId {
        let upper = &mut self.levels[l + 1];
        let s = upper.graph.add_node();
        let uc = upper.coloration.push_node(&upper.graph);
        self.source_community[l].push(c);
        self.supernode_of[l].insert(c, s);
        if l + 1 < self.top() {
            self.push_supernode(l + 1, uc);
        }
        s
    }

    /// Removes the (weightless) node `s` of level `k >= 1`, cascading upward
    /// when its community disappears.
    fn remove_supernode(&mut self, k: usize, s: NodeId) -> Result<()> {
        // Shed rounding residue through the regular path so upper levels agree.
        for (j, w) in self.levels[k].graph.neighbors(s).to_vec() {
            self.add_weight_at(k, s, j, -w)?;
        }
        let contracted = self.source_community[k - 1][s];
        self.supernode_of[k - 1].remove(&contracted);

        let level = &mut self.levels[k];
        let removal = level.coloration.swap_remove_node(s);
        let moved = level.graph.swap_remove_node(s);
        debug_assert_eq!(moved, removal.moved);
        self.source_community[k - 1].swap_remove(s);
        if removal.moved.is_some() {
            let c = self.source_community[k - 1][s];
            self.supernode_of[k - 1].insert(c, s);
        }
        if removal.emptied && k < self.top() {
            let up = self.supernode_of[k][&removal.community];
            self.remove_supernode(k + 1, up)?;
        }
        Ok(())
    }

    /// Adds `delta` to the unordered pair `(u, v)` of level `l` using the
    /// ordered-pair convention: a pair collapsing into one node adds twice.
    fn add_pair_at(&mut self, l: usize, u: NodeId, v: NodeId, delta: f64) -> Result<()> {
        if u == v {
            self.add_weight_at(l, u, u, 2.0 * delta)
        } else {
            self.add_weight_at(l, u, v, delta)
        }
    }

    fn add_weight_at(&mut self, l: usize, u: NodeId, v: NodeId, delta: f64) -> Result<()> {
        let level = &mut self.levels[l];
        let before = level.graph.weight(u, v);
        level.graph.add_weight(u, v, delta)?;
        let after = level.graph.weight(u, v);
        level.coloration.sync_weight_change(u, v, before, after);
        let applied = after - before;
        if l < self.top() && applied != 0.0 {
            let (su, sv) = (self.supernode(l, u), self.supernode(l, v));
            if su == sv {
                let mass = if u == v { applied } else { 2.0 * applied };
                self.add_weight_at(l + 1, su, su, mass)?;
            } else {
                self.add_weight_at(l + 1, su, sv, applied)?;
            }
        }
        Ok(())
    }

    /// Recomputes community degrees at every level from the graphs.
    pub fn recompute_degrees(&mut self) {
        for level in &mut self.levels {
            level.coloration.recompute_degrees(&level.graph);
        }
    }

    /// Checks every structural invariant against a from-scratch rebuild.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let m0 = self.base_graph().total_weight();
        for (l, level) in self.levels.iter().enumerate() {
            level
                .coloration
                .check_consistency(&level.graph)
                .map_err(|e| format!("level {l}: {e}"))?;
            let (degrees, m) = level.graph.recomputed_weights();
            for (i, (a, b)) in degrees.iter().zip(level.graph.degrees()).enumerate() {
                if (a - b).abs() > 1e-9 * a.abs().max(1.0) {
                    return Err(format!("level {l}: degree of node {i} is {b}, recomputed {a}"));
                }
            }
            if (m - m0).abs() > 1e-10 * m0.max(1.0) || (level.graph.total_weight() - m0).abs() > 1e-10 * m0.max(1.0) {
                return Err(format!("level {l}: total weight {m} differs from base {m0}"));
            }
            if l == self.top() {
                break;
            }
            let upper = &self.levels[l + 1];
            let agg = aggregate(&level.graph, &level.coloration);
            if agg.graph.node_count() != upper.graph.node_count() {
                return Err(format!(
                    "level {}: {} super-nodes, expected {}",
                    l + 1,
                    upper.graph.node_count(),
                    agg.graph.node_count()
                ));
            }
            if self.supernode_of[l].len() != level.coloration.community_count() {
                return Err(format!("level {l}: super-node map size"));
            }
            let rename: Vec<NodeId> = agg
                .communities
                .iter()
                .map(|c| {
                    self.supernode_of[l]
                        .get(c)
                        .copied()
                        .ok_or_else(|| format!("level {l}: community {c} has no super-node"))
                })
                .collect::<std::result::Result<_, _>>()?;
            for (s, c) in self.source_community[l].iter().enumerate() {
                if self.supernode_of[l].get(c) != Some(&s) {
                    return Err(format!("level {l}: super-node {s} maps back inconsistently"));
                }
            }
            let mut expected_edges = 0;
            for (a, b, w) in agg.graph.edges() {
                expected_edges += 1;
                let got = upper.graph.weight(rename[a], rename[b]);
                if (got - w).abs() > 1e-10 * w.max(1.0) {
                    return Err(format!(
                        "level {}: weight between {} and {} is {got}, expected {w}",
                        l + 1,
                        rename[a],
                        rename[b]
                    ));
                }
            }
            if expected_edges != upper.graph.edge_count() {
                return Err(format!(
                    "level {}: {} stored edges, expected {expected_edges}",
                    l + 1,
                    upper.graph.edge_count()
                ));
            }
        }
        Ok(())
    }
}
