//! Colorations: partitions of the node set with incrementally maintained
//! community sizes, community degrees and the frontier set.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Community identifier. Ids come from a monotone counter and are never reused
/// within one coloration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CommunityId(pub u64);

impl fmt::Display for CommunityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Where a moved node ends up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    Join(CommunityId),
    NewSingleton,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommunityStats {
    pub size: usize,
    /// Sum of member degrees.
    pub degree: f64,
}

const NOT_IN_FRONTIER: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct Coloration {
    assignment: Vec<CommunityId>,
    communities: BTreeMap<CommunityId, CommunityStats>,
    /// Number of distinct neighbors (loops excluded) sitting in another community.
    external: Vec<u32>,
    frontier: Vec<NodeId>,
    frontier_pos: Vec<usize>,
    next_id: u64,
}

/// Summary of a removed node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Removal {
    pub community: CommunityId,
    pub emptied: bool,
    /// Old id of the node that now occupies the removed slot.
    pub moved: Option<NodeId>,
}

impl Coloration {
    /// Every node in its own community.
    pub fn singletons(graph: &Graph) -> Self {
        let labels: Vec<usize> = (0..graph.node_count()).collect();
        Self::from_labels(graph, &labels).expect("one label per node")
    }

    /// Coloration grouping nodes with equal labels. Community ids are assigned
    /// `0, 1, 2, ...` in order of first appearance.
    pub fn from_labels(graph: &Graph, labels: &[usize]) -> Result<Self> {
        let n = graph.node_count();
        if labels.len() != n {
            return Err(Error::Input(format!(
                "expected {n} labels, got {}",
                labels.len()
            )));
        }
        let mut ids: BTreeMap<usize, CommunityId> = BTreeMap::new();
        let mut next_id = 0u64;
        let mut assignment = Vec::with_capacity(n);
        let mut communities = BTreeMap::new();
        for (i, label) in labels.iter().enumerate() {
            let id = *ids.entry(*label).or_insert_with(|| {
                next_id += 1;
                CommunityId(next_id - 1)
            });
            assignment.push(id);
            let stats = communities.entry(id).or_insert(CommunityStats {
                size: 0,
                degree: 0.0,
            });
            stats.size += 1;
            stats.degree += graph.k(i);
        }
        let mut coloration = Coloration {
            assignment,
            communities,
            external: vec![0; n],
            frontier: Vec::new(),
            frontier_pos: vec![NOT_IN_FRONTIER; n],
            next_id,
        };
        for i in 0..n {
            coloration.external[i] = coloration.count_external(graph, i, coloration.assignment[i]);
            coloration.refresh_frontier(i);
        }
        Ok(coloration)
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    /// `C(i)`.
    pub fn community(&self, i: NodeId) -> Result<CommunityId> {
        self.assignment.get(i).copied().ok_or(Error::UnknownNode(i))
    }

    /// Unchecked `C(i)`.
    #[inline]
    pub fn of(&self, i: NodeId) -> CommunityId {
        self.assignment[i]
    }

    pub fn assignment(&self) -> &[CommunityId] {
        &self.assignment
    }

    pub fn community_count(&self) -> usize {
        self.communities.len()
    }

    pub fn communities(&self) -> impl Iterator<Item = (CommunityId, CommunityStats)> + '_ {
        self.communities.iter().map(|(&c, &s)| (c, s))
    }

    pub fn is_live(&self, c: CommunityId) -> bool {
        self.communities.contains_key(&c)
    }

    /// `|c|`, zero for dead ids.
    #[inline]
    pub fn size(&self, c: CommunityId) -> usize {
        self.communities.get(&c).map_or(0, |s| s.size)
    }

    /// `k^C_c`, zero for dead ids.
    #[inline]
    pub fn community_degree(&self, c: CommunityId) -> f64 {
        self.communities.get(&c).map_or(0.0, |s| s.degree)
    }

    pub fn members(&self, c: CommunityId) -> Vec<NodeId> {
        (0..self.node_count())
            .filter(|&i| self.assignment[i] == c)
            .collect()
    }

    pub fn frontier_size(&self) -> usize {
        self.frontier.len()
    }

    pub fn is_frontier(&self, i: NodeId) -> bool {
        self.frontier_pos.get(i).is_some_and(|&p| p != NOT_IN_FRONTIER)
    }

    /// Frontier nodes in an unspecified but deterministic order.
    pub fn frontier(&self) -> &[NodeId] {
        &self.frontier
    }

    /// `k^C_{i,c}`: total weight from `i` into `c`, including `A_ii` when `C(i) = c`.
    pub fn node_to_community_weight(&self, graph: &Graph, i: NodeId, c: CommunityId) -> Result<f64> {
        if i >= self.node_count() || !graph.contains(i) {
            return Err(Error::UnknownNode(i));
        }
        Ok(self.weight_to(graph, i, c))
    }

    #[inline]
    pub(crate) fn weight_to(&self, graph: &Graph, i: NodeId, c: CommunityId) -> f64 {
        graph
            .neighbors(i)
            .iter()
            .filter(|&&(j, _)| self.assignment[j] == c)
            .map(|&(_, w)| w)
            .sum()
    }

    /// Moves `i` to `target`. Joining the current community, or splitting a
    /// node that is already alone, is the identity. Returns the community `i`
    /// ends up in.
    pub fn apply_move(&mut self, graph: &Graph, i: NodeId, target: Target) -> Result<CommunityId> {
        if i >= self.node_count() {
            return Err(Error::UnknownNode(i));
        }
        let source = self.assignment[i];
        let dest = match target {
            Target::Join(c) if c == source => return Ok(source),
            Target::Join(c) if !self.is_live(c) => return Err(Error::DeadCommunity(c)),
            Target::Join(c) => c,
            Target::NewSingleton if self.size(source) == 1 => return Ok(source),
            Target::NewSingleton => {
                let c = CommunityId(self.next_id);
                self.next_id += 1;
                c
            }
        };
        let k = graph.k(i);
        {
            let stats = self.communities.get_mut(&source).expect("source is live");
            stats.size -= 1;
            stats.degree -= k;
            if stats.size == 0 {
                self.communities.remove(&source);
            }
        }
        let stats = self.communities.entry(dest).or_insert(CommunityStats {
            size: 0,
            degree: 0.0,
        });
        stats.size += 1;
        stats.degree += k;
        self.assignment[i] = dest;

        let mut own_external = 0;
        for &(j, _) in graph.neighbors(i) {
            if j == i {
                continue;
            }
            let cj = self.assignment[j];
            if cj == source {
                self.external[j] += 1;
                self.refresh_frontier(j);
            } else if cj == dest {
                self.external[j] -= 1;
                self.refresh_frontier(j);
            }
            if cj != dest {
                own_external += 1;
            }
        }
        self.external[i] = own_external;
        self.refresh_frontier(i);
        Ok(dest)
    }

    /// `|F^{C'}|` for `C' = Φ^C(i, target)`, without mutating.
    pub fn frontier_size_after(&self, graph: &Graph, i: NodeId, target: Target) -> usize {
        let source = self.assignment[i];
        let dest = match target {
            Target::Join(c) if c == source => return self.frontier_size(),
            Target::Join(c) => Some(c),
            Target::NewSingleton if self.size(source) == 1 => return self.frontier_size(),
            Target::NewSingleton => None,
        };
        let mut size = self.frontier_size() as isize;
        let mut own_external = 0u32;
        for &(j, _) in graph.neighbors(i) {
            if j == i {
                continue;
            }
            let cj = self.assignment[j];
            let before = self.external[j];
            let after = if cj == source {
                before + 1
            } else if Some(cj) == dest {
                before - 1
            } else {
                before
            };
            size += (after > 0) as isize - (before > 0) as isize;
            if Some(cj) != dest {
                own_external += 1;
            }
        }
        size += (own_external > 0) as isize - (self.external[i] > 0) as isize;
        size as usize
    }

    /// Appends a node (already added to `graph`) as a fresh singleton.
    pub(crate) fn push_node(&mut self, graph: &Graph) -> CommunityId {
        let i = self.assignment.len();
        let c = CommunityId(self.next_id);
        self.next_id += 1;
        self.assignment.push(c);
        self.communities.insert(
            c,
            CommunityStats {
                size: 1,
                degree: graph.k(i),
            },
        );
        self.external.push(self.count_external(graph, i, c));
        self.frontier_pos.push(NOT_IN_FRONTIER);
        self.refresh_frontier(i);
        c
    }

    /// Removes an isolated node, moving the last node into its slot.
    pub(crate) fn swap_remove_node(&mut self, i: NodeId) -> Removal {
        debug_assert_eq!(self.external[i], 0, "removed node must be isolated");
        let community = self.assignment[i];
        let stats = self.communities.get_mut(&community).expect("live");
        stats.size -= 1;
        let emptied = stats.size == 0;
        if emptied {
            self.communities.remove(&community);
        }
        if self.frontier_pos[i] != NOT_IN_FRONTIER {
            self.frontier_remove(i);
        }
        let last = self.assignment.len() - 1;
        let last_in_frontier = self.frontier_pos[last] != NOT_IN_FRONTIER;
        if last_in_frontier && last != i {
            self.frontier_remove(last);
        }
        self.assignment.swap_remove(i);
        self.external.swap_remove(i);
        self.frontier_pos.swap_remove(i);
        let moved = (last != i).then_some(last);
        if moved.is_some() {
            self.frontier_pos[i] = NOT_IN_FRONTIER;
            if last_in_frontier {
                self.frontier_insert(i);
            }
        }
        Removal {
            community,
            emptied,
            moved,
        }
    }

    /// Accounts for `A_uv` changing from `before` to `after` in the graph.
    pub(crate) fn sync_weight_change(&mut self, u: NodeId, v: NodeId, before: f64, after: f64) {
        let change = after - before;
        let cu = self.assignment[u];
        if let Some(s) = self.communities.get_mut(&cu) {
            s.degree += change;
        }
        if u == v {
            return;
        }
        let cv = self.assignment[v];
        if let Some(s) = self.communities.get_mut(&cv) {
            s.degree += change;
        }
        if cu == cv {
            return;
        }
        if before == 0.0 && after > 0.0 {
            self.external[u] += 1;
            self.external[v] += 1;
        } else if before > 0.0 && after == 0.0 {
            self.external[u] -= 1;
            self.external[v] -= 1;
        }
        self.refresh_frontier(u);
        self.refresh_frontier(v);
    }

    /// Recomputes community degrees from scratch to shed accumulated rounding.
    pub fn recompute_degrees(&mut self, graph: &Graph) {
        for stats in self.communities.values_mut() {
            stats.degree = 0.0;
        }
        for (i, c) in self.assignment.iter().enumerate() {
            self.communities.get_mut(c).expect("live").degree += graph.k(i);
        }
    }

    /// Restricted-growth labels: communities numbered `0, 1, ...` by their
    /// smallest member. Two colorations describe the same partition iff their
    /// canonical labels are equal.
    pub fn canonical_labels(&self) -> Vec<usize> {
        let mut map: BTreeMap<CommunityId, usize> = BTreeMap::new();
        self.assignment
            .iter()
            .map(|c| {
                let next = map.len();
                *map.entry(*c).or_insert(next)
            })
            .collect()
    }

    pub fn same_partition(&self, other: &Coloration) -> bool {
        self.canonical_labels() == other.canonical_labels()
    }

    /// Compares every maintained statistic against a from-scratch recomputation.
    pub fn check_consistency(&self, graph: &Graph) -> std::result::Result<(), String> {
        if graph.node_count() != self.node_count() {
            return Err("node count mismatch".into());
        }
        let fresh = Coloration::from_labels(
            graph,
            &self.assignment.iter().map(|c| c.0 as usize).collect::<Vec<_>>(),
        )
        .map_err(|e| e.to_string())?;
        if fresh.community_count() != self.community_count() {
            return Err("community count mismatch".into());
        }
        for (c, stats) in self.communities() {
            let members = self.members(c);
            if members.len() != stats.size {
                return Err(format!("size of {c}: {} vs {}", stats.size, members.len()));
            }
            let degree: f64 = members.iter().map(|&i| graph.k(i)).sum();
            if (degree - stats.degree).abs() > 1e-9 * degree.abs().max(1.0) {
                return Err(format!("degree of {c}: {} vs {degree}", stats.degree));
            }
        }
        for i in 0..self.node_count() {
            let expected = graph
                .neighbors(i)
                .iter()
                .any(|&(j, _)| self.assignment[j] != self.assignment[i]);
            if expected != self.is_frontier(i) {
                return Err(format!("frontier membership of node {i}"));
            }
            if self.external[i] != fresh.external[i] {
                return Err(format!("external count of node {i}"));
            }
        }
        for (pos, &i) in self.frontier.iter().enumerate() {
            if self.frontier_pos[i] != pos {
                return Err(format!("frontier index of node {i}"));
            }
        }
        Ok(())
    }

    fn count_external(&self, graph: &Graph, i: NodeId, c: CommunityId) -> u32 {
        graph
            .neighbors(i)
            .iter()
            .filter(|&&(j, _)| j != i && self.assignment[j] != c)
            .count() as u32
    }

    fn refresh_frontier(&mut self, i: NodeId) {
        let inside = self.frontier_pos[i] != NOT_IN_FRONTIER;
        let should = self.external[i] > 0;
        if should && !inside {
            self.frontier_insert(i);
        } else if !should && inside {
            self.frontier_remove(i);
        }
    }

    fn frontier_insert(&mut self, i: NodeId) {
        self.frontier_pos[i] = self.frontier.len();
        self.frontier.push(i);
    }

    fn frontier_remove(&mut self, i: NodeId) {
        let pos = self.frontier_pos[i];
        self.frontier.swap_remove(pos);
        if let Some(&moved) = self.frontier.get(pos) {
            self.frontier_pos[moved] = pos;
        }
        self.frontier_pos[i] = NOT_IN_FRONTIER;
    }
}
