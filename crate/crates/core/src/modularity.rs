//! Modularity and its local variations.

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::hierarchy::HierarchyState;
use crate::partition::{Coloration, CommunityId, Target};

/// `Q = Σ_c [ w_in(c) / 2m − (k_c / 2m)² ]`, with `w_in(c)` the ordered-pair
/// internal weight of `c`.
pub fn modularity(graph: &Graph, coloration: &Coloration) -> Result<f64> {
    let m = graph.total_weight();
    if m <= 0.0 {
        return Err(Error::Domain("modularity is undefined for a graph without edges".into()));
    }
    let two_m = 2.0 * m;
    let mut internal = 0.0;
    for i in 0..graph.node_count() {
        let ci = coloration.of(i);
        for &(j, w) in graph.neighbors(i) {
            if coloration.of(j) == ci {
                internal += w;
            }
        }
    }
    let spread: f64 = coloration
        .communities()
        .map(|(_, s)| (s.degree / two_m).powi(2))
        .sum();
    Ok(internal / two_m - spread)
}

fn total_weight(graph: &Graph) -> Result<f64> {
    let m = graph.total_weight();
    if m <= 0.0 {
        return Err(Error::Domain("graph has no edges".into()));
    }
    Ok(m)
}

/// Gain of an isolated node `i` joining community `c`:
/// `(1/m)(k_{i,c} − k_i k_c / 2m)`.
pub fn delta_join(graph: &Graph, coloration: &Coloration, i: NodeId, c: CommunityId) -> Result<f64> {
    let source = coloration.community(i)?;
    if coloration.size(source) != 1 {
        return Err(Error::Contract(format!("node {i} is not a singleton")));
    }
    if c == source {
        return Err(Error::Contract(format!("node {i} cannot join its own community")));
    }
    let m = total_weight(graph)?;
    Ok(join_gain(graph, coloration, i, c, m))
}

fn join_gain(graph: &Graph, coloration: &Coloration, i: NodeId, c: CommunityId, m: f64) -> f64 {
    let k_ic = coloration.weight_to(graph, i, c);
    (k_ic - graph.k(i) * coloration.community_degree(c) / (2.0 * m)) / m
}

/// Change when `i` leaves `C(i)` to form a new singleton:
/// `−(1/m)(k_{i,C(i)} − A_ii − (k_i / 2m)(k_{C(i)} − k_i))`. Zero for singletons.
pub fn delta_leave(graph: &Graph, coloration: &Coloration, i: NodeId) -> Result<f64> {
    coloration.community(i)?;
    let m = total_weight(graph)?;
    Ok(leave_gain(graph, coloration, i, m))
}

fn leave_gain(graph: &Graph, coloration: &Coloration, i: NodeId, m: f64) -> f64 {
    let own = coloration.of(i);
    if coloration.size(own) == 1 {
        return 0.0;
    }
    let k = graph.k(i);
    let k_own = coloration.weight_to(graph, i, own);
    -(k_own - graph.self_loop(i) - k / (2.0 * m) * (coloration.community_degree(own) - k)) / m
}

/// `Q(Φ(i, target)) − Q`: a split is `ΔQ_−`; a join is `ΔQ_−` followed by
/// `ΔQ_+` evaluated with `i` already isolated.
pub fn delta_move(graph: &Graph, coloration: &Coloration, i: NodeId, target: Target) -> Result<f64> {
    let own = coloration.community(i)?;
    let m = total_weight(graph)?;
    match target {
        Target::Join(c) if c == own => Ok(0.0),
        Target::Join(c) if !coloration.is_live(c) => Err(Error::DeadCommunity(c)),
        Target::Join(c) => Ok(leave_gain(graph, coloration, i, m) + join_gain(graph, coloration, i, c, m)),
        Target::NewSingleton => Ok(leave_gain(graph, coloration, i, m)),
    }
}

/// Change of the flattened modularity caused by moving node `i` of level `l`.
///
/// At the top level this is [`delta_move`]. Below it, the move relocates the
/// whole weight of `i` from its top-level community to the top-level community
/// of the target (or to a brand-new top-level community on a split). When both
/// top-level communities coincide the flattened partition does not change and
/// the gain is exactly zero.
pub fn delta_hier(hier: &HierarchyState, l: usize, i: NodeId, target: Target) -> Result<f64> {
    let level = hier.level(l)?;
    let (graph, coloration) = (&level.graph, &level.coloration);
    if i >= graph.node_count() {
        return Err(Error::UnknownNode(i));
    }
    if l == hier.top() {
        return delta_move(graph, coloration, i, target);
    }
    let m = total_weight(graph)?;
    let own = coloration.of(i);
    let from = hier.top_community(l, i);
    let to = match target {
        Target::Join(c) if c == own => return Ok(0.0),
        Target::Join(c) => {
            let s = hier
                .supernode_of_community(l, c)
                .ok_or(Error::DeadCommunity(c))?;
            Some(hier.top_community(l + 1, s))
        }
        Target::NewSingleton if coloration.size(own) == 1 => return Ok(0.0),
        Target::NewSingleton => None,
    };
    if to == Some(from) {
        return Ok(0.0);
    }

    let top = &hier.level(hier.top())?.coloration;
    let k = graph.k(i);
    let a_ii = graph.self_loop(i);
    let mut k_from = 0.0;
    let mut k_to = 0.0;
    for &(j, w) in graph.neighbors(i) {
        let tj = hier.top_community(l, j);
        if tj == from {
            k_from += w;
        } else if Some(tj) == to {
            k_to += w;
        }
    }
    let two_m = 2.0 * m;
    let degree_from = top.community_degree(from);
    let degree_to = to.map_or(0.0, |c| top.community_degree(c));
    let leave = -(k_from - k * (degree_from - 0.5 * k) / two_m) / m;
    let join = (k_to + a_ii - k * (degree_to + 0.5 * k) / two_m) / m;
    Ok(leave + join)
}
