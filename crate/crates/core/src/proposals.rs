//! Proposal distributions over single-node moves and their exact forward and
//! backward probabilities.
//!
//! Three families are provided:
//!
//! * **basic**: a node uniform over `V`, then a neighbor `j ≠ i` drawn
//!   proportionally to `A_ij`; the move is `Φ(i, C(j))`.
//! * **improved**: a mixture `α p1 + (1 − α) p2` where `p1` draws `i` and
//!   `j ≠ i` uniformly and `p2` draws `i` uniformly over the frontier and a
//!   foreign community proportionally to `k_{i,c}`. When the frontier is empty
//!   `p2` falls back to `p1`.
//! * **hierarchical**: a level drawn with the level weights, then the improved
//!   proposal on that level's graph and coloration.
//!
//! Probabilities are over moves `(i, target)`, not over resulting colorations;
//! every move has a unique reverse move and detailed balance is enforced
//! pairwise.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::hierarchy::HierarchyState;
use crate::modularity::{delta_hier, delta_move};
use crate::partition::{Coloration, Target};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProposalFamily {
    Basic,
    Improved,
    Hierarchical,
}

/// Frontier size used in the `p2` part of backward probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrontierMode {
    /// `|F^C|` of the current coloration.
    Lagged,
    /// `|F^{C'}|` of the proposed coloration; exact detailed balance.
    Strict,
}

/// Which modularity difference drives acceptance of hierarchical moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaMode {
    /// Change of the flattened (top-level) modularity.
    TopLevel,
    /// Change of `Q(G_l, C_l)` at the proposing level.
    PerLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureParams {
    /// Weight of the uniform part `p1`, in `(0, 1]`.
    pub alpha: f64,
    /// Level weights `α_1..α_L`, non-negative, summing to one.
    pub level_weights: Vec<f64>,
}

impl MixtureParams {
    pub fn new(alpha: f64, level_weights: Vec<f64>) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Input(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        if level_weights.is_empty() || level_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Input("level weights must be non-negative".into()));
        }
        let total: f64 = level_weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Input(format!("level weights sum to {total}, expected 1")));
        }
        Ok(MixtureParams {
            alpha,
            level_weights,
        })
    }

    pub fn uniform(alpha: f64, levels: usize) -> Result<Self> {
        Self::new(alpha, vec![1.0 / levels as f64; levels])
    }
}

/// One proposed move with its cached probabilities and modularity change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Move {
    pub level: usize,
    pub node: NodeId,
    pub target: Target,
    pub forward_prob: f64,
    pub backward_prob: f64,
    pub hastings_ratio: f64,
    pub delta_q: f64,
}

impl Move {
    fn new(level: usize, node: NodeId, target: Target, forward: f64, backward: f64, delta_q: f64) -> Result<Self> {
        Ok(Move {
            level,
            node,
            target,
            forward_prob: forward,
            backward_prob: backward,
            hastings_ratio: hastings_ratio(forward, backward)?,
            delta_q,
        })
    }
}

/// `r = p(C|C') / p(C'|C)`. A zero backward probability gives `r = 0`.
pub fn hastings_ratio(forward: f64, backward: f64) -> Result<f64> {
    if !(forward > 0.0) {
        return Err(Error::Contract(format!("forward probability {forward} is not positive")));
    }
    if backward <= 0.0 {
        return Ok(0.0);
    }
    Ok(backward / forward)
}

/// The move that undoes `target` for node `i`, expressed against the
/// coloration obtained after applying it.
pub fn reverse_target(before: &Coloration, i: NodeId, target: Target) -> Target {
    let own = before.of(i);
    match target {
        Target::Join(_) if before.size(own) == 1 => Target::NewSingleton,
        _ => Target::Join(own),
    }
}

/// Every non-identity move available to node `i`.
pub fn candidate_targets(coloration: &Coloration, i: NodeId) -> Vec<Target> {
    let own = coloration.of(i);
    let mut targets = Vec::new();
    if coloration.size(own) > 1 {
        targets.push(Target::NewSingleton);
    }
    targets.extend(
        coloration
            .communities()
            .filter(|&(c, _)| c != own)
            .map(|(c, _)| Target::Join(c)),
    );
    targets
}

/// Weights seen from node `i`, loops excluded unless noted.
struct Local {
    /// `k^C_{i,C(i)} − A_ii`.
    own: f64,
    /// `k^C_{i,target}`, zero for a split.
    target: f64,
    /// `Σ_{j≠i} A_ij`.
    off_diagonal: f64,
}

fn local(graph: &Graph, coloration: &Coloration, i: NodeId, target: Target) -> Local {
    let own_c = coloration.of(i);
    let mut l = Local {
        own: 0.0,
        target: 0.0,
        off_diagonal: 0.0,
    };
    for &(j, w) in graph.neighbors(i) {
        if j == i {
            continue;
        }
        l.off_diagonal += w;
        let cj = coloration.of(j);
        if cj == own_c {
            l.own += w;
        } else if Target::Join(cj) == target {
            l.target += w;
        }
    }
    l
}

fn check_node(graph: &Graph, coloration: &Coloration, i: NodeId) -> Result<()> {
    if i >= graph.node_count() || i >= coloration.node_count() {
        return Err(Error::UnknownNode(i));
    }
    Ok(())
}

fn is_identity(coloration: &Coloration, i: NodeId, target: Target) -> bool {
    let own = coloration.of(i);
    match target {
        Target::Join(c) => c == own,
        Target::NewSingleton => coloration.size(own) == 1,
    }
}

fn check_target(coloration: &Coloration, target: Target) -> Result<()> {
    match target {
        Target::Join(c) if !coloration.is_live(c) => Err(Error::DeadCommunity(c)),
        _ => Ok(()),
    }
}

// ---- basic proposal ----

/// Draws one move of the basic proposal. Nodes without non-loop edges are
/// redrawn, so `i` is uniform over the linked nodes.
pub fn sample_basic<R: Rng + ?Sized>(graph: &Graph, coloration: &Coloration, rng: &mut R) -> Result<Move> {
    if graph.linked_node_count() == 0 {
        return Err(Error::Domain("the basic proposal needs at least one non-loop edge".into()));
    }
    let n = graph.node_count();
    let i = loop {
        let i = rng.gen_range(0..n);
        if graph.neighbors(i).iter().any(|&(j, _)| j != i) {
            break i;
        }
    };
    let total: f64 = graph.neighbors(i).iter().filter(|&&(j, _)| j != i).map(|&(_, w)| w).sum();
    let mut r = rng.gen::<f64>() * total;
    let mut chosen = None;
    for &(j, w) in graph.neighbors(i) {
        if j == i {
            continue;
        }
        chosen = Some(j);
        if r < w {
            break;
        }
        r -= w;
    }
    let j = chosen.expect("linked node has a neighbor");
    let target = if coloration.of(j) == coloration.of(i) {
        Target::NewSingleton
    } else {
        Target::Join(coloration.of(j))
    };
    let forward = prob_basic(graph, coloration, i, target)?;
    let backward = prob_basic_reverse(graph, coloration, i, target)?;
    let delta = delta_move(graph, coloration, i, target)?;
    Move::new(0, i, target, forward, backward, delta)
}

/// Forward probability of the basic proposal: `k_{i,c} / ((k_i − A_ii) N)` for a
/// join and `(k_{i,C(i)} − A_ii) / ((k_i − A_ii) N)` for a split, with `N`
/// counting nodes that have a non-loop edge.
pub fn prob_basic(graph: &Graph, coloration: &Coloration, i: NodeId, target: Target) -> Result<f64> {
    check_node(graph, coloration, i)?;
    check_target(coloration, target)?;
    let l = local(graph, coloration, i, target);
    if l.off_diagonal <= 0.0 {
        return Err(Error::Domain(format!("node {i} has no non-loop edge")));
    }
    if is_identity(coloration, i, target) {
        return Ok(0.0);
    }
    let norm = l.off_diagonal * graph.linked_node_count() as f64;
    Ok(match target {
        Target::NewSingleton => l.own / norm,
        Target::Join(_) => l.target / norm,
    })
}

/// Probability that the basic proposal undoes the move from the coloration it
/// produces, computed from the current coloration.
pub fn prob_basic_reverse(graph: &Graph, coloration: &Coloration, i: NodeId, target: Target) -> Result<f64> {
    check_node(graph, coloration, i)?;
    check_target(coloration, target)?;
    let l = local(graph, coloration, i, target);
    if l.off_diagonal <= 0.0 {
        return Err(Error::Domain(format!("node {i} has no non-loop edge")));
    }
    if is_identity(coloration, i, target) {
        return Ok(0.0);
    }
    let norm = l.off_diagonal * graph.linked_node_count() as f64;
    let singleton = coloration.size(coloration.of(i)) == 1;
    Ok(if singleton { l.target / norm } else { l.own / norm })
}

// ---- improved proposal ----

/// Draws one move of the improved mixture proposal.
pub fn sample_improved<R: Rng + ?Sized>(
    graph: &Graph,
    coloration: &Coloration,
    alpha: f64,
    mode: FrontierMode,
    rng: &mut R,
) -> Result<Move> {
    let (i, target) = draw_improved(graph, coloration, alpha, rng)?;
    let forward = prob_improved(graph, coloration, alpha, i, target)?;
    let backward = prob_improved_reverse(graph, coloration, alpha, mode, i, target)?;
    let delta = delta_move(graph, coloration, i, target)?;
    Move::new(0, i, target, forward, backward, delta)
}

fn draw_improved<R: Rng + ?Sized>(
    graph: &Graph,
    coloration: &Coloration,
    alpha: f64,
    rng: &mut R,
) -> Result<(NodeId, Target)> {
    let n = graph.node_count();
    if n < 2 {
        return Err(Error::Domain(format!("the improved proposal needs two nodes, graph has {n}")));
    }
    let frontier = coloration.frontier();
    let uniform = rng.gen::<f64>() < alpha || frontier.is_empty();
    if uniform {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let target = if coloration.of(j) == coloration.of(i) {
            Target::NewSingleton
        } else {
            Target::Join(coloration.of(j))
        };
        return Ok((i, target));
    }
    let i = frontier[rng.gen_range(0..frontier.len())];
    let own = coloration.of(i);
    let external: f64 = graph
        .neighbors(i)
        .iter()
        .filter(|&&(j, _)| coloration.of(j) != own)
        .map(|&(_, w)| w)
        .sum();
    let mut r = rng.gen::<f64>() * external;
    let mut chosen = None;
    for &(j, w) in graph.neighbors(i) {
        if coloration.of(j) == own {
            continue;
        }
        chosen = Some(j);
        if r < w {
            break;
        }
        r -= w;
    }
    let j = chosen.expect("frontier node has a foreign neighbor");
    Ok((i, Target::Join(coloration.of(j))))
}

fn uniform_pair_prob(n: usize, count: usize) -> f64 {
    count as f64 / (n as f64 * (n as f64 - 1.0))
}

/// Forward probability of the improved mixture proposal.
pub fn prob_improved(graph: &Graph, coloration: &Coloration, alpha: f64, i: NodeId, target: Target) -> Result<f64> {
    check_node(graph, coloration, i)?;
    check_target(coloration, target)?;
    let n = graph.node_count();
    if n < 2 || is_identity(coloration, i, target) {
        return Ok(0.0);
    }
    let own = coloration.of(i);
    let p1 = match target {
        Target::NewSingleton => uniform_pair_prob(n, coloration.size(own) - 1),
        Target::Join(c) => uniform_pair_prob(n, coloration.size(c)),
    };
    let frontier = coloration.frontier_size();
    let p2 = if frontier == 0 {
        p1
    } else {
        match target {
            Target::NewSingleton => 0.0,
            Target::Join(_) if !coloration.is_frontier(i) => 0.0,
            Target::Join(_) => {
                let l = local(graph, coloration, i, target);
                let external = l.off_diagonal - l.own;
                l.target / (frontier as f64 * external)
            }
        }
    };
    Ok(alpha * p1 + (1.0 - alpha) * p2)
}

/// Probability that the improved proposal undoes the move from the coloration
/// it produces, computed from the current coloration.
pub fn prob_improved_reverse(
    graph: &Graph,
    coloration: &Coloration,
    alpha: f64,
    mode: FrontierMode,
    i: NodeId,
    target: Target,
) -> Result<f64> {
    check_node(graph, coloration, i)?;
    check_target(coloration, target)?;
    let n = graph.node_count();
    if n < 2 || is_identity(coloration, i, target) {
        return Ok(0.0);
    }
    let own = coloration.of(i);
    let singleton = coloration.size(own) == 1;
    let l = local(graph, coloration, i, target);
    let after = coloration.frontier_size_after(graph, i, target);

    if singleton {
        // Reverse is a split out of `target ∪ {i}`, which p2 never proposes.
        let Target::Join(c) = target else {
            unreachable!("identity handled above")
        };
        let p1 = uniform_pair_prob(n, coloration.size(c));
        let p2 = if after == 0 { p1 } else { 0.0 };
        return Ok(alpha * p1 + (1.0 - alpha) * p2);
    }

    // Reverse joins `C(i) \ {i}` again.
    let p1 = uniform_pair_prob(n, coloration.size(own) - 1);
    let p2 = if after == 0 {
        p1
    } else {
        // K^{C'}(i): weight from i to communities other than its new one.
        let external_after = l.off_diagonal - l.target;
        let frontier = match mode {
            FrontierMode::Strict => after,
            FrontierMode::Lagged if coloration.frontier_size() > 0 => coloration.frontier_size(),
            FrontierMode::Lagged => after,
        };
        if external_after > 0.0 {
            l.own / (frontier as f64 * external_after)
        } else {
            0.0
        }
    };
    Ok(alpha * p1 + (1.0 - alpha) * p2)
}

// ---- hierarchical proposal ----

/// Draws a level with the level weights (levels with fewer than two nodes
/// are skipped) and then an improved move on that level. The Hastings ratio
/// is evaluated within the proposing level.
pub fn sample_hierarchical<R: Rng + ?Sized>(
    hier: &HierarchyState,
    params: &MixtureParams,
    frontier_mode: FrontierMode,
    delta_mode: DeltaMode,
    rng: &mut R,
) -> Result<Move> {
    let l = draw_level(hier, &params.level_weights, rng)?;
    let level = hier.level(l)?;
    let (graph, coloration) = (&level.graph, &level.coloration);
    let (i, target) = draw_improved(graph, coloration, params.alpha, rng)?;
    let forward = prob_improved(graph, coloration, params.alpha, i, target)?;
    let backward = prob_improved_reverse(graph, coloration, params.alpha, frontier_mode, i, target)?;
    let delta = match delta_mode {
        DeltaMode::TopLevel => delta_hier(hier, l, i, target)?,
        DeltaMode::PerLevel => delta_move(graph, coloration, i, target)?,
    };
    Move::new(l, i, target, forward, backward, delta)
}

fn draw_level<R: Rng + ?Sized>(hier: &HierarchyState, weights: &[f64], rng: &mut R) -> Result<usize> {
    if weights.len() != hier.level_count() {
        return Err(Error::Input(format!(
            "{} level weights for {} levels",
            weights.len(),
            hier.level_count()
        )));
    }
    let usable: Vec<(usize, f64)> = weights
        .iter()
        .enumerate()
        .filter(|&(l, &w)| w > 0.0 && hier.levels()[l].graph.node_count() >= 2)
        .map(|(l, &w)| (l, w))
        .collect();
    let total: f64 = usable.iter().map(|&(_, w)| w).sum();
    if usable.is_empty() {
        return Err(Error::Domain("no level with positive weight has two nodes".into()));
    }
    if usable.len() == 1 {
        return Ok(usable[0].0);
    }
    let mut r = rng.gen::<f64>() * total;
    for &(l, w) in &usable {
        if r < w {
            return Ok(l);
        }
        r -= w;
    }
    Ok(usable[usable.len() - 1].0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    use crate::fixtures::{k3, single_edge, star, two_triangles};

    const EPS: f64 = 1e-12;

    fn col(g: &Graph, labels: &[usize]) -> Coloration {
        Coloration::from_labels(g, labels).unwrap()
    }

    #[test]
    fn basic_on_k3_singletons() {
        let g = k3();
        let c = Coloration::singletons(&g);
        let t = Target::Join(c.of(1));
        assert!((prob_basic(&g, &c, 0, t).unwrap() - 1.0 / 6.0).abs() < EPS);
        assert!((prob_basic_reverse(&g, &c, 0, t).unwrap() - 1.0 / 6.0).abs() < EPS);
        let f = prob_basic(&g, &c, 0, t).unwrap();
        let b = prob_basic_reverse(&g, &c, 0, t).unwrap();
        assert!((hastings_ratio(f, b).unwrap() - 1.0).abs() < EPS);
    }

    #[test]
    fn basic_on_single_edge_only_splits() {
        let g = single_edge();
        let c = col(&g, &[0, 0]);
        for i in 0..2 {
            assert!((prob_basic(&g, &c, i, Target::NewSingleton).unwrap() - 0.5).abs() < EPS);
        }
    }

    #[test]
    fn basic_on_star() {
        let g = star(3);
        let c = Coloration::singletons(&g);
        let p = prob_basic(&g, &c, 0, Target::Join(c.of(1))).unwrap();
        assert!((p - 1.0 / 12.0).abs() < EPS);
    }

    #[test]
    fn basic_ratio_otherwise_branch() {
        let g = two_triangles();
        let c = col(&g, &[0, 0, 0, 0, 1, 1]);
        let t = Target::Join(c.of(4));
        let f = prob_basic(&g, &c, 3, t).unwrap();
        let b = prob_basic_reverse(&g, &c, 3, t).unwrap();
        // (k_{4,C(4)} − A_44) / k_{4,c} = 1 / 2
        assert!((hastings_ratio(f, b).unwrap() - 0.5).abs() < EPS);
    }

    #[test]
    fn basic_splitting_a_singleton_is_never_proposed() {
        let g = k3();
        let c = Coloration::singletons(&g);
        assert_eq!(prob_basic(&g, &c, 0, Target::NewSingleton).unwrap(), 0.0);
    }

    #[test]
    fn basic_without_edges_is_a_domain_error() {
        let g = Graph::from_edge_list(0, &[(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        let c = Coloration::singletons(&g);
        let mut rng = rand::thread_rng();
        assert!(matches!(sample_basic(&g, &c, &mut rng), Err(Error::Domain(_))));
        assert!(matches!(
            prob_basic(&g, &c, 0, Target::Join(c.of(1))),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn improved_two_triangle_example() {
        let g = two_triangles();
        let c = col(&g, &[0, 0, 0, 1, 1, 1]);
        let t = Target::Join(c.of(3));
        let f = prob_improved(&g, &c, 0.5, 2, t).unwrap();
        assert!((f - 0.30).abs() < EPS);
        let b = prob_improved_reverse(&g, &c, 0.5, FrontierMode::Lagged, 2, t).unwrap();
        assert!((b - (1.0 / 30.0 + 0.25)).abs() < EPS);
        let r = hastings_ratio(f, b).unwrap();
        assert!((r - (1.0 / 30.0 + 0.25) / 0.3).abs() < EPS);
    }

    #[test]
    fn improved_with_empty_frontier_is_uniform() {
        let g = k3();
        let c = col(&g, &[0, 0, 0]);
        let p = prob_improved(&g, &c, 0.5, 0, Target::NewSingleton).unwrap();
        assert!((p - 1.0 / 3.0).abs() < EPS);
    }

    #[test]
    fn improved_alpha_one_is_p1() {
        let g = two_triangles();
        let c = col(&g, &[0, 0, 0, 1, 1, 1]);
        let p = prob_improved(&g, &c, 1.0, 2, Target::Join(c.of(3))).unwrap();
        assert!((p - 3.0 / 30.0).abs() < EPS);
    }

    #[test]
    fn improved_reverse_of_join_from_singleton_has_no_p2_term() {
        let g = two_triangles();
        let c = col(&g, &[0, 0, 1, 2, 2, 2]);
        let t = Target::Join(c.of(0));
        let b = prob_improved_reverse(&g, &c, 0.5, FrontierMode::Strict, 2, t).unwrap();
        assert!((b - 0.5 * 2.0 / 30.0).abs() < EPS);
    }

    #[test]
    fn hierarchical_level_two_example() {
        let h = HierarchyState::from_labels(two_triangles(), &[vec![0, 0, 0, 1, 1, 1], vec![0, 1]])
            .unwrap();
        let top = &h.level(1).unwrap();
        let a = h.supernode(0, 0);
        let b = h.supernode(0, 3);
        let p = prob_improved(&top.graph, &top.coloration, 0.5, a, Target::Join(top.coloration.of(b)))
            .unwrap();
        // p1 = 1/2, p2 = (1/|F|)(1/1) = 1/2 with |F| = 2; the two level-2 moves
        // then carry the whole level mass.
        assert!((0.5 * p - 0.25).abs() < EPS);
    }

    #[test]
    fn hierarchical_degenerate_weights_pick_top_level() {
        let h = HierarchyState::cold_start(two_triangles(), 3).unwrap();
        let params = MixtureParams::new(0.5, vec![0.0, 0.0, 1.0]).unwrap();
        let mut rng = rand::thread_rng();
        for _ in 0..50 {
            let mv = sample_hierarchical(&h, &params, FrontierMode::Strict, DeltaMode::TopLevel, &mut rng)
                .unwrap();
            assert_eq!(mv.level, 2);
        }
    }

    #[test]
    fn ratio_edge_cases() {
        assert_eq!(hastings_ratio(0.2, 0.0).unwrap(), 0.0);
        assert!(matches!(hastings_ratio(0.0, 0.1), Err(Error::Contract(_))));
    }

    #[test]
    fn mixture_params_validation() {
        assert!(MixtureParams::new(0.0, vec![1.0]).is_err());
        assert!(MixtureParams::new(0.5, vec![0.5, 0.4]).is_err());
        assert!(MixtureParams::new(0.5, vec![-0.5, 1.5]).is_err());
        assert!(MixtureParams::uniform(0.5, 3).is_ok());
    }

    mod properties {
        use std::collections::BTreeMap;

        use proptest::prelude::*;

        use super::*;
        use crate::testutil::colored_graph;

        type Key = (NodeId, Target);

        fn target_of(c: &Coloration, i: NodeId, j: NodeId) -> Target {
            if c.of(i) == c.of(j) {
                Target::NewSingleton
            } else {
                Target::Join(c.of(j))
            }
        }

        fn add(map: &mut BTreeMap<String, (Key, f64)>, key: Key, p: f64) {
            map.entry(format!("{key:?}")).or_insert((key, 0.0)).1 += p;
        }

        /// Law of the improved sampler obtained by walking every draw path.
        fn improved_draw_law(g: &Graph, c: &Coloration, alpha: f64) -> BTreeMap<String, (Key, f64)> {
            let n = g.node_count();
            let frontier = c.frontier().to_vec();
            let uniform_mass = if frontier.is_empty() { 1.0 } else { alpha };
            let mut law = BTreeMap::new();
            for i in 0..n {
                for j in (0..n).filter(|&j| j != i) {
                    add(&mut law, (i, target_of(c, i, j)), uniform_mass / (n * (n - 1)) as f64);
                }
            }
            for &i in &frontier {
                let foreign: Vec<_> = g.neighbors(i).iter().filter(|&&(j, _)| c.of(j) != c.of(i)).collect();
                let total: f64 = foreign.iter().map(|&&(_, w)| w).sum();
                for &&(j, w) in &foreign {
                    let p = (1.0 - alpha) / frontier.len() as f64 * w / total;
                    add(&mut law, (i, Target::Join(c.of(j))), p);
                }
            }
            law
        }

        fn basic_draw_law(g: &Graph, c: &Coloration) -> BTreeMap<String, (Key, f64)> {
            let linked = g.linked_node_count() as f64;
            let mut law = BTreeMap::new();
            for i in 0..g.node_count() {
                let total: f64 = g.neighbors(i).iter().filter(|&&(j, _)| j != i).map(|&(_, w)| w).sum();
                for &(j, w) in g.neighbors(i).iter().filter(|&&(j, _)| j != i) {
                    add(&mut law, (i, target_of(c, i, j)), w / (total * linked));
                }
            }
            law
        }

        fn after(g: &Graph, c: &Coloration, i: NodeId, t: Target) -> Coloration {
            let mut next = c.clone();
            next.apply_move(g, i, t).unwrap();
            next
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(300))]

            #[test]
            fn improved_sums_to_one((g, c) in colored_graph(2, 6, 0.5), alpha in 0.05f64..1.0) {
                let mut total = 0.0;
                for i in 0..g.node_count() {
                    for t in candidate_targets(&c, i) {
                        total += prob_improved(&g, &c, alpha, i, t).unwrap();
                    }
                }
                prop_assert!((total - 1.0).abs() <= 1e-12, "total {}", total);
            }

            #[test]
            fn basic_sums_to_one((g, c) in colored_graph(2, 6, 0.5)) {
                prop_assume!(g.linked_node_count() > 0);
                let mut total = 0.0;
                for i in 0..g.node_count() {
                    if g.neighbors(i).iter().all(|&(j, _)| j == i) {
                        continue;
                    }
                    for t in candidate_targets(&c, i) {
                        total += prob_basic(&g, &c, i, t).unwrap();
                    }
                }
                prop_assert!((total - 1.0).abs() <= 1e-12, "total {}", total);
            }

            #[test]
            fn improved_matches_draw_enumeration((g, c) in colored_graph(2, 6, 0.5), alpha in 0.05f64..1.0) {
                for (key, p) in improved_draw_law(&g, &c, alpha).into_values() {
                    let q = prob_improved(&g, &c, alpha, key.0, key.1).unwrap();
                    prop_assert!((p - q).abs() < 1e-12, "{:?}: {} vs {}", key, p, q);
                }
            }

            #[test]
            fn basic_matches_draw_enumeration((g, c) in colored_graph(2, 6, 0.5)) {
                prop_assume!(g.linked_node_count() > 0);
                for (key, p) in basic_draw_law(&g, &c).into_values() {
                    let q = prob_basic(&g, &c, key.0, key.1).unwrap();
                    prop_assert!((p - q).abs() < 1e-12, "{:?}: {} vs {}", key, p, q);
                }
            }

            #[test]
            fn strict_reverse_is_forward_of_reverse_move((g, c) in colored_graph(2, 6, 0.5), alpha in 0.05f64..1.0) {
                for i in 0..g.node_count() {
                    for t in candidate_targets(&c, i) {
                        let next = after(&g, &c, i, t);
                        let back = reverse_target(&c, i, t);
                        let direct = prob_improved(&g, &next, alpha, i, back).unwrap();
                        let closed = prob_improved_reverse(&g, &c, alpha, FrontierMode::Strict, i, t).unwrap();
                        prop_assert!((direct - closed).abs() < 1e-12, "{} {:?}: {} vs {}", i, t, direct, closed);
                    }
                }
            }

            #[test]
            fn basic_reverse_is_forward_of_reverse_move((g, c) in colored_graph(2, 6, 0.5)) {
                for i in 0..g.node_count() {
                    if g.neighbors(i).iter().all(|&(j, _)| j == i) {
                        continue;
                    }
                    for t in candidate_targets(&c, i) {
                        let next = after(&g, &c, i, t);
                        let back = reverse_target(&c, i, t);
                        let direct = prob_basic(&g, &next, i, back).unwrap();
                        let closed = prob_basic_reverse(&g, &c, i, t).unwrap();
                        prop_assert!((direct - closed).abs() < 1e-12);
                    }
                }
            }

            #[test]
            fn reverse_move_restores_partition((g, c) in colored_graph(2, 6, 0.5)) {
                for i in 0..g.node_count() {
                    for t in candidate_targets(&c, i) {
                        let mut next = after(&g, &c, i, t);
                        next.apply_move(&g, i, reverse_target(&c, i, t)).unwrap();
                        prop_assert!(next.same_partition(&c));
                    }
                }
            }

            #[test]
            fn mixture_bound((g, c) in colored_graph(2, 6, 0.5), alpha in 0.05f64..1.0) {
                let n = g.node_count();
                for i in 0..n {
                    for t in candidate_targets(&c, i) {
                        let count = match t {
                            Target::NewSingleton => c.size(c.of(i)) - 1,
                            Target::Join(d) => c.size(d),
                        };
                        let p = prob_improved(&g, &c, alpha, i, t).unwrap();
                        prop_assert!(p >= alpha * uniform_pair_prob(n, count) - 1e-15);
                        prop_assert!(p > 0.0);
                    }
                }
            }

            #[test]
            fn sampled_moves_are_consistent((g, c) in colored_graph(2, 6, 0.5), seed in any::<u64>()) {
                use rand::SeedableRng;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                for mode in [FrontierMode::Lagged, FrontierMode::Strict] {
                    let mv = sample_improved(&g, &c, 0.5, mode, &mut rng).unwrap();
                    prop_assert!(mv.forward_prob > 0.0);
                    prop_assert!(!is_identity(&c, mv.node, mv.target));
                    prop_assert!((mv.hastings_ratio * mv.forward_prob - mv.backward_prob).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn empirical_frequencies_match() {
        use rand::SeedableRng;
        let g = two_triangles();
        let c = col(&g, &[0, 0, 1, 1, 2, 2]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let draws = 200_000;
        let mut counts: BTreeMap<String, (NodeId, Target, usize)> = BTreeMap::new();
        for _ in 0..draws {
            let mv = sample_improved(&g, &c, 0.5, FrontierMode::Strict, &mut rng).unwrap();
            counts.entry(format!("{}{:?}", mv.node, mv.target)).or_insert((mv.node, mv.target, 0)).2 += 1;
        }
        for (i, t, k) in counts.into_values() {
            let p = prob_improved(&g, &c, 0.5, i, t).unwrap();
            let se = (p * (1.0 - p) / draws as f64).sqrt();
            let freq = k as f64 / draws as f64;
            assert!((freq - p).abs() <= 3.0 * se, "{i} {t:?}: {freq} vs {p}");
        }
    }
}
