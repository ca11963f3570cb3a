//! Reference algorithms used to check the sampler: Louvain, exhaustive
//! modularity maximization and an empirical stationary-law check.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{Chain, EngineConfig};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hierarchy::aggregate;
use crate::modularity::modularity;
use crate::partition::Coloration;
use crate::proposals::ProposalFamily;

/// Largest graph accepted by [`brute_force_best`].
pub const BRUTE_FORCE_MAX_NODES: usize = 12;
/// Largest graph accepted by [`stationary_check`].
pub const STATIONARY_MAX_NODES: usize = 6;

/// Greedy local moving followed by aggregation, repeated until a pass moves
/// no node. Node visit order is shuffled with `seed`.
pub fn louvain(graph: &Graph, seed: u64) -> Result<(Coloration, f64)> {
    if graph.total_weight() <= 0.0 {
        return Err(Error::Domain("cannot run louvain on a graph without edges".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut membership: Vec<usize> = (0..graph.node_count()).collect();
    let mut current = graph.clone();
    loop {
        let (labels, moved) = local_moving(&current, &mut rng);
        if !moved {
            break;
        }
        let coloration = Coloration::from_labels(&current, &labels)?;
        let agg = aggregate(&current, &coloration);
        for m in membership.iter_mut() {
            *m = agg.upmap[*m];
        }
        if agg.graph.node_count() == current.node_count() {
            break;
        }
        current = agg.graph;
    }
    let coloration = Coloration::from_labels(graph, &membership)?;
    let q = modularity(graph, &coloration)?;
    Ok((coloration, q))
}

/// Sweeps until no node improves its gain `k_{i,c} − K_c k_i / 2m`.
fn local_moving(graph: &Graph, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
    let n = graph.node_count();
    let two_m = 2.0 * graph.total_weight();
    let mut label: Vec<usize> = (0..n).collect();
    let mut total: Vec<f64> = graph.degrees().to_vec();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut weight_to = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut moved_any = false;
    loop {
        let mut moved = false;
        for &i in &order {
            let k = graph.k(i);
            let own = label[i];
            for &(j, w) in graph.neighbors(i) {
                if j == i {
                    continue;
                }
                let c = label[j];
                if weight_to[c] == 0.0 {
                    touched.push(c);
                }
                weight_to[c] += w;
            }
            total[own] -= k;
            let gain = |c: usize, wt: &[f64]| wt[c] - total[c] * k / two_m;
            let mut best = own;
            let mut best_gain = gain(own, &weight_to);
            for &c in &touched {
                let g = gain(c, &weight_to);
                if g > best_gain + 1e-12 {
                    best = c;
                    best_gain = g;
                }
            }
            total[best] += k;
            if best != own {
                label[i] = best;
                moved = true;
            }
            for c in touched.drain(..) {
                weight_to[c] = 0.0;
            }
        }
        if !moved {
            break;
        }
        moved_any = true;
    }
    (label, moved_any)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForce {
    pub modularity: f64,
    /// Restricted-growth labels of one maximizer.
    pub labels: Vec<usize>,
    /// Number of set partitions examined.
    pub partitions: u64,
}

/// Exhaustive search over all set partitions of at most
/// [`BRUTE_FORCE_MAX_NODES`] nodes.
pub fn brute_force_best(graph: &Graph) -> Result<BruteForce> {
    let n = graph.node_count();
    if n > BRUTE_FORCE_MAX_NODES {
        return Err(Error::TooLarge {
            nodes: n,
            max: BRUTE_FORCE_MAX_NODES,
        });
    }
    if graph.total_weight() <= 0.0 {
        return Err(Error::Domain("modularity is undefined for a graph without edges".into()));
    }
    let mut best = BruteForce {
        modularity: f64::NEG_INFINITY,
        labels: Vec::new(),
        partitions: 0,
    };
    for_each_partition(graph, |labels, q| {
        best.partitions += 1;
        if q > best.modularity + 1e-12 {
            best.modularity = q;
            best.labels = labels.to_vec();
        }
    });
    Ok(best)
}

/// Visits every set partition of the nodes as restricted-growth labels,
/// together with its modularity. Block statistics are maintained incrementally
/// along the depth-first enumeration.
pub fn for_each_partition<F: FnMut(&[usize], f64)>(graph: &Graph, mut visit: F) {
    let n = graph.node_count();
    let two_m = 2.0 * graph.total_weight();
    let mut labels = vec![0usize; n];
    let mut internal = vec![0.0; n];
    let mut degree = vec![0.0; n];
    if n == 0 {
        visit(&labels, 0.0);
        return;
    }
    fn rec<F: FnMut(&[usize], f64)>(
        graph: &Graph,
        two_m: f64,
        i: usize,
        blocks: usize,
        labels: &mut Vec<usize>,
        internal: &mut Vec<f64>,
        degree: &mut Vec<f64>,
        visit: &mut F,
    ) {
        let n = graph.node_count();
        if i == n {
            let q: f64 = (0..blocks)
                .map(|b| internal[b] / two_m - (degree[b] / two_m).powi(2))
                .sum();
            visit(labels, q);
            return;
        }
        for b in 0..=blocks.min(n - 1) {
            let mut added = 0.0;
            for &(j, w) in graph.neighbors(i) {
                if j < i && labels[j] == b {
                    added += 2.0 * w;
                } else if j == i {
                    added += w;
                }
            }
            labels[i] = b;
            internal[b] += added;
            degree[b] += graph.k(i);
            let next = if b == blocks { blocks + 1 } else { blocks };
            rec(graph, two_m, i + 1, next, labels, internal, degree, visit);
            internal[b] -= added;
            degree[b] -= graph.k(i);
        }
    }
    rec(graph, two_m, 0, 0, &mut labels, &mut internal, &mut degree, &mut visit);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionFrequency {
    pub labels: Vec<usize>,
    pub modularity: f64,
    pub target: f64,
    pub empirical: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryReport {
    pub tv_distance: f64,
    pub samples: u64,
    pub partitions: Vec<PartitionFrequency>,
    /// Set when fewer than 100 visits are expected for the least likely partition.
    pub undersampled: bool,
}

/// Runs a flat chain from singletons and compares its post-burn-in visit
/// frequencies with `exp(λQ)/Z` over all partitions.
pub fn stationary_check(graph: &Graph, config: &EngineConfig, steps: u64, burn_in: u64) -> Result<StationaryReport> {
    let n = graph.node_count();
    if n > STATIONARY_MAX_NODES {
        return Err(Error::TooLarge {
            nodes: n,
            max: STATIONARY_MAX_NODES,
        });
    }
    if config.proposal == ProposalFamily::Hierarchical {
        return Err(Error::Input("the stationarity check needs a flat proposal family".into()));
    }
    if config.annealing.is_some() {
        return Err(Error::Input("the stationarity check needs a fixed lambda".into()));
    }
    if graph.total_weight() <= 0.0 {
        return Err(Error::Domain("modularity is undefined for a graph without edges".into()));
    }

    let mut index: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut partitions = Vec::new();
    for_each_partition(graph, |labels, q| {
        index.insert(labels.to_vec(), partitions.len());
        partitions.push(PartitionFrequency {
            labels: labels.to_vec(),
            modularity: q,
            target: 0.0,
            empirical: 0.0,
        });
    });
    let top = partitions.iter().map(|p| p.modularity).fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = partitions
        .iter()
        .map(|p| (config.lambda * (p.modularity - top)).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    for (p, w) in partitions.iter_mut().zip(&weights) {
        p.target = w / z;
    }

    let mut chain = Chain::new(graph.clone(), config)?;
    chain.run(burn_in)?;
    let mut counts = vec![0u64; partitions.len()];
    let mut labels = Vec::with_capacity(n);
    for _ in 0..steps {
        chain.step()?;
        canonical_into(chain.state().levels()[0].coloration.assignment(), &mut labels);
        counts[index[&labels]] += 1;
    }
    let mut tv = 0.0;
    for (p, &c) in partitions.iter_mut().zip(&counts) {
        p.empirical = if steps == 0 { 0.0 } else { c as f64 / steps as f64 };
        tv += (p.empirical - p.target).abs();
    }
    let min_target = partitions.iter().map(|p| p.target).fold(f64::INFINITY, f64::min);
    Ok(StationaryReport {
        tv_distance: 0.5 * tv,
        samples: steps,
        undersampled: (steps as f64) * min_target < 100.0,
        partitions,
    })
}

fn canonical_into<T: PartialEq + Copy>(assignment: &[T], out: &mut Vec<usize>) {
    out.clear();
    let mut seen: Vec<T> = Vec::new();
    for a in assignment {
        let label = match seen.iter().position(|s| s == a) {
            Some(p) => p,
            None => {
                seen.push(*a);
                seen.len() - 1
            }
        };
        out.push(label);
    }
}
