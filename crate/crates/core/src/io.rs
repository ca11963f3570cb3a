//! Text formats: edge lists, event streams, assignments and JSONL metrics.
//!
//! Node labels are `u64`. Labels found in an edge list get dense ids in
//! ascending label order; labels first seen in an event stream are appended.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::engine::{Event, EventBatch, RunStats};
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphEdit, NodeId};
use crate::partition::Coloration;

/// Bidirectional map between external labels and dense node ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Labels {
    labels: Vec<u64>,
    index: BTreeMap<u64, NodeId>,
}

impl Labels {
    /// Ids `0..n` for the given labels in ascending order.
    pub fn sorted(labels: impl IntoIterator<Item = u64>) -> Self {
        let mut out = Labels::default();
        let set: std::collections::BTreeSet<u64> = labels.into_iter().collect();
        for l in set {
            out.insert(l);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn id(&self, label: u64) -> Option<NodeId> {
        self.index.get(&label).copied()
    }

    pub fn label(&self, id: NodeId) -> u64 {
        self.labels[id]
    }

    /// Id of `label`, appending it when unseen.
    pub fn insert(&mut self, label: u64) -> NodeId {
        if let Some(&id) = self.index.get(&label) {
            return id;
        }
        self.labels.push(label);
        self.index.insert(label, self.labels.len() - 1);
        self.labels.len() - 1
    }
}

#[derive(Debug, Clone)]
pub struct LabeledGraph {
    pub graph: Graph,
    pub labels: Labels,
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(k, raw)| {
        let line = raw.trim();
        (!line.is_empty() && !line.starts_with('#')).then_some((k + 1, line))
    })
}

fn parse_label(token: &str) -> std::result::Result<u64, String> {
    token.parse().map_err(|_| format!("invalid node label {token:?}"))
}

fn parse_weight(token: Option<&str>) -> std::result::Result<f64, String> {
    let Some(token) = token else { return Ok(1.0) };
    let w: f64 = token.parse().map_err(|_| format!("invalid weight {token:?}"))?;
    if !w.is_finite() || w <= 0.0 {
        return Err(format!("weight must be positive and finite, got {token}"));
    }
    Ok(w)
}

/// Parses `u v [w]` lines. `#` lines and blank lines are skipped and repeated
/// edges are summed.
pub fn parse_edge_list(text: &str) -> Result<LabeledGraph> {
    let mut raw = Vec::new();
    for (line, content) in content_lines(text) {
        let err = |message: String| Error::Parse { line, message };
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if !(2..=3).contains(&tokens.len()) {
            return Err(err(format!("expected \"u v [w]\", got {} fields", tokens.len())));
        }
        let u = parse_label(tokens[0]).map_err(err)?;
        let v = parse_label(tokens[1]).map_err(err)?;
        let w = parse_weight(tokens.get(2).copied()).map_err(err)?;
        raw.push((u, v, w));
    }
    let labels = Labels::sorted(raw.iter().flat_map(|&(u, v, _)| [u, v]));
    let entries: Vec<_> = raw
        .iter()
        .map(|&(u, v, w)| (labels.id(u).unwrap(), labels.id(v).unwrap(), w))
        .collect();
    let graph = Graph::from_edge_list(labels.len(), &entries)?;
    Ok(LabeledGraph { graph, labels })
}

/// Parses `t add|del u v [w]` lines into batches sharing `t`. Labels first
/// seen in an `add` are appended to `labels`; a `del` must name known labels.
pub fn parse_event_stream(text: &str, labels: &mut Labels) -> Result<Vec<EventBatch>> {
    let mut batches: Vec<EventBatch> = Vec::new();
    for (line, content) in content_lines(text) {
        let err = |message: String| Error::Stream { line, message };
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if !(4..=5).contains(&tokens.len()) {
            return Err(err(format!("expected \"t add|del u v [w]\", got {} fields", tokens.len())));
        }
        let t: u64 = tokens[0]
            .parse()
            .map_err(|_| err(format!("invalid time step {:?}", tokens[0])))?;
        if let Some(last) = batches.last() {
            if t < last.t {
                return Err(err(format!("time step {t} follows {}", last.t)));
            }
        }
        let u = parse_label(tokens[2]).map_err(err)?;
        let v = parse_label(tokens[3]).map_err(err)?;
        let w = parse_weight(tokens.get(4).copied()).map_err(err)?;
        let edit = match tokens[1] {
            "add" => GraphEdit::AddEdge {
                u: labels.insert(u),
                v: labels.insert(v),
                w,
            },
            "del" => {
                let id = |l: u64| labels.id(l).ok_or_else(|| err(format!("unknown node label {l}")));
                GraphEdit::DelEdge {
                    u: id(u)?,
                    v: id(v)?,
                    w,
                }
            }
            op => return Err(err(format!("unknown operation {op:?}"))),
        };
        let event = Event { line, edit };
        match batches.last_mut() {
            Some(b) if b.t == t => b.events.push(event),
            _ => batches.push(EventBatch { t, events: vec![event] }),
        }
    }
    Ok(batches)
}

/// `label community` lines in ascending label order, communities numbered
/// `1..=K` by first appearance in that order.
pub fn emit_assignment(coloration: &Coloration, labels: &Labels) -> String {
    let mut rows: Vec<(u64, NodeId)> = (0..coloration.node_count()).map(|i| (labels.label(i), i)).collect();
    rows.sort_unstable();
    let mut renumber = BTreeMap::new();
    let mut out = String::new();
    for (label, i) in rows {
        let next = renumber.len() + 1;
        let c = *renumber.entry(coloration.of(i)).or_insert(next);
        out.push_str(&format!("{label} {c}\n"));
    }
    out
}

/// Inverse of [`emit_assignment`]: label -> community number.
pub fn parse_assignment(text: &str) -> Result<BTreeMap<u64, u64>> {
    let mut out = BTreeMap::new();
    for (line, content) in content_lines(text) {
        let err = |message: String| Error::Parse { line, message };
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(err("expected \"node community\"".into()));
        }
        let node = parse_label(tokens[0]).map_err(err)?;
        let c = tokens[1]
            .parse()
            .map_err(|_| err(format!("invalid community {:?}", tokens[1])))?;
        if out.insert(node, c).is_some() {
            return Err(err(format!("node {node} listed twice")));
        }
    }
    Ok(out)
}

/// One JSONL metrics record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    /// Time step; `null` for static runs and the initial run of a stream.
    pub t: Option<u64>,
    pub iterations: u64,
    pub accepted: u64,
    /// Modularity of the best coloration.
    pub modularity: f64,
    pub communities: usize,
    /// Wall time, only when timing was requested.
    pub wall_ms: Option<f64>,
}

impl MetricsRecord {
    pub fn from_stats(t: Option<u64>, stats: &RunStats, timing: bool) -> Self {
        MetricsRecord {
            t,
            iterations: stats.iterations,
            accepted: stats.accepted,
            modularity: stats.best_modularity,
            communities: stats.communities,
            wall_ms: timing.then_some(stats.wall_ms),
        }
    }
}

pub fn emit_metrics(records: &[MetricsRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("plain record") + "\n")
        .collect()
}
