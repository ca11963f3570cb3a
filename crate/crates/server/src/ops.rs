//! Synchronous request handlers. Each takes a protocol request and returns the
//! protocol response, so they can run on a blocking thread or be called directly.

use mhcd_core::baseline::BRUTE_FORCE_MAX_NODES;
use mhcd_core::engine::RunStats;
use mhcd_core::io::MetricsRecord;
use mhcd_core::protocol::*;
use mhcd_core::{
    brute_force_best, emit_assignment, emit_metrics, louvain, parse_edge_list, parse_event_stream, run_online,
    run_static, Chain, Coloration, EngineConfig, Labels, Result,
};

pub fn detect(req: DetectRequest) -> Result<DetectResponse> {
    let input = parse_edge_list(&req.graph)?;
    let (best, stats) = run_static(input.graph, &req.config)?;
    Ok(DetectResponse {
        assignment: emit_assignment(&best, &input.labels),
        metrics: emit_metrics(&[MetricsRecord::from_stats(None, &stats, req.timing)]),
        stats,
    })
}

pub fn oracle(req: OracleRequest) -> Result<OracleResponse> {
    let input = parse_edge_list(&req.graph)?;
    let best = brute_force_best(&input.graph)?;
    let coloration = Coloration::from_labels(&input.graph, &best.labels)?;
    Ok(OracleResponse {
        modularity: best.modularity,
        assignment: emit_assignment(&coloration, &input.labels),
        communities: coloration.community_count(),
        partitions: best.partitions,
    })
}

pub fn bench(req: BenchRequest) -> Result<BenchResponse> {
    let input = parse_edge_list(&req.graph)?;
    let graph = input.graph;
    let wall = |ms: f64| req.timing.then_some(ms);
    let mut rows = Vec::new();

    let (_, stats) = run_static(graph.clone(), &req.config)?;
    rows.push(BenchRow {
        method: format!("mh-{}", family_name(&req.config)),
        modularity: stats.best_modularity,
        communities: stats.communities,
        iterations: Some(stats.iterations),
        wall_ms: wall(stats.wall_ms),
    });

    let start = std::time::Instant::now();
    let (c, q) = louvain(&graph, req.louvain_seed)?;
    rows.push(BenchRow {
        method: "louvain".into(),
        modularity: q,
        communities: c.community_count(),
        iterations: None,
        wall_ms: wall(start.elapsed().as_secs_f64() * 1e3),
    });

    if graph.node_count() <= BRUTE_FORCE_MAX_NODES {
        let start = std::time::Instant::now();
        let best = brute_force_best(&graph)?;
        rows.push(BenchRow {
            method: "brute-force".into(),
            modularity: best.modularity,
            communities: best.labels.iter().max().map_or(0, |m| m + 1),
            iterations: Some(best.partitions),
            wall_ms: wall(start.elapsed().as_secs_f64() * 1e3),
        });
    }
    Ok(BenchResponse {
        nodes: graph.node_count(),
        edges: graph.edge_count(),
        rows,
    })
}

fn family_name(config: &EngineConfig) -> &'static str {
    match config.proposal {
        mhcd_core::ProposalFamily::Basic => "basic",
        mhcd_core::ProposalFamily::Improved => "improved",
        mhcd_core::ProposalFamily::Hierarchical => "hierarchical",
    }
}

pub fn stream(req: StreamRequest) -> Result<StreamResponse> {
    let input = parse_edge_list(&req.graph)?;
    let mut labels = input.labels;
    let batches = parse_event_stream(&req.events, &mut labels)?;
    let steps = run_online(input.graph, &batches, &req.config)?;
    let records: Vec<MetricsRecord> = steps
        .iter()
        .map(|s| MetricsRecord::from_stats(s.t, &s.stats, req.timing))
        .collect();
    let last = steps.last().expect("run_online emits at least one step");
    Ok(StreamResponse {
        assignment: emit_assignment(&last.coloration, &labels),
        metrics: emit_metrics(&records),
    })
}

/// A long-lived online chain fed by successive event pushes.
#[derive(Debug, Clone)]
pub struct Session {
    chain: Chain,
    labels: Labels,
    last_t: Option<u64>,
    timing: bool,
}

impl Session {
    pub fn create(req: CreateSession) -> Result<(Self, Option<MetricsRecord>)> {
        let input = parse_edge_list(&req.graph)?;
        let has_edges = input.graph.total_weight() > 0.0;
        let budget = req
            .config
            .iterations
            .unwrap_or_else(|| mhcd_core::engine::default_budget(&input.graph));
        let mut chain = Chain::new(input.graph, &req.config)?;
        let initial = if has_edges {
            chain.run(budget)?;
            Some(MetricsRecord::from_stats(None, &chain.stats(), req.timing))
        } else {
            None
        };
        let session = Session {
            chain,
            labels: input.labels,
            last_t: None,
            timing: req.timing,
        };
        Ok((session, initial))
    }

    pub fn nodes(&self) -> usize {
        self.chain.state().base_graph().node_count()
    }

    pub fn edges(&self) -> usize {
        self.chain.state().base_graph().edge_count()
    }

    /// Applies every batch of `text` in order. On error the session is left
    /// as it was before the call.
    pub fn push(&mut self, text: &str) -> Result<EventsApplied> {
        let mut next = self.clone();
        let steps = next.push_in_place(text)?;
        *self = next;
        Ok(EventsApplied {
            nodes: self.nodes(),
            edges: self.edges(),
            steps,
        })
    }

    fn push_in_place(&mut self, text: &str) -> Result<Vec<MetricsRecord>> {
        let batches = parse_event_stream(text, &mut self.labels)?;
        let mut records = Vec::with_capacity(batches.len());
        for batch in &batches {
            if let Some(last) = self.last_t {
                if batch.t <= last {
                    return Err(mhcd_core::Error::Stream {
                        line: batch.events[0].line,
                        message: format!("time step {} does not follow the session's last step {last}", batch.t),
                    });
                }
            }
            self.chain.apply_edits(&batch.events)?;
            let budget = self.chain.step_budget();
            self.chain.run(budget)?;
            self.last_t = Some(batch.t);
            records.push(MetricsRecord::from_stats(Some(batch.t), &self.chain.stats(), self.timing));
        }
        Ok(records)
    }

    pub fn assignment(&self) -> String {
        emit_assignment(self.chain.best(), &self.labels)
    }

    pub fn stats(&self) -> RunStats {
        self.chain.stats()
    }

    pub fn config(&self) -> &EngineConfig {
        self.chain.config()
    }
}
