//! Modularity-maximizing community detection driven by a Metropolis–Hastings
//! chain over hierarchical colorations, for static and evolving graphs.

pub mod baseline;
pub mod engine;
pub mod error;
pub mod fixtures;
pub mod generators;
pub mod graph;
pub mod hierarchy;
pub mod io;
pub mod modularity;
pub mod partition;
pub mod proposals;
pub mod protocol;
#[cfg(test)]
mod testutil;

pub use baseline::{brute_force_best, louvain, stationary_check, BruteForce, StationaryReport};
pub use engine::{run_online, run_static, Chain, EngineConfig, Event, EventBatch, OnlineStep, RunStats};
pub use error::{Error, Result};
pub use graph::{Graph, GraphEdit, NodeId};
pub use hierarchy::{aggregate, HierarchyState};
pub use io::{emit_assignment, emit_metrics, parse_assignment, parse_edge_list, parse_event_stream, Labels, LabeledGraph, MetricsRecord};
pub use modularity::{delta_hier, delta_join, delta_leave, delta_move, modularity};
pub use partition::{Coloration, CommunityId, Target};
pub use proposals::{DeltaMode, FrontierMode, MixtureParams, Move, ProposalFamily};
