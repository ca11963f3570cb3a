//! JSON bodies exchanged between the HTTP service and its clients. Graphs,
//! event streams and assignments travel in their text formats.

use serde::{Deserialize, Serialize};

use crate::engine::{EngineConfig, RunStats};
use crate::io::MetricsRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectRequest {
    pub graph: String,
    #[serde(default)]
    pub config: EngineConfig,
    #[serde(default)]
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectResponse {
    pub assignment: String,
    /// One JSONL line.
    pub metrics: String,
    pub stats: RunStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRequest {
    pub graph: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResponse {
    pub modularity: f64,
    pub assignment: String,
    pub communities: usize,
    pub partitions: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRequest {
    pub graph: String,
    #[serde(default)]
    pub config: EngineConfig,
    #[serde(default)]
    pub louvain_seed: u64,
    #[serde(default)]
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: String,
    pub modularity: f64,
    pub communities: usize,
    pub iterations: Option<u64>,
    pub wall_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResponse {
    pub nodes: usize,
    pub edges: usize,
    pub rows: Vec<BenchRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamRequest {
    /// Initial edge list; may be empty.
    #[serde(default)]
    pub graph: String,
    pub events: String,
    #[serde(default)]
    pub config: EngineConfig,
    #[serde(default)]
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamResponse {
    /// Best coloration after the last time step.
    pub assignment: String,
    /// One JSONL line per run (initial graph, then each time step).
    pub metrics: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateSession {
    #[serde(default)]
    pub graph: String,
    #[serde(default)]
    pub config: EngineConfig,
    #[serde(default)]
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionCreated {
    pub id: u64,
    pub nodes: usize,
    pub edges: usize,
    /// Run on the initial graph, absent when it has no edges.
    pub initial: Option<MetricsRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PushEvents {
    pub events: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventsApplied {
    pub nodes: usize,
    pub edges: usize,
    pub steps: Vec<MetricsRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentResponse {
    pub assignment: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    /// Error class, e.g. `parse`, `stream`, `domain`, `not-found`.
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub version: String,
}
