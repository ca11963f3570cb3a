use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mhcd_client::Client;
use mhcd_core::engine::Annealing;
use mhcd_core::protocol::*;
use mhcd_core::{DeltaMode, EngineConfig, FrontierMode, ProposalFamily};

/// Modularity-based community detection with a Metropolis–Hastings sampler.
///
/// Every command is executed by an mhcd service: the one at `--server`, or an
/// embedded one started on a loopback port for the duration of the command.
#[derive(Parser)]
#[command(name = "mhcd", version)]
struct Cli {
    /// Base URL of a running service, e.g. http://127.0.0.1:8080.
    #[arg(long, global = true, env = "MHCD_SERVER")]
    server: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect communities in a static graph.
    Detect {
        graph: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Track communities over an event stream.
    Stream {
        /// Initial edge list (may be empty).
        graph: PathBuf,
        /// Lines `t add|del u v [w]`.
        events: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
        /// Proposals per time step; 20·|E(t)| when omitted.
        #[arg(long)]
        budget_per_step: Option<u64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Compare the sampler with Louvain and, on small graphs, exhaustive search.
    Bench {
        graph: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long, default_value_t = 0)]
        louvain_seed: u64,
        #[arg(long)]
        timing: bool,
    },
    /// Exhaustive modularity maximization (at most 12 nodes).
    Oracle {
        graph: PathBuf,
        /// Assignment file; stdout when omitted.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Run the HTTP service in the foreground.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Proposal {
    Basic,
    Improved,
    Hierarchical,
}

#[derive(Clone, Copy, ValueEnum)]
enum Delta {
    TopLevel,
    PerLevel,
}

#[derive(Clone, Copy, ValueEnum)]
enum Frontier {
    Lagged,
    Strict,
}

#[derive(Args)]
struct EngineArgs {
    /// Inverse temperature.
    #[arg(long, default_value_t = 50.0)]
    lambda: f64,
    /// Weight of the uniform part of the mixture proposal.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Hierarchy depth for the hierarchical proposal.
    #[arg(long, default_value_t = 3)]
    levels: usize,
    /// Comma-separated level weights; uniform when omitted.
    #[arg(long, value_delimiter = ',')]
    level_weights: Option<Vec<f64>>,
    /// Proposals for a static run; 20·|E| when omitted.
    #[arg(long)]
    iters: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "hierarchical")]
    proposal: Proposal,
    #[arg(long, value_enum, default_value = "top-level")]
    delta_mode: Delta,
    #[arg(long, value_enum, default_value = "lagged")]
    frontier_mode: Frontier,
    /// Multiply lambda by this factor every `--anneal-period` steps.
    #[arg(long, requires = "anneal_period")]
    anneal_gamma: Option<f64>,
    #[arg(long, requires = "anneal_gamma")]
    anneal_period: Option<u64>,
}

impl EngineArgs {
    fn config(&self, budget_per_step: Option<u64>) -> EngineConfig {
        EngineConfig {
            lambda: self.lambda,
            alpha: self.alpha,
            level_weights: self.level_weights.clone(),
            levels: self.levels,
            iterations: self.iters,
            budget_per_step,
            seed: self.seed,
            proposal: match self.proposal {
                Proposal::Basic => ProposalFamily::Basic,
                Proposal::Improved => ProposalFamily::Improved,
                Proposal::Hierarchical => ProposalFamily::Hierarchical,
            },
            delta_mode: match self.delta_mode {
                Delta::TopLevel => DeltaMode::TopLevel,
                Delta::PerLevel => DeltaMode::PerLevel,
            },
            frontier_mode: match self.frontier_mode {
                Frontier::Lagged => FrontierMode::Lagged,
                Frontier::Strict => FrontierMode::Strict,
            },
            annealing: self
                .anneal_gamma
                .zip(self.anneal_period)
                .map(|(gamma, period)| Annealing { gamma, period }),
        }
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Assignment file; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// JSONL metrics file.
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Fill `wall_ms` in the metrics (makes them run-dependent).
    #[arg(long)]
    timing: bool,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_metrics(out: &OutputArgs, metrics: &str) -> Result<()> {
    if let Some(p) = &out.metrics {
        std::fs::write(p, metrics).with_context(|| format!("cannot write {}", p.display()))?;
    }
    Ok(())
}

async fn connect(server: Option<String>) -> Result<Client> {
    match server {
        Some(url) => Ok(Client::new(url)),
        None => {
            let addr = mhcd_server::spawn(([127, 0, 0, 1], 0).into())
                .await
                .context("cannot start the embedded service")?;
            Ok(Client::new(format!("http://{addr}")))
        }
    }
}

fn bench_table(resp: &BenchResponse) -> String {
    let mut s = format!("graph: {} nodes, {} edges\n", resp.nodes, resp.edges);
    s += &format!(
        "{:<18} {:>12} {:>12} {:>12} {:>10}\n",
        "method", "modularity", "communities", "iterations", "wall_ms"
    );
    for r in &resp.rows {
        let it = r.iterations.map_or("-".into(), |i| i.to_string());
        let ms = r.wall_ms.map_or("-".into(), |m| format!("{m:.1}"));
        s += &format!(
            "{:<18} {:>12.6} {:>12} {:>12} {:>10}\n",
            r.method, r.modularity, r.communities, it, ms
        );
    }
    s
}

async fn run(cli: Cli) -> Result<()> {
    if let Command::Serve { addr } = cli.command {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("cannot bind {addr}"))?;
        tracing::info!("listening on {}", listener.local_addr()?);
        return Ok(mhcd_server::serve(listener).await?);
    }
    let client = connect(cli.server).await?;
    match cli.command {
        Command::Detect { graph, engine, out } => {
            let req = DetectRequest {
                graph: read(&graph)?,
                config: engine.config(None),
                timing: out.timing,
            };
            let resp = client.detect(&req).await?;
            write_or_print(out.output.as_deref(), &resp.assignment)?;
            write_metrics(&out, &resp.metrics)?;
        }
        Command::Stream {
            graph,
            events,
            engine,
            budget_per_step,
            out,
        } => {
            let req = StreamRequest {
                graph: read(&graph)?,
                events: read(&events)?,
                config: engine.config(budget_per_step),
                timing: out.timing,
            };
            let resp = client.stream(&req).await?;
            write_or_print(out.output.as_deref(), &resp.assignment)?;
            write_metrics(&out, &resp.metrics)?;
        }
        Command::Bench {
            graph,
            engine,
            louvain_seed,
            timing,
        } => {
            let req = BenchRequest {
                graph: read(&graph)?,
                config: engine.config(None),
                louvain_seed,
                timing,
            };
            print!("{}", bench_table(&client.bench(&req).await?));
        }
        Command::Oracle { graph, output } => {
            let resp = client.oracle(&OracleRequest { graph: read(&graph)? }).await?;
            eprintln!(
                "best modularity {:.12} with {} communities ({} partitions)",
                resp.modularity, resp.communities, resp.partitions
            );
            write_or_print(output.as_deref(), &resp.assignment)?;
        }
        Command::Serve { .. } => unreachable!("handled above"),
    }
    Ok(())
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn,mhcd=info,mhcd_server=info")),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
