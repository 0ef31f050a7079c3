//! Command-line harness: JSON/TSV reports on stdout, a run manifest on
//! stderr, exit 0 on success, 1 on domain errors, 2 on usage errors.
//!
//! Reports are deterministic: identical inputs, flags, and seed produce
//! byte-identical stdout regardless of thread count. All randomness flows
//! from the explicit `--seed`; the manifest (which carries wall time) goes
//! to stderr so it never perturbs the report stream.

mod fixtures;

use clap::{Parser, Subcommand, ValueEnum};
use hodge_alloc_core::game::CoalitionGame;
use hodge_alloc_core::graph::{
    coalition_label, Hypercube, MergerGraph, NodeId, WeightedMultigraph,
};
use hodge_alloc_core::hodge::EdgeFlow;
use hodge_alloc_core::io::{
    parse_json, to_json_string, FlowFile, GameFile, GraphFile, StrategicGameFile,
};
use hodge_alloc_core::strategic::StrategicGame;
use hodge_alloc_core::{
    alpha_component_games, alpha_flow, alpha_shapley_all, check_axioms, component_games,
    enumerate_noloop_paths, estimate_value, extended_kn_value, flow_shapley_by_permutation,
    kn_value, noloop_weights, reduced_value, shapley, shapley_by_permutation, solve_poisson_with,
    threat_power, AllocationTable, AxiomCheck, SolveMethod, WalkConfig,
};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::error::Error;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "hodge-alloc",
    version,
    about = "Cooperative-game value allocations on graphs: exact anchored solves, \
             random-walk cross-checks, axiom reports, and strategic-game extensions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Anywhere a file is expected, `fixture:<name>` loads a built-in input
/// instead (names: delta2, delta3, glove, kn_constant, merger3).
#[derive(Subcommand)]
enum Command {
    /// Player values of a coalition game (classic or alpha-weighted)
    Shapley {
        /// Game JSON file, or fixture:<name>
        #[arg(long)]
        game: String,
        /// Weight on a player's own marginals; omitted means classic values
        #[arg(long)]
        alpha: Option<f64>,
        /// Report only this player (1-based)
        #[arg(long)]
        player: Option<usize>,
        /// Computation route; the permutation form is an O(N!) cross-check
        #[arg(long, value_enum, default_value = "subset")]
        method: ShapleyMethod,
    },
    /// Per-player value tables over every coalition state
    Components {
        /// Game JSON file, or fixture:<name>
        #[arg(long)]
        game: String,
        /// Drive the solves with alpha-weighted marginal flows
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_enum, default_value = "json")]
        format: TableFormat,
    },
    /// Anchored Poisson solve of an edge flow on a graph
    Hodge {
        /// Graph JSON file, or fixture:<name>
        #[arg(long)]
        graph: String,
        /// Flow JSON file (one value per edge, forward orientation)
        #[arg(long)]
        flow: String,
        /// Node pinned to zero, as an index or a label
        #[arg(long, default_value = "0")]
        base: String,
        #[arg(long, value_enum, default_value = "auto")]
        method: SolveRoute,
    },
    /// Monte Carlo estimate of the expected first-passage flow integral
    Montecarlo {
        /// Graph JSON file, or fixture:<name>
        #[arg(long)]
        graph: String,
        /// Flow JSON file (one value per edge, forward orientation)
        #[arg(long)]
        flow: String,
        /// Start node, as an index or a label
        #[arg(long)]
        start: String,
        /// Target node, as an index or a label
        #[arg(long)]
        target: String,
        #[arg(long)]
        episodes: usize,
        /// Seed; episode k draws from substream k regardless of scheduling
        #[arg(long)]
        seed: u64,
        /// Episodes exceeding this many steps are discarded (and counted)
        #[arg(long, default_value_t = WalkConfig::DEFAULT_STEP_CAP)]
        step_cap: usize,
    },
    /// Exact loop-erasure reduction of the same expectation
    Reduce {
        /// Graph JSON file, or fixture:<name>
        #[arg(long)]
        graph: String,
        /// Flow JSON file (one value per edge, forward orientation)
        #[arg(long)]
        flow: String,
        /// Start node, as an index or a label
        #[arg(long)]
        start: String,
        /// Target node, as an index or a label
        #[arg(long)]
        target: String,
    },
    /// Check the allocation axioms against the solver's component table
    Axioms {
        /// Game JSON file, or fixture:<name>
        #[arg(long)]
        game: String,
        /// Absolute tolerance for every check
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Threat power of one coalition in a strategic game
    Threat {
        /// Strategic-game JSON file, or fixture:<name>
        #[arg(long)]
        game: String,
        /// Coalition bitmask in decimal; bit i-1 is player i
        #[arg(long)]
        coalition: u64,
    },
    /// Kohlberg-Neyman strategic-game value, optionally extended to a table
    KnValue {
        /// Strategic-game JSON file, or fixture:<name>
        #[arg(long)]
        game: String,
        /// Also solve the induced game at every state with this alpha
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Emit a coalition hypercube or merger graph as JSON
    BuildGraph {
        #[arg(long, value_enum)]
        kind: GraphKind,
        #[arg(long)]
        players: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Shapley { .. } => "shapley",
            Command::Components { .. } => "components",
            Command::Hodge { .. } => "hodge",
            Command::Montecarlo { .. } => "montecarlo",
            Command::Reduce { .. } => "reduce",
            Command::Axioms { .. } => "axioms",
            Command::Threat { .. } => "threat",
            Command::KnValue { .. } => "kn-value",
            Command::BuildGraph { .. } => "build-graph",
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Command::Montecarlo { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapleyMethod {
    Subset,
    Permutation,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Json,
    Tsv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveRoute {
    Auto,
    Direct,
    Cg,
}

impl From<SolveRoute> for SolveMethod {
    fn from(route: SolveRoute) -> SolveMethod {
        match route {
            SolveRoute::Auto => SolveMethod::Auto,
            SolveRoute::Direct => SolveMethod::Direct,
            SolveRoute::Cg => SolveMethod::ConjugateGradient,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphKind {
    Hypercube,
    Merger,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    subcommand: &'static str,
    version: &'a str,
    inputs: Vec<InputRecord>,
    seed: Option<u64>,
    wall_ms: u64,
}

#[derive(Serialize)]
struct InputRecord {
    source: String,
    sha256: String,
}

/// Loads inputs (files or `fixture:` names) and records their digests for
/// the manifest.
#[derive(Default)]
struct InputLog {
    records: Vec<InputRecord>,
}

type CliResult<T> = Result<T, Box<dyn Error>>;

impl InputLog {
    fn load(&mut self, source: &str) -> CliResult<String> {
        let text = match source.strip_prefix("fixture:") {
            Some(name) => fixtures::fixture_text(name).ok_or_else(|| {
                format!(
                    "unknown fixture {name:?} (available: {})",
                    fixtures::NAMES.join(", ")
                )
            })?,
            None => std::fs::read_to_string(source)
                .map_err(|err| format!("cannot read {source}: {err}"))?,
        };
        let mut sha256 = String::with_capacity(64);
        for byte in Sha256::digest(text.as_bytes()) {
            sha256.push_str(&format!("{byte:02x}"));
        }
        self.records.push(InputRecord {
            source: source.to_string(),
            sha256,
        });
        Ok(text)
    }

    fn game(&mut self, source: &str) -> CliResult<CoalitionGame> {
        let text = self.load(source)?;
        Ok(parse_json::<GameFile>(&text, "game file")?.into_game()?)
    }

    fn graph(&mut self, source: &str) -> CliResult<WeightedMultigraph> {
        let text = self.load(source)?;
        Ok(parse_json::<GraphFile>(&text, "graph file")?.into_graph()?)
    }

    fn flow(&mut self, source: &str, g: &WeightedMultigraph) -> CliResult<EdgeFlow> {
        let text = self.load(source)?;
        Ok(parse_json::<FlowFile>(&text, "flow file")?.into_flow(g)?)
    }

    fn strategic(&mut self, source: &str) -> CliResult<StrategicGame> {
        let text = self.load(source)?;
        Ok(parse_json::<StrategicGameFile>(&text, "strategic game file")?.into_game()?)
    }
}

/// Labels take precedence; a spec that matches no label is read as an index.
fn resolve_node(g: &WeightedMultigraph, spec: &str) -> CliResult<NodeId> {
    for node in 0..g.node_count() {
        if g.label(NodeId(node)) == spec {
            return Ok(NodeId(node));
        }
    }
    if let Ok(index) = spec.parse::<usize>() {
        if index < g.node_count() {
            return Ok(NodeId(index));
        }
        return Err(format!(
            "node index {index} out of range (graph has {} nodes)",
            g.node_count()
        )
        .into());
    }
    Err(format!("no node labeled {spec:?}").into())
}

#[derive(Serialize)]
struct ShapleyOut {
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    phi: Vec<f64>,
}

#[derive(Serialize)]
struct PlayerValueOut {
    player: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    value: f64,
}

#[derive(Serialize)]
struct TableOut {
    players: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    coalitions: Vec<String>,
    /// `rows[i]` is player i+1's value at each coalition, mask order.
    rows: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct HodgeOut {
    base: usize,
    values: Vec<f64>,
    residual: f64,
}

#[derive(Serialize)]
struct MonteCarloOut {
    mean: f64,
    stderr: f64,
    episodes: usize,
    discarded: usize,
}

#[derive(Serialize)]
struct ReduceOut {
    value: f64,
    weights: Vec<f64>,
    /// Node-label sequence of each loop-free path, same order as `weights`.
    paths: Vec<Vec<String>>,
}

#[derive(Serialize)]
struct AxiomsOut {
    all_passed: bool,
    checks: Vec<AxiomCheck>,
}

#[derive(Serialize)]
struct ThreatOut {
    coalition: String,
    mask: u64,
    value: f64,
}

#[derive(Serialize)]
struct KnOut {
    gamma: Vec<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(message) = configure_threads() {
        eprintln!("error: {message}");
        return ExitCode::from(1);
    }
    let started = Instant::now();
    let name = cli.command.name();
    let seed = cli.command.seed();
    let mut log = InputLog::default();
    let outcome = execute(cli.command, &mut log);
    let manifest = RunManifest {
        subcommand: name,
        version: env!("CARGO_PKG_VERSION"),
        inputs: log.records,
        seed,
        wall_ms: started.elapsed().as_millis() as u64,
    };
    eprintln!("{}", to_json_string(&manifest));
    match outcome {
        Ok(report) => {
            println!("{report}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let raw = match std::env::var("HODGE_ALLOC_THREADS") {
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(err) => return Err(format!("HODGE_ALLOC_THREADS: {err}")),
        Ok(raw) => raw,
    };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|&threads| threads >= 1)
        .ok_or_else(|| format!("HODGE_ALLOC_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|err| format!("thread pool: {err}"))
}

fn execute(command: Command, log: &mut InputLog) -> CliResult<String> {
    match command {
        Command::Shapley {
            game,
            alpha,
            player,
            method,
        } => {
            let v = log.game(&game)?;
            let phi = match (method, alpha) {
                (ShapleyMethod::Subset, None) => shapley(&v),
                (ShapleyMethod::Subset, Some(alpha)) => alpha_shapley_all(&v, alpha)?,
                (ShapleyMethod::Permutation, None) => shapley_by_permutation(&v)?,
                (ShapleyMethod::Permutation, Some(alpha)) => {
                    let hc = Hypercube::new(v.players())?;
                    (0..v.players())
                        .map(|p| {
                            flow_shapley_by_permutation(&hc, &alpha_flow(&hc, &v, p, alpha)?)
                        })
                        .collect::<hodge_alloc_core::Result<Vec<f64>>>()?
                }
            };
            match player {
                None => Ok(to_json_string(&ShapleyOut { alpha, phi })),
                Some(index) => {
                    if index == 0 || index > phi.len() {
                        return Err(
                            format!("player {index} out of range 1..={}", phi.len()).into()
                        );
                    }
                    Ok(to_json_string(&PlayerValueOut {
                        player: index,
                        alpha,
                        value: phi[index - 1],
                    }))
                }
            }
        }
        Command::Components {
            game,
            alpha,
            format,
        } => {
            let v = log.game(&game)?;
            let table = match alpha {
                None => component_games(&v)?,
                Some(alpha) => alpha_component_games(&v, alpha)?,
            };
            Ok(render_table(&table, alpha, format))
        }
        Command::Hodge {
            graph,
            flow,
            base,
            method,
        } => {
            let g = log.graph(&graph)?;
            let f = log.flow(&flow, &g)?;
            let base = resolve_node(&g, &base)?;
            let solution = solve_poisson_with(&g, &f, base, method.into())?;
            Ok(to_json_string(&HodgeOut {
                base: solution.base.0,
                values: solution.values.into_vec(),
                residual: solution.residual_norm,
            }))
        }
        Command::Montecarlo {
            graph,
            flow,
            start,
            target,
            episodes,
            seed,
            step_cap,
        } => {
            let g = log.graph(&graph)?;
            let f = log.flow(&flow, &g)?;
            let start = resolve_node(&g, &start)?;
            let target = resolve_node(&g, &target)?;
            let config = WalkConfig::new(seed, episodes).with_step_cap(step_cap);
            let estimate = estimate_value(&g, &f, start, target, &config)?;
            Ok(to_json_string(&MonteCarloOut {
                mean: estimate.mean,
                stderr: estimate.standard_error,
                episodes: estimate.episodes,
                discarded: estimate.discarded,
            }))
        }
        Command::Reduce {
            graph,
            flow,
            start,
            target,
        } => {
            let g = log.graph(&graph)?;
            let f = log.flow(&flow, &g)?;
            let start = resolve_node(&g, &start)?;
            let target = resolve_node(&g, &target)?;
            let value = reduced_value(&g, &f, start, target)?;
            let weights = noloop_weights(&g, start, target)?;
            let paths = enumerate_noloop_paths(&g, start, target)?
                .iter()
                .map(|path| {
                    path.node_sequence(&g)
                        .into_iter()
                        .map(|node| g.label(node).to_string())
                        .collect()
                })
                .collect();
            Ok(to_json_string(&ReduceOut {
                value,
                weights,
                paths,
            }))
        }
        Command::Axioms { game, tol } => {
            let v = log.game(&game)?;
            let table = component_games(&v)?;
            let report = check_axioms(&v, &table, tol)?;
            Ok(to_json_string(&AxiomsOut {
                all_passed: report.all_passed(),
                checks: report.checks,
            }))
        }
        Command::Threat { game, coalition } => {
            let g = log.strategic(&game)?;
            let value = threat_power(&g, coalition)?;
            Ok(to_json_string(&ThreatOut {
                coalition: coalition_label(coalition),
                mask: coalition,
                value,
            }))
        }
        Command::KnValue { game, alpha } => {
            let g = log.strategic(&game)?;
            match alpha {
                None => Ok(to_json_string(&KnOut {
                    gamma: kn_value(&g)?,
                })),
                Some(alpha) => {
                    let table = extended_kn_value(&g, alpha)?;
                    Ok(render_table(&table, Some(alpha), TableFormat::Json))
                }
            }
        }
        Command::BuildGraph { kind, players } => {
            let file = match kind {
                GraphKind::Hypercube => GraphFile::from_graph(Hypercube::new(players)?.graph()),
                GraphKind::Merger => GraphFile::from_graph(MergerGraph::new(players)?.graph()),
            };
            Ok(to_json_string(&file))
        }
    }
}

fn render_table(table: &AllocationTable, alpha: Option<f64>, format: TableFormat) -> String {
    match format {
        TableFormat::Json => to_json_string(&TableOut {
            players: table.players(),
            alpha,
            coalitions: (0..table.state_count() as u64).map(coalition_label).collect(),
            rows: (0..table.players()).map(|p| table.row(p).to_vec()).collect(),
        }),
        TableFormat::Tsv => {
            let mut out = String::from("coalition");
            for player in 1..=table.players() {
                out.push_str(&format!("\tv_{player}"));
            }
            for mask in 0..table.state_count() as u64 {
                out.push('\n');
                out.push_str(&coalition_label(mask));
                for player in 0..table.players() {
                    out.push_str(&format!("\t{}", table.get(player, mask)));
                }
            }
            out
        }
    }
}
