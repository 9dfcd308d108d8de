//! `siot`: runs the trust-delegation experiments and writes their reports.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use siot_trust::experiments::{ExperimentKind, RunSettings};
use siot_trust::graph::{compute_stats, load_edge_list, load_features, GraphStats};
use siot_trust::scenario::Scenario;
use siot_trust::trust::Method;
use siot_trust::SocialGraph;

const BUNDLED_GRAPH: &str = include_str!("../../core/fixtures/synthetic50.edges");

#[derive(Parser, Debug)]
#[command(name = "siot", version, about = "Trust-based task delegation experiments on social graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Log more (repeat for debug output).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print connectivity statistics of a graph.
    Stats {
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    Mutuality(RunArgs),
    Inference(RunArgs),
    Transitivity(RunArgs),
    Profit(RunArgs),
    Environment(RunArgs),
    /// Every experiment, one after another.
    All(RunArgs),
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// Edge list; the bundled 50-node graph when omitted.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Binary node features (`nodeId f1 ... fk`); switches transitivity to feature-derived tasks.
    #[arg(long)]
    features: Option<PathBuf>,
    /// JSON scenario file; flags override its values.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<u32>,
    /// Rounds, iterations, tasks or phase length, depending on the experiment.
    #[arg(long)]
    iterations: Option<u32>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Reverse-evaluation thresholds, comma separated.
    #[arg(long, value_delimiter = ',')]
    theta: Option<Vec<f64>>,
    /// Forgetting factor.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    omega1: Option<f64>,
    #[arg(long)]
    omega2: Option<f64>,
    /// Transitivity methods, comma separated.
    #[arg(long, value_delimiter = ',')]
    method: Option<Vec<Method>>,
    /// Characteristic counts for the transitivity sweep, comma separated.
    #[arg(long, value_delimiter = ',')]
    characteristics: Option<Vec<u16>>,
    /// Also write per-delegation traces of run 0.
    #[arg(long)]
    trace: bool,
}

fn read_graph(path: Option<&Path>) -> Result<SocialGraph> {
    match path {
        None => Ok(load_edge_list(BUNDLED_GRAPH.as_bytes())?),
        Some(p) => {
            let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
            load_edge_list(BufReader::new(f)).with_context(|| format!("reading {}", p.display()))
        }
    }
}

fn scenario(args: &RunArgs) -> Result<Scenario> {
    let mut s = match &args.scenario {
        Some(p) => Scenario::load(p)?,
        None => Scenario::default(),
    };
    if let Some(seed) = args.seed {
        s.seed = seed;
    }
    if let Some(runs) = args.runs {
        s.runs = Some(runs);
    }
    if let Some(n) = args.iterations {
        s.mutuality.rounds = n;
        s.profit.iterations = n;
        s.profit.attack.tasks = n;
        s.environment = s.environment.with_phase_length(n);
    }
    if let Some(t) = &args.theta {
        s.mutuality.thetas = t.clone();
    }
    if let Some(b) = args.beta {
        s.mutuality.beta = b;
        s.profit.beta = b;
        s.environment.beta = b;
    }
    if let Some(w) = args.omega1 {
        s.transitivity.omega1 = w;
    }
    if let Some(w) = args.omega2 {
        s.transitivity.omega2 = w;
    }
    if let Some(m) = &args.method {
        s.transitivity.methods = m.clone();
    }
    if let Some(k) = &args.characteristics {
        s.transitivity.characteristic_counts = k.clone();
    }
    if args.features.is_some() {
        s.transitivity.use_features = true;
    }
    Ok(s)
}

fn run_experiments(kinds: &[ExperimentKind], args: &RunArgs) -> Result<()> {
    let scenario = scenario(args)?;
    let mut graph = read_graph(args.graph.as_deref())?;
    if let Some(p) = &args.features {
        let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
        graph = load_features(BufReader::new(f), graph).with_context(|| format!("reading {}", p.display()))?;
    }
    for &kind in kinds {
        let settings = RunSettings { jobs: args.jobs, trace: args.trace, ..scenario.settings(kind)? };
        let started = Instant::now();
        info!("{}: {} runs from seed {}", kind.name(), settings.runs, settings.master_seed);
        let output = scenario.run(kind, &graph, &settings)?;
        let dir = args.out.join(kind.name());
        let bundle = output.write(kind.name(), &dir, &settings)?;
        println!(
            "{}: {} rows, {} plots -> {} ({:.2} s)",
            kind.name(),
            output.rows.len(),
            bundle.plots.len(),
            dir.display(),
            started.elapsed().as_secs_f64()
        );
    }
    Ok(())
}

fn print_stats(stats: &GraphStats) {
    println!("{}", GraphStats::CSV_HEADER);
    println!("{}", stats.csv_row());
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Stats { graph } => {
            let started = Instant::now();
            let g = read_graph(graph.as_deref())?;
            if g.node_count() == 0 {
                bail!("graph has no nodes");
            }
            print_stats(&compute_stats(&g)?);
            info!("stats in {:.3} s", started.elapsed().as_secs_f64());
            Ok(())
        }
        Command::Mutuality(a) => run_experiments(&[ExperimentKind::Mutuality], &a),
        Command::Inference(a) => run_experiments(&[ExperimentKind::Inference], &a),
        Command::Transitivity(a) => run_experiments(&[ExperimentKind::Transitivity], &a),
        Command::Profit(a) => run_experiments(&[ExperimentKind::Profit], &a),
        Command::Environment(a) => run_experiments(&[ExperimentKind::Environment], &a),
        Command::All(a) => run_experiments(&ExperimentKind::ALL, &a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
