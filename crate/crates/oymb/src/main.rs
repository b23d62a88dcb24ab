//! Command-line experiment runner.
//!
//! Exit codes: 0 success, 1 usage error (bad flags, unreadable or invalid
//! config/map), 2 runtime failure (I/O while writing results).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use oymb::envs::{MazeMap, DEFAULT_MAP};
use oymb::harness::{
    load_experiment_config, load_map, load_probe_config, proportion_probe, run_experiment,
    write_experiment_outputs, write_probe_outputs,
};

const AFTER_HELP: &str = "\
Defaults (overridable in the config file):
  batch_size 64, gamma 0.98, learning_rate 1e-3, epsilon 1 -> 0.01 annealed
  linearly across episodes, warmup = batch_size, episodes 250.
  Runs per task: mountaincar 10, robo_* 5.
  OYMB sampler per task (lambda, delta, limit):
    mountaincar 0.05 1 0.05; robo_easy/medium/hard 0.25 1 0.25.
  A reference decaying schedule: 0.65 0.996 0.01.
  Probe: task robo_easy, 100 episodes, 1000 draws of 1000-sample batches,
  lambda schedule 0.04 until episode 25, 0.025 until 50, then 0.055.
  Map: the built-in 10x10 maze (see maps/default.map).";

#[derive(Parser)]
#[command(name = "oymb", version, about = "Sparse-reward replay sampling experiments", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a multi-seed sampler comparison and write CSV metrics.
    Run(RunArgs),
    /// Measure per-batch nonzero-reward proportions for both samplers.
    Probe(ProbeArgs),
    /// Check a map file and print BFS distances to each goal.
    ValidateMap(ValidateMapArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSVs (overrides `out` in the config; default ".").
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed (overrides `base_seed` in the config).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ProbeArgs {
    /// Probe config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for the probe CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateMapArgs {
    /// Map file (defaults to the built-in map).
    #[arg(long)]
    map: Option<PathBuf>,
}

const EXIT_USAGE: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };

    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Probe(args) => cmd_probe(args),
        Command::ValidateMap(args) => cmd_validate_map(args),
    }
}

fn cmd_run(args: RunArgs) -> ExitCode {
    let mut cfg = match load_experiment_config(&args.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("oymb run: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
    }
    let map = match load_map(cfg.map_path.as_deref()) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("oymb run: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let out_dir = args
        .out
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));

    let results = run_experiment(&cfg, &map);
    match write_experiment_outputs(&cfg, &results, &out_dir) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            for arm in &results {
                let last = arm.aggregate.mean_cum.last().copied().unwrap_or(0.0);
                println!(
                    "arm {}: mean final cumulative successes = {last:.3} over {} runs",
                    arm.name, cfg.runs
                );
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("oymb run: cannot write outputs to {}: {e}", out_dir.display());
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn cmd_probe(args: ProbeArgs) -> ExitCode {
    let cfg = match load_probe_config(&args.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("oymb probe: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let map = match load_map(cfg.map_path.as_deref()) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("oymb probe: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let metrics = proportion_probe(&cfg, &map);
    match write_probe_outputs(&metrics, &args.out) {
        Ok(path) => {
            println!("wrote {}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("oymb probe: cannot write outputs: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn cmd_validate_map(args: ValidateMapArgs) -> ExitCode {
    let text = match &args.map {
        None => DEFAULT_MAP.to_string(),
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("oymb validate-map: cannot read {}: {e}", p.display());
                return ExitCode::from(EXIT_USAGE);
            }
        },
    };
    match MazeMap::parse(&text) {
        Ok(map) => {
            for (name, cell) in [("E", map.easy), ("M", map.medium), ("H", map.hard)] {
                let d = map
                    .bfs_distance(map.start, cell)
                    .expect("parse verified reachability");
                println!("goal {name} at ({}, {}): BFS distance {d}", cell.0, cell.1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("oymb validate-map: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
