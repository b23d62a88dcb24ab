//! Experiment runner: multi-seed sampler comparisons, the batch-composition
//! probe, and CSV output.

pub mod config;
pub mod csv;
pub mod probe;

pub use config::{
    default_oymb, default_probe_segments, default_runs, load_experiment_config,
    load_probe_config, ArmConfig, ConfigError, ExperimentConfig, ProbeConfig, ProbeSegment,
};
pub use probe::{proportion_probe, ProbeEpisode, ProbeMetrics};

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::agent::{run_training, AgentConfig, RunMetrics, SamplerKind};
use crate::envs::{MapError, MazeMap, DEFAULT_MAP};

/// Loads the map named by a config, or the shipped default.
pub fn load_map(path: Option<&Path>) -> Result<MazeMap, MapLoadError> {
    match path {
        None => Ok(MazeMap::parse(DEFAULT_MAP).expect("default map is valid")),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|source| MapLoadError::Io {
                path: p.to_path_buf(),
                source,
            })?;
            MazeMap::parse(&text).map_err(|source| MapLoadError::Invalid {
                path: p.to_path_buf(),
                source,
            })
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MapLoadError {
    #[error("cannot read map {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("invalid map {path}: {source}")]
    Invalid { path: PathBuf, source: MapError },
}

/// Mean/std aggregate of one arm's runs.
#[derive(Clone, Debug)]
pub struct ArmAggregate {
    pub mean_cum: Vec<f64>,
    pub std_cum: Vec<f64>,
    pub mean_lambda: Vec<f64>,
}

/// One arm's runs plus their aggregate.
#[derive(Clone, Debug)]
pub struct ArmResult {
    pub name: String,
    pub runs: Vec<RunMetrics<f64>>,
    pub aggregate: ArmAggregate,
}

fn agent_config(cfg: &ExperimentConfig, sampler: SamplerKind<f64>) -> AgentConfig<f64> {
    let mut c = AgentConfig::new(sampler);
    c.gamma = cfg.gamma;
    c.batch_size = cfg.batch_size;
    c.episodes = cfg.episodes;
    c.epsilon_start = cfg.epsilon_start;
    c.epsilon_end = cfg.epsilon_end;
    c.learning_rate = cfg.learning_rate;
    c.warmup = cfg.warmup;
    c.her_rewrite_goal = cfg.her_rewrite_goal;
    c
}

/// Population mean and standard deviation per episode across runs.
pub fn aggregate(runs: &[RunMetrics<f64>]) -> ArmAggregate {
    let episodes = runs.first().map_or(0, |r| r.cumulative.len());
    let n = runs.len() as f64;
    let mut agg = ArmAggregate {
        mean_cum: Vec::with_capacity(episodes),
        std_cum: Vec::with_capacity(episodes),
        mean_lambda: Vec::with_capacity(episodes),
    };
    for e in 0..episodes {
        let mean = runs.iter().map(|r| r.cumulative[e] as f64).sum::<f64>() / n;
        let var = runs
            .iter()
            .map(|r| {
                let d = r.cumulative[e] as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / n;
        agg.mean_cum.push(mean);
        agg.std_cum.push(var.sqrt());
        agg.mean_lambda.push(runs.iter().map(|r| r.lambda[e]).sum::<f64>() / n);
    }
    agg
}

/// Runs every arm for `runs` seeds (`base_seed + r`); runs execute in
/// parallel, each with fully isolated state and RNG streams.
pub fn run_experiment(cfg: &ExperimentConfig, map: &MazeMap) -> Vec<ArmResult> {
    cfg.arms
        .iter()
        .map(|arm| {
            let agent_cfg = agent_config(cfg, arm.sampler);
            let runs: Vec<RunMetrics<f64>> = (0..cfg.runs)
                .into_par_iter()
                .map(|r| {
                    let mut env = cfg.task.build::<f64>(map);
                    run_training(env.as_mut(), &agent_cfg, cfg.base_seed + r as u64)
                })
                .collect();
            ArmResult {
                name: arm.name.clone(),
                aggregate: aggregate(&runs),
                runs,
            }
        })
        .collect()
}

/// Writes per-arm aggregate CSVs plus one raw CSV per run. Returns the paths
/// written, in deterministic order.
pub fn write_experiment_outputs(
    cfg: &ExperimentConfig,
    results: &[ArmResult],
    out_dir: &Path,
) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut paths = Vec::new();
    for arm in results {
        let agg_path = out_dir.join(format!("{}_{}.csv", cfg.task.name(), arm.name));
        csv::write_experiment_csv(&agg_path, &arm.aggregate)?;
        paths.push(agg_path);
        for (r, run) in arm.runs.iter().enumerate() {
            let run_path = out_dir.join(format!("{}_{}_run{}.csv", cfg.task.name(), arm.name, r));
            csv::write_run_csv(&run_path, run)?;
            paths.push(run_path);
        }
    }
    Ok(paths)
}

/// Writes the probe CSV. Returns the path written.
pub fn write_probe_outputs(metrics: &ProbeMetrics, out_dir: &Path) -> io::Result<PathBuf> {
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join("probe.csv");
    csv::write_probe_csv(&path, metrics)?;
    Ok(path)
}
