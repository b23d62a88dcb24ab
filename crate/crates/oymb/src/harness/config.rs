//! Line-oriented `key = value` config files for experiments and probes.
//!
//! Grammar: one `key = value` pair per line; blank lines and `#` comments are
//! ignored; a `[arm NAME]` header opens a sampler arm whose keys follow it.
//! Unknown keys are rejected. Every unset field takes a documented default,
//! with per-task sampler defaults:
//!
//! | task        | episodes | runs | λ    | δ_λ | λ limit |
//! |-------------|----------|------|------|-----|---------|
//! | mountaincar | 250      | 10   | 0.05 | 1   | 0.05    |
//! | robo_easy   | 250      | 5    | 0.25 | 1   | 0.25    |
//! | robo_medium | 250      | 5    | 0.25 | 1   | 0.25    |
//! | robo_hard   | 250      | 5    | 0.25 | 1   | 0.25    |
//!
//! When no arms are declared, the experiment defaults to a `her` arm (uniform
//! sampler) and an `oymb` arm with the task's sampler defaults.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::agent::{OymbConfig, SamplerKind};
use crate::envs::Task;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("invalid {field}: {msg}")]
    Validation { field: &'static str, msg: String },
}

/// One sampler arm of an experiment.
#[derive(Clone, Debug)]
pub struct ArmConfig {
    pub name: String,
    pub sampler: SamplerKind<f64>,
}

/// A multi-seed, multi-arm training comparison.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub task: Task,
    pub episodes: usize,
    pub runs: usize,
    pub base_seed: u64,
    pub batch_size: usize,
    pub gamma: f64,
    pub learning_rate: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub warmup: usize,
    pub her_rewrite_goal: bool,
    pub map_path: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub arms: Vec<ArmConfig>,
}

/// Default OYMB hyperparameters per task.
pub fn default_oymb(task: Task) -> OymbConfig<f64> {
    match task {
        Task::MountainCar => OymbConfig { lambda: 0.05, delta: 1.0, limit: 0.05 },
        Task::RoboEasy | Task::RoboMedium | Task::RoboHard => {
            OymbConfig { lambda: 0.25, delta: 1.0, limit: 0.25 }
        }
    }
}

pub fn default_runs(task: Task) -> usize {
    match task {
        Task::MountainCar => 10,
        _ => 5,
    }
}

/// One contiguous stretch of the probe's manual λ schedule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeSegment {
    pub start: usize,
    /// Exclusive.
    pub end: usize,
    pub lambda: f64,
}

/// Batch-composition probe setup.
#[derive(Clone, Debug)]
pub struct ProbeConfig {
    pub task: Task,
    pub episodes: usize,
    /// Probe batches drawn per episode (K).
    pub draws: usize,
    /// Size of each probe batch.
    pub probe_batch: usize,
    pub seed: u64,
    pub segments: Vec<ProbeSegment>,
    pub batch_size: usize,
    pub gamma: f64,
    pub learning_rate: f64,
    pub map_path: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

impl ProbeConfig {
    pub fn target_lambda(&self, episode: usize) -> f64 {
        self.segments
            .iter()
            .find(|s| (s.start..s.end).contains(&episode))
            .map(|s| s.lambda)
            .expect("segments cover every episode")
    }
}

struct RawLine {
    line: usize,
    section: Option<String>,
    key: String,
    value: String,
}

fn parse_lines(text: &str) -> Result<Vec<RawLine>, ConfigError> {
    let mut out = Vec::new();
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(inner) = trimmed.strip_prefix('[') {
            let Some(inner) = inner.strip_suffix(']') else {
                return Err(ConfigError::Parse { line, msg: "unterminated section header".into() });
            };
            let Some(name) = inner.strip_prefix("arm ") else {
                return Err(ConfigError::Parse {
                    line,
                    msg: format!("unknown section {inner:?}, expected [arm NAME]"),
                });
            };
            let name = name.trim();
            if name.is_empty() {
                return Err(ConfigError::Parse { line, msg: "empty arm name".into() });
            }
            section = Some(name.to_string());
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(ConfigError::Parse { line, msg: format!("expected `key = value`, got {trimmed:?}") });
        };
        out.push(RawLine {
            line,
            section: section.clone(),
            key: key.trim().to_string(),
            value: value.trim().to_string(),
        });
    }
    Ok(out)
}

fn parse_value<T: std::str::FromStr>(l: &RawLine, what: &str) -> Result<T, ConfigError> {
    l.value.parse().map_err(|_| ConfigError::Parse {
        line: l.line,
        msg: format!("cannot parse {:?} as {what} for key {:?}", l.value, l.key),
    })
}

fn parse_bool(l: &RawLine) -> Result<bool, ConfigError> {
    match l.value.as_str() {
        "true" | "on" | "1" => Ok(true),
        "false" | "off" | "0" => Ok(false),
        _ => Err(ConfigError::Parse {
            line: l.line,
            msg: format!("cannot parse {:?} as bool for key {:?}", l.value, l.key),
        }),
    }
}

fn parse_task(l: &RawLine) -> Result<Task, ConfigError> {
    Task::parse(&l.value).ok_or_else(|| ConfigError::Parse {
        line: l.line,
        msg: format!(
            "unknown task {:?} (expected mountaincar, robo_easy, robo_medium, or robo_hard)",
            l.value
        ),
    })
}

#[derive(Default)]
struct RawArm {
    name: String,
    sampler: Option<String>,
    sampler_line: usize,
    lambda: Option<f64>,
    delta: Option<f64>,
    limit: Option<f64>,
}

fn build_arm(raw: &RawArm, task: Task) -> Result<ArmConfig, ConfigError> {
    let defaults = default_oymb(task);
    let kind = raw.sampler.as_deref().unwrap_or("oymb");
    let sampler = match kind {
        "uniform" => {
            if raw.lambda.is_some() || raw.delta.is_some() || raw.limit.is_some() {
                return Err(ConfigError::Validation {
                    field: "arm",
                    msg: format!("arm {:?}: uniform sampler takes no lambda/delta/limit", raw.name),
                });
            }
            SamplerKind::Uniform
        }
        "oymb" => SamplerKind::Oymb(OymbConfig {
            lambda: raw.lambda.unwrap_or(defaults.lambda),
            delta: raw.delta.unwrap_or(defaults.delta),
            limit: raw.limit.unwrap_or(defaults.limit),
        }),
        other => {
            return Err(ConfigError::Parse {
                line: raw.sampler_line,
                msg: format!("unknown sampler {other:?} (expected uniform or oymb)"),
            })
        }
    };
    Ok(ArmConfig { name: raw.name.clone(), sampler })
}

fn read(path: &Path) -> Result<String, ConfigError> {
    fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })
}

/// Loads and validates an experiment config file.
pub fn load_experiment_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let lines = parse_lines(&read(path)?)?;

    let mut task = None;
    let mut episodes = None;
    let mut runs = None;
    let mut base_seed = 0u64;
    let mut batch_size = 64usize;
    let mut gamma = 0.98f64;
    let mut learning_rate = 1e-3f64;
    let mut epsilon_start = 1.0f64;
    let mut epsilon_end = 0.01f64;
    let mut warmup = None;
    let mut her_rewrite_goal = false;
    let mut map_path = None;
    let mut out_dir = None;
    let mut arms: Vec<RawArm> = Vec::new();

    for l in &lines {
        match &l.section {
            None => match l.key.as_str() {
                "task" => task = Some(parse_task(l)?),
                "episodes" => episodes = Some(parse_value(l, "integer")?),
                "runs" => runs = Some(parse_value(l, "integer")?),
                "base_seed" => base_seed = parse_value(l, "integer")?,
                "batch_size" => batch_size = parse_value(l, "integer")?,
                "gamma" => gamma = parse_value(l, "number")?,
                "learning_rate" => learning_rate = parse_value(l, "number")?,
                "epsilon_start" => epsilon_start = parse_value(l, "number")?,
                "epsilon_end" => epsilon_end = parse_value(l, "number")?,
                "warmup" => warmup = Some(parse_value(l, "integer")?),
                "her_rewrite_goal" => her_rewrite_goal = parse_bool(l)?,
                "map" => map_path = Some(PathBuf::from(&l.value)),
                "out" => out_dir = Some(PathBuf::from(&l.value)),
                _ => return Err(ConfigError::UnknownKey { line: l.line, key: l.key.clone() }),
            },
            Some(name) => {
                if arms.last().map(|a| &a.name) != Some(name) {
                    arms.push(RawArm { name: name.clone(), ..RawArm::default() });
                }
                let arm = arms.last_mut().unwrap();
                match l.key.as_str() {
                    "sampler" => {
                        arm.sampler = Some(l.value.clone());
                        arm.sampler_line = l.line;
                    }
                    "lambda" => arm.lambda = Some(parse_value(l, "number")?),
                    "delta" => arm.delta = Some(parse_value(l, "number")?),
                    "limit" => arm.limit = Some(parse_value(l, "number")?),
                    _ => return Err(ConfigError::UnknownKey { line: l.line, key: l.key.clone() }),
                }
            }
        }
    }

    let task = task.ok_or(ConfigError::Validation {
        field: "task",
        msg: "missing required key `task`".into(),
    })?;

    let arms = if arms.is_empty() {
        vec![
            ArmConfig { name: "her".into(), sampler: SamplerKind::Uniform },
            ArmConfig { name: "oymb".into(), sampler: SamplerKind::Oymb(default_oymb(task)) },
        ]
    } else {
        arms.iter().map(|a| build_arm(a, task)).collect::<Result<_, _>>()?
    };

    let cfg = ExperimentConfig {
        task,
        episodes: episodes.unwrap_or(250),
        runs: runs.unwrap_or_else(|| default_runs(task)),
        base_seed,
        batch_size,
        gamma,
        learning_rate,
        epsilon_start,
        epsilon_end,
        warmup: warmup.unwrap_or(batch_size),
        her_rewrite_goal,
        map_path,
        out_dir,
        arms,
    };
    validate_experiment(&cfg)?;
    Ok(cfg)
}

fn validate_experiment(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    if cfg.runs < 1 {
        return Err(ConfigError::Validation { field: "runs", msg: "must be at least 1".into() });
    }
    if cfg.batch_size < 1 {
        return Err(ConfigError::Validation { field: "batch_size", msg: "must be at least 1".into() });
    }
    if cfg.arms.is_empty() {
        return Err(ConfigError::Validation { field: "arms", msg: "at least one arm required".into() });
    }
    if !(0.0..1.0).contains(&cfg.gamma) || cfg.gamma == 0.0 {
        return Err(ConfigError::Validation { field: "gamma", msg: "must be in (0,1)".into() });
    }
    if !(0.0..=1.0).contains(&cfg.epsilon_end)
        || !(0.0..=1.0).contains(&cfg.epsilon_start)
        || cfg.epsilon_end > cfg.epsilon_start
    {
        return Err(ConfigError::Validation {
            field: "epsilon",
            msg: "need 0 <= epsilon_end <= epsilon_start <= 1".into(),
        });
    }
    for (field, lam) in cfg.arms.iter().filter_map(|a| match a.sampler {
        SamplerKind::Oymb(c) => Some([("lambda", c.lambda), ("limit", c.limit)]),
        SamplerKind::Uniform => None,
    }).flatten() {
        if !(0.0..=1.0).contains(&lam) {
            return Err(ConfigError::Validation { field: "arm", msg: format!("{field} must be in [0,1]") });
        }
    }
    if let Some(p) = &cfg.map_path {
        if !p.exists() {
            return Err(ConfigError::Validation {
                field: "map",
                msg: format!("file {} does not exist", p.display()),
            });
        }
    }
    Ok(())
}

fn parse_segment(l: &RawLine) -> Result<ProbeSegment, ConfigError> {
    // e.g. `segment = 0..25 0.04`
    let err = |msg: String| ConfigError::Parse { line: l.line, msg };
    let (range, lam) = l
        .value
        .split_once(char::is_whitespace)
        .ok_or_else(|| err("expected `START..END LAMBDA`".into()))?;
    let (start, end) = range
        .split_once("..")
        .ok_or_else(|| err(format!("bad episode range {range:?}")))?;
    Ok(ProbeSegment {
        start: start.trim().parse().map_err(|_| err(format!("bad range start {start:?}")))?,
        end: end.trim().parse().map_err(|_| err(format!("bad range end {end:?}")))?,
        lambda: lam.trim().parse().map_err(|_| err(format!("bad lambda {lam:?}")))?,
    })
}

/// Loads and validates a probe config file.
pub fn load_probe_config(path: &Path) -> Result<ProbeConfig, ConfigError> {
    let lines = parse_lines(&read(path)?)?;

    let mut cfg = ProbeConfig {
        task: Task::RoboEasy,
        episodes: 100,
        draws: 1000,
        probe_batch: 1000,
        seed: 0,
        segments: Vec::new(),
        batch_size: 64,
        gamma: 0.98,
        learning_rate: 1e-3,
        map_path: None,
        out_dir: None,
    };

    for l in &lines {
        if l.section.is_some() {
            return Err(ConfigError::Parse {
                line: l.line,
                msg: "probe configs have no [arm] sections".into(),
            });
        }
        match l.key.as_str() {
            "task" => cfg.task = parse_task(l)?,
            "episodes" => cfg.episodes = parse_value(l, "integer")?,
            "draws" => cfg.draws = parse_value(l, "integer")?,
            "probe_batch" => cfg.probe_batch = parse_value(l, "integer")?,
            "seed" => cfg.seed = parse_value(l, "integer")?,
            "segment" => cfg.segments.push(parse_segment(l)?),
            "batch_size" => cfg.batch_size = parse_value(l, "integer")?,
            "gamma" => cfg.gamma = parse_value(l, "number")?,
            "learning_rate" => cfg.learning_rate = parse_value(l, "number")?,
            "map" => cfg.map_path = Some(PathBuf::from(&l.value)),
            "out" => cfg.out_dir = Some(PathBuf::from(&l.value)),
            _ => return Err(ConfigError::UnknownKey { line: l.line, key: l.key.clone() }),
        }
    }

    if cfg.segments.is_empty() {
        cfg.segments = default_probe_segments(cfg.episodes);
    }
    validate_probe(&cfg)?;
    Ok(cfg)
}

/// The 4% / 2.5% / 5.5% schedule with breakpoints at episodes 25 and 50.
pub fn default_probe_segments(episodes: usize) -> Vec<ProbeSegment> {
    vec![
        ProbeSegment { start: 0, end: 25.min(episodes), lambda: 0.04 },
        ProbeSegment { start: 25.min(episodes), end: 50.min(episodes), lambda: 0.025 },
        ProbeSegment { start: 50.min(episodes), end: episodes, lambda: 0.055 },
    ]
}

fn validate_probe(cfg: &ProbeConfig) -> Result<(), ConfigError> {
    if cfg.draws < 1 || cfg.probe_batch < 1 {
        return Err(ConfigError::Validation {
            field: "draws/probe_batch",
            msg: "must be at least 1".into(),
        });
    }
    let mut segs = cfg.segments.clone();
    segs.sort_by_key(|s| s.start);
    let mut cursor = 0;
    for s in &segs {
        if s.start != cursor || s.end < s.start {
            return Err(ConfigError::Validation {
                field: "segment",
                msg: format!(
                    "segments must partition 0..{} without gaps or overlap (problem at {}..{})",
                    cfg.episodes, s.start, s.end
                ),
            });
        }
        if !(0.0..=1.0).contains(&s.lambda) {
            return Err(ConfigError::Validation {
                field: "segment",
                msg: format!("lambda {} out of [0,1]", s.lambda),
            });
        }
        cursor = s.end;
    }
    if cursor != cfg.episodes {
        return Err(ConfigError::Validation {
            field: "segment",
            msg: format!("segments cover 0..{cursor} but there are {} episodes", cfg.episodes),
        });
    }
    if let Some(p) = &cfg.map_path {
        if !p.exists() {
            return Err(ConfigError::Validation {
                field: "map",
                msg: format!("file {} does not exist", p.display()),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;
    use tempfile::NamedTempFile;

    fn load_expt(text: &str) -> Result<ExperimentConfig, ConfigError> {
        let mut f = NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        load_experiment_config(f.path())
    }

    fn load_probe(text: &str) -> Result<ProbeConfig, ConfigError> {
        let mut f = NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        load_probe_config(f.path())
    }

    #[test]
    fn minimal_config_takes_task_defaults() {
        let cfg = load_expt("task = robo_easy\n").unwrap();
        assert_eq!(cfg.task, Task::RoboEasy);
        assert_eq!(cfg.episodes, 250);
        assert_eq!(cfg.runs, 5);
        assert_eq!(cfg.batch_size, 64);
        assert_eq!(cfg.arms.len(), 2);
        match cfg.arms[1].sampler {
            SamplerKind::Oymb(c) => {
                assert_eq!((c.lambda, c.delta, c.limit), (0.25, 1.0, 0.25));
            }
            _ => panic!("second default arm should be oymb"),
        }
        assert!(matches!(cfg.arms[0].sampler, SamplerKind::Uniform));
    }

    #[test]
    fn mountaincar_defaults() {
        let cfg = load_expt("task = mountaincar\n").unwrap();
        assert_eq!(cfg.runs, 10);
        match cfg.arms[1].sampler {
            SamplerKind::Oymb(c) => assert_eq!((c.lambda, c.delta, c.limit), (0.05, 1.0, 0.05)),
            _ => panic!(),
        }
    }

    #[test]
    fn zero_runs_is_a_validation_error() {
        match load_expt("task = robo_easy\nruns = 0\n") {
            Err(ConfigError::Validation { field: "runs", .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_rejected_by_name() {
        match load_expt("task = robo_easy\nbogus = 3\n") {
            Err(ConfigError::UnknownKey { line: 2, key }) => assert_eq!(key, "bogus"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_error_carries_line_number() {
        match load_expt("task = robo_easy\nepisodes ten\n") {
            Err(ConfigError::Parse { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn explicit_arms_override_defaults() {
        let text = "\
task = robo_hard
base_seed = 9

[arm her_only]
sampler = uniform

[arm fast]
sampler = oymb
lambda = 0.5
delta = 0.99
limit = 0.1
";
        let cfg = load_expt(text).unwrap();
        assert_eq!(cfg.arms.len(), 2);
        assert_eq!(cfg.arms[0].name, "her_only");
        match cfg.arms[1].sampler {
            SamplerKind::Oymb(c) => assert_eq!((c.lambda, c.delta, c.limit), (0.5, 0.99, 0.1)),
            _ => panic!(),
        }
        assert_eq!(cfg.base_seed, 9);
    }

    #[test]
    fn probe_defaults_follow_manual_schedule() {
        let cfg = load_probe("").unwrap();
        assert_eq!(cfg.task, Task::RoboEasy);
        assert_eq!((cfg.episodes, cfg.draws, cfg.probe_batch), (100, 1000, 1000));
        assert_eq!(cfg.target_lambda(0), 0.04);
        assert_eq!(cfg.target_lambda(24), 0.04);
        assert_eq!(cfg.target_lambda(25), 0.025);
        assert_eq!(cfg.target_lambda(49), 0.025);
        assert_eq!(cfg.target_lambda(50), 0.055);
        assert_eq!(cfg.target_lambda(99), 0.055);
    }

    #[test]
    fn probe_segments_must_partition() {
        let bad = "episodes = 10\nsegment = 0..4 0.1\nsegment = 5..10 0.2\n";
        assert!(matches!(
            load_probe(bad),
            Err(ConfigError::Validation { field: "segment", .. })
        ));
        let good = "episodes = 10\nsegment = 0..4 0.1\nsegment = 4..10 0.2\n";
        let cfg = load_probe(good).unwrap();
        assert_eq!(cfg.target_lambda(3), 0.1);
        assert_eq!(cfg.target_lambda(4), 0.2);
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_experiment_config(Path::new("/nonexistent/x.cfg")),
            Err(ConfigError::Io { .. })
        ));
    }
}
