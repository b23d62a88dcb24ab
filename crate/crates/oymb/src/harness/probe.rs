//! Batch-composition probe: trains one agent per sampler and, at the end of
//! every episode, draws a bundle of large batches from the agent's memory
//! (without training on them) to measure what fraction of each batch carries
//! a nonzero reward.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::agent::{run_episode, Agent, AgentConfig, OymbConfig, RunRngs, SamplerKind};
use crate::envs::MazeMap;
use crate::replay::{OymbState, ReplayMemory, SampleBatch};

use super::config::ProbeConfig;

/// Probe statistics for one episode.
#[derive(Clone, Copy, Debug)]
pub struct ProbeEpisode {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// |real_indices| + |her_indices| at probe time.
    pub availability: usize,
    /// λ the schedule dictated for this episode (0 for uniform).
    pub target_lambda: f64,
}

/// Per-episode probe series for both samplers.
#[derive(Clone, Debug, Default)]
pub struct ProbeMetrics {
    pub oymb: Vec<ProbeEpisode>,
    pub uniform: Vec<ProbeEpisode>,
}

fn agent_config(cfg: &ProbeConfig, sampler: SamplerKind<f64>) -> AgentConfig<f64> {
    let mut c = AgentConfig::new(sampler);
    c.episodes = cfg.episodes;
    c.batch_size = cfg.batch_size;
    c.gamma = cfg.gamma;
    c.learning_rate = cfg.learning_rate;
    c.warmup = cfg.batch_size;
    c
}

fn run_probe_arm(cfg: &ProbeConfig, map: &MazeMap, oymb: bool) -> Vec<ProbeEpisode> {
    let mut env = cfg.task.build::<f64>(map);
    let spec = env.spec();
    let sampler = if oymb {
        SamplerKind::Oymb(OymbConfig {
            lambda: cfg.target_lambda(0),
            delta: 1.0,
            limit: cfg.target_lambda(0),
        })
    } else {
        SamplerKind::Uniform
    };
    let agent_cfg = agent_config(cfg, sampler);

    let mut rngs = RunRngs::from_seed(cfg.seed);
    // separate stream so probing never perturbs the training draws
    let mut probe_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    probe_rng.set_stream(4);

    let mut agent = Agent::new(spec.d_obs + spec.d_goal, spec.n_actions, &agent_cfg, &mut rngs.init);
    let mut memory = ReplayMemory::new();
    let mut out = Vec::with_capacity(cfg.episodes);

    for episode in 0..cfg.episodes {
        let lambda = cfg.target_lambda(episode);
        if oymb {
            // manual schedule: pin λ for this episode
            agent.oymb = Some(OymbState::new(lambda, 1.0, lambda));
        }
        run_episode(
            &mut agent,
            env.as_mut(),
            &mut memory,
            &agent_cfg,
            &mut rngs.env,
            &mut rngs.action,
            &mut rngs.sample,
        );

        let probe_state = OymbState::new(lambda, 1.0, lambda);
        let (mut min, mut max, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        for _ in 0..cfg.draws {
            let batch: SampleBatch = if oymb {
                memory.oymb_sample(cfg.probe_batch, &probe_state, &mut probe_rng)
            } else {
                memory.uniform_sample(cfg.probe_batch, &mut probe_rng)
            }
            .expect("memory non-empty after an episode");
            let ones = batch
                .indices
                .iter()
                .filter(|&&i| memory.transitions[i].reward == 1.0)
                .count();
            let frac = ones as f64 / cfg.probe_batch as f64;
            min = min.min(frac);
            max = max.max(frac);
            sum += frac;
        }
        out.push(ProbeEpisode {
            mean: sum / cfg.draws as f64,
            min,
            max,
            availability: memory.real_indices.len() + memory.her_indices.len(),
            target_lambda: if oymb { lambda } else { 0.0 },
        });
    }
    out
}

/// Runs both probe arms. Deterministic for a fixed config.
pub fn proportion_probe(cfg: &ProbeConfig, map: &MazeMap) -> ProbeMetrics {
    ProbeMetrics {
        oymb: run_probe_arm(cfg, map, true),
        uniform: run_probe_arm(cfg, map, false),
    }
}
