//! Goal-conditioned DQN agent: ε-greedy acting on `obs‖goal` inputs, per-step
//! optimization from replay batches, per-episode hindsight relabeling,
//! λ-schedule advance, and target-network sync.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::envs::Environment;
use crate::neuralnet::{adam_step, backward, forward, AdamState, MlpParameters};
use crate::replay::{schedule_step, OymbState, ReplayMemory, SampleBatch, Transition};
use crate::Scalar;

/// Guaranteed-composition sampler parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OymbConfig<F: Scalar> {
    pub lambda: F,
    pub delta: F,
    pub limit: F,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SamplerKind<F: Scalar> {
    Uniform,
    Oymb(OymbConfig<F>),
}

#[derive(Clone, Debug)]
pub struct AgentConfig<F: Scalar> {
    pub gamma: F,
    pub batch_size: usize,
    pub episodes: usize,
    pub epsilon_start: F,
    pub epsilon_end: F,
    pub sampler: SamplerKind<F>,
    pub learning_rate: F,
    /// Minimum stored transitions before the first parameter update.
    pub warmup: usize,
    /// Substitute the virtual goal into relabeled transitions' goal slots.
    pub her_rewrite_goal: bool,
}

impl<F: Scalar> AgentConfig<F> {
    pub fn new(sampler: SamplerKind<F>) -> Self {
        Self {
            gamma: F::of_f64(0.98),
            batch_size: 64,
            episodes: 250,
            epsilon_start: F::one(),
            epsilon_end: F::of_f64(0.01),
            sampler,
            learning_rate: F::of_f64(1e-3),
            warmup: 64,
            her_rewrite_goal: false,
        }
    }

    pub fn validate(&self) {
        assert!(self.batch_size >= 1, "batch size must be at least 1");
        assert!(
            F::zero() <= self.epsilon_end
                && self.epsilon_end <= self.epsilon_start
                && self.epsilon_start <= F::one(),
            "need 0 <= epsilon_end <= epsilon_start <= 1"
        );
        assert!(
            self.gamma > F::zero() && self.gamma < F::one(),
            "gamma must be in (0,1)"
        );
    }
}

/// Online and target networks plus optimizer and sampler state.
pub struct Agent<F: Scalar> {
    pub online: MlpParameters<F>,
    pub target: MlpParameters<F>,
    pub adam: AdamState<F>,
    pub oymb: Option<OymbState<F>>,
    pub episode: usize,
}

impl<F: Scalar> Agent<F> {
    pub fn new(d_in: usize, n_actions: usize, config: &AgentConfig<F>, rng: &mut dyn RngCore) -> Self {
        config.validate();
        let online = MlpParameters::init(d_in, n_actions, rng);
        let target = online.clone();
        let oymb = match config.sampler {
            SamplerKind::Uniform => None,
            SamplerKind::Oymb(c) => Some(OymbState::new(c.lambda, c.delta, c.limit)),
        };
        Self {
            online,
            target,
            adam: AdamState::new(d_in, n_actions, config.learning_rate),
            oymb,
            episode: 0,
        }
    }
}

/// Linearly annealed exploration rate, constant within an episode.
pub fn epsilon_at<F: Scalar>(config: &AgentConfig<F>, episode: usize) -> F {
    debug_assert!(episode < config.episodes.max(1));
    if config.episodes <= 1 {
        return config.epsilon_start;
    }
    let frac = F::of_f64(episode as f64 / (config.episodes - 1) as f64);
    config.epsilon_start + (config.epsilon_end - config.epsilon_start) * frac
}

/// ε-greedy action choice; greedy ties break to the lowest index.
pub fn select_action<F: Scalar>(
    params: &MlpParameters<F>,
    input: &[F],
    epsilon: F,
    rng: &mut dyn RngCore,
) -> usize {
    if epsilon > F::zero() && rng.gen_range(0.0..1.0) < epsilon.to_f64().unwrap() {
        return rng.gen_range(0..params.n_actions);
    }
    let q = forward(params, input);
    let mut best = 0;
    for (i, &v) in q.iter().enumerate().skip(1) {
        if v > q[best] {
            best = i;
        }
    }
    best
}

fn concat<F: Scalar>(obs: &[F], goal: &[F]) -> Vec<F> {
    let mut v = Vec::with_capacity(obs.len() + goal.len());
    v.extend_from_slice(obs);
    v.extend_from_slice(goal);
    v
}

/// TD target for one transition: `r` when terminal, else
/// `r + γ·max_a' Q(s'‖g, a'; θ_target)`.
pub fn td_target<F: Scalar>(t: &Transition<F>, target: &MlpParameters<F>, gamma: F) -> F {
    if t.terminal {
        return t.reward;
    }
    let q = forward(target, &concat(&t.next_obs, &t.goal));
    let max_q = q.into_iter().fold(F::neg_infinity(), F::max);
    t.reward + gamma * max_q
}

/// Per-episode record: did the real goal get reached, and bookkeeping for the
/// metrics CSVs.
#[derive(Clone, Copy, Debug)]
pub struct EpisodeRecord<F: Scalar> {
    pub success: bool,
    pub steps: usize,
    /// Mean squared TD error over the episode's updates (0 when none ran).
    pub mean_loss: F,
    /// λ in force during the episode (0 for the uniform sampler).
    pub lambda: F,
}

/// Per-run series across all episodes.
#[derive(Clone, Debug, Default)]
pub struct RunMetrics<F: Scalar> {
    pub success: Vec<bool>,
    pub cumulative: Vec<u32>,
    pub lambda: Vec<F>,
    pub mean_loss: Vec<F>,
}

/// Draws one batch with the configured sampler and applies one Adam step on
/// the averaged TD-loss gradient. No-op (returns `None`) below warmup.
pub fn train_step<F: Scalar>(
    agent: &mut Agent<F>,
    memory: &ReplayMemory<F>,
    config: &AgentConfig<F>,
    rng: &mut dyn RngCore,
) -> Option<F> {
    if memory.len() < config.warmup {
        return None;
    }
    let batch: SampleBatch = match (&config.sampler, &agent.oymb) {
        (SamplerKind::Uniform, _) => memory.uniform_sample(config.batch_size, rng),
        (SamplerKind::Oymb(_), Some(state)) => memory.oymb_sample(config.batch_size, state, rng),
        (SamplerKind::Oymb(_), None) => unreachable!("OYMB sampler without schedule state"),
    }
    .expect("memory is non-empty past warmup");

    let scale = F::one() / F::of_f64(config.batch_size as f64);
    let mut grad_sum = MlpParameters::zeros(agent.online.d_in, agent.online.n_actions);
    let mut loss = F::zero();
    for &idx in &batch.indices {
        let t = &memory.transitions[idx];
        let y = td_target(t, &agent.target, config.gamma);
        let input = concat(&t.obs, &t.goal);
        let q = forward(&agent.online, &input)[t.action];
        loss += (y - q) * (y - q);
        let g = backward(&agent.online, &input, t.action, y);
        grad_sum.add_scaled(&g, F::one());
    }
    let mut grad_mean = MlpParameters::zeros(agent.online.d_in, agent.online.n_actions);
    grad_mean.add_scaled(&grad_sum, scale);
    adam_step(&mut agent.online, &grad_mean, &mut agent.adam);
    debug_assert!(agent.online.all_finite());
    Some(loss * scale)
}

/// One full episode: act, store, train each step; then relabel, advance the
/// λ schedule, and sync the target network.
pub fn run_episode<F: Scalar, E: Environment<F> + ?Sized>(
    agent: &mut Agent<F>,
    env: &mut E,
    memory: &mut ReplayMemory<F>,
    config: &AgentConfig<F>,
    rng_env: &mut dyn RngCore,
    rng_action: &mut dyn RngCore,
    rng_sample: &mut dyn RngCore,
) -> EpisodeRecord<F> {
    let spec = env.spec();
    let mut obs = env.reset(rng_env);
    let goal = env.desired_goal();
    let epsilon = epsilon_at(config, agent.episode);

    let mut indices = Vec::new();
    let mut success = false;
    let mut loss_sum = F::zero();
    let mut loss_count = 0usize;

    for _ in 0..spec.episode_len {
        let input = concat(&obs, &goal);
        let action = select_action(&agent.online, &input, epsilon, rng_action);
        let step = env.step(action, rng_env);
        success = success || step.reward == F::one();
        indices.push(memory.store(Transition {
            obs,
            goal: goal.clone(),
            action,
            reward: step.reward,
            next_obs: step.next_obs.clone(),
            next_achieved_goal: step.achieved_goal,
            terminal: step.terminal,
        }));
        if let Some(loss) = train_step(agent, memory, config, rng_sample) {
            loss_sum += loss;
            loss_count += 1;
        }
        obs = step.next_obs;
        if step.terminal {
            break;
        }
    }

    memory.relabel_episode(
        &indices,
        &goal,
        |a, d| env.goal_reached(a, d),
        config.her_rewrite_goal,
    );

    let lambda = agent.oymb.map_or(F::zero(), |s| s.lambda);
    if let Some(state) = &agent.oymb {
        agent.oymb = Some(schedule_step(state));
    }
    agent.target = agent.online.clone();
    agent.episode += 1;

    EpisodeRecord {
        success,
        steps: indices.len(),
        mean_loss: if loss_count > 0 {
            loss_sum / F::of_f64(loss_count as f64)
        } else {
            F::zero()
        },
        lambda,
    }
}

/// Deterministic RNG sub-streams split from one run seed.
pub struct RunRngs {
    pub init: ChaCha8Rng,
    pub env: ChaCha8Rng,
    pub action: ChaCha8Rng,
    pub sample: ChaCha8Rng,
}

impl RunRngs {
    pub fn from_seed(seed: u64) -> Self {
        let stream = |id: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(id);
            rng
        };
        Self {
            init: stream(0),
            env: stream(1),
            action: stream(2),
            sample: stream(3),
        }
    }
}

/// Trains a fresh agent for `config.episodes` episodes and returns the
/// per-episode success series with its cumulative sum.
pub fn run_training<F: Scalar, E: Environment<F> + ?Sized>(
    env: &mut E,
    config: &AgentConfig<F>,
    seed: u64,
) -> RunMetrics<F> {
    let spec = env.spec();
    let mut rngs = RunRngs::from_seed(seed);
    let mut agent = Agent::new(spec.d_obs + spec.d_goal, spec.n_actions, config, &mut rngs.init);
    let mut memory = ReplayMemory::new();

    let mut metrics = RunMetrics::default();
    let mut cumulative = 0u32;
    for _ in 0..config.episodes {
        let rec = run_episode(
            &mut agent,
            env,
            &mut memory,
            config,
            &mut rngs.env,
            &mut rngs.action,
            &mut rngs.sample,
        );
        cumulative += rec.success as u32;
        metrics.success.push(rec.success);
        metrics.cumulative.push(cumulative);
        metrics.lambda.push(rec.lambda);
        metrics.mean_loss.push(rec.mean_loss);
    }
    metrics
}
