//! Transition storage with final-state hindsight relabeling and the
//! guaranteed-composition ("or your money back") minibatch sampler.
//!
//! The memory keeps two index lists next to the transition store:
//! `real_indices` locates reward-1 transitions from episodes that reached the
//! real goal, `her_indices` locates reward-1 transitions whose success only
//! exists in hindsight. The sampler fills `round(B·λ)` slots of each batch
//! from those lists, real entries first, and tops the batch up with uniform
//! draws over the whole store.

use std::io::{self, Write};

use rand::Rng;
use thiserror::Error;

use crate::Scalar;

/// One stored experience step.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition<F: Scalar> {
    pub obs: Vec<F>,
    /// Goal the agent was pursuing; concatenated onto `obs` at network input.
    pub goal: Vec<F>,
    pub action: usize,
    /// Sparse predicate reward, 0 or 1.
    pub reward: F,
    pub next_obs: Vec<F>,
    /// Goal representation actually reached at the next state.
    pub next_achieved_goal: Vec<F>,
    pub terminal: bool,
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("cannot sample from an empty replay memory")]
    EmptyMemory,
}

/// Append-only transition store plus the two reward-1 index lists.
#[derive(Clone, Debug, Default)]
pub struct ReplayMemory<F: Scalar> {
    pub transitions: Vec<Transition<F>>,
    pub real_indices: Vec<usize>,
    pub her_indices: Vec<usize>,
}

/// Current λ and its per-episode multiplicative schedule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OymbState<F: Scalar> {
    pub lambda: F,
    pub delta: F,
    pub limit: F,
}

impl<F: Scalar> OymbState<F> {
    pub fn new(lambda: F, delta: F, limit: F) -> Self {
        assert!(lambda >= F::zero() && lambda <= F::one(), "λ must be in [0,1]");
        assert!(limit >= F::zero() && limit <= F::one(), "λ limit must be in [0,1]");
        assert!(delta > F::zero(), "δ_λ must be positive");
        Self { lambda, delta, limit }
    }
}

/// Sampled batch: memory indices plus the per-category draw counts.
#[derive(Clone, Debug)]
pub struct SampleBatch {
    pub indices: Vec<usize>,
    pub n_real_drawn: usize,
    pub n_her_drawn: usize,
    pub n_random_drawn: usize,
}

/// `round(B·λ)` with half-away-from-zero ties.
pub fn guaranteed_count<F: Scalar>(batch_size: usize, lambda: F) -> usize {
    let n = (F::of_f64(batch_size as f64) * lambda).round();
    n.to_f64().expect("finite count") as usize
}

impl<F: Scalar> ReplayMemory<F> {
    pub fn new() -> Self {
        Self {
            transitions: Vec::new(),
            real_indices: Vec::new(),
            her_indices: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// Appends a transition and returns its memory index. Index bookkeeping
    /// happens in [`ReplayMemory::relabel_episode`], not here.
    pub fn store(&mut self, transition: Transition<F>) -> usize {
        self.transitions.push(transition);
        self.transitions.len() - 1
    }

    /// Final-state hindsight relabeling of one finished episode.
    ///
    /// The virtual goal `g'` is the achieved goal of the episode's last
    /// transition. Every episode transition whose achieved goal matches `g'`
    /// under `goal_predicate` gets reward 1, and its memory index joins
    /// `real_indices` when `g'` matches the real goal, `her_indices`
    /// otherwise. With `rewrite_goal` the stored goal of those transitions is
    /// replaced by `g'` as well. Returns how many rewards changed.
    pub fn relabel_episode(
        &mut self,
        episode_indices: &[usize],
        real_goal: &[F],
        goal_predicate: impl Fn(&[F], &[F]) -> bool,
        rewrite_goal: bool,
    ) -> usize {
        let Some(&last) = episode_indices.last() else {
            return 0;
        };
        let virtual_goal = self.transitions[last].next_achieved_goal.clone();
        let is_real = goal_predicate(&virtual_goal, real_goal);

        let mut changed = 0;
        for &idx in episode_indices {
            let t = &mut self.transitions[idx];
            if !goal_predicate(&t.next_achieved_goal, &virtual_goal) {
                continue;
            }
            if t.reward != F::one() {
                t.reward = F::one();
                changed += 1;
            }
            if rewrite_goal {
                t.goal = virtual_goal.clone();
            }
            let list = if is_real {
                &mut self.real_indices
            } else {
                &mut self.her_indices
            };
            if !list.contains(&idx) {
                list.push(idx);
            }
        }
        changed
    }

    /// Guaranteed-composition batch: `round(B·λ)` preferential draws (real
    /// indices first, hindsight indices for the remainder, clamped to
    /// availability) and uniform draws over the whole store for the rest.
    /// All draws are with replacement.
    pub fn oymb_sample<R: Rng + ?Sized>(
        &self,
        batch_size: usize,
        state: &OymbState<F>,
        rng: &mut R,
    ) -> Result<SampleBatch, ReplayError> {
        if self.transitions.is_empty() {
            return Err(ReplayError::EmptyMemory);
        }
        assert!(batch_size >= 1, "batch size must be at least 1");

        let n = guaranteed_count(batch_size, state.lambda);
        let n_real = n.min(self.real_indices.len());
        let n_her = (n - n_real).min(self.her_indices.len());
        let n_random = batch_size - n_real - n_her;

        let mut indices = Vec::with_capacity(batch_size);
        for _ in 0..n_real {
            indices.push(self.real_indices[rng.gen_range(0..self.real_indices.len())]);
        }
        for _ in 0..n_her {
            indices.push(self.her_indices[rng.gen_range(0..self.her_indices.len())]);
        }
        for _ in 0..n_random {
            indices.push(rng.gen_range(0..self.transitions.len()));
        }

        Ok(SampleBatch {
            indices,
            n_real_drawn: n_real,
            n_her_drawn: n_her,
            n_random_drawn: n_random,
        })
    }

    /// Baseline sampler: uniform with replacement over the whole store.
    pub fn uniform_sample<R: Rng + ?Sized>(
        &self,
        batch_size: usize,
        rng: &mut R,
    ) -> Result<SampleBatch, ReplayError> {
        if self.transitions.is_empty() {
            return Err(ReplayError::EmptyMemory);
        }
        let indices = (0..batch_size)
            .map(|_| rng.gen_range(0..self.transitions.len()))
            .collect();
        Ok(SampleBatch {
            indices,
            n_real_drawn: 0,
            n_her_drawn: 0,
            n_random_drawn: batch_size,
        })
    }

    /// Debug dump, one transition per line.
    pub fn dump<W: Write>(&self, mut out: W) -> io::Result<()> {
        let fmt_vec = |v: &[F]| {
            v.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        for (i, t) in self.transitions.iter().enumerate() {
            let flag = if self.real_indices.contains(&i) {
                "real"
            } else if self.her_indices.contains(&i) {
                "her"
            } else {
                "-"
            };
            writeln!(
                out,
                "obs=[{}] goal=[{}] action={} reward={} next_obs=[{}] terminal={} flags={}",
                fmt_vec(&t.obs),
                fmt_vec(&t.goal),
                t.action,
                t.reward,
                fmt_vec(&t.next_obs),
                t.terminal,
                flag
            )?;
        }
        Ok(())
    }
}

/// One multiplicative schedule update: λ ← δ_λ·λ, clamped at the limit.
/// δ_λ < 1 decays toward a floor, δ_λ > 1 grows toward a ceiling, δ_λ = 1
/// holds λ where it is.
pub fn schedule_step<F: Scalar>(state: &OymbState<F>) -> OymbState<F> {
    let candidate = state.delta * state.lambda;
    let lambda = if state.delta < F::one() {
        candidate.max(state.limit)
    } else if state.delta > F::one() {
        candidate.min(state.limit)
    } else {
        state.lambda
    };
    OymbState { lambda, ..*state }
}
