//! Sparse-reward episodic environments behind one goal-conditioned interface.

pub mod maze;
pub mod mountain_car;
pub mod robo;

pub use maze::{MapError, MazeMap, DEFAULT_MAP};
pub use mountain_car::MountainCarEnv;
pub use robo::{Difficulty, RoboEnv};

use rand::RngCore;

use crate::Scalar;

/// Static shape of an environment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnvSpec {
    pub d_obs: usize,
    pub d_goal: usize,
    pub n_actions: usize,
    /// Maximum episode length T.
    pub episode_len: usize,
}

/// Outcome of one environment step.
#[derive(Clone, Debug)]
pub struct StepResult<F: Scalar> {
    pub next_obs: Vec<F>,
    /// Goal representation reached at the new state.
    pub achieved_goal: Vec<F>,
    /// Sparse predicate reward: 1 iff the goal holds at the new state.
    pub reward: F,
    pub terminal: bool,
}

/// Goal-conditioned episodic environment with a sparse predicate reward.
///
/// Episodes terminate when the goal predicate first holds or when the step
/// count reaches `episode_len`.
pub trait Environment<F: Scalar> {
    fn spec(&self) -> EnvSpec;

    /// Starts a new episode and returns the initial observation.
    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<F>;

    /// Applies one action. Panics on an out-of-range action index.
    fn step(&mut self, action: usize, rng: &mut dyn RngCore) -> StepResult<F>;

    /// The episode's real goal, in goal representation.
    fn desired_goal(&self) -> Vec<F>;

    /// Goal representation of the current state.
    fn achieved_goal(&self) -> Vec<F>;

    /// Whether an achieved goal satisfies a desired goal.
    fn goal_reached(&self, achieved: &[F], desired: &[F]) -> bool;
}

/// The runnable tasks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    MountainCar,
    RoboEasy,
    RoboMedium,
    RoboHard,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::MountainCar => "mountaincar",
            Task::RoboEasy => "robo_easy",
            Task::RoboMedium => "robo_medium",
            Task::RoboHard => "robo_hard",
        }
    }

    pub fn parse(s: &str) -> Option<Task> {
        match s {
            "mountaincar" => Some(Task::MountainCar),
            "robo_easy" => Some(Task::RoboEasy),
            "robo_medium" => Some(Task::RoboMedium),
            "robo_hard" => Some(Task::RoboHard),
            _ => None,
        }
    }

    /// Builds the environment for this task on the given map (Robo tasks
    /// only; MountainCar ignores it).
    pub fn build<F: Scalar>(self, map: &MazeMap) -> Box<dyn Environment<F> + Send> {
        match self {
            Task::MountainCar => Box::new(MountainCarEnv::new()),
            Task::RoboEasy => Box::new(RoboEnv::new(map.clone(), Difficulty::Easy)),
            Task::RoboMedium => Box::new(RoboEnv::new(map.clone(), Difficulty::Medium)),
            Task::RoboHard => Box::new(RoboEnv::new(map.clone(), Difficulty::Hard)),
        }
    }
}
