//! Classic discrete-control MountainCar with the sparse predicate reward.
//!
//! Canonical dynamics: `v' = clamp(v + 0.001·(a−1) − 0.0025·cos(3p), ±0.07)`,
//! `p' = clamp(p + v', [−1.2, 0.6])`, velocity zeroed on hitting the left
//! bound. Reward is 1 (and the episode ends) iff `p' ≥ 0.5`.

use rand::{Rng, RngCore};

use super::{Environment, EnvSpec, StepResult};
use crate::Scalar;

pub const POSITION_MIN: f64 = -1.2;
pub const POSITION_MAX: f64 = 0.6;
pub const VELOCITY_MAX: f64 = 0.07;
pub const GOAL_POSITION: f64 = 0.5;
pub const FORCE: f64 = 0.001;
pub const GRAVITY: f64 = 0.0025;
pub const EPISODE_LEN: usize = 250;

pub const ACTION_LEFT: usize = 0;
pub const ACTION_NONE: usize = 1;
pub const ACTION_RIGHT: usize = 2;

pub struct MountainCarEnv {
    position: f64,
    velocity: f64,
    steps: usize,
}

impl MountainCarEnv {
    #[allow(clippy::new_without_default)]
    pub fn new() -> Self {
        Self { position: -0.5, velocity: 0.0, steps: 0 }
    }

    pub fn state(&self) -> (f64, f64) {
        (self.position, self.velocity)
    }

    fn obs<F: Scalar>(&self) -> Vec<F> {
        vec![F::of_f64(self.position), F::of_f64(self.velocity)]
    }
}

impl<F: Scalar> Environment<F> for MountainCarEnv {
    fn spec(&self) -> EnvSpec {
        EnvSpec { d_obs: 2, d_goal: 1, n_actions: 3, episode_len: EPISODE_LEN }
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<F> {
        self.position = rng.gen_range(-0.6..-0.4);
        self.velocity = 0.0;
        self.steps = 0;
        self.obs()
    }

    fn step(&mut self, action: usize, _rng: &mut dyn RngCore) -> StepResult<F> {
        assert!(action < 3, "invalid MountainCar action {action}");
        let force = (action as f64 - 1.0) * FORCE;
        let mut v = self.velocity + force - GRAVITY * (3.0 * self.position).cos();
        v = v.clamp(-VELOCITY_MAX, VELOCITY_MAX);
        let p = (self.position + v).clamp(POSITION_MIN, POSITION_MAX);
        if p == POSITION_MIN {
            v = 0.0;
        }
        self.position = p;
        self.velocity = v;
        self.steps += 1;

        let success = p >= GOAL_POSITION;
        StepResult {
            next_obs: self.obs(),
            achieved_goal: vec![F::of_f64(p)],
            reward: if success { F::one() } else { F::zero() },
            terminal: success || self.steps >= EPISODE_LEN,
        }
    }

    fn desired_goal(&self) -> Vec<F> {
        vec![F::of_f64(GOAL_POSITION)]
    }

    fn achieved_goal(&self) -> Vec<F> {
        vec![F::of_f64(self.position)]
    }

    fn goal_reached(&self, achieved: &[F], desired: &[F]) -> bool {
        achieved[0] >= desired[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reset_distribution() {
        let mut env = MountainCarEnv::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let obs: Vec<f64> = env.reset(&mut rng);
            assert_eq!(obs.len(), 2);
            assert!((-0.6..-0.4).contains(&obs[0]));
            assert_eq!(obs[1], 0.0);
        }
    }

    #[test]
    fn single_step_closed_form() {
        // One rightward push from rest at p = -0.5, evaluated by hand:
        // v' = 0.001 - 0.0025·cos(-1.5), p' = -0.5 + v'.
        let mut env = MountainCarEnv::new();
        env.position = -0.5;
        env.velocity = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r: StepResult<f64> = env.step(ACTION_RIGHT, &mut rng);
        let v_expect = 0.001 - 0.0025 * (-1.5f64).cos();
        assert!((r.next_obs[1] - v_expect).abs() < 1e-15);
        assert!((r.next_obs[0] - (-0.5 + v_expect)).abs() < 1e-15);
        assert!((v_expect - 0.00082316).abs() < 1e-8);
    }

    #[test]
    fn left_wall_zeroes_velocity() {
        let mut env = MountainCarEnv::new();
        env.position = -1.19;
        env.velocity = -0.07;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r: StepResult<f64> = env.step(ACTION_LEFT, &mut rng);
        assert_eq!(r.next_obs[0], POSITION_MIN);
        assert_eq!(r.next_obs[1], 0.0);
    }

    #[test]
    fn goal_crossing_terminates_with_reward() {
        let mut env = MountainCarEnv::new();
        env.position = 0.49;
        env.velocity = 0.07;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r: StepResult<f64> = env.step(ACTION_RIGHT, &mut rng);
        assert!(r.next_obs[0] >= 0.5);
        assert_eq!(r.reward, 1.0);
        assert!(r.terminal);
    }

    #[test]
    fn state_stays_in_bounds_under_fuzz() {
        let mut env = MountainCarEnv::new();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let _: Vec<f64> = env.reset(&mut rng);
        for _ in 0..100_000 {
            let a = rng.gen_range(0..3);
            let r: StepResult<f64> = env.step(a, &mut rng);
            assert!((POSITION_MIN..=POSITION_MAX).contains(&r.next_obs[0]));
            assert!((-VELOCITY_MAX..=VELOCITY_MAX).contains(&r.next_obs[1]));
            if r.terminal {
                let _: Vec<f64> = env.reset(&mut rng);
            }
        }
    }

    #[test]
    fn coasting_never_reaches_the_goal() {
        // The "do nothing" policy cannot climb the hill from any start.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let mut env = MountainCarEnv::new();
            let _: Vec<f64> = env.reset(&mut rng);
            for _ in 0..EPISODE_LEN {
                let r: StepResult<f64> = env.step(ACTION_NONE, &mut rng);
                assert_eq!(r.reward, 0.0);
                if r.terminal {
                    break;
                }
            }
        }
    }

    #[test]
    fn goal_predicate_is_threshold_on_position() {
        let env = MountainCarEnv::new();
        assert!(Environment::<f64>::goal_reached(&env, &[0.51], &[0.5]));
        assert!(Environment::<f64>::goal_reached(&env, &[0.5], &[0.5]));
        assert!(!Environment::<f64>::goal_reached(&env, &[0.49], &[0.5]));
    }
}
