//! The Robo maze task: a turtle-style agent in a 10×10 maze, observing only
//! its straight-line distance to the goal and a noisy forward LIDAR reading.
//!
//! The LIDAR reading is an integer drawn uniformly from a range that depends
//! on how many cells sit between the agent and the first wall along its
//! heading (adjacent wall = 1; the grid boundary counts as wall):
//!
//! | squares away | reading range |
//! |--------------|---------------|
//! | 1            | [10, 30]      |
//! | 2            | [31, 80]      |
//! | 3            | [81, 150]     |
//! | ≥4           | [151, 300]    |
//!
//! Observations are scaled to O(1): distance by 1/14, LIDAR by 1/300. Goal
//! representations are the cell coordinates scaled by 1/10.

use rand::{Rng, RngCore};

use super::{maze::GRID, Environment, EnvSpec, MazeMap, StepResult};
use crate::Scalar;

pub const ACTION_FORWARD: usize = 0;
pub const ACTION_TURN_LEFT: usize = 1;
pub const ACTION_TURN_RIGHT: usize = 2;

const DIST_SCALE: f64 = 1.0 / 14.0;
const LIDAR_SCALE: f64 = 1.0 / 300.0;
const CELL_SCALE: f64 = 1.0 / 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    fn episode_len(self) -> usize {
        match self {
            Difficulty::Easy | Difficulty::Medium => 150,
            Difficulty::Hard => 300,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Heading {
    North,
    East,
    South,
    West,
}

impl Heading {
    fn left(self) -> Heading {
        match self {
            Heading::North => Heading::West,
            Heading::West => Heading::South,
            Heading::South => Heading::East,
            Heading::East => Heading::North,
        }
    }

    fn right(self) -> Heading {
        self.left().left().left()
    }

    fn delta(self) -> (isize, isize) {
        match self {
            Heading::North => (-1, 0),
            Heading::East => (0, 1),
            Heading::South => (1, 0),
            Heading::West => (0, -1),
        }
    }
}

/// LIDAR noise range for a true wall distance, inclusive on both ends.
pub fn lidar_range(squares_away: usize) -> (u32, u32) {
    match squares_away {
        0 => unreachable!("agent cell is never a wall"),
        1 => (10, 30),
        2 => (31, 80),
        3 => (81, 150),
        _ => (151, 300),
    }
}

pub struct RoboEnv {
    map: MazeMap,
    difficulty: Difficulty,
    goal: (usize, usize),
    agent: (usize, usize),
    heading: Heading,
    steps: usize,
}

impl RoboEnv {
    pub fn new(map: MazeMap, difficulty: Difficulty) -> Self {
        let goal = match difficulty {
            Difficulty::Easy => map.easy,
            Difficulty::Medium => map.medium,
            Difficulty::Hard => map.hard,
        };
        let agent = map.start;
        Self {
            map,
            difficulty,
            goal,
            agent,
            heading: Heading::East,
            steps: 0,
        }
    }

    pub fn agent_cell(&self) -> (usize, usize) {
        self.agent
    }

    pub fn heading(&self) -> Heading {
        self.heading
    }

    /// Number of cells from the agent to the first wall along its heading.
    pub fn wall_distance(&self) -> usize {
        let (dr, dc) = self.heading.delta();
        let (mut r, mut c) = (self.agent.0 as isize, self.agent.1 as isize);
        let mut d = 0;
        loop {
            r += dr;
            c += dc;
            d += 1;
            if self.map.is_wall(r, c) {
                return d;
            }
        }
    }

    fn observation<F: Scalar>(&self, rng: &mut dyn RngCore) -> Vec<F> {
        let (ar, ac) = self.agent;
        let (gr, gc) = self.goal;
        // Euclidean distance between cell centers, walls disregarded.
        let dr = ar as f64 - gr as f64;
        let dc = ac as f64 - gc as f64;
        let dist = (dr * dr + dc * dc).sqrt();
        let (lo, hi) = lidar_range(self.wall_distance());
        let lidar = rng.gen_range(lo..=hi);
        vec![
            F::of_f64(dist * DIST_SCALE),
            F::of_f64(lidar as f64 * LIDAR_SCALE),
        ]
    }

    fn cell_goal<F: Scalar>(cell: (usize, usize)) -> Vec<F> {
        vec![
            F::of_f64(cell.0 as f64 * CELL_SCALE),
            F::of_f64(cell.1 as f64 * CELL_SCALE),
        ]
    }

    fn goal_cell_of<F: Scalar>(repr: &[F]) -> (i64, i64) {
        let to_cell = |x: F| (x.to_f64().unwrap() * GRID as f64).round() as i64;
        (to_cell(repr[0]), to_cell(repr[1]))
    }
}

impl<F: Scalar> Environment<F> for RoboEnv {
    fn spec(&self) -> EnvSpec {
        EnvSpec {
            d_obs: 2,
            d_goal: 2,
            n_actions: 3,
            episode_len: self.difficulty.episode_len(),
        }
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<F> {
        self.agent = self.map.start;
        self.heading = Heading::East;
        self.steps = 0;
        self.observation(rng)
    }

    fn step(&mut self, action: usize, rng: &mut dyn RngCore) -> StepResult<F> {
        match action {
            ACTION_FORWARD => {
                let (dr, dc) = self.heading.delta();
                let (nr, nc) = (self.agent.0 as isize + dr, self.agent.1 as isize + dc);
                // Blocked forward moves are no-ops.
                if !self.map.is_wall(nr, nc) {
                    self.agent = (nr as usize, nc as usize);
                }
            }
            ACTION_TURN_LEFT => self.heading = self.heading.left(),
            ACTION_TURN_RIGHT => self.heading = self.heading.right(),
            _ => panic!("invalid Robo action {action}"),
        }
        self.steps += 1;
        let success = self.agent == self.goal;
        StepResult {
            next_obs: self.observation(rng),
            achieved_goal: Self::cell_goal(self.agent),
            reward: if success { F::one() } else { F::zero() },
            terminal: success || self.steps >= self.difficulty.episode_len(),
        }
    }

    fn desired_goal(&self) -> Vec<F> {
        Self::cell_goal(self.goal)
    }

    fn achieved_goal(&self) -> Vec<F> {
        Self::cell_goal(self.agent)
    }

    fn goal_reached(&self, achieved: &[F], desired: &[F]) -> bool {
        Self::goal_cell_of::<F>(achieved) == Self::goal_cell_of::<F>(desired)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::DEFAULT_MAP;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn env(difficulty: Difficulty) -> RoboEnv {
        RoboEnv::new(MazeMap::parse(DEFAULT_MAP).unwrap(), difficulty)
    }

    #[test]
    fn reset_is_deterministic_under_seed() {
        let mut e = env(Difficulty::Easy);
        let mut r1 = ChaCha8Rng::seed_from_u64(5);
        let mut r2 = ChaCha8Rng::seed_from_u64(5);
        let o1: Vec<f64> = e.reset(&mut r1);
        let o2: Vec<f64> = e.reset(&mut r2);
        assert_eq!(o1, o2);
        assert_eq!(o1.len(), 2);
    }

    #[test]
    fn easy_goal_is_the_e_cell() {
        let e = env(Difficulty::Easy);
        let map = MazeMap::parse(DEFAULT_MAP).unwrap();
        let desired: Vec<f64> = Environment::desired_goal(&e);
        assert_eq!(desired, vec![map.easy.0 as f64 / 10.0, map.easy.1 as f64 / 10.0]);
    }

    #[test]
    fn turning_left_from_north_faces_west() {
        let mut e = env(Difficulty::Easy);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let _: Vec<f64> = e.reset(&mut rng);
        e.heading = Heading::North;
        let before = e.agent_cell();
        let r: StepResult<f64> = e.step(ACTION_TURN_LEFT, &mut rng);
        assert_eq!(e.heading(), Heading::West);
        assert_eq!(e.agent_cell(), before);
        assert_eq!(r.reward, 0.0);
    }

    #[test]
    fn forward_into_wall_is_a_noop() {
        let mut e = env(Difficulty::Easy);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let _: Vec<f64> = e.reset(&mut rng);
        e.heading = Heading::North; // wall right above the start cell
        let before = e.agent_cell();
        let _: StepResult<f64> = e.step(ACTION_FORWARD, &mut rng);
        assert_eq!(e.agent_cell(), before);
    }

    #[test]
    fn forward_onto_goal_terminates_with_reward() {
        let mut e = env(Difficulty::Easy);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let _: Vec<f64> = e.reset(&mut rng);
        // E is 4 cells straight east of S on the default map.
        for i in 0..4 {
            let r: StepResult<f64> = e.step(ACTION_FORWARD, &mut rng);
            if i < 3 {
                assert_eq!(r.reward, 0.0);
                assert!(!r.terminal);
            } else {
                assert_eq!(r.reward, 1.0);
                assert!(r.terminal);
            }
        }
    }

    #[test]
    fn episode_times_out_at_t() {
        let mut e = env(Difficulty::Medium);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let _: Vec<f64> = e.reset(&mut rng);
        for i in 0..150 {
            let r: StepResult<f64> = e.step(ACTION_TURN_LEFT, &mut rng);
            assert_eq!(r.terminal, i == 149);
        }
    }

    #[test]
    fn lidar_reading_matches_wall_distance_table() {
        let map = MazeMap::parse(DEFAULT_MAP).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // fuzz over all open cells and headings
        for r in 0..GRID {
            for c in 0..GRID {
                if map.walls[r][c] {
                    continue;
                }
                for heading in [Heading::North, Heading::East, Heading::South, Heading::West] {
                    let mut e = env(Difficulty::Easy);
                    e.agent = (r, c);
                    e.heading = heading;
                    let d = e.wall_distance();
                    let (lo, hi) = lidar_range(d);
                    for _ in 0..20 {
                        let obs: Vec<f64> = e.observation(&mut rng);
                        let lidar = (obs[1] * 300.0).round() as u32;
                        assert!((lo..=hi).contains(&lidar), "cell ({r},{c}) {heading:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn goal_distance_is_euclidean() {
        // 3-4-5 triangle between agent and goal.
        let mut e = env(Difficulty::Easy);
        e.agent = (1, 1);
        e.goal = (4, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let obs: Vec<f64> = e.observation(&mut rng);
        assert!((obs[0] * 14.0 - 5.0).abs() < 1e-12);
    }

    #[test]
    fn agent_never_enters_a_wall_under_fuzz() {
        let mut e = env(Difficulty::Hard);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let _: Vec<f64> = e.reset(&mut rng);
        for i in 0..100_000 {
            let a = rng.gen_range(0..3);
            let r: StepResult<f64> = e.step(a, &mut rng);
            let (row, col) = e.agent_cell();
            assert!(!e.map.walls[row][col]);
            if r.terminal {
                let _: Vec<f64> = e.reset(&mut rng);
            }
            let _ = i;
        }
    }

    #[test]
    fn reward_iff_goal_predicate_on_next_state() {
        let mut e = env(Difficulty::Easy);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let _: Vec<f64> = e.reset(&mut rng);
        let desired: Vec<f64> = Environment::desired_goal(&e);
        for _ in 0..2000 {
            let a = rng.gen_range(0..3);
            let r: StepResult<f64> = e.step(a, &mut rng);
            assert_eq!(
                r.reward == 1.0,
                e.goal_reached(&r.achieved_goal, &desired)
            );
            if r.terminal {
                let _: Vec<f64> = e.reset(&mut rng);
            }
        }
    }
}
