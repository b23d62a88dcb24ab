//! Replay-memory sampling with guaranteed minibatch composition for
//! sparse-reward Q-learning.
//!
//! The crate is split along the natural seams of a DQN training stack:
//!
//! - [`neuralnet`]: a fixed-topology dense Q-network (input → 64 → 32 → |A|)
//!   with hand-rolled backprop and Adam.
//! - [`replay`]: transition storage, final-state hindsight relabeling, and
//!   the guaranteed-composition (OYMB) sampler next to a uniform baseline.
//! - [`envs`]: sparse episodic environments — a 10×10 maze with noisy LIDAR
//!   and classic discrete MountainCar.
//! - [`agent`]: the goal-conditioned DQN training loop tying the above
//!   together.
//! - [`harness`]: config files, multi-seed experiments, the batch-composition
//!   probe, and CSV output.
//!
//! Core math is generic over the scalar type through [`Scalar`]; the harness
//! and CLI run everything at `f64` (see the aliases below).

pub mod agent;
pub mod envs;
pub mod harness;
pub mod neuralnet;
pub mod replay;

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive};
use rand::distributions::uniform::SampleUniform;

/// Floating-point scalar the math core is generic over.
pub trait Scalar:
    Float
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + SampleUniform
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Conversion from an `f64` literal, for constants in generic code.
    fn of_f64(x: f64) -> Self {
        FromPrimitive::from_f64(x).expect("f64 literal representable")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

// Concrete aliases used by the harness and CLI.
pub type Mlp64 = neuralnet::MlpParameters<f64>;
pub type Adam64 = neuralnet::AdamState<f64>;
pub type Transition64 = replay::Transition<f64>;
pub type Memory64 = replay::ReplayMemory<f64>;
pub type OymbState64 = replay::OymbState<f64>;
pub type AgentConfig64 = agent::AgentConfig<f64>;
pub type RunMetrics64 = agent::RunMetrics<f64>;
