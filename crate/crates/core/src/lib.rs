//! Exact evaluation, equilibrium oracles and independent two-timescale
//! learning dynamics for finite discounted Markov potential games.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which is what the numerical contracts and
//! the command-line tooling use.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod game;
pub mod learner;
pub mod linalg;
pub mod ode;
pub mod oracle;
pub mod potential;
pub mod random;
pub mod scalar;

pub use scalar::Scalar;

pub type Game = game::GameSpec<f64>;
pub type RawGame = game::RawGame<f64>;
pub type Policy = game::PolicyProfile<f64>;
pub type Table = game::StateActionTable<f64>;
pub type Potential = potential::PotentialSpec<f64>;
pub type Schedule = learner::StepSchedule<f64>;
pub type LearnerConfig = learner::LearnerConfig<f64>;
pub type Metrics = learner::RunMetrics<f64>;
pub type NashReport = oracle::NashReport<f64>;
pub type FlowConfig = ode::FlowConfig<f64>;
pub type Trajectory = ode::Trajectory<f64>;

pub type Game32 = game::GameSpec<f32>;
pub type Policy32 = game::PolicyProfile<f32>;
pub type Potential32 = potential::PotentialSpec<f32>;
