//! Independent, decentralized two-timescale learning: asynchronous
//! q-estimates on the fast timescale, policies moved toward the optimal
//! one-stage deviation on the slow one, with uniform exploration.

mod agent;
mod dynamics;
mod env;
mod schedule;

pub use agent::{Learner, LearnerConfig, LearnerError};
pub use dynamics::{
    current_profile, exploration_adjusted_tracking_error, measure, run_dynamics, seed_streams,
    seeded_run, MetricsRow, RunMetrics, SeededRun,
};
pub use env::Environment;
pub use schedule::{validate_schedule, validate_schedules, ScheduleError, StepSchedule};
