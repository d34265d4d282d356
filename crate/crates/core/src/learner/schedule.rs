use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Power-law step sizes `α(n) = z n^{-c1}` (q-estimates) and
/// `β(n) = y n^{-c2}` (policies), for counters `n ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct StepSchedule<T> {
    pub z: T,
    pub c1: T,
    pub y: T,
    pub c2: T,
}

impl<T: Scalar> Default for StepSchedule<T> {
    fn default() -> Self {
        Self {
            z: T::one(),
            c1: T::lit(0.6),
            y: T::one(),
            c2: T::lit(0.85),
        }
    }
}

impl<T: Scalar> StepSchedule<T> {
    pub fn new(z: T, c1: T, y: T, c2: T) -> Self {
        Self { z, c1, y, c2 }
    }

    /// Fast (q-estimate) step size for the `n`-th visit, `n ≥ 1`.
    #[inline]
    pub fn alpha(&self, n: u64) -> T {
        debug_assert!(n >= 1);
        self.z * T::lit(n as f64).powf(-self.c1)
    }

    /// Slow (policy) step size for the `n`-th visit, `n ≥ 1`.
    #[inline]
    pub fn beta(&self, n: u64) -> T {
        debug_assert!(n >= 1);
        self.y * T::lit(n as f64).powf(-self.c2)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("step scale {name} = {value} must lie in (0, 1]")]
    Scale { name: &'static str, value: f64 },
    #[error("exponent {name} = {value} must be positive for the step sizes to vanish")]
    Vanishing { name: &'static str, value: f64 },
    #[error("exponent {name} = {value} exceeds 1: the step sizes are summable")]
    Divergence { name: &'static str, value: f64 },
    #[error("c1 = {c1} must exceed 1/2 so that Σ α(n)^2 < ∞")]
    Summability { c1: f64 },
    #[error("c2 = {c2} must exceed c1 = {c1} so that β(n)/α(n) → 0")]
    Timescale { c1: f64, c2: f64 },
    #[error(
        "players use different exponents; step-size ratios between players would be unbounded"
    )]
    Heterogeneity,
    #[error("no schedules given")]
    Empty,
}

/// Checks one power-law schedule against the step-size conditions:
/// non-summable, vanishing, square-summable fast steps, and a strictly slower
/// policy timescale. Scales must keep every step in `(0, 1]`.
pub fn validate_schedule<T: Scalar>(sched: &StepSchedule<T>) -> Result<(), ScheduleError> {
    let (z, c1, y, c2) = (
        sched.z.as_f64(),
        sched.c1.as_f64(),
        sched.y.as_f64(),
        sched.c2.as_f64(),
    );
    for (name, value) in [("z", z), ("y", y)] {
        if !(value > 0.0 && value <= 1.0) {
            return Err(ScheduleError::Scale { name, value });
        }
    }
    for (name, value) in [("c1", c1), ("c2", c2)] {
        if !(value > 0.0) {
            return Err(ScheduleError::Vanishing { name, value });
        }
        if value > 1.0 {
            return Err(ScheduleError::Divergence { name, value });
        }
    }
    if c1 <= 0.5 {
        return Err(ScheduleError::Summability { c1 });
    }
    if c2 <= c1 {
        return Err(ScheduleError::Timescale { c1, c2 });
    }
    Ok(())
}

/// Validates every player's schedule and requires shared exponents (scales may
/// differ, which keeps cross-player ratios bounded).
pub fn validate_schedules<T: Scalar>(scheds: &[StepSchedule<T>]) -> Result<(), ScheduleError> {
    let first = scheds.first().ok_or(ScheduleError::Empty)?;
    for s in scheds {
        validate_schedule(s)?;
        if s.c1 != first.c1 || s.c2 != first.c2 {
            return Err(ScheduleError::Heterogeneity);
        }
    }
    Ok(())
}
