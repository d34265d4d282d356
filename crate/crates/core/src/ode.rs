//! Explicit Euler integration of the limiting policy flow
//! `dπ_i(s)/dτ = γ_i(s) (br_i(s; π) - π_i(s))` with exact Q-functions, and
//! monitoring of the Lyapunov gap along the trajectory.

use serde::Serialize;
use thiserror::Error;

use crate::game::{argmax_first, q_function, PolicyProfile};
use crate::oracle::nash_gap;
use crate::potential::{potential_maximum, PotentialError, PotentialSpec};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("invalid flow configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowConfig<T> {
    /// Rates `γ_i(s)`, indexed `[player][state]`.
    pub gamma: Vec<Vec<T>>,
    pub dt: T,
    pub horizon: T,
    /// Required lower bound on every rate.
    pub eta: T,
}

impl<T: Scalar> FlowConfig<T> {
    /// `γ ≡ 1`, `η = 1`.
    pub fn unit_rates(num_players: usize, num_states: usize, dt: T, horizon: T) -> Self {
        Self {
            gamma: vec![vec![T::one(); num_states]; num_players],
            dt,
            horizon,
            eta: T::one(),
        }
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round().to_usize().unwrap_or(0)
    }

    fn validate(&self, players: usize, states: usize) -> Result<(), FlowError> {
        if !(self.dt > T::zero()) || !(self.horizon >= T::zero()) {
            return Err(FlowError::Config(
                "dt must be positive and the horizon nonnegative".into(),
            ));
        }
        if !(self.eta > T::zero()) {
            return Err(FlowError::Config("eta must be positive".into()));
        }
        if self.gamma.len() != players || self.gamma.iter().any(|g| g.len() != states) {
            return Err(FlowError::Config(
                "gamma must be indexed [player][state]".into(),
            ));
        }
        let max = self.gamma.iter().flatten().copied().fold(T::zero(), T::max);
        if self.gamma.iter().flatten().any(|&g| g < self.eta) {
            return Err(FlowError::Config("every rate must be at least eta".into()));
        }
        if self.dt * max > T::one() {
            return Err(FlowError::Config(format!(
                "dt * max gamma = {} exceeds 1",
                (self.dt * max).as_f64()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowPoint<T> {
    pub tau: T,
    pub policy: PolicyProfile<T>,
    /// Lyapunov gap `φ(τ)`.
    pub phi: T,
    pub nash_gap: T,
    /// Lexicographic best one-stage deviation `[player][state]` at this point.
    pub selection: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub points: Vec<FlowPoint<T>>,
}

impl<T> Trajectory<T> {
    pub fn last(&self) -> &FlowPoint<T> {
        self.points
            .last()
            .expect("trajectory has its initial point")
    }
}

fn selection<T: Scalar>(spec: &PotentialSpec<T>, pi: &PolicyProfile<T>) -> Vec<Vec<usize>> {
    let game = spec.game();
    (0..game.num_players())
        .map(|i| {
            let q = q_function(game, pi, i);
            (0..game.num_states())
                .map(|s| argmax_first(q.row(s)))
                .collect()
        })
        .collect()
}

/// Integrates the flow from `pi0` for `round(horizon / dt)` Euler steps.
/// Each step is a convex combination with weight `dt·γ ≤ 1`, so every iterate
/// stays in the product of simplices.
pub fn integrate_flow<T: Scalar>(
    spec: &PotentialSpec<T>,
    pi0: &PolicyProfile<T>,
    cfg: &FlowConfig<T>,
    enumeration_cap: u128,
) -> Result<Trajectory<T>, FlowError> {
    let game = spec.game();
    cfg.validate(game.num_players(), game.num_states())?;
    let mu = game.init_dist();
    let maximum = potential_maximum(spec, mu, enumeration_cap)?;

    let point = |tau: T, pi: PolicyProfile<T>| {
        let sel = selection(spec, &pi);
        FlowPoint {
            tau,
            phi: maximum.gap(spec, &pi, mu),
            nash_gap: nash_gap(game, &pi, T::zero()).max_gap,
            selection: sel,
            policy: pi,
        }
    };

    let steps = cfg.steps();
    let mut points = Vec::with_capacity(steps + 1);
    points.push(point(T::zero(), pi0.clone()));
    for k in 0..steps {
        let cur = &points[k];
        let mut next = cur.policy.clone();
        for i in 0..game.num_players() {
            let table = next.player_mut(i);
            for s in 0..game.num_states() {
                let w = cfg.dt * cfg.gamma[i][s];
                let br = cur.selection[i][s];
                for (a, p) in table.row_mut(s).iter_mut().enumerate() {
                    let target = if a == br { T::one() } else { T::zero() };
                    *p = (T::one() - w) * *p + w * target;
                }
            }
        }
        points.push(point(T::lit((k + 1) as f64) * cfg.dt, next));
    }
    Ok(Trajectory { points })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityReport<T> {
    pub steps: usize,
    pub tol_step: T,
    /// Steps whose best-response selection differs from the previous step's.
    pub switch_steps: usize,
    /// `Δφ > tol_step` on ordinary steps.
    pub violations: usize,
    /// `Δφ > tol_step` on switch steps (reported, not counted against the flow).
    pub switch_violations: usize,
    /// Largest `Δφ` over ordinary steps (negative if φ always decreased).
    pub max_increase: T,
    pub max_switch_increase: T,
    /// Flagged steps of either kind over all steps.
    pub fraction_flagged: f64,
    pub passed: bool,
}

/// Per-step `Δφ` audit. `tol_step` is typically `1e-6 · dt`.
pub fn lyapunov_monotonicity_report<T: Scalar>(
    traj: &Trajectory<T>,
    tol_step: T,
) -> MonotonicityReport<T> {
    let pts = &traj.points;
    let steps = pts.len().saturating_sub(1);
    let mut report = MonotonicityReport {
        steps,
        tol_step,
        switch_steps: 0,
        violations: 0,
        switch_violations: 0,
        max_increase: T::neg_infinity(),
        max_switch_increase: T::neg_infinity(),
        fraction_flagged: 0.0,
        passed: true,
    };
    for k in 0..steps {
        let delta = pts[k + 1].phi - pts[k].phi;
        let switched = k > 0 && pts[k].selection != pts[k - 1].selection;
        if switched {
            report.switch_steps += 1;
            report.max_switch_increase = report.max_switch_increase.max(delta);
            if delta > tol_step {
                report.switch_violations += 1;
            }
        } else {
            report.max_increase = report.max_increase.max(delta);
            if delta > tol_step {
                report.violations += 1;
            }
        }
    }
    if steps > 0 {
        report.fraction_flagged =
            (report.violations + report.switch_violations) as f64 / steps as f64;
    }
    report.passed = report.violations == 0;
    report
}
