use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::schedule::{validate_schedule, ScheduleError, StepSchedule};
use crate::game::{argmax_first, QTable, StateActionTable};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnerError {
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("exploration rate {0} must lie in (0, 1]")]
    Exploration(f64),
    #[error("initial policy shape or normalization is wrong")]
    InitialPolicy,
    #[error("{got} learner configs for {players} players")]
    ConfigCount { players: usize, got: usize },
}

/// Tunables of one independent learner.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnerConfig<T> {
    /// Uniform-exploration weight `θ`.
    pub theta: T,
    pub schedule: StepSchedule<T>,
    /// Compute the one-stage deviation from the q-estimate before this
    /// iterate's update instead of after it.
    pub br_uses_stale_q: bool,
    /// Value of every q-estimate entry at start.
    pub initial_q: T,
    /// Starting policy; uniform when `None`.
    pub initial_policy: Option<StateActionTable<T>>,
}

impl<T: Scalar> Default for LearnerConfig<T> {
    fn default() -> Self {
        Self {
            theta: T::lit(0.05),
            schedule: StepSchedule::default(),
            br_uses_stale_q: false,
            initial_q: T::zero(),
            initial_policy: None,
        }
    }
}

/// One player's private learning state.
///
/// The public interface only ever receives realized states and the player's
/// own reward; nothing about opponents (their actions, rewards, policies, or
/// even their number) is visible here.
#[derive(Clone, Debug)]
pub struct Learner<T> {
    discount: T,
    theta: T,
    schedule: StepSchedule<T>,
    br_uses_stale_q: bool,
    q: QTable<T>,
    policy: StateActionTable<T>,
    state_count: Vec<u64>,
    state_action_count: Vec<u64>,
    rng: ChaCha8Rng,
    last_state: Option<usize>,
    last_action: usize,
    last_reward: Option<T>,
}

impl<T: Scalar> Learner<T> {
    /// Learner over `num_states` observable states and its own `num_actions`
    /// actions. `discount` is the common discount factor.
    pub fn new(
        num_states: usize,
        num_actions: usize,
        discount: T,
        config: &LearnerConfig<T>,
        rng: ChaCha8Rng,
    ) -> Result<Self, LearnerError> {
        validate_schedule(&config.schedule)?;
        let theta = config.theta;
        if !(theta > T::zero() && theta <= T::one()) {
            return Err(LearnerError::Exploration(theta.as_f64()));
        }
        let policy = match &config.initial_policy {
            None => StateActionTable::uniform(num_states, num_actions),
            Some(p) => {
                if p.num_states() != num_states
                    || p.num_actions() != num_actions
                    || !p.is_simplex(T::lit(T::SIMPLEX_TOL))
                {
                    return Err(LearnerError::InitialPolicy);
                }
                p.clone()
            }
        };
        Ok(Self {
            discount,
            theta,
            schedule: config.schedule,
            br_uses_stale_q: config.br_uses_stale_q,
            q: StateActionTable::filled(num_states, num_actions, config.initial_q),
            policy,
            state_count: vec![0; num_states],
            state_action_count: vec![0; num_states * num_actions],
            rng,
            last_state: None,
            last_action: 0,
            last_reward: None,
        })
    }

    pub fn q(&self) -> &QTable<T> {
        &self.q
    }

    pub fn policy(&self) -> &StateActionTable<T> {
        &self.policy
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn schedule(&self) -> &StepSchedule<T> {
        &self.schedule
    }

    /// `n(s)`: completed updates at each state.
    pub fn state_counts(&self) -> &[u64] {
        &self.state_count
    }

    /// `ñ(s, a)`.
    pub fn state_action_count(&self, s: usize, a: usize) -> u64 {
        self.state_action_count[s * self.policy.num_actions() + a]
    }

    pub fn num_actions(&self) -> usize {
        self.policy.num_actions()
    }

    /// Stage 0: observe `s^0` and choose `a^0`.
    pub fn begin(&mut self, s0: usize) -> usize {
        let a = self.sample_action(s0);
        self.last_state = Some(s0);
        self.last_action = a;
        self.last_reward = None;
        a
    }

    /// Receives the player's own realized reward for the last action.
    pub fn observe_reward(&mut self, reward: T) {
        self.last_reward = Some(reward);
    }

    /// Iterate `t ≥ 1`: observe `s^t`, update counters, q-estimate and policy
    /// at the previous state, then choose `a^t`.
    ///
    /// Panics if called before [`begin`](Self::begin) and
    /// [`observe_reward`](Self::observe_reward).
    pub fn advance(&mut self, s: usize) -> usize {
        let s_prev = self.last_state.expect("advance called before begin");
        let a_prev = self.last_action;
        let r_prev = self
            .last_reward
            .take()
            .expect("reward of the previous stage not observed");

        self.state_count[s_prev] += 1;
        let k = self.num_actions();
        self.state_action_count[s_prev * k + a_prev] += 1;

        let stale_br = self
            .br_uses_stale_q
            .then(|| argmax_first(self.q.row(s_prev)));
        self.q_update(s_prev, a_prev, r_prev, s);
        let br = stale_br.unwrap_or_else(|| argmax_first(self.q.row(s_prev)));
        self.move_policy(s_prev, br);

        let a = self.sample_action(s);
        self.last_state = Some(s);
        self.last_action = a;
        a
    }

    /// Draws from `(1 - θ) π(s) + θ / |A|`.
    pub fn sample_action(&mut self, s: usize) -> usize {
        let k = self.num_actions();
        let floor = self.theta / T::lit(k as f64);
        let keep = T::one() - self.theta;
        let u = T::lit(self.rng.random::<f64>());
        let mut cum = T::zero();
        for (a, &p) in self.policy.row(s).iter().enumerate() {
            cum = cum + keep * p + floor;
            if u < cum {
                return a;
            }
        }
        k - 1
    }

    /// Asynchronous q-update of entry `(s_prev, a_prev)` with step
    /// `α(ñ(s_prev, a_prev))`; the counter must already count this visit.
    pub fn q_update(&mut self, s_prev: usize, a_prev: usize, r_prev: T, s_curr: usize) {
        let n = self.state_action_count(s_prev, a_prev).max(1);
        let alpha = self.schedule.alpha(n);
        let continuation: T = self
            .policy
            .row(s_curr)
            .iter()
            .zip(self.q.row(s_curr))
            .map(|(p, q)| *p * *q)
            .sum();
        let old = self.q[(s_prev, a_prev)];
        self.q[(s_prev, a_prev)] = old + alpha * (r_prev + self.discount * continuation - old);
    }

    /// Moves the policy row at `s_prev` toward the point mass on the greedy
    /// action of the current q-estimate with step `β(n(s_prev))`.
    pub fn policy_update(&mut self, s_prev: usize) {
        let br = argmax_first(self.q.row(s_prev));
        self.move_policy(s_prev, br);
    }

    fn move_policy(&mut self, s: usize, br: usize) {
        let beta = self.schedule.beta(self.state_count[s].max(1));
        let row = self.policy.row_mut(s);
        for (a, p) in row.iter_mut().enumerate() {
            let target = if a == br { T::one() } else { T::zero() };
            *p = *p + beta * (target - *p);
        }
        let total: T = row.iter().copied().sum();
        if (total - T::one()).abs() > T::lit(1e-9) {
            for p in row.iter_mut() {
                *p = *p / total;
            }
        }
    }
}
