use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::agent::{Learner, LearnerConfig, LearnerError};
use super::env::Environment;
use super::schedule::validate_schedules;
use crate::game::{q_function, PolicyProfile};
use crate::oracle::nash_gap;
use crate::potential::{potential_value, PotentialSpec};
use crate::scalar::Scalar;

/// One row of the metrics series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricsRow<T> {
    pub iterate: u64,
    /// `max_{i,s}` best-response improvement of `π^t`.
    pub nash_gap: T,
    /// `max_{i,s,a} |q_i^t(s,a) - Q_i(s,a; π^t)|`.
    pub q_tracking_error: T,
    /// `Φ(μ, π^t)`.
    pub potential_value: T,
    pub min_state_visits: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMetrics<T> {
    pub seed: u64,
    pub rows: Vec<MetricsRow<T>>,
}

impl<T> RunMetrics<T> {
    pub fn last(&self) -> Option<&MetricsRow<T>> {
        self.rows.last()
    }
}

/// Independent random streams derived from one master seed: stream 0 drives
/// the environment, stream `i + 1` player `i`.
pub fn seed_streams(seed: u64, num_players: usize) -> (ChaCha8Rng, Vec<ChaCha8Rng>) {
    let stream = |k: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k);
        rng
    };
    (
        stream(0),
        (0..num_players).map(|i| stream(i as u64 + 1)).collect(),
    )
}

/// Runs the independent learning dynamics for `iterations` iterates.
///
/// At iterate `t` every learner observes `s^t`, updates its counters, its
/// q-estimate at `(s^{t-1}, a_i^{t-1})` and its policy at `s^{t-1}`, and picks
/// `a_i^t`; the environment then pays out `u_i(s^t, a^t)` and moves on. The
/// only data handed to learner `i` are realized states and its own reward.
/// Every `cadence` iterates the exact metrics of `π^t` are recorded.
pub fn run_dynamics<T: Scalar>(
    spec: &PotentialSpec<T>,
    learners: &mut [Learner<T>],
    env: &mut Environment<'_, T>,
    iterations: u64,
    cadence: u64,
) -> Vec<MetricsRow<T>> {
    let game = spec.game();
    assert_eq!(learners.len(), game.num_players(), "one learner per player");
    assert!(cadence > 0, "metrics cadence must be positive");
    let mut actions = vec![0usize; learners.len()];
    let mut rewards = vec![T::zero(); learners.len()];
    let mut rows = Vec::with_capacity((iterations / cadence) as usize);

    let s0 = env.state();
    for (a, l) in actions.iter_mut().zip(learners.iter_mut()) {
        *a = l.begin(s0);
    }
    env.step(&actions, &mut rewards);
    for (l, &r) in learners.iter_mut().zip(&rewards) {
        l.observe_reward(r);
    }

    for t in 1..=iterations {
        let s = env.state();
        for (a, l) in actions.iter_mut().zip(learners.iter_mut()) {
            *a = l.advance(s);
        }
        env.step(&actions, &mut rewards);
        for (l, &r) in learners.iter_mut().zip(&rewards) {
            l.observe_reward(r);
        }
        if t % cadence == 0 {
            rows.push(measure(spec, learners, t));
        }
    }
    rows
}

/// Exact metrics of the learners' current policies.
pub fn measure<T: Scalar>(
    spec: &PotentialSpec<T>,
    learners: &[Learner<T>],
    iterate: u64,
) -> MetricsRow<T> {
    let game = spec.game();
    let pi = current_profile(spec, learners);
    let q_tracking_error = learners
        .iter()
        .enumerate()
        .map(|(i, l)| l.q().sup_dist(&q_function(game, &pi, i)))
        .fold(T::zero(), T::max);
    MetricsRow {
        iterate,
        nash_gap: nash_gap(game, &pi, T::zero()).max_gap,
        q_tracking_error,
        potential_value: potential_value(spec, &pi, game.init_dist()),
        min_state_visits: learners[0]
            .state_counts()
            .iter()
            .copied()
            .min()
            .unwrap_or(0),
    }
}

/// `π^t` assembled from the learners' policy tables.
pub fn current_profile<T: Scalar>(
    spec: &PotentialSpec<T>,
    learners: &[Learner<T>],
) -> PolicyProfile<T> {
    PolicyProfile::multilinear(
        spec.game(),
        learners.iter().map(|l| l.policy().clone()).collect(),
    )
    .expect("learner tables match the game")
}

/// `max_{i,s,a} |q_i^t(s,a) - Q_i(s,a; π̃^t_{-i}, π_i^t)|` where every
/// opponent `j` plays its sampling mixture `(1-θ_j) π_j + θ_j / |A_j|`.
///
/// The q-estimates average over the actions opponents actually sample, so
/// with `θ > 0` this is the quantity they settle to; the gap to
/// [`MetricsRow::q_tracking_error`] is the exploration bias.
pub fn exploration_adjusted_tracking_error<T: Scalar>(
    spec: &PotentialSpec<T>,
    learners: &[Learner<T>],
) -> T {
    let game = spec.game();
    let pi = current_profile(spec, learners);
    let mixed: Vec<_> = learners
        .iter()
        .map(|l| {
            let k = T::lit(l.num_actions() as f64);
            let mut table = l.policy().clone();
            for p in table.as_mut_slice() {
                *p = (T::one() - l.theta()) * *p + l.theta() / k;
            }
            table
        })
        .collect();
    learners
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let mut players = mixed.clone();
            players[i] = pi.player(i).clone();
            let seen =
                PolicyProfile::multilinear(game, players).expect("learner tables match the game");
            l.q().sup_dist(&q_function(game, &seen, i))
        })
        .fold(T::zero(), T::max)
}

/// Outcome of [`seeded_run`].
#[derive(Clone, Debug)]
pub struct SeededRun<T> {
    pub metrics: RunMetrics<T>,
    pub learners: Vec<Learner<T>>,
}

/// Builds learners and environment from `seed` and runs the dynamics.
/// `configs` holds one entry per player, or a single entry shared by all.
pub fn seeded_run<T: Scalar>(
    spec: &PotentialSpec<T>,
    configs: &[LearnerConfig<T>],
    seed: u64,
    iterations: u64,
    cadence: u64,
) -> Result<SeededRun<T>, LearnerError> {
    let game = spec.game();
    let n = game.num_players();
    let configs: Vec<&LearnerConfig<T>> = match configs.len() {
        1 => vec![&configs[0]; n],
        k if k == n => configs.iter().collect(),
        got => return Err(LearnerError::ConfigCount { players: n, got }),
    };
    validate_schedules(&configs.iter().map(|c| c.schedule).collect::<Vec<_>>())?;
    let (env_rng, player_rngs) = seed_streams(seed, n);
    let mut learners = configs
        .iter()
        .zip(player_rngs)
        .enumerate()
        .map(|(i, (cfg, rng))| {
            Learner::new(
                game.num_states(),
                game.num_actions(i),
                game.discount(),
                cfg,
                rng,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut env = Environment::new(game, env_rng);
    let rows = run_dynamics(spec, &mut learners, &mut env, iterations, cadence);
    Ok(SeededRun {
        metrics: RunMetrics { seed, rows },
        learners,
    })
}
