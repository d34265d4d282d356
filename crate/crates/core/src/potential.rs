//! Markov potential games: verified constructors, potential evaluation and the
//! Lyapunov gap `φ(π) = max_ϖ Φ(μ, ϖ) - Φ(μ, π)`.
//!
//! Membership is certified by construction (identical-interest games and
//! single-state potential games) and spot-checked by [`verify_mpg`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::game::{
    dot, validate_game, value_function, DeterministicProfiles, GameError, GameSpec, PolicyProfile,
    RawGame,
};
use crate::random::{random_player_policy, random_policy};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error(
        "payoff of player {player} differs from player 0 at state {state}, joint action {joint}"
    )]
    PayoffMismatch {
        player: usize,
        state: usize,
        joint: usize,
    },
    #[error("malformed potential: {0}")]
    Shape(String),
    #[error(transparent)]
    Game(#[from] GameError),
}

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialKind<T> {
    /// Identical interests: `Φ(s, π) = V_common(s, π)`.
    Team,
    /// One state; `Φ(s0, π) = E_π[Φ(a)] / (1 - δ)`. `zeta[i][a_{-i}]` holds the
    /// per-player terms when the game was built as `u_i = Φ + ζ_i`; it is
    /// `None` for a claimed (unverified) potential.
    SingleState {
        phi: Vec<T>,
        zeta: Option<Vec<Vec<T>>>,
    },
}

/// A game together with its (claimed) potential function.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSpec<T> {
    kind: PotentialKind<T>,
    game: GameSpec<T>,
}

/// Payoff source for [`make_team_game`].
#[derive(Clone, Debug)]
pub enum TeamPayoff<T> {
    /// `tables[i][s][j]`; all players' tables must coincide.
    Explicit(Vec<Vec<Vec<T>>>),
    /// One common table drawn uniformly from `[lo, hi)` with a seeded generator.
    Seeded { seed: u64, lo: f64, hi: f64 },
}

/// Builds an identical-interest Markov game.
pub fn make_team_game<T: Scalar>(
    states: Vec<String>,
    actions: Vec<Vec<String>>,
    payoff: TeamPayoff<T>,
    transition: Vec<Vec<Vec<T>>>,
    discount: T,
    mu: Vec<T>,
) -> Result<PotentialSpec<T>, PotentialError> {
    let num_players = actions.len();
    let tables = match payoff {
        TeamPayoff::Explicit(t) => t,
        TeamPayoff::Seeded { seed, lo, hi } => {
            let joint: usize = actions.iter().map(Vec::len).product();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let table: Vec<Vec<T>> = (0..states.len())
                .map(|_| {
                    (0..joint)
                        .map(|_| T::lit(rng.random_range(lo..hi)))
                        .collect()
                })
                .collect();
            vec![table; num_players]
        }
    };
    let game = validate_game(RawGame {
        num_players,
        discount,
        states,
        actions,
        mu,
        payoff: tables,
        transition,
    })?;
    team_from_game(game)
}

/// Wraps an existing game as a team game, checking payoff equality exactly.
pub fn team_from_game<T: Scalar>(game: GameSpec<T>) -> Result<PotentialSpec<T>, PotentialError> {
    for i in 1..game.num_players() {
        for s in 0..game.num_states() {
            if let Some(j) = game
                .payoff_row(i, s)
                .iter()
                .zip(game.payoff_row(0, s))
                .position(|(a, b)| a != b)
            {
                return Err(PotentialError::PayoffMismatch {
                    player: i,
                    state: s,
                    joint: j,
                });
            }
        }
    }
    Ok(PotentialSpec {
        kind: PotentialKind::Team,
        game,
    })
}

/// One-state potential game with `u_i(a) = Φ(a) + ζ_i(a_{-i})` and a self-loop
/// transition.
///
/// `phi` is indexed by joint action; `zeta[i]` by the opponents' joint action
/// in player-last order with player `i` removed.
pub fn make_single_state_potential<T: Scalar>(
    actions: &[usize],
    phi: Vec<T>,
    zeta: Vec<Vec<T>>,
    discount: T,
) -> Result<PotentialSpec<T>, PotentialError> {
    let joint = crate::game::JointActionSpace::new(actions.to_vec())
        .ok_or_else(|| PotentialError::Shape("every player needs an action".into()))?;
    if phi.len() != joint.size() {
        return Err(PotentialError::Shape(format!(
            "phi has {} entries, expected {}",
            phi.len(),
            joint.size()
        )));
    }
    if zeta.len() != actions.len() {
        return Err(PotentialError::Shape(format!(
            "zeta has {} players",
            zeta.len()
        )));
    }
    for (i, z) in zeta.iter().enumerate() {
        if z.len() != joint.opponent_size(i) {
            return Err(PotentialError::Shape(format!(
                "zeta[{i}] has {} entries, expected {}",
                z.len(),
                joint.opponent_size(i)
            )));
        }
    }
    let payoff = (0..actions.len())
        .map(|i| {
            vec![(0..joint.size())
                .map(|j| phi[j] + zeta[i][joint.opponent_index(j, i)])
                .collect()]
        })
        .collect();
    let game = validate_game(single_state_raw(actions, payoff, discount))?;
    Ok(PotentialSpec {
        kind: PotentialKind::SingleState {
            phi,
            zeta: Some(zeta),
        },
        game,
    })
}

/// Checks that a one-state game has payoffs `Φ(a) + ζ_i(a_{-i})` up to a
/// relative tolerance of `SOLVER_TOL` and pairs it with that decomposition.
pub fn single_state_from_game<T: Scalar>(
    game: GameSpec<T>,
    phi: Vec<T>,
    zeta: Vec<Vec<T>>,
) -> Result<PotentialSpec<T>, PotentialError> {
    let built = make_single_state_potential(game.joint().counts(), phi, zeta, game.discount())?;
    if game.num_states() != 1 {
        return Err(PotentialError::Shape(
            "single-state potential needs a one-state game".into(),
        ));
    }
    let scale = T::one() + game.max_abs_payoff();
    for i in 0..game.num_players() {
        for j in 0..game.joint().size() {
            if (game.payoff(i, 0, j) - built.game.payoff(i, 0, j)).abs()
                > scale * T::lit(T::SOLVER_TOL)
            {
                return Err(PotentialError::PayoffMismatch {
                    player: i,
                    state: 0,
                    joint: j,
                });
            }
        }
    }
    Ok(PotentialSpec {
        kind: built.kind,
        game,
    })
}

/// Pairs a one-state game with a candidate potential table without checking
/// it; [`verify_mpg`] decides whether the claim holds.
pub fn claimed_single_state_potential<T: Scalar>(
    game: GameSpec<T>,
    phi: Vec<T>,
) -> Result<PotentialSpec<T>, PotentialError> {
    if game.num_states() != 1 {
        return Err(PotentialError::Shape(
            "single-state potential needs a one-state game".into(),
        ));
    }
    if phi.len() != game.joint().size() {
        return Err(PotentialError::Shape(
            "phi length does not match the joint action space".into(),
        ));
    }
    Ok(PotentialSpec {
        kind: PotentialKind::SingleState { phi, zeta: None },
        game,
    })
}

/// Raw one-state game with the given per-player payoff rows.
pub fn single_state_raw<T: Scalar>(
    actions: &[usize],
    payoff: Vec<Vec<Vec<T>>>,
    discount: T,
) -> RawGame<T> {
    let joint: usize = actions.iter().product();
    RawGame {
        num_players: actions.len(),
        discount,
        states: vec!["s0".into()],
        actions: actions
            .iter()
            .map(|&k| (0..k).map(|a| format!("a{}", a + 1)).collect())
            .collect(),
        mu: vec![T::one()],
        payoff,
        transition: vec![vec![vec![T::one()]; joint]],
    }
}

impl<T: Scalar> PotentialSpec<T> {
    pub fn game(&self) -> &GameSpec<T> {
        &self.game
    }

    pub fn kind(&self) -> &PotentialKind<T> {
        &self.kind
    }

    pub fn into_game(self) -> GameSpec<T> {
        self.game
    }

    /// `Φ(s, π)` for every state.
    pub fn state_potential(&self, pi: &PolicyProfile<T>) -> Vec<T> {
        match &self.kind {
            PotentialKind::Team => value_function(&self.game, pi, 0).0,
            PotentialKind::SingleState { phi, .. } => {
                let joint = self.game.joint();
                let expected: T = (0..joint.size())
                    .map(|j| {
                        let w = (0..joint.num_players()).fold(T::one(), |w, k| {
                            w * pi.player(k)[(0, joint.component(j, k))]
                        });
                        w * phi[j]
                    })
                    .sum();
                vec![expected / (T::one() - self.game.discount())]
            }
        }
    }
}

/// `Φ(μ, π) = Σ_s μ(s) Φ(s, π)`.
pub fn potential_value<T: Scalar>(spec: &PotentialSpec<T>, pi: &PolicyProfile<T>, mu: &[T]) -> T {
    dot(mu, &spec.state_potential(pi))
}

/// Maximum of `Φ(μ, ·)` over stationary policies, attained at a deterministic
/// joint policy.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialMaximum<T> {
    pub value: T,
    /// Maximizing choices `[player][state]` (smallest enumeration index on ties).
    pub choices: Vec<Vec<usize>>,
}

impl<T: Scalar> PotentialMaximum<T> {
    /// `φ(π) = max Φ(μ, ·) - Φ(μ, π)`.
    pub fn gap(&self, spec: &PotentialSpec<T>, pi: &PolicyProfile<T>, mu: &[T]) -> T {
        self.value - potential_value(spec, pi, mu)
    }

    pub fn profile(&self, game: &GameSpec<T>) -> PolicyProfile<T> {
        PolicyProfile::deterministic(game, &self.choices)
    }
}

/// Exhaustive maximization of `Φ(μ, ·)` over deterministic joint policies.
pub fn potential_maximum<T: Scalar>(
    spec: &PotentialSpec<T>,
    mu: &[T],
    cap: u128,
) -> Result<PotentialMaximum<T>, PotentialError> {
    let profiles = DeterministicProfiles::new(&spec.game);
    profiles.check_cap(cap)?;
    let (value, index) = (0..profiles.count() as u64)
        .into_par_iter()
        .map(|k| {
            (
                potential_value(spec, &profiles.profile(&spec.game, k as u128), mu),
                k,
            )
        })
        .reduce(
            || (T::neg_infinity(), u64::MAX),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );
    Ok(PotentialMaximum {
        value,
        choices: profiles.choices(spec.game.num_states(), index as u128),
    })
}

/// Convenience wrapper computing the maximum and the gap in one call.
pub fn lyapunov_gap<T: Scalar>(
    spec: &PotentialSpec<T>,
    pi: &PolicyProfile<T>,
    mu: &[T],
    cap: u128,
) -> Result<T, PotentialError> {
    Ok(potential_maximum(spec, mu, cap)?.gap(spec, pi, mu))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MpgReport<T> {
    pub samples: usize,
    pub tolerance: T,
    /// Largest `|ΔΦ(s) - ΔV_i(s)|` per state over all samples.
    pub max_violation_per_state: Vec<T>,
    /// Same quantity for the initial distribution `μ` of the game.
    pub max_violation_at_mu: T,
    pub max_violation: T,
    pub passed: bool,
}

/// Samples unilateral deviations `(i, π_i, π_i', π_{-i})` with Dirichlet(1)
/// rows and measures how far the potential identity is violated.
pub fn verify_mpg<T: Scalar, R: Rng + ?Sized>(
    spec: &PotentialSpec<T>,
    num_samples: usize,
    tol: T,
    rng: &mut R,
) -> MpgReport<T> {
    let game = &spec.game;
    let mu = game.init_dist();
    let mut per_state = vec![T::zero(); game.num_states()];
    let mut at_mu = T::zero();
    for _ in 0..num_samples {
        let i = rng.random_range(0..game.num_players());
        let base = random_policy(rng, game);
        let alt = base.with_player(
            i,
            random_player_policy(rng, game.num_states(), game.num_actions(i)),
        );
        let d_phi: Vec<T> = spec
            .state_potential(&alt)
            .iter()
            .zip(spec.state_potential(&base))
            .map(|(a, b)| *a - b)
            .collect();
        let d_v: Vec<T> = value_function(game, &alt, i)
            .iter()
            .zip(value_function(game, &base, i).iter())
            .map(|(a, b)| *a - *b)
            .collect();
        for s in 0..game.num_states() {
            per_state[s] = per_state[s].max((d_phi[s] - d_v[s]).abs());
        }
        at_mu = at_mu.max((dot(mu, &d_phi) - dot(mu, &d_v)).abs());
    }
    let max_violation = per_state.iter().copied().fold(at_mu, T::max);
    MpgReport {
        samples: num_samples,
        tolerance: tol,
        max_violation_per_state: per_state,
        max_violation_at_mu: at_mu,
        max_violation,
        passed: max_violation <= tol,
    }
}
