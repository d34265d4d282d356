//! Seeded generators for random games and policies.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::game::{validate_game, GameSpec, PolicyProfile, RawGame, StateActionTable};
use crate::scalar::Scalar;

/// Sample from the flat Dirichlet(1, …, 1) distribution on the `k`-simplex.
pub fn dirichlet_uniform<T: Scalar, R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<T> {
    let e: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|x| T::lit(x / total)).collect()
}

/// One player's policy with every row drawn from Dirichlet(1, …, 1).
pub fn random_player_policy<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    num_states: usize,
    num_actions: usize,
) -> StateActionTable<T> {
    let mut t = StateActionTable::zeros(num_states, num_actions);
    for s in 0..num_states {
        let row = dirichlet_uniform(rng, num_actions);
        t.row_mut(s).copy_from_slice(&row);
    }
    t
}

pub fn random_policy<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    game: &GameSpec<T>,
) -> PolicyProfile<T> {
    let tables = (0..game.num_players())
        .map(|i| random_player_policy(rng, game.num_states(), game.num_actions(i)))
        .collect();
    PolicyProfile::new(game, tables).expect("random rows are distributions")
}

/// Shape and distribution parameters for [`random_game`].
#[derive(Clone, Debug)]
pub struct RandomGameParams {
    pub num_states: usize,
    pub actions: Vec<usize>,
    pub discount: f64,
    /// Payoffs are uniform on `[lo, hi)`.
    pub payoff_range: (f64, f64),
    /// Every transition probability is at least this (must be `< 1/|S|`).
    pub min_transition: f64,
    /// All players share one payoff table (identical-interest game).
    pub identical_payoffs: bool,
}

impl RandomGameParams {
    /// 2 states, two players with two actions each.
    pub fn small(discount: f64) -> Self {
        Self {
            num_states: 2,
            actions: vec![2, 2],
            discount,
            payoff_range: (0.0, 1.0),
            min_transition: 0.0,
            identical_payoffs: false,
        }
    }
}

/// Raw random game; transition rows are `min + (1 - n·min)·Dirichlet(1)`.
pub fn random_raw_game<R: Rng + ?Sized>(rng: &mut R, params: &RandomGameParams) -> RawGame<f64> {
    let n = params.num_states;
    let players = params.actions.len();
    let joint: usize = params.actions.iter().product();
    let (lo, hi) = params.payoff_range;
    let floor = params.min_transition;
    assert!(floor * (n as f64) < 1.0, "transition floor too large");

    let draw_table = |rng: &mut R| -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| (0..joint).map(|_| rng.random_range(lo..hi)).collect())
            .collect()
    };
    let payoff = if params.identical_payoffs {
        vec![draw_table(rng); players]
    } else {
        (0..players).map(|_| draw_table(rng)).collect()
    };
    let transition = (0..n)
        .map(|_| {
            (0..joint)
                .map(|_| {
                    let mut row: Vec<f64> = dirichlet_uniform::<f64, _>(rng, n)
                        .into_iter()
                        .map(|p| floor + (1.0 - n as f64 * floor) * p)
                        .collect();
                    normalize(&mut row);
                    row
                })
                .collect()
        })
        .collect();
    let mut mu: Vec<f64> = dirichlet_uniform::<f64, _>(rng, n)
        .into_iter()
        .map(|p| 0.1 / n as f64 + 0.9 * p)
        .collect();
    normalize(&mut mu);
    RawGame {
        num_players: players,
        discount: params.discount,
        states: (0..n).map(|s| format!("s{s}")).collect(),
        actions: params
            .actions
            .iter()
            .map(|&k| (0..k).map(|a| format!("a{}", a + 1)).collect())
            .collect(),
        mu,
        payoff,
        transition,
    }
}

/// Random validated game. Rows drawn from a continuous distribution are
/// strictly positive almost surely, so validation succeeds.
pub fn random_game<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    params: &RandomGameParams,
) -> GameSpec<T> {
    let raw = random_raw_game(rng, params);
    let raw = RawGame {
        num_players: raw.num_players,
        discount: T::lit(raw.discount),
        states: raw.states,
        actions: raw.actions,
        mu: raw.mu.into_iter().map(T::lit).collect(),
        payoff: raw
            .payoff
            .into_iter()
            .map(|p| {
                p.into_iter()
                    .map(|r| r.into_iter().map(T::lit).collect())
                    .collect()
            })
            .collect(),
        transition: raw
            .transition
            .into_iter()
            .map(|p| {
                p.into_iter()
                    .map(|r| r.into_iter().map(T::lit).collect())
                    .collect()
            })
            .collect(),
    };
    validate_game(raw).expect("random game is valid")
}

/// Rescales to unit sum, putting the rounding residue on the largest entry.
fn normalize(row: &mut [f64]) {
    let total: f64 = row.iter().sum();
    for p in row.iter_mut() {
        *p /= total;
    }
    let residue = 1.0 - row.iter().sum::<f64>();
    let k = crate::game::argmax_first(row);
    row[k] += residue;
}
