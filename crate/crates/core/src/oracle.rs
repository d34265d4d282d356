//! Ground-truth equilibrium machinery: exact best responses, Nash gaps,
//! best-response fixed-point checks and deterministic-profile enumeration.

use rayon::prelude::*;
use serde::Serialize;

use crate::game::{
    induced_mdp, q_function, value_function, DeterministicProfiles, GameError, GameSpec,
    InducedMdp, PolicyProfile, StateActionTable, ValueVector,
};
use crate::scalar::{sup_dist, Scalar};

/// Default cap on `Π_i |A_i|^{|S|}` for exhaustive enumeration.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

/// Certification threshold for exact (non-learning) checks.
pub const EXACT_EPSILON: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct BestResponse<T> {
    /// Deterministic optimal policy, lexicographic among optimal actions.
    pub policy: StateActionTable<T>,
    pub choices: Vec<usize>,
    /// Optimal value from every start state.
    pub values: ValueVector<T>,
}

/// Best response of player `i` to `π_{-i}` (player `i`'s own component of `pi`
/// is ignored).
///
/// Value iteration runs until the contraction bound certifies the solver
/// tolerance; the greedy policy is then polished by policy iteration and
/// evaluated exactly.
pub fn best_response<T: Scalar>(
    game: &GameSpec<T>,
    pi: &PolicyProfile<T>,
    i: usize,
) -> BestResponse<T> {
    solve_mdp(&induced_mdp(game, pi, i))
}

/// Optimal deterministic policy of a finite discounted MDP.
pub fn solve_mdp<T: Scalar>(mdp: &InducedMdp<T>) -> BestResponse<T> {
    let n = mdp.num_states();
    let d = mdp.discount;
    let tol = T::lit(T::SOLVER_TOL);
    let mut v = vec![T::zero(); n];
    // ‖V* - V_k‖ ≤ δ/(1-δ) ‖V_k - V_{k-1}‖; the iteration count is bounded by
    // log(tol (1-δ) / ‖V_1 - V_0‖) / log δ.
    let mut max_iter = usize::MAX;
    let mut k = 0usize;
    while k < max_iter {
        let next: Vec<T> = greedy_values(mdp, &v);
        let diff = sup_dist(&next, &v);
        if k == 0 && diff > T::zero() {
            let bound = (tol * (T::one() - d) / diff).ln() / d.ln();
            max_iter = bound
                .ceil()
                .to_usize()
                .unwrap_or(0)
                .saturating_add(2)
                .min(1_000_000);
        }
        v = next;
        k += 1;
        if diff * d <= tol * (T::one() - d) {
            break;
        }
    }

    let mut choices = greedy_choices(mdp, &v, tol);
    let mut values = v;
    for _ in 0..64 {
        let policy = StateActionTable::deterministic(mdp.num_actions(), &choices);
        values = mdp.evaluate(&policy);
        let q = mdp.backup(&values);
        let mut changed = false;
        for s in 0..n {
            let cur = q[(s, choices[s])];
            let best = lexicographic_argmax(q.row(s), tol);
            if q[(s, best)] > cur + tol * (T::one() + cur.abs()) {
                choices[s] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    BestResponse {
        policy: StateActionTable::deterministic(mdp.num_actions(), &choices),
        choices,
        values: ValueVector(values),
    }
}

fn greedy_values<T: Scalar>(mdp: &InducedMdp<T>, v: &[T]) -> Vec<T> {
    let q = mdp.backup(v);
    (0..mdp.num_states())
        .map(|s| q.row(s).iter().copied().fold(T::neg_infinity(), T::max))
        .collect()
}

fn greedy_choices<T: Scalar>(mdp: &InducedMdp<T>, v: &[T], tol: T) -> Vec<usize> {
    let q = mdp.backup(v);
    (0..mdp.num_states())
        .map(|s| lexicographic_argmax(q.row(s), tol))
        .collect()
}

/// Smallest index within `tol` (relative to the row maximum) of the maximum.
fn lexicographic_argmax<T: Scalar>(row: &[T], tol: T) -> usize {
    let max = row.iter().copied().fold(T::neg_infinity(), T::max);
    let slack = tol * (T::one() + max.abs());
    row.iter().position(|&x| x >= max - slack).unwrap_or(0)
}

/// Per-player, per-state best-response improvement and ε-Nash certificate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NashReport<T> {
    /// `gaps[i][s] = V_i(s, BR_i, π_{-i}) - V_i(s, π)`.
    pub gaps: Vec<Vec<T>>,
    pub max_gap: T,
    pub epsilon: T,
    pub certified: bool,
}

impl<T: Scalar> NashReport<T> {
    /// Largest improvement available to any player when play starts from `μ`.
    pub fn gap_at(&self, mu: &[T]) -> T {
        self.gaps
            .iter()
            .map(|g| g.iter().zip(mu).map(|(x, m)| *x * *m).sum::<T>())
            .fold(T::neg_infinity(), T::max)
    }
}

/// Nash gap of `pi`. Gaps are checked in every state, which covers every
/// initial distribution.
pub fn nash_gap<T: Scalar>(game: &GameSpec<T>, pi: &PolicyProfile<T>, epsilon: T) -> NashReport<T> {
    let gaps: Vec<Vec<T>> = (0..game.num_players())
        .map(|i| {
            let br = best_response(game, pi, i);
            let v = value_function(game, pi, i);
            br.values
                .iter()
                .zip(v.iter())
                .map(|(b, x)| *b - *x)
                .collect()
        })
        .collect();
    let max_gap = gaps
        .iter()
        .flatten()
        .copied()
        .fold(T::neg_infinity(), T::max);
    NashReport {
        gaps,
        max_gap,
        epsilon,
        certified: max_gap <= epsilon,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedPointViolation<T> {
    pub player: usize,
    pub state: usize,
    pub action: usize,
    pub probability: T,
    /// `max_a Q_i(s, a; π) - Q_i(s, action; π)`.
    pub shortfall: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedPointReport<T> {
    pub violations: Vec<FixedPointViolation<T>>,
}

impl<T> FixedPointReport<T> {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `π_i(s) ∈ br_i(s; π)` for every player and state: every action
/// played with probability above `tol` must be within `tol` of the best
/// one-stage deviation value.
pub fn br_fixed_point_check<T: Scalar>(
    game: &GameSpec<T>,
    pi: &PolicyProfile<T>,
    tol: T,
) -> FixedPointReport<T> {
    let mut violations = Vec::new();
    for i in 0..game.num_players() {
        let q = q_function(game, pi, i);
        let own = pi.player(i);
        for s in 0..game.num_states() {
            let best = q.row(s).iter().copied().fold(T::neg_infinity(), T::max);
            for (a, &p) in own.row(s).iter().enumerate() {
                let shortfall = best - q[(s, a)];
                if p > tol && shortfall > tol {
                    violations.push(FixedPointViolation {
                        player: i,
                        state: s,
                        action: a,
                        probability: p,
                        shortfall,
                    });
                }
            }
        }
    }
    FixedPointReport { violations }
}

/// All deterministic stationary profiles certified as ε-Nash, in enumeration
/// order.
pub fn enumerate_nash_deterministic<T: Scalar>(
    game: &GameSpec<T>,
    epsilon: T,
    cap: u128,
) -> Result<Vec<PolicyProfile<T>>, GameError> {
    let profiles = DeterministicProfiles::new(game);
    profiles.check_cap(cap)?;
    let count = profiles.count() as u64;
    Ok((0..count)
        .into_par_iter()
        .filter_map(|k| {
            let pi = profiles.profile(game, k as u128);
            nash_gap(game, &pi, epsilon).certified.then_some(pi)
        })
        .collect())
}
