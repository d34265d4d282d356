//! Exact evaluation of stationary joint policies: values, Q-functions,
//! advantages, discounted visitation, the policy Bellman operator, and the
//! policy-gradient and performance-difference identities.
//!
//! Every routine works on the multilinear extension in the policy entries, so
//! the inputs need not be normalized; this is what makes finite-difference
//! checks of [`policy_gradient`] meaningful.

use std::ops::Deref;

use super::policy::{PolicyProfile, QTable, StateActionTable};
use super::spec::{GameError, GameSpec};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Per-state values of one player.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueVector<T>(pub Vec<T>);

impl<T> Deref for ValueVector<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

/// Normalized discounted state occupancy `d^π_μ`.
#[derive(Clone, Debug, PartialEq)]
pub struct VisitationDist<T>(pub Vec<T>);

impl<T> Deref for VisitationDist<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

/// Single-agent MDP faced by player `i` when opponents follow `π_{-i}`:
/// `r(s, a_i) = u_i(s, a_i, π_{-i})`, `P(s' | s, a_i, π_{-i})`.
#[derive(Clone, Debug, PartialEq)]
pub struct InducedMdp<T> {
    pub discount: T,
    pub rewards: StateActionTable<T>,
    // [s][a][s']
    transitions: Vec<T>,
}

impl<T: Scalar> InducedMdp<T> {
    pub fn num_states(&self) -> usize {
        self.rewards.num_states()
    }

    pub fn num_actions(&self) -> usize {
        self.rewards.num_actions()
    }

    pub fn transition_row(&self, s: usize, a: usize) -> &[T] {
        let n = self.num_states();
        let start = (s * self.num_actions() + a) * n;
        &self.transitions[start..start + n]
    }

    /// Expected next-stage continuation `Σ_{s'} P(s'|s,a) w(s')`.
    pub fn expect_next(&self, s: usize, a: usize, w: &[T]) -> T {
        self.transition_row(s, a)
            .iter()
            .zip(w)
            .map(|(p, v)| *p * *v)
            .sum()
    }

    /// State chain and reward vector when the player follows `own`.
    pub fn policy_chain(&self, own: &StateActionTable<T>) -> (Matrix<T>, Vec<T>) {
        let n = self.num_states();
        let mut p = Matrix::zeros(n);
        let mut r = vec![T::zero(); n];
        for s in 0..n {
            for a in 0..self.num_actions() {
                let w = own[(s, a)];
                if w == T::zero() {
                    continue;
                }
                r[s] = r[s] + w * self.rewards[(s, a)];
                for (t, &pt) in self.transition_row(s, a).iter().enumerate() {
                    p[(s, t)] = p[(s, t)] + w * pt;
                }
            }
        }
        (p, r)
    }

    /// Exact value of following `own`: solves `(I - δ P_π) V = r_π`.
    pub fn evaluate(&self, own: &StateActionTable<T>) -> Vec<T> {
        let (p, r) = self.policy_chain(own);
        discounted_system(&p, self.discount).solve(&r)
    }

    /// `r(s,a) + δ Σ_{s'} P(s'|s,a) w(s')` for every `(s, a)`.
    pub fn backup(&self, w: &[T]) -> QTable<T> {
        let mut q = self.rewards.clone();
        for s in 0..self.num_states() {
            for a in 0..self.num_actions() {
                q[(s, a)] = q[(s, a)] + self.discount * self.expect_next(s, a, w);
            }
        }
        q
    }
}

/// `I - δ P`.
fn discounted_system<T: Scalar>(p: &Matrix<T>, discount: T) -> Matrix<T> {
    let n = p.dim();
    let mut m = Matrix::identity(n);
    for s in 0..n {
        for t in 0..n {
            m[(s, t)] = m[(s, t)] - discount * p[(s, t)];
        }
    }
    m
}

/// Builds player `i`'s induced MDP given the opponents' components of `pi`.
pub fn induced_mdp<T: Scalar>(
    game: &GameSpec<T>,
    pi: &PolicyProfile<T>,
    i: usize,
) -> InducedMdp<T> {
    let n = game.num_states();
    let joint = game.joint();
    let na = game.num_actions(i);
    let mut rewards = StateActionTable::zeros(n, na);
    let mut transitions = vec![T::zero(); n * na * n];
    for s in 0..n {
        let payoff = game.payoff_row(i, s);
        for j in 0..joint.size() {
            let mut w = T::one();
            for k in 0..game.num_players() {
                if k != i {
                    w = w * pi.player(k)[(s, joint.component(j, k))];
                }
            }
            if w == T::zero() {
                continue;
            }
            let a = joint.component(j, i);
            rewards[(s, a)] = rewards[(s, a)] + w * payoff[j];
            let base = (s * na + a) * n;
            for (t, &pt) in game.transition_row(s, j).iter().enumerate() {
                transitions[base + t] = transitions[base + t] + w * pt;
            }
        }
    }
    InducedMdp {
        discount: game.discount(),
        rewards,
        transitions,
    }
}

/// State transition matrix `P_π(s, s')` of the joint policy.
pub fn policy_chain<T: Scalar>(game: &GameSpec<T>, pi: &PolicyProfile<T>) -> Matrix<T> {
    induced_mdp(game, pi, 0).policy_chain(pi.player(0)).0
}

/// `V_i(·, π)`.
pub fn value_function<T: Scalar>(
    game: &GameSpec<T>,
    pi: &PolicyProfile<T>,
    i: usize,
) -> ValueVector<T> {
    ValueVector(induced_mdp(game, pi, i).evaluate(pi.player(i)))
}

/// `V_i(μ, π) = Σ_s μ(s) V_i(s, π)`.
pub fn value_at_dist<T: Scalar>(
    game: &GameSpec<T>,
    pi: &PolicyProfile<T>,
    i: usize,
    mu: &[T],
) -> T {
    dot(mu, &value_function(game, pi, i))
}

/// `Q_i(s, a_i; π)`: value of deviating to `a_i` for one stage at `s`.
pub fn q_function<T: Scalar>(game: &GameSpec<T>, pi: &PolicyProfile<T>, i: usize) -> QTable<T> {
    let mdp = induced_mdp(game, pi, i);
    let v = mdp.evaluate(pi.player(i));
    mdp.backup(&v)
}

/// `A_i(s, a_i; π) = Q_i(s, a_i; π) - V_i(s, π)`.
pub fn advantage<T: Scalar>(
    game: &GameSpec<T>,
    pi: &PolicyProfile<T>,
    i: usize,
) -> StateActionTable<T> {
    let mdp = induced_mdp(game, pi, i);
    let v = mdp.evaluate(pi.player(i));
    let mut a = mdp.backup(&v);
    for s in 0..a.num_states() {
        for x in a.row_mut(s) {
            *x = *x - v[s];
        }
    }
    a
}

/// `d^π_μ`, solving `d^T (I - δ P_π) = (1 - δ) μ^T`.
pub fn discounted_visitation<T: Scalar>(
    game: &GameSpec<T>,
    pi: &PolicyProfile<T>,
    mu: &[T],
) -> VisitationDist<T> {
    let d = game.discount();
    let m = discounted_system(&policy_chain(game, pi), d).transpose();
    let rhs: Vec<T> = mu.iter().map(|&x| (T::one() - d) * x).collect();
    VisitationDist(m.solve(&rhs))
}

/// Policy Bellman operator of player `i`:
/// `(T q)(s,a) = u_i(s,a,π_{-i}) + δ Σ_{s'} P(s'|s,a,π_{-i}) Σ_{a'} π_i(s',a') q(s',a')`.
pub fn bellman_operator<T: Scalar>(
    game: &GameSpec<T>,
    pi: &PolicyProfile<T>,
    i: usize,
    q: &QTable<T>,
) -> QTable<T> {
    let own = pi.player(i);
    let w: Vec<T> = (0..q.num_states())
        .map(|s| dot(own.row(s), q.row(s)))
        .collect();
    induced_mdp(game, pi, i).backup(&w)
}

/// `∂V_i(μ, π) / ∂π_i(s, a_i) = d^π_μ(s) Q_i(s, a_i; π) / (1 - δ)`.
pub fn policy_gradient<T: Scalar>(
    game: &GameSpec<T>,
    pi: &PolicyProfile<T>,
    mu: &[T],
    i: usize,
) -> StateActionTable<T> {
    let scale = T::one() / (T::one() - game.discount());
    let d = discounted_visitation(game, pi, mu);
    let mut g = q_function(game, pi, i);
    for s in 0..g.num_states() {
        for x in g.row_mut(s) {
            *x = *x * d[s] * scale;
        }
    }
    g
}

/// Both sides of the multi-agent performance difference identity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerformanceDifference<T> {
    /// `V_i(μ, π) - V_i(μ, π')`.
    pub lhs: T,
    /// `Σ_s d^π_μ(s) Σ_{a_i} π_i(s,a_i) A_i(s,a_i; π') / (1 - δ)`.
    pub rhs: T,
}

/// Evaluates both sides of the performance difference identity for a
/// unilateral deviation of player `i`.
pub fn performance_difference<T: Scalar>(
    game: &GameSpec<T>,
    pi: &PolicyProfile<T>,
    pi_prime: &PolicyProfile<T>,
    i: usize,
    mu: &[T],
) -> Result<PerformanceDifference<T>, GameError> {
    let others: Vec<usize> = pi
        .differing_players(pi_prime)
        .into_iter()
        .filter(|&k| k != i)
        .collect();
    if !others.is_empty() {
        return Err(GameError::DeviatorMismatch(others));
    }
    let lhs = value_at_dist(game, pi, i, mu) - value_at_dist(game, pi_prime, i, mu);
    let d = discounted_visitation(game, pi, mu);
    let adv = advantage(game, pi_prime, i);
    let own = pi.player(i);
    let rhs = (0..game.num_states())
        .map(|s| d[s] * dot(own.row(s), adv.row(s)))
        .sum::<T>()
        / (T::one() - game.discount());
    Ok(PerformanceDifference { lhs, rhs })
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}
