use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::joint::JointActionSpace;
use crate::scalar::Scalar;

/// Largest joint action space accepted by [`validate_game`].
pub const MAX_JOINT_ACTIONS: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("malformed game: {0}")]
    Shape(String),
    #[error("discount factor {0} is outside (0, 1)")]
    Discount(f64),
    #[error("non-finite {what} entry")]
    NonFinite { what: &'static str },
    #[error("transition row for state {state}, joint action {joint} sums to {sum} (entries must be >= 0 and sum to 1)")]
    Stochasticity {
        state: usize,
        joint: usize,
        sum: f64,
    },
    #[error("initial distribution is not a full-support distribution (state {state} has mass {mass}, total {total})")]
    Support { state: usize, mass: f64, total: f64 },
    #[error("no joint action induces an irreducible aperiodic chain")]
    Irreducibility,
    #[error("joint action space has {0} entries, above the limit of {MAX_JOINT_ACTIONS}")]
    JointSpaceTooLarge(usize),
    #[error("policy is malformed: {0}")]
    Policy(String),
    #[error("profiles differ for players {0:?}; only one deviator is allowed")]
    DeviatorMismatch(Vec<usize>),
    #[error("{count} deterministic profiles exceed the enumeration cap {cap}")]
    EnumerationTooLarge { count: u128, cap: u128 },
}

/// Unvalidated game description; this is also the serialized game-file layout.
///
/// `payoff[i][s][j]` and `transition[s][j][s']` are indexed by the joint action
/// index `j = Σ_i a_i Π_{k>i} |A_k|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RawGame<T> {
    pub num_players: usize,
    pub discount: T,
    pub states: Vec<String>,
    pub actions: Vec<Vec<String>>,
    pub mu: Vec<T>,
    pub payoff: Vec<Vec<Vec<T>>>,
    pub transition: Vec<Vec<Vec<T>>>,
}

/// A validated finite discounted Markov game with full-support initial
/// distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct GameSpec<T> {
    states: Vec<String>,
    actions: Vec<Vec<String>>,
    joint: JointActionSpace,
    discount: T,
    mu: Vec<T>,
    // [player][state][joint]
    payoff: Vec<T>,
    // [state][joint][next]
    transition: Vec<T>,
    witness: usize,
    max_abs_payoff: T,
}

impl<T: Scalar> GameSpec<T> {
    pub fn num_players(&self) -> usize {
        self.joint.num_players()
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn action_names(&self, player: usize) -> &[String] {
        &self.actions[player]
    }

    pub fn num_actions(&self, player: usize) -> usize {
        self.joint.num_actions(player)
    }

    pub fn joint(&self) -> &JointActionSpace {
        &self.joint
    }

    pub fn discount(&self) -> T {
        self.discount
    }

    pub fn init_dist(&self) -> &[T] {
        &self.mu
    }

    /// Joint action whose transition matrix is irreducible and aperiodic.
    pub fn witness_action(&self) -> usize {
        self.witness
    }

    /// `ū = max |u_i(s, a)|`.
    pub fn max_abs_payoff(&self) -> T {
        self.max_abs_payoff
    }

    /// `ū / (1 - δ)`, the sup-norm bound on every value and Q-function.
    pub fn value_bound(&self) -> T {
        self.max_abs_payoff / (T::one() - self.discount)
    }

    #[inline]
    pub fn payoff(&self, player: usize, state: usize, joint: usize) -> T {
        let j = self.joint.size();
        self.payoff[(player * self.states.len() + state) * j + joint]
    }

    /// Payoffs of player `i` in state `s`, indexed by joint action.
    pub fn payoff_row(&self, player: usize, state: usize) -> &[T] {
        let j = self.joint.size();
        let start = (player * self.states.len() + state) * j;
        &self.payoff[start..start + j]
    }

    /// `P(· | s, a)`.
    #[inline]
    pub fn transition_row(&self, state: usize, joint: usize) -> &[T] {
        let n = self.states.len();
        let start = (state * self.joint.size() + joint) * n;
        &self.transition[start..start + n]
    }

    pub fn to_raw(&self) -> RawGame<T> {
        let n = self.num_states();
        let j = self.joint.size();
        RawGame {
            num_players: self.num_players(),
            discount: self.discount,
            states: self.states.clone(),
            actions: self.actions.clone(),
            mu: self.mu.clone(),
            payoff: (0..self.num_players())
                .map(|i| (0..n).map(|s| self.payoff_row(i, s).to_vec()).collect())
                .collect(),
            transition: (0..n)
                .map(|s| (0..j).map(|a| self.transition_row(s, a).to_vec()).collect())
                .collect(),
        }
    }
}

/// Checks every structural invariant of a game and locates an
/// irreducible-aperiodic witness action.
pub fn validate_game<T: Scalar>(raw: RawGame<T>) -> Result<GameSpec<T>, GameError> {
    let n = raw.states.len();
    if n == 0 {
        return Err(GameError::Shape("game has no states".into()));
    }
    if raw.num_players == 0 || raw.actions.len() != raw.num_players {
        return Err(GameError::Shape(format!(
            "num_players = {} but {} action sets given",
            raw.num_players,
            raw.actions.len()
        )));
    }
    let joint = JointActionSpace::new(raw.actions.iter().map(Vec::len).collect())
        .ok_or_else(|| GameError::Shape("every player needs at least one action".into()))?;
    if joint.size() > MAX_JOINT_ACTIONS {
        return Err(GameError::JointSpaceTooLarge(joint.size()));
    }
    let d = raw.discount;
    if !(d > T::zero() && d < T::one()) {
        return Err(GameError::Discount(d.as_f64()));
    }

    let tol = T::lit(T::SIMPLEX_TOL);
    if raw.mu.len() != n {
        return Err(GameError::Shape(format!(
            "mu has {} entries, expected {n}",
            raw.mu.len()
        )));
    }
    if raw.mu.iter().any(|m| !m.is_finite()) {
        return Err(GameError::NonFinite { what: "mu" });
    }
    let total: T = raw.mu.iter().copied().sum();
    if let Some(s) = raw.mu.iter().position(|&m| m <= T::zero()) {
        return Err(GameError::Support {
            state: s,
            mass: raw.mu[s].as_f64(),
            total: total.as_f64(),
        });
    }
    if (total - T::one()).abs() > tol {
        return Err(GameError::Support {
            state: 0,
            mass: raw.mu[0].as_f64(),
            total: total.as_f64(),
        });
    }

    if raw.payoff.len() != raw.num_players {
        return Err(GameError::Shape(format!(
            "payoff has {} players",
            raw.payoff.len()
        )));
    }
    let mut payoff = Vec::with_capacity(raw.num_players * n * joint.size());
    for (i, per_state) in raw.payoff.iter().enumerate() {
        if per_state.len() != n {
            return Err(GameError::Shape(format!(
                "payoff[{i}] has {} states",
                per_state.len()
            )));
        }
        for (s, row) in per_state.iter().enumerate() {
            if row.len() != joint.size() {
                return Err(GameError::Shape(format!(
                    "payoff[{i}][{s}] has {} joint actions, expected {}",
                    row.len(),
                    joint.size()
                )));
            }
            payoff.extend_from_slice(row);
        }
    }
    if payoff.iter().any(|u| !u.is_finite()) {
        return Err(GameError::NonFinite { what: "payoff" });
    }
    let max_abs_payoff = payoff.iter().fold(T::zero(), |m, u| m.max(u.abs()));

    if raw.transition.len() != n {
        return Err(GameError::Shape(format!(
            "transition has {} states",
            raw.transition.len()
        )));
    }
    let mut transition = Vec::with_capacity(n * joint.size() * n);
    for (s, per_joint) in raw.transition.iter().enumerate() {
        if per_joint.len() != joint.size() {
            return Err(GameError::Shape(format!(
                "transition[{s}] has {} joint actions, expected {}",
                per_joint.len(),
                joint.size()
            )));
        }
        for (a, row) in per_joint.iter().enumerate() {
            if row.len() != n {
                return Err(GameError::Shape(format!(
                    "transition[{s}][{a}] has {} entries",
                    row.len()
                )));
            }
            if row.iter().any(|p| !p.is_finite()) {
                return Err(GameError::NonFinite { what: "transition" });
            }
            let sum: T = row.iter().copied().sum();
            if row.iter().any(|&p| p < T::zero()) || (sum - T::one()).abs() > tol {
                return Err(GameError::Stochasticity {
                    state: s,
                    joint: a,
                    sum: sum.as_f64(),
                });
            }
            transition.extend_from_slice(row);
        }
    }

    let mut spec = GameSpec {
        states: raw.states,
        actions: raw.actions,
        joint,
        discount: d,
        mu: raw.mu,
        payoff,
        transition,
        witness: 0,
        max_abs_payoff,
    };
    spec.witness = (0..spec.joint.size())
        .find(|&a| {
            let adj: Vec<Vec<usize>> = (0..n)
                .map(|s| {
                    let row = spec.transition_row(s, a);
                    (0..n).filter(|&t| row[t] > T::zero()).collect()
                })
                .collect();
            is_irreducible_aperiodic(&adj)
        })
        .ok_or(GameError::Irreducibility)?;
    Ok(spec)
}

/// Strong connectivity plus period 1 for the directed graph `adj`.
///
/// For a strongly connected graph with BFS levels `L` from any root, the
/// period equals `gcd(L(u) + 1 - L(v))` over all edges `u → v`.
pub fn is_irreducible_aperiodic(adj: &[Vec<usize>]) -> bool {
    let n = adj.len();
    let level = bfs_levels(adj);
    if level.iter().any(Option::is_none) {
        return false;
    }
    let mut rev = vec![Vec::new(); n];
    for (u, out) in adj.iter().enumerate() {
        for &v in out {
            rev[v].push(u);
        }
    }
    if bfs_levels(&rev).iter().any(Option::is_none) {
        return false;
    }
    chain_period(
        adj,
        &level.into_iter().map(Option::unwrap).collect::<Vec<_>>(),
    ) == 1
}

fn chain_period(adj: &[Vec<usize>], level: &[usize]) -> usize {
    let mut g = 0usize;
    for (u, out) in adj.iter().enumerate() {
        for &v in out {
            let diff = (level[u] + 1).abs_diff(level[v]);
            g = gcd(g, diff);
        }
    }
    g
}

fn bfs_levels(adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut level = vec![None; adj.len()];
    let mut queue = std::collections::VecDeque::from([0usize]);
    level[0] = Some(0);
    while let Some(u) = queue.pop_front() {
        let lu = level[u].unwrap();
        for &v in &adj[u] {
            if level[v].is_none() {
                level[v] = Some(lu + 1);
                queue.push_back(v);
            }
        }
    }
    level
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_state(payoff: Vec<Vec<f64>>, actions: Vec<usize>) -> RawGame<f64> {
        let joint: usize = actions.iter().product();
        RawGame {
            num_players: actions.len(),
            discount: 0.5,
            states: vec!["s0".into()],
            actions: actions
                .iter()
                .map(|&k| (0..k).map(|a| format!("a{}", a + 1)).collect())
                .collect(),
            mu: vec![1.0],
            payoff: payoff.into_iter().map(|r| vec![r]).collect(),
            transition: vec![vec![vec![1.0]; joint]],
        }
    }

    fn two_state(rows: Vec<[[f64; 2]; 2]>) -> RawGame<f64> {
        // One player whose action k selects transition matrix rows[k].
        RawGame {
            num_players: 1,
            discount: 0.9,
            states: vec!["s0".into(), "s1".into()],
            actions: vec![(0..rows.len()).map(|k| format!("a{k}")).collect()],
            mu: vec![0.5, 0.5],
            payoff: vec![vec![vec![0.0; rows.len()]; 2]],
            transition: (0..2)
                .map(|s| rows.iter().map(|m| m[s].to_vec()).collect())
                .collect(),
        }
    }

    #[test]
    fn single_state_self_loop_is_valid() {
        let g = validate_game(one_state(vec![vec![1.0]], vec![1])).unwrap();
        assert_eq!(g.witness_action(), 0);
        assert_eq!(g.max_abs_payoff(), 1.0);
    }

    #[test]
    fn positive_matrix_is_witness() {
        let swap = [[0.0, 1.0], [1.0, 0.0]];
        let mix = [[0.5, 0.5], [0.5, 0.5]];
        let g = validate_game(two_state(vec![swap, mix])).unwrap();
        assert_eq!(g.witness_action(), 1);
    }

    #[test]
    fn periodic_swap_is_rejected() {
        let swap = [[0.0, 1.0], [1.0, 0.0]];
        assert_eq!(
            validate_game(two_state(vec![swap, swap])),
            Err(GameError::Irreducibility)
        );
    }

    #[test]
    fn absorbing_states_are_reducible() {
        let id = [[1.0, 0.0], [0.0, 1.0]];
        assert_eq!(
            validate_game(two_state(vec![id])),
            Err(GameError::Irreducibility)
        );
    }

    #[test]
    fn period_of_two_cycle_is_two() {
        let adj = vec![vec![1], vec![0]];
        let level = bfs_levels(&adj)
            .into_iter()
            .map(Option::unwrap)
            .collect::<Vec<_>>();
        assert_eq!(chain_period(&adj, &level), 2);
        // Adding a self-loop breaks periodicity.
        assert!(is_irreducible_aperiodic(&[vec![0, 1], vec![0]]));
        // 2-cycle plus 3-cycle through node 0: gcd(2, 3) = 1.
        assert!(is_irreducible_aperiodic(&[
            vec![1, 2],
            vec![0],
            vec![3],
            vec![0]
        ]));
        // two 2-cycles: period 2.
        assert!(!is_irreducible_aperiodic(&[vec![1, 2], vec![0], vec![0]]));
    }

    #[test]
    fn stochasticity_and_support_errors() {
        let mut raw = two_state(vec![[[0.5, 0.5], [0.5, 0.5]]]);
        raw.transition[1][0] = vec![0.5, 0.6];
        assert!(matches!(
            validate_game(raw),
            Err(GameError::Stochasticity {
                state: 1,
                joint: 0,
                ..
            })
        ));

        let mut raw = two_state(vec![[[0.5, 0.5], [0.5, 0.5]]]);
        raw.transition[0][0] = vec![1.5, -0.5];
        assert!(matches!(
            validate_game(raw),
            Err(GameError::Stochasticity { .. })
        ));

        let mut raw = two_state(vec![[[0.5, 0.5], [0.5, 0.5]]]);
        raw.mu = vec![1.0, 0.0];
        assert!(matches!(
            validate_game(raw),
            Err(GameError::Support { state: 1, .. })
        ));

        let mut raw = two_state(vec![[[0.5, 0.5], [0.5, 0.5]]]);
        raw.mu = vec![0.4, 0.4];
        assert!(matches!(validate_game(raw), Err(GameError::Support { .. })));
    }

    #[test]
    fn discount_and_shape_errors() {
        let mut raw = one_state(vec![vec![1.0]], vec![1]);
        raw.discount = 1.0;
        assert_eq!(validate_game(raw), Err(GameError::Discount(1.0)));

        let raw = one_state(vec![vec![1.0, 2.0]], vec![1]);
        assert!(matches!(validate_game(raw), Err(GameError::Shape(_))));

        let mut raw = one_state(vec![vec![1.0]], vec![1]);
        raw.payoff[0][0][0] = f64::NAN;
        assert_eq!(
            validate_game(raw),
            Err(GameError::NonFinite { what: "payoff" })
        );
    }

    #[test]
    fn raw_roundtrip() {
        let raw = one_state(vec![vec![1.0, 0.0, 0.0, 2.0]; 2], vec![2, 2]);
        let g = validate_game(raw.clone()).unwrap();
        assert_eq!(g.to_raw(), raw);
        assert_eq!(g.payoff(1, 0, 3), 2.0);
    }
}
