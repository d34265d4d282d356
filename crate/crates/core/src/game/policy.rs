use super::spec::{GameError, GameSpec};
use crate::scalar::Scalar;

/// Dense `|S| × |A_i|` table; used for one player's policy, Q-table and
/// advantage values.
#[derive(Clone, Debug, PartialEq)]
pub struct StateActionTable<T> {
    num_states: usize,
    num_actions: usize,
    data: Vec<T>,
}

/// Q-function or q-estimate of one player.
pub type QTable<T> = StateActionTable<T>;

impl<T: Scalar> StateActionTable<T> {
    pub fn filled(num_states: usize, num_actions: usize, value: T) -> Self {
        Self {
            num_states,
            num_actions,
            data: vec![value; num_states * num_actions],
        }
    }

    pub fn zeros(num_states: usize, num_actions: usize) -> Self {
        Self::filled(num_states, num_actions, T::zero())
    }

    /// Uniform policy `1/|A_i|` in every state.
    pub fn uniform(num_states: usize, num_actions: usize) -> Self {
        Self::filled(
            num_states,
            num_actions,
            T::one() / T::lit(num_actions as f64),
        )
    }

    /// Deterministic policy playing `choices[s]` in state `s`.
    pub fn deterministic(num_actions: usize, choices: &[usize]) -> Self {
        let mut t = Self::zeros(choices.len(), num_actions);
        for (s, &a) in choices.iter().enumerate() {
            t[(s, a)] = T::one();
        }
        t
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, GameError> {
        let num_actions = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != num_actions) {
            return Err(GameError::Policy("ragged table".into()));
        }
        Ok(Self {
            num_states: rows.len(),
            num_actions,
            data: rows.concat(),
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn row(&self, s: usize) -> &[T] {
        &self.data[s * self.num_actions..(s + 1) * self.num_actions]
    }

    pub fn row_mut(&mut self, s: usize) -> &mut [T] {
        &mut self.data[s * self.num_actions..(s + 1) * self.num_actions]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.num_states).map(|s| self.row(s).to_vec()).collect()
    }

    pub fn sup_norm(&self) -> T {
        crate::scalar::sup_norm(&self.data)
    }

    pub fn sup_dist(&self, other: &Self) -> T {
        crate::scalar::sup_dist(&self.data, &other.data)
    }

    /// Whether every row is a probability vector within `tol`.
    pub fn is_simplex(&self, tol: T) -> bool {
        (0..self.num_states).all(|s| {
            let row = self.row(s);
            row.iter().all(|&p| p >= T::zero())
                && (row.iter().copied().sum::<T>() - T::one()).abs() <= tol
        })
    }
}

impl<T> std::ops::Index<(usize, usize)> for StateActionTable<T> {
    type Output = T;
    #[inline]
    fn index(&self, (s, a): (usize, usize)) -> &T {
        &self.data[s * self.num_actions + a]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for StateActionTable<T> {
    #[inline]
    fn index_mut(&mut self, (s, a): (usize, usize)) -> &mut T {
        &mut self.data[s * self.num_actions + a]
    }
}

/// Smallest index attaining the maximum of `row` (lexicographic tie-break).
pub fn argmax_first<T: Scalar>(row: &[T]) -> usize {
    let mut best = 0;
    for (a, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = a;
        }
    }
    best
}

/// Joint stationary policy: one [`StateActionTable`] per player.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyProfile<T> {
    players: Vec<StateActionTable<T>>,
}

impl<T: Scalar> PolicyProfile<T> {
    /// Validated profile: shapes match `game` and every row is a simplex.
    pub fn new(game: &GameSpec<T>, players: Vec<StateActionTable<T>>) -> Result<Self, GameError> {
        let p = Self::multilinear(game, players)?;
        let tol = T::lit(T::SIMPLEX_TOL);
        for (i, t) in p.players.iter().enumerate() {
            if !t.is_simplex(tol) {
                return Err(GameError::Policy(format!(
                    "player {i} has a row that is not a distribution"
                )));
            }
        }
        Ok(p)
    }

    /// Shape-checked but unnormalized profile: the evaluation routines then
    /// compute the multilinear extension of the value in the raw entries.
    pub fn multilinear(
        game: &GameSpec<T>,
        players: Vec<StateActionTable<T>>,
    ) -> Result<Self, GameError> {
        if players.len() != game.num_players() {
            return Err(GameError::Policy(format!(
                "{} player tables for a {}-player game",
                players.len(),
                game.num_players()
            )));
        }
        for (i, t) in players.iter().enumerate() {
            if t.num_states() != game.num_states() || t.num_actions() != game.num_actions(i) {
                return Err(GameError::Policy(format!(
                    "player {i} table is {}x{}, expected {}x{}",
                    t.num_states(),
                    t.num_actions(),
                    game.num_states(),
                    game.num_actions(i)
                )));
            }
            if t.as_slice().iter().any(|p| !p.is_finite()) {
                return Err(GameError::Policy(format!(
                    "player {i} has non-finite entries"
                )));
            }
        }
        Ok(Self { players })
    }

    pub fn uniform(game: &GameSpec<T>) -> Self {
        Self {
            players: (0..game.num_players())
                .map(|i| StateActionTable::uniform(game.num_states(), game.num_actions(i)))
                .collect(),
        }
    }

    /// `choices[i][s]` is player `i`'s action in state `s`.
    pub fn deterministic(game: &GameSpec<T>, choices: &[Vec<usize>]) -> Self {
        Self {
            players: choices
                .iter()
                .enumerate()
                .map(|(i, c)| StateActionTable::deterministic(game.num_actions(i), c))
                .collect(),
        }
    }

    pub fn num_players(&self) -> usize {
        self.players.len()
    }

    pub fn player(&self, i: usize) -> &StateActionTable<T> {
        &self.players[i]
    }

    pub fn player_mut(&mut self, i: usize) -> &mut StateActionTable<T> {
        &mut self.players[i]
    }

    pub fn players(&self) -> &[StateActionTable<T>] {
        &self.players
    }

    pub fn into_players(self) -> Vec<StateActionTable<T>> {
        self.players
    }

    /// Copy with player `i`'s component replaced.
    pub fn with_player(&self, i: usize, table: StateActionTable<T>) -> Self {
        let mut p = self.clone();
        p.players[i] = table;
        p
    }

    /// Players whose components differ (exact comparison).
    pub fn differing_players(&self, other: &Self) -> Vec<usize> {
        (0..self.players.len())
            .filter(|&i| self.players[i] != other.players[i])
            .collect()
    }

    pub fn sup_dist(&self, other: &Self) -> T {
        self.players
            .iter()
            .zip(&other.players)
            .fold(T::zero(), |m, (a, b)| m.max(a.sup_dist(b)))
    }
}

/// Mixed-radix enumeration of all deterministic stationary joint policies.
#[derive(Clone, Debug)]
pub struct DeterministicProfiles {
    radices: Vec<(usize, usize)>,
    count: u128,
}

impl DeterministicProfiles {
    pub fn new<T: Scalar>(game: &GameSpec<T>) -> Self {
        let radices: Vec<(usize, usize)> = (0..game.num_players())
            .flat_map(|i| std::iter::repeat_n((i, game.num_actions(i)), game.num_states()))
            .collect();
        let count = radices
            .iter()
            .try_fold(1u128, |acc, &(_, r)| acc.checked_mul(r as u128))
            .unwrap_or(u128::MAX);
        Self { radices, count }
    }

    /// `Π_i |A_i|^{|S|}`, saturating at `u128::MAX`.
    pub fn count(&self) -> u128 {
        self.count
    }

    /// Errors if the profile count exceeds `cap`.
    pub fn check_cap(&self, cap: u128) -> Result<(), GameError> {
        if self.count > cap {
            Err(GameError::EnumerationTooLarge {
                count: self.count,
                cap,
            })
        } else {
            Ok(())
        }
    }

    /// Action choices `[player][state]` of profile number `index`.
    pub fn choices(&self, num_states: usize, mut index: u128) -> Vec<Vec<usize>> {
        let num_players = self.radices.len() / num_states.max(1);
        let mut out = vec![vec![0; num_states]; num_players];
        for (k, &(player, radix)) in self.radices.iter().enumerate().rev() {
            let s = k % num_states;
            out[player][s] = (index % radix as u128) as usize;
            index /= radix as u128;
        }
        out
    }

    pub fn profile<T: Scalar>(&self, game: &GameSpec<T>, index: u128) -> PolicyProfile<T> {
        PolicyProfile::deterministic(game, &self.choices(game.num_states(), index))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::spec::{validate_game, RawGame};

    fn g(actions: Vec<usize>, states: usize) -> GameSpec<f64> {
        let joint: usize = actions.iter().product();
        validate_game(RawGame {
            num_players: actions.len(),
            discount: 0.5,
            states: (0..states).map(|s| format!("s{s}")).collect(),
            actions: actions
                .iter()
                .map(|&k| (0..k).map(|a| a.to_string()).collect())
                .collect(),
            mu: vec![1.0 / states as f64; states],
            payoff: vec![vec![vec![0.0; joint]; states]; actions.len()],
            transition: vec![vec![vec![1.0 / states as f64; states]; joint]; states],
        })
        .unwrap()
    }

    #[test]
    fn argmax_prefers_smallest_index() {
        assert_eq!(argmax_first(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax_first(&[2.0, 2.0]), 0);
    }

    #[test]
    fn profile_validation() {
        let game = g(vec![2, 3], 2);
        assert!(PolicyProfile::new(&game, PolicyProfile::uniform(&game).into_players()).is_ok());
        let bad = vec![
            StateActionTable::filled(2, 2, 0.7),
            StateActionTable::uniform(2, 3),
        ];
        assert!(PolicyProfile::new(&game, bad.clone()).is_err());
        assert!(PolicyProfile::multilinear(&game, bad).is_ok());
        let wrong_shape = vec![
            StateActionTable::uniform(2, 3),
            StateActionTable::uniform(2, 3),
        ];
        assert!(PolicyProfile::multilinear(&game, wrong_shape).is_err());
    }

    #[test]
    fn enumerates_every_deterministic_profile_once() {
        let game = g(vec![2, 3], 2);
        let profiles = DeterministicProfiles::new(&game);
        assert_eq!(profiles.count(), 36);
        let mut seen = std::collections::HashSet::new();
        for k in 0..profiles.count() {
            assert!(seen.insert(profiles.choices(2, k)));
        }
        assert!(profiles.check_cap(35).is_err());
        assert!(profiles.check_cap(36).is_ok());
    }

    #[test]
    fn differing_players_detects_deviators() {
        let game = g(vec![2, 2], 1);
        let a = PolicyProfile::uniform(&game);
        let b = a.with_player(1, StateActionTable::deterministic(2, &[0]));
        assert_eq!(a.differing_players(&b), vec![1]);
        assert!(a.differing_players(&a).is_empty());
    }
}
