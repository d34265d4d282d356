use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::game::GameSpec;
use crate::scalar::Scalar;

/// Simulator holding the true game. It reveals the realized state to
/// everyone and each player's own reward to that player only.
#[derive(Clone, Debug)]
pub struct Environment<'g, T> {
    game: &'g GameSpec<T>,
    state: usize,
    iterate: u64,
    rng: ChaCha8Rng,
}

impl<'g, T: Scalar> Environment<'g, T> {
    /// Draws the initial state from `μ`.
    pub fn new(game: &'g GameSpec<T>, mut rng: ChaCha8Rng) -> Self {
        let state = sample_index(rng.random::<f64>(), game.init_dist());
        Self {
            game,
            state,
            iterate: 0,
            rng,
        }
    }

    pub fn state(&self) -> usize {
        self.state
    }

    pub fn iterate(&self) -> u64 {
        self.iterate
    }

    /// Plays `actions` in the current state: writes `u_i(s, a)` into
    /// `rewards[i]`, moves to `s' ~ P(· | s, a)` and returns it.
    pub fn step(&mut self, actions: &[usize], rewards: &mut [T]) -> usize {
        let joint = self.game.joint().encode(actions);
        for (i, r) in rewards.iter_mut().enumerate() {
            *r = self.game.payoff(i, self.state, joint);
        }
        let next = sample_index(
            self.rng.random::<f64>(),
            self.game.transition_row(self.state, joint),
        );
        self.state = next;
        self.iterate += 1;
        next
    }
}

/// Inverse-CDF draw from `probs` given `u ∈ [0, 1)`; never returns a
/// zero-probability index.
pub(crate) fn sample_index<T: Scalar>(u: f64, probs: &[T]) -> usize {
    let mut cum = 0.0;
    let mut last = 0;
    for (k, p) in probs.iter().enumerate() {
        let p = p.as_f64();
        if p > 0.0 {
            cum += p;
            last = k;
            if u < cum {
                return k;
            }
        }
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{validate_game, RawGame};
    use rand::SeedableRng;

    fn game(row: Vec<f64>) -> GameSpec<f64> {
        let n = row.len();
        validate_game(RawGame {
            num_players: 2,
            discount: 0.9,
            states: (0..n).map(|s| format!("s{s}")).collect(),
            actions: vec![vec!["x".into(), "y".into()], vec!["x".into()]],
            mu: vec![1.0 / n as f64; n],
            payoff: vec![
                (0..n).map(|s| vec![s as f64, 10.0 + s as f64]).collect(),
                (0..n).map(|s| vec![-(s as f64), -10.0]).collect(),
            ],
            transition: vec![vec![row, vec![1.0 / n as f64; n]]; n],
        })
        .unwrap()
    }

    #[test]
    fn sample_index_skips_zero_mass() {
        assert_eq!(sample_index(0.0, &[0.0, 1.0, 0.0]), 1);
        assert_eq!(sample_index(0.999_999_999_999, &[0.5, 0.5, 0.0]), 1);
    }

    #[test]
    fn deterministic_row_and_reward_lookup() {
        let g = game(vec![0.0, 0.0, 1.0]);
        let mut env = Environment::new(&g, ChaCha8Rng::seed_from_u64(0));
        let s = env.state();
        let mut r = [0.0; 2];
        assert_eq!(env.step(&[0, 0], &mut r), 2);
        assert_eq!(r, [s as f64, -(s as f64)]);
        assert_eq!(env.iterate(), 1);
        env.step(&[1, 0], &mut r);
        assert_eq!(r, [12.0, -10.0]);
    }

    #[test]
    fn empirical_transition_frequencies() {
        let p = [0.2, 0.5, 0.3];
        let g = game(p.to_vec());
        let mut env = Environment::new(&g, ChaCha8Rng::seed_from_u64(5));
        let steps = 100_000;
        let mut counts = [0usize; 3];
        let mut r = [0.0; 2];
        for _ in 0..steps {
            counts[env.step(&[0, 0], &mut r)] += 1;
        }
        for (c, q) in counts.iter().zip(p) {
            let sigma = (steps as f64 * q * (1.0 - q)).sqrt();
            assert!(
                (*c as f64 - steps as f64 * q).abs() < 3.0 * sigma,
                "{counts:?}"
            );
        }
    }
}
