#![allow(dead_code)]

use mpg_core::game::{validate_game, GameSpec, PolicyProfile};
use mpg_core::potential::{single_state_raw, team_from_game, PotentialSpec};
use rand::Rng;

pub fn g2() -> PotentialSpec<f64> {
    let u = vec![vec![1.0, 0.0, 0.0, 2.0]];
    team_from_game(validate_game(single_state_raw(&[2, 2], vec![u.clone(), u], 0.5)).unwrap())
        .unwrap()
}

fn draw(rng: &mut impl Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    for (k, p) in probs.iter().enumerate() {
        cum += p;
        if u < cum {
            return k;
        }
    }
    probs.len() - 1
}

/// Monte-Carlo estimate of `V_i(μ, π)`: each episode runs until a coin with
/// stopping probability `1 - δ` fires, summing undiscounted rewards, which
/// has the discounted value as its mean. Returns (mean, standard error).
pub fn rollout_value(
    game: &GameSpec<f64>,
    pi: &PolicyProfile<f64>,
    i: usize,
    mu: &[f64],
    episodes: usize,
    rng: &mut impl Rng,
) -> (f64, f64) {
    let joint = game.joint();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut actions = vec![0; game.num_players()];
    for _ in 0..episodes {
        let mut s = draw(rng, mu);
        let mut total = 0.0;
        loop {
            for (k, a) in actions.iter_mut().enumerate() {
                *a = draw(rng, pi.player(k).row(s));
            }
            let j = joint.encode(&actions);
            total += game.payoff(i, s, j);
            if rng.random::<f64>() >= game.discount() {
                break;
            }
            s = draw(rng, game.transition_row(s, j));
        }
        sum += total;
        sum_sq += total * total;
    }
    let n = episodes as f64;
    let mean = sum / n;
    (mean, ((sum_sq / n - mean * mean) / n).sqrt())
}
