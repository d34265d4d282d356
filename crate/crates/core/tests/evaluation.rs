#![allow(clippy::needless_range_loop)]

mod common;

use mpg_core::game::{
    advantage, bellman_operator, discounted_visitation, performance_difference, policy_gradient,
    q_function, validate_game, value_at_dist, value_function, PolicyProfile, StateActionTable,
};
use mpg_core::random::{
    random_game, random_player_policy, random_policy, random_raw_game, RandomGameParams,
};
use mpg_core::Game;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn shape(seed: u64) -> (ChaCha8Rng, RandomGameParams) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let players = rng.random_range(1..=3);
    let params = RandomGameParams {
        num_states: rng.random_range(1..=4),
        actions: (0..players).map(|_| rng.random_range(1..=3)).collect(),
        discount: rng.random_range(0.0..0.95),
        payoff_range: (-2.0, 2.0),
        min_transition: 0.0,
        identical_payoffs: false,
    };
    (rng, params)
}

#[test]
fn coordination_value_matches_rollouts() {
    let spec = common::g2();
    let game = spec.game();
    let pi = PolicyProfile::deterministic(game, &[vec![1], vec![1]]);
    let exact = value_function(game, &pi, 0)[0];
    let (mc, se) = common::rollout_value(
        game,
        &pi,
        0,
        &[1.0],
        1_000_000,
        &mut ChaCha8Rng::seed_from_u64(1),
    );
    assert!((exact - 4.0).abs() < 1e-12);
    assert!((mc - exact).abs() < 4.0 * se, "mc {mc} ± {se}");
    let q = q_function(game, &pi, 0);
    let one_step_a1 = 0.0 + 0.5 * mc;
    assert!((q[(0, 0)] - one_step_a1).abs() < 4.0 * 0.5 * se + 1e-12);
}

#[test]
fn mixed_policy_value_matches_rollouts() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let params = RandomGameParams {
        num_states: 3,
        actions: vec![2, 3],
        ..RandomGameParams::small(0.7)
    };
    let game: Game = random_game(&mut rng, &params);
    let pi = random_policy(&mut rng, &game);
    let mu = game.init_dist().to_vec();
    for i in 0..2 {
        let exact = value_at_dist(&game, &pi, i, &mu);
        let (mc, se) = common::rollout_value(&game, &pi, i, &mu, 400_000, &mut rng);
        assert!(
            (mc - exact).abs() < 4.0 * se,
            "player {i}: exact {exact}, mc {mc} ± {se}"
        );
    }
}

#[test]
fn point_mass_start_gives_state_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let params = RandomGameParams {
        num_states: 3,
        ..RandomGameParams::small(0.9)
    };
    let game: Game = random_game(&mut rng, &params);
    let pi = random_policy(&mut rng, &game);
    let v = value_function(&game, &pi, 1);
    for s in 0..3 {
        let mut mu = vec![0.0; 3];
        mu[s] = 1.0;
        assert!((value_at_dist(&game, &pi, 1, &mu) - v[s]).abs() < 1e-12);
    }
}

#[test]
fn constant_reward_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut raw = random_raw_game(
        &mut rng,
        &RandomGameParams {
            num_states: 3,
            ..RandomGameParams::small(0.6)
        },
    );
    for x in raw.payoff.iter_mut().flatten().flatten() {
        *x = 2.5;
    }
    let game = validate_game(raw).unwrap();
    let pi = random_policy(&mut rng, &game);
    assert!((value_at_dist(&game, &pi, 0, game.init_dist()) - 2.5 / 0.4).abs() < 1e-12);
}

#[test]
fn visitation_matches_truncated_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let params = RandomGameParams {
        num_states: 3,
        ..RandomGameParams::small(0.8)
    };
    let game: Game = random_game(&mut rng, &params);
    let pi = random_policy(&mut rng, &game);
    let mu = game.init_dist().to_vec();
    let joint = game.joint();
    let mut chain = vec![vec![0.0; 3]; 3];
    for (s, row) in chain.iter_mut().enumerate() {
        for j in 0..joint.size() {
            let w: f64 = (0..2)
                .map(|k| pi.player(k)[(s, joint.component(j, k))])
                .product();
            for (t, p) in game.transition_row(s, j).iter().enumerate() {
                row[t] += w * p;
            }
        }
    }
    let mut dist = mu.clone();
    let mut series = [0.0; 3];
    let mut weight = 0.2;
    for _ in 0..400 {
        for s in 0..3 {
            series[s] += weight * dist[s];
        }
        dist = (0..3)
            .map(|t| (0..3).map(|s| dist[s] * chain[s][t]).sum())
            .collect();
        weight *= 0.8;
    }
    let d = discounted_visitation(&game, &pi, &mu);
    for s in 0..3 {
        assert!((d[s] - series[s]).abs() < 1e-12);
    }
    assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn gradient_matches_central_differences() {
    let h = 1e-6;
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let discount = rng.random_range(0.1..0.9);
        let game: Game = random_game(&mut rng, &RandomGameParams::small(discount));
        let pi = random_policy(&mut rng, &game);
        let mu = game.init_dist().to_vec();
        for i in 0..2 {
            let grad = policy_gradient(&game, &pi, &mu, i);
            for s in 0..2 {
                for a in 0..2 {
                    let at = |dh: f64| {
                        let mut t = pi.player(i).clone();
                        t.row_mut(s)[a] += dh;
                        let mut players = pi.players().to_vec();
                        players[i] = t;
                        value_at_dist(
                            &game,
                            &PolicyProfile::multilinear(&game, players).unwrap(),
                            i,
                            &mu,
                        )
                    };
                    let fd = (at(h) - at(-h)) / (2.0 * h);
                    let rel = (fd - grad[(s, a)]).abs() / grad[(s, a)].abs().max(1e-6);
                    assert!(
                        rel <= 1e-4,
                        "seed {seed}: fd {fd}, analytic {}",
                        grad[(s, a)]
                    );
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn policy_average_of_q_is_v(seed in any::<u64>()) {
        let (mut rng, params) = shape(seed);
        let game: Game = random_game(&mut rng, &params);
        let pi = random_policy(&mut rng, &game);
        for i in 0..game.num_players() {
            let v = value_function(&game, &pi, i);
            let q = q_function(&game, &pi, i);
            let adv = advantage(&game, &pi, i);
            for s in 0..game.num_states() {
                let row = pi.player(i).row(s);
                let avg: f64 = row.iter().zip(q.row(s)).map(|(p, x)| p * x).sum();
                prop_assert!((avg - v[s]).abs() <= 1e-10);
                let adv_avg: f64 = row.iter().zip(adv.row(s)).map(|(p, x)| p * x).sum();
                prop_assert!(adv_avg.abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn bellman_operator_contracts(seed in any::<u64>()) {
        let (mut rng, params) = shape(seed);
        let game: Game = random_game(&mut rng, &params);
        let pi = random_policy(&mut rng, &game);
        let i = rng.random_range(0..game.num_players());
        let k = game.num_actions(i);
        let mut q1 = StateActionTable::zeros(game.num_states(), k);
        let mut q2 = q1.clone();
        for x in q1.as_mut_slice().iter_mut().chain(q2.as_mut_slice()) {
            *x = rng.random_range(-5.0..5.0);
        }
        let lhs = bellman_operator(&game, &pi, i, &q1).sup_dist(&bellman_operator(&game, &pi, i, &q2));
        prop_assert!(lhs <= game.discount() * q1.sup_dist(&q2) + 1e-12);
        let q = q_function(&game, &pi, i);
        prop_assert!(bellman_operator(&game, &pi, i, &q).sup_dist(&q) <= 1e-9);
    }

    #[test]
    fn performance_difference_identity(seed in any::<u64>()) {
        let (mut rng, params) = shape(seed);
        let game: Game = random_game(&mut rng, &params);
        let pi = random_policy(&mut rng, &game);
        let i = rng.random_range(0..game.num_players());
        let alt = pi.with_player(i, random_player_policy(&mut rng, game.num_states(), game.num_actions(i)));
        let mu = game.init_dist().to_vec();
        let pd = performance_difference(&game, &alt, &pi, i, &mu).unwrap();
        let lhs = value_at_dist(&game, &alt, i, &mu) - value_at_dist(&game, &pi, i, &mu);
        prop_assert!((pd.lhs - lhs).abs() <= 1e-12);
        prop_assert!((pd.lhs - pd.rhs).abs() <= 1e-8);
    }
}
