//! Built-in games.
//!
//! | name | description |
//! |------|-------------|
//! | `G1` | 1 state, 1 player, 1 action, `u = 1`, `δ = 0.5` |
//! | `G2` | 1 state, 2 players, identical payoff `[[1,0],[0,2]]`, `δ = 0.5` |
//! | `G3` | 2 states, 2 players × 2 actions, seeded team payoffs in `[0,1)`, transitions ≥ 0.05, `δ = 0.8` |
//! | `G4` | single-state potential game `Φ = [[1,0],[0,2]]`, `ζ_1 = (5,-1)`, `ζ_2 = (0,3)`, `δ = 0.5` |
//! | `GZ` | matching pennies (zero-sum) with the claimed potential `Φ = u_1`; not an MPG |

use mpg_core::game::validate_game;
use mpg_core::potential::{
    claimed_single_state_potential, make_single_state_potential, make_team_game, single_state_raw,
    team_from_game, TeamPayoff,
};
use mpg_core::random::dirichlet_uniform;
use mpg_core::Potential;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seed of the built-in `G3` instance.
pub const G3_SEED: u64 = 0;

pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub spec: Potential,
}

pub fn builtin_games() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry { name: "G1", description: "1 state, 1 player, 1 action, u = 1, discount 0.5", spec: g1() },
        CatalogEntry {
            name: "G2",
            description: "coordination game, identical payoff [[1,0],[0,2]], discount 0.5",
            spec: g2(),
        },
        CatalogEntry {
            name: "G3",
            description: "2-state 2x2 team game, seeded payoffs in [0,1), transitions >= 0.05, discount 0.8",
            spec: g3(G3_SEED),
        },
        CatalogEntry {
            name: "G4",
            description: "single-state potential game, phi [[1,0],[0,2]], zeta_1 (5,-1), zeta_2 (0,3), discount 0.5",
            spec: g4(),
        },
        CatalogEntry {
            name: "GZ",
            description: "matching pennies with claimed potential u_1 (fails MPG verification)",
            spec: gz(),
        },
    ]
}

/// Looks up a built-in game by (case-insensitive) name.
pub fn builtin(name: &str) -> Option<Potential> {
    let name = name.to_ascii_uppercase();
    builtin_games()
        .into_iter()
        .find(|e| e.name == name)
        .map(|e| e.spec)
}

pub fn g1() -> Potential {
    let game =
        validate_game(single_state_raw(&[1], vec![vec![vec![1.0]]], 0.5)).expect("G1 is valid");
    team_from_game(game).expect("one player is a team")
}

pub fn g2() -> Potential {
    let table = vec![vec![1.0, 0.0, 0.0, 2.0]];
    let game = validate_game(single_state_raw(&[2, 2], vec![table.clone(), table], 0.5))
        .expect("G2 is valid");
    team_from_game(game).expect("identical payoffs")
}

/// Random 2-state team game; every instance is determined by `seed`.
pub fn g3(seed: u64) -> Potential {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let transition = (0..2)
        .map(|_| {
            (0..4)
                .map(|_| {
                    let p: Vec<f64> = dirichlet_uniform(&mut rng, 2);
                    let first = 0.05 + 0.9 * p[0];
                    vec![first, 1.0 - first]
                })
                .collect()
        })
        .collect();
    make_team_game(
        vec!["s0".into(), "s1".into()],
        vec![vec!["a1".into(), "a2".into()]; 2],
        TeamPayoff::Seeded {
            seed,
            lo: 0.0,
            hi: 1.0,
        },
        transition,
        0.8,
        vec![0.5, 0.5],
    )
    .expect("G3 is valid")
}

pub fn g4() -> Potential {
    make_single_state_potential(
        &[2, 2],
        vec![1.0, 0.0, 0.0, 2.0],
        vec![vec![5.0, -1.0], vec![0.0, 3.0]],
        0.5,
    )
    .expect("G4 is valid")
}

pub fn gz() -> Potential {
    let u1 = vec![1.0, -1.0, -1.0, 1.0];
    let u2: Vec<f64> = u1.iter().map(|x| -x).collect();
    let game = validate_game(single_state_raw(
        &[2, 2],
        vec![vec![u1.clone()], vec![u2]],
        0.5,
    ))
    .expect("GZ is valid");
    claimed_single_state_potential(game, u1).expect("shapes match")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_names_resolve() {
        for e in builtin_games() {
            assert!(builtin(&e.name.to_lowercase()).is_some());
        }
        assert!(builtin("G9").is_none());
    }

    #[test]
    fn g3_is_reproducible_and_seed_dependent() {
        assert_eq!(g3(3), g3(3));
        assert_ne!(g3(3).game().payoff(0, 0, 0), g3(4).game().payoff(0, 0, 0));
        let g = g3(3);
        for s in 0..2 {
            for j in 0..4 {
                assert!(g.game().transition_row(s, j).iter().all(|&p| p >= 0.05));
            }
        }
    }
}
