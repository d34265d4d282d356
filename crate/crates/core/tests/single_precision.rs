use mpg_core::game::{q_function, validate_game, value_function, PolicyProfile};
use mpg_core::learner::{seeded_run, LearnerConfig};
use mpg_core::ode::{integrate_flow, FlowConfig};
use mpg_core::oracle::nash_gap;
use mpg_core::potential::{potential_maximum, single_state_raw, team_from_game, verify_mpg};
use mpg_core::{Game32, Potential32};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn g2() -> Potential32 {
    let u = vec![vec![1.0f32, 0.0, 0.0, 2.0]];
    team_from_game(validate_game(single_state_raw(&[2, 2], vec![u.clone(), u], 0.5f32)).unwrap())
        .unwrap()
}

#[test]
fn evaluation_in_single_precision() {
    let spec = g2();
    let game: &Game32 = spec.game();
    let pi = PolicyProfile::deterministic(game, &[vec![1], vec![1]]);
    assert!((value_function(game, &pi, 0)[0] - 4.0).abs() < 1e-5);
    let q = q_function(game, &pi, 1);
    assert!((q[(0, 0)] - 2.0).abs() < 1e-5 && (q[(0, 1)] - 4.0).abs() < 1e-5);
    assert!(nash_gap(game, &pi, 1e-4).certified);
    assert!(verify_mpg(&spec, 20, 1e-4, &mut ChaCha8Rng::seed_from_u64(0)).passed);
    assert_eq!(
        potential_maximum(&spec, &[1.0], 16).unwrap().choices,
        vec![vec![1], vec![1]]
    );
}

#[test]
fn flow_and_learning_in_single_precision() {
    let spec = g2();
    let cfg = FlowConfig::unit_rates(2, 1, 0.01f32, 20.0);
    let traj = integrate_flow(&spec, &PolicyProfile::uniform(spec.game()), &cfg, 16).unwrap();
    assert!(traj.last().nash_gap <= 1e-3);
    let run = seeded_run(
        &spec,
        &[LearnerConfig::<f32>::default()],
        0,
        200_000,
        100_000,
    )
    .unwrap();
    assert!(run.metrics.last().unwrap().nash_gap <= 0.05);
}
