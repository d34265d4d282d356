//! The acceptance suite: eleven numbered checks with fixed tolerances,
//! workloads and time budgets.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use anyhow::Result;
use mpg_core::game::{
    bellman_operator, performance_difference, policy_gradient, q_function, value_at_dist,
    value_function, DeterministicProfiles, PolicyProfile, StateActionTable,
};
use mpg_core::learner::{validate_schedule, ScheduleError, StepSchedule};
use mpg_core::ode::lyapunov_monotonicity_report;
use mpg_core::oracle::{br_fixed_point_check, nash_gap, EXACT_EPSILON};
use mpg_core::potential::verify_mpg;
use mpg_core::random::{random_game, random_player_policy, random_policy, RandomGameParams};
use mpg_core::{Game, Potential, Schedule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::{g2, g3, g4, gz};
use crate::config::ExperimentConfig;
use crate::experiment::{metrics_file_name, run_experiment, run_flow, ExperimentOutcome};

pub const NUM_CRITERIA: usize = 11;

/// Seeds of the learning batch shared by criteria 6, 7 and 11.
pub const LEARNING_SEEDS: std::ops::Range<u64> = 0..10;
pub const LEARNING_ITERATIONS: u64 = 2_000_000;

#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub target: String,
    pub measured: String,
    pub elapsed: Duration,
    pub budget: Duration,
    pub passed: bool,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{:>2}] {}: {} | target: {} | {:.1} s of {} s",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.target,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }
}

struct Check {
    measured: String,
    passed: bool,
}

fn timed(
    id: usize,
    name: &'static str,
    target: impl Into<String>,
    budget_secs: u64,
    body: impl FnOnce() -> Check,
) -> CriterionReport {
    let start = Instant::now();
    let check = body();
    finish(id, name, target.into(), budget_secs, start.elapsed(), check)
}

fn finish(
    id: usize,
    name: &'static str,
    target: String,
    budget_secs: u64,
    elapsed: Duration,
    check: Check,
) -> CriterionReport {
    let budget = Duration::from_secs(budget_secs);
    CriterionReport {
        id,
        name,
        target,
        measured: check.measured,
        elapsed,
        budget,
        passed: check.passed && elapsed <= budget,
    }
}

/// Runs criterion `id` (1-based).
pub fn run_criterion(id: usize) -> CriterionReport {
    match id {
        1 => bellman_contraction(),
        2 => value_q_consistency(),
        3 => policy_gradient_theorem(),
        4 => performance_difference_lemma(),
        5 => nash_fixed_point_equivalence(),
        6 => q_tracking(),
        7 => nash_convergence(),
        8 => lyapunov_decrease(),
        9 => potential_verification(),
        10 => step_schedule_validator(),
        11 => determinism(),
        _ => panic!("no acceptance criterion {id}"),
    }
}

pub fn run_all() -> Vec<CriterionReport> {
    (1..=NUM_CRITERIA).map(run_criterion).collect()
}

pub fn render_table(reports: &[CriterionReport]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    out.push_str(&format!("{passed}/{} criteria passed\n", reports.len()));
    out
}

fn mixed_params(rng: &mut ChaCha8Rng) -> RandomGameParams {
    let players = rng.random_range(1..=3);
    RandomGameParams {
        num_states: rng.random_range(1..=3),
        actions: (0..players).map(|_| rng.random_range(2..=3)).collect(),
        discount: rng.random_range(0.05..0.95),
        payoff_range: (-1.0, 1.0),
        min_transition: 0.0,
        identical_payoffs: false,
    }
}

fn random_q(rng: &mut ChaCha8Rng, num_states: usize, num_actions: usize) -> StateActionTable<f64> {
    let mut q = StateActionTable::zeros(num_states, num_actions);
    for x in q.as_mut_slice() {
        *x = rng.random_range(-10.0..10.0);
    }
    q
}

pub fn bellman_contraction() -> CriterionReport {
    timed(
        1,
        "Bellman contraction",
        "1000 triples, ||Tq - Tq'|| <= delta ||q - q'|| + 1e-12 in all",
        10,
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(101);
            let trials = 1000;
            let mut violations = 0;
            let mut worst_ratio = 0.0f64;
            for _ in 0..trials {
                let delta = rng.random_range(0.01..0.99);
                let game: Game = random_game(&mut rng, &RandomGameParams::small(delta));
                let pi = random_policy(&mut rng, &game);
                let i = rng.random_range(0..2);
                let q = random_q(&mut rng, 2, 2);
                let q2 = random_q(&mut rng, 2, 2);
                let lhs = bellman_operator(&game, &pi, i, &q)
                    .sup_dist(&bellman_operator(&game, &pi, i, &q2));
                let dist = q.sup_dist(&q2);
                if lhs > delta * dist + 1e-12 {
                    violations += 1;
                }
                worst_ratio = worst_ratio.max(lhs / (delta * dist));
            }
            Check {
            measured: format!("{violations} violations in {trials}; max ratio to delta-bound {worst_ratio:.6}"),
            passed: violations == 0,
        }
        },
    )
}

pub fn value_q_consistency() -> CriterionReport {
    timed(
        2,
        "Value/Q consistency",
        "|sum_a pi_i Q_i - V_i| <= 1e-10 on 200 games",
        10,
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(102);
            let mut worst = 0.0f64;
            for _ in 0..200 {
                let params = mixed_params(&mut rng);
                let game: Game = random_game(&mut rng, &params);
                let pi = random_policy(&mut rng, &game);
                for i in 0..game.num_players() {
                    let v = value_function(&game, &pi, i);
                    let q = q_function(&game, &pi, i);
                    for s in 0..game.num_states() {
                        let avg: f64 = pi
                            .player(i)
                            .row(s)
                            .iter()
                            .zip(q.row(s))
                            .map(|(p, x)| p * x)
                            .sum();
                        worst = worst.max((avg - v[s]).abs());
                    }
                }
            }
            Check {
                measured: format!("max deviation {worst:.3e}"),
                passed: worst <= 1e-10,
            }
        },
    )
}

pub fn policy_gradient_theorem() -> CriterionReport {
    timed(
        3,
        "Policy gradient theorem",
        "relative error <= 1e-4 vs central differences (h = 1e-6), 20 games",
        30,
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(103);
            let h = 1e-6;
            let mut worst = 0.0f64;
            let mut coordinates = 0;
            for _ in 0..20 {
                let params = mixed_params(&mut rng);
                let game: Game = random_game(&mut rng, &params);
                let pi = random_policy(&mut rng, &game);
                let mu = game.init_dist().to_vec();
                for i in 0..game.num_players() {
                    let grad = policy_gradient(&game, &pi, &mu, i);
                    for s in 0..game.num_states() {
                        for a in 0..game.num_actions(i) {
                            let shifted = |dh: f64| {
                                let mut t = pi.player(i).clone();
                                t.row_mut(s)[a] += dh;
                                let p = PolicyProfile::multilinear(&game, {
                                    let mut v = pi.players().to_vec();
                                    v[i] = t;
                                    v
                                })
                                .expect("same shape");
                                value_at_dist(&game, &p, i, &mu)
                            };
                            let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
                            let exact = grad[(s, a)];
                            let scale = exact.abs().max(fd.abs()).max(1e-6);
                            worst = worst.max((fd - exact).abs() / scale);
                            coordinates += 1;
                        }
                    }
                }
            }
            Check {
                measured: format!("max relative error {worst:.3e} over {coordinates} coordinates"),
                passed: worst <= 1e-4,
            }
        },
    )
}

pub fn performance_difference_lemma() -> CriterionReport {
    timed(
        4,
        "Performance difference lemma",
        "|lhs - rhs| <= 1e-8 on 200 unilateral deviations",
        10,
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(104);
            let mut worst = 0.0f64;
            for _ in 0..200 {
                let params = mixed_params(&mut rng);
                let game: Game = random_game(&mut rng, &params);
                let pi = random_policy(&mut rng, &game);
                let i = rng.random_range(0..game.num_players());
                let alt = pi.with_player(
                    i,
                    random_player_policy(&mut rng, game.num_states(), game.num_actions(i)),
                );
                let pd = performance_difference(&game, &pi, &alt, i, game.init_dist())
                    .expect("unilateral");
                worst = worst.max((pd.lhs - pd.rhs).abs());
            }
            Check {
                measured: format!("max |lhs - rhs| {worst:.3e}"),
                passed: worst <= 1e-8,
            }
        },
    )
}

/// Fixed-point tolerance paired with the `EXACT_EPSILON` certificate.
pub const FIXED_POINT_TOL: f64 = 1e-8;

pub fn nash_fixed_point_equivalence() -> CriterionReport {
    timed(
        5,
        "Nash <=> br fixed point",
        "agreement with nash_gap <= 1e-6 on every deterministic profile",
        60,
        || {
            let mut games: Vec<Potential> = vec![g2()];
            games.extend((0..10).map(g3));
            let mut cases = 0;
            let mut disagreements = 0;
            let mut equilibria = 0;
            for spec in &games {
                let game = spec.game();
                let profiles = DeterministicProfiles::new(game);
                for k in 0..profiles.count() {
                    let pi = profiles.profile(game, k);
                    let certified = nash_gap(game, &pi, EXACT_EPSILON).certified;
                    let fixed = br_fixed_point_check(game, &pi, FIXED_POINT_TOL).holds();
                    cases += 1;
                    equilibria += usize::from(certified);
                    disagreements += usize::from(certified != fixed);
                }
            }
            Check {
                measured: format!(
                    "{disagreements} disagreements in {cases} profiles ({equilibria} equilibria)"
                ),
                passed: disagreements == 0,
            }
        },
    )
}

struct GameBatch {
    name: &'static str,
    outcome: ExperimentOutcome,
    csv: BTreeMap<u64, Vec<u8>>,
}

struct LearningBatch {
    games: Vec<GameBatch>,
    elapsed: Duration,
}

fn learning_config(game: &str) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(game, LEARNING_SEEDS.collect());
    cfg.iterations = LEARNING_ITERATIONS;
    cfg
}

fn run_batch(jobs: Option<usize>) -> Result<LearningBatch> {
    let start = Instant::now();
    let mut games = Vec::new();
    for name in ["G2", "G3"] {
        let dir = tempfile::tempdir()?;
        let outcome = run_experiment(&learning_config(name), jobs, Some(dir.path()))?;
        let mut csv = BTreeMap::new();
        for seed in LEARNING_SEEDS {
            csv.insert(seed, fs::read(dir.path().join(metrics_file_name(seed)))?);
        }
        games.push(GameBatch { name, outcome, csv });
    }
    Ok(LearningBatch {
        games,
        elapsed: start.elapsed(),
    })
}

fn learning_batch() -> &'static LearningBatch {
    static BATCH: OnceLock<LearningBatch> = OnceLock::new();
    BATCH.get_or_init(|| run_batch(None).expect("learning batch runs"))
}

/// Final tracking error `<= 0.1` and the series `< 0.2` over the last quarter
/// of iterates.
fn tracks(rows: &[mpg_core::learner::MetricsRow<f64>], iterations: u64) -> (bool, f64, f64) {
    let last = rows.last().map_or(f64::INFINITY, |r| r.q_tracking_error);
    let tail = rows
        .iter()
        .filter(|r| 4 * r.iterate > 3 * iterations)
        .map(|r| r.q_tracking_error)
        .fold(0.0, f64::max);
    (last <= 0.1 && tail < 0.2, last, tail)
}

pub fn q_tracking() -> CriterionReport {
    let batch = learning_batch();
    let mut parts = Vec::new();
    let mut passed = true;
    for g in &batch.games {
        let mut ok = 0;
        let mut worst_final = 0.0f64;
        let mut worst_tail = 0.0f64;
        for run in &g.outcome.runs {
            let (pass, last, tail) = tracks(&run.rows, LEARNING_ITERATIONS);
            ok += usize::from(pass);
            worst_final = worst_final.max(last);
            worst_tail = worst_tail.max(tail);
        }
        let adjusted = g
            .outcome
            .summary
            .seeds
            .iter()
            .map(|s| s.exploration_adjusted_tracking_error)
            .fold(0.0, f64::max);
        passed &= ok * 10 >= 9 * g.outcome.runs.len();
        parts.push(format!(
            "{} {ok}/{} seeds (worst final {worst_final:.4}, worst tail {worst_tail:.4}, \
             exploration-adjusted worst final {adjusted:.4})",
            g.name,
            g.outcome.runs.len()
        ));
    }
    finish(
        6,
        "Q-tracking",
        "final <= 0.1 and last-quarter series < 0.2 on >= 9/10 seeds, G2 and G3".into(),
        600,
        batch.elapsed,
        Check {
            measured: parts.join("; "),
            passed,
        },
    )
}

pub fn nash_convergence() -> CriterionReport {
    let batch = learning_batch();
    let mut parts = Vec::new();
    let mut passed = true;
    for g in &batch.games {
        let s = &g.outcome.summary;
        let ok = s.seeds.iter().filter(|x| x.last.nash_gap <= 0.05).count();
        let worst = s.seeds.iter().map(|x| x.last.nash_gap).fold(0.0, f64::max);
        passed &= ok * 10 >= 9 * s.seeds.len();
        parts.push(format!(
            "{} {ok}/{} seeds (worst final gap {worst:.4})",
            g.name,
            s.seeds.len()
        ));
    }
    finish(
        7,
        "Nash convergence",
        "final nash_gap <= 0.05 on >= 9/10 seeds, G2 and G3, T = 2e6".into(),
        600,
        batch.elapsed,
        Check {
            measured: parts.join("; "),
            passed,
        },
    )
}

pub fn lyapunov_decrease() -> CriterionReport {
    timed(
        8,
        "Lyapunov decrease",
        "no dphi > 1e-6 dt off switch steps; final phi, nash_gap <= 1e-3",
        60,
        || {
            let dt = 0.01;
            let mut parts = Vec::new();
            let mut passed = true;
            for (name, spec) in [
                ("G2", g2()),
                ("G3", g3(crate::catalog::G3_SEED)),
                ("G4", g4()),
            ] {
                let pi0 = PolicyProfile::uniform(spec.game());
                let traj = run_flow(&spec, &pi0, dt, 50.0).expect("flow integrates");
                let report = lyapunov_monotonicity_report(&traj, 1e-6 * dt);
                let last = traj.last();
                passed &= report.passed && last.phi <= 1e-3 && last.nash_gap <= 1e-3;
                parts.push(format!(
                    "{name}: {} violations, {} switch steps, final phi {:.2e}, final gap {:.2e}",
                    report.violations, report.switch_steps, last.phi, last.nash_gap
                ));
            }
            Check {
                measured: parts.join("; "),
                passed,
            }
        },
    )
}

pub fn potential_verification() -> CriterionReport {
    timed(
        9,
        "Potential verification",
        "violation <= 1e-8 on G2/G3/G4 (100 samples), GZ rejected",
        30,
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(109);
            let mut parts = Vec::new();
            let mut passed = true;
            for (name, spec, expect) in [
                ("G2", g2(), true),
                ("G3", g3(crate::catalog::G3_SEED), true),
                ("G4", g4(), true),
                ("GZ", gz(), false),
            ] {
                let report = verify_mpg(&spec, 100, 1e-8, &mut rng);
                passed &= report.passed == expect;
                parts.push(format!(
                    "{name} {} ({:.2e})",
                    if report.passed { "passes" } else { "fails" },
                    report.max_violation
                ));
            }
            Check {
                measured: parts.join(", "),
                passed,
            }
        },
    )
}

/// Criterion 10 with `accepted` as the schedule that must validate; the
/// designated rejections are fixed.
pub fn step_schedule_criterion(accepted: Schedule) -> CriterionReport {
    timed(
        10,
        "Step-size validator",
        "accept the given schedule; reject (0.5, .), (c, c), (., 1.1)",
        1,
        || {
            let sched = |c1: f64, c2: f64| StepSchedule::new(1.0, c1, 1.0, c2);
            let accept = validate_schedule(&accepted);
            let summability = validate_schedule(&sched(0.5, 0.85));
            let timescale = validate_schedule(&sched(0.7, 0.7));
            let divergence = validate_schedule(&sched(0.6, 1.1));
            let passed = accept.is_ok()
                && matches!(summability, Err(ScheduleError::Summability { .. }))
                && matches!(timescale, Err(ScheduleError::Timescale { .. }))
                && matches!(divergence, Err(ScheduleError::Divergence { .. }));
            let show = |r: &Result<(), ScheduleError>| match r {
                Ok(()) => "ok".to_string(),
                Err(e) => format!("{e:?}"),
            };
            Check {
                measured: format!(
                    "({}, {}) {}; (0.5, 0.85) {}; (0.7, 0.7) {}; (0.6, 1.1) {}",
                    accepted.c1,
                    accepted.c2,
                    show(&accept),
                    show(&summability),
                    show(&timescale),
                    show(&divergence)
                ),
                passed,
            }
        },
    )
}

pub fn step_schedule_validator() -> CriterionReport {
    step_schedule_criterion(StepSchedule::new(1.0, 0.6, 1.0, 0.85))
}

pub fn determinism() -> CriterionReport {
    let first = learning_batch();
    let start = Instant::now();
    let second = run_batch(Some(2)).expect("learning batch runs");
    let elapsed = first.elapsed + start.elapsed();
    let mut files = 0;
    let mut differing = Vec::new();
    for (a, b) in first.games.iter().zip(&second.games) {
        for (seed, bytes) in &a.csv {
            files += 1;
            if b.csv.get(seed) != Some(bytes) {
                differing.push(format!("{} seed {seed}", a.name));
            }
        }
    }
    let measured = if differing.is_empty() {
        format!("{files} CSV files byte-identical (second run on 2 workers)")
    } else {
        format!(
            "{} of {files} CSV files differ: {}",
            differing.len(),
            differing.join(", ")
        )
    };
    finish(
        11,
        "Determinism",
        "two runs of criterion 7 give byte-identical CSVs".into(),
        600,
        elapsed,
        Check {
            measured,
            passed: differing.is_empty(),
        },
    )
}
