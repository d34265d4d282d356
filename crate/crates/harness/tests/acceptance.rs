//! One test per acceptance criterion; each prints its PASS/FAIL line.

use mpg_core::learner::StepSchedule;
use mpg_harness::acceptance::{run_criterion, step_schedule_criterion, CriterionReport};

fn check(report: CriterionReport) {
    println!("{report}");
    assert!(report.passed, "{report}");
}

#[test]
fn criterion_01_bellman_contraction() {
    check(run_criterion(1));
}

#[test]
fn criterion_02_value_q_consistency() {
    check(run_criterion(2));
}

#[test]
fn criterion_03_policy_gradient_theorem() {
    check(run_criterion(3));
}

#[test]
fn criterion_04_performance_difference_lemma() {
    check(run_criterion(4));
}

#[test]
fn criterion_05_nash_fixed_point_equivalence() {
    check(run_criterion(5));
}

#[test]
fn criterion_06_q_tracking() {
    check(run_criterion(6));
}

#[test]
fn criterion_07_nash_convergence() {
    check(run_criterion(7));
}

#[test]
fn criterion_08_lyapunov_decrease() {
    check(run_criterion(8));
}

#[test]
fn criterion_09_potential_verification() {
    check(run_criterion(9));
}

#[test]
fn criterion_10_step_schedule_validator() {
    check(run_criterion(10));
}

#[test]
fn criterion_11_determinism() {
    check(run_criterion(11));
}

#[test]
fn corrupted_schedule_fails_the_validator_criterion() {
    let report = step_schedule_criterion(StepSchedule::new(1.0, 0.7, 1.0, 0.7));
    println!("injected c1 = c2, failure expected: {report}");
    assert!(!report.passed);
}
