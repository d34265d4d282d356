//! Seeded batches of learning runs and flow integrations, with CSV and JSON
//! output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use mpg_core::learner::{
    current_profile, exploration_adjusted_tracking_error, seeded_run, MetricsRow,
};
use mpg_core::ode::{integrate_flow, FlowConfig};
use mpg_core::oracle::{nash_gap, DEFAULT_ENUMERATION_CAP};
use mpg_core::{Game, Metrics, NashReport, Policy, Potential, Trajectory};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::format::load_potential;

/// Header of every per-seed metrics file.
pub const METRICS_HEADER: &str =
    "iterate,nash_gap,q_tracking_error,potential_value,min_state_visits";

pub fn metrics_file_name(seed: u64) -> String {
    format!("seed_{seed}.csv")
}

pub const SUMMARY_FILE: &str = "summary.json";

pub fn write_metrics_csv<W: Write>(rows: &[MetricsRow<f64>], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(METRICS_HEADER.split(','))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeedVerdict {
    pub nash_gap: bool,
    pub q_tracking: bool,
    pub all: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedSummary {
    pub seed: u64,
    #[serde(rename = "final")]
    pub last: MetricsRow<f64>,
    /// Tracking error against the Q-function under the opponents' sampling
    /// mixtures; see [`exploration_adjusted_tracking_error`].
    pub exploration_adjusted_tracking_error: f64,
    pub final_policy: Vec<Vec<Vec<f64>>>,
    pub nash_report: NashReport,
    pub passed: SeedVerdict,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PassFractions {
    pub nash_gap: f64,
    pub q_tracking: f64,
    pub all: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    /// Ascending by seed.
    pub seeds: Vec<SeedSummary>,
    pub pass_fraction: PassFractions,
    /// Every seed-level threshold met on at least `thresholds.pass_fraction`
    /// of the seeds.
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub summary: ExperimentSummary,
    /// Metric series, ascending by seed.
    pub runs: Vec<Metrics>,
}

struct SeedResult {
    metrics: Metrics,
    summary: SeedSummary,
}

fn run_seed(spec: &Potential, cfg: &ExperimentConfig, seed: u64) -> Result<SeedResult> {
    let run = seeded_run(
        spec,
        &cfg.learner_configs(),
        seed,
        cfg.iterations,
        cfg.metrics_cadence,
    )?;
    let pi = current_profile(spec, &run.learners);
    let last = run
        .metrics
        .last()
        .copied()
        .unwrap_or_else(|| mpg_core::learner::measure(spec, &run.learners, 0));
    let nash = last.nash_gap <= cfg.thresholds.nash_gap_final;
    let tracking = last.q_tracking_error <= cfg.thresholds.q_tracking_final;
    let summary = SeedSummary {
        seed,
        last,
        exploration_adjusted_tracking_error: exploration_adjusted_tracking_error(
            spec,
            &run.learners,
        ),
        final_policy: pi.players().iter().map(|t| t.to_rows()).collect(),
        nash_report: nash_gap(spec.game(), &pi, cfg.thresholds.nash_gap_final),
        passed: SeedVerdict {
            nash_gap: nash,
            q_tracking: tracking,
            all: nash && tracking,
        },
    };
    Ok(SeedResult {
        metrics: run.metrics,
        summary,
    })
}

fn worker_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n.max(1));
    }
    Ok(builder.build()?)
}

/// Runs every seed of `cfg` on `jobs` worker threads (default: logical
/// cores). With `output` set, writes `seed_<n>.csv` per seed and
/// `summary.json` into that directory.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    jobs: Option<usize>,
    output: Option<&Path>,
) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let spec = load_potential(&cfg.game)?;
    if let Some(dir) = output {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut seeds = cfg.seeds.clone();
    seeds.sort_unstable();

    let results: Vec<SeedResult> = worker_pool(jobs)?.install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                let result = run_seed(&spec, cfg, seed)?;
                if let Some(dir) = output {
                    let path = dir.join(metrics_file_name(seed));
                    let file = fs::File::create(&path)
                        .with_context(|| format!("creating {}", path.display()))?;
                    write_metrics_csv(&result.metrics.rows, std::io::BufWriter::new(file))?;
                }
                Ok(result)
            })
            .collect::<Result<_>>()
    })?;

    let n = results.len() as f64;
    let fraction = |f: fn(&SeedVerdict) -> bool| {
        results.iter().filter(|r| f(&r.summary.passed)).count() as f64 / n
    };
    let pass_fraction = PassFractions {
        nash_gap: fraction(|v| v.nash_gap),
        q_tracking: fraction(|v| v.q_tracking),
        all: fraction(|v| v.all),
    };
    let mut config = cfg.clone();
    if let Some(dir) = output {
        config.output_dir = dir.to_path_buf();
    }
    let summary = ExperimentSummary {
        passed: pass_fraction.all >= cfg.thresholds.pass_fraction,
        config,
        pass_fraction,
        seeds: results.iter().map(|r| r.summary.clone()).collect(),
    };
    if let Some(dir) = output {
        let path = dir.join(SUMMARY_FILE);
        fs::write(&path, crate::format::to_json(&summary))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExperimentOutcome {
        summary,
        runs: results.into_iter().map(|r| r.metrics).collect(),
    })
}

/// Resolves the output directory: `MPG_LAB_OUT` wins over `flag`, which wins
/// over the config value.
pub fn resolve_output_dir(flag: Option<PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    std::env::var_os("MPG_LAB_OUT")
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .or(flag)
        .unwrap_or_else(|| cfg.output_dir.clone())
}

/// Integrates the flow from `pi0` with unit rates.
pub fn run_flow(spec: &Potential, pi0: &Policy, dt: f64, horizon: f64) -> Result<Trajectory> {
    let game = spec.game();
    let cfg = FlowConfig::unit_rates(game.num_players(), game.num_states(), dt, horizon);
    Ok(integrate_flow(spec, pi0, &cfg, DEFAULT_ENUMERATION_CAP)?)
}

/// Flow CSV header: `tau,phi,nash_gap` followed by `pi_<i>_<s>_<a>` for
/// every player, state and action.
pub fn flow_header(spec: &Potential) -> Vec<String> {
    let game = spec.game();
    let mut header: Vec<String> = ["tau", "phi", "nash_gap"].map(String::from).to_vec();
    for i in 0..game.num_players() {
        for s in 0..game.num_states() {
            for a in 0..game.num_actions(i) {
                header.push(format!("pi_{i}_{s}_{a}"));
            }
        }
    }
    header
}

pub fn write_flow_csv<W: Write>(spec: &Potential, traj: &Trajectory, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(flow_header(spec))?;
    for p in &traj.points {
        let mut record = vec![p.tau.to_string(), p.phi.to_string(), p.nash_gap.to_string()];
        for table in p.policy.players() {
            record.extend(table.as_slice().iter().map(f64::to_string));
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Certifies `pi` as an `epsilon`-Nash equilibrium.
pub fn certify(game: &Game, pi: &Policy, epsilon: f64) -> NashReport {
    nash_gap(game, pi, epsilon)
}
