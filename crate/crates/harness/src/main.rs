use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use mpg_core::game::PolicyProfile;
use mpg_core::ode::lyapunov_monotonicity_report;
use mpg_core::potential::verify_mpg;
use mpg_harness::acceptance::{render_table, run_criterion, NUM_CRITERIA};
use mpg_harness::catalog::builtin_games;
use mpg_harness::config::{parse_seed_list, ExperimentConfig};
use mpg_harness::experiment::{
    certify, resolve_output_dir, run_experiment, run_flow, write_flow_csv,
};
use mpg_harness::format::{load_game, load_policy, load_potential, to_json, GameDocument};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CSV_SCHEMA: &str = "\
Output files:
  <out>/seed_<n>.csv   one per seed, header exactly
                       iterate,nash_gap,q_tracking_error,potential_value,min_state_visits
                       one row every metrics_cadence iterates
  <out>/summary.json   config, per-seed finals and Nash reports, pass fractions

Flow CSV (`flow`): tau,phi,nash_gap,pi_<player>_<state>_<action>...

Games are named built-ins (see `catalog`) or JSON game files.";

#[derive(Parser)]
#[command(name = "mpg-lab", version, about = "Independent learning in Markov potential games", after_help = CSV_SCHEMA)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a game file or an experiment config (.toml).
    Validate {
        /// Game name, game file, or config file.
        target: String,
        /// Potential-identity samples drawn for a game.
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Run the learning dynamics for every seed of a config.
    #[command(after_help = CSV_SCHEMA)]
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seeds, e.g. `0..10` or `1,5,9`.
        #[arg(long)]
        seeds: Option<String>,
        /// Output directory; MPG_LAB_OUT takes precedence.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: logical cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Overrides metrics_cadence.
        #[arg(long)]
        cadence: Option<u64>,
        /// Overrides iterations.
        #[arg(long)]
        iterations: Option<u64>,
    },
    /// Integrate the continuous-time best-response flow and print CSV.
    #[command(after_help = CSV_SCHEMA)]
    Flow {
        game: String,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long, default_value_t = 50.0)]
        horizon: f64,
        /// `uniform` or a policy file.
        #[arg(long, default_value = "uniform")]
        init: String,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the Nash gap of a policy and certify it at `epsilon`.
    Certify {
        game: String,
        policy: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
    },
    /// Run the acceptance suite; exits nonzero if any criterion fails.
    Accept {
        /// Run only these criteria, e.g. `1,2,10`.
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
    /// List the built-in games, or dump one as a game file.
    Catalog {
        name: Option<String>,
        #[arg(long, value_enum, default_value_t = CatalogFormat::Text)]
        format: CatalogFormat,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CatalogFormat {
    Text,
    Json,
}

fn validate(target: &str, samples: usize) -> Result<bool> {
    if target.ends_with(".toml") {
        let cfg = ExperimentConfig::load(target.as_ref())?;
        let spec = load_potential(&cfg.game)?;
        println!(
            "config ok: game {} ({} players, {} states), {} seeds, {} iterations",
            cfg.game,
            spec.game().num_players(),
            spec.game().num_states(),
            cfg.seeds.len(),
            cfg.iterations
        );
        return Ok(true);
    }
    let game = load_game(target)?;
    println!(
        "game ok: {} players, {} states, actions {:?}, discount {}",
        game.num_players(),
        game.num_states(),
        game.joint().counts(),
        game.discount()
    );
    match load_potential(target) {
        Ok(spec) => {
            let report = verify_mpg(&spec, samples, 1e-8, &mut ChaCha8Rng::seed_from_u64(0));
            println!(
                "potential identity: max violation {:.3e} over {} samples: {}",
                report.max_violation,
                samples,
                if report.passed { "ok" } else { "FAILED" }
            );
            Ok(report.passed)
        }
        Err(e) => {
            println!("no potential: {e:#}");
            Ok(true)
        }
    }
}

fn run(
    config: PathBuf,
    seeds: Option<String>,
    out: Option<PathBuf>,
    jobs: Option<usize>,
    cadence: Option<u64>,
    iterations: Option<u64>,
) -> Result<bool> {
    let mut cfg = ExperimentConfig::load(&config)?;
    if let Some(list) = seeds {
        cfg.seeds = parse_seed_list(&list).map_err(anyhow::Error::msg)?;
    }
    if let Some(c) = cadence {
        cfg.metrics_cadence = c;
    }
    if let Some(t) = iterations {
        cfg.iterations = t;
    }
    let dir = resolve_output_dir(out, &cfg);
    let outcome = run_experiment(&cfg, jobs, Some(&dir))?;
    let s = &outcome.summary;
    for seed in &s.seeds {
        println!(
            "seed {:>4}: nash_gap {:.4} q_tracking {:.4} potential {:.4} {}",
            seed.seed,
            seed.last.nash_gap,
            seed.last.q_tracking_error,
            seed.last.potential_value,
            if seed.passed.all { "pass" } else { "fail" }
        );
    }
    println!(
        "pass fraction {:.2} (nash_gap {:.2}, q_tracking {:.2}), required {:.2}: {}",
        s.pass_fraction.all,
        s.pass_fraction.nash_gap,
        s.pass_fraction.q_tracking,
        cfg.thresholds.pass_fraction,
        if s.passed { "PASS" } else { "FAIL" }
    );
    println!("wrote {}", dir.display());
    Ok(s.passed)
}

fn flow(game: &str, dt: f64, horizon: f64, init: &str, out: Option<PathBuf>) -> Result<bool> {
    let spec = load_potential(game)?;
    let pi0 = if init == "uniform" {
        PolicyProfile::uniform(spec.game())
    } else {
        load_policy(init.as_ref(), spec.game())?
    };
    let traj = run_flow(&spec, &pi0, dt, horizon)?;
    match out {
        Some(path) => {
            let file =
                fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            write_flow_csv(&spec, &traj, std::io::BufWriter::new(file))?;
        }
        None => write_flow_csv(&spec, &traj, std::io::stdout().lock())?,
    }
    let report = lyapunov_monotonicity_report(&traj, 1e-6 * dt);
    eprintln!(
        "{} steps, {} switch steps, {} increases off switch steps, final phi {:.3e}, final nash_gap {:.3e}",
        report.steps,
        report.switch_steps,
        report.violations,
        traj.last().phi,
        traj.last().nash_gap
    );
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { target, samples } => validate(&target, samples),
        Command::Run {
            config,
            seeds,
            out,
            jobs,
            cadence,
            iterations,
        } => run(config, seeds, out, jobs, cadence, iterations),
        Command::Flow {
            game,
            dt,
            horizon,
            init,
            out,
        } => flow(&game, dt, horizon, &init, out),
        Command::Certify {
            game,
            policy,
            epsilon,
        } => (|| {
            let game = load_game(&game)?;
            let pi = load_policy(&policy, &game)?;
            let report = certify(&game, &pi, epsilon);
            print!("{}", to_json(&report));
            Ok(report.certified)
        })(),
        Command::Accept { only } => {
            let ids: Vec<usize> = if only.is_empty() {
                (1..=NUM_CRITERIA).collect()
            } else {
                only
            };
            if let Some(bad) = ids.iter().find(|&&k| k == 0 || k > NUM_CRITERIA) {
                eprintln!("error: no criterion {bad}");
                return ExitCode::from(2);
            }
            let reports: Vec<_> = ids
                .into_iter()
                .map(|k| {
                    let r = run_criterion(k);
                    println!("{r}");
                    r
                })
                .collect();
            print!(
                "{}",
                render_table(&reports)
                    .lines()
                    .last()
                    .map(|l| format!("{l}\n"))
                    .unwrap_or_default()
            );
            Ok(reports.iter().all(|r| r.passed))
        }
        Command::Catalog { name, format } => (|| {
            match (name, format) {
                (None, CatalogFormat::Text) => {
                    for e in builtin_games() {
                        println!("{:<4} {}", e.name, e.description);
                    }
                }
                (None, CatalogFormat::Json) => {
                    let docs: Vec<_> = builtin_games()
                        .iter()
                        .map(|e| GameDocument::from_potential(&e.spec))
                        .collect();
                    print!("{}", to_json(&docs));
                }
                (Some(name), _) => {
                    let spec = mpg_harness::catalog::builtin(&name)
                        .with_context(|| format!("no built-in game named {name}"))?;
                    print!("{}", to_json(&GameDocument::from_potential(&spec)));
                }
            }
            Ok(true)
        })(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
