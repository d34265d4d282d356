//! Experiment configuration (TOML).
//!
//! ```toml
//! game = "G2"                # built-in name or path to a game file
//! seeds = [0, 1, 2]
//! iterations = 2000000
//! metrics_cadence = 10000
//! br_uses_stale_q = false
//! output_dir = "out/g2"
//!
//! [[learners]]               # one entry shared by all players, or one per player
//! theta = 0.05
//! z = 1.0
//! c1 = 0.6
//! y = 1.0
//! c2 = 0.85
//!
//! [thresholds]
//! nash_gap_final = 0.05
//! q_tracking_final = 0.1
//! pass_fraction = 0.9
//!
//! [flow]
//! dt = 0.01
//! horizon = 50.0
//! ```
//!
//! Every key except `game` and `seeds` has the default shown.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use mpg_core::learner::{validate_schedules, LearnerConfig, StepSchedule};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerParams {
    #[serde(default = "LearnerParams::default_theta")]
    pub theta: f64,
    #[serde(default = "one")]
    pub z: f64,
    #[serde(default = "LearnerParams::default_c1")]
    pub c1: f64,
    #[serde(default = "one")]
    pub y: f64,
    #[serde(default = "LearnerParams::default_c2")]
    pub c2: f64,
}

fn one() -> f64 {
    1.0
}

impl LearnerParams {
    fn default_theta() -> f64 {
        0.05
    }
    fn default_c1() -> f64 {
        0.6
    }
    fn default_c2() -> f64 {
        0.85
    }

    pub fn schedule(&self) -> StepSchedule<f64> {
        StepSchedule::new(self.z, self.c1, self.y, self.c2)
    }
}

impl Default for LearnerParams {
    fn default() -> Self {
        Self {
            theta: Self::default_theta(),
            z: 1.0,
            c1: Self::default_c1(),
            y: 1.0,
            c2: Self::default_c2(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    #[serde(default = "Thresholds::default_nash")]
    pub nash_gap_final: f64,
    #[serde(default = "Thresholds::default_tracking")]
    pub q_tracking_final: f64,
    #[serde(default = "Thresholds::default_fraction")]
    pub pass_fraction: f64,
}

impl Thresholds {
    fn default_nash() -> f64 {
        0.05
    }
    fn default_tracking() -> f64 {
        0.1
    }
    fn default_fraction() -> f64 {
        0.9
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            nash_gap_final: Self::default_nash(),
            q_tracking_final: Self::default_tracking(),
            pass_fraction: Self::default_fraction(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowParams {
    #[serde(default = "FlowParams::default_dt")]
    pub dt: f64,
    #[serde(default = "FlowParams::default_horizon")]
    pub horizon: f64,
}

impl FlowParams {
    fn default_dt() -> f64 {
        0.01
    }
    fn default_horizon() -> f64 {
        50.0
    }
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            dt: Self::default_dt(),
            horizon: Self::default_horizon(),
        }
    }
}

pub const DEFAULT_ITERATIONS: u64 = 2_000_000;
pub const DEFAULT_CADENCE: u64 = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub game: String,
    pub seeds: Vec<u64>,
    #[serde(default = "default_iterations")]
    pub iterations: u64,
    #[serde(default = "default_cadence")]
    pub metrics_cadence: u64,
    #[serde(default)]
    pub br_uses_stale_q: bool,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_learners")]
    pub learners: Vec<LearnerParams>,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub flow: FlowParams,
}

fn default_iterations() -> u64 {
    DEFAULT_ITERATIONS
}

fn default_cadence() -> u64 {
    DEFAULT_CADENCE
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_learners() -> Vec<LearnerParams> {
    vec![LearnerParams::default()]
}

impl ExperimentConfig {
    /// Config with every default for the given game and seeds.
    pub fn new(game: impl Into<String>, seeds: Vec<u64>) -> Self {
        Self {
            game: game.into(),
            seeds,
            iterations: DEFAULT_ITERATIONS,
            metrics_cadence: DEFAULT_CADENCE,
            br_uses_stale_q: false,
            output_dir: default_output_dir(),
            learners: default_learners(),
            thresholds: Thresholds::default(),
            flow: FlowParams::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file; a relative game path is taken
    /// relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.into(),
            source,
        })?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            ConfigError::Parse(msg) => ConfigError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        if crate::catalog::builtin(&cfg.game).is_none() {
            let game = Path::new(&cfg.game);
            if game.is_relative() {
                if let Some(dir) = path.parent() {
                    cfg.game = dir.join(game).to_string_lossy().into_owned();
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.game.is_empty() {
            return Err(invalid("game", "must name a built-in game or a file"));
        }
        if self.seeds.is_empty() {
            return Err(invalid("seeds", "must not be empty"));
        }
        let mut seen = BTreeSet::new();
        for (k, &seed) in self.seeds.iter().enumerate() {
            if !seen.insert(seed) {
                return Err(invalid(
                    format!("seeds[{k}]"),
                    format!("seed {seed} appears twice"),
                ));
            }
        }
        if self.iterations == 0 {
            return Err(invalid("iterations", "must be positive"));
        }
        if self.metrics_cadence == 0 {
            return Err(invalid("metrics_cadence", "must be positive"));
        }
        let t = &self.thresholds;
        for (name, value) in [
            ("thresholds.nash_gap_final", t.nash_gap_final),
            ("thresholds.q_tracking_final", t.q_tracking_final),
            ("thresholds.pass_fraction", t.pass_fraction),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(invalid(name, format!("must be positive, got {value}")));
            }
        }
        if t.pass_fraction > 1.0 {
            return Err(invalid("thresholds.pass_fraction", "must not exceed 1"));
        }
        if !(self.flow.dt > 0.0 && self.flow.dt.is_finite()) {
            return Err(invalid("flow.dt", "must be positive"));
        }
        if !(self.flow.horizon >= 0.0 && self.flow.horizon.is_finite()) {
            return Err(invalid("flow.horizon", "must be non-negative"));
        }
        if self.learners.is_empty() {
            return Err(invalid("learners", "needs at least one entry"));
        }
        for (k, l) in self.learners.iter().enumerate() {
            if !(l.theta > 0.0 && l.theta <= 1.0) {
                return Err(invalid(
                    format!("learners[{k}].theta"),
                    format!("{} is outside (0, 1]", l.theta),
                ));
            }
        }
        validate_schedules(
            &self
                .learners
                .iter()
                .map(LearnerParams::schedule)
                .collect::<Vec<_>>(),
        )
        .map_err(|e| invalid("learners", e.to_string()))?;
        Ok(())
    }

    pub fn learner_configs(&self) -> Vec<LearnerConfig<f64>> {
        self.learners
            .iter()
            .map(|l| LearnerConfig {
                theta: l.theta,
                schedule: l.schedule(),
                br_uses_stale_q: self.br_uses_stale_q,
                ..LearnerConfig::default()
            })
            .collect()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Parses `0,3,7` or a half-open range `0..10`, or a mix such as `0..3,9`.
pub fn parse_seed_list(text: &str) -> Result<Vec<u64>, String> {
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u64 = lo
                .trim()
                .parse()
                .map_err(|_| format!("bad seed range `{part}`"))?;
            let hi: u64 = hi
                .trim()
                .parse()
                .map_err(|_| format!("bad seed range `{part}`"))?;
            if lo >= hi {
                return Err(format!("empty seed range `{part}`"));
            }
            seeds.extend(lo..hi);
        } else {
            seeds.push(part.parse().map_err(|_| format!("bad seed `{part}`"))?);
        }
    }
    if seeds.is_empty() {
        return Err("no seeds given".into());
    }
    Ok(seeds)
}
