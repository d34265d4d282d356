//! Game, policy and potential documents (JSON).
//!
//! A game file holds the fields of [`RawGame`] plus an optional `potential`
//! section:
//!
//! ```json
//! {
//!   "num_players": 2, "discount": 0.5,
//!   "states": ["s0"], "actions": [["a1", "a2"], ["a1", "a2"]],
//!   "mu": [1.0],
//!   "payoff": [[[1, 0, 0, 2]], [[1, 0, 0, 2]]],
//!   "transition": [[[1], [1], [1], [1]]],
//!   "potential": { "kind": "team" }
//! }
//! ```
//!
//! `payoff[i][s][j]` and `transition[s][j][s']` use the joint action index
//! `j = Σ_i a_i Π_{k>i} |A_k|`. Numbers are written in shortest round-trip
//! form and parsed with correct rounding, so decimal literals with up to 15
//! significant digits survive a load/save cycle bit for bit.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use mpg_core::game::{validate_game, GameSpec, PolicyProfile, StateActionTable};
use mpg_core::potential::{
    claimed_single_state_potential, single_state_from_game, team_from_game, PotentialKind,
};
use mpg_core::{Game, Policy, Potential, RawGame};
use serde::{Deserialize, Serialize};

use crate::catalog;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSection {
    Team,
    SingleStatePotential {
        phi: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        zeta: Option<Vec<Vec<f64>>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameDocument {
    #[serde(flatten)]
    pub game: RawGame,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSection>,
}

impl GameDocument {
    pub fn from_potential(spec: &Potential) -> Self {
        let potential = match spec.kind() {
            PotentialKind::Team => PotentialSection::Team,
            PotentialKind::SingleState { phi, zeta } => PotentialSection::SingleStatePotential {
                phi: phi.clone(),
                zeta: zeta.clone(),
            },
        };
        Self {
            game: spec.game().to_raw(),
            potential: Some(potential),
        }
    }

    /// Builds the potential game; without a `potential` section the game must
    /// have identical payoffs.
    pub fn into_potential(self) -> Result<Potential> {
        let game = validate_game(self.game)?;
        Ok(match self.potential {
            None | Some(PotentialSection::Team) => team_from_game(game)
                .context("game has no potential section and its payoffs are not identical")?,
            Some(PotentialSection::SingleStatePotential {
                phi,
                zeta: Some(zeta),
            }) => single_state_from_game(game, phi, zeta)?,
            Some(PotentialSection::SingleStatePotential { phi, zeta: None }) => {
                claimed_single_state_potential(game, phi)?
            }
        })
    }
}

pub fn parse_game_document(text: &str) -> Result<GameDocument> {
    Ok(serde_json::from_str(text)?)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("documents serialize") + "\n"
}

/// Resolves a built-in name (`G1`, …) or reads a game file.
pub fn load_potential(name_or_path: &str) -> Result<Potential> {
    if let Some(spec) = catalog::builtin(name_or_path) {
        return Ok(spec);
    }
    let text = fs::read_to_string(name_or_path)
        .with_context(|| format!("reading game file {name_or_path}"))?;
    parse_game_document(&text)
        .with_context(|| format!("parsing game file {name_or_path}"))?
        .into_potential()
}

/// Loads any game (potential section ignored).
pub fn load_game(name_or_path: &str) -> Result<Game> {
    if let Some(spec) = catalog::builtin(name_or_path) {
        return Ok(spec.into_game());
    }
    let text = fs::read_to_string(name_or_path)
        .with_context(|| format!("reading game file {name_or_path}"))?;
    let doc =
        parse_game_document(&text).with_context(|| format!("parsing game file {name_or_path}"))?;
    Ok(validate_game(doc.game)?)
}

/// Policy file: `{"policy": [[[π_i(s, a) …] per state] per player]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyDocument {
    pub policy: Vec<Vec<Vec<f64>>>,
}

impl PolicyDocument {
    pub fn from_profile(pi: &Policy) -> Self {
        Self {
            policy: pi.players().iter().map(StateActionTable::to_rows).collect(),
        }
    }

    pub fn into_profile(self, game: &GameSpec<f64>) -> Result<Policy> {
        let tables = self
            .policy
            .iter()
            .map(|rows| StateActionTable::from_rows(rows))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PolicyProfile::new(game, tables)?)
    }
}

pub fn load_policy(path: &Path, game: &Game) -> Result<Policy> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading policy file {}", path.display()))?;
    let doc: PolicyDocument = serde_json::from_str(&text)
        .with_context(|| format!("parsing policy file {}", path.display()))?;
    doc.into_profile(game)
}
