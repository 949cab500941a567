//! JSON wire formats for games and profiles.
//!
//! Indices are 1-based on the wire and 0-based in memory.
//!
//! ```json
//! { "n": 2, "m": 2, "lambda": 1.0,
//!   "beta": [ { "i": 1, "ip": 2, "matrix": [[1, 0], [0, 1]] } ] }
//! ```
//!
//! Omitted `(i, ip)` blocks are zero. Profiles are `{ "pure": [1, 2] }` or
//! `{ "mixed": [[0.5, 0.5], [1, 0]] }`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::check::{GameCheck, LipschitzWitness, RangeDirection};
use crate::error::{Error, Result};
use crate::game::PolymatrixGame;
use crate::profile::{MixedProfile, PureProfile};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameFile {
    pub n: usize,
    pub m: usize,
    pub lambda: f64,
    #[serde(default)]
    pub beta: Vec<BlockFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockFile {
    pub i: usize,
    pub ip: usize,
    pub matrix: Vec<Vec<f64>>,
}

/// Exactly one of `pure` or `mixed`; other keys (such as solver statistics
/// next to the profile) are ignored on input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", try_from = "ProfileFields")]
pub enum ProfileFile {
    Pure(Vec<usize>),
    Mixed(Vec<Vec<f64>>),
}

#[derive(Deserialize)]
struct ProfileFields {
    pure: Option<Vec<usize>>,
    mixed: Option<Vec<Vec<f64>>>,
}

impl TryFrom<ProfileFields> for ProfileFile {
    type Error = String;

    fn try_from(f: ProfileFields) -> std::result::Result<Self, String> {
        match (f.pure, f.mixed) {
            (Some(a), None) => Ok(ProfileFile::Pure(a)),
            (None, Some(p)) => Ok(ProfileFile::Mixed(p)),
            _ => Err("a profile needs exactly one of \"pure\" or \"mixed\"".into()),
        }
    }
}

/// A profile read from disk: either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Pure(PureProfile),
    Mixed(MixedProfile),
}

impl Profile {
    pub fn into_mixed(self, m: usize) -> MixedProfile {
        match self {
            Profile::Pure(a) => MixedProfile::from_pure(&a, m),
            Profile::Mixed(p) => p,
        }
    }
}

impl GameFile {
    pub fn into_game(self) -> Result<PolymatrixGame> {
        let mut game = PolymatrixGame::zeros(self.n, self.m, self.lambda)?;
        for (k, block) in self.beta.into_iter().enumerate() {
            if block.i == 0 || block.ip == 0 || block.i > self.n || block.ip > self.n {
                return Err(Error::Validation(format!(
                    "beta[{k}]: indices ({}, {}) must lie in 1..={}",
                    block.i, block.ip, self.n
                )));
            }
            if block.i == block.ip {
                return Err(Error::Validation(format!(
                    "beta[{k}]: self-play block ({0}, {0}) is not allowed",
                    block.i
                )));
            }
            game.set_block(block.i - 1, block.ip - 1, &block.matrix)
                .map_err(|e| Error::Validation(format!("beta[{k}]: {e}")))?;
        }
        Ok(game)
    }

    /// All-zero blocks are omitted.
    pub fn from_game(game: &PolymatrixGame) -> Self {
        let n = game.n();
        let mut beta = Vec::new();
        for i in 0..n {
            for ip in (0..n).filter(|&ip| ip != i) {
                let matrix = game.block(i, ip);
                if matrix.iter().flatten().any(|&b| b != 0.0) {
                    beta.push(BlockFile {
                        i: i + 1,
                        ip: ip + 1,
                        matrix,
                    });
                }
            }
        }
        Self {
            n,
            m: game.m(),
            lambda: crate::game::PayoffModel::lambda(game),
            beta,
        }
    }
}

impl ProfileFile {
    pub fn into_profile(self, m: usize) -> Result<Profile> {
        match self {
            ProfileFile::Pure(actions) => {
                if actions.contains(&0) {
                    return Err(Error::Validation("pure actions are 1-based".into()));
                }
                let actions = actions.into_iter().map(|a| a - 1).collect();
                Ok(Profile::Pure(PureProfile::new(actions, m)?))
            }
            ProfileFile::Mixed(rows) => Ok(Profile::Mixed(MixedProfile::from_rows(rows)?)),
        }
    }

    pub fn from_pure(a: &PureProfile) -> Self {
        ProfileFile::Pure(a.actions().iter().map(|a| a + 1).collect())
    }

    pub fn from_mixed(p: &MixedProfile) -> Self {
        ProfileFile::Mixed(p.to_rows())
    }
}

/// [`LipschitzWitness`] with 1-based player and action indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessFile {
    pub player: usize,
    pub profile_a: Vec<usize>,
    pub profile_b: Vec<usize>,
    pub observed_gap: f64,
    pub allowed_gap: f64,
}

impl From<&LipschitzWitness> for WitnessFile {
    fn from(w: &LipschitzWitness) -> Self {
        let one_based = |a: &PureProfile| a.actions().iter().map(|x| x + 1).collect();
        Self {
            player: w.player + 1,
            profile_a: one_based(&w.profile_a),
            profile_b: one_based(&w.profile_b),
            observed_gap: w.observed_gap,
            allowed_gap: w.allowed_gap,
        }
    }
}

/// [`GameCheck`] with 1-based indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CheckFile {
    Valid,
    RangeViolation {
        player: usize,
        action: usize,
        direction: RangeDirection,
        value: f64,
    },
    LipschitzViolation {
        witness: WitnessFile,
    },
}

impl From<&GameCheck> for CheckFile {
    fn from(c: &GameCheck) -> Self {
        match c {
            GameCheck::Valid => CheckFile::Valid,
            GameCheck::RangeViolation {
                player,
                action,
                direction,
                value,
            } => CheckFile::RangeViolation {
                player: player + 1,
                action: action + 1,
                direction: *direction,
                value: *value,
            },
            GameCheck::LipschitzViolation { witness } => CheckFile::LipschitzViolation {
                witness: witness.into(),
            },
        }
    }
}

pub fn parse_game(text: &str, context: &str) -> Result<PolymatrixGame> {
    let file: GameFile = serde_json::from_str(text).map_err(|source| Error::Json {
        context: context.to_string(),
        source,
    })?;
    file.into_game()
        .map_err(|e| Error::Validation(format!("{context}: {e}")))
}

pub fn game_to_json(game: &PolymatrixGame) -> String {
    serde_json::to_string(&GameFile::from_game(game)).expect("game serializes")
}

pub fn read_game(path: &Path) -> Result<PolymatrixGame> {
    let text = read_text(path)?;
    parse_game(&text, &path.display().to_string())
}

pub fn parse_profile(text: &str, m: usize, context: &str) -> Result<Profile> {
    let file: ProfileFile = serde_json::from_str(text).map_err(|source| Error::Json {
        context: context.to_string(),
        source,
    })?;
    file.into_profile(m)
        .map_err(|e| Error::Validation(format!("{context}: {e}")))
}

pub fn read_profile(path: &Path, m: usize) -> Result<Profile> {
    let text = read_text(path)?;
    parse_profile(&text, m, &path.display().to_string())
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_one_based_blocks() {
        let text = r#"{"n": 3, "m": 2, "lambda": 0.5,
            "beta": [{"i": 1, "ip": 3, "matrix": [[0.1, 0.2], [0.3, 0.4]]}]}"#;
        let g = parse_game(text, "inline").unwrap();
        assert_eq!(g.beta(0, 2, 1, 0), 0.3);
        assert_eq!(g.beta(0, 1, 1, 0), 0.0);
        let back = GameFile::from_game(&g);
        assert_eq!(back.beta.len(), 1);
        assert_eq!((back.beta[0].i, back.beta[0].ip), (1, 3));
    }

    #[test]
    fn rejects_bad_blocks() {
        for text in [
            r#"{"n": 2, "m": 2, "lambda": 0.5, "beta": [{"i": 1, "ip": 1, "matrix": [[0,0],[0,0]]}]}"#,
            r#"{"n": 2, "m": 2, "lambda": 0.5, "beta": [{"i": 0, "ip": 1, "matrix": [[0,0],[0,0]]}]}"#,
            r#"{"n": 2, "m": 2, "lambda": 0.5, "beta": [{"i": 1, "ip": 2, "matrix": [[0,0]]}]}"#,
            r#"{"n": 2, "m": 2, "lambda": 2.0}"#,
        ] {
            assert!(parse_game(text, "inline").is_err(), "{text}");
        }
    }

    #[test]
    fn json_error_carries_position() {
        let err = parse_game("{\n  \"n\": 2,\n  \"m\": ,\n}", "bad.json").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad.json") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn witness_is_one_based() {
        let w = LipschitzWitness {
            player: 0,
            profile_a: PureProfile::new(vec![1, 0], 2).unwrap(),
            profile_b: PureProfile::new(vec![1, 1], 2).unwrap(),
            observed_gap: 1.0,
            allowed_gap: 0.1,
        };
        let json = serde_json::to_string(&CheckFile::from(&GameCheck::LipschitzViolation { witness: w }))
            .unwrap();
        assert_eq!(
            json,
            r#"{"status":"lipschitz_violation","witness":{"player":1,"profile_a":[2,1],"profile_b":[2,2],"observed_gap":1.0,"allowed_gap":0.1}}"#
        );
    }

    #[test]
    fn profiles() {
        let p = parse_profile(r#"{"pure": [2, 1]}"#, 2, "x").unwrap();
        assert_eq!(p, Profile::Pure(PureProfile::new(vec![1, 0], 2).unwrap()));
        let q = parse_profile(r#"{"mixed": [[0.25, 0.75]]}"#, 2, "x").unwrap();
        assert!(matches!(q, Profile::Mixed(_)));
        assert!(parse_profile(r#"{"pure": [0]}"#, 2, "x").is_err());
        let r = parse_profile(r#"{"pure": [1], "converged": true}"#, 2, "x").unwrap();
        assert!(matches!(r, Profile::Pure(_)));
        assert!(parse_profile(r#"{"pure": [1], "mixed": [[1, 0]]}"#, 2, "x").is_err());
        assert!(parse_profile(r#"{}"#, 2, "x").is_err());
        assert!(parse_profile(r#"{"mixed": [[0.2, 0.2]]}"#, 2, "x").is_err());
        let s = serde_json::to_string(&ProfileFile::from_pure(
            &PureProfile::new(vec![0, 1], 2).unwrap(),
        ))
        .unwrap();
        assert_eq!(s, r#"{"pure":[1,2]}"#);
    }
}
