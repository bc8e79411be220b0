//! Versioned on-disk game records.
//!
//! One self-describing JSON document per game, with a top-level
//! `format_version`. Holdings are not stored per turn: they are recomputed
//! from the transcript on load and cross-checked against the stored
//! outcome, so a record that loads cleanly is known to be internally
//! consistent. Secrets never appear in a record; agent specs only name the
//! environment variable holding a key.

use crate::agents::{self, AgentSpec};
use crate::engine::{self, EngineError, GameState, TranscriptEntry};
use crate::outcome::{GameStatus, Outcome};
use crate::player::{PerPlayer, PlayerId};
use crate::protocol::StructuredMessage;
use crate::scenarios::ScenarioConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Record schema version written by this build.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("io failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt record: {0}")]
    CorruptRecord(String),
    #[error("unsupported record version {found} (this build reads up to {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },
    #[error("invalid edit at turn {turn}: {reason}")]
    InvalidEdit { turn: u32, reason: String },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RecordError + '_ {
    move |source| RecordError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Wall-clock bounds of a live game, unix seconds. Deterministic
/// (all-scripted) runs leave this out so identical inputs produce
/// byte-identical records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timestamps {
    pub started_at: u64,
    pub finished_at: u64,
}

/// Backend details worth keeping with a live game.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendMeta {
    pub models: PerPlayer<Option<String>>,
}

/// Where a counterfactual record came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub parent_id: String,
    pub edited_turn: u32,
}

/// A complete, reloadable game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub format_version: u32,
    pub id: String,
    pub config: ScenarioConfig,
    pub agents: PerPlayer<AgentSpec>,
    pub seed: u64,
    pub transcript: Vec<TranscriptEntry>,
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamps: Option<Timestamps>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<BackendMeta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<Provenance>,
}

fn record_id(
    config: &ScenarioConfig,
    seed: u64,
    agents: &PerPlayer<AgentSpec>,
    parent: Option<&Provenance>,
) -> String {
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_vec(config).expect("config serializes"));
    hasher.update(seed.to_le_bytes());
    hasher.update(agents.red.id.as_bytes());
    hasher.update([0]);
    hasher.update(agents.blue.id.as_bytes());
    if let Some(parent) = parent {
        hasher.update(parent.parent_id.as_bytes());
        hasher.update(parent.edited_turn.to_le_bytes());
    }
    let digest = hasher.finalize();
    let hex: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
    format!("g{hex}")
}

impl GameRecord {
    /// Wraps a finished game. Scripted-only games stay free of wall-clock
    /// data so identical inputs serialize to identical bytes; live games
    /// carry timestamps and backend metadata.
    pub fn from_game(
        state: GameState,
        outcome: Outcome,
        agent_specs: PerPlayer<AgentSpec>,
    ) -> GameRecord {
        let scripted_only = agent_specs.red.is_scripted() && agent_specs.blue.is_scripted();
        let (backend, timestamps) = if scripted_only {
            (None, None)
        } else {
            let now = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            (
                Some(BackendMeta {
                    models: agent_specs.map(AgentSpec::model_name),
                }),
                Some(Timestamps {
                    started_at: state.started_at.unwrap_or(now),
                    finished_at: now,
                }),
            )
        };
        GameRecord {
            format_version: FORMAT_VERSION,
            id: record_id(&state.config, state.rng_seed, &agent_specs, None),
            config: state.config,
            agents: agent_specs,
            seed: state.rng_seed,
            transcript: state.transcript,
            outcome,
            timestamps,
            backend,
            parent: None,
        }
    }

    /// Atomic write: the document lands under `path` completely or not at
    /// all (temp file in the target directory, then rename).
    pub fn save(&self, path: &Path) -> Result<(), RecordError> {
        let bytes = self.to_bytes();
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
        if let Some(dir) = dir {
            fs::create_dir_all(dir).map_err(io_err(path))?;
        }
        let mut tmp =
            tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new("."))).map_err(io_err(path))?;
        tmp.write_all(&bytes).map_err(io_err(path))?;
        tmp.flush().map_err(io_err(path))?;
        tmp.persist(path).map_err(|e| RecordError::Io {
            path: path.to_path_buf(),
            source: e.error,
        })?;
        Ok(())
    }

    /// Canonical serialized form; stable for identical records.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("record serializes");
        bytes.push(b'\n');
        bytes
    }

    /// Loads and verifies one record. Verification replays the transcript
    /// through the live engine rules and recomputes the outcome.
    pub fn load(path: &Path) -> Result<GameRecord, RecordError> {
        let bytes = fs::read(path).map_err(io_err(path))?;
        let record = Self::from_bytes(&bytes)?;
        record.verify()?;
        Ok(record)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<GameRecord, RecordError> {
        let value: serde_json::Value = serde_json::from_slice(bytes)
            .map_err(|e| RecordError::CorruptRecord(format!("unreadable json: {e}")))?;
        let found = value
            .get("format_version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| RecordError::CorruptRecord("missing format_version".into()))?
            as u32;
        if found > FORMAT_VERSION {
            return Err(RecordError::UnsupportedVersion {
                found,
                supported: FORMAT_VERSION,
            });
        }
        serde_json::from_value(value)
            .map_err(|e| RecordError::CorruptRecord(format!("schema mismatch: {e}")))
    }

    /// The transcript alone must suffice to recompute the outcome; a
    /// forfeit is the one terminal state that leaves no transcript trace.
    pub fn verify(&self) -> Result<(), RecordError> {
        let state = engine::replay(&self.config, self.seed, &self.transcript)
            .map_err(|e| RecordError::CorruptRecord(e.to_string()))?;
        let stored = &self.outcome;
        match state.status {
            GameStatus::Ongoing => {
                if !matches!(stored.status, GameStatus::Forfeit { .. }) {
                    return Err(RecordError::CorruptRecord(format!(
                        "transcript replays to an unfinished game but the record claims {:?}",
                        stored.status
                    )));
                }
            }
            replayed => {
                if replayed != stored.status {
                    return Err(RecordError::CorruptRecord(format!(
                        "replayed status {replayed:?} differs from stored {:?}",
                        stored.status
                    )));
                }
            }
        }
        let recomputed = Outcome::compute(
            self.config.kind,
            &self.config.endowments,
            state.holdings,
            &self.config.valuations,
            stored.status,
        )
        .map_err(|e| RecordError::CorruptRecord(e.to_string()))?;
        if &recomputed != stored {
            return Err(RecordError::CorruptRecord(
                "stored outcome differs from the one recomputed from the transcript".into(),
            ));
        }
        Ok(())
    }
}

/// Replays `record` up to (not including) turn `edit_turn`, substitutes
/// `replacement` there, then lets the supplied agents finish the game. The
/// derived record carries a provenance link to its parent.
pub fn counterfactual_rerun(
    record: &GameRecord,
    edit_turn: u32,
    replacement: &StructuredMessage,
    agent_specs: &PerPlayer<AgentSpec>,
    seed: u64,
) -> Result<GameRecord, RecordError> {
    let turn = edit_turn as usize;
    if turn >= record.transcript.len() {
        return Err(RecordError::InvalidEdit {
            turn: edit_turn,
            reason: format!("transcript has only {} turns", record.transcript.len()),
        });
    }
    let mut state = engine::replay(&record.config, seed, &record.transcript[..turn])
        .map_err(|e| RecordError::CorruptRecord(e.to_string()))?;
    state
        .force_move(replacement)
        .map_err(|v| RecordError::InvalidEdit {
            turn: edit_turn,
            reason: v.to_string(),
        })?;

    let mut red =
        agents::instantiate(&agent_specs.red, PlayerId::Red, &state.config).map_err(|source| {
            EngineError::AgentBackend {
                player: PlayerId::Red,
                source,
            }
        })?;
    let mut blue = agents::instantiate(&agent_specs.blue, PlayerId::Blue, &state.config).map_err(
        |source| EngineError::AgentBackend {
            player: PlayerId::Blue,
            source,
        },
    )?;
    while state.status == GameStatus::Ongoing {
        match state.current_player() {
            PlayerId::Red => state.step(red.as_mut())?,
            PlayerId::Blue => state.step(blue.as_mut())?,
        }
    }
    let outcome = state.outcome()?;
    let provenance = Provenance {
        parent_id: record.id.clone(),
        edited_turn: edit_turn,
    };
    let id = record_id(&state.config, seed, agent_specs, Some(&provenance));
    Ok(GameRecord {
        format_version: FORMAT_VERSION,
        id,
        config: state.config,
        agents: agent_specs.clone(),
        seed,
        transcript: state.transcript,
        outcome,
        timestamps: None,
        backend: None,
        parent: Some(provenance),
    })
}
