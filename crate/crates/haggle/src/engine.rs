//! The turn-taking state machine for one game.
//!
//! Players strictly alternate, RED first. Each step hands the current
//! agent its conversation view (system prompt, then alternating
//! user/assistant messages ending in a user message), parses and validates
//! the reply, forwards the filtered text to the opponent, and applies the
//! decision. Illegal moves get a corrective notice and a bounded number of
//! fresh attempts; running out of attempts forfeits the game.

use crate::agents::{self, Agent, AgentError, AgentSpec, ChatMessage};
use crate::outcome::{GameStatus, Outcome, OutcomeError};
use crate::player::{PerPlayer, PlayerId};
use crate::protocol::{
    self, Decision, PlayerNames, ProtocolError, StructuredMessage, VisibilityPolicy,
};
use crate::records::GameRecord;
use crate::scenarios::ScenarioConfig;
use crate::trade::Trade;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Attempts an agent gets per turn before forfeiting (the first try plus
/// corrective retries).
pub const MOVE_ATTEMPTS: u32 = 3;

#[derive(Debug, Error)]
pub enum EngineError {
    /// The agent's backend failed even after its own retry budget; the
    /// game is aborted and excluded from statistics.
    #[error("backend failure for {player}: {source}")]
    AgentBackend {
        player: PlayerId,
        #[source]
        source: AgentError,
    },
    #[error("the game is already over")]
    GameOver,
    #[error(transparent)]
    Outcome(#[from] OutcomeError),
}

/// Why a reply was not a legal move. Rendered into the corrective notice
/// sent back to the agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MoveViolation {
    Grammar(ProtocolError),
    WrongIdentity {
        expected: PlayerId,
        claimed: PlayerId,
    },
    /// Proposed trade not covered by current holdings.
    InfeasibleTrade,
    /// ACCEPT with no standing opponent proposal to bind to.
    AcceptWithoutProposal,
    /// This variant requires the final message to be ACCEPT or REJECT.
    MustDecide,
    /// No move is legal once the game is over.
    AfterGameEnd,
}

impl fmt::Display for MoveViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MoveViolation::Grammar(err) => write!(f, "{err}"),
            MoveViolation::WrongIdentity { expected, claimed } => write!(
                f,
                "you are Player {expected} but the message was signed {claimed}"
            ),
            MoveViolation::InfeasibleTrade => {
                f.write_str("the proposed trade asks a player to give resources it does not hold")
            }
            MoveViolation::AcceptWithoutProposal => {
                f.write_str("there is no opponent proposal to accept")
            }
            MoveViolation::MustDecide => {
                f.write_str("this is the final turn: answer ACCEPT or REJECT")
            }
            MoveViolation::AfterGameEnd => f.write_str("the game is already over"),
        }
    }
}

/// One committed turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub player: PlayerId,
    /// The agent's reply, verbatim.
    pub raw_text: String,
    pub message: StructuredMessage,
    /// What the opponent was shown; always the filtered rendering of
    /// `message` under the game's visibility policy.
    pub forwarded_text: String,
    /// Rejected attempts that preceded this message.
    #[serde(default)]
    pub retries: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Full state of one game in progress.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    pub config: ScenarioConfig,
    pub holdings: PerPlayer<crate::resources::ResourceBundle>,
    pub transcript: Vec<TranscriptEntry>,
    /// The most recent feasible proposal; the unique target of an ACCEPT.
    pub standing_proposal: Option<Trade>,
    pub status: GameStatus,
    pub rng_seed: u64,
    #[serde(default)]
    pub policy: VisibilityPolicy,
    /// Wall-clock start, unix seconds; set only for live games.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub started_at: Option<u64>,
}

impl GameState {
    pub fn new(config: ScenarioConfig, seed: u64) -> GameState {
        GameState::with_policy(config, seed, VisibilityPolicy::standard())
    }

    /// A game under a non-default visibility policy; the policy is fixed
    /// for the whole game.
    pub fn with_policy(config: ScenarioConfig, seed: u64, policy: VisibilityPolicy) -> GameState {
        let holdings = config.endowments.clone();
        GameState {
            config,
            holdings,
            transcript: Vec::new(),
            standing_proposal: None,
            status: GameStatus::Ongoing,
            rng_seed: seed,
            policy,
            started_at: None,
        }
    }

    /// Zero-based index of the next message; equals the transcript length.
    pub fn turn_index(&self) -> u32 {
        self.transcript.len() as u32
    }

    pub fn current_player(&self) -> PlayerId {
        PlayerId::for_turn_index(self.turn_index())
    }

    /// Pure end classification: terminal states absorb, and an exhausted
    /// turn budget means MAX_TURNS.
    pub fn check_end(&self) -> GameStatus {
        if self.status != GameStatus::Ongoing {
            return self.status;
        }
        if self.turn_index() >= self.config.turn_budget() {
            return GameStatus::MaxTurns;
        }
        GameStatus::Ongoing
    }

    /// The chat view `player` sees: its system prompt, then the dialogue.
    /// Player 1 additionally gets the game-start user message that assigns
    /// its role, so both sides keep a strict system, user, assistant,
    /// user, ... structure.
    pub fn conversation_view(&self, player: PlayerId) -> Vec<ChatMessage> {
        let mut view = vec![ChatMessage::system(crate::scenarios::render_system_prompt(
            &self.config,
            player,
        ))];
        if player == PlayerId::Red {
            view.push(ChatMessage::user(crate::scenarios::initial_user_message(
                &self.config,
            )));
        }
        for entry in &self.transcript {
            if entry.player == player {
                view.push(ChatMessage::assistant(entry.raw_text.clone()));
            } else {
                view.push(ChatMessage::user(entry.forwarded_text.clone()));
            }
        }
        view
    }

    /// Validates and commits one raw reply from `player`.
    fn try_commit(
        &mut self,
        player: PlayerId,
        raw: &str,
        retries: u32,
    ) -> Result<(), MoveViolation> {
        let parsed = protocol::parse_message(raw, &self.config.vocab(), &PlayerNames::default())
            .map_err(MoveViolation::Grammar)?;
        let message = parsed.message;
        if message.player_name != player {
            return Err(MoveViolation::WrongIdentity {
                expected: player,
                claimed: message.player_name,
            });
        }
        let is_final_turn = self.turn_index() + 1 == self.config.turn_budget();
        let must_decide = is_final_turn && self.config.final_turn_must_decide();
        let mut accepted_trade: Option<Trade> = None;
        match message.decision {
            Decision::Propose => {
                if must_decide {
                    return Err(MoveViolation::MustDecide);
                }
                let trade = message.trade.as_ref().expect("PROPOSE carries a trade");
                if !trade.is_feasible(&self.holdings) {
                    return Err(MoveViolation::InfeasibleTrade);
                }
            }
            Decision::Accept => match &self.standing_proposal {
                Some(standing) if standing.proposer == player.opponent() => {
                    accepted_trade = Some(standing.clone());
                }
                _ => return Err(MoveViolation::AcceptWithoutProposal),
            },
            Decision::Reject => {}
            Decision::None => {
                if must_decide {
                    return Err(MoveViolation::MustDecide);
                }
            }
        }

        let forwarded_text = protocol::filter_for_opponent(&message, &self.policy);
        if message.decision == Decision::Propose {
            self.standing_proposal = message.trade.clone();
        }
        if let Some(trade) = accepted_trade {
            // The standing proposal stays feasible: holdings only change
            // here, and acceptance ends the game.
            self.holdings = trade
                .apply(&self.holdings)
                .map_err(|_| MoveViolation::InfeasibleTrade)?;
            self.status = GameStatus::Accepted;
        }
        self.transcript.push(TranscriptEntry {
            player,
            raw_text: raw.to_string(),
            message,
            forwarded_text,
            retries,
            warnings: parsed.warnings,
        });
        self.status = self.check_end();
        Ok(())
    }

    /// Replays a stored message (used by record verification and
    /// counterfactual edits); the same validation as a live move.
    pub fn force_move(&mut self, message: &StructuredMessage) -> Result<(), MoveViolation> {
        if self.status != GameStatus::Ongoing {
            return Err(MoveViolation::AfterGameEnd);
        }
        let raw = protocol::render_message(message);
        self.try_commit(self.current_player(), &raw, 0)
    }

    /// Runs one turn of the current agent, including the invalid-move
    /// retry policy. Exhausted retries forfeit the game in the opponent's
    /// favor; only backend failures surface as errors.
    pub fn step(&mut self, agent: &mut dyn Agent) -> Result<(), EngineError> {
        if self.status != GameStatus::Ongoing {
            return Err(EngineError::GameOver);
        }
        let player = self.current_player();
        let mut notice: Option<String> = None;
        for attempt in 0..MOVE_ATTEMPTS {
            let mut view = self.conversation_view(player);
            if let Some(text) = &notice {
                if let Some(last) = view.last_mut() {
                    last.content.push_str(text);
                }
            }
            let raw = agent
                .next_message(&view)
                .map_err(|source| EngineError::AgentBackend { player, source })?;
            match self.try_commit(player, &raw, attempt) {
                Ok(()) => return Ok(()),
                Err(violation) => {
                    notice = Some(format!(
                        "\n\nYour previous reply was not a legal move: {violation}.\n\
                         The reply was:\n---\n{raw}\n---\n\
                         Send a corrected message following the tag format."
                    ));
                }
            }
        }
        self.status = GameStatus::Forfeit { by: player };
        Ok(())
    }

    /// Classifies the finished game.
    pub fn outcome(&self) -> Result<Outcome, EngineError> {
        Ok(Outcome::compute(
            self.config.kind,
            &self.config.endowments,
            self.holdings.clone(),
            &self.config.valuations,
            self.status,
        )?)
    }
}

/// Runs a whole game with pre-built agents.
pub fn run_with_agents(
    config: &ScenarioConfig,
    seed: u64,
    red: &mut dyn Agent,
    blue: &mut dyn Agent,
) -> Result<GameState, EngineError> {
    let mut state = GameState::new(config.clone(), seed);
    while state.status == GameStatus::Ongoing {
        match state.current_player() {
            PlayerId::Red => state.step(red)?,
            PlayerId::Blue => state.step(blue)?,
        }
    }
    Ok(state)
}

/// Builds both agents from their specs, plays the game, and wraps the
/// result in a persistable record. Identical (config, seed, scripted
/// agents) inputs produce identical records.
pub fn run(
    config: &ScenarioConfig,
    specs: &PerPlayer<AgentSpec>,
    seed: u64,
) -> Result<GameRecord, EngineError> {
    let mut config = config.clone();
    // Behaviors declared on the agent apply to whichever seat it plays,
    // unless the scenario pins one explicitly.
    if config.behaviors.red.is_none() {
        config.behaviors.red = specs.red.behavior;
    }
    if config.behaviors.blue.is_none() {
        config.behaviors.blue = specs.blue.behavior;
    }
    let mut red = agents::instantiate(&specs.red, PlayerId::Red, &config).map_err(|source| {
        EngineError::AgentBackend {
            player: PlayerId::Red,
            source,
        }
    })?;
    let mut blue = agents::instantiate(&specs.blue, PlayerId::Blue, &config).map_err(|source| {
        EngineError::AgentBackend {
            player: PlayerId::Blue,
            source,
        }
    })?;
    let mut state = GameState::new(config, seed);
    if !(specs.red.is_scripted() && specs.blue.is_scripted()) {
        state.started_at = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
    }
    while state.status == GameStatus::Ongoing {
        match state.current_player() {
            PlayerId::Red => state.step(red.as_mut())?,
            PlayerId::Blue => state.step(blue.as_mut())?,
        }
    }
    let outcome = state.outcome()?;
    Ok(GameRecord::from_game(state, outcome, specs.clone()))
}

/// Replays stored transcript entries through the exact live validation
/// path, cross-checking stored messages and forwarded texts.
pub fn replay(
    config: &ScenarioConfig,
    seed: u64,
    entries: &[TranscriptEntry],
) -> Result<GameState, ReplayError> {
    let mut state = GameState::new(config.clone(), seed);
    for (index, entry) in entries.iter().enumerate() {
        if state.status != GameStatus::Ongoing {
            return Err(ReplayError::new(index, "message after a terminal state"));
        }
        let expected_player = state.current_player();
        if entry.player != expected_player {
            return Err(ReplayError::new(
                index,
                format!("expected {expected_player} to move"),
            ));
        }
        let retries = entry.retries;
        state
            .try_commit(entry.player, &entry.raw_text, retries)
            .map_err(|v| ReplayError::new(index, format!("illegal move: {v}")))?;
        let committed = state.transcript.last().expect("just committed");
        if committed.message != entry.message {
            return Err(ReplayError::new(index, "stored parse differs from replay"));
        }
        if committed.forwarded_text != entry.forwarded_text {
            return Err(ReplayError::new(
                index,
                "stored forwarded text differs from the visibility filter output",
            ));
        }
    }
    Ok(state)
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("transcript entry {index}: {reason}")]
pub struct ReplayError {
    pub index: usize,
    pub reason: String,
}

impl ReplayError {
    fn new(index: usize, reason: impl Into<String>) -> Self {
        ReplayError {
            index,
            reason: reason.into(),
        }
    }
}
