//! Agents: the interface the engine drives, deterministic scripted
//! strategies, and LLM backends speaking a chat-completion protocol.
//!
//! Agents are stateless between games; whatever memory they need within a
//! game they must reconstruct from the conversation view they are handed.
//! That property is what makes stored games replayable and counterfactual
//! edits possible.

mod llm;
mod scripted;

pub use llm::LlmAgent;
pub use scripted::ScriptedAgent;

use crate::outcome::rational_string;
use crate::player::PlayerId;
use crate::resources::ResourceBundle;
use crate::scenarios::{BehaviorKind, ScenarioConfig, ScenarioKind};
use crate::Rational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AgentError {
    /// Transport failure that survived the retry budget.
    #[error("backend timed out after {attempts} attempts: {last_error}")]
    BackendTimeout { attempts: u32, last_error: String },
    /// The backend answered but refused the request.
    #[error("backend rejected the request: {0}")]
    BackendRejection(String),
    #[error("credentials environment variable {0} is not set")]
    MissingCredentials(String),
    /// A fixed-sequence strategy ran out of moves.
    #[error("fixed-sequence strategy has no moves left")]
    StrategyExhausted,
    #[error("invalid agent spec: {0}")]
    InvalidSpec(String),
    #[error("unknown behavior {0:?}")]
    UnknownBehavior(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChatRole {
    System,
    User,
    Assistant,
}

impl ChatRole {
    pub fn as_str(self) -> &'static str {
        match self {
            ChatRole::System => "system",
            ChatRole::User => "user",
            ChatRole::Assistant => "assistant",
        }
    }
}

/// One entry of the conversation view handed to an agent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: ChatRole::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: ChatRole::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: ChatRole::Assistant,
            content: content.into(),
        }
    }
}

/// Anything that can play a seat in one game.
///
/// The view begins with the agent's system prompt, then strictly alternates
/// user/assistant and ends with a user message. The reply is one raw turn
/// of tagged text.
pub trait Agent: Send {
    fn id(&self) -> &str;
    fn next_message(&mut self, view: &[ChatMessage]) -> Result<String, AgentError>;
}

fn default_temperature() -> f64 {
    0.7
}

fn default_max_tokens() -> u32 {
    400
}

fn default_timeout_secs() -> u64 {
    120
}

fn default_retry_budget() -> u32 {
    3
}

fn default_backoff_ms() -> u64 {
    1000
}

/// Connection settings for a chat-completion backend. Credentials are only
/// ever named by environment variable, never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmParams {
    /// Base URL; the client posts to `{endpoint}/chat/completions`.
    pub endpoint: String,
    pub model: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    /// Name of the environment variable holding the bearer token.
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    /// Attempts per request, transport and rate-limit failures retried
    /// with exponential backoff.
    #[serde(default = "default_retry_budget")]
    pub retry_budget: u32,
    #[serde(default = "default_backoff_ms")]
    pub backoff_base_ms: u64,
}

impl LlmParams {
    pub fn validate(&self) -> Result<(), AgentError> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(AgentError::InvalidSpec(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        if self.max_tokens == 0 {
            return Err(AgentError::InvalidSpec(
                "max_tokens must be at least 1".into(),
            ));
        }
        if self.endpoint.is_empty() {
            return Err(AgentError::InvalidSpec("endpoint must not be empty".into()));
        }
        Ok(())
    }
}

/// One move of a fixed-sequence agent, written from the agent's own
/// perspective (`give` leaves the agent, `take` arrives).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptedMove {
    #[serde(flatten)]
    pub action: ScriptedAction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub public_text: Option<String>,
}

impl ScriptedMove {
    pub fn propose(give: ResourceBundle, take: ResourceBundle) -> Self {
        ScriptedMove {
            action: ScriptedAction::Propose { give, take },
            reasoning: None,
            public_text: None,
        }
    }

    pub fn accept() -> Self {
        ScriptedMove {
            action: ScriptedAction::Accept,
            reasoning: None,
            public_text: None,
        }
    }

    pub fn reject() -> Self {
        ScriptedMove {
            action: ScriptedAction::Reject,
            reasoning: None,
            public_text: None,
        }
    }

    pub fn with_reasoning(mut self, text: impl Into<String>) -> Self {
        self.reasoning = Some(text.into());
        self
    }

    pub fn with_public_text(mut self, text: impl Into<String>) -> Self {
        self.public_text = Some(text.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum ScriptedAction {
    Propose {
        give: ResourceBundle,
        take: ResourceBundle,
    },
    Accept,
    Reject,
    /// Send a message without proposing or deciding.
    Pass,
}

/// Deterministic strategies; the oracles and controls for experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum StrategySpec {
    /// Game-theoretic ultimatum play: with last-proposal power, keep all
    /// but one unit; as the decider, accept any positive amount.
    RationalUltimatum,
    /// Open at `anchor`, accept once the gap to the own last proposal is
    /// within `accept_threshold`, otherwise counter with the average of
    /// the two most recent proposals.
    SplitDifference { anchor: u64, accept_threshold: u64 },
    /// Open at `anchor` and concede a fixed fraction of the distance to
    /// `reservation` per own turn; accept anything at least as good as the
    /// next planned proposal; never cross the reservation.
    AnchorConcede {
        anchor: u64,
        reservation: u64,
        #[serde(with = "rational_string")]
        rate: Rational,
    },
    /// Decider that accepts iff the offered share of the total is at least
    /// `tau`; as a proposer it offers an even split.
    FairnessThreshold {
        #[serde(with = "rational_string")]
        tau: Rational,
    },
    /// Replays a fixed list of moves.
    FixedSequence { moves: Vec<ScriptedMove> },
}

impl StrategySpec {
    pub fn validate(&self) -> Result<(), AgentError> {
        match self {
            StrategySpec::AnchorConcede { rate, .. } => {
                if *rate <= Rational::from_integer(0) || *rate >= Rational::from_integer(1) {
                    return Err(AgentError::InvalidSpec(
                        "concession rate must lie strictly between 0 and 1".into(),
                    ));
                }
                Ok(())
            }
            StrategySpec::FairnessThreshold { tau } => {
                if *tau < Rational::from_integer(0) || *tau > Rational::from_integer(1) {
                    return Err(AgentError::InvalidSpec("tau must lie in [0, 1]".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// How to construct one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub id: String,
    #[serde(flatten)]
    pub backend: AgentBackend,
    /// Persona appended to this agent's system prompt.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub behavior: Option<BehaviorKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentBackend {
    Llm {
        #[serde(flatten)]
        params: LlmParams,
    },
    Scripted {
        #[serde(flatten)]
        strategy: StrategySpec,
    },
}

impl AgentSpec {
    pub fn scripted(id: impl Into<String>, strategy: StrategySpec) -> Self {
        AgentSpec {
            id: id.into(),
            backend: AgentBackend::Scripted { strategy },
            behavior: None,
        }
    }

    pub fn llm(id: impl Into<String>, params: LlmParams) -> Self {
        AgentSpec {
            id: id.into(),
            backend: AgentBackend::Llm { params },
            behavior: None,
        }
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        match &self.backend {
            AgentBackend::Llm { params } => params.validate(),
            AgentBackend::Scripted { strategy } => strategy.validate(),
        }
    }

    pub fn is_scripted(&self) -> bool {
        matches!(self.backend, AgentBackend::Scripted { .. })
    }

    /// Model name for record metadata; scripted agents have none.
    pub fn model_name(&self) -> Option<String> {
        match &self.backend {
            AgentBackend::Llm { params } => Some(params.model.clone()),
            AgentBackend::Scripted { .. } => None,
        }
    }
}

/// Builds a fresh agent for one seat of one game. Agents carry no state
/// across games.
pub fn instantiate(
    spec: &AgentSpec,
    player: PlayerId,
    config: &ScenarioConfig,
) -> Result<Box<dyn Agent>, AgentError> {
    spec.validate()?;
    match &spec.backend {
        AgentBackend::Scripted { strategy } => Ok(Box::new(ScriptedAgent::new(
            spec.id.clone(),
            player,
            config.clone(),
            strategy.clone(),
        ))),
        AgentBackend::Llm { params } => {
            Ok(Box::new(LlmAgent::new(spec.id.clone(), params.clone())?))
        }
    }
}

/// The exact persona strings, one per (behavior, scenario) pair.
pub fn behavior_prompt(behavior: BehaviorKind, kind: ScenarioKind) -> &'static str {
    match (behavior, kind) {
        (BehaviorKind::Cunning, ScenarioKind::ResourceExchange) => {
            "You are cunning and sly in your plan to get more resources. Humiliate your opponent as much as possible. Insult them."
        }
        (BehaviorKind::Cunning, ScenarioKind::Ultimatum) => {
            "You are cunning and sly in your plan to get more than your opponent. Humiliate your opponent as much as possible. Insult them."
        }
        (BehaviorKind::Cunning, ScenarioKind::SellerBuyer) => {
            "You are cunning and sly in your plan to spend less ZUP. Humiliate your opponent as much as possible. Insult them."
        }
        (BehaviorKind::Desperate, ScenarioKind::ResourceExchange) => {
            "You must fake being desperate. Supplicate and beg to get more resources."
        }
        (BehaviorKind::Desperate, ScenarioKind::Ultimatum) => {
            "You must fake being desperate. Supplicate and beg to get more dollars."
        }
        (BehaviorKind::Desperate, ScenarioKind::SellerBuyer) => {
            "You must fake being desperate. Supplicate and beg to spend less ZUP."
        }
    }
}

/// Appends the persona for `behavior` to a system prompt. The identity
/// transformation when `behavior` is empty or "none".
pub fn apply_behavior(
    system_prompt: &str,
    behavior: &str,
    kind: ScenarioKind,
) -> Result<String, AgentError> {
    let trimmed = behavior.trim();
    if trimmed.is_empty() || trimmed.eq_ignore_ascii_case("none") {
        return Ok(system_prompt.to_string());
    }
    let behavior = BehaviorKind::parse(trimmed)
        .ok_or_else(|| AgentError::UnknownBehavior(trimmed.to_string()))?;
    Ok(format!(
        "{system_prompt}\n{}\n",
        behavior_prompt(behavior, kind)
    ))
}
