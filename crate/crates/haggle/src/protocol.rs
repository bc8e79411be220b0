//! The tagged message grammar agents speak.
//!
//! One agent turn is a block of text carrying XML-like tags, one per
//! message field:
//!
//! ```text
//! <player-name> RED </player-name>
//! <turn> 2/8 </turn>
//! <my-resources> Dollars: 100 </my-resources>
//! <my-goal> Negotiate a split of the Dollars. </my-goal>
//! <reason> Open high, concede slowly. </reason>
//! <message> I propose I keep 60. </message>
//! <trade> Player RED Gives Dollars: 40 | Player BLUE Gives nothing </trade>
//! <answer> NONE </answer>
//! ```
//!
//! Tag matching is case-insensitive, whitespace inside tags is
//! insignificant, the first occurrence of a duplicated tag wins (with a
//! warning), and text outside tags is ignored. Trades follow the clause
//! grammar
//!
//! ```text
//! "Player" name "Gives" item_list "|" "Player" name "Gives" item_list
//! item_list := "nothing" | item ("," item)*
//! item      := resource_name ":" integer
//! ```
//!
//! with non-negative integer quantities only. The same grammar text is
//! embedded in system prompts so models are instructed in exactly the
//! syntax this parser accepts.
//!
//! The grammar is an exchangeable surface: an alternative structured
//! language only needs its own [`parse_message`] / [`render_message`] /
//! [`filter_for_opponent`] over the same [`StructuredMessage`] type (and
//! prompt instructions to match); the engine and persistence layers never
//! look at raw text beyond these three functions.

use crate::player::PlayerId;
use crate::resources::ResourceBundle;
use crate::trade::Trade;
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;
use thiserror::Error;

/// Tag names, in canonical rendering order.
pub const TAG_PLAYER_NAME: &str = "player-name";
pub const TAG_TURN: &str = "turn";
pub const TAG_RESOURCES: &str = "my-resources";
pub const TAG_GOAL: &str = "my-goal";
pub const TAG_REASON: &str = "reason";
pub const TAG_MESSAGE: &str = "message";
pub const TAG_TRADE: &str = "trade";
pub const TAG_ANSWER: &str = "answer";

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ProtocolError {
    /// The name or turn tag is absent or unreadable.
    #[error("missing required tag <{tag}>: {reason}")]
    MissingRequiredTag { tag: &'static str, reason: String },
    /// The trade clause grammar was violated.
    #[error("malformed trade: {0}")]
    MalformedTrade(String),
    /// A resource name outside the game vocabulary.
    #[error("unknown resource {name:?}")]
    UnknownResource { name: String },
    /// Quantities must be non-negative integers.
    #[error("non-integer quantity {text:?} for resource {resource:?}")]
    NonIntegerQuantity { resource: String, text: String },
    /// A message may accept the standing proposal or propose a new trade,
    /// never both.
    #[error("conflicting decision: message both accepts and proposes a trade")]
    ConflictingDecision,
}

/// What a message does to the negotiation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Decision {
    Propose,
    Accept,
    Reject,
    None,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            Decision::Propose => "PROPOSE",
            Decision::Accept => "ACCEPT",
            Decision::Reject => "REJECT",
            Decision::None => "NONE",
        };
        f.write_str(text)
    }
}

/// The agent's own turn counter as stated in its message: "my `current`-th
/// message out of `max`".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnEcho {
    pub current: u32,
    pub max: u32,
}

/// One parsed agent turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuredMessage {
    pub player_name: PlayerId,
    pub turn_echo: TurnEcho,
    pub resources_echo: Option<ResourceBundle>,
    pub goal_echo: Option<String>,
    /// Private chain of thought; never forwarded under the default policy.
    pub reasoning: Option<String>,
    /// Free text shown to the opponent.
    pub public_text: Option<String>,
    pub trade: Option<Trade>,
    pub decision: Decision,
}

impl StructuredMessage {
    /// A minimal valid message: name and turn only, no decision.
    pub fn bare(player: PlayerId, current: u32, max: u32) -> Self {
        StructuredMessage {
            player_name: player,
            turn_echo: TurnEcho { current, max },
            resources_echo: None,
            goal_echo: None,
            reasoning: None,
            public_text: None,
            trade: None,
            decision: Decision::None,
        }
    }

    /// Checks the structural invariants canonical messages satisfy; parsing
    /// never produces a violation and rendering a valid message round-trips.
    ///
    /// Free-text fields must be trim-stable and must not embed a closing
    /// tag delimiter (`</`), which would truncate them on re-parse.
    pub fn validate(&self) -> Result<(), String> {
        if self.turn_echo.current < 1 {
            return Err("turn counter starts at 1".into());
        }
        if self.turn_echo.current > self.turn_echo.max {
            return Err("turn counter exceeds the stated maximum".into());
        }
        match (&self.trade, self.decision) {
            (Some(_), Decision::Propose)
            | (None, Decision::Accept | Decision::Reject | Decision::None) => {}
            (Some(_), _) => return Err("a trade implies decision PROPOSE".into()),
            (None, Decision::Propose) => return Err("PROPOSE requires a trade".into()),
        }
        if let Some(trade) = &self.trade {
            if trade.proposer != self.player_name {
                return Err("trade proposer must be the message author".into());
            }
        }
        for (name, text) in [
            ("goal", &self.goal_echo),
            ("reasoning", &self.reasoning),
            ("public text", &self.public_text),
        ] {
            if let Some(text) = text {
                if text.trim() != text {
                    return Err(format!("{name} has leading or trailing whitespace"));
                }
                if text.contains("</") {
                    return Err(format!("{name} embeds a closing tag delimiter"));
                }
            }
        }
        Ok(())
    }
}

/// Message fields, for visibility policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    PlayerName,
    TurnEcho,
    ResourcesEcho,
    GoalEcho,
    Reasoning,
    PublicText,
    Trade,
    Decision,
}

impl Field {
    pub const ALL: [Field; 8] = [
        Field::PlayerName,
        Field::TurnEcho,
        Field::ResourcesEcho,
        Field::GoalEcho,
        Field::Reasoning,
        Field::PublicText,
        Field::Trade,
        Field::Decision,
    ];
}

/// Which fields of a message the opponent gets to see. Immutable for the
/// duration of one game.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisibilityPolicy {
    visible: BTreeSet<Field>,
}

impl VisibilityPolicy {
    /// The standard policy: identity, turn counter, public text, trade and
    /// decision are forwarded; reasoning, the resource echo and the goal
    /// echo stay private.
    pub fn standard() -> Self {
        VisibilityPolicy {
            visible: [
                Field::PlayerName,
                Field::TurnEcho,
                Field::PublicText,
                Field::Trade,
                Field::Decision,
            ]
            .into_iter()
            .collect(),
        }
    }

    /// Everything visible; filtering becomes the identity.
    pub fn all_fields() -> Self {
        VisibilityPolicy {
            visible: Field::ALL.into_iter().collect(),
        }
    }

    pub fn from_fields(fields: impl IntoIterator<Item = Field>) -> Self {
        VisibilityPolicy {
            visible: fields.into_iter().collect(),
        }
    }

    pub fn is_visible(&self, field: Field) -> bool {
        self.visible.contains(&field)
    }
}

impl Default for VisibilityPolicy {
    fn default() -> Self {
        VisibilityPolicy::standard()
    }
}

/// External names the two seats play under; trade clauses and name tags
/// written with these aliases resolve to RED/BLUE. The canonical names are
/// always accepted as well.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerNames {
    pub red: String,
    pub blue: String,
}

impl Default for PlayerNames {
    fn default() -> Self {
        PlayerNames {
            red: "RED".into(),
            blue: "BLUE".into(),
        }
    }
}

impl PlayerNames {
    fn resolve(&self, raw: &str) -> Option<PlayerId> {
        let name = raw.trim();
        if name.eq_ignore_ascii_case(&self.red) || name.eq_ignore_ascii_case("RED") {
            Some(PlayerId::Red)
        } else if name.eq_ignore_ascii_case(&self.blue) || name.eq_ignore_ascii_case("BLUE") {
            Some(PlayerId::Blue)
        } else {
            None
        }
    }
}

/// A successfully parsed message plus any recoverable oddities found on the
/// way (duplicated tags, unknown answer bodies, a rejected-and-countered
/// decision).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedMessage {
    pub message: StructuredMessage,
    pub warnings: Vec<String>,
}

struct TagPatterns {
    by_tag: Vec<(&'static str, Regex)>,
}

fn patterns() -> &'static TagPatterns {
    static PATTERNS: OnceLock<TagPatterns> = OnceLock::new();
    PATTERNS.get_or_init(|| {
        let tags = [
            TAG_PLAYER_NAME,
            TAG_TURN,
            TAG_RESOURCES,
            TAG_GOAL,
            TAG_REASON,
            TAG_MESSAGE,
            TAG_TRADE,
            TAG_ANSWER,
        ];
        TagPatterns {
            by_tag: tags
                .iter()
                .map(|tag| {
                    let pattern = format!(r"(?is)<\s*{tag}\s*>(.*?)<\s*/\s*{tag}\s*>");
                    (*tag, Regex::new(&pattern).expect("static tag pattern"))
                })
                .collect(),
        }
    })
}

/// First occurrence of `tag` in `raw`, trimmed; duplicates add a warning.
fn extract_tag(raw: &str, tag: &'static str, warnings: &mut Vec<String>) -> Option<String> {
    let regex = patterns()
        .by_tag
        .iter()
        .find(|(name, _)| *name == tag)
        .map(|(_, re)| re)
        .expect("known tag");
    let mut bodies = regex.captures_iter(raw);
    let first = bodies.next()?.get(1).map(|m| m.as_str().trim().to_string());
    if bodies.next().is_some() {
        warnings.push(format!("duplicated <{tag}> tag; first occurrence wins"));
    }
    first
}

fn canonical_resource(vocab: &BTreeSet<String>, raw: &str) -> Option<String> {
    vocab.iter().find(|v| v.eq_ignore_ascii_case(raw)).cloned()
}

/// Parses a quantity token: non-negative integers only.
fn parse_quantity(resource: &str, raw: &str) -> Result<u64, ProtocolError> {
    let text = raw.trim();
    if !text.is_empty() && text.bytes().all(|b| b.is_ascii_digit()) {
        return text
            .parse::<u64>()
            .map_err(|_| ProtocolError::NonIntegerQuantity {
                resource: resource.to_string(),
                text: format!("{text} (out of range)"),
            });
    }
    // Numeric but not a non-negative integer (decimals, negatives).
    if text.parse::<f64>().is_ok() {
        return Err(ProtocolError::NonIntegerQuantity {
            resource: resource.to_string(),
            text: text.to_string(),
        });
    }
    Err(ProtocolError::MalformedTrade(format!(
        "unreadable quantity {text:?} for resource {resource:?}"
    )))
}

/// Parses an item list: `nothing` or `name: qty, name: qty, ...`.
fn parse_item_list(body: &str, vocab: &BTreeSet<String>) -> Result<ResourceBundle, ProtocolError> {
    let body = body.trim();
    let mut bundle = ResourceBundle::new();
    if body.is_empty() || body.eq_ignore_ascii_case("nothing") {
        return Ok(bundle);
    }
    for item in body.split(',') {
        let mut halves = item.splitn(2, ':');
        let name_part = halves.next().unwrap_or_default().trim();
        let qty_part = halves.next().ok_or_else(|| {
            ProtocolError::MalformedTrade(format!("item {item:?} is not `resource: integer`"))
        })?;
        if name_part.is_empty() {
            return Err(ProtocolError::MalformedTrade(format!(
                "item {item:?} has no resource name"
            )));
        }
        let canonical =
            canonical_resource(vocab, name_part).ok_or_else(|| ProtocolError::UnknownResource {
                name: name_part.to_string(),
            })?;
        let qty = parse_quantity(&canonical, qty_part)?;
        bundle.add(&canonical, qty);
    }
    Ok(bundle)
}

/// Parses the two-clause trade body.
fn parse_trade_body(
    body: &str,
    vocab: &BTreeSet<String>,
    names: &PlayerNames,
    proposer: PlayerId,
) -> Result<Trade, ProtocolError> {
    let clauses: Vec<&str> = body.split('|').collect();
    if clauses.len() != 2 {
        return Err(ProtocolError::MalformedTrade(format!(
            "expected two `Player ... Gives ...` clauses separated by `|`, found {}",
            clauses.len()
        )));
    }
    static CLAUSE: OnceLock<Regex> = OnceLock::new();
    let clause_re = CLAUSE.get_or_init(|| {
        Regex::new(r"(?is)^\s*player\s+(.+?)\s+gives\s+(.*)$").expect("static clause pattern")
    });

    let mut sides: [Option<ResourceBundle>; 2] = [None, None];
    for clause in clauses {
        let caps = clause_re.captures(clause).ok_or_else(|| {
            ProtocolError::MalformedTrade(format!(
                "clause {:?} is not `Player <name> Gives <items>`",
                clause.trim()
            ))
        })?;
        let who = names.resolve(&caps[1]).ok_or_else(|| {
            ProtocolError::MalformedTrade(format!("unknown player name {:?}", &caps[1]))
        })?;
        let bundle = parse_item_list(&caps[2], vocab)?;
        let slot = match who {
            PlayerId::Red => &mut sides[0],
            PlayerId::Blue => &mut sides[1],
        };
        if slot.is_some() {
            return Err(ProtocolError::MalformedTrade(
                "both clauses name the same player".into(),
            ));
        }
        *slot = Some(bundle);
    }
    let [from_red, from_blue] = sides;
    Ok(Trade::new(
        from_red.expect("both sides present"),
        from_blue.expect("both sides present"),
        proposer,
    ))
}

/// Parses one raw agent turn into a [`StructuredMessage`].
///
/// Every recognized tag is extracted; text outside tags is ignored. The
/// result is total: any input yields either a message or exactly one
/// classified [`ProtocolError`].
pub fn parse_message(
    raw: &str,
    vocab: &BTreeSet<String>,
    names: &PlayerNames,
) -> Result<ParsedMessage, ProtocolError> {
    let mut warnings = Vec::new();

    let name_body = extract_tag(raw, TAG_PLAYER_NAME, &mut warnings).ok_or_else(|| {
        ProtocolError::MissingRequiredTag {
            tag: TAG_PLAYER_NAME,
            reason: "absent".into(),
        }
    })?;
    let player_name =
        names
            .resolve(&name_body)
            .ok_or_else(|| ProtocolError::MissingRequiredTag {
                tag: TAG_PLAYER_NAME,
                reason: format!("unrecognized player {name_body:?}"),
            })?;

    let turn_body = extract_tag(raw, TAG_TURN, &mut warnings).ok_or_else(|| {
        ProtocolError::MissingRequiredTag {
            tag: TAG_TURN,
            reason: "absent".into(),
        }
    })?;
    let turn_echo = parse_turn(&turn_body).map_err(|reason| ProtocolError::MissingRequiredTag {
        tag: TAG_TURN,
        reason,
    })?;

    let resources_echo = match extract_tag(raw, TAG_RESOURCES, &mut warnings) {
        Some(body) => Some(parse_item_list(&body, vocab)?),
        None => None,
    };
    let goal_echo = extract_tag(raw, TAG_GOAL, &mut warnings);
    let reasoning = extract_tag(raw, TAG_REASON, &mut warnings);
    let public_text = extract_tag(raw, TAG_MESSAGE, &mut warnings);

    let trade = match extract_tag(raw, TAG_TRADE, &mut warnings) {
        Some(body) => Some(parse_trade_body(&body, vocab, names, player_name)?),
        None => None,
    };

    let answer = match extract_tag(raw, TAG_ANSWER, &mut warnings) {
        Some(body) => {
            let token = body.trim().to_ascii_uppercase();
            match token.as_str() {
                "ACCEPT" => Some(Decision::Accept),
                "REJECT" => Some(Decision::Reject),
                "NONE" | "" => Some(Decision::None),
                other => {
                    warnings.push(format!("unrecognized answer {other:?}; treated as NONE"));
                    Some(Decision::None)
                }
            }
        }
        None => None,
    };

    let decision = match (&trade, answer) {
        (Some(_), Some(Decision::Accept)) => return Err(ProtocolError::ConflictingDecision),
        (Some(_), Some(Decision::Reject)) => {
            warnings.push("REJECT answer alongside a counter-proposal; the proposal wins".into());
            Decision::Propose
        }
        (Some(_), _) => Decision::Propose,
        (None, Some(d)) => d,
        (None, None) => Decision::None,
    };

    Ok(ParsedMessage {
        message: StructuredMessage {
            player_name,
            turn_echo,
            resources_echo,
            goal_echo,
            reasoning,
            public_text,
            trade,
            decision,
        },
        warnings,
    })
}

fn parse_turn(body: &str) -> Result<TurnEcho, String> {
    let mut halves = body.splitn(2, '/');
    let current = halves.next().unwrap_or_default().trim();
    let max = halves
        .next()
        .ok_or_else(|| format!("turn {body:?} is not `current/max`"))?
        .trim();
    let current: u32 = current
        .parse()
        .map_err(|_| format!("unreadable turn counter {current:?}"))?;
    let max: u32 = max
        .parse()
        .map_err(|_| format!("unreadable turn maximum {max:?}"))?;
    if current < 1 || current > max {
        return Err(format!("turn {current}/{max} out of range"));
    }
    Ok(TurnEcho { current, max })
}

fn render_fields(msg: &StructuredMessage, visible: impl Fn(Field) -> bool) -> String {
    let mut out = String::new();
    let mut tag = |name: &str, body: &str| {
        out.push_str(&format!("<{name}> {body} </{name}>\n"));
    };
    if visible(Field::PlayerName) {
        tag(TAG_PLAYER_NAME, msg.player_name.name());
    }
    if visible(Field::TurnEcho) {
        tag(
            TAG_TURN,
            &format!("{}/{}", msg.turn_echo.current, msg.turn_echo.max),
        );
    }
    if visible(Field::ResourcesEcho) {
        if let Some(bundle) = &msg.resources_echo {
            tag(TAG_RESOURCES, &bundle.to_string());
        }
    }
    if visible(Field::GoalEcho) {
        if let Some(goal) = &msg.goal_echo {
            tag(TAG_GOAL, goal);
        }
    }
    if visible(Field::Reasoning) {
        if let Some(reason) = &msg.reasoning {
            tag(TAG_REASON, reason);
        }
    }
    if visible(Field::PublicText) {
        if let Some(text) = &msg.public_text {
            tag(TAG_MESSAGE, text);
        }
    }
    if visible(Field::Trade) {
        if let Some(trade) = &msg.trade {
            tag(TAG_TRADE, &trade.to_string());
        }
    }
    if visible(Field::Decision) {
        match msg.decision {
            Decision::Accept => tag(TAG_ANSWER, "ACCEPT"),
            Decision::Reject => tag(TAG_ANSWER, "REJECT"),
            // PROPOSE is carried by the trade tag; no answer tag is emitted.
            Decision::Propose | Decision::None => {}
        }
    }
    out
}

/// Canonical tagged text for a valid message; `parse_message` inverts it.
pub fn render_message(msg: &StructuredMessage) -> String {
    render_fields(msg, |_| true)
}

/// Renders only the fields the policy allows; what the opponent receives.
pub fn filter_for_opponent(msg: &StructuredMessage, policy: &VisibilityPolicy) -> String {
    render_fields(msg, |field| policy.is_visible(field))
}
