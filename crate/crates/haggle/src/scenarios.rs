//! Game configurations and the system prompts derived from them.
//!
//! Three scenario families are built in:
//!
//! | scenario          | player 1        | player 2         | rounds |
//! |-------------------|-----------------|------------------|--------|
//! | resource exchange | 25 X, 5 Y       | 5 X, 25 Y        | 8      |
//! | ultimatum         | 100 Dollars     | nothing          | 8      |
//! | seller / buyer    | 1 X (cost 40)   | 100 ZUP (wtp 60) | 10     |
//!
//! A "round" is one message from each player, so the default turn budget is
//! twice the round count; the classical and three-turn ultimatum variants
//! override the budget outright.

use crate::outcome::{Valuation, ValuationKind};
use crate::player::{PerPlayer, PlayerId};
use crate::protocol;
use crate::resources::ResourceBundle;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("invalid override: {0}")]
    InvalidOverride(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    ResourceExchange,
    Ultimatum,
    SellerBuyer,
}

impl ScenarioKind {
    pub fn parse(text: &str) -> Option<ScenarioKind> {
        match text.to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
            "resource_exchange" | "exchange" | "trading" => Some(ScenarioKind::ResourceExchange),
            "ultimatum" => Some(ScenarioKind::Ultimatum),
            "seller_buyer" | "sell_buy" | "sellerbuyer" => Some(ScenarioKind::SellerBuyer),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::ResourceExchange => "resource_exchange",
            ScenarioKind::Ultimatum => "ultimatum",
            ScenarioKind::SellerBuyer => "seller_buyer",
        }
    }
}

/// Structural variants used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioVariant {
    /// The standard multi-turn rules.
    #[default]
    Standard,
    /// Classical ultimatum: player 1 proposes once, player 2 must accept or
    /// reject. Two messages total.
    UltimatumClassical,
    /// Minimal multi-period ultimatum: propose, counter-propose, then
    /// player 1 must accept or reject. Three messages total.
    UltimatumThreeTurn,
    /// Seller/buyer with the buyer's willingness to pay an order of
    /// magnitude above the seller's cost.
    OvervaluedBuyer,
}

/// Persona strings appended to a player's system prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BehaviorKind {
    Cunning,
    Desperate,
}

impl BehaviorKind {
    pub fn parse(text: &str) -> Option<BehaviorKind> {
        match text.to_ascii_lowercase().as_str() {
            "cunning" => Some(BehaviorKind::Cunning),
            "desperate" => Some(BehaviorKind::Desperate),
            _ => None,
        }
    }
}

/// Everything needed to play one game, independent of the agents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    #[serde(default)]
    pub variant: ScenarioVariant,
    pub endowments: PerPlayer<ResourceBundle>,
    pub goals: PerPlayer<String>,
    /// Private beliefs; seller/buyer games carry exactly one cost of
    /// production (player 1) and one willingness to pay (player 2).
    #[serde(default)]
    pub valuations: Vec<Valuation>,
    /// Rounds of interaction, one message per player per round.
    pub max_rounds: u32,
    /// Denomination scale X applied to currency quantities and valuations.
    #[serde(default = "default_scale")]
    pub scale_factor: u64,
    #[serde(default)]
    pub behaviors: PerPlayer<Option<BehaviorKind>>,
}

fn default_scale() -> u64 {
    1
}

impl ScenarioConfig {
    /// Total number of messages allowed before the game ends in MAX_TURNS.
    pub fn turn_budget(&self) -> u32 {
        match self.variant {
            ScenarioVariant::UltimatumClassical => 2,
            ScenarioVariant::UltimatumThreeTurn => 3,
            _ => 2 * self.max_rounds,
        }
    }

    /// Maximum number of messages `player` may author.
    pub fn own_turn_budget(&self, player: PlayerId) -> u32 {
        let budget = self.turn_budget();
        match player {
            PlayerId::Red => budget.div_ceil(2),
            PlayerId::Blue => budget / 2,
        }
    }

    /// Whether the final message of the game is restricted to ACCEPT or
    /// REJECT (the classical and three-turn ultimatum variants).
    pub fn final_turn_must_decide(&self) -> bool {
        matches!(
            self.variant,
            ScenarioVariant::UltimatumClassical | ScenarioVariant::UltimatumThreeTurn
        )
    }

    /// Resource names legal in this game's trades.
    pub fn vocab(&self) -> BTreeSet<String> {
        let mut names: BTreeSet<String> = BTreeSet::new();
        for bundle in [&self.endowments.red, &self.endowments.blue] {
            names.extend(bundle.names().map(str::to_string));
        }
        names
    }

    /// The currency resource in seller/buyer games: the resource the buyer
    /// is endowed with.
    pub fn currency(&self) -> Option<String> {
        match self.kind {
            ScenarioKind::SellerBuyer => self.endowments.blue.names().next().map(str::to_string),
            _ => None,
        }
    }

    pub fn valuation(&self, kind: ValuationKind) -> Option<u64> {
        self.valuations
            .iter()
            .find(|v| v.kind == kind)
            .map(|v| v.amount)
    }
}

/// Optional deviations from the per-scenario defaults.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioOverrides {
    pub variant: Option<ScenarioVariant>,
    pub endowments: Option<PerPlayer<ResourceBundle>>,
    /// Ultimatum: total money player 1 starts with.
    pub amount: Option<u64>,
    pub max_rounds: Option<u32>,
    /// Denomination scale X; currency endowments and valuations multiply.
    pub scale_factor: Option<u64>,
    /// Seller/buyer: fixed cost of production.
    pub cost: Option<u64>,
    /// Seller/buyer: fixed willingness to pay.
    pub willingness: Option<u64>,
    /// Seller/buyer: draw cost from U{20..40} and willingness from
    /// U{60..80} using the game seed instead of the fixed defaults.
    pub sample_valuations: bool,
    pub behaviors: Option<PerPlayer<Option<BehaviorKind>>>,
}

impl ScenarioOverrides {
    pub fn amount(amount: u64) -> Self {
        ScenarioOverrides {
            amount: Some(amount),
            ..Default::default()
        }
    }

    pub fn variant(variant: ScenarioVariant) -> Self {
        ScenarioOverrides {
            variant: Some(variant),
            ..Default::default()
        }
    }

    pub fn scale(factor: u64) -> Self {
        ScenarioOverrides {
            scale_factor: Some(factor),
            ..Default::default()
        }
    }
}

pub const RESOURCE_EXCHANGE_GOAL: &str = "Maximize the total number of resources you hold.";
pub const ULTIMATUM_GOAL: &str = "Negotiate a split of the Dollars with the other player.";

fn seller_goal(object: &str, cost: u64, currency: &str) -> String {
    format!("Sell resources for {currency}. It costed {object}: {cost} {currency} to produce the resources.")
}

fn buyer_goal(currency: &str, willingness: u64) -> String {
    format!("Buy resources with {currency}. You are willing to pay at most {willingness} {currency} for the resources.")
}

/// Builds a [`ScenarioConfig`] from the per-scenario defaults, the
/// overrides, and (when sampling is requested) the seeded generator.
pub fn build(
    kind: ScenarioKind,
    overrides: &ScenarioOverrides,
    seed: u64,
) -> Result<ScenarioConfig, ScenarioError> {
    let variant = overrides.variant.unwrap_or_default();
    match (kind, variant) {
        (_, ScenarioVariant::Standard) => {}
        (ScenarioKind::Ultimatum, ScenarioVariant::UltimatumClassical)
        | (ScenarioKind::Ultimatum, ScenarioVariant::UltimatumThreeTurn) => {}
        (ScenarioKind::SellerBuyer, ScenarioVariant::OvervaluedBuyer) => {}
        (kind, variant) => {
            return Err(ScenarioError::InvalidOverride(format!(
                "variant {variant:?} does not apply to {kind:?}"
            )))
        }
    }

    let scale = overrides.scale_factor.unwrap_or(1);
    if scale == 0 {
        return Err(ScenarioError::InvalidOverride(
            "scale factor must be positive".into(),
        ));
    }

    let mut config = match kind {
        ScenarioKind::ResourceExchange => ScenarioConfig {
            kind,
            variant,
            endowments: PerPlayer::new(
                ResourceBundle::from_pairs([("X", 25), ("Y", 5)]),
                ResourceBundle::from_pairs([("X", 5), ("Y", 25)]),
            ),
            goals: PerPlayer::new(
                RESOURCE_EXCHANGE_GOAL.to_string(),
                RESOURCE_EXCHANGE_GOAL.to_string(),
            ),
            valuations: Vec::new(),
            max_rounds: 8,
            scale_factor: scale,
            behaviors: PerPlayer::default(),
        },
        ScenarioKind::Ultimatum => {
            let amount = overrides.amount.unwrap_or(100) * scale;
            ScenarioConfig {
                kind,
                variant,
                endowments: PerPlayer::new(
                    ResourceBundle::from_pairs([("Dollars", amount)]),
                    ResourceBundle::new(),
                ),
                goals: PerPlayer::new(ULTIMATUM_GOAL.to_string(), ULTIMATUM_GOAL.to_string()),
                valuations: Vec::new(),
                max_rounds: 8,
                scale_factor: scale,
                behaviors: PerPlayer::default(),
            }
        }
        ScenarioKind::SellerBuyer => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cost = match overrides.cost {
                Some(cost) => cost,
                None if overrides.sample_valuations => rng.gen_range(20..=40),
                None => 40,
            };
            let willingness = if variant == ScenarioVariant::OvervaluedBuyer {
                10 * cost
            } else {
                match overrides.willingness {
                    Some(w) => w,
                    None if overrides.sample_valuations => rng.gen_range(60..=80),
                    None => 60,
                }
            };
            let cost = cost * scale;
            let willingness = willingness * scale;
            ScenarioConfig {
                kind,
                variant,
                endowments: PerPlayer::new(
                    ResourceBundle::from_pairs([("X", 1)]),
                    ResourceBundle::from_pairs([("ZUP", 100 * scale)]),
                ),
                goals: PerPlayer::new(
                    seller_goal("X", cost, "ZUP"),
                    buyer_goal("ZUP", willingness),
                ),
                valuations: vec![
                    Valuation {
                        player: PlayerId::Red,
                        kind: ValuationKind::CostOfProduction,
                        amount: cost,
                    },
                    Valuation {
                        player: PlayerId::Blue,
                        kind: ValuationKind::WillingnessToPay,
                        amount: willingness,
                    },
                ],
                max_rounds: 10,
                scale_factor: scale,
                behaviors: PerPlayer::default(),
            }
        }
    };

    if let Some(endowments) = &overrides.endowments {
        config.endowments = endowments.clone();
        // Ultimatum goals quote no quantities, so endowment overrides need
        // no goal rewrite; seller/buyer goals are valuation-driven.
    }
    if let Some(max_rounds) = overrides.max_rounds {
        if max_rounds == 0 {
            return Err(ScenarioError::InvalidOverride(
                "max_rounds must be positive".into(),
            ));
        }
        config.max_rounds = max_rounds;
    }
    if let Some(behaviors) = &overrides.behaviors {
        config.behaviors = behaviors.clone();
    }
    if overrides.amount.is_some() && kind != ScenarioKind::Ultimatum {
        return Err(ScenarioError::InvalidOverride(
            "amount only applies to ultimatum games".into(),
        ));
    }
    if (overrides.cost.is_some() || overrides.willingness.is_some() || overrides.sample_valuations)
        && kind != ScenarioKind::SellerBuyer
    {
        return Err(ScenarioError::InvalidOverride(
            "valuations only apply to seller/buyer games".into(),
        ));
    }
    if kind == ScenarioKind::ResourceExchange && scale != 1 {
        return Err(ScenarioError::InvalidOverride(
            "resource exchange has no currency to scale".into(),
        ));
    }
    Ok(config)
}

/// The turn-order descriptor for ultimatum experiments.
pub fn ultimatum_variant(turns: &str) -> Option<ScenarioVariant> {
    match turns {
        "classical_2turn" | "classical" => Some(ScenarioVariant::UltimatumClassical),
        "three_turn" => Some(ScenarioVariant::UltimatumThreeTurn),
        "multi_turn" => Some(ScenarioVariant::Standard),
        _ => None,
    }
}

fn scenario_rules(config: &ScenarioConfig, player: PlayerId) -> String {
    let budget = config.own_turn_budget(player);
    let mut rules = String::new();
    rules.push_str(match config.kind {
        ScenarioKind::ResourceExchange => {
            "You are playing a resource exchange game. You and the other player each hold \
             resources and may propose trades to each other.\n"
        }
        ScenarioKind::Ultimatum => {
            "You are playing a negotiation game about splitting an amount of Dollars. \
             Player RED starts with all the Dollars; a proposal transfers some of them.\n"
        }
        ScenarioKind::SellerBuyer => {
            "You are playing a sale negotiation. Player RED owns an object X and wants to \
             sell it; Player BLUE holds ZUP and may buy it. A proposal names the price in ZUP.\n"
        }
    });
    rules.push_str(
        "The game ends as soon as either player accepts the other player's latest proposal, \
         or when the turns run out (then nobody trades anything",
    );
    if config.kind == ScenarioKind::Ultimatum {
        rules.push_str(" and both players receive 0");
    }
    rules.push_str(
        ").\nYou can only accept the other player's most recent proposal, never your own. \
         You can only trade whole, non-negative integer amounts.\n",
    );
    rules.push_str(&format!("You have {budget} messages in total.\n"));
    if config.final_turn_must_decide() {
        let decider = if config.turn_budget() % 2 == 1 {
            PlayerId::Red
        } else {
            PlayerId::Blue
        };
        if decider == player {
            rules.push_str(
                "On your final message you must answer ACCEPT or REJECT; you cannot counter.\n",
            );
        }
    }
    rules
}

/// The tag cheat-sheet embedded in every system prompt; this is exactly the
/// grammar [`protocol::parse_message`] accepts.
fn protocol_instructions(config: &ScenarioConfig, player: PlayerId) -> String {
    let vocab: Vec<String> = config.vocab().into_iter().collect();
    let own_budget = config.own_turn_budget(player);
    format!(
        "Every message you send must use these tags, one per line, and nothing else matters:\n\
         <{name}> {who} </{name}>  -- your player name\n\
         <{turn}> current/{budget} </{turn}>  -- which of your {budget} messages this is\n\
         <{res}> resource: amount, ... </{res}>  -- the resources you currently hold\n\
         <{goal}> your goal </{goal}>  -- restate your goal\n\
         <{reason}> private reasoning </{reason}>  -- hidden from the other player\n\
         <{msg}> text for the other player </{msg}>\n\
         <{trade}> Player RED Gives resource: amount, ... | Player BLUE Gives resource: amount, ... </{trade}>\n\
         <{answer}> ACCEPT or REJECT or NONE </{answer}>\n\
         Use `nothing` for an empty side of a trade, for example `Player BLUE Gives nothing`.\n\
         Amounts must be whole non-negative integers. The resources in this game are: {vocab}.\n\
         To make a proposal, include a <{trade}> tag. To accept the other player's latest \
         proposal, answer ACCEPT and include no trade tag.\n",
        name = protocol::TAG_PLAYER_NAME,
        turn = protocol::TAG_TURN,
        res = protocol::TAG_RESOURCES,
        goal = protocol::TAG_GOAL,
        reason = protocol::TAG_REASON,
        msg = protocol::TAG_MESSAGE,
        trade = protocol::TAG_TRADE,
        answer = protocol::TAG_ANSWER,
        who = player.name(),
        budget = own_budget,
        vocab = vocab.join(", "),
    )
}

/// Renders the full instruction text for one player: rules, the tag
/// grammar, the player's endowment and goal, and the behavior persona when
/// configured. The opponent's private valuation never appears.
pub fn render_system_prompt(config: &ScenarioConfig, player: PlayerId) -> String {
    let mut prompt = String::new();
    prompt.push_str(&scenario_rules(config, player));
    prompt.push('\n');
    prompt.push_str(&protocol_instructions(config, player));
    prompt.push('\n');
    let endowment = config.endowments.get(player);
    prompt.push_str(&format!("You start with these resources: {endowment}.\n"));
    prompt.push_str(&format!("Your goal: {}\n", config.goals.get(player)));
    if player == PlayerId::Blue {
        prompt.push_str("You are Player BLUE. The other player is Player RED and moves first; respond to them.\n");
    }
    if let Some(behavior) = config.behaviors.get(player) {
        prompt.push('\n');
        prompt.push_str(crate::agents::behavior_prompt(*behavior, config.kind));
        prompt.push('\n');
    }
    prompt
}

/// The user message that opens player 1's conversation and assigns its
/// role; player 2's role lives in its system prompt instead.
pub fn initial_user_message(config: &ScenarioConfig) -> String {
    let _ = config;
    "You are Player RED. The game starts now and you make the first move. \
     Send your first message."
        .to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seller_buyer_defaults_match_the_structure_table() {
        let config = build(ScenarioKind::SellerBuyer, &Default::default(), 0).unwrap();
        assert_eq!(config.valuation(ValuationKind::CostOfProduction), Some(40));
        assert_eq!(config.valuation(ValuationKind::WillingnessToPay), Some(60));
        assert_eq!(
            config.endowments.red,
            ResourceBundle::from_pairs([("X", 1)])
        );
        assert_eq!(
            config.endowments.blue,
            ResourceBundle::from_pairs([("ZUP", 100)])
        );
        assert_eq!(config.max_rounds, 10);
        assert_eq!(config.turn_budget(), 20);
        assert_eq!(config.currency().as_deref(), Some("ZUP"));
    }

    #[test]
    fn resource_exchange_defaults_match_the_structure_table() {
        let config = build(ScenarioKind::ResourceExchange, &Default::default(), 0).unwrap();
        assert_eq!(
            config.endowments.red,
            ResourceBundle::from_pairs([("X", 25), ("Y", 5)])
        );
        assert_eq!(
            config.endowments.blue,
            ResourceBundle::from_pairs([("X", 5), ("Y", 25)])
        );
        assert_eq!(config.max_rounds, 8);
    }

    #[test]
    fn ultimatum_defaults_and_amount_override() {
        let config = build(ScenarioKind::Ultimatum, &Default::default(), 0).unwrap();
        assert_eq!(
            config.endowments.red,
            ResourceBundle::from_pairs([("Dollars", 100)])
        );
        assert!(config.endowments.blue.is_empty());

        let big = build(
            ScenarioKind::Ultimatum,
            &ScenarioOverrides::amount(10_000_000_000),
            0,
        )
        .unwrap();
        assert_eq!(big.endowments.red.get("Dollars"), 10_000_000_000);
    }

    #[test]
    fn denomination_scaling_multiplies_currency_and_valuations() {
        let base = build(ScenarioKind::SellerBuyer, &Default::default(), 0).unwrap();
        let scaled = build(ScenarioKind::SellerBuyer, &ScenarioOverrides::scale(10), 0).unwrap();
        assert_eq!(scaled.valuation(ValuationKind::CostOfProduction), Some(400));
        assert_eq!(scaled.valuation(ValuationKind::WillingnessToPay), Some(600));
        assert_eq!(scaled.endowments.blue.get("ZUP"), 1000);
        // Structure is the base structure with every currency quantity
        // multiplied by the factor.
        assert_eq!(scaled.endowments.blue, base.endowments.blue.scaled(10));
        assert_eq!(scaled.endowments.red, base.endowments.red);
    }

    #[test]
    fn sampled_valuations_stay_in_their_ranges() {
        let overrides = ScenarioOverrides {
            sample_valuations: true,
            ..Default::default()
        };
        for seed in 0..200 {
            let config = build(ScenarioKind::SellerBuyer, &overrides, seed).unwrap();
            let cost = config.valuation(ValuationKind::CostOfProduction).unwrap();
            let willingness = config.valuation(ValuationKind::WillingnessToPay).unwrap();
            assert!((20..=40).contains(&cost), "cost {cost} out of range");
            assert!(
                (60..=80).contains(&willingness),
                "willingness {willingness} out of range"
            );
        }
        // Same seed, same draw.
        let a = build(ScenarioKind::SellerBuyer, &overrides, 7).unwrap();
        let b = build(ScenarioKind::SellerBuyer, &overrides, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn overvalued_buyer_pays_ten_times_the_cost() {
        let overrides = ScenarioOverrides {
            variant: Some(ScenarioVariant::OvervaluedBuyer),
            sample_valuations: true,
            ..Default::default()
        };
        for seed in 0..50 {
            let config = build(ScenarioKind::SellerBuyer, &overrides, seed).unwrap();
            let cost = config.valuation(ValuationKind::CostOfProduction).unwrap();
            let willingness = config.valuation(ValuationKind::WillingnessToPay).unwrap();
            assert_eq!(willingness, 10 * cost);
        }
    }

    #[test]
    fn invalid_overrides_are_rejected() {
        assert!(build(
            ScenarioKind::ResourceExchange,
            &ScenarioOverrides::scale(10),
            0
        )
        .is_err());
        assert!(build(
            ScenarioKind::ResourceExchange,
            &ScenarioOverrides::amount(5),
            0
        )
        .is_err());
        assert!(build(
            ScenarioKind::ResourceExchange,
            &ScenarioOverrides::variant(ScenarioVariant::UltimatumClassical),
            0
        )
        .is_err());
        assert!(build(ScenarioKind::SellerBuyer, &ScenarioOverrides::scale(0), 0).is_err());
    }

    #[test]
    fn variant_budgets() {
        let classical = build(
            ScenarioKind::Ultimatum,
            &ScenarioOverrides::variant(ScenarioVariant::UltimatumClassical),
            0,
        )
        .unwrap();
        assert_eq!(classical.turn_budget(), 2);
        assert!(classical.final_turn_must_decide());

        let three = build(
            ScenarioKind::Ultimatum,
            &ScenarioOverrides::variant(ScenarioVariant::UltimatumThreeTurn),
            0,
        )
        .unwrap();
        assert_eq!(three.turn_budget(), 3);
        assert_eq!(three.own_turn_budget(PlayerId::Red), 2);
        assert_eq!(three.own_turn_budget(PlayerId::Blue), 1);
    }

    #[test]
    fn prompts_never_leak_the_opponents_valuation() {
        let config = build(ScenarioKind::SellerBuyer, &Default::default(), 0).unwrap();
        let seller = render_system_prompt(&config, PlayerId::Red);
        let buyer = render_system_prompt(&config, PlayerId::Blue);

        assert!(seller.contains("It costed X: 40 ZUP to produce"));
        assert!(!seller.contains("willing to pay"));
        assert!(!seller.contains("60"));
        assert!(buyer.contains("willing to pay at most 60 ZUP"));
        assert!(!buyer.contains("costed"));
        assert!(!buyer.contains(": 40 ZUP"));
    }

    #[test]
    fn prompt_embeds_the_tag_grammar_and_endowment() {
        let config = build(ScenarioKind::ResourceExchange, &Default::default(), 0).unwrap();
        let p1 = render_system_prompt(&config, PlayerId::Red);
        assert!(p1.contains("<trade>"));
        assert!(p1.contains("X: 25, Y: 5"));
        assert!(p1.contains("Maximize the total number of resources"));
        // Player 2's role is assigned in its system prompt, player 1's in
        // the initial user message.
        assert!(!p1.contains("You are Player BLUE"));
        let p2 = render_system_prompt(&config, PlayerId::Blue);
        assert!(p2.contains("You are Player BLUE"));
        assert!(initial_user_message(&config).contains("You are Player RED"));
    }

    #[test]
    fn behavior_tail_is_appended_verbatim() {
        let mut config = build(ScenarioKind::Ultimatum, &Default::default(), 0).unwrap();
        config.behaviors.blue = Some(BehaviorKind::Desperate);
        let prompt = render_system_prompt(&config, PlayerId::Blue);
        assert!(prompt
            .contains("You must fake being desperate. Supplicate and beg to get more dollars."));
        let p1 = render_system_prompt(&config, PlayerId::Red);
        assert!(!p1.contains("desperate"));
    }
}
