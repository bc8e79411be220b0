//! Deterministic scripted agents.
//!
//! Scripted agents are pure functions of (config, seat, conversation view):
//! they rebuild whatever history they need by parsing the view instead of
//! carrying private state, so replaying or editing a stored game and
//! continuing it live "just works".

use super::{Agent, AgentError, ChatMessage, ChatRole, ScriptedAction, StrategySpec};
use crate::player::PlayerId;
use crate::protocol::{self, Decision, PlayerNames, StructuredMessage};
use crate::resources::ResourceBundle;
use crate::scenarios::ScenarioConfig;
use crate::trade::Trade;
use crate::Rational;
use num_traits::ToPrimitive;

pub struct ScriptedAgent {
    id: String,
    player: PlayerId,
    config: ScenarioConfig,
    strategy: StrategySpec,
    cursor: usize,
}

/// What a strategy decided to do this turn.
enum Move {
    Propose(Trade),
    Accept,
    Reject,
    Pass,
}

struct ViewHistory {
    own: Vec<StructuredMessage>,
    incoming: Vec<StructuredMessage>,
}

impl ViewHistory {
    fn last_own_proposal(&self) -> Option<&Trade> {
        self.own.iter().rev().find_map(|m| {
            (m.decision == Decision::Propose)
                .then_some(m.trade.as_ref())
                .flatten()
        })
    }

    fn last_incoming_proposal(&self) -> Option<&Trade> {
        self.incoming.iter().rev().find_map(|m| {
            (m.decision == Decision::Propose)
                .then_some(m.trade.as_ref())
                .flatten()
        })
    }

    fn own_proposal_count(&self) -> usize {
        self.own
            .iter()
            .filter(|m| m.decision == Decision::Propose)
            .count()
    }
}

impl ScriptedAgent {
    pub fn new(
        id: String,
        player: PlayerId,
        config: ScenarioConfig,
        strategy: StrategySpec,
    ) -> Self {
        ScriptedAgent {
            id,
            player,
            config,
            strategy,
            cursor: 0,
        }
    }

    /// Parses the view back into per-side message histories. Untagged user
    /// content (the initialization message, feedback notices) is skipped;
    /// so is anything not authored by the expected side.
    fn history(&self, view: &[ChatMessage]) -> ViewHistory {
        let vocab = self.config.vocab();
        let names = PlayerNames::default();
        let mut own = Vec::new();
        let mut incoming = Vec::new();
        for entry in view {
            let bucket = match entry.role {
                ChatRole::Assistant => &mut own,
                ChatRole::User => &mut incoming,
                ChatRole::System => continue,
            };
            if let Ok(parsed) = protocol::parse_message(&entry.content, &vocab, &names) {
                let expected = match entry.role {
                    ChatRole::Assistant => self.player,
                    _ => self.player.opponent(),
                };
                if parsed.message.player_name == expected {
                    bucket.push(parsed.message);
                }
            }
        }
        ViewHistory { own, incoming }
    }

    /// The resource being split or paid with.
    fn money(&self) -> String {
        self.config
            .currency()
            .or_else(|| {
                self.config
                    .endowments
                    .red
                    .names()
                    .next()
                    .map(str::to_string)
            })
            .unwrap_or_else(|| "Dollars".to_string())
    }

    /// Total on the table in a split game.
    fn split_total(&self) -> u64 {
        self.config.endowments.red.total() + self.config.endowments.blue.total()
    }

    /// What the agent would end up holding if it accepted `trade`.
    fn resulting_total(&self, trade: &Trade) -> Option<u64> {
        trade
            .outcome_for(self.player, self.config.endowments.get(self.player))
            .map(|b| b.total())
    }

    /// A proposal leaving this agent with `keep` units of the split money.
    fn split_proposal(&self, keep: u64) -> Trade {
        let money = self.money();
        let total = self.split_total();
        let keep = keep.min(total);
        let to_opponent = match self.player {
            // RED holds the money: it gives away what it does not keep.
            PlayerId::Red => ResourceBundle::from_pairs([(money, total - keep)]),
            // BLUE asks RED to hand over its share.
            PlayerId::Blue => ResourceBundle::from_pairs([(money, keep)]),
        };
        match self.player {
            PlayerId::Red => Trade::new(to_opponent, ResourceBundle::new(), self.player),
            PlayerId::Blue => Trade::new(to_opponent, ResourceBundle::new(), self.player),
        }
    }

    /// A sale of the seller's whole object bundle at `price`.
    fn price_proposal(&self, price: u64) -> Trade {
        let currency = self.money();
        Trade::new(
            self.config.endowments.red.clone(),
            ResourceBundle::from_pairs([(currency, price)]),
            self.player,
        )
    }

    fn decide(&mut self, history: &ViewHistory, is_final_turn: bool) -> Result<Move, AgentError> {
        match self.strategy.clone() {
            StrategySpec::FixedSequence { moves } => {
                let next = moves
                    .get(self.cursor)
                    .ok_or(AgentError::StrategyExhausted)?;
                self.cursor += 1;
                Ok(match &next.action {
                    ScriptedAction::Propose { give, take } => {
                        let (from_red, from_blue) = match self.player {
                            PlayerId::Red => (give.clone(), take.clone()),
                            PlayerId::Blue => (take.clone(), give.clone()),
                        };
                        Move::Propose(Trade::new(from_red, from_blue, self.player))
                    }
                    ScriptedAction::Accept => Move::Accept,
                    ScriptedAction::Reject => Move::Reject,
                    ScriptedAction::Pass => Move::Pass,
                })
            }
            StrategySpec::RationalUltimatum => {
                let total = self.split_total();
                let offered = history
                    .last_incoming_proposal()
                    .and_then(|t| self.resulting_total(t));
                if is_final_turn {
                    return Ok(match offered {
                        Some(r) if r > 0 => Move::Accept,
                        _ => Move::Reject,
                    });
                }
                if let Some(r) = offered {
                    if r >= total.saturating_sub(1) {
                        return Ok(Move::Accept);
                    }
                }
                Ok(Move::Propose(self.split_proposal(total.saturating_sub(1))))
            }
            StrategySpec::FairnessThreshold { tau } => {
                let total = self.split_total();
                let offered = history
                    .last_incoming_proposal()
                    .and_then(|t| self.resulting_total(t));
                if let Some(r) = offered {
                    let share = Rational::new(r as i64, total.max(1) as i64);
                    if share >= tau {
                        return Ok(Move::Accept);
                    }
                }
                if is_final_turn {
                    return Ok(Move::Reject);
                }
                Ok(Move::Propose(self.split_proposal(total.div_ceil(2))))
            }
            StrategySpec::SplitDifference {
                anchor,
                accept_threshold,
            } => {
                let currency = self.money();
                let own_last = history.last_own_proposal().map(|t| t.price_in(&currency));
                let incoming = history
                    .last_incoming_proposal()
                    .map(|t| t.price_in(&currency));
                let Some(own_last) = own_last else {
                    return Ok(Move::Propose(self.price_proposal(anchor)));
                };
                let Some(incoming) = incoming else {
                    return Ok(Move::Propose(self.price_proposal(own_last)));
                };
                if incoming.abs_diff(own_last) <= accept_threshold {
                    return Ok(Move::Accept);
                }
                let mid = midpoint_toward_self(incoming, own_last, self.player);
                Ok(Move::Propose(self.price_proposal(mid)))
            }
            StrategySpec::AnchorConcede {
                anchor,
                reservation,
                rate,
            } => {
                let currency = self.money();
                let k = history.own_proposal_count() as i64;
                let planned = planned_concession(anchor, reservation, rate, k);
                let incoming = history
                    .last_incoming_proposal()
                    .map(|t| t.price_in(&currency));
                if let Some(p) = incoming {
                    // Seller values high prices, buyer low ones.
                    let favorable = match self.player {
                        PlayerId::Red => p >= planned,
                        PlayerId::Blue => p <= planned,
                    };
                    if favorable {
                        return Ok(Move::Accept);
                    }
                }
                Ok(Move::Propose(self.price_proposal(planned)))
            }
        }
    }
}

/// Midpoint of the two most recent proposals, halves rounded toward the
/// proposer's own side: the seller rounds up, the buyer down.
fn midpoint_toward_self(a: u64, b: u64, player: PlayerId) -> u64 {
    let sum = a + b;
    let half = sum / 2;
    if sum.is_multiple_of(2) {
        half
    } else {
        match player {
            PlayerId::Red => half + 1,
            PlayerId::Blue => half,
        }
    }
}

/// The k-th planned price of an anchor-concede policy: start at the anchor
/// and move a fixed fraction of the anchor-to-reservation distance each own
/// turn, clamped at the reservation and rounded toward it.
fn planned_concession(anchor: u64, reservation: u64, rate: Rational, k: i64) -> u64 {
    let a = Rational::from_integer(anchor as i64);
    let r = Rational::from_integer(reservation as i64);
    let exact = a + Rational::from_integer(k) * rate * (r - a);
    let clamped = if reservation <= anchor {
        exact.max(r)
    } else {
        exact.min(r)
    };
    let rounded = if reservation <= anchor {
        clamped.floor()
    } else {
        clamped.ceil()
    };
    rounded.to_integer().to_u64().unwrap_or(0)
}

impl Agent for ScriptedAgent {
    fn id(&self) -> &str {
        &self.id
    }

    fn next_message(&mut self, view: &[ChatMessage]) -> Result<String, AgentError> {
        let history = self.history(view);
        let own_turn = history.own.len() as u32 + 1;
        let global_index = 2 * history.own.len() as u32
            + match self.player {
                PlayerId::Red => 0,
                PlayerId::Blue => 1,
            };
        let is_final_turn = global_index + 1 == self.config.turn_budget();
        let chosen = self.decide(&history, is_final_turn)?;

        let mut msg = StructuredMessage::bare(
            self.player,
            own_turn,
            self.config.own_turn_budget(self.player).max(own_turn),
        );
        msg.resources_echo = Some(self.config.endowments.get(self.player).clone());
        msg.goal_echo = Some(self.config.goals.get(self.player).clone());
        match chosen {
            Move::Propose(trade) => {
                msg.trade = Some(trade);
                msg.decision = Decision::Propose;
            }
            Move::Accept => msg.decision = Decision::Accept,
            Move::Reject => msg.decision = Decision::Reject,
            Move::Pass => msg.decision = Decision::None,
        }
        if let StrategySpec::FixedSequence { moves } = &self.strategy {
            // cursor already advanced past the move we just played
            if let Some(played) = moves.get(self.cursor - 1) {
                msg.reasoning = played.reasoning.clone();
                msg.public_text = played.public_text.clone();
            }
        }
        debug_assert_eq!(msg.validate(), Ok(()));
        Ok(protocol::render_message(&msg))
    }
}
