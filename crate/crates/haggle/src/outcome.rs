//! Payoff computation and winner classification.

use crate::player::{PerPlayer, PlayerId};
use crate::resources::ResourceBundle;
use crate::scenarios::ScenarioKind;
use crate::Rational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OutcomeError {
    /// Seller/buyer games need exactly one cost-of-production (seller) and
    /// one willingness-to-pay (buyer).
    #[error("missing valuation: {0}")]
    MissingValuation(&'static str),
    /// Payoffs cannot be computed for a game still in progress.
    #[error("game is still ongoing")]
    Ongoing,
}

/// A player's private belief about the traded object, in currency units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Valuation {
    pub player: PlayerId,
    pub kind: ValuationKind,
    pub amount: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValuationKind {
    CostOfProduction,
    WillingnessToPay,
}

/// Lifecycle of one game. Terminal states absorb: nothing is appended to a
/// transcript once the status leaves `Ongoing`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GameStatus {
    Ongoing,
    /// A standing proposal was accepted and applied.
    Accepted,
    /// The turn budget ran out with no acceptance.
    MaxTurns,
    /// A player exhausted its invalid-move retries and loses by default.
    Forfeit {
        by: PlayerId,
    },
}

impl GameStatus {
    pub fn is_terminal(self) -> bool {
        !matches!(self, GameStatus::Ongoing)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Winner {
    Red,
    Blue,
    Tie,
}

impl Winner {
    pub fn from_player(player: PlayerId) -> Winner {
        match player {
            PlayerId::Red => Winner::Red,
            PlayerId::Blue => Winner::Blue,
        }
    }

    pub fn player(self) -> Option<PlayerId> {
        match self {
            Winner::Red => Some(PlayerId::Red),
            Winner::Blue => Some(PlayerId::Blue),
            Winner::Tie => None,
        }
    }
}

/// Final classification of one game.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub status: GameStatus,
    pub final_holdings: PerPlayer<ResourceBundle>,
    #[serde(with = "crate::outcome::rational_pair")]
    pub payoffs: PerPlayer<Rational>,
    pub winner: Winner,
}

impl Outcome {
    /// Computes payoffs and the winner for a finished game.
    ///
    /// On forfeit the offending player loses outright; payoffs follow the
    /// scenario's no-deal rule (holdings are unchanged, so every scenario
    /// yields zeros).
    pub fn compute(
        kind: ScenarioKind,
        initial: &PerPlayer<ResourceBundle>,
        final_holdings: PerPlayer<ResourceBundle>,
        valuations: &[Valuation],
        status: GameStatus,
    ) -> Result<Outcome, OutcomeError> {
        if !status.is_terminal() {
            return Err(OutcomeError::Ongoing);
        }
        let payoffs = payoffs(kind, initial, &final_holdings, valuations, status)?;
        let winner = match status {
            GameStatus::Forfeit { by } => Winner::from_player(by.opponent()),
            _ => classify_winner(kind, &payoffs, valuations)?,
        };
        Ok(Outcome {
            status,
            final_holdings,
            payoffs,
            winner,
        })
    }
}

fn rational(n: i64) -> Rational {
    Rational::from_integer(n)
}

/// Total quantity the buyer handed over; the agreed price in seller/buyer
/// games, where the buyer pays in a single currency.
fn accepted_price(initial_buyer: &ResourceBundle, final_buyer: &ResourceBundle) -> u64 {
    initial_buyer
        .iter()
        .map(|(name, qty)| qty.saturating_sub(final_buyer.get(name)))
        .sum()
}

fn find_valuation(valuations: &[Valuation], kind: ValuationKind) -> Option<u64> {
    valuations.iter().find(|v| v.kind == kind).map(|v| v.amount)
}

/// Per-player payoffs for a finished game.
///
/// * Resource exchange: net gain, `total(final) − total(initial)`.
/// * Ultimatum: the player's final money if a split was accepted, else 0
///   for both.
/// * Seller/buyer: `price − cost` for the seller and `willingness − price`
///   for the buyer; both 0 when no sale happened.
pub fn payoffs(
    kind: ScenarioKind,
    initial: &PerPlayer<ResourceBundle>,
    final_holdings: &PerPlayer<ResourceBundle>,
    valuations: &[Valuation],
    status: GameStatus,
) -> Result<PerPlayer<Rational>, OutcomeError> {
    let accepted = status == GameStatus::Accepted;
    match kind {
        ScenarioKind::ResourceExchange => Ok(PerPlayer::new(
            rational(final_holdings.red.total() as i64 - initial.red.total() as i64),
            rational(final_holdings.blue.total() as i64 - initial.blue.total() as i64),
        )),
        ScenarioKind::Ultimatum => {
            if accepted {
                Ok(PerPlayer::new(
                    rational(final_holdings.red.total() as i64),
                    rational(final_holdings.blue.total() as i64),
                ))
            } else {
                Ok(PerPlayer::new(rational(0), rational(0)))
            }
        }
        ScenarioKind::SellerBuyer => {
            let cost = find_valuation(valuations, ValuationKind::CostOfProduction)
                .ok_or(OutcomeError::MissingValuation("cost_of_production"))?;
            let willingness = find_valuation(valuations, ValuationKind::WillingnessToPay)
                .ok_or(OutcomeError::MissingValuation("willingness_to_pay"))?;
            if accepted {
                let price = accepted_price(&initial.blue, &final_holdings.blue) as i64;
                Ok(PerPlayer::new(
                    rational(price - cost as i64),
                    rational(willingness as i64 - price),
                ))
            } else {
                Ok(PerPlayer::new(rational(0), rational(0)))
            }
        }
    }
}

/// Who won, given the payoffs.
///
/// Resource exchange and ultimatum: the higher payoff wins, equal payoffs
/// tie. Seller/buyer: the seller wins iff the price exceeded the midpoint
/// between cost and willingness, the buyer iff it fell short; at the
/// midpoint or with no sale the game ties. Equivalent comparison used here:
/// a player wins iff its payoff strictly exceeds half the surplus
/// `willingness − cost`.
pub fn classify_winner(
    kind: ScenarioKind,
    payoffs: &PerPlayer<Rational>,
    valuations: &[Valuation],
) -> Result<Winner, OutcomeError> {
    if payoffs.red == payoffs.blue {
        return Ok(Winner::Tie);
    }
    match kind {
        ScenarioKind::ResourceExchange | ScenarioKind::Ultimatum => {
            if payoffs.red > payoffs.blue {
                Ok(Winner::Red)
            } else {
                Ok(Winner::Blue)
            }
        }
        ScenarioKind::SellerBuyer => {
            let cost = find_valuation(valuations, ValuationKind::CostOfProduction)
                .ok_or(OutcomeError::MissingValuation("cost_of_production"))?;
            let willingness = find_valuation(valuations, ValuationKind::WillingnessToPay)
                .ok_or(OutcomeError::MissingValuation("willingness_to_pay"))?;
            let half_surplus = Rational::new(willingness as i64 - cost as i64, 2);
            if payoffs.red > half_surplus {
                Ok(Winner::Red)
            } else if payoffs.blue > half_surplus {
                Ok(Winner::Blue)
            } else {
                // No sale leaves both at zero with a positive surplus.
                Ok(Winner::Tie)
            }
        }
    }
}

/// Serde helpers storing rationals as `"n"` or `"n/d"` strings so records
/// stay human-readable and bit-exact.
pub mod rational_string {
    use crate::Rational;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&to_string(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(de)?;
        parse(&text).map_err(D::Error::custom)
    }

    pub fn to_string(value: &Rational) -> String {
        if value.is_integer() {
            value.numer().to_string()
        } else {
            format!("{}/{}", value.numer(), value.denom())
        }
    }

    pub fn parse(text: &str) -> Result<Rational, String> {
        let mut parts = text.splitn(2, '/');
        let numer: i64 = parts
            .next()
            .unwrap_or_default()
            .trim()
            .parse()
            .map_err(|e| format!("bad rational {text:?}: {e}"))?;
        let denom: i64 = match parts.next() {
            Some(d) => d
                .trim()
                .parse()
                .map_err(|e| format!("bad rational {text:?}: {e}"))?,
            None => 1,
        };
        if denom == 0 {
            return Err(format!("bad rational {text:?}: zero denominator"));
        }
        Ok(Rational::new(numer, denom))
    }
}

/// Serde helpers for a per-player pair of rationals.
pub mod rational_pair {
    use super::rational_string;
    use crate::player::PerPlayer;
    use crate::Rational;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Pair {
        red: String,
        blue: String,
    }

    pub fn serialize<S: Serializer>(
        value: &PerPlayer<Rational>,
        ser: S,
    ) -> Result<S::Ok, S::Error> {
        Pair {
            red: rational_string::to_string(&value.red),
            blue: rational_string::to_string(&value.blue),
        }
        .serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<PerPlayer<Rational>, D::Error> {
        let pair = Pair::deserialize(de)?;
        Ok(PerPlayer::new(
            rational_string::parse(&pair.red).map_err(D::Error::custom)?,
            rational_string::parse(&pair.blue).map_err(D::Error::custom)?,
        ))
    }
}
