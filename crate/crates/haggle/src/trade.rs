//! Bidirectional exchange proposals.

use crate::player::{PerPlayer, PlayerId};
use crate::resources::ResourceBundle;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TradeError {
    /// A side of the trade asks a player to give resources it does not hold.
    #[error("infeasible trade: {0} cannot cover its side")]
    Infeasible(PlayerId),
}

/// A feasibility-checkable exchange between the two players: what RED hands
/// to BLUE and what BLUE hands to RED. Quantities are non-negative by
/// construction ([`ResourceBundle`] is unsigned).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trade {
    pub from_red: ResourceBundle,
    pub from_blue: ResourceBundle,
    pub proposer: PlayerId,
}

impl Trade {
    pub fn new(from_red: ResourceBundle, from_blue: ResourceBundle, proposer: PlayerId) -> Self {
        Trade {
            from_red,
            from_blue,
            proposer,
        }
    }

    /// The bundle `player` gives away under this trade.
    pub fn given_by(&self, player: PlayerId) -> &ResourceBundle {
        match player {
            PlayerId::Red => &self.from_red,
            PlayerId::Blue => &self.from_blue,
        }
    }

    /// The bundle `player` receives under this trade.
    pub fn received_by(&self, player: PlayerId) -> &ResourceBundle {
        self.given_by(player.opponent())
    }

    /// True iff each side can cover what it gives from its holdings.
    pub fn is_feasible(&self, holdings: &PerPlayer<ResourceBundle>) -> bool {
        self.from_red.is_covered_by(&holdings.red) && self.from_blue.is_covered_by(&holdings.blue)
    }

    /// Applies the exchange, returning the new holdings. Per-resource totals
    /// are conserved.
    pub fn apply(
        &self,
        holdings: &PerPlayer<ResourceBundle>,
    ) -> Result<PerPlayer<ResourceBundle>, TradeError> {
        let red = holdings
            .red
            .minus(&self.from_red)
            .ok_or(TradeError::Infeasible(PlayerId::Red))?
            .plus(&self.from_blue);
        let blue = holdings
            .blue
            .minus(&self.from_blue)
            .ok_or(TradeError::Infeasible(PlayerId::Blue))?
            .plus(&self.from_red);
        Ok(PerPlayer::new(red, blue))
    }

    /// Holdings of `player` after the exchange, ignoring the other seat.
    /// `None` when the player cannot cover its side.
    pub fn outcome_for(
        &self,
        player: PlayerId,
        holdings: &ResourceBundle,
    ) -> Option<ResourceBundle> {
        Some(
            holdings
                .minus(self.given_by(player))?
                .plus(self.received_by(player)),
        )
    }

    /// The single price entry of the trade in `currency` units: what BLUE
    /// (the buyer in seller/buyer games) pays. This is the proposal value
    /// p_t tracked by the price-series probes.
    pub fn price_in(&self, currency: &str) -> u64 {
        self.from_blue.get(currency)
    }

    /// Every quantity on both sides multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Trade {
        Trade {
            from_red: self.from_red.scaled(factor),
            from_blue: self.from_blue.scaled(factor),
            proposer: self.proposer,
        }
    }
}

impl fmt::Display for Trade {
    /// Canonical clause form: `Player RED Gives X: 10 | Player BLUE Gives Y: 3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Player RED Gives {} | Player BLUE Gives {}",
            self.from_red, self.from_blue
        )
    }
}
