//! Player identities and per-player storage.

use serde::{Deserialize, Serialize};
use std::fmt;

/// One of the two seats in a game. Player 1 is RED and always moves first;
/// in the seller/buyer scenario RED is the seller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PlayerId {
    Red,
    Blue,
}

impl PlayerId {
    pub fn opponent(self) -> PlayerId {
        match self {
            PlayerId::Red => PlayerId::Blue,
            PlayerId::Blue => PlayerId::Red,
        }
    }

    /// Canonical in-game name.
    pub fn name(self) -> &'static str {
        match self {
            PlayerId::Red => "RED",
            PlayerId::Blue => "BLUE",
        }
    }

    /// The player who authors the message at a zero-based transcript index.
    /// RED authors index 0 and every even index after it.
    pub fn for_turn_index(index: u32) -> PlayerId {
        if index.is_multiple_of(2) {
            PlayerId::Red
        } else {
            PlayerId::Blue
        }
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A value held once per player.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerPlayer<T> {
    pub red: T,
    pub blue: T,
}

impl<T> PerPlayer<T> {
    pub fn new(red: T, blue: T) -> Self {
        PerPlayer { red, blue }
    }

    pub fn get(&self, player: PlayerId) -> &T {
        match player {
            PlayerId::Red => &self.red,
            PlayerId::Blue => &self.blue,
        }
    }

    pub fn get_mut(&mut self, player: PlayerId) -> &mut T {
        match player {
            PlayerId::Red => &mut self.red,
            PlayerId::Blue => &mut self.blue,
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> PerPlayer<U> {
        PerPlayer {
            red: f(&self.red),
            blue: f(&self.blue),
        }
    }

    /// Swaps the two seats; used for label-exchange symmetry checks.
    pub fn swapped(self) -> Self {
        PerPlayer {
            red: self.blue,
            blue: self.red,
        }
    }
}
