//! Integer resource bundles.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Named non-negative integer quantities held or offered by a player.
///
/// Names absent from the map mean quantity zero; zero entries are never
/// stored, so structural equality matches quantity equality.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResourceBundle {
    quantities: BTreeMap<String, u64>,
}

impl ResourceBundle {
    pub fn new() -> Self {
        ResourceBundle::default()
    }

    /// Builds a bundle from (name, quantity) pairs. Repeated names add up.
    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut bundle = ResourceBundle::new();
        for (name, qty) in pairs {
            bundle.add(name.into().as_str(), qty);
        }
        bundle
    }

    pub fn get(&self, name: &str) -> u64 {
        self.quantities.get(name).copied().unwrap_or(0)
    }

    pub fn set(&mut self, name: &str, qty: u64) {
        if qty == 0 {
            self.quantities.remove(name);
        } else {
            self.quantities.insert(name.to_string(), qty);
        }
    }

    pub fn add(&mut self, name: &str, qty: u64) {
        self.set(name, self.get(name) + qty);
    }

    /// Removes `qty` of `name`; returns false (and leaves the bundle
    /// untouched) if not enough is held.
    pub fn remove(&mut self, name: &str, qty: u64) -> bool {
        let held = self.get(name);
        match held.checked_sub(qty) {
            Some(rest) => {
                self.set(name, rest);
                true
            }
            None => false,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.quantities.is_empty()
    }

    /// Sum of all quantities.
    pub fn total(&self) -> u64 {
        self.quantities.values().sum()
    }

    /// Component-wise `self ≤ other`.
    pub fn is_covered_by(&self, other: &ResourceBundle) -> bool {
        self.quantities
            .iter()
            .all(|(name, qty)| other.get(name) >= *qty)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.quantities.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.quantities.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// `self + other`, component-wise.
    pub fn plus(&self, other: &ResourceBundle) -> ResourceBundle {
        let mut out = self.clone();
        for (name, qty) in other.iter() {
            out.add(name, qty);
        }
        out
    }

    /// `self − other`, component-wise; `None` if any component would go
    /// negative.
    pub fn minus(&self, other: &ResourceBundle) -> Option<ResourceBundle> {
        let mut out = self.clone();
        for (name, qty) in other.iter() {
            if !out.remove(name, qty) {
                return None;
            }
        }
        Some(out)
    }

    /// Every quantity multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> ResourceBundle {
        let mut out = ResourceBundle::new();
        for (name, qty) in self.iter() {
            out.set(name, qty * factor);
        }
        out
    }
}

impl fmt::Display for ResourceBundle {
    /// Item-list form used inside trade clauses: `X: 10, Y: 3`, or
    /// `nothing` for the empty bundle.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("nothing");
        }
        let mut first = true;
        for (name, qty) in self.iter() {
            if !first {
                f.write_str(", ")?;
            }
            write!(f, "{name}: {qty}")?;
            first = false;
        }
        Ok(())
    }
}
