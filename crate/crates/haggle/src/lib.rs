//! Two-agent negotiation games over a tagged-message protocol.
//!
//! The crate is organized around a small set of layers:
//!
//! * [`resources`], [`trade`], [`outcome`] — the domain model: integer
//!   resource bundles, feasibility-checkable trades, exact-rational payoffs
//!   and winner classification.
//! * [`protocol`] — the tagged wire format agents speak: parsing, canonical
//!   rendering, and visibility filtering of private fields.
//! * [`scenarios`] — game configurations (resource exchange, multi-turn
//!   ultimatum, seller/buyer) and the system prompts derived from them.
//! * [`agents`] — the agent interface, deterministic scripted strategies,
//!   and an HTTP chat-completion client.
//! * [`engine`] — the turn-taking state machine that runs one game.
//! * [`records`] — versioned on-disk game records, replay, and
//!   counterfactual edit-and-rerun.
//! * [`analysis`] — statistics over collections of records: win rates,
//!   payoffs, rank correlation, binomial tests, and behavioral probes.
//! * [`harness`] — ordered-pair tournaments and named experiments.
//!
//! Payoffs and statistics are exact rationals end to end; floating point
//! only appears when reports are formatted.

pub mod agents;
pub mod analysis;
pub mod engine;
pub mod harness;
pub mod outcome;
pub mod player;
pub mod protocol;
pub mod records;
pub mod resources;
pub mod scenarios;
pub mod trade;

/// Exact rational scalar used for payoffs and statistics.
pub type Rational = num_rational::Rational64;

/// Arbitrary-precision rational used where products grow past 64 bits
/// (exact binomial tail sums, rank covariance).
pub type BigRational = num_rational::BigRational;

pub use outcome::{GameStatus, Outcome, Valuation, ValuationKind, Winner};
pub use player::{PerPlayer, PlayerId};
pub use protocol::{Decision, StructuredMessage, VisibilityPolicy};
pub use resources::ResourceBundle;
pub use scenarios::{ScenarioConfig, ScenarioKind, ScenarioVariant};
pub use trade::Trade;
