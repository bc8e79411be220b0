//! Statistics over collections of game records.
//!
//! Everything here is exact-rational arithmetic wherever the inputs are
//! rational: win rates and payoff means are `Rational`, the binomial tail
//! is summed exactly over big rationals, and rank correlation works on
//! integer-scaled ranks so that perfectly monotone data yields exactly
//! ±1.0. Floating point appears only when a result is inherently
//! irrational (a square root) or at report-formatting time.

use crate::agents::{AgentSpec, ScriptedMove, StrategySpec};
use crate::engine::{self, EngineError};
use crate::outcome::{GameStatus, Winner};
use crate::player::{PerPlayer, PlayerId};
use crate::protocol::Decision;
use crate::records::GameRecord;
use crate::resources::ResourceBundle;
use crate::scenarios::{self, ScenarioKind, ScenarioOverrides, ScenarioVariant};
use crate::{BigRational, Rational};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("no records to analyze")]
    EmptyInput,
    #[error("vectors must have equal length of at least 2")]
    LengthMismatch,
    #[error("a constant vector has no rank correlation")]
    DegenerateInput,
    #[error("inputs must be finite")]
    NonFiniteInput,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("no accepted sales in the records")]
    NoAcceptedSales,
    #[error("no proposal series of length 3 or more")]
    NoEligibleSeries,
    #[error("no games with a buyer counter-proposal")]
    EmptyDenominator,
    #[error("acceptance curves need the classical or three-turn ultimatum")]
    InvalidVariant,
    #[error("no amounts supplied")]
    EmptyAmounts,
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Fraction of decisive games `player` won. Ties are excluded from the
/// denominator; all-tie inputs return `None` (no decisive games).
pub fn win_rate(
    records: &[GameRecord],
    player: PlayerId,
) -> Result<Option<Rational>, AnalysisError> {
    if records.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    let mut wins = 0i64;
    let mut decisive = 0i64;
    for record in records {
        match record.outcome.winner {
            Winner::Tie => {}
            w => {
                decisive += 1;
                if w.player() == Some(player) {
                    wins += 1;
                }
            }
        }
    }
    if decisive == 0 {
        return Ok(None);
    }
    Ok(Some(Rational::new(wins, decisive)))
}

/// Arithmetic mean payoff over all games, ties and no-deals included.
pub fn mean_payoff(records: &[GameRecord], player: PlayerId) -> Result<Rational, AnalysisError> {
    if records.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    let sum: Rational = records.iter().map(|r| *r.outcome.payoffs.get(player)).sum();
    Ok(sum / Rational::from_integer(records.len() as i64))
}

/// Average ranks scaled by two, so ties (half-integer ranks) stay integer.
fn double_ranks(values: &[f64]) -> Vec<i64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks2 = vec![0i64; n];
    let mut lo = 0;
    while lo < n {
        let mut hi = lo;
        while hi + 1 < n && values[order[hi + 1]] == values[order[lo]] {
            hi += 1;
        }
        // Positions lo..=hi share the averaged 1-based rank (lo+hi)/2 + 1.
        let rank2 = (lo + hi + 2) as i64;
        for &index in &order[lo..=hi] {
            ranks2[index] = rank2;
        }
        lo = hi + 1;
    }
    ranks2
}

/// Spearman rank correlation: the Pearson correlation of averaged ranks.
///
/// Computed exactly on integer-centered ranks; ±1 and 0 are returned
/// exactly, everything else takes one square root in floating point.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, AnalysisError> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(AnalysisError::LengthMismatch);
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(AnalysisError::NonFiniteInput);
    }
    let n = x.len() as i128;
    let rx = double_ranks(x);
    let ry = double_ranks(y);
    // Centered double-ranks: 2r - (n+1) sums to zero by construction.
    let center = n + 1;
    let mut cov: i128 = 0;
    let mut var_x: i128 = 0;
    let mut var_y: i128 = 0;
    for (&a, &b) in rx.iter().zip(&ry) {
        let ex = a as i128 - center;
        let ey = b as i128 - center;
        cov += ex * ey;
        var_x += ex * ex;
        var_y += ey * ey;
    }
    if var_x == 0 || var_y == 0 {
        return Err(AnalysisError::DegenerateInput);
    }
    if cov == 0 {
        return Ok(0.0);
    }
    if cov * cov == var_x * var_y {
        return Ok(if cov > 0 { 1.0 } else { -1.0 });
    }
    Ok(cov as f64 / ((var_x as f64) * (var_y as f64)).sqrt())
}

/// Exact upper tail of the binomial: P(X ≥ k | n, p).
pub fn binomial_tail_exact(k: u64, n: u64, p: &BigRational) -> Result<BigRational, AnalysisError> {
    if k > n {
        return Err(AnalysisError::InvalidParams(format!("k={k} exceeds n={n}")));
    }
    if p <= &BigRational::zero() || p >= &BigRational::one() {
        return Err(AnalysisError::InvalidParams(
            "p must lie strictly between 0 and 1".into(),
        ));
    }
    let q = BigRational::one() - p;
    // First term: C(n, k) p^k q^(n-k).
    let mut coefficient = BigInt::one();
    for i in 0..k {
        coefficient = coefficient * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    let mut term = BigRational::from(coefficient) * pow_rational(p, k) * pow_rational(&q, n - k);
    let mut sum = term.clone();
    for i in k..n {
        // term_{i+1} = term_i * (n-i)/(i+1) * p/q
        term = term * BigRational::from(BigInt::from(n - i))
            / BigRational::from(BigInt::from(i + 1))
            * p
            / &q;
        sum += term.clone();
    }
    Ok(sum)
}

fn pow_rational(base: &BigRational, exponent: u64) -> BigRational {
    let mut out = BigRational::one();
    let mut base = base.clone();
    let mut e = exponent;
    while e > 0 {
        if e & 1 == 1 {
            out *= base.clone();
        }
        base = base.clone() * base;
        e >>= 1;
    }
    out
}

/// One-tailed exact binomial test: the probability of at least `k`
/// successes in `n` trials under success probability `p0`.
pub fn binomial_test_one_tailed(k: u64, n: u64, p0: f64) -> Result<f64, AnalysisError> {
    if !(0.0..=1.0).contains(&p0) || p0 == 0.0 || p0 == 1.0 || !p0.is_finite() {
        return Err(AnalysisError::InvalidParams(format!(
            "p0={p0} must lie strictly between 0 and 1"
        )));
    }
    let p = BigRational::from_float(p0)
        .ok_or_else(|| AnalysisError::InvalidParams("p0 is not finite".into()))?;
    let tail = binomial_tail_exact(k, n, &p)?;
    Ok(tail.to_f64().unwrap_or(f64::NAN))
}

/// The ordered price proposals of one seller/buyer game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProposalSeries {
    pub prices: Vec<u64>,
    pub proposers: Vec<PlayerId>,
    pub accepted_price: Option<u64>,
    /// Odd (1-based) proposals should come from the seller, even from the
    /// buyer; false when a player passed a turn and broke the pattern.
    pub parity_ok: bool,
}

/// Extracts the proposal series from a seller/buyer record; `None` for
/// other scenarios.
pub fn proposal_series(record: &GameRecord) -> Option<ProposalSeries> {
    let currency = record.config.currency()?;
    let mut prices = Vec::new();
    let mut proposers = Vec::new();
    for entry in &record.transcript {
        if entry.message.decision == Decision::Propose {
            if let Some(trade) = &entry.message.trade {
                prices.push(trade.price_in(&currency));
                proposers.push(entry.player);
            }
        }
    }
    let accepted_price = if record.outcome.status == GameStatus::Accepted {
        record.transcript.last().and_then(|accepting| {
            let opponent = accepting.player.opponent();
            record
                .transcript
                .iter()
                .rev()
                .filter(|e| e.player == opponent && e.message.decision == Decision::Propose)
                .find_map(|e| e.message.trade.as_ref().map(|t| t.price_in(&currency)))
        })
    } else {
        None
    };
    let parity_ok = proposers
        .iter()
        .enumerate()
        .all(|(i, p)| *p == PlayerId::for_turn_index(i as u32));
    Some(ProposalSeries {
        prices,
        proposers,
        accepted_price,
        parity_ok,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnchoringReport {
    /// (initial proposal, final accepted price) per accepted game.
    pub pairs: Vec<(u64, u64)>,
    /// Spearman correlation; `None` when degenerate (constant inputs or a
    /// single pair).
    pub rho: Option<f64>,
}

/// Relates the opening proposal to the final accepted price.
pub fn anchoring_probe(records: &[GameRecord]) -> Result<AnchoringReport, AnalysisError> {
    let mut pairs = Vec::new();
    for record in records {
        if let Some(series) = proposal_series(record) {
            if let (Some(&first), Some(accepted)) = (series.prices.first(), series.accepted_price) {
                pairs.push((first, accepted));
            }
        }
    }
    if pairs.is_empty() {
        return Err(AnalysisError::NoAcceptedSales);
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
    let rho = match spearman(&xs, &ys) {
        Ok(value) => Some(value),
        Err(AnalysisError::DegenerateInput) | Err(AnalysisError::LengthMismatch) => None,
        Err(e) => return Err(e),
    };
    Ok(AnchoringReport { pairs, rho })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitDifferenceReport {
    /// (midpoint of the two preceding proposals, next proposal), pooled
    /// across games. Midpoints are exact half-integers.
    pub pairs: Vec<(Rational, u64)>,
    pub rho: Option<f64>,
}

/// Relates each counter-proposal to the average of the two proposals
/// before it.
pub fn split_difference_probe(
    records: &[GameRecord],
) -> Result<SplitDifferenceReport, AnalysisError> {
    let mut pairs = Vec::new();
    for record in records {
        if let Some(series) = proposal_series(record) {
            if series.prices.len() < 3 {
                continue;
            }
            for t in 1..series.prices.len() - 1 {
                let midpoint = Rational::new((series.prices[t - 1] + series.prices[t]) as i64, 2);
                pairs.push((midpoint, series.prices[t + 1]));
            }
        }
    }
    if pairs.is_empty() {
        return Err(AnalysisError::NoEligibleSeries);
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.to_f64().unwrap()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
    let rho = match spearman(&xs, &ys) {
        Ok(value) => Some(value),
        Err(AnalysisError::DegenerateInput) | Err(AnalysisError::LengthMismatch) => None,
        Err(e) => return Err(e),
    };
    Ok(SplitDifferenceReport { pairs, rho })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadCounterofferReport {
    /// Games where the buyer countered above the seller's opening price.
    pub higher: u32,
    /// Games where the buyer made any counter-proposal.
    pub total: u32,
}

impl BadCounterofferReport {
    /// P(p1 < p2): the probability of a bad counter-offer.
    pub fn rate(&self) -> Rational {
        Rational::new(self.higher as i64, self.total as i64)
    }
}

/// How often the buyer's first counter-offer exceeds the seller's opening
/// proposal. Games where the buyer accepted immediately are excluded.
pub fn bad_counteroffer_rate(
    records: &[GameRecord],
) -> Result<BadCounterofferReport, AnalysisError> {
    let mut higher = 0;
    let mut total = 0;
    for record in records {
        if let Some(series) = proposal_series(record) {
            if series.prices.len() >= 2
                && series.proposers[0] == PlayerId::Red
                && series.proposers[1] == PlayerId::Blue
            {
                total += 1;
                if series.prices[1] > series.prices[0] {
                    higher += 1;
                }
            }
        }
    }
    if total == 0 {
        return Err(AnalysisError::EmptyDenominator);
    }
    Ok(BadCounterofferReport { higher, total })
}

/// Result of a game-generating sweep: the curve plus every record behind
/// it, so the numbers stay regenerable from disk.
#[derive(Debug)]
pub struct SweepRun {
    pub points: Vec<(u64, Rational)>,
    pub records: Vec<GameRecord>,
}

fn derive_seed(base: u64, major: u64, minor: u64) -> u64 {
    base ^ major.wrapping_mul(0x9e3779b97f4a7c15) ^ minor.wrapping_mul(0xc2b2ae3d27d4eb4f)
}

/// Estimates P(accept | amount = i) for a controlled proposer against
/// `decider`, i from 0 to `max_amount`, `trials` games per amount.
///
/// In the classical variant the decider plays seat 2 and the controlled
/// proposer opens with the offer; in the three-turn variant the decider
/// plays seat 1 and the controlled player 2 counter-proposes the amount.
pub fn acceptance_curve(
    decider: &AgentSpec,
    variant: ScenarioVariant,
    max_amount: u64,
    trials: u32,
    seed: u64,
) -> Result<SweepRun, AnalysisError> {
    if !matches!(
        variant,
        ScenarioVariant::UltimatumClassical | ScenarioVariant::UltimatumThreeTurn
    ) {
        return Err(AnalysisError::InvalidVariant);
    }
    if trials == 0 {
        return Err(AnalysisError::InvalidParams(
            "trials must be positive".into(),
        ));
    }
    let total = max_amount;
    let config = scenarios::build(
        ScenarioKind::Ultimatum,
        &ScenarioOverrides {
            variant: Some(variant),
            amount: Some(total),
            ..Default::default()
        },
        seed,
    )
    .map_err(|e| AnalysisError::InvalidParams(e.to_string()))?;

    let mut points = Vec::new();
    let mut records = Vec::new();
    for amount in 0..=max_amount {
        let controlled = match variant {
            // Seat 1 hands `amount` to the decider in seat 2.
            ScenarioVariant::UltimatumClassical => AgentSpec::scripted(
                "controlled-proposer",
                StrategySpec::FixedSequence {
                    moves: vec![ScriptedMove::propose(
                        ResourceBundle::from_pairs([("Dollars", amount)]),
                        ResourceBundle::new(),
                    )],
                },
            ),
            // Seat 2 counter-proposes so that the seat-1 decider keeps
            // `amount`.
            _ => AgentSpec::scripted(
                "controlled-proposer",
                StrategySpec::FixedSequence {
                    moves: vec![ScriptedMove::propose(
                        ResourceBundle::new(),
                        ResourceBundle::from_pairs([("Dollars", total - amount)]),
                    )],
                },
            ),
        };
        let pair = match variant {
            ScenarioVariant::UltimatumClassical => PerPlayer::new(controlled, decider.clone()),
            _ => PerPlayer::new(decider.clone(), controlled),
        };
        let mut accepted = 0u32;
        for trial in 0..trials {
            let record = engine::run(&config, &pair, derive_seed(seed, amount, trial as u64))?;
            if record.outcome.status == GameStatus::Accepted {
                accepted += 1;
            }
            records.push(record);
        }
        points.push((amount, Rational::new(accepted as i64, trials as i64)));
    }
    Ok(SweepRun { points, records })
}

/// Mean fraction of the endowment that ends up with player 1, for each
/// amount in `amounts`.
pub fn split_scaling_sweep(
    amounts: &[u64],
    agents: &PerPlayer<AgentSpec>,
    games_per_amount: u32,
    seed: u64,
) -> Result<SweepRun, AnalysisError> {
    if amounts.is_empty() {
        return Err(AnalysisError::EmptyAmounts);
    }
    if games_per_amount == 0 {
        return Err(AnalysisError::InvalidParams(
            "games must be positive".into(),
        ));
    }
    let mut points = Vec::new();
    let mut records = Vec::new();
    for (index, &amount) in amounts.iter().enumerate() {
        if amount == 0 {
            return Err(AnalysisError::InvalidParams(
                "amounts must be positive".into(),
            ));
        }
        let config = scenarios::build(
            ScenarioKind::Ultimatum,
            &ScenarioOverrides::amount(amount),
            seed,
        )
        .map_err(|e| AnalysisError::InvalidParams(e.to_string()))?;
        let mut share_sum = Rational::zero();
        for game in 0..games_per_amount {
            let record = engine::run(
                &config,
                agents,
                derive_seed(seed, index as u64, game as u64),
            )?;
            share_sum += record.outcome.payoffs.red / Rational::from_integer(amount as i64);
            records.push(record);
        }
        points.push((
            amount,
            share_sum / Rational::from_integer(games_per_amount as i64),
        ));
    }
    Ok(SweepRun { points, records })
}

/// Formats a rational for reports: exact, plus a decimal rendering.
pub fn format_rational(value: &Rational) -> String {
    let decimal = value
        .to_f64()
        .map(|v| format!("{v:.4}"))
        .unwrap_or_default();
    if value.is_integer() {
        format!("{}", value.numer())
    } else {
        format!("{}/{} ({decimal})", value.numer(), value.denom())
    }
}

/// Sign helper used by report code; exact zero maps to "0".
pub fn format_rho(rho: &Option<f64>) -> String {
    match rho {
        Some(v) => format!("{v:.6}"),
        None => "NA (degenerate)".to_string(),
    }
}
