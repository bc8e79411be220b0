//! Acceptance suite: one test per criterion, each printing a PASS line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use haggle::agents::{self, AgentSpec, ScriptedMove, StrategySpec};
use haggle::analysis;
use haggle::engine;
use haggle::harness::{self, ExperimentName, TournamentPlan};
use haggle::outcome::GameStatus;
use haggle::player::{PerPlayer, PlayerId};
use haggle::protocol::{
    self, Decision, PlayerNames, ProtocolError, StructuredMessage, TurnEcho, VisibilityPolicy,
};
use haggle::records::{self, GameRecord};
use haggle::resources::ResourceBundle;
use haggle::scenarios::{self, BehaviorKind, ScenarioKind, ScenarioOverrides, ScenarioVariant};
use haggle::trade::Trade;
use haggle::Rational;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::time::Instant;

fn vocab(names: &[&str]) -> BTreeSet<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn default_names() -> PlayerNames {
    PlayerNames::default()
}

/// Deterministic generator of valid structured messages.
fn random_message(rng: &mut ChaCha8Rng) -> StructuredMessage {
    let resources = ["X", "Y", "ZUP"];
    let player = if rng.gen_bool(0.5) {
        PlayerId::Red
    } else {
        PlayerId::Blue
    };
    let current = rng.gen_range(1..=10u32);
    let mut msg = StructuredMessage::bare(player, current, current + rng.gen_range(0..=8u32));
    let random_bundle = |rng: &mut ChaCha8Rng, allow_empty: bool| {
        let mut bundle = ResourceBundle::new();
        let count = if allow_empty {
            rng.gen_range(0..=3usize)
        } else {
            rng.gen_range(1..=3usize)
        };
        for _ in 0..count {
            let name = resources[rng.gen_range(0..resources.len())];
            bundle.add(name, rng.gen_range(1..=500u64));
        }
        bundle
    };
    let random_text = |rng: &mut ChaCha8Rng| {
        let words = [
            "offer",
            "deal",
            "fair",
            "zup",
            "final",
            "think",
            "resources",
        ];
        let n = rng.gen_range(1..=5usize);
        (0..n)
            .map(|_| words[rng.gen_range(0..words.len())])
            .collect::<Vec<_>>()
            .join(" ")
    };
    if rng.gen_bool(0.7) {
        msg.resources_echo = Some(random_bundle(rng, true));
    }
    if rng.gen_bool(0.6) {
        msg.goal_echo = Some(random_text(rng));
    }
    if rng.gen_bool(0.6) {
        msg.reasoning = Some(random_text(rng));
    }
    if rng.gen_bool(0.6) {
        msg.public_text = Some(random_text(rng));
    }
    if rng.gen_bool(0.5) {
        msg.trade = Some(Trade::new(
            random_bundle(rng, true),
            random_bundle(rng, true),
            player,
        ));
        msg.decision = Decision::Propose;
    } else {
        msg.decision = match rng.gen_range(0..3u8) {
            0 => Decision::Accept,
            1 => Decision::Reject,
            _ => Decision::None,
        };
    }
    msg
}

#[test]
fn criterion_01_protocol_round_trip_and_error_classification() {
    let start = Instant::now();
    let vocab = vocab(&["X", "Y", "ZUP"]);
    let names = default_names();
    let mut rng = ChaCha8Rng::seed_from_u64(20240101);

    for i in 0..1000 {
        let msg = random_message(&mut rng);
        assert_eq!(msg.validate(), Ok(()), "generator produced invalid msg {i}");
        let rendered = protocol::render_message(&msg);
        let parsed = protocol::parse_message(&rendered, &vocab, &names)
            .unwrap_or_else(|e| panic!("round trip {i} failed to parse: {e}"));
        assert_eq!(parsed.message, msg, "round trip {i} lost information");
        assert!(parsed.warnings.is_empty(), "round trip {i} warned");
    }

    // 100 mutated-invalid texts, each classified as exactly one error.
    let base = |body: &str| format!("<player-name> RED </player-name>\n<turn> 2/8 </turn>\n{body}");
    type ErrorClass = fn(&ProtocolError) -> bool;
    let mutations: Vec<(String, ErrorClass)> = vec![
        ("<turn> 2/8 </turn>".to_string(), |e| {
            matches!(
                e,
                ProtocolError::MissingRequiredTag {
                    tag: "player-name",
                    ..
                }
            )
        }),
        ("<player-name> RED </player-name>".to_string(), |e| {
            matches!(e, ProtocolError::MissingRequiredTag { tag: "turn", .. })
        }),
        (
            "<player-name> PURPLE </player-name><turn> 2/8 </turn>".to_string(),
            |e| {
                matches!(
                    e,
                    ProtocolError::MissingRequiredTag {
                        tag: "player-name",
                        ..
                    }
                )
            },
        ),
        (
            "<player-name> RED </player-name><turn> 0/8 </turn>".to_string(),
            |e| matches!(e, ProtocolError::MissingRequiredTag { tag: "turn", .. }),
        ),
        (
            "<player-name> RED </player-name><turn> 9/8 </turn>".to_string(),
            |e| matches!(e, ProtocolError::MissingRequiredTag { tag: "turn", .. }),
        ),
        (
            base("<trade> Player RED Gives X: 3.5 | Player BLUE Gives nothing </trade>"),
            |e| matches!(e, ProtocolError::NonIntegerQuantity { .. }),
        ),
        (
            base("<trade> Player RED Gives X: -2 | Player BLUE Gives nothing </trade>"),
            |e| matches!(e, ProtocolError::NonIntegerQuantity { .. }),
        ),
        (
            base("<trade> Player RED Gives Gold: 3 | Player BLUE Gives nothing </trade>"),
            |e| matches!(e, ProtocolError::UnknownResource { .. }),
        ),
        (base("<trade> Player RED Gives X: 3 </trade>"), |e| {
            matches!(e, ProtocolError::MalformedTrade(_))
        }),
        (
            base("<trade> Player RED Gives X: 3 | Player RED Gives Y: 1 </trade>"),
            |e| matches!(e, ProtocolError::MalformedTrade(_)),
        ),
        (
            base("<trade> Somebody Gives X: 3 | Player BLUE Gives nothing </trade>"),
            |e| matches!(e, ProtocolError::MalformedTrade(_)),
        ),
        (
            base("<trade> Player GREEN Gives X: 3 | Player BLUE Gives nothing </trade>"),
            |e| matches!(e, ProtocolError::MalformedTrade(_)),
        ),
        (
            base("<trade> Player RED Gives X: lots | Player BLUE Gives nothing </trade>"),
            |e| matches!(e, ProtocolError::MalformedTrade(_)),
        ),
        (
            base(
                "<trade> Player RED Gives X: 1 | Player BLUE Gives nothing </trade>\
                 <answer> ACCEPT </answer>",
            ),
            |e| matches!(e, ProtocolError::ConflictingDecision),
        ),
    ];
    let mut checked = 0;
    let mut index = 0;
    while checked < 100 {
        let (text, matches_class) = &mutations[index % mutations.len()];
        let err =
            protocol::parse_message(text, &vocab, &names).expect_err("mutated text must not parse");
        assert!(
            matches_class(&err),
            "mutation {index} classified unexpectedly: {err:?}"
        );
        checked += 1;
        index += 1;
    }

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 5.0,
        "criterion 1 took {elapsed:?}, budget is 5 s"
    );
    println!("PASS criterion 1: 1000 round trips + 100 classified rejections in {elapsed:?}");
}

#[test]
fn criterion_02_privacy_filter_hides_sentinel_reasoning() {
    let config = scenarios::build(ScenarioKind::Ultimatum, &Default::default(), 0).unwrap();
    for game in 0..100u64 {
        let red_sentinel = format!("RED-SECRET-{game}-swordfish");
        let blue_sentinel = format!("BLUE-SECRET-{game}-albatross");
        let pair = PerPlayer::new(
            AgentSpec::scripted(
                "p1",
                StrategySpec::FixedSequence {
                    moves: vec![ScriptedMove::propose(
                        ResourceBundle::from_pairs([("Dollars", 40)]),
                        ResourceBundle::new(),
                    )
                    .with_reasoning(red_sentinel.clone())
                    .with_public_text("take it or leave it")],
                },
            ),
            AgentSpec::scripted(
                "p2",
                StrategySpec::FixedSequence {
                    moves: vec![ScriptedMove::accept().with_reasoning(blue_sentinel.clone())],
                },
            ),
        );
        let record = engine::run(&config, &pair, game).unwrap();
        assert_eq!(record.outcome.status, GameStatus::Accepted);
        for entry in &record.transcript {
            assert!(!entry.forwarded_text.contains(&red_sentinel));
            assert!(!entry.forwarded_text.contains(&blue_sentinel));
        }
        // The chat view each side sees never contains the opponent's
        // sentinel.
        let state = engine::replay(&record.config, record.seed, &record.transcript).unwrap();
        for msg in state.conversation_view(PlayerId::Red) {
            assert!(!msg.content.contains(&blue_sentinel));
        }
        for msg in state.conversation_view(PlayerId::Blue) {
            assert!(!msg.content.contains(&red_sentinel));
        }
    }
    println!("PASS criterion 2: no sentinel leaked across 100 games");
}

#[test]
fn criterion_03_impossible_trade_rejected_forfeit_and_conservation() {
    // The printed impossible-trade instance, names mapped to seats.
    let names = PlayerNames {
        red: "GPT-3.5".into(),
        blue: "Claude-2.1".into(),
    };
    let raw = "<player-name> GPT-3.5 </player-name>\n<turn> 1/8 </turn>\n\
               <trade> Player GPT-3.5 Gives Dollars: 30 | Player Claude-2.1 Gives Dollars: 10 </trade>";
    let parsed = protocol::parse_message(raw, &vocab(&["Dollars"]), &names).unwrap();
    let trade = parsed.message.trade.expect("trade parsed");
    let holdings = PerPlayer::new(
        ResourceBundle::from_pairs([("Dollars", 100)]),
        ResourceBundle::new(),
    );
    assert!(!trade.is_feasible(&holdings), "BLUE holds no Dollars");

    // Engine path: the proposer insists on the impossible trade and
    // forfeits after the retry budget.
    let config = scenarios::build(ScenarioKind::Ultimatum, &Default::default(), 0).unwrap();
    let impossible = ScriptedMove::propose(
        ResourceBundle::from_pairs([("Dollars", 30)]),
        ResourceBundle::from_pairs([("Dollars", 10)]),
    );
    let pair = PerPlayer::new(
        AgentSpec::scripted(
            "stubborn",
            StrategySpec::FixedSequence {
                moves: vec![impossible.clone(), impossible.clone(), impossible],
            },
        ),
        AgentSpec::scripted("other", StrategySpec::RationalUltimatum),
    );
    let record = engine::run(&config, &pair, 0).unwrap();
    assert_eq!(
        record.outcome.status,
        GameStatus::Forfeit { by: PlayerId::Red }
    );
    assert_eq!(record.outcome.winner, haggle::outcome::Winner::Blue);

    // Conservation over 1000 random feasible applications.
    let resources = ["X", "Y", "Z"];
    let mut rng = StdRng::seed_from_u64(99);
    for _ in 0..1000 {
        let mut red = ResourceBundle::new();
        let mut blue = ResourceBundle::new();
        for name in resources {
            red.set(name, rng.gen_range(0..50));
            blue.set(name, rng.gen_range(0..50));
        }
        let mut from_red = ResourceBundle::new();
        let mut from_blue = ResourceBundle::new();
        for name in resources {
            from_red.set(name, rng.gen_range(0..=red.get(name)));
            from_blue.set(name, rng.gen_range(0..=blue.get(name)));
        }
        let holdings = PerPlayer::new(red, blue);
        let trade = Trade::new(from_red, from_blue, PlayerId::Red);
        assert!(trade.is_feasible(&holdings));
        let after = trade.apply(&holdings).unwrap();
        for name in resources {
            assert_eq!(
                holdings.red.get(name) + holdings.blue.get(name),
                after.red.get(name) + after.blue.get(name),
                "resource {name} not conserved"
            );
        }
    }
    println!("PASS criterion 3: impossible trade rejected, forfeit path runs, conservation holds");
}

fn split_difference_pair() -> PerPlayer<AgentSpec> {
    PerPlayer::new(
        AgentSpec::scripted(
            "seller",
            StrategySpec::SplitDifference {
                anchor: 100,
                accept_threshold: 5,
            },
        ),
        AgentSpec::scripted(
            "buyer",
            StrategySpec::SplitDifference {
                anchor: 20,
                accept_threshold: 5,
            },
        ),
    )
}

/// Seller/buyer config with buyer head-room for counterfactual price
/// raises; prices and payoff logic are unaffected by the larger budget.
fn oracle_game_config() -> scenarios::ScenarioConfig {
    let overrides = ScenarioOverrides {
        endowments: Some(PerPlayer::new(
            ResourceBundle::from_pairs([("X", 1)]),
            ResourceBundle::from_pairs([("ZUP", 200)]),
        )),
        ..Default::default()
    };
    scenarios::build(ScenarioKind::SellerBuyer, &overrides, 0).unwrap()
}

fn prices_of(record: &GameRecord) -> Vec<u64> {
    record
        .transcript
        .iter()
        .filter_map(|e| e.message.trade.as_ref())
        .map(|t| t.price_in("ZUP"))
        .collect()
}

#[test]
fn criterion_04_split_difference_oracle_game_is_exact_and_deterministic() {
    let config = oracle_game_config();
    let pair = split_difference_pair();
    let reference = engine::run(&config, &pair, 4).unwrap();
    assert_eq!(prices_of(&reference), vec![100, 20, 60, 40, 50, 45]);
    let last = reference.transcript.last().unwrap();
    assert_eq!(last.player, PlayerId::Red, "the seller accepts");
    assert_eq!(last.message.decision, Decision::Accept);
    assert_eq!(reference.outcome.status, GameStatus::Accepted);
    assert_eq!(reference.outcome.final_holdings.red.get("ZUP"), 45);

    let reference_bytes = reference.to_bytes();
    for rerun in 0..100 {
        let record = engine::run(&config, &pair, 4).unwrap();
        assert_eq!(record.to_bytes(), reference_bytes, "rerun {rerun} diverged");
    }
    println!("PASS criterion 4: proposal sequence 100, 20, 60, 40, 50, 45 accepted at 45, stable over 100 reruns");
}

#[test]
fn criterion_05_rational_ultimatum_payoffs() {
    let classical = scenarios::build(
        ScenarioKind::Ultimatum,
        &ScenarioOverrides::variant(ScenarioVariant::UltimatumClassical),
        0,
    )
    .unwrap();
    let rational_pair = PerPlayer::new(
        AgentSpec::scripted("r1", StrategySpec::RationalUltimatum),
        AgentSpec::scripted("r2", StrategySpec::RationalUltimatum),
    );
    let record = engine::run(&classical, &rational_pair, 0).unwrap();
    assert_eq!(record.outcome.payoffs.red, Rational::from_integer(99));
    assert_eq!(record.outcome.payoffs.blue, Rational::from_integer(1));

    let three_turn = scenarios::build(
        ScenarioKind::Ultimatum,
        &ScenarioOverrides {
            variant: Some(ScenarioVariant::UltimatumThreeTurn),
            amount: Some(10),
            ..Default::default()
        },
        0,
    )
    .unwrap();
    let record = engine::run(&three_turn, &rational_pair, 0).unwrap();
    assert_eq!(record.outcome.payoffs.red, Rational::from_integer(1));
    assert_eq!(record.outcome.payoffs.blue, Rational::from_integer(9));
    println!("PASS criterion 5: classical (99, 1); three-turn on 10 units (1, 9)");
}

#[test]
fn criterion_06_acceptance_curve_pipeline() {
    let rational = AgentSpec::scripted("rational", StrategySpec::RationalUltimatum);
    let run = analysis::acceptance_curve(&rational, ScenarioVariant::UltimatumClassical, 10, 20, 7)
        .unwrap();
    for (amount, fraction) in &run.points {
        let expected = if *amount == 0 {
            Rational::from_integer(0)
        } else {
            Rational::from_integer(1)
        };
        assert_eq!(fraction, &expected, "rational decider at {amount}");
    }

    let fairness = AgentSpec::scripted(
        "fair",
        StrategySpec::FairnessThreshold {
            tau: Rational::new(3, 10),
        },
    );
    let run = analysis::acceptance_curve(&fairness, ScenarioVariant::UltimatumClassical, 10, 20, 7)
        .unwrap();
    for (amount, fraction) in &run.points {
        let expected = if *amount >= 3 {
            Rational::from_integer(1)
        } else {
            Rational::from_integer(0)
        };
        assert_eq!(fraction, &expected, "fairness decider at {amount}");
    }
    println!("PASS criterion 6: rational curve steps at 1, fairness (tau=0.3) curve steps at 3, 20 trials each");
}

/// Independent oracle for criterion 7: simulates the two concession
/// ladders and acceptance rules directly, with no engine or agent code.
fn anchoring_oracle_final_price(seller_anchor: u64) -> u64 {
    // Planned ladders, rounded toward the reservation.
    let seller_plan = |k: u64| -> u64 {
        let exact_num = seller_anchor as i128 * 4 - k as i128 * (seller_anchor as i128 - 40);
        let clamped = exact_num.max(40 * 4);
        (clamped / 4) as u64 // floor toward the lower reservation
    };
    let buyer_plan = |k: u64| -> u64 {
        let exact_num = 20 * 10 + k as i128 * 9 * (150 - 20);
        let clamped = exact_num.min(150 * 10);
        ((clamped + 9) / 10) as u64 // ceil toward the higher reservation
    };
    let mut incoming: Option<u64> = None;
    let mut seller_k = 0;
    let mut buyer_k = 0;
    for turn in 0..20 {
        let seller_turn = turn % 2 == 0;
        if seller_turn {
            let planned = seller_plan(seller_k);
            if let Some(p) = incoming {
                if p >= planned {
                    return p;
                }
            }
            incoming = Some(planned);
            seller_k += 1;
        } else {
            let planned = buyer_plan(buyer_k);
            if let Some(p) = incoming {
                if p <= planned {
                    return p;
                }
            }
            incoming = Some(planned);
            buyer_k += 1;
        }
    }
    panic!("oracle game did not terminate");
}

#[test]
fn criterion_07_anchoring_pipeline_is_strictly_increasing_with_rho_one() {
    let dir = tempfile::tempdir().unwrap();
    harness::run_experiment(
        ExperimentName::Anchoring,
        &Default::default(),
        1,
        dir.path(),
    )
    .unwrap();
    let records = harness::load_records(dir.path()).unwrap();
    let report = analysis::anchoring_probe(&records).unwrap();

    let mut pairs = report.pairs.clone();
    pairs.sort();
    let anchors: Vec<u64> = (60..=140).step_by(10).collect();
    assert_eq!(pairs.len(), anchors.len());
    let mut previous = 0;
    for (&(p1, p_final), anchor) in pairs.iter().zip(&anchors) {
        assert_eq!(p1, *anchor);
        assert_eq!(
            p_final,
            anchoring_oracle_final_price(*anchor),
            "final price for anchor {anchor} differs from the recurrence oracle"
        );
        assert!(p_final > previous, "final prices must strictly increase");
        previous = p_final;
    }
    assert_eq!(report.rho, Some(1.0), "rho must be exactly 1.0");
    println!(
        "PASS criterion 7: anchor sweep 60..140 strictly increasing, spearman rho = 1.0 exactly"
    );
}

/// Brute-force oracle: rank with averaged ties, then plain Pearson in f64.
fn spearman_oracle(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(values: &[f64]) -> Vec<f64> {
        let n = values.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let mut out = vec![0.0; n];
        let mut lo = 0;
        while lo < n {
            let mut hi = lo;
            while hi + 1 < n && values[order[hi + 1]] == values[order[lo]] {
                hi += 1;
            }
            let rank = (lo + hi) as f64 / 2.0 + 1.0;
            for &i in &order[lo..=hi] {
                out[i] = rank;
            }
            lo = hi + 1;
        }
        out
    }
    let rx = ranks(x);
    let ry = ranks(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    cov / (vx * vy).sqrt()
}

#[test]
fn criterion_08_statistics_match_independent_oracles() {
    let mut rng = StdRng::seed_from_u64(123);
    for case in 0..100 {
        let n = rng.gen_range(2..=50usize);
        // Draw from a small integer range so ties actually occur.
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0..30) as f64).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(0..30) as f64).collect();
        let ours = analysis::spearman(&x, &y);
        let constant = |v: &[f64]| v.iter().all(|a| *a == v[0]);
        if constant(&x) || constant(&y) {
            assert!(matches!(
                ours,
                Err(analysis::AnalysisError::DegenerateInput)
            ));
            continue;
        }
        let expected = spearman_oracle(&x, &y);
        let got = ours.unwrap();
        assert!(
            (got - expected).abs() < 1e-12,
            "case {case}: spearman {got} vs oracle {expected}"
        );
    }

    // Exact binomial check: (45 + 10 + 1) / 1024.
    let p = analysis::binomial_test_one_tailed(8, 10, 0.5).unwrap();
    assert!((p - 56.0 / 1024.0).abs() < 1e-9);
    println!("PASS criterion 8: spearman within 1e-12 of brute force on 100 vectors; binomial(8,10,0.5) = 56/1024");
}

#[test]
fn criterion_09_persistence_round_trip_counterfactual_and_atomicity() {
    // 500 scripted records: save, load, deep equality.
    let dir = tempfile::tempdir().unwrap();
    let config = scenarios::build(ScenarioKind::Ultimatum, &Default::default(), 0).unwrap();
    for i in 0..500u64 {
        let pair = PerPlayer::new(
            AgentSpec::scripted(
                "p1",
                StrategySpec::FixedSequence {
                    moves: vec![ScriptedMove::propose(
                        ResourceBundle::from_pairs([("Dollars", 1 + (i % 99))]),
                        ResourceBundle::new(),
                    )],
                },
            ),
            AgentSpec::scripted(
                "p2",
                StrategySpec::FixedSequence {
                    moves: vec![ScriptedMove::accept()],
                },
            ),
        );
        let record = engine::run(&config, &pair, i).unwrap();
        let path = dir.path().join(format!("rec_{i:03}.json"));
        record.save(&path).unwrap();
        let loaded = GameRecord::load(&path).unwrap();
        assert_eq!(loaded, record, "record {i} changed across save/load");
    }

    // Counterfactual: edit the oracle game's opening 100 -> 120 and let
    // the split-the-difference agents finish. Hand-recomputed recurrence:
    // 120, 20, 70, 45, 58, 51, 55, then the buyer accepts 55.
    let config = oracle_game_config();
    let pair = split_difference_pair();
    let parent = engine::run(&config, &pair, 4).unwrap();
    let mut replacement = parent.transcript[0].message.clone();
    replacement.trade = Some(Trade::new(
        ResourceBundle::from_pairs([("X", 1)]),
        ResourceBundle::from_pairs([("ZUP", 120)]),
        PlayerId::Red,
    ));
    let derived =
        records::counterfactual_rerun(&parent, 0, &replacement, &parent.agents, parent.seed)
            .unwrap();
    assert_eq!(prices_of(&derived), vec![120, 20, 70, 45, 58, 51, 55]);
    assert_eq!(derived.outcome.status, GameStatus::Accepted);
    assert_eq!(derived.outcome.final_holdings.red.get("ZUP"), 55);
    assert_eq!(
        derived.parent.as_ref().map(|p| p.edited_turn),
        Some(0),
        "derived records carry provenance"
    );

    // Interrupted write: a crash between temp write and rename leaves the
    // old document intact and nothing partial at the target.
    let target = dir.path().join("atomic.json");
    parent.save(&target).unwrap();
    let before = std::fs::read(&target).unwrap();
    {
        // Simulate dying mid-write: bytes reach a temp file, never the
        // target.
        let mut tmp = tempfile::NamedTempFile::new_in(dir.path()).unwrap();
        use std::io::Write;
        tmp.write_all(&derived.to_bytes()[..40]).unwrap();
        // dropped without persist
    }
    assert_eq!(std::fs::read(&target).unwrap(), before);
    let leftovers: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().map(|x| x != "json").unwrap_or(true))
        .collect();
    assert!(leftovers.is_empty(), "temp files must not linger");
    // A failing rename (target occupied by a directory) reports an error
    // and never truncates or partially writes.
    let blocked = dir.path().join("blocked.json");
    std::fs::create_dir(&blocked).unwrap();
    std::fs::write(blocked.join("keep"), b"x").unwrap();
    assert!(parent.save(&blocked).is_err());
    assert!(blocked.join("keep").exists());
    println!("PASS criterion 9: 500 round trips, counterfactual 120 -> final 55, atomic writes");
}

#[test]
fn criterion_10_tournament_determinism_and_scale() {
    let start = Instant::now();

    let plans: Vec<TournamentPlan> = vec![
        TournamentPlan {
            scenario: scenarios::build(ScenarioKind::ResourceExchange, &Default::default(), 0)
                .unwrap(),
            agents: vec![
                AgentSpec::scripted(
                    "trader-a",
                    StrategySpec::FixedSequence {
                        moves: vec![
                            ScriptedMove::propose(
                                ResourceBundle::from_pairs([("X", 2)]),
                                ResourceBundle::from_pairs([("Y", 3)]),
                            ),
                            ScriptedMove::accept(),
                        ],
                    },
                ),
                AgentSpec::scripted(
                    "trader-b",
                    StrategySpec::FixedSequence {
                        moves: vec![
                            ScriptedMove::propose(
                                ResourceBundle::from_pairs([("Y", 1)]),
                                ResourceBundle::from_pairs([("X", 1)]),
                            ),
                            ScriptedMove::accept(),
                        ],
                    },
                ),
            ],
            games_per_pair: 10,
            base_seed: 11,
            parallelism: Some(4),
        },
        TournamentPlan {
            scenario: scenarios::build(ScenarioKind::Ultimatum, &Default::default(), 0).unwrap(),
            agents: vec![
                AgentSpec::scripted("rational", StrategySpec::RationalUltimatum),
                AgentSpec::scripted(
                    "lenient",
                    StrategySpec::FairnessThreshold {
                        tau: Rational::new(1, 100),
                    },
                ),
            ],
            games_per_pair: 10,
            base_seed: 22,
            parallelism: Some(4),
        },
        TournamentPlan {
            scenario: scenarios::build(ScenarioKind::SellerBuyer, &Default::default(), 0).unwrap(),
            agents: vec![
                AgentSpec::scripted(
                    "high-anchor",
                    StrategySpec::SplitDifference {
                        anchor: 100,
                        accept_threshold: 5,
                    },
                ),
                AgentSpec::scripted(
                    "low-anchor",
                    StrategySpec::SplitDifference {
                        anchor: 30,
                        accept_threshold: 5,
                    },
                ),
            ],
            games_per_pair: 10,
            base_seed: 33,
            parallelism: Some(4),
        },
    ];

    for plan in &plans {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let report_a = harness::run_tournament(plan, dir_a.path()).unwrap();
        let report_b = harness::run_tournament(plan, dir_b.path()).unwrap();
        assert!(report_a.aborted.is_empty());
        assert_eq!(report_a.records_written, 40, "4 ordered pairs x 10 seeds");
        assert_eq!(report_a.summary, report_b.summary);
        for file in [
            "summary.txt",
            "manifest.jsonl",
            "win_rate_player1.csv",
            "win_rate_player2.csv",
            "payoff_player1.csv",
            "payoff_player2.csv",
        ] {
            assert_eq!(
                std::fs::read(dir_a.path().join(file)).unwrap(),
                std::fs::read(dir_b.path().join(file)).unwrap(),
                "{file} differs between identical runs"
            );
        }
        // The analyze pipeline reproduces the summary byte for byte from
        // the saved records alone.
        let outputs = harness::analyze_dir(dir_a.path()).unwrap();
        assert_eq!(outputs.summary, report_a.summary);
        assert_eq!(
            outputs.summary,
            std::fs::read_to_string(dir_a.path().join("summary.txt")).unwrap()
        );
    }

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 5.0,
        "criterion 10 took {elapsed:?}, budget is 5 s"
    );
    println!(
        "PASS criterion 10: 3 scenarios x 2 agents x 10 seeds deterministic, analyze reproduces summaries, in {elapsed:?}"
    );
}

#[test]
fn criterion_11_prompt_fidelity() {
    let expected: [(BehaviorKind, ScenarioKind, &str); 6] = [
        (
            BehaviorKind::Cunning,
            ScenarioKind::ResourceExchange,
            "You are cunning and sly in your plan to get more resources. Humiliate your opponent as much as possible. Insult them.",
        ),
        (
            BehaviorKind::Cunning,
            ScenarioKind::Ultimatum,
            "You are cunning and sly in your plan to get more than your opponent. Humiliate your opponent as much as possible. Insult them.",
        ),
        (
            BehaviorKind::Cunning,
            ScenarioKind::SellerBuyer,
            "You are cunning and sly in your plan to spend less ZUP. Humiliate your opponent as much as possible. Insult them.",
        ),
        (
            BehaviorKind::Desperate,
            ScenarioKind::ResourceExchange,
            "You must fake being desperate. Supplicate and beg to get more resources.",
        ),
        (
            BehaviorKind::Desperate,
            ScenarioKind::Ultimatum,
            "You must fake being desperate. Supplicate and beg to get more dollars.",
        ),
        (
            BehaviorKind::Desperate,
            ScenarioKind::SellerBuyer,
            "You must fake being desperate. Supplicate and beg to spend less ZUP.",
        ),
    ];
    for (behavior, kind, text) in expected {
        assert_eq!(
            agents::behavior_prompt(behavior, kind),
            text,
            "behavior string for {behavior:?} in {kind:?} must match byte for byte"
        );
        // And it lands verbatim in a rendered system prompt.
        let overrides = ScenarioOverrides {
            behaviors: Some(PerPlayer::new(None, Some(behavior))),
            ..Default::default()
        };
        let config = scenarios::build(kind, &overrides, 0).unwrap();
        let prompt = scenarios::render_system_prompt(&config, PlayerId::Blue);
        assert!(prompt.contains(text));
    }

    // Valuation secrecy sentinels.
    let config = scenarios::build(ScenarioKind::SellerBuyer, &Default::default(), 0).unwrap();
    let seller_prompt = scenarios::render_system_prompt(&config, PlayerId::Red);
    let buyer_prompt = scenarios::render_system_prompt(&config, PlayerId::Blue);
    let cost_sentinel = "It costed X: 40 ZUP to produce the resources.";
    let willingness_sentinel = "willing to pay at most 60 ZUP";
    assert!(seller_prompt.contains(cost_sentinel));
    assert!(!seller_prompt.contains(willingness_sentinel));
    assert!(buyer_prompt.contains(willingness_sentinel));
    assert!(!buyer_prompt.contains(cost_sentinel));
    println!("PASS criterion 11: six behavior strings byte-match; valuations never cross prompts");
}

mod mock_backend {
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::mpsc;

    /// Minimal HTTP server answering `responses` in order and forwarding
    /// each request body.
    pub fn spawn(responses: Vec<(u16, String)>) -> (String, mpsc::Receiver<serde_json::Value>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for (status, body) in responses {
                let (mut stream, _) = match listener.accept() {
                    Ok(s) => s,
                    Err(_) => return,
                };
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut content_length = 0usize;
                loop {
                    let mut line = String::new();
                    if reader.read_line(&mut line).is_err() || line.trim().is_empty() {
                        break;
                    }
                    let lower = line.to_ascii_lowercase();
                    if let Some(rest) = lower.strip_prefix("content-length:") {
                        content_length = rest.trim().parse().unwrap_or(0);
                    }
                }
                let mut body_bytes = vec![0u8; content_length];
                reader.read_exact(&mut body_bytes).unwrap();
                if let Ok(parsed) = serde_json::from_slice(&body_bytes) {
                    let _ = tx.send(parsed);
                }
                let reply = format!(
                    "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                    body.len()
                );
                let _ = stream.write_all(reply.as_bytes());
            }
        });
        (format!("http://{addr}"), rx)
    }

    pub fn completion(text: &str) -> (u16, String) {
        (
            200,
            serde_json::json!({
                "choices": [{ "message": { "role": "assistant", "content": text } }]
            })
            .to_string(),
        )
    }
}

#[test]
fn criterion_12_live_mode_smoke() {
    // One seller/buyer game against a chat-completion backend. Without
    // credentials this runs against a local mock that speaks the same
    // schema; with HAGGLE_LIVE_ENDPOINT (and optional HAGGLE_LIVE_MODEL,
    // HAGGLE_LIVE_KEY_ENV) it exercises the real endpoint instead.
    let live_endpoint = std::env::var("HAGGLE_LIVE_ENDPOINT").ok();

    let config = scenarios::build(ScenarioKind::SellerBuyer, &Default::default(), 0).unwrap();
    let (endpoint, requests) = match &live_endpoint {
        Some(endpoint) => (endpoint.clone(), None),
        None => {
            let seller_reply = "\
<player-name> RED </player-name>\n<turn> 1/10 </turn>\n\
<message> Asking 60 ZUP. </message>\n\
<trade> Player RED Gives X: 1 | Player BLUE Gives ZUP: 60 </trade>\n";
            let buyer_reply = "\
<player-name> BLUE </player-name>\n<turn> 1/10 </turn>\n\
<answer> ACCEPT </answer>\n";
            let (endpoint, rx) = mock_backend::spawn(vec![
                mock_backend::completion(seller_reply),
                mock_backend::completion(buyer_reply),
            ]);
            (endpoint, Some(rx))
        }
    };

    let model = std::env::var("HAGGLE_LIVE_MODEL").unwrap_or_else(|_| "test-model".into());
    let llm = |id: &str| AgentSpec {
        id: id.into(),
        backend: haggle::agents::AgentBackend::Llm {
            params: haggle::agents::LlmParams {
                endpoint: endpoint.clone(),
                model: model.clone(),
                temperature: 0.7,
                max_tokens: 400,
                api_key_env: std::env::var("HAGGLE_LIVE_KEY_ENV").ok(),
                timeout_secs: 60,
                retry_budget: 2,
                backoff_base_ms: 10,
            },
        },
        behavior: None,
    };
    let pair = PerPlayer::new(llm("seller-llm"), llm("buyer-llm"));
    match engine::run(&config, &pair, 0) {
        Ok(record) => {
            assert!(!record.transcript.is_empty());
            println!(
                "live smoke: game completed with status {:?}",
                record.outcome.status
            );
        }
        Err(engine::EngineError::AgentBackend { source, .. }) => {
            // A classified backend failure is an acceptable smoke outcome.
            println!("live smoke: classified backend error: {source}");
        }
        Err(other) => panic!("unclassified failure: {other}"),
    }

    if let Some(rx) = requests {
        // The outgoing requests carried the paper defaults.
        let mut seen = 0;
        while let Ok(body) = rx.try_recv() {
            assert_eq!(body["temperature"], 0.7);
            assert_eq!(body["max_tokens"], 400);
            assert_eq!(body["model"], "test-model");
            seen += 1;
        }
        assert_eq!(seen, 2, "both agents must have spoken to the backend");
    }

    // Unreachable endpoints classify rather than hang or panic.
    let port = {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        listener.local_addr().unwrap().port()
    };
    let mut dead = llm("dead");
    if let haggle::agents::AgentBackend::Llm { params } = &mut dead.backend {
        params.endpoint = format!("http://127.0.0.1:{port}");
        params.backoff_base_ms = 1;
    }
    let pair = PerPlayer::new(dead, llm("buyer-llm-2"));
    match engine::run(&config, &pair, 0) {
        Err(engine::EngineError::AgentBackend { player, source }) => {
            assert_eq!(player, PlayerId::Red);
            assert!(matches!(
                source,
                haggle::agents::AgentError::BackendTimeout { .. }
            ));
        }
        other => panic!("expected classified backend failure, got {other:?}"),
    }
    println!("PASS criterion 12: smoke game ran with temperature 0.7 / 400 max tokens; failures classify");
}

/// Spec-level invariant that spans modules: every turn echo in the oracle
/// game satisfies 1 <= current <= max.
#[test]
fn turn_echo_invariant_holds_in_engine_games() {
    let config = oracle_game_config();
    let record = engine::run(&config, &split_difference_pair(), 4).unwrap();
    for entry in &record.transcript {
        let TurnEcho { current, max } = entry.message.turn_echo;
        assert!(current >= 1 && current <= max);
    }
    // Filter output always re-parses under the standard policy.
    for entry in &record.transcript {
        let reparsed = protocol::parse_message(
            &entry.forwarded_text,
            &record.config.vocab(),
            &default_names(),
        )
        .unwrap();
        assert_eq!(reparsed.message.reasoning, None);
        assert_eq!(reparsed.message.resources_echo, None);
    }
    let _ = VisibilityPolicy::standard();
}
