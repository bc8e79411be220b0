//! Compact agent descriptors for the command line.
//!
//! Forms accepted:
//!
//! * `@path.json` — a full [`AgentSpec`] JSON document.
//! * `scripted:<strategy>[:key=value,...]` where strategy is one of
//!   `rational_ultimatum`, `split_difference`, `anchor_concede`,
//!   `fairness`, `fixed`.
//! * `llm:model=<name>,endpoint=<url>[,key_env=VAR,temperature=0.7,...]`
//!
//! Every form takes optional `id=...` and `behavior=cunning|desperate`.

use haggle::agents::{AgentSpec, LlmParams, ScriptedMove, StrategySpec};
use haggle::outcome::rational_string;
use haggle::scenarios::BehaviorKind;
use std::collections::BTreeMap;

pub fn parse_agent_arg(arg: &str) -> Result<AgentSpec, String> {
    if let Some(path) = arg.strip_prefix('@') {
        let bytes = std::fs::read(path).map_err(|e| format!("{path}: {e}"))?;
        return serde_json::from_slice(&bytes).map_err(|e| format!("{path}: {e}"));
    }
    let (kind, rest) = arg.split_once(':').unwrap_or((arg, ""));
    match kind {
        "scripted" => parse_scripted(rest),
        "llm" => parse_llm(rest),
        other => Err(format!(
            "unknown agent kind {other:?}; use scripted:..., llm:... or @file.json"
        )),
    }
}

fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, found {part:?}"))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn take_u64(map: &mut BTreeMap<String, String>, key: &str) -> Result<Option<u64>, String> {
    map.remove(key)
        .map(|v| v.parse().map_err(|e| format!("{key}: {e}")))
        .transpose()
}

fn take_rational(
    map: &mut BTreeMap<String, String>,
    key: &str,
) -> Result<Option<haggle::Rational>, String> {
    map.remove(key)
        .map(|v| rational_string::parse(&v))
        .transpose()
}

fn finish(
    mut map: BTreeMap<String, String>,
    default_id: String,
    backend: haggle::agents::AgentBackend,
) -> Result<AgentSpec, String> {
    let id = map.remove("id").unwrap_or(default_id);
    let behavior = match map.remove("behavior") {
        Some(text) => {
            Some(BehaviorKind::parse(&text).ok_or_else(|| format!("unknown behavior {text:?}"))?)
        }
        None => None,
    };
    if let Some(stray) = map.keys().next() {
        return Err(format!("unknown parameter {stray:?}"));
    }
    let spec = AgentSpec {
        id,
        backend,
        behavior,
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn parse_scripted(rest: &str) -> Result<AgentSpec, String> {
    let (strategy_name, params) = rest.split_once(':').unwrap_or((rest, ""));
    let mut map = parse_kv(params)?;
    let strategy = match strategy_name {
        "rational_ultimatum" | "rational" => StrategySpec::RationalUltimatum,
        "split_difference" => StrategySpec::SplitDifference {
            anchor: take_u64(&mut map, "anchor")?.ok_or("split_difference needs anchor=...")?,
            accept_threshold: take_u64(&mut map, "threshold")?.unwrap_or(5),
        },
        "anchor_concede" => StrategySpec::AnchorConcede {
            anchor: take_u64(&mut map, "anchor")?.ok_or("anchor_concede needs anchor=...")?,
            reservation: take_u64(&mut map, "reservation")?
                .ok_or("anchor_concede needs reservation=...")?,
            rate: take_rational(&mut map, "rate")?.unwrap_or(haggle::Rational::new(1, 4)),
        },
        "fairness" | "fairness_threshold" => StrategySpec::FairnessThreshold {
            tau: take_rational(&mut map, "tau")?.ok_or("fairness needs tau=... (e.g. 3/10)")?,
        },
        "fixed" | "fixed_sequence" => {
            let path = map.remove("file").ok_or("fixed needs file=moves.json")?;
            let bytes = std::fs::read(&path).map_err(|e| format!("{path}: {e}"))?;
            let moves: Vec<ScriptedMove> =
                serde_json::from_slice(&bytes).map_err(|e| format!("{path}: {e}"))?;
            StrategySpec::FixedSequence { moves }
        }
        other => return Err(format!("unknown scripted strategy {other:?}")),
    };
    let default_id = format!("scripted-{strategy_name}");
    finish(
        map,
        default_id,
        haggle::agents::AgentBackend::Scripted { strategy },
    )
}

fn parse_llm(rest: &str) -> Result<AgentSpec, String> {
    let mut map = parse_kv(rest)?;
    let model = map.remove("model").ok_or("llm needs model=...")?;
    let endpoint = map.remove("endpoint").ok_or("llm needs endpoint=...")?;
    let params = LlmParams {
        endpoint,
        model: model.clone(),
        temperature: map
            .remove("temperature")
            .map(|v| v.parse().map_err(|e| format!("temperature: {e}")))
            .transpose()?
            .unwrap_or(0.7),
        max_tokens: take_u64(&mut map, "max_tokens")?.unwrap_or(400) as u32,
        api_key_env: map.remove("key_env"),
        timeout_secs: take_u64(&mut map, "timeout_secs")?.unwrap_or(120),
        retry_budget: take_u64(&mut map, "retries")?.unwrap_or(3) as u32,
        backoff_base_ms: take_u64(&mut map, "backoff_ms")?.unwrap_or(1000),
    };
    finish(map, model, haggle::agents::AgentBackend::Llm { params })
}
