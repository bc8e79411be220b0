//! Command-line driver: single games, tournaments, named experiments,
//! replay, counterfactual re-runs, and analysis over saved records.
//!
//! Exit codes: 0 success, 1 configuration error, 2 partial failure
//! (some games aborted), 3 backend unreachable.

mod agent_arg;

use agent_arg::parse_agent_arg;
use clap::{Args, Parser, Subcommand};
use haggle::agents::{AgentError, AgentSpec};
use haggle::engine::EngineError;
use haggle::harness::{
    self, ConfigFile, ExperimentName, ExperimentParams, HarnessError, TournamentPlan,
};
use haggle::outcome::rational_string;
use haggle::player::PerPlayer;
use haggle::protocol::{self, PlayerNames};
use haggle::records::{self, GameRecord};
use haggle::scenarios::{self, BehaviorKind, ScenarioKind, ScenarioVariant};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_CONFIG: u8 = 1;
const EXIT_PARTIAL: u8 = 2;
const EXIT_BACKEND: u8 = 3;

#[derive(Parser)]
#[command(
    name = "haggle",
    version,
    about = "Two-agent negotiation games: engine, tournaments, and analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play one game and save its record.
    Run(RunArgs),
    /// Run every ordered pair of agents for N games each.
    Tournament(TournamentArgs),
    /// Run a named experiment pipeline.
    Experiment(ExperimentArgs),
    /// Reload a record, verify it, and print the transcript.
    Replay(ReplayArgs),
    /// Edit one turn of a stored game and continue it live.
    Counterfactual(CounterfactualArgs),
    /// Recompute tournament metrics from saved records.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct ScenarioArgs {
    /// resource_exchange | ultimatum | seller_buyer
    #[arg(long)]
    scenario: Option<String>,
    /// standard | ultimatum_classical | ultimatum_three_turn | overvalued_buyer
    #[arg(long)]
    variant: Option<String>,
    /// Ultimatum: total money player 1 starts with.
    #[arg(long)]
    amount: Option<u64>,
    /// Seller/buyer: fixed cost of production.
    #[arg(long)]
    cost: Option<u64>,
    /// Seller/buyer: fixed willingness to pay.
    #[arg(long)]
    willingness: Option<u64>,
    /// Denomination scale X.
    #[arg(long)]
    scale: Option<u64>,
    #[arg(long)]
    max_rounds: Option<u32>,
    /// Draw cost ~ U{20..40} and willingness ~ U{60..80} from the seed.
    #[arg(long)]
    sample_valuations: bool,
    /// Behavior persona for player 1 (cunning | desperate).
    #[arg(long)]
    behavior_red: Option<String>,
    /// Behavior persona for player 2 (cunning | desperate).
    #[arg(long)]
    behavior_blue: Option<String>,
}

impl ScenarioArgs {
    fn overrides(&self) -> Result<scenarios::ScenarioOverrides, String> {
        let variant = match &self.variant {
            None => None,
            Some(text) => Some(parse_variant(text)?),
        };
        let behaviors = if self.behavior_red.is_some() || self.behavior_blue.is_some() {
            let parse = |b: &Option<String>| -> Result<Option<BehaviorKind>, String> {
                match b {
                    None => Ok(None),
                    Some(text) => BehaviorKind::parse(text)
                        .map(Some)
                        .ok_or_else(|| format!("unknown behavior {text:?}")),
                }
            };
            Some(PerPlayer::new(
                parse(&self.behavior_red)?,
                parse(&self.behavior_blue)?,
            ))
        } else {
            None
        };
        Ok(scenarios::ScenarioOverrides {
            variant,
            endowments: None,
            amount: self.amount,
            max_rounds: self.max_rounds,
            scale_factor: self.scale,
            cost: self.cost,
            willingness: self.willingness,
            sample_valuations: self.sample_valuations,
            behaviors,
        })
    }
}

fn parse_variant(text: &str) -> Result<ScenarioVariant, String> {
    match text.to_ascii_lowercase().replace('-', "_").as_str() {
        "standard" | "multi_turn" => Ok(ScenarioVariant::Standard),
        "ultimatum_classical" | "classical" | "classical_2turn" => {
            Ok(ScenarioVariant::UltimatumClassical)
        }
        "ultimatum_three_turn" | "three_turn" => Ok(ScenarioVariant::UltimatumThreeTurn),
        "overvalued_buyer" => Ok(ScenarioVariant::OvervaluedBuyer),
        other => Err(format!("unknown variant {other:?}")),
    }
}

#[derive(Args)]
struct RunArgs {
    /// Game configuration file (kind, overrides, agents, seed).
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Player 1 agent descriptor (see --help for forms).
    #[arg(long)]
    red: Option<String>,
    /// Player 2 agent descriptor.
    #[arg(long)]
    blue: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output record path.
    #[arg(long, default_value = "out/game.json")]
    out: PathBuf,
}

#[derive(Args)]
struct TournamentArgs {
    /// Plan file: kind, overrides, agents list, num_games, seed.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out/tournament")]
    out: PathBuf,
    /// Override games per ordered pair.
    #[arg(long)]
    games: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    parallelism: Option<usize>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// anchoring | split_difference | overvalued_buyer | acceptance_curve |
    /// split_scaling | denomination_scaling | behavior
    #[arg(long)]
    name: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Extra parameters, key=value; lists use ';' (amounts=10;100).
    #[arg(long = "param")]
    params: Vec<String>,
    /// Decider under test (acceptance_curve).
    #[arg(long)]
    decider: Option<String>,
    /// Seat overrides for live runs.
    #[arg(long)]
    red: Option<String>,
    #[arg(long)]
    blue: Option<String>,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    record: PathBuf,
    /// Re-run the game from (config, seed) and compare transcripts;
    /// meaningful for all-scripted games.
    #[arg(long)]
    rerun: bool,
}

#[derive(Args)]
struct CounterfactualArgs {
    #[arg(long)]
    record: PathBuf,
    /// Zero-based transcript index to replace.
    #[arg(long)]
    turn: u32,
    /// File holding the replacement message as raw tagged text.
    #[arg(long)]
    message: PathBuf,
    /// Agents finishing the game (defaults: the record's own agents).
    #[arg(long)]
    red: Option<String>,
    #[arg(long)]
    blue: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out/counterfactual.json")]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Directory holding saved game records.
    #[arg(long)]
    dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Tournament(args) => cmd_tournament(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::Replay(args) => cmd_replay(args),
        Command::Counterfactual(args) => cmd_counterfactual(args),
        Command::Analyze(args) => cmd_analyze(args),
    };
    match result {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(error.exit_code())
        }
    }
}

struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    fn config(message: impl Into<String>) -> CliError {
        CliError {
            message: message.into(),
            code: EXIT_CONFIG,
        }
    }

    fn exit_code(&self) -> u8 {
        self.code
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<HarnessError> for CliError {
    fn from(error: HarnessError) -> CliError {
        let code = match &error {
            HarnessError::Engine(e) => engine_exit_code(e),
            _ => EXIT_CONFIG,
        };
        CliError {
            message: error.to_string(),
            code,
        }
    }
}

impl From<records::RecordError> for CliError {
    fn from(error: records::RecordError) -> CliError {
        let code = match &error {
            records::RecordError::Engine(e) => engine_exit_code(e),
            _ => EXIT_CONFIG,
        };
        CliError {
            message: error.to_string(),
            code,
        }
    }
}

impl From<EngineError> for CliError {
    fn from(error: EngineError) -> CliError {
        CliError {
            message: error.to_string(),
            code: engine_exit_code(&error),
        }
    }
}

fn engine_exit_code(error: &EngineError) -> u8 {
    match error {
        EngineError::AgentBackend {
            source:
                AgentError::BackendTimeout { .. }
                | AgentError::BackendRejection(_)
                | AgentError::MissingCredentials(_),
            ..
        } => EXIT_BACKEND,
        _ => EXIT_CONFIG,
    }
}

fn agent_from_arg(arg: &str) -> Result<AgentSpec, CliError> {
    parse_agent_arg(arg).map_err(CliError::config)
}

fn print_outcome(record: &GameRecord) {
    println!("game {}: {} turns", record.id, record.transcript.len());
    println!("  scenario: {}", record.config.kind.as_str());
    println!("  status:   {:?}", record.outcome.status);
    println!("  winner:   {:?}", record.outcome.winner);
    println!(
        "  payoffs:  player1={} player2={}",
        rational_string::to_string(&record.outcome.payoffs.red),
        rational_string::to_string(&record.outcome.payoffs.blue),
    );
}

fn cmd_run(args: RunArgs) -> Result<ExitCode, CliError> {
    let (scenario, agents, seed) = match &args.config {
        Some(path) => {
            let file = ConfigFile::load(path)?;
            let seed = args.seed.or(file.seed).unwrap_or(0);
            let scenario = file.scenario(seed)?;
            let mut agents = file.agents.clone();
            if let Some(red) = &args.red {
                if agents.is_empty() {
                    agents.push(agent_from_arg(red)?);
                } else {
                    agents[0] = agent_from_arg(red)?;
                }
            }
            if let Some(blue) = &args.blue {
                while agents.len() < 2 {
                    agents.push(agents.first().cloned().ok_or_else(|| {
                        CliError::config("config file declares no agents and --red is missing")
                    })?);
                }
                agents[1] = agent_from_arg(blue)?;
            }
            if agents.len() < 2 {
                return Err(CliError::config(
                    "need two agents (config file agents or --red/--blue)",
                ));
            }
            (
                scenario,
                PerPlayer::new(agents[0].clone(), agents[1].clone()),
                seed,
            )
        }
        None => {
            let kind_text = args
                .scenario
                .scenario
                .as_deref()
                .ok_or_else(|| CliError::config("--scenario or --config is required"))?;
            let kind = ScenarioKind::parse(kind_text)
                .ok_or_else(|| CliError::config(format!("unknown scenario {kind_text:?}")))?;
            let overrides = args.scenario.overrides().map_err(CliError::config)?;
            let seed = args.seed.unwrap_or(0);
            let scenario = scenarios::build(kind, &overrides, seed)
                .map_err(|e| CliError::config(e.to_string()))?;
            let red = args
                .red
                .as_deref()
                .ok_or_else(|| CliError::config("--red is required"))?;
            let blue = args
                .blue
                .as_deref()
                .ok_or_else(|| CliError::config("--blue is required"))?;
            (
                scenario,
                PerPlayer::new(agent_from_arg(red)?, agent_from_arg(blue)?),
                seed,
            )
        }
    };
    let record = haggle::engine::run(&scenario, &agents, seed)?;
    record.save(&args.out)?;
    print_outcome(&record);
    println!("  saved:    {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_tournament(args: TournamentArgs) -> Result<ExitCode, CliError> {
    let file = ConfigFile::load(&args.config)?;
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let plan = TournamentPlan {
        scenario: file.scenario(seed)?,
        agents: file.agents.clone(),
        games_per_pair: args.games.or(file.num_games).unwrap_or(60),
        base_seed: seed,
        parallelism: args.parallelism.or(file.parallelism),
    };
    let report = harness::run_tournament(&plan, &args.out)?;
    print!("{}", report.summary);
    println!("records: {}", report.records_written);
    println!("output:  {}", args.out.display());
    if report.aborted.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for aborted in &report.aborted {
            eprintln!(
                "aborted: pair {} game {} ({} vs {}): {}",
                aborted.pair_index, aborted.game_index, aborted.red, aborted.blue, aborted.error
            );
        }
        Ok(ExitCode::from(EXIT_PARTIAL))
    }
}

fn parse_list(value: &str) -> Result<Vec<u64>, CliError> {
    value
        .split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|e| CliError::config(format!("{p:?}: {e}")))
        })
        .collect()
}

fn cmd_experiment(args: ExperimentArgs) -> Result<ExitCode, CliError> {
    let name = ExperimentName::parse(&args.name)?;
    let mut params = ExperimentParams::default();
    for param in &args.params {
        let (key, value) = param
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("expected key=value, found {param:?}")))?;
        match key {
            "games" => {
                params.games = Some(
                    value
                        .parse()
                        .map_err(|e| CliError::config(format!("games: {e}")))?,
                )
            }
            "trials" => {
                params.trials = Some(
                    value
                        .parse()
                        .map_err(|e| CliError::config(format!("trials: {e}")))?,
                )
            }
            "max_amount" => {
                params.max_amount = Some(
                    value
                        .parse()
                        .map_err(|e| CliError::config(format!("max_amount: {e}")))?,
                )
            }
            "amounts" => params.amounts = Some(parse_list(value)?),
            "scales" => params.scales = Some(parse_list(value)?),
            "anchors" => params.anchors = Some(parse_list(value)?),
            "variant" => params.variant = Some(parse_variant(value).map_err(CliError::config)?),
            "scenario" => {
                params.scenario = Some(
                    ScenarioKind::parse(value)
                        .ok_or_else(|| CliError::config(format!("unknown scenario {value:?}")))?,
                )
            }
            other => return Err(CliError::config(format!("unknown parameter {other:?}"))),
        }
    }
    if let Some(decider) = &args.decider {
        params.decider = Some(agent_from_arg(decider)?);
    }
    if args.red.is_some() != args.blue.is_some() {
        return Err(CliError::config("--red and --blue must be given together"));
    }
    if let (Some(red), Some(blue)) = (&args.red, &args.blue) {
        params.agents = Some(PerPlayer::new(agent_from_arg(red)?, agent_from_arg(blue)?));
    }
    let out = args
        .out
        .unwrap_or_else(|| PathBuf::from(format!("out/experiment-{}", args.name)));
    let report = harness::run_experiment(name, &params, args.seed.unwrap_or(0), &out)?;
    print!("{}", report.summary);
    println!("records: {}", report.records_written);
    println!("output:  {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_replay(args: ReplayArgs) -> Result<ExitCode, CliError> {
    let record = GameRecord::load(&args.record)?;
    print_outcome(&record);
    for (index, entry) in record.transcript.iter().enumerate() {
        let decision = entry.message.decision;
        let trade = entry
            .message
            .trade
            .as_ref()
            .map(|t| format!(" [{t}]"))
            .unwrap_or_default();
        println!("  turn {index:2} {}: {decision}{trade}", entry.player);
    }
    if args.rerun {
        let rerun = haggle::engine::run(&record.config, &record.agents, record.seed)?;
        if rerun.transcript == record.transcript && rerun.outcome == record.outcome {
            println!("re-run: identical transcript and outcome");
        } else {
            println!("re-run: DIFFERS from the stored record");
            return Ok(ExitCode::from(EXIT_PARTIAL));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_counterfactual(args: CounterfactualArgs) -> Result<ExitCode, CliError> {
    let record = GameRecord::load(&args.record)?;
    let raw = std::fs::read_to_string(&args.message)
        .map_err(|e| CliError::config(format!("{}: {e}", args.message.display())))?;
    let parsed = protocol::parse_message(&raw, &record.config.vocab(), &PlayerNames::default())
        .map_err(|e| CliError::config(format!("replacement message: {e}")))?;
    let agents = match (&args.red, &args.blue) {
        (None, None) => record.agents.clone(),
        (Some(red), Some(blue)) => PerPlayer::new(agent_from_arg(red)?, agent_from_arg(blue)?),
        _ => return Err(CliError::config("--red and --blue must be given together")),
    };
    let seed = args.seed.unwrap_or(record.seed);
    let derived =
        records::counterfactual_rerun(&record, args.turn, &parsed.message, &agents, seed)?;
    derived.save(&args.out)?;
    println!(
        "counterfactual of {} at turn {} (edited {})",
        record.id,
        args.turn,
        derived.transcript.len()
    );
    print_outcome(&derived);
    println!("  saved:    {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<ExitCode, CliError> {
    let outputs = harness::analyze_dir(&args.dir)?;
    print!("{}", outputs.summary);
    Ok(ExitCode::SUCCESS)
}
