use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use uno_arena::arena::{
    build_player, metrics_from_logs, parse_log, play_game, preset, replay, run_tournament, trace_csv, trace_game,
    ArenaConfig, GameLog, GameSpec, Instrument, PRESETS,
};
use uno_arena::players::{PlayerBinding, PlayerKind};
use uno_arena::{new_deck, shuffle_deck, OracleConfig};

#[derive(Parser)]
#[command(name = "uno-arena", version, about = "Deterministic UNO arena with Monte Carlo decision scoring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play a single game and write its log.
    Play(PlayArgs),
    /// Run a tournament from a config file or preset.
    Tournament(TournamentArgs),
    /// Re-simulate logged games and check every recorded state.
    Replay {
        #[arg(long)]
        log: PathBuf,
    },
    /// Recompute metrics from game logs.
    Metrics(MetricsArgs),
    /// Per-turn winning-rate estimates of every seat for one logged game.
    Trace(TraceArgs),
    /// List built-in presets, or print one as a config file.
    Presets { name: Option<String> },
}

#[derive(Args)]
struct PlayArgs {
    #[arg(long, default_value_t = 2)]
    seats: usize,
    /// Comma-separated player kinds, one per seat: random, oracle_greedy[:N],
    /// vanilla_llm, tutri. LLM kinds use the built-in scripted backend.
    #[arg(long, default_value = "random,random")]
    players: String,
    #[arg(long, default_value_t = 0)]
    deck_seed: u64,
    /// Oracle rollouts per candidate for instrumented decision points.
    #[arg(long, default_value_t = 200)]
    sims: u32,
    #[arg(long, default_value_t = 0.15)]
    p: f64,
    /// Skip oracle scoring.
    #[arg(long)]
    no_instrument: bool,
    /// Log file; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TournamentArgs {
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    decks: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sims: Option<u32>,
    #[arg(long)]
    p: Option<f64>,
    /// "all", "none", or comma-separated player names.
    #[arg(long)]
    instrument: Option<String>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory for games.jsonl, metrics.csv and metrics.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MetricsArgs {
    /// A log file, or a directory whose *.jsonl files are read in name order.
    #[arg(long)]
    logs: PathBuf,
    /// Criticality threshold; defaults to the one recorded in the logs.
    #[arg(long)]
    p: Option<f64>,
    /// Candidate counts to report.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    k: Vec<usize>,
    #[arg(long, conflicts_with = "json")]
    csv: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long)]
    log: PathBuf,
    /// Game id within the log; defaults to the first game.
    #[arg(long)]
    game: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    sims: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV file; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_kind(spec: &str) -> Result<PlayerKind> {
    let (name, arg) = spec.split_once(':').map_or((spec, None), |(n, a)| (n, Some(a)));
    let backend = || uno_arena::arena::MOCK_FIRST.to_string();
    Ok(match name.trim() {
        "random" => PlayerKind::Random,
        "oracle_greedy" | "greedy" => PlayerKind::OracleGreedy {
            n_sims: arg.map(str::parse).transpose().context("oracle_greedy rollouts")?.unwrap_or(500),
        },
        "vanilla_llm" | "vanilla" => PlayerKind::VanillaLlm { backend: backend() },
        "tutri" => PlayerKind::Tutri {
            backend: backend(),
            strategies: None,
            history_reflection: true,
            strategy_reflection: true,
        },
        other => bail!("unknown player kind {other:?}"),
    })
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn play(args: PlayArgs) -> Result<()> {
    let kinds: Vec<PlayerKind> = args.players.split(',').map(parse_kind).collect::<Result<_>>()?;
    if kinds.len() != args.seats {
        bail!("{} player kinds given for {} seats", kinds.len(), args.seats);
    }
    let bindings: Vec<PlayerBinding> = kinds
        .into_iter()
        .enumerate()
        .map(|(seat, kind)| PlayerBinding { name: format!("{}_{seat}", kind.label()), seed: 0, kind })
        .collect();
    let oracle = OracleConfig { n_sims: args.sims, p: args.p, crn: false };
    oracle.validate()?;
    let gseed = uno_arena::arena::game_seed(args.deck_seed, 0);
    let players = bindings
        .iter()
        .enumerate()
        .map(|(seat, b)| {
            let backend = b.kind.backend().map(|_| uno_arena::arena::mock_first());
            build_player(b, uno_arena::arena::player_seed(gseed, seat, b.seed), backend.as_ref(), None)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let result = play_game(GameSpec {
        game_id: 0,
        deck_index: 0,
        rotation: 0,
        seed: args.deck_seed,
        deck: shuffle_deck(&new_deck(), args.deck_seed)?,
        seating: bindings.iter().collect(),
        players,
        instrumented: vec![!args.no_instrument; args.seats],
        oracle,
    })?;
    write_or_print(args.out.as_deref(), &result.log.to_jsonl())?;
    let winners: Vec<String> = result.outcome.winners.seats().map(|s| bindings[s].name.clone()).collect();
    eprintln!("winners: {}", winners.join(", "));
    Ok(())
}

fn tournament(args: TournamentArgs) -> Result<()> {
    let mut config = match (&args.config, &args.preset) {
        (Some(path), _) => ArenaConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
        (None, Some(name)) => preset(name).with_context(|| format!("unknown preset {name:?}; try `presets`"))?,
        (None, None) => bail!("pass --config FILE or --preset NAME"),
    };
    if let Some(d) = args.decks {
        config.decks = d;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(n) = args.sims {
        config.oracle.n_sims = n;
    }
    if let Some(p) = args.p {
        config.oracle.p = p;
    }
    if let Some(j) = args.jobs {
        config.jobs = j;
    }
    if let Some(i) = &args.instrument {
        config.instrument = match i.as_str() {
            "all" | "none" => Instrument::Keyword(i.clone()),
            names => Instrument::Players(names.split(',').map(|s| s.trim().to_string()).collect()),
        };
    }
    config.validate()?;
    let result = run_tournament(&config)?;
    if let Some(dir) = &args.out {
        result.write_to(dir)?;
        fs::write(dir.join("config.toml"), config.to_toml())?;
        eprintln!("wrote {} games to {}", result.games.len(), dir.display());
    }
    if result.violations() > 0 || result.fallbacks() > 0 {
        eprintln!("substituted decisions: {}, agent fallbacks: {}", result.violations(), result.fallbacks());
    }
    print!("{}", result.report.to_csv());
    Ok(())
}

fn read_logs(path: &Path) -> Result<Vec<GameLog>> {
    let files = if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .filter(|p| p.extension().is_some_and(|e| e == "jsonl"))
            .collect();
        files.sort();
        files
    } else {
        vec![path.to_path_buf()]
    };
    let mut games = Vec::new();
    for f in files {
        let text = fs::read_to_string(&f).with_context(|| format!("reading {}", f.display()))?;
        games.extend(parse_log(&text).with_context(|| format!("parsing {}", f.display()))?);
    }
    if games.is_empty() {
        bail!("no games found in {}", path.display());
    }
    Ok(games)
}

fn replay_cmd(log: &Path) -> Result<bool> {
    let games = read_logs(log)?;
    let mut ok = true;
    for g in &games {
        let v = replay(g);
        match &v.divergence {
            None => println!("game {}: ok ({} actions)", v.game_id, v.actions),
            Some(d) => {
                ok = false;
                println!("game {}: diverged at event {}: {}", v.game_id, d.event_index, d.reason);
            }
        }
    }
    Ok(ok)
}

fn metrics(args: MetricsArgs) -> Result<()> {
    let games = read_logs(&args.logs)?;
    let mut report = metrics_from_logs(&games, args.p)?;
    report.ks = args.k;
    if args.json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.to_csv());
    }
    Ok(())
}

fn trace(args: TraceArgs) -> Result<()> {
    let games = read_logs(&args.log)?;
    let game = match args.game {
        Some(id) => games.iter().find(|g| g.header.game_id == id).with_context(|| format!("no game {id} in log"))?,
        None => &games[0],
    };
    let points = trace_game(game, args.sims, args.seed)?;
    write_or_print(args.out.as_deref(), &trace_csv(&points))
}

fn run() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Play(a) => play(a)?,
        Command::Tournament(a) => tournament(a)?,
        Command::Replay { log } => {
            if !replay_cmd(&log)? {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Metrics(a) => metrics(a)?,
        Command::Trace(a) => trace(a)?,
        Command::Presets { name: None } => PRESETS.iter().for_each(|p| println!("{p}")),
        Command::Presets { name: Some(n) } => print!("{}", preset(&n).with_context(|| format!("unknown preset {n:?}"))?.to_toml()),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
