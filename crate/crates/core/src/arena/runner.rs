use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;

use super::config::ArenaConfig;
use super::log::{setup_flips, ActionEvent, DecisionPointEvent, GameHeader, GameLog, LogEvent, LOG_FORMAT};
use crate::card::{new_deck, Card};
use crate::engine::{shuffle_deck, GameState};
use crate::error::ArenaError;
use crate::llm::{BackendSpec, LlmPlayer, ReflectionStages, Semaphore};
use crate::metrics::{aggregate, DecisionRecord, GameOutcome, MetricsReport};
use crate::oracle::{evaluate_candidates, OracleConfig};
use crate::players::{random_decide, GreedyPlayer, Observation, Player, PlayerBinding, PlayerKind, RandomPlayer};
use crate::rng::{derive_seed, Rng};

const TAG_DECK: u64 = 1;
const TAG_GAME: u64 = 2;
const TAG_PLAYER: u64 = 3;
const TAG_ORACLE: u64 = 4;
const TAG_SUBSTITUTE: u64 = 5;

/// Deck `index` of a tournament seeded with `seed`.
pub fn deck_for(seed: u64, index: u64) -> Vec<Card> {
    shuffle_deck(&new_deck(), derive_seed(seed, &[TAG_DECK, index])).expect("canonical deck has 108 cards")
}

pub fn game_seed(seed: u64, game_id: u64) -> u64 {
    derive_seed(seed, &[TAG_GAME, game_id])
}

/// Seed of the oracle evaluation at one decision point.
pub fn oracle_seed(game_seed: u64, turn_index: u32) -> u64 {
    derive_seed(game_seed, &[TAG_ORACLE, u64::from(turn_index)])
}

/// Seed of the private stream of the player in `seat`.
pub fn player_seed(game_seed: u64, seat: usize, binding_seed: u64) -> u64 {
    derive_seed(game_seed, &[TAG_PLAYER, seat as u64, binding_seed])
}

/// Instantiate a seat's player.
pub fn build_player(
    binding: &PlayerBinding,
    seed: u64,
    backend: Option<&BackendSpec>,
    limit: Option<Semaphore>,
) -> Result<Box<dyn Player>, ArenaError> {
    let spec = || {
        backend.ok_or_else(|| ArenaError::Config(format!("player {} has no backend", binding.name)))
    };
    Ok(match &binding.kind {
        PlayerKind::Random => Box::new(RandomPlayer::new(seed)),
        PlayerKind::OracleGreedy { n_sims } => Box::new(GreedyPlayer::new(*n_sims, seed)),
        PlayerKind::VanillaLlm { .. } => Box::new(LlmPlayer::vanilla(spec()?.build(limit)?, seed)),
        PlayerKind::Tutri { strategies, history_reflection, strategy_reflection, .. } => {
            let stages = ReflectionStages { history: *history_reflection, strategy: *strategy_reflection };
            Box::new(LlmPlayer::tutri(spec()?.build(limit)?, stages, strategies.clone(), seed))
        }
    })
}

/// Everything needed to play one game.
pub struct GameSpec<'a> {
    pub game_id: u64,
    pub deck_index: u64,
    pub rotation: usize,
    pub seed: u64,
    pub deck: Vec<Card>,
    pub seating: Vec<&'a PlayerBinding>,
    pub players: Vec<Box<dyn Player>>,
    pub instrumented: Vec<bool>,
    pub oracle: OracleConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameResult {
    pub log: GameLog,
    pub outcome: GameOutcome,
    pub records: Vec<DecisionRecord>,
    pub violations: u32,
    pub fallbacks: u32,
}

/// Play one game to the end, logging every event.
///
/// Decision points with a single legal decision are applied without asking
/// the player. Instrumented seats get an oracle evaluation at every decision
/// point with two or more candidates.
pub fn play_game(mut spec: GameSpec<'_>) -> Result<GameResult, ArenaError> {
    let seats = spec.seating.len();
    let gseed = game_seed(spec.seed, spec.game_id);
    let mut state = GameState::setup(&spec.deck, seats)?;
    let header = GameHeader {
        format: LOG_FORMAT.to_string(),
        game_id: spec.game_id,
        deck_index: spec.deck_index,
        rotation: spec.rotation,
        seed: spec.seed,
        game_seed: gseed,
        players: spec.seating.iter().map(|b| b.name.clone()).collect(),
        kinds: spec.seating.iter().map(|b| b.kind.label().to_string()).collect(),
        instrumented: spec.instrumented.clone(),
        oracle: spec.oracle,
        deck: spec.deck.clone(),
    };
    let mut events = vec![
        LogEvent::Header(header.clone()),
        LogEvent::Deal { hands: (0..seats).map(|s| state.hand(s).cards()).collect() },
        LogEvent::Flip { cards: setup_flips(&spec.deck, seats), active_color: state.active_color() },
    ];
    let mut records = Vec::new();
    let (mut violations, mut fallbacks) = (0, 0);
    while !state.is_terminal() {
        let candidates = state.legal_decisions()?;
        let seat = state.current_seat();
        let turn_index = state.turn_index();
        let mut action = ActionEvent {
            turn_index,
            seat,
            decision: candidates[0],
            forced: candidates.len() == 1,
            violation: false,
            proposed: None,
            fallback: false,
            stage_actions: Vec::new(),
            stage_status: Vec::new(),
            transcript: None,
            digest: String::new(),
        };
        let mut point = None;
        if !action.forced {
            if spec.instrumented[seat] {
                let eval = evaluate_candidates(&state, &spec.oracle, oracle_seed(gseed, turn_index))?;
                let p = DecisionPointEvent {
                    turn_index,
                    seat,
                    phase: state.phase(),
                    wins: eval.wins(),
                    n_sims: spec.oracle.n_sims,
                    optimal: eval.optimal_set,
                    spread: eval.spread,
                    critical: eval.critical,
                    candidates: eval.candidates,
                };
                events.push(LogEvent::DecisionPoint(p.clone()));
                point = Some(p);
            }
            let obs = Observation::new(&state);
            let pd = spec.players[seat].decide(&state, &obs);
            match pd.decision {
                Some(d) if candidates.contains(&d) => action.decision = d,
                other => {
                    let mut rng = Rng::new(derive_seed(gseed, &[TAG_SUBSTITUTE, u64::from(turn_index)]));
                    action.decision = random_decide(&candidates, &mut rng);
                    action.violation = true;
                    action.proposed = Some(other.map_or_else(|| "none".to_string(), |d| d.token()));
                    violations += 1;
                }
            }
            action.fallback = pd.fallback;
            fallbacks += u32::from(pd.fallback);
            action.stage_actions = pd.stage_actions;
            action.stage_status = pd.stage_status;
            action.transcript = pd.transcript;
        }
        if let Some(p) = point {
            records.push(DecisionRecord {
                game_id: spec.game_id,
                turn_index,
                seat,
                player: header.players[seat].clone(),
                chosen: p.candidates.iter().position(|&c| c == action.decision).expect("decision is a candidate"),
                candidates: p.candidates,
                wins: p.wins,
                n_sims: p.n_sims,
            });
        }
        let fx = state.apply_in_place(action.decision)?;
        action.digest = state.digest();
        events.push(LogEvent::Action(action));
        events.extend(LogEvent::from_effects(&fx));
    }
    let winners = state.winners()?;
    events.push(LogEvent::GameEnd {
        winners,
        hand_sizes: state.hand_sizes(),
        turns: state.turn_index(),
        digest: state.digest(),
    });
    let outcome = GameOutcome { game_id: spec.game_id, players: header.players.clone(), winners };
    Ok(GameResult { log: GameLog { header, events }, outcome, records, violations, fallbacks })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TournamentResult {
    /// Games in id order.
    pub games: Vec<GameResult>,
    pub report: MetricsReport,
}

impl TournamentResult {
    pub fn log_jsonl(&self) -> String {
        self.games.iter().map(|g| g.log.to_jsonl()).collect()
    }

    pub fn violations(&self) -> u32 {
        self.games.iter().map(|g| g.violations).sum()
    }

    pub fn fallbacks(&self) -> u32 {
        self.games.iter().map(|g| g.fallbacks).sum()
    }

    /// Write `games.jsonl`, `metrics.csv` and `metrics.json` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), ArenaError> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("games.jsonl"), self.log_jsonl())?;
        std::fs::write(dir.join("metrics.csv"), self.report.to_csv())?;
        std::fs::write(dir.join("metrics.json"), self.report.to_json())?;
        Ok(())
    }
}

fn setup_game<'a>(
    config: &'a ArenaConfig,
    game_id: u64,
    limits: &BTreeMap<String, Semaphore>,
) -> Result<GameSpec<'a>, ArenaError> {
    let rotations = config.rotations() as u64;
    let deck_index = game_id / rotations;
    let rotation = (game_id % rotations) as usize;
    let seating = config.seating(rotation);
    let gseed = game_seed(config.seed, game_id);
    let players = seating
        .iter()
        .enumerate()
        .map(|(seat, b)| {
            let backend = b.kind.backend().and_then(|name| config.backend(name));
            let limit = b.kind.backend().and_then(|name| limits.get(name).cloned());
            build_player(b, player_seed(gseed, seat, b.seed), backend.as_ref(), limit)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GameSpec {
        game_id,
        deck_index,
        rotation,
        seed: config.seed,
        deck: deck_for(config.seed, deck_index),
        instrumented: seating.iter().map(|b| config.instrument.covers(&b.name)).collect(),
        seating,
        players,
        oracle: config.oracle,
    })
}

/// Play every game of a tournament. Results do not depend on `jobs`.
pub fn run_tournament(config: &ArenaConfig) -> Result<TournamentResult, ArenaError> {
    config.validate()?;
    let limits: BTreeMap<String, Semaphore> = config
        .backends
        .iter()
        .filter_map(|(name, spec)| match spec {
            BackendSpec::Http(h) => h.max_concurrent.map(|n| (name.clone(), Semaphore::new(n))),
            _ => None,
        })
        .collect();
    let run = || {
        (0..config.games())
            .into_par_iter()
            .map(|id| play_game(setup_game(config, id, &limits)?))
            .collect::<Result<Vec<_>, ArenaError>>()
    };
    let games = if config.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| ArenaError::Config(e.to_string()))?
            .install(run)?
    } else {
        run()?
    };
    let outcomes: Vec<GameOutcome> = games.iter().map(|g| g.outcome.clone()).collect();
    let records: Vec<DecisionRecord> = games.iter().flat_map(|g| g.records.iter().cloned()).collect();
    let report = aggregate(&outcomes, &records, config.oracle.p)?;
    Ok(TournamentResult { games, report })
}

/// Recompute metrics from logged games, optionally under another threshold.
pub fn metrics_from_logs(games: &[GameLog], p: Option<f64>) -> Result<MetricsReport, ArenaError> {
    let first = games.first().ok_or(crate::error::MetricsError::NoGames)?;
    let oracle = first.header.oracle;
    if let Some(g) = games.iter().find(|g| g.header.oracle.n_sims != oracle.n_sims) {
        return Err(crate::error::MetricsError::MixedSettings(format!(
            "game {} used n_sims {}, game {} used {}",
            first.header.game_id, oracle.n_sims, g.header.game_id, g.header.oracle.n_sims
        ))
        .into());
    }
    if p.is_none() {
        if let Some(g) = games.iter().find(|g| g.header.oracle.p != oracle.p) {
            return Err(crate::error::MetricsError::MixedSettings(format!(
                "game {} used p {}, game {} used {}; pass an explicit threshold",
                first.header.game_id, oracle.p, g.header.game_id, g.header.oracle.p
            ))
            .into());
        }
    }
    let outcomes = games.iter().map(GameLog::outcome).collect::<Result<Vec<_>, _>>()?;
    let mut records = Vec::new();
    for g in games {
        records.extend(g.decision_records()?);
    }
    Ok(aggregate(&outcomes, &records, p.unwrap_or(oracle.p))?)
}
