//! Tournaments: configuration, the game loop, JSONL game logs, replay and
//! winning-rate traces.
//!
//! Every random choice in a tournament is derived from the config seed: deck
//! `i` from `(seed, deck, i)`, game `g` from `(seed, game, g)`, and within a
//! game each seat's stream and each oracle evaluation from the game seed. A
//! tournament therefore produces byte-identical logs for any thread count.

mod config;
mod log;
mod presets;
mod runner;

pub use config::{mock_first, ArenaConfig, Instrument, MOCK_FIRST};
pub use log::{
    events_to_jsonl, parse_log, replay, setup_flips, ActionEvent, DecisionPointEvent, Divergence, GameHeader, GameLog,
    LogEvent, ReplayVerdict, LOG_FORMAT,
};
pub use presets::{preset, PRESETS};
pub use runner::{
    build_player, deck_for, game_seed, metrics_from_logs, oracle_seed, play_game, player_seed, run_tournament,
    GameResult, GameSpec, TournamentResult,
};

use crate::error::ArenaError;
use crate::oracle::{winrate_trace, TracePoint};

/// Winning-rate estimate of every seat after every action of a logged game.
pub fn trace_game(game: &GameLog, n_sims: u32, seed: u64) -> Result<Vec<TracePoint>, ArenaError> {
    Ok(winrate_trace(&game.initial_state()?, &game.actions(), n_sims, seed)?)
}

pub fn trace_csv(points: &[TracePoint]) -> String {
    let mut out = String::from("turn_index,seat,estimate\n");
    for p in points {
        out.push_str(&format!("{},{},{:.6}\n", p.turn_index, p.seat, p.estimate));
    }
    out
}
