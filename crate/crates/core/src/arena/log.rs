use serde::{Deserialize, Serialize};

use crate::card::{Card, Color};
use crate::engine::{ChallengeResolution, Decision, Effects, GameState, Phase, WinnerSet};
use crate::error::ArenaError;
use crate::llm::{StageStatus, Transcript};
use crate::metrics::{DecisionRecord, GameOutcome};
use crate::oracle::OracleConfig;

pub const LOG_FORMAT: &str = "uno-arena-log/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameHeader {
    pub format: String,
    pub game_id: u64,
    pub deck_index: u64,
    pub rotation: usize,
    pub seed: u64,
    pub game_seed: u64,
    /// Player name per seat.
    pub players: Vec<String>,
    /// Player kind label per seat.
    pub kinds: Vec<String>,
    pub instrumented: Vec<bool>,
    pub oracle: OracleConfig,
    /// Shuffled deck, dealt from the front.
    pub deck: Vec<Card>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionPointEvent {
    pub turn_index: u32,
    pub seat: usize,
    pub phase: Phase,
    pub candidates: Vec<Decision>,
    pub wins: Vec<u32>,
    pub n_sims: u32,
    pub optimal: Vec<usize>,
    pub spread: f64,
    pub critical: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionEvent {
    pub turn_index: u32,
    pub seat: usize,
    pub decision: Decision,
    /// Only one legal decision existed; the player was not consulted.
    #[serde(default)]
    pub forced: bool,
    /// The player returned no decision or one outside the candidate list and a
    /// random legal decision was substituted.
    #[serde(default)]
    pub violation: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proposed: Option<String>,
    /// An LLM agent produced no usable answer and picked at random.
    #[serde(default)]
    pub fallback: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stage_actions: Vec<Option<Decision>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stage_status: Vec<StageStatus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<Transcript>,
    /// State digest after the action.
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LogEvent {
    Header(GameHeader),
    Deal { hands: Vec<Vec<Card>> },
    /// Cards turned at setup; the last is the opening top card.
    Flip { cards: Vec<Card>, active_color: Color },
    DecisionPoint(DecisionPointEvent),
    Action(ActionEvent),
    Penalty { seat: usize, owed: usize, drawn: usize },
    ChallengeResult(ChallengeResolution),
    GameEnd { winners: WinnerSet, hand_sizes: Vec<usize>, turns: u32, digest: String },
}

impl LogEvent {
    pub fn name(&self) -> &'static str {
        match self {
            LogEvent::Header(_) => "header",
            LogEvent::Deal { .. } => "deal",
            LogEvent::Flip { .. } => "flip",
            LogEvent::DecisionPoint(_) => "decision_point",
            LogEvent::Action(_) => "action",
            LogEvent::Penalty { .. } => "penalty",
            LogEvent::ChallengeResult(_) => "challenge_result",
            LogEvent::GameEnd { .. } => "game_end",
        }
    }

    /// Events describing the side effects of one transition.
    pub fn from_effects(fx: &Effects) -> Vec<LogEvent> {
        let mut out = Vec::new();
        if let Some(c) = fx.challenge {
            out.push(LogEvent::ChallengeResult(c));
        }
        if let Some((seat, owed, drawn)) = fx.penalty {
            out.push(LogEvent::Penalty { seat, owed, drawn });
        }
        out
    }
}

/// Cards turned during setup, in flip order.
pub fn setup_flips(deck: &[Card], seats: usize) -> Vec<Card> {
    let mut out = Vec::new();
    for &c in deck.iter().skip(seats * crate::engine::HAND_SIZE) {
        out.push(c);
        if c.is_number() {
            break;
        }
    }
    out
}

/// One game read back from a log.
#[derive(Debug, Clone, PartialEq)]
pub struct GameLog {
    pub header: GameHeader,
    /// All events including the header at index 0.
    pub events: Vec<LogEvent>,
}

impl GameLog {
    pub fn from_events(events: Vec<LogEvent>) -> Result<GameLog, ArenaError> {
        match events.first() {
            Some(LogEvent::Header(h)) => Ok(GameLog { header: h.clone(), events }),
            _ => Err(ArenaError::Log { line: 0, reason: "game does not start with a header".into() }),
        }
    }

    pub fn to_jsonl(&self) -> String {
        events_to_jsonl(&self.events)
    }

    pub fn initial_state(&self) -> Result<GameState, ArenaError> {
        Ok(GameState::setup(&self.header.deck, self.header.players.len())?)
    }

    pub fn actions(&self) -> Vec<Decision> {
        self.events
            .iter()
            .filter_map(|e| match e {
                LogEvent::Action(a) => Some(a.decision),
                _ => None,
            })
            .collect()
    }

    pub fn action_events(&self) -> impl Iterator<Item = &ActionEvent> {
        self.events.iter().filter_map(|e| match e {
            LogEvent::Action(a) => Some(a),
            _ => None,
        })
    }

    pub fn winners(&self) -> Option<WinnerSet> {
        self.events.iter().rev().find_map(|e| match e {
            LogEvent::GameEnd { winners, .. } => Some(*winners),
            _ => None,
        })
    }

    pub fn outcome(&self) -> Result<GameOutcome, ArenaError> {
        let winners = self.winners().ok_or_else(|| ArenaError::Log {
            line: 0,
            reason: format!("game {} has no game_end event", self.header.game_id),
        })?;
        Ok(GameOutcome { game_id: self.header.game_id, players: self.header.players.clone(), winners })
    }

    /// Oracle-scored decision points paired with the action taken.
    pub fn decision_records(&self) -> Result<Vec<DecisionRecord>, ArenaError> {
        let mut out = Vec::new();
        let mut pending: Option<&DecisionPointEvent> = None;
        for e in &self.events {
            match e {
                LogEvent::DecisionPoint(p) => pending = Some(p),
                LogEvent::Action(a) => {
                    if let Some(p) = pending.take() {
                        let chosen = p.candidates.iter().position(|&c| c == a.decision).ok_or_else(|| ArenaError::Log {
                            line: 0,
                            reason: format!("game {} turn {}: action not among candidates", self.header.game_id, a.turn_index),
                        })?;
                        out.push(DecisionRecord {
                            game_id: self.header.game_id,
                            turn_index: p.turn_index,
                            seat: p.seat,
                            player: self.header.players[p.seat].clone(),
                            candidates: p.candidates.clone(),
                            wins: p.wins.clone(),
                            n_sims: p.n_sims,
                            chosen,
                        });
                    }
                }
                _ => {}
            }
        }
        Ok(out)
    }
}

pub fn events_to_jsonl(events: &[LogEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&serde_json::to_string(e).expect("log events serialize"));
        out.push('\n');
    }
    out
}

/// Split a JSONL log into games. Blank lines are ignored.
pub fn parse_log(text: &str) -> Result<Vec<GameLog>, ArenaError> {
    let mut games: Vec<Vec<LogEvent>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let event: LogEvent =
            serde_json::from_str(line).map_err(|e| ArenaError::Log { line: i + 1, reason: e.to_string() })?;
        match (&event, games.last_mut()) {
            (LogEvent::Header(h), _) => {
                if h.format != LOG_FORMAT {
                    return Err(ArenaError::Log { line: i + 1, reason: format!("unsupported log format {:?}", h.format) });
                }
                games.push(vec![event]);
            }
            (_, Some(g)) => g.push(event),
            (_, None) => {
                return Err(ArenaError::Log { line: i + 1, reason: format!("{} event before any header", event.name()) });
            }
        }
    }
    games.into_iter().map(GameLog::from_events).collect()
}

/// Where a replay first disagreed with the log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Divergence {
    /// Index into the game's events (0 is the header).
    pub event_index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayVerdict {
    pub game_id: u64,
    pub actions: usize,
    pub divergence: Option<Divergence>,
}

impl ReplayVerdict {
    pub fn ok(&self) -> bool {
        self.divergence.is_none()
    }
}

/// Re-run a logged game through the engine and compare every event.
pub fn replay(game: &GameLog) -> ReplayVerdict {
    let mut verdict = ReplayVerdict { game_id: game.header.game_id, actions: 0, divergence: None };
    if let Err((event_index, reason)) = replay_inner(game, &mut verdict.actions) {
        verdict.divergence = Some(Divergence { event_index, reason });
    }
    verdict
}

fn replay_inner(game: &GameLog, actions: &mut usize) -> Result<(), (usize, String)> {
    let h = &game.header;
    let mut state = GameState::setup(&h.deck, h.players.len()).map_err(|e| (0, e.to_string()))?;
    let mut effects: Vec<LogEvent> = Vec::new();
    let mut ended = false;
    for (i, event) in game.events.iter().enumerate().skip(1) {
        let fail = |reason: String| Err((i, reason));
        if ended {
            return fail(format!("{} event after game_end", event.name()));
        }
        if !matches!(event, LogEvent::Penalty { .. } | LogEvent::ChallengeResult(_)) && !effects.is_empty() {
            return fail(format!("expected {} event", effects[0].name()));
        }
        match event {
            LogEvent::Header(_) => return fail("second header inside one game".into()),
            LogEvent::Deal { hands } => {
                let actual: Vec<Vec<Card>> = (0..state.seats()).map(|s| state.hand(s).cards()).collect();
                let mut logged = hands.clone();
                logged.iter_mut().for_each(|h| h.sort());
                if logged != actual {
                    return fail("dealt hands differ".into());
                }
            }
            LogEvent::Flip { cards, active_color } => {
                if cards.last() != Some(&state.top_card()) || *active_color != state.active_color() {
                    return fail("opening card differs".into());
                }
                if *cards != setup_flips(&h.deck, h.players.len()) {
                    return fail("flipped cards differ".into());
                }
            }
            LogEvent::DecisionPoint(p) => {
                if state.is_terminal() {
                    return fail("decision point after the game ended".into());
                }
                if p.seat != state.current_seat() || p.turn_index != state.turn_index() || p.phase != state.phase() {
                    return fail("decision point does not match the acting seat".into());
                }
                if state.legal_decisions().ok().as_ref() != Some(&p.candidates) {
                    return fail("candidate list differs".into());
                }
            }
            LogEvent::Action(a) => {
                if state.is_terminal() {
                    return fail("action after the game ended".into());
                }
                if a.seat != state.current_seat() || a.turn_index != state.turn_index() {
                    return fail(format!(
                        "action by seat {} at turn {}, engine expects seat {} at turn {}",
                        a.seat,
                        a.turn_index,
                        state.current_seat(),
                        state.turn_index()
                    ));
                }
                match state.apply_in_place(a.decision) {
                    Ok(fx) => effects = LogEvent::from_effects(&fx),
                    Err(e) => return fail(e.to_string()),
                }
                *actions += 1;
                if state.digest() != a.digest {
                    return fail("state digest differs after action".into());
                }
            }
            LogEvent::Penalty { .. } | LogEvent::ChallengeResult(_) => {
                if effects.first() != Some(event) {
                    return fail(format!("unexpected {} event", event.name()));
                }
                effects.remove(0);
            }
            LogEvent::GameEnd { winners, hand_sizes, digest, .. } => {
                match state.winners() {
                    Ok(w) if w == *winners => {}
                    Ok(_) => return fail("winners differ".into()),
                    Err(e) => return fail(e.to_string()),
                }
                if *hand_sizes != state.hand_sizes() || *digest != state.digest() {
                    return fail("final state differs".into());
                }
                ended = true;
            }
        }
    }
    if !effects.is_empty() {
        return Err((game.events.len(), format!("missing {} event", effects[0].name())));
    }
    if !ended {
        return Err((game.events.len(), "log ends without game_end".into()));
    }
    Ok(())
}
