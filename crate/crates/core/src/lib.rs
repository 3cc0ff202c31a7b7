//! Deterministic UNO arena for measuring sequential decision quality.
//!
//! * [`engine`]: card rules as pure state transitions,
//! * [`oracle`]: Monte Carlo winning-rate estimates of positions and candidates,
//! * [`players`]: random and oracle-greedy players plus the observation model,
//! * [`llm`]: chat backends, prompts, reply parsing and the single-shot and
//!   three-stage reflective agents,
//! * [`metrics`]: WR, ODHR@K, ADR@K and correlation analysis,
//! * [`arena`]: configs, game runner, JSONL logs, replay and traces.

pub mod arena;
pub mod card;
pub mod engine;
pub mod error;
pub mod llm;
pub mod metrics;
pub mod oracle;
pub mod players;
pub mod rng;

pub use card::{new_deck, Card, Color, Function, DECK_SIZE};
pub use engine::{shuffle_deck, wd4_was_illegal, Decision, Direction, GameState, Hand, Phase, Scenario, WinnerSet};
pub use error::{ArenaError, BackendError, EngineError, MetricsError, OracleError, PromptError};
pub use oracle::{estimate, evaluate_candidates, fractional_rank, rollout, CandidateEvaluation, Estimate, OracleConfig};
pub use players::{Observation, Player, PlayerBinding, PlayerDecision, PlayerKind};
pub use metrics::{aggregate, pearson, wr, DecisionRecord, GameOutcome, MetricsReport};
pub use arena::{preset, run_tournament, ArenaConfig, GameLog};
