use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unrecognized card or color token {0:?}")]
pub struct ParseCardError(pub String);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("seat count {0} outside 2..=10")]
    InvalidSeatCount(usize),
    #[error("deck must be a permutation of the 108-card deck: {0}")]
    InvalidDeck(String),
    #[error("game is already over")]
    Terminal,
    #[error("game is not over yet")]
    NotTerminal,
    #[error("illegal decision {decision} in phase {phase}: {reason}")]
    IllegalDecision {
        decision: String,
        phase: &'static str,
        reason: String,
    },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("backend returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed backend response: {0}")]
    Malformed(String),
    #[error("scripted backend has no response for request #{ordinal}")]
    ScriptExhausted { ordinal: usize },
    #[error("missing API key: environment variable {0} is not set")]
    MissingKey(String),
    #[error("backend support for {0:?} is not compiled in")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("prompt kind {kind} does not match observation phase {phase}")]
    PhaseMismatch { kind: &'static str, phase: &'static str },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("game count must be at least 1")]
    NoGames,
    #[error("win count {wins} exceeds game count {games}")]
    TooManyWins { wins: u64, games: u64 },
    #[error("logs disagree on oracle settings: {0}")]
    MixedSettings(String),
    #[error("decision record inconsistent: {0}")]
    BadRecord(String),
}

#[derive(Debug, Error)]
pub enum ArenaError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("malformed game log at line {line}: {reason}")]
    Log { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("candidate list is empty")]
    NoCandidates,
    #[error("chosen index {chosen} out of range for {len} candidates")]
    ChosenOutOfRange { chosen: usize, len: usize },
    #[error("simulation count must be at least 1")]
    NoSimulations,
    #[error("threshold p = {0} outside [0, 1]")]
    BadThreshold(f64),
}
