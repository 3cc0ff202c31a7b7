use super::parse::parse_reply;
use super::prompt::{render_history_reflection, render_prompt, render_retry, render_strategy_reflection, SYSTEM_PROMPT};
use super::{default_strategies, ChatBackend, ChatMessage, HistorySummary, StageStatus, Transcript};
use crate::engine::Decision;
use crate::players::{random_decide, Observation, Player, PlayerDecision};
use crate::rng::Rng;
use crate::GameState;

/// Re-asks allowed per stage after an unusable reply.
pub const DEFAULT_RETRIES: u32 = 2;

/// Which reflection stages follow the initial choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReflectionStages {
    pub history: bool,
    pub strategy: bool,
}

impl Default for ReflectionStages {
    fn default() -> Self {
        ReflectionStages { history: true, strategy: true }
    }
}

/// Result of one agent decision.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentOutcome {
    pub decision: Decision,
    pub transcript: Transcript,
    pub stage_actions: Vec<Option<Decision>>,
    pub stage_status: Vec<StageStatus>,
    /// No stage produced a usable action before the first one was needed, so
    /// a uniformly random legal action was taken.
    pub fallback: bool,
}

impl From<AgentOutcome> for PlayerDecision {
    fn from(o: AgentOutcome) -> Self {
        PlayerDecision {
            decision: Some(o.decision),
            transcript: Some(o.transcript),
            stage_actions: o.stage_actions,
            stage_status: o.stage_status,
            fallback: o.fallback,
        }
    }
}

/// One prompt plus up to `retries` re-asks, appended to `transcript`.
fn run_stage(
    backend: &mut dyn ChatBackend,
    transcript: &mut Transcript,
    prompt: String,
    obs: &Observation,
    retries: u32,
) -> (Option<Decision>, StageStatus) {
    transcript.messages.push(ChatMessage::user(prompt));
    let mut attempt = 0;
    loop {
        let reply = match backend.complete(&transcript.messages) {
            Ok(r) => r,
            Err(_) => {
                // Drop the unanswered request so the conversation stays well formed.
                transcript.messages.pop();
                if attempt > 0 {
                    transcript.retries -= 1;
                }
                return (None, StageStatus::BackendFailed);
            }
        };
        let parsed = parse_reply(&reply, &obs.candidates);
        transcript.messages.push(ChatMessage::assistant(reply));
        match parsed {
            Ok(r) => return (Some(r.action), if attempt == 0 { StageStatus::Ok } else { StageStatus::Retried }),
            Err(_) if attempt >= retries => return (None, StageStatus::Invalid),
            Err(e) => {
                attempt += 1;
                transcript.retries += 1;
                transcript.messages.push(ChatMessage::user(render_retry(&e.to_string(), obs)));
            }
        }
    }
}

fn opening(obs: &Observation) -> (Transcript, String) {
    let transcript = Transcript { messages: vec![ChatMessage::system(SYSTEM_PROMPT)], retries: 0 };
    let prompt = render_prompt(obs.phase, obs).expect("prompt kind taken from the observation");
    (transcript, prompt)
}

fn fallback(obs: &Observation, rng: &mut Rng, mut outcome: AgentOutcome) -> AgentOutcome {
    outcome.decision = random_decide(&obs.candidates, rng);
    outcome.fallback = true;
    outcome
}

/// Single prompt/reply agent.
pub fn vanilla_decide(backend: &mut dyn ChatBackend, obs: &Observation, rng: &mut Rng, retries: u32) -> AgentOutcome {
    let (mut transcript, prompt) = opening(obs);
    let (action, status) = run_stage(backend, &mut transcript, prompt, obs, retries);
    let outcome = AgentOutcome {
        decision: action.unwrap_or(Decision::DrawCard),
        transcript,
        stage_actions: vec![action],
        stage_status: vec![status],
        fallback: false,
    };
    match action {
        Some(_) => outcome,
        None => fallback(obs, rng, outcome),
    }
}

/// Three-stage agent: initial choice, history reflection, strategy
/// reflection, all in one conversation. A reflection stage without a usable
/// reply leaves the previous action standing; if the initial stage fails the
/// agent falls back to a random legal action and skips the reflections.
pub fn tutri_decide(
    backend: &mut dyn ChatBackend,
    obs: &Observation,
    stages: ReflectionStages,
    strategies: &[String],
    rng: &mut Rng,
    retries: u32,
) -> AgentOutcome {
    let (mut transcript, prompt) = opening(obs);
    let (first, status) = run_stage(backend, &mut transcript, prompt, obs, retries);
    let mut outcome = AgentOutcome {
        decision: first.unwrap_or(Decision::DrawCard),
        transcript: Transcript::default(),
        stage_actions: vec![first],
        stage_status: vec![status],
        fallback: false,
    };
    if first.is_none() {
        outcome.transcript = transcript;
        return fallback(obs, rng, outcome);
    }
    let mut prompts = Vec::new();
    if stages.history {
        prompts.push(render_history_reflection(&HistorySummary::from_observation(obs), obs));
    }
    if stages.strategy {
        prompts.push(render_strategy_reflection(strategies, obs));
    }
    for prompt in prompts {
        let (action, status) = run_stage(backend, &mut transcript, prompt, obs, retries);
        if let Some(a) = action {
            outcome.decision = a;
        }
        outcome.stage_actions.push(action);
        outcome.stage_status.push(status);
    }
    outcome.transcript = transcript;
    outcome
}

enum Mode {
    Vanilla,
    Tutri { stages: ReflectionStages, strategies: Vec<String> },
}

/// LLM-backed seat. Sees only the observation.
pub struct LlmPlayer {
    backend: Box<dyn ChatBackend>,
    mode: Mode,
    rng: Rng,
    retries: u32,
}

impl LlmPlayer {
    pub fn vanilla(backend: Box<dyn ChatBackend>, seed: u64) -> Self {
        LlmPlayer { backend, mode: Mode::Vanilla, rng: Rng::new(seed), retries: DEFAULT_RETRIES }
    }

    pub fn tutri(
        backend: Box<dyn ChatBackend>,
        stages: ReflectionStages,
        strategies: Option<Vec<String>>,
        seed: u64,
    ) -> Self {
        let strategies = strategies.unwrap_or_else(default_strategies);
        LlmPlayer { backend, mode: Mode::Tutri { stages, strategies }, rng: Rng::new(seed), retries: DEFAULT_RETRIES }
    }

    pub fn with_retries(mut self, retries: u32) -> Self {
        self.retries = retries;
        self
    }
}

impl Player for LlmPlayer {
    fn decide(&mut self, _state: &GameState, obs: &Observation) -> PlayerDecision {
        let backend = self.backend.as_mut();
        match &self.mode {
            Mode::Vanilla => vanilla_decide(backend, obs, &mut self.rng, self.retries),
            Mode::Tutri { stages, strategies } => {
                tutri_decide(backend, obs, *stages, strategies, &mut self.rng, self.retries)
            }
        }
        .into()
    }
}
