//! LLM-backed players.
//!
//! A [`ChatBackend`] turns a message list into reply text. Two backends ship:
//! an HTTP client for chat-completion endpoints and a scripted backend for
//! offline runs. On top sit the single-shot agent ([`vanilla_decide`]) and the
//! three-stage reflective agent ([`tutri_decide`]), which keeps one running
//! conversation: initial choice, reflection on game-history statistics, then
//! reflection on play strategies.

mod agent;
mod backend;
mod history;
mod parse;
mod prompt;

use serde::{Deserialize, Serialize};

pub use agent::{tutri_decide, vanilla_decide, AgentOutcome, LlmPlayer, ReflectionStages, DEFAULT_RETRIES};
#[cfg(feature = "http")]
pub use backend::HttpBackend;
pub use backend::{BackendSpec, HttpSettings, ScriptRule, ScriptedBackend, Semaphore};
pub use history::{HistorySummary, KindCounts};
pub use parse::{parse_reply, AgentReply, ReplyError};
pub use prompt::{
    default_strategies, render_history_reflection, render_prompt, render_strategy_reflection, SYSTEM_PROMPT,
};

use crate::error::BackendError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage { role: Role::Assistant, content: content.into() }
    }
}

/// The conversation held at one decision point.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Transcript {
    pub messages: Vec<ChatMessage>,
    /// Re-asks after unusable replies; not counted as primary exchanges.
    #[serde(default)]
    pub retries: u32,
}

impl Transcript {
    pub fn user_turns(&self) -> usize {
        self.messages.iter().filter(|m| m.role == Role::User).count()
    }

    pub fn assistant_turns(&self) -> usize {
        self.messages.iter().filter(|m| m.role == Role::Assistant).count()
    }

    /// Prompt/reply round trips excluding re-asks.
    pub fn primary_exchanges(&self) -> usize {
        self.assistant_turns().saturating_sub(self.retries as usize)
    }
}

/// How one agent stage ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    /// Usable action on the first reply.
    Ok,
    /// Usable action after one or more re-asks.
    Retried,
    /// No usable reply; the previous action (or a random fallback) stands.
    Invalid,
    /// Backend failed; the previous action (or a random fallback) stands.
    BackendFailed,
}

/// Something that answers chat requests.
pub trait ChatBackend: Send {
    fn complete(&mut self, messages: &[ChatMessage]) -> Result<String, BackendError>;
}

impl<B: ChatBackend + ?Sized> ChatBackend for Box<B> {
    fn complete(&mut self, messages: &[ChatMessage]) -> Result<String, BackendError> {
        (**self).complete(messages)
    }
}
