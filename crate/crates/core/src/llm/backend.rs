use std::path::Path;
use std::sync::{Arc, Condvar, Mutex};

use serde::{Deserialize, Serialize};

use super::{ChatBackend, ChatMessage, Role};
use crate::error::BackendError;

/// Backend entry of an arena config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BackendSpec {
    Http(HttpSettings),
    Scripted {
        /// JSON script file, resolved relative to the config file.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<String>,
        #[serde(default)]
        rules: Vec<ScriptRule>,
        #[serde(default)]
        default: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpSettings {
    /// Either the API root (`.../v1`) or the full chat-completions URL.
    pub base_url: String,
    pub model: String,
    /// Environment variable holding the bearer token; no auth header when unset.
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    /// Transport-level retries after the first attempt.
    #[serde(default = "default_transport_retries")]
    pub retries: u32,
    #[serde(default = "default_temperature")]
    pub temperature: Option<f64>,
    #[serde(default)]
    pub max_tokens: Option<u32>,
    /// Cap on concurrent requests to this backend across all games.
    #[serde(default)]
    pub max_concurrent: Option<usize>,
}

fn default_timeout() -> u64 {
    60
}
fn default_transport_retries() -> u32 {
    2
}
fn default_temperature() -> Option<f64> {
    Some(0.0)
}

impl HttpSettings {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        HttpSettings {
            base_url: base_url.into(),
            model: model.into(),
            api_key_env: None,
            timeout_secs: default_timeout(),
            retries: default_transport_retries(),
            temperature: default_temperature(),
            max_tokens: None,
            max_concurrent: None,
        }
    }

    pub fn endpoint(&self) -> String {
        let base = self.base_url.trim_end_matches('/');
        if base.ends_with("/chat/completions") {
            base.to_string()
        } else {
            format!("{base}/chat/completions")
        }
    }
}

#[derive(Debug, Deserialize)]
struct ScriptFile {
    #[serde(default)]
    rules: Vec<ScriptRule>,
    #[serde(default)]
    default: Option<String>,
}

impl BackendSpec {
    /// Inline any script file so the spec is self-contained.
    pub fn resolve(self, base_dir: &Path) -> Result<BackendSpec, BackendError> {
        match self {
            BackendSpec::Scripted { path: Some(path), mut rules, default } => {
                let text = std::fs::read_to_string(base_dir.join(&path))?;
                let file: ScriptFile =
                    serde_json::from_str(&text).map_err(|e| BackendError::Malformed(format!("{path}: {e}")))?;
                rules.extend(file.rules);
                Ok(BackendSpec::Scripted { path: None, rules, default: default.or(file.default) })
            }
            other => Ok(other),
        }
    }

    /// Fresh backend instance; scripted backends restart their request count.
    pub fn build(&self, limit: Option<Semaphore>) -> Result<Box<dyn ChatBackend>, BackendError> {
        match self {
            BackendSpec::Scripted { path: Some(p), .. } => {
                Err(BackendError::Malformed(format!("script file {p} was not resolved")))
            }
            BackendSpec::Scripted { rules, default, .. } => {
                Ok(Box::new(ScriptedBackend::new(rules.clone(), default.clone())))
            }
            #[cfg(feature = "http")]
            BackendSpec::Http(settings) => Ok(Box::new(HttpBackend::new(settings.clone(), limit)?)),
            #[cfg(not(feature = "http"))]
            BackendSpec::Http(_) => {
                let _ = limit;
                Err(BackendError::Unsupported("http".into()))
            }
        }
    }
}

/// Canned reply selector: by request ordinal, or by a substring of the latest
/// user message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptRule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordinal: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contains: Option<String>,
    pub reply: String,
}

/// Offline backend answering from a script.
///
/// Request `n` (counted from zero per instance) gets the reply of the rule
/// with `ordinal == n`; failing that, the first `contains` rule matching the
/// latest user message; failing that, the default reply.
#[derive(Debug, Clone)]
pub struct ScriptedBackend {
    rules: Vec<ScriptRule>,
    default: Option<String>,
    served: usize,
}

impl ScriptedBackend {
    pub fn new(rules: Vec<ScriptRule>, default: Option<String>) -> Self {
        ScriptedBackend { rules, default, served: 0 }
    }

    /// Replies served in order, one per request.
    pub fn sequence<S: Into<String>>(replies: impl IntoIterator<Item = S>) -> Self {
        let rules = replies
            .into_iter()
            .enumerate()
            .map(|(i, r)| ScriptRule { ordinal: Some(i), contains: None, reply: r.into() })
            .collect();
        ScriptedBackend::new(rules, None)
    }

    /// The same reply to every request.
    pub fn constant(reply: impl Into<String>) -> Self {
        ScriptedBackend::new(Vec::new(), Some(reply.into()))
    }

    pub fn served(&self) -> usize {
        self.served
    }
}

impl ChatBackend for ScriptedBackend {
    fn complete(&mut self, messages: &[ChatMessage]) -> Result<String, BackendError> {
        let ordinal = self.served;
        self.served += 1;
        let last_user = messages.iter().rev().find(|m| m.role == Role::User).map_or("", |m| m.content.as_str());
        self.rules
            .iter()
            .find(|r| r.ordinal == Some(ordinal))
            .or_else(|| {
                self.rules
                    .iter()
                    .find(|r| r.ordinal.is_none() && r.contains.as_deref().is_some_and(|c| last_user.contains(c)))
            })
            .map(|r| r.reply.clone())
            .or_else(|| self.default.clone())
            .ok_or(BackendError::ScriptExhausted { ordinal })
    }
}

/// Counting semaphore shared by every game that talks to one backend.
#[derive(Debug, Clone)]
pub struct Semaphore(Arc<(Mutex<usize>, Condvar)>);

pub struct Permit(Semaphore);

impl Semaphore {
    pub fn new(permits: usize) -> Self {
        Semaphore(Arc::new((Mutex::new(permits.max(1)), Condvar::new())))
    }

    pub fn acquire(&self) -> Permit {
        let (lock, cv) = &*self.0;
        let mut free = lock.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Permit(self.clone())
    }
}

impl Drop for Permit {
    fn drop(&mut self) {
        let (lock, cv) = &*(self.0).0;
        *lock.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        cv.notify_one();
    }
}

/// Chat-completions client (OpenAI-compatible wire format).
#[cfg(feature = "http")]
pub struct HttpBackend {
    client: reqwest::blocking::Client,
    settings: HttpSettings,
    api_key: Option<String>,
    limit: Option<Semaphore>,
}

#[cfg(feature = "http")]
impl HttpBackend {
    pub fn new(settings: HttpSettings, limit: Option<Semaphore>) -> Result<Self, BackendError> {
        let api_key = match &settings.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| BackendError::MissingKey(var.clone()))?),
            None => None,
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_secs(settings.timeout_secs))
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        Ok(HttpBackend { client, settings, api_key, limit })
    }

    fn request_body(&self, messages: &[ChatMessage]) -> serde_json::Value {
        let mut body = serde_json::json!({ "model": self.settings.model, "messages": messages });
        if let Some(t) = self.settings.temperature {
            body["temperature"] = t.into();
        }
        if let Some(m) = self.settings.max_tokens {
            body["max_tokens"] = m.into();
        }
        body
    }

    fn attempt(&self, body: &serde_json::Value) -> Result<String, BackendError> {
        let mut req = self.client.post(self.settings.endpoint()).json(body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| BackendError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(BackendError::Status { status: status.as_u16(), body: text });
        }
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| BackendError::Malformed(e.to_string()))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| BackendError::Malformed("no choices[0].message.content".into()))
    }
}

#[cfg(feature = "http")]
fn retryable(err: &BackendError) -> bool {
    match err {
        BackendError::Transport(_) => true,
        BackendError::Status { status, .. } => *status == 429 || *status >= 500,
        _ => false,
    }
}

#[cfg(feature = "http")]
impl ChatBackend for HttpBackend {
    fn complete(&mut self, messages: &[ChatMessage]) -> Result<String, BackendError> {
        let _permit = self.limit.as_ref().map(Semaphore::acquire);
        let body = self.request_body(messages);
        let mut attempt = 0;
        loop {
            match self.attempt(&body) {
                Err(e) if retryable(&e) && attempt < self.settings.retries => {
                    attempt += 1;
                    std::thread::sleep(std::time::Duration::from_millis(200 << attempt.min(5)));
                }
                other => return other,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scripted_resolution_order() {
        let rules = vec![
            ScriptRule { ordinal: Some(1), contains: None, reply: "second".into() },
            ScriptRule { ordinal: None, contains: Some("color".into()), reply: "by-substring".into() },
        ];
        let mut b = ScriptedBackend::new(rules, Some("fallback".into()));
        let ask = |t: &str| vec![ChatMessage::system("sys color"), ChatMessage::user(t)];
        assert_eq!(b.complete(&ask("pick a color")).unwrap(), "by-substring");
        assert_eq!(b.complete(&ask("pick a color")).unwrap(), "second");
        assert_eq!(b.complete(&ask("pick a card")).unwrap(), "fallback");
        let mut empty = ScriptedBackend::sequence(["only"]);
        assert_eq!(empty.complete(&ask("x")).unwrap(), "only");
        assert!(matches!(empty.complete(&ask("x")), Err(BackendError::ScriptExhausted { ordinal: 1 })));
    }

    #[test]
    fn script_file_resolution() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("s.json"), r#"{"rules":[{"ordinal":0,"reply":"a"}],"default":"d"}"#).unwrap();
        let spec = BackendSpec::Scripted { path: Some("s.json".into()), rules: vec![], default: None };
        assert!(spec.build(None).is_err());
        let resolved = spec.resolve(dir.path()).unwrap();
        let mut b = resolved.build(None).unwrap();
        assert_eq!(b.complete(&[ChatMessage::user("q")]).unwrap(), "a");
        assert_eq!(b.complete(&[ChatMessage::user("q")]).unwrap(), "d");
    }

    #[test]
    fn endpoint_normalization() {
        assert_eq!(HttpSettings::new("http://h/v1/", "m").endpoint(), "http://h/v1/chat/completions");
        assert_eq!(HttpSettings::new("http://h/v1/chat/completions", "m").endpoint(), "http://h/v1/chat/completions");
    }

    #[test]
    fn semaphore_limits() {
        let s = Semaphore::new(1);
        let p = s.acquire();
        let s2 = s.clone();
        let h = std::thread::spawn(move || {
            let _q = s2.acquire();
        });
        std::thread::sleep(std::time::Duration::from_millis(20));
        assert!(!h.is_finished());
        drop(p);
        h.join().unwrap();
    }
}
