//! Chat-completion abstraction with per-token log-probabilities.
//!
//! Two backends implement [`ChatClient`]: an OpenAI-style HTTP client
//! ([`http::HttpChatClient`]) and a deterministic fingerprint-keyed replay
//! client ([`scripted::ScriptedClient`]) used for tests and offline runs.

pub mod http;
pub mod scripted;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

/// One turn of a conversation. Content is preserved byte-exact; the solving
/// protocol's special tokens live inside it.
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

/// Byte range of one generated token within [`Completion::text`], plus its
/// log-probability (≤ 0). Spans are contiguous and cover the text exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenSpan {
    pub start: usize,
    pub end: usize,
    pub logprob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    /// Present when the request asked for log-probabilities and the backend
    /// could report them.
    pub token_spans: Option<Vec<TokenSpan>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub temperature: f64,
    pub seed: Option<u64>,
    pub max_tokens: u32,
    pub want_logprobs: bool,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams { temperature: 0.0, seed: None, max_tokens: 1024, want_logprobs: false }
    }
}

impl GenParams {
    pub fn with_temperature(mut self, t: f64) -> Self {
        self.temperature = t;
        self
    }
    pub fn with_logprobs(mut self) -> Self {
        self.want_logprobs = true;
        self
    }
}

#[derive(Debug, Error)]
pub enum LlmError {
    /// Network-level failure; the HTTP backend retries these with bounded
    /// exponential backoff before surfacing one.
    #[error("transport error: {0}")]
    Transport(String),
    /// The backend cannot satisfy the request (e.g. no log-probabilities).
    #[error("capability error: {0}")]
    Capability(String),
    #[error("request timed out after {0}s")]
    Timeout(u64),
}

pub trait ChatClient: Send + Sync {
    fn complete(&self, messages: &[ChatMessage], params: &GenParams) -> Result<Completion, LlmError>;
}

/// Stable content hash of a message list, used to key replay fixtures.
/// Order-sensitive; any single-byte change yields a different value.
pub fn fingerprint(messages: &[ChatMessage]) -> String {
    let mut hasher = Sha256::new();
    for m in messages {
        let role = m.role.as_str();
        hasher.update((role.len() as u64).to_be_bytes());
        hasher.update(role.as_bytes());
        hasher.update((m.content.len() as u64).to_be_bytes());
        hasher.update(m.content.as_bytes());
    }
    hex::encode(hasher.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fingerprint_is_stable_and_content_sensitive() {
        let a = vec![ChatMessage::system("s"), ChatMessage::user("hello")];
        assert_eq!(fingerprint(&a), fingerprint(&a.clone()));

        let mut b = a.clone();
        b[1].content = "hellp".into();
        assert_ne!(fingerprint(&a), fingerprint(&b));
    }

    #[test]
    fn fingerprint_is_order_sensitive() {
        let a = vec![ChatMessage::user("x"), ChatMessage::user("y")];
        let b = vec![ChatMessage::user("y"), ChatMessage::user("x")];
        assert_ne!(fingerprint(&a), fingerprint(&b));
    }

    #[test]
    fn fingerprint_has_no_concatenation_ambiguity() {
        let a = vec![ChatMessage::user("ab"), ChatMessage::user("c")];
        let b = vec![ChatMessage::user("a"), ChatMessage::user("bc")];
        assert_ne!(fingerprint(&a), fingerprint(&b));
    }
}
