//! OpenAI-style chat-completions backend over HTTP.
//!
//! Requests per-token log-probabilities when asked and reconstructs byte
//! spans from the returned token strings. Transport failures are retried
//! with bounded exponential backoff.

use std::time::Duration;

use serde_json::{json, Value};

use super::{ChatClient, ChatMessage, Completion, GenParams, LlmError, TokenSpan};

#[derive(Debug, Clone)]
pub struct HttpClientConfig {
    /// Base URL of the chat-completions endpoint, e.g. `http://host:8000/v1`.
    pub base_url: String,
    pub api_key: Option<String>,
    pub model: String,
    pub timeout_secs: u64,
    /// Total attempts per request (first try included).
    pub max_attempts: u32,
}

impl Default for HttpClientConfig {
    fn default() -> Self {
        HttpClientConfig {
            base_url: String::new(),
            api_key: None,
            model: String::new(),
            timeout_secs: 120,
            max_attempts: 3,
        }
    }
}

pub struct HttpChatClient {
    cfg: HttpClientConfig,
    client: reqwest::blocking::Client,
}

impl HttpChatClient {
    pub fn new(cfg: HttpClientConfig) -> Result<Self, LlmError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_secs))
            .build()
            .map_err(|e| LlmError::Transport(format!("client build: {e}")))?;
        Ok(HttpChatClient { cfg, client })
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.cfg.base_url.trim_end_matches('/'))
    }
}

/// Request body for one completion call.
pub fn build_request_body(model: &str, messages: &[ChatMessage], params: &GenParams) -> Value {
    let msgs: Vec<Value> = messages
        .iter()
        .map(|m| json!({"role": m.role.as_str(), "content": m.content}))
        .collect();
    let mut body = json!({
        "model": model,
        "messages": msgs,
        "temperature": params.temperature,
        "max_tokens": params.max_tokens,
    });
    if let Some(seed) = params.seed {
        body["seed"] = json!(seed);
    }
    if params.want_logprobs {
        body["logprobs"] = json!(true);
    }
    body
}

/// Parse a chat-completions response. When log-probabilities were requested
/// but the token strings do not reconstruct the content exactly, spans are
/// dropped rather than guessed; the boundary layer treats that as a signal
/// to retrieve.
pub fn parse_response_body(body: &Value, want_logprobs: bool) -> Result<Completion, LlmError> {
    let choice = body
        .get("choices")
        .and_then(|c| c.get(0))
        .ok_or_else(|| LlmError::Transport("response has no choices".into()))?;
    let text = choice
        .pointer("/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| LlmError::Transport("response has no message content".into()))?
        .to_string();

    if !want_logprobs {
        return Ok(Completion { text, token_spans: None });
    }

    let tokens = match choice.pointer("/logprobs/content").and_then(Value::as_array) {
        Some(tokens) => tokens,
        None => {
            return Err(LlmError::Capability(
                "backend did not return log-probabilities".into(),
            ))
        }
    };
    let mut spans = Vec::with_capacity(tokens.len());
    let mut offset = 0usize;
    for t in tokens {
        let piece = t.get("token").and_then(Value::as_str).unwrap_or("");
        let logprob = t.get("logprob").and_then(Value::as_f64).unwrap_or(0.0);
        let end = offset + piece.len();
        if text.get(offset..end) != Some(piece) {
            // Token strings disagree with the content; spans would be wrong.
            return Ok(Completion { text, token_spans: None });
        }
        spans.push(TokenSpan { start: offset, end, logprob });
        offset = end;
    }
    if offset != text.len() {
        return Ok(Completion { text, token_spans: None });
    }
    Ok(Completion { text, token_spans: Some(spans) })
}

impl ChatClient for HttpChatClient {
    fn complete(&self, messages: &[ChatMessage], params: &GenParams) -> Result<Completion, LlmError> {
        let body = build_request_body(&self.cfg.model, messages, params);
        let mut last_err = LlmError::Transport("no attempts made".into());
        for attempt in 0..self.cfg.max_attempts {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(200 * (1 << (attempt - 1))));
            }
            let mut req = self.client.post(self.endpoint()).json(&body);
            if let Some(key) = &self.cfg.api_key {
                req = req.bearer_auth(key);
            }
            match req.send() {
                Ok(resp) => {
                    let status = resp.status();
                    if status.is_success() {
                        let value: Value = resp
                            .json()
                            .map_err(|e| LlmError::Transport(format!("decode: {e}")))?;
                        return parse_response_body(&value, params.want_logprobs);
                    }
                    let retryable = status.as_u16() == 429 || status.is_server_error();
                    let text = resp.text().unwrap_or_default();
                    last_err = LlmError::Transport(format!("status {status}: {text}"));
                    if !retryable {
                        return Err(last_err);
                    }
                }
                Err(e) if e.is_timeout() => return Err(LlmError::Timeout(self.cfg.timeout_secs)),
                Err(e) => last_err = LlmError::Transport(e.to_string()),
            }
        }
        Err(last_err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::Role;

    #[test]
    fn request_body_shape() {
        let messages = vec![ChatMessage::system("sys"), ChatMessage::user("hi")];
        let params = GenParams {
            temperature: 0.6,
            seed: Some(11),
            max_tokens: 64,
            want_logprobs: true,
        };
        let body = build_request_body("m", &messages, &params);
        assert_eq!(body["model"], "m");
        assert_eq!(body["messages"][0]["role"], Role::System.as_str());
        assert_eq!(body["messages"][1]["content"], "hi");
        assert_eq!(body["seed"], 11);
        assert_eq!(body["logprobs"], true);
    }

    #[test]
    fn response_with_logprob_spans() {
        let body = json!({
            "choices": [{
                "message": {"content": "ab cd"},
                "logprobs": {"content": [
                    {"token": "ab", "logprob": -0.1},
                    {"token": " cd", "logprob": -0.2},
                ]}
            }]
        });
        let c = parse_response_body(&body, true).unwrap();
        assert_eq!(c.text, "ab cd");
        let spans = c.token_spans.unwrap();
        assert_eq!(spans.len(), 2);
        assert_eq!((spans[1].start, spans[1].end), (2, 5));
    }

    #[test]
    fn response_with_mismatched_tokens_drops_spans() {
        let body = json!({
            "choices": [{
                "message": {"content": "abc"},
                "logprobs": {"content": [{"token": "zz", "logprob": -0.1}]}
            }]
        });
        let c = parse_response_body(&body, true).unwrap();
        assert!(c.token_spans.is_none());
    }

    #[test]
    fn response_without_logprobs_is_capability_error() {
        let body = json!({"choices": [{"message": {"content": "x"}}]});
        let err = parse_response_body(&body, true).unwrap_err();
        assert!(matches!(err, LlmError::Capability(_)));
        // Fine when they were not requested.
        assert!(parse_response_body(&body, false).is_ok());
    }
}
