//! Remote agent adapter: drive a real LLM endpoint as the target.
//!
//! Speaks the common chat-completions JSON shape: the conversation is sent
//! as `messages`, tool access is advertised under `tools`, and the reply's
//! `choices[0].message` either carries `tool_calls` (mapped to
//! [`AgentDecision::Act`]), a `refusal` (mapped to `Refuse`), or plain
//! `content` (mapped to `Answer`).
//!
//! Behind the [`Transport`] trait sit a live HTTP client and a transcript
//! replayer. Every exchange is recorded as one JSONL line, so a campaign
//! run against a live endpoint leaves behind a transcript that reruns
//! byte-for-byte offline — tests and CI never need network access. The
//! bearer token is read from an environment variable at send time and is
//! never stored in config echoes, transcripts, or ledgers.
//!
//! Failures are typed so campaign policy can react: transport failures and
//! rate limits are retryable, malformed payloads are not.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::agents::{AgentDecision, ConversationContext};
use crate::trajectory::TrajectoryStep;
use crate::world::{ToolCall, ToolKind};

/// Typed remote failure modes.
#[derive(Debug, Error)]
pub enum RemoteError {
    /// Network-level failure (connect, timeout, TLS, 5xx).
    #[error("transport failure: {0}")]
    Transport(String),
    /// The endpoint asked us to slow down (HTTP 429).
    #[error("rate limited{}", retry_hint(.retry_after_secs))]
    RateLimited { retry_after_secs: Option<u64> },
    /// The endpoint answered, but not in a shape we can act on.
    #[error("malformed response: {0}")]
    Malformed(String),
    /// Transcript replay ran out of recorded exchanges.
    #[error("transcript exhausted after {0} exchanges")]
    TranscriptExhausted(usize),
}

fn retry_hint(retry_after_secs: &Option<u64>) -> String {
    retry_after_secs.map_or(String::new(), |s| format!(" (retry after {s}s)"))
}

/// Endpoint configuration. The token itself never lives here — only the
/// name of the environment variable that holds it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RemoteEndpointConfig {
    pub base_url: String,
    pub model: String,
    /// Environment variable holding the bearer token, if auth is needed.
    pub auth_env: Option<String>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    /// Retries on transport/rate-limit errors before the campaign aborts.
    #[serde(default)]
    pub max_retries: u32,
}

fn default_timeout_secs() -> u64 {
    30
}

impl Default for RemoteEndpointConfig {
    fn default() -> Self {
        Self {
            base_url: "http://localhost:8080/v1/chat/completions".into(),
            model: "target-agent".into(),
            auth_env: None,
            timeout_secs: default_timeout_secs(),
            max_retries: 0,
        }
    }
}

/// One request/response exchange, as persisted in a transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub request: Value,
    pub response: Value,
}

/// Anything that can answer a chat-completions request.
pub trait Transport: Send {
    fn send(&mut self, request: &Value) -> Result<Value, RemoteError>;
}

/// Live HTTP transport over a blocking client.
pub struct HttpTransport {
    config: RemoteEndpointConfig,
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new(config: RemoteEndpointConfig) -> Result<Self, RemoteError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| RemoteError::Transport(e.to_string()))?;
        Ok(Self { config, client })
    }
}

impl Transport for HttpTransport {
    fn send(&mut self, request: &Value) -> Result<Value, RemoteError> {
        let mut builder = self.client.post(&self.config.base_url).json(request);
        if let Some(var) = &self.config.auth_env {
            if let Ok(token) = std::env::var(var) {
                builder = builder.bearer_auth(token);
            }
        }
        let response = builder
            .send()
            .map_err(|e| RemoteError::Transport(e.to_string()))?;
        let status = response.status();
        if status.as_u16() == 429 {
            let retry_after_secs = response
                .headers()
                .get("retry-after")
                .and_then(|v| v.to_str().ok())
                .and_then(|v| v.parse().ok());
            return Err(RemoteError::RateLimited { retry_after_secs });
        }
        if !status.is_success() {
            return Err(RemoteError::Transport(format!("http status {status}")));
        }
        response
            .json()
            .map_err(|e| RemoteError::Malformed(e.to_string()))
    }
}

/// Replays a recorded transcript in order, ignoring request bodies.
pub struct ReplayTransport {
    exchanges: Vec<Exchange>,
    cursor: usize,
}

impl ReplayTransport {
    #[must_use]
    pub fn new(exchanges: Vec<Exchange>) -> Self {
        Self { exchanges, cursor: 0 }
    }

    /// Loads a JSONL transcript written by [`TranscriptRecorder`].
    pub fn from_file(path: &std::path::Path) -> Result<Self, RemoteError> {
        let file = std::fs::File::open(path)
            .map_err(|e| RemoteError::Transport(format!("open transcript: {e}")))?;
        let mut exchanges = Vec::new();
        for line in std::io::BufReader::new(file).lines() {
            let line = line.map_err(|e| RemoteError::Transport(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            exchanges.push(
                serde_json::from_str(&line)
                    .map_err(|e| RemoteError::Malformed(format!("transcript line: {e}")))?,
            );
        }
        Ok(Self::new(exchanges))
    }
}

impl Transport for ReplayTransport {
    fn send(&mut self, _request: &Value) -> Result<Value, RemoteError> {
        let exchange = self
            .exchanges
            .get(self.cursor)
            .ok_or(RemoteError::TranscriptExhausted(self.exchanges.len()))?;
        self.cursor += 1;
        Ok(exchange.response.clone())
    }
}

/// Appends exchanges to a JSONL transcript file.
pub struct TranscriptRecorder {
    file: std::fs::File,
}

impl TranscriptRecorder {
    pub fn create(path: &std::path::Path) -> std::io::Result<Self> {
        Ok(Self { file: std::fs::File::create(path)? })
    }

    pub fn record(&mut self, exchange: &Exchange) -> std::io::Result<()> {
        let line = serde_json::to_string(exchange).expect("exchange serializes");
        writeln!(self.file, "{line}")
    }
}

/// A remote target bound to a transport and an optional transcript.
pub struct RemoteSession {
    config: RemoteEndpointConfig,
    transport: Box<dyn Transport>,
    recorder: Option<TranscriptRecorder>,
}

impl RemoteSession {
    #[must_use]
    pub fn new(config: RemoteEndpointConfig, transport: Box<dyn Transport>) -> Self {
        Self { config, transport, recorder: None }
    }

    /// Connects a live HTTP transport.
    pub fn connect(config: RemoteEndpointConfig) -> Result<Self, RemoteError> {
        let transport = HttpTransport::new(config.clone())?;
        Ok(Self::new(config, Box::new(transport)))
    }

    /// Records every exchange to `path` for later offline replay.
    pub fn with_transcript(mut self, path: &std::path::Path) -> std::io::Result<Self> {
        self.recorder = Some(TranscriptRecorder::create(path)?);
        Ok(self)
    }

    /// Asks the endpoint for its next decision, retrying retryable failures
    /// up to the configured budget.
    pub fn decide(&mut self, ctx: &ConversationContext<'_>) -> Result<AgentDecision, RemoteError> {
        let request = build_request(&self.config.model, ctx);
        let mut attempt = 0;
        loop {
            match self.transport.send(&request) {
                Ok(response) => {
                    if let Some(recorder) = &mut self.recorder {
                        recorder
                            .record(&Exchange { request: request.clone(), response: response.clone() })
                            .map_err(|e| RemoteError::Transport(format!("transcript write: {e}")))?;
                    }
                    return parse_decision(&response);
                }
                Err(err @ (RemoteError::Transport(_) | RemoteError::RateLimited { .. }))
                    if attempt < self.config.max_retries =>
                {
                    attempt += 1;
                    let _ = err;
                }
                Err(err) => return Err(err),
            }
        }
    }
}

/// Serializes the conversation into a chat-completions request body.
#[must_use]
pub fn build_request(model: &str, ctx: &ConversationContext<'_>) -> Value {
    let mut messages = vec![json!({"role": "system", "content": ctx.system_prompt})];
    for step in ctx.steps {
        match step {
            TrajectoryStep::UserMessage { text } => {
                messages.push(json!({"role": "user", "content": text}));
            }
            TrajectoryStep::ToolCall { call, .. } => {
                messages.push(json!({
                    "role": "assistant",
                    "tool_calls": [{
                        "type": "function",
                        "function": {
                            "name": call.tool.name(),
                            "arguments": serde_json::to_string(&call.args).unwrap(),
                        },
                    }],
                }));
            }
            TrajectoryStep::ToolResult { result, .. } => {
                messages.push(json!({"role": "tool", "content": result.output}));
            }
            TrajectoryStep::GuardrailBlock { matched_pattern, .. } => {
                messages.push(json!({
                    "role": "tool",
                    "content": format!("error: request blocked by content policy ({matched_pattern})"),
                }));
            }
            TrajectoryStep::Refusal { text, .. } | TrajectoryStep::Answer { text, .. } => {
                messages.push(json!({"role": "assistant", "content": text}));
            }
        }
    }
    let tools: Vec<Value> = ToolKind::builtins()
        .iter()
        .map(|tool| {
            json!({
                "type": "function",
                "function": {"name": tool.name(), "parameters": {"type": "object"}},
            })
        })
        .collect();
    json!({"model": model, "messages": messages, "tools": tools})
}

/// Maps a chat-completions response to a decision.
pub fn parse_decision(response: &Value) -> Result<AgentDecision, RemoteError> {
    let message = response
        .pointer("/choices/0/message")
        .ok_or_else(|| RemoteError::Malformed("missing choices[0].message".into()))?;

    if let Some(calls) = message.get("tool_calls").and_then(Value::as_array) {
        if !calls.is_empty() {
            let mut parsed = Vec::with_capacity(calls.len());
            for call in calls {
                parsed.push(parse_tool_call(call)?);
            }
            return Ok(AgentDecision::Act(parsed));
        }
    }
    if let Some(refusal) = message.get("refusal").and_then(Value::as_str) {
        return Ok(AgentDecision::Refuse(refusal.to_string()));
    }
    match message.get("content").and_then(Value::as_str) {
        Some(content) => Ok(AgentDecision::Answer(content.to_string())),
        None => Err(RemoteError::Malformed(
            "message has neither tool_calls, refusal, nor string content".into(),
        )),
    }
}

fn parse_tool_call(call: &Value) -> Result<ToolCall, RemoteError> {
    let function = call
        .get("function")
        .ok_or_else(|| RemoteError::Malformed("tool call missing 'function'".into()))?;
    let name = function
        .get("name")
        .and_then(Value::as_str)
        .ok_or_else(|| RemoteError::Malformed("tool call missing function name".into()))?;
    let raw_args = function
        .get("arguments")
        .and_then(Value::as_str)
        .unwrap_or("{}");
    let parsed: Value = serde_json::from_str(raw_args)
        .map_err(|e| RemoteError::Malformed(format!("arguments not valid JSON: {e}")))?;
    let object = parsed
        .as_object()
        .ok_or_else(|| RemoteError::Malformed("arguments must be a JSON object".into()))?;
    let mut args = std::collections::BTreeMap::new();
    for (key, value) in object {
        let rendered = match value {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        args.insert(key.clone(), rendered);
    }
    Ok(ToolCall { tool: name.parse().expect("tool names always parse"), args })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx_with(steps: &[TrajectoryStep]) -> ConversationContext<'_> {
        ConversationContext { system_prompt: "You are a helpful assistant.", steps }
    }

    fn tool_call_response(name: &str, arguments: &str) -> Value {
        json!({
            "choices": [{
                "message": {
                    "tool_calls": [{
                        "type": "function",
                        "function": {"name": name, "arguments": arguments},
                    }],
                }
            }]
        })
    }

    #[test]
    fn tool_call_payload_parses_to_act() {
        let response = tool_call_response("fs.read", r#"{"path": "notes.txt"}"#);
        match parse_decision(&response).unwrap() {
            AgentDecision::Act(calls) => {
                assert_eq!(calls.len(), 1);
                assert_eq!(calls[0].tool, ToolKind::FsRead);
                assert_eq!(calls[0].args["path"], "notes.txt");
            }
            other => panic!("expected act, got {other:?}"),
        }
    }

    #[test]
    fn content_payload_parses_to_answer() {
        let response = json!({"choices": [{"message": {"content": "All done."}}]});
        assert_eq!(
            parse_decision(&response).unwrap(),
            AgentDecision::Answer("All done.".into())
        );
    }

    #[test]
    fn refusal_field_parses_to_refuse() {
        let response = json!({"choices": [{"message": {"refusal": "I won't do that."}}]});
        assert_eq!(
            parse_decision(&response).unwrap(),
            AgentDecision::Refuse("I won't do that.".into())
        );
    }

    #[test]
    fn malformed_payloads_are_typed_errors() {
        for bad in [
            json!({}),
            json!({"choices": []}),
            json!({"choices": [{"message": {}}]}),
            tool_call_response("fs.read", "not-json"),
            tool_call_response("fs.read", r#"["array"]"#),
        ] {
            assert!(
                matches!(parse_decision(&bad), Err(RemoteError::Malformed(_))),
                "should be malformed: {bad}"
            );
        }
    }

    #[test]
    fn request_shape_carries_conversation_and_tools() {
        let steps = [
            TrajectoryStep::UserMessage { text: "check email".into() },
            TrajectoryStep::Answer { decision: 0, text: "done".into() },
        ];
        let request = build_request("target-agent", &ctx_with(&steps));
        assert_eq!(request["model"], "target-agent");
        let messages = request["messages"].as_array().unwrap();
        assert_eq!(messages.len(), 3); // system + user + assistant
        assert_eq!(messages[0]["role"], "system");
        assert_eq!(messages[1]["content"], "check email");
        assert_eq!(request["tools"].as_array().unwrap().len(), 10);
    }

    #[test]
    fn replay_transport_round_trips_a_session() {
        let response = tool_call_response("email.read", "{}");
        let exchanges = vec![Exchange {
            request: json!({"any": "thing"}),
            response: response.clone(),
        }];
        let mut session = RemoteSession::new(
            RemoteEndpointConfig::default(),
            Box::new(ReplayTransport::new(exchanges)),
        );
        let steps = [TrajectoryStep::UserMessage { text: "check email".into() }];
        match session.decide(&ctx_with(&steps)).unwrap() {
            AgentDecision::Act(calls) => assert_eq!(calls[0].tool, ToolKind::EmailRead),
            other => panic!("expected act, got {other:?}"),
        }
        // Second ask exhausts the transcript.
        assert!(matches!(
            session.decide(&ctx_with(&steps)),
            Err(RemoteError::TranscriptExhausted(1))
        ));
    }

    #[test]
    fn transcripts_persist_and_replay_identically() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("session.jsonl");
        let response = json!({"choices": [{"message": {"content": "hi"}}]});
        {
            let mut recorder = TranscriptRecorder::create(&path).unwrap();
            recorder
                .record(&Exchange { request: json!({"q": 1}), response: response.clone() })
                .unwrap();
        }
        let mut replay = ReplayTransport::from_file(&path).unwrap();
        assert_eq!(replay.send(&json!({"ignored": true})).unwrap(), response);
    }

    #[test]
    fn retries_are_bounded_by_config() {
        struct CountingTransport {
            attempts: std::sync::Arc<std::sync::atomic::AtomicU32>,
        }
        impl Transport for CountingTransport {
            fn send(&mut self, _request: &Value) -> Result<Value, RemoteError> {
                self.attempts.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                Err(RemoteError::Transport("connection refused".into()))
            }
        }
        let attempts = std::sync::Arc::new(std::sync::atomic::AtomicU32::new(0));
        let config = RemoteEndpointConfig { max_retries: 2, ..RemoteEndpointConfig::default() };
        let mut session = RemoteSession::new(
            config,
            Box::new(CountingTransport { attempts: attempts.clone() }),
        );
        let steps = [TrajectoryStep::UserMessage { text: "hi".into() }];
        assert!(matches!(
            session.decide(&ctx_with(&steps)),
            Err(RemoteError::Transport(_))
        ));
        // 1 initial + 2 retries.
        assert_eq!(attempts.load(std::sync::atomic::Ordering::SeqCst), 3);
    }
}
