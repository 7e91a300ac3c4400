//! Language-model clients: a deterministic offline mock and an
//! OpenAI-compatible chat-completions client.

use std::time::Duration;

use async_trait::async_trait;
use serde_json::{json, Value};

use crate::context::{CRITIQUE_TOOL, PROPOSE_TOOL};
use crate::message::{ChatMessage, LlmReply, Role, ToolCall, ToolSchema};
use crate::ScriptError;

/// Given the conversation and the tools on offer, returns either text or
/// one tool invocation.
#[async_trait]
pub trait LlmClient: Send + Sync {
    async fn complete(&self, messages: &[ChatMessage], tools: &[ToolSchema]) -> Result<LlmReply, ScriptError>;
}

/// Prefix of the follow-up sent when a reply lacks the requested tool call.
pub const REPROMPT_PREFIX: &str = "Your reply did not call";

/// Offline model. Its reply is a pure function of the messages and tools.
///
/// Planning reads the latest user request for a field name, a duration in
/// days, a named region, a resolution hint and the word "streamline".
/// Critiques walk the quality ladder -8 -> -6 (adding streamlines) -> -4.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockLlm {
    prose_only: bool,
}

impl MockLlm {
    pub fn new() -> Self {
        Self::default()
    }

    /// A mock that never calls tools.
    pub fn prose_only() -> Self {
        Self { prose_only: true }
    }
}

struct PromptFacts {
    dims: [i64; 3],
    timesteps: i64,
    stride_hours: f64,
}

fn prompt_facts(messages: &[ChatMessage]) -> PromptFacts {
    let mut f = PromptFacts {
        dims: [1, 1, 1],
        timesteps: 1,
        stride_hours: 24.0,
    };
    let Some(sys) = messages.iter().find(|m| m.role == Role::System) else {
        return f;
    };
    for line in sys.content.lines() {
        if let Some(rest) = line.strip_prefix("Grid: ") {
            let nums: Vec<i64> = rest
                .split(|c: char| !c.is_ascii_digit())
                .filter(|s| !s.is_empty())
                .take(3)
                .filter_map(|s| s.parse().ok())
                .collect();
            if let Ok(d) = nums.try_into() {
                f.dims = d;
            }
        } else if let Some(rest) = line.strip_prefix("Time: ") {
            let words: Vec<&str> = rest.split_whitespace().collect();
            if let Some(n) = words.first().and_then(|w| w.parse().ok()) {
                f.timesteps = n;
            }
            if let Some(i) = words.iter().position(|w| *w == "hours") {
                if let Some(h) = i.checked_sub(1).and_then(|j| words[j].trim_end_matches(',').parse().ok()) {
                    f.stride_hours = h;
                }
            }
        }
    }
    f
}

fn field_enum(tool: &ToolSchema) -> Vec<String> {
    tool.parameters
        .pointer("/properties/field/enum")
        .and_then(Value::as_array)
        .map(|a| a.iter().filter_map(|v| v.as_str().map(str::to_string)).collect())
        .unwrap_or_default()
}

fn days_requested(text: &str) -> Option<i64> {
    let words: Vec<String> = text
        .split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .collect();
    words.windows(2).find_map(|w| {
        (w[1] == "days" || w[1] == "day").then(|| w[0].parse().ok()).flatten()
    })
}

fn mock_plan(messages: &[ChatMessage], tool: &ToolSchema) -> LlmReply {
    let facts = prompt_facts(messages);
    let request = messages
        .iter()
        .rev()
        .find(|m| m.role == Role::User && !m.content.starts_with(REPROMPT_PREFIX))
        .map(|m| m.content.to_lowercase())
        .unwrap_or_default();
    let fields = field_enum(tool);
    let field = fields
        .iter()
        .find(|f| f.len() > 1 && request.contains(f.as_str()))
        .or_else(|| fields.first())
        .cloned()
        .unwrap_or_default();
    let steps = match days_requested(&request) {
        Some(days) => ((days as f64 * 24.0 / facts.stride_hours).ceil() as i64).max(1),
        None => 10,
    }
    .min(facts.timesteps);
    let [nx, ny, nz] = facts.dims;
    let region = if request.contains("mediterranean") {
        [[nx / 8, ny / 2, 0], [nx - nx / 8, ny - ny / 8, nz]]
    } else if request.contains("eddy") {
        [[nx / 4, ny / 4, 0], [nx - nx / 4, ny - ny / 4, nz]]
    } else {
        [[0, 0, 0], [nx, ny, nz]]
    };
    let quality = if request.contains("full resolution") {
        0
    } else if request.contains("1/16") {
        -4
    } else {
        -8
    };
    let streamlines = request.contains("streamline");
    LlmReply::ToolCall(ToolCall {
        name: PROPOSE_TOOL.into(),
        arguments: json!({
            "box": region,
            "time": [0, steps - 1, 1],
            "quality": quality,
            "field": field,
            "streamlines": streamlines,
            "rationale": format!("{field} over {steps} timesteps at quality {quality} for a first overview"),
            "confidence": 0.8
        }),
    })
}

/// Spec JSON embedded in an evaluation request after `spec: `.
fn spec_under_review(messages: &[ChatMessage]) -> Option<Value> {
    let m = messages.iter().rev().find(|m| m.role == Role::User)?;
    let line = m.content.lines().find_map(|l| l.strip_prefix("spec: "))?;
    serde_json::from_str(line).ok()
}

fn mock_critique(messages: &[ChatMessage]) -> LlmReply {
    let q = spec_under_review(messages).and_then(|s| s.get("quality").and_then(Value::as_i64));
    let frames = messages
        .iter()
        .rev()
        .find(|m| m.role == Role::User)
        .map(|m| m.attachments.len())
        .unwrap_or(0);
    let (deltas, commentary) = match q {
        Some(-8) => (
            json!({"quality": -6, "streamlines": true}),
            "The salinity structure is visible but blocky; refine the resolution and add streamlines to show the circulation.",
        ),
        Some(-6) => (
            json!({"quality": -4}),
            "Streamlines follow the circulation; one more resolution step would sharpen the fronts.",
        ),
        _ => (json!({}), "The animation resolves the structures well; no changes suggested."),
    };
    LlmReply::ToolCall(ToolCall {
        name: CRITIQUE_TOOL.into(),
        arguments: json!({
            "suggested_deltas": deltas,
            "commentary": format!("{commentary} ({frames} frames reviewed)")
        }),
    })
}

#[async_trait]
impl LlmClient for MockLlm {
    async fn complete(&self, messages: &[ChatMessage], tools: &[ToolSchema]) -> Result<LlmReply, ScriptError> {
        if self.prose_only {
            return Ok(LlmReply::Text("Here is what I would do, in words.".into()));
        }
        if let Some(t) = tools.iter().find(|t| t.name == PROPOSE_TOOL) {
            return Ok(mock_plan(messages, t));
        }
        if tools.iter().any(|t| t.name == CRITIQUE_TOOL) {
            return Ok(mock_critique(messages));
        }
        Ok(LlmReply::Text("No tools were offered.".into()))
    }
}

/// Client for any OpenAI-compatible `/chat/completions` endpoint.
#[derive(Debug, Clone)]
pub struct OpenAiClient {
    http: reqwest::Client,
    url: String,
    model: String,
    api_key: Option<String>,
}

impl OpenAiClient {
    pub fn new(base_url: &str, model: impl Into<String>, api_key: Option<String>) -> Result<Self, ScriptError> {
        let http = reqwest::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| ScriptError::LlmTransport(e.to_string()))?;
        Ok(Self {
            http,
            url: format!("{}/chat/completions", base_url.trim_end_matches('/')),
            model: model.into(),
            api_key,
        })
    }

    /// Reads the API key from the environment variable named `key_env`.
    pub fn from_env(base_url: &str, model: impl Into<String>, key_env: &str) -> Result<Self, ScriptError> {
        let key = std::env::var(key_env)
            .map_err(|_| ScriptError::Config(format!("environment variable {key_env} is not set")))?;
        Self::new(base_url, model, Some(key))
    }

    /// Request body for `messages` and `tools`.
    pub fn request_body(&self, messages: &[ChatMessage], tools: &[ToolSchema]) -> Value {
        let mut out = Vec::with_capacity(messages.len());
        let mut pending_call: Option<String> = None;
        for (i, m) in messages.iter().enumerate() {
            let v = match m.role {
                Role::System => json!({"role": "system", "content": m.content}),
                Role::User if m.attachments.is_empty() => json!({"role": "user", "content": m.content}),
                Role::User => {
                    let mut parts = vec![json!({"type": "text", "text": m.content})];
                    for a in &m.attachments {
                        parts.push(json!({"type": "image_url", "image_url": {"url": a.data_url()}}));
                    }
                    json!({"role": "user", "content": parts})
                }
                Role::Assistant => match &m.tool_call {
                    Some(call) => {
                        let id = format!("call_{i}");
                        pending_call = Some(id.clone());
                        json!({
                            "role": "assistant",
                            "content": if m.content.is_empty() { Value::Null } else { json!(m.content) },
                            "tool_calls": [{
                                "id": id,
                                "type": "function",
                                "function": {"name": call.name, "arguments": call.arguments.to_string()}
                            }]
                        })
                    }
                    None => json!({"role": "assistant", "content": m.content}),
                },
                Role::Tool => match pending_call.take() {
                    Some(id) => json!({"role": "tool", "tool_call_id": id, "content": m.content}),
                    None => json!({"role": "user", "content": m.content}),
                },
            };
            out.push(v);
        }
        let tools: Vec<Value> = tools
            .iter()
            .map(|t| json!({"type": "function", "function": {"name": t.name, "description": t.description, "parameters": t.parameters}}))
            .collect();
        let mut body = json!({"model": self.model, "messages": out});
        if !tools.is_empty() {
            body["tools"] = json!(tools);
            body["tool_choice"] = json!("auto");
        }
        body
    }
}

/// Reply carried by a chat-completions response body.
pub fn parse_completion(body: &Value) -> Result<LlmReply, ScriptError> {
    let msg = body
        .pointer("/choices/0/message")
        .ok_or_else(|| ScriptError::LlmTransport("response has no choices[0].message".into()))?;
    if let Some(f) = msg.pointer("/tool_calls/0/function") {
        let name = f.get("name").and_then(Value::as_str).unwrap_or_default().to_string();
        let raw = f.get("arguments").cloned().unwrap_or(Value::Null);
        let arguments = match raw {
            Value::String(s) => match serde_json::from_str(&s) {
                Ok(v) => v,
                Err(_) => return Ok(LlmReply::Text(s)),
            },
            v => v,
        };
        return Ok(LlmReply::ToolCall(ToolCall { name, arguments }));
    }
    Ok(LlmReply::Text(msg.get("content").and_then(Value::as_str).unwrap_or_default().to_string()))
}

#[async_trait]
impl LlmClient for OpenAiClient {
    async fn complete(&self, messages: &[ChatMessage], tools: &[ToolSchema]) -> Result<LlmReply, ScriptError> {
        let mut req = self.http.post(&self.url).json(&self.request_body(messages, tools));
        if let Some(k) = &self.api_key {
            req = req.bearer_auth(k);
        }
        let resp = req.send().await.map_err(|e| ScriptError::LlmTransport(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            let text = resp.text().await.unwrap_or_default();
            return Err(ScriptError::LlmTransport(format!("HTTP {status}: {text}")));
        }
        let body: Value = resp.json().await.map_err(|e| ScriptError::LlmTransport(e.to_string()))?;
        parse_completion(&body)
    }
}
