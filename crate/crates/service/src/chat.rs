use std::sync::atomic::Ordering;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::Json;
use gad_access::{AnimationId, AnimationSpec, DEFAULT_DATASET};
use gad_scripting::{
    build_context, evaluate_animation, plan_action, presets, ChatMessage, ChatSession, Critique, SpecProposal,
};
use serde::{Deserialize, Serialize};

use crate::api::{job_frames, parse_body, submit_spec};
use crate::error::ApiError;
use crate::Shared;

pub(crate) struct ChatState {
    session: ChatSession,
    dataset: String,
    last_spec: Option<AnimationSpec>,
    last_critique: Option<Critique>,
    last_job: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct CreateSession {
    #[serde(default)]
    dataset: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session_id: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChatAction {
    /// Plan a spec from `text` and start rendering it.
    #[default]
    Plan,
    /// Review the frames of the session's latest animation.
    Evaluate,
    /// Apply the latest critique's deltas and render the result.
    Accept,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub action: ChatAction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub reply: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proposal: Option<SpecProposal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critique: Option<Critique>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub job_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub dataset: String,
    pub history: Vec<ChatMessage>,
    pub produced_animations: Vec<AnimationId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_job: Option<String>,
}

pub(crate) async fn create_session(State(s): State<Shared>, body: Bytes) -> Result<(StatusCode, Json<SessionCreated>), ApiError> {
    let req: CreateSession = if body.iter().all(u8::is_ascii_whitespace) {
        CreateSession::default()
    } else {
        parse_body(&body)?
    };
    let dataset = req.dataset.unwrap_or_else(|| DEFAULT_DATASET.to_string());
    let descriptor = s.pipeline.client.dataset(&dataset).await?;
    let examples: Vec<_> = if dataset == DEFAULT_DATASET {
        presets().iter().map(|p| p.example()).collect()
    } else {
        Vec::new()
    };
    let id = format!("session-{}", s.next_session.fetch_add(1, Ordering::SeqCst));
    let state = ChatState {
        session: ChatSession::new(id.clone(), build_context(&descriptor, &examples)),
        dataset,
        last_spec: None,
        last_critique: None,
        last_job: None,
    };
    s.sessions
        .lock()
        .unwrap()
        .insert(id.clone(), Arc::new(tokio::sync::Mutex::new(state)));
    Ok((StatusCode::CREATED, Json(SessionCreated { session_id: id })))
}

fn lookup(s: &Shared, id: &str) -> Result<Arc<tokio::sync::Mutex<ChatState>>, ApiError> {
    s.sessions
        .lock()
        .unwrap()
        .get(id)
        .cloned()
        .ok_or_else(|| ApiError::not_found("unknown_session", format!("no chat session {id}")))
}

pub(crate) async fn session(State(s): State<Shared>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    let state = lookup(&s, &id)?;
    let c = state.lock().await;
    Ok(Json(SessionView {
        session_id: id,
        dataset: c.dataset.clone(),
        history: c.session.history().to_vec(),
        produced_animations: c.session.produced_animations().to_vec(),
        last_job: c.last_job.clone(),
    }))
}

pub(crate) async fn message(State(s): State<Shared>, Path(id): Path<String>, body: Bytes) -> Result<Json<ChatResponse>, ApiError> {
    let req: ChatRequest = parse_body(&body)?;
    let state = lookup(&s, &id)?;
    let mut c = state.lock().await;
    let c = &mut *c;
    match req.action {
        ChatAction::Plan => {
            if req.text.trim().is_empty() {
                return Err(ApiError::validation("empty_message", "a plan request needs text"));
            }
            let mut proposal = plan_action(&mut c.session, &req.text, s.llm.as_ref()).await?;
            proposal.spec.dataset = c.dataset.clone();
            let job = start(&s, c, &proposal.spec).await?;
            Ok(Json(ChatResponse {
                reply: proposal.rationale.clone(),
                proposal: Some(proposal),
                critique: None,
                job_id: Some(job),
            }))
        }
        ChatAction::Evaluate => {
            let (job, spec) = match (&c.last_job, &c.last_spec) {
                (Some(j), Some(spec)) => (j.clone(), spec.clone()),
                _ => return Err(ApiError::validation("nothing_to_evaluate", "no animation in this session yet")),
            };
            let frames = job_frames(&s, &job)?;
            let critique = evaluate_animation(&mut c.session, &frames, &spec, s.llm.as_ref()).await?;
            c.last_critique = Some(critique.clone());
            Ok(Json(ChatResponse {
                reply: critique.commentary.clone(),
                proposal: None,
                critique: Some(critique),
                job_id: None,
            }))
        }
        ChatAction::Accept => {
            let (critique, spec) = match (c.last_critique.take(), &c.last_spec) {
                (Some(cr), Some(spec)) => (cr, spec.clone()),
                _ => return Err(ApiError::validation("nothing_to_accept", "no critique to accept")),
            };
            if critique.suggested_deltas.is_empty() {
                return Ok(Json(ChatResponse {
                    reply: "The critique suggested no changes.".into(),
                    proposal: None,
                    critique: Some(critique),
                    job_id: None,
                }));
            }
            let descriptor = c.session.context().descriptor.clone();
            let (mut next, notes) = critique.suggested_deltas.apply(&spec, &descriptor);
            next.dataset = c.dataset.clone();
            let text = if req.text.trim().is_empty() {
                "Apply the suggested adjustments.".to_string()
            } else {
                req.text.clone()
            };
            c.session.push(ChatMessage::user(format!(
                "{text}\nspec: {}",
                serde_json::to_string(&next).expect("spec serializes")
            )));
            let proposal = SpecProposal {
                spec: next.clone(),
                rationale: "suggested adjustments applied".into(),
                confidence: 1.0,
                clamped: !notes.is_empty(),
                clamp_notes: notes,
            };
            let job = start(&s, c, &next).await?;
            Ok(Json(ChatResponse {
                reply: proposal.rationale.clone(),
                proposal: Some(proposal),
                critique: Some(critique),
                job_id: Some(job),
            }))
        }
    }
}

async fn start(s: &Shared, c: &mut ChatState, spec: &AnimationSpec) -> Result<String, ApiError> {
    let job = submit_spec(s, spec.clone()).await?;
    c.session.record_animation(spec.id());
    c.last_spec = Some(spec.clone());
    c.last_job = Some(job.id.clone());
    Ok(job.id)
}
