//! Action planning and animation evaluation against an [`LlmClient`].

use std::path::PathBuf;

use gad_access::AnimationSpec;
use serde::de::DeserializeOwned;

use crate::context::{CRITIQUE_TOOL, PROPOSE_TOOL};
use crate::llm::{LlmClient, REPROMPT_PREFIX};
use crate::message::{Attachment, ChatMessage, LlmReply, ToolCall};
use crate::proposal::{Critique, ProposalArgs, SpecProposal};
use crate::session::ChatSession;
use crate::ScriptError;

/// Follow-up requests after a reply without a usable tool call.
pub const MAX_REPROMPTS: u32 = 2;

/// Frames attached to an evaluation request.
pub const EVALUATION_FRAMES: usize = 5;

/// `min(k, n)` indices spread evenly over `0..n`, first and last included.
pub fn sample_frame_indices(n: usize, k: usize) -> Vec<usize> {
    if n <= k {
        return (0..n).collect();
    }
    if k == 1 {
        return vec![0];
    }
    (0..k)
        .map(|i| ((i * (n - 1)) as f64 / (k - 1) as f64).round() as usize)
        .collect()
}

/// Asks for `tool` until the reply parses as `T`, reprompting up to
/// [`MAX_REPROMPTS`] times. Returns the parsed arguments and the call.
async fn call_tool<T: DeserializeOwned>(
    session: &mut ChatSession,
    llm: &dyn LlmClient,
    tool: &str,
) -> Result<(T, ToolCall), ScriptError> {
    let schema = session
        .context()
        .tool(tool)
        .cloned()
        .ok_or_else(|| ScriptError::Config(format!("context lacks tool {tool}")))?;
    let mut reason = String::new();
    for attempt in 0..=MAX_REPROMPTS {
        let reply = llm.complete(&session.prompt(), std::slice::from_ref(&schema)).await?;
        match reply {
            LlmReply::ToolCall(call) if call.name == tool => match serde_json::from_value::<T>(call.arguments.clone()) {
                Ok(args) => return Ok((args, call)),
                Err(e) => {
                    session.push(ChatMessage::assistant(call.arguments.to_string()));
                    reason = format!("arguments did not match the schema: {e}");
                }
            },
            LlmReply::ToolCall(call) => {
                session.push(ChatMessage::assistant(format!("[called {}]", call.name)));
                reason = format!("called {} instead", call.name);
            }
            LlmReply::Text(t) => {
                session.push(ChatMessage::assistant(t));
                reason = "no tool call".into();
            }
        }
        if attempt < MAX_REPROMPTS {
            session.push(ChatMessage::user(format!(
                "{REPROMPT_PREFIX} {tool} ({reason}). Respond only by calling {tool} with arguments matching its schema."
            )));
        }
    }
    Err(ScriptError::MalformedToolCall {
        attempts: MAX_REPROMPTS + 1,
        reason,
    })
}

/// Turns `user_text` into a spec proposal, clamped to the session's
/// dataset.
pub async fn plan_action(
    session: &mut ChatSession,
    user_text: &str,
    llm: &dyn LlmClient,
) -> Result<SpecProposal, ScriptError> {
    session.push(ChatMessage::user(user_text));
    let (args, call) = call_tool::<ProposalArgs>(session, llm, PROPOSE_TOOL).await?;
    let proposal = SpecProposal::from_args(&args, &session.context().descriptor);
    if proposal.clamped {
        tracing::info!(notes = ?proposal.clamp_notes, "proposal clamped to dataset bounds");
    }
    session.push(ChatMessage::assistant(args.rationale.clone()).with_tool_call(call));
    session.push(ChatMessage::tool(&proposal));
    Ok(proposal)
}

/// Sends up to five evenly spaced frames of an animation for review and
/// returns the structured critique.
pub async fn evaluate_animation(
    session: &mut ChatSession,
    frames: &[PathBuf],
    spec: &AnimationSpec,
    llm: &dyn LlmClient,
) -> Result<Critique, ScriptError> {
    if frames.is_empty() {
        return Err(ScriptError::NoFrames);
    }
    let picked = sample_frame_indices(frames.len(), EVALUATION_FRAMES);
    let attachments = picked
        .iter()
        .map(|&i| Attachment::from_file(&frames[i]).map_err(|e| ScriptError::io(&frames[i], e)))
        .collect::<Result<Vec<_>, _>>()?;
    let text = format!(
        "Evaluate frames {picked:?} of {} from the animation below and suggest parameter adjustments by calling {CRITIQUE_TOOL}.\nspec: {}",
        frames.len(),
        serde_json::to_string(spec).expect("spec serializes")
    );
    session.push(ChatMessage::user(text).with_attachments(attachments));
    let (critique, call) = call_tool::<Critique>(session, llm, CRITIQUE_TOOL).await?;
    session.push(ChatMessage::assistant(critique.commentary.clone()).with_tool_call(call));
    session.push(ChatMessage::tool(&critique));
    Ok(critique)
}
