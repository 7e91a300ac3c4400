use std::path::PathBuf;

use gad_access::AnimationId;

use crate::agent::{evaluate_animation, plan_action};
use crate::llm::LlmClient;
use crate::pipeline::{no_progress, Pipeline};
use crate::proposal::Critique;
use crate::session::ChatSession;
use crate::ScriptError;

/// Upper bound on plan/render/evaluate rounds in one [`run_loop`] call.
pub const MAX_ITERATIONS: usize = 16;

/// Plans from `user_text`, then renders, evaluates and asks `accept`
/// whether to apply the critique's deltas, until `accept` declines or the
/// critique has nothing to change.
///
/// On error, animations produced by earlier rounds stay on disk and in the
/// session's `produced_animations`.
pub async fn run_loop(
    session: &mut ChatSession,
    user_text: &str,
    llm: &dyn LlmClient,
    pipeline: &Pipeline,
    accept: &mut (dyn FnMut(&Critique) -> bool + Send),
) -> Result<Vec<(AnimationId, PathBuf)>, ScriptError> {
    let proposal = plan_action(session, user_text, llm).await?;
    let descriptor = session.context().descriptor.clone();
    let mut spec = proposal.spec;
    let mut produced = Vec::new();
    for _ in 0..MAX_ITERATIONS {
        let g = pipeline.generate(&spec, no_progress()).await?;
        tracing::info!(id = %g.id, cache_hit = g.cache_hit, frames = g.frames.len(), "animation ready");
        session.record_animation(g.id.clone());
        produced.push((g.id, g.frame_dir));
        let critique = evaluate_animation(session, &g.frames, &spec, llm).await?;
        if !accept(&critique) || critique.suggested_deltas.is_empty() {
            break;
        }
        let (next, notes) = critique.suggested_deltas.apply(&spec, &descriptor);
        if !notes.is_empty() {
            tracing::info!(?notes, "critique deltas clamped");
        }
        spec = next;
    }
    Ok(produced)
}
