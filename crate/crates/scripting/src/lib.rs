//! From user intent to rendered frames.
//!
//! The direct path ([`basic_generate`]) takes an [`AnimationSpec`] and runs
//! materialize plus render. The conversational path builds a dataset
//! [`Context`], lets an [`LlmClient`] propose specs through a tool call
//! ([`plan_action`]), reviews a few rendered frames ([`evaluate_animation`])
//! and iterates ([`run_loop`]), keeping the whole exchange in a
//! [`ChatSession`].
//!
//! [`AnimationSpec`]: gad_access::AnimationSpec

mod agent;
mod chat;
mod context;
mod llm;
mod menu;
mod message;
mod pipeline;
mod proposal;
mod session;

use std::path::PathBuf;

pub use agent::{evaluate_animation, plan_action, sample_frame_indices, EVALUATION_FRAMES, MAX_REPROMPTS};
pub use chat::{run_loop, MAX_ITERATIONS};
pub use context::{build_context, Context, Example, CRITIQUE_TOOL, MIN_QUALITY, PROPOSE_TOOL};
pub use llm::{parse_completion, LlmClient, MockLlm, OpenAiClient, REPROMPT_PREFIX};
pub use menu::{menu, presets, MenuAction, Preset};
pub use message::{Attachment, ChatMessage, LlmReply, Role, ToolCall, ToolSchema};
pub use pipeline::{basic_generate, no_progress, Generated, Pipeline, Progress, Stage};
pub use proposal::{Critique, ProposalArgs, RawSpec, SpecDelta, SpecProposal};
pub use session::ChatSession;

#[derive(Debug, thiserror::Error)]
pub enum ScriptError {
    #[error(transparent)]
    Spec(#[from] gad_access::SpecError),
    #[error(transparent)]
    Access(#[from] gad_access::AccessError),
    #[error(transparent)]
    Render(#[from] gad_render::RenderError),
    #[error(transparent)]
    Gad(#[from] gad_core::gad::GadError),
    #[error("language model transport failure: {0}")]
    LlmTransport(String),
    #[error("no usable tool call after {attempts} attempts: {reason}")]
    MalformedToolCall { attempts: u32, reason: String },
    #[error("invalid menu choice: {0}")]
    InvalidChoice(String),
    #[error("no frames to evaluate")]
    NoFrames,
    #[error("configuration: {0}")]
    Config(String),
    #[error("i/o failure on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("background task failed: {0}")]
    Task(String),
}

impl ScriptError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}
