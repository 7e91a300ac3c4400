use gad_access::AnimationId;

use crate::context::Context;
use crate::message::ChatMessage;

/// One conversation. History only grows; context is fixed at creation.
#[derive(Debug, Clone)]
pub struct ChatSession {
    id: String,
    history: Vec<ChatMessage>,
    context: Context,
    produced: Vec<AnimationId>,
}

impl ChatSession {
    pub fn new(id: impl Into<String>, context: Context) -> Self {
        Self {
            id: id.into(),
            history: Vec::new(),
            context,
            produced: Vec::new(),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn history(&self) -> &[ChatMessage] {
        &self.history
    }

    pub fn context(&self) -> &Context {
        &self.context
    }

    pub fn produced_animations(&self) -> &[AnimationId] {
        &self.produced
    }

    pub fn push(&mut self, message: ChatMessage) {
        self.history.push(message);
    }

    pub fn record_animation(&mut self, id: AnimationId) {
        self.produced.push(id);
    }

    /// System prompt followed by the full history.
    pub fn prompt(&self) -> Vec<ChatMessage> {
        let mut out = Vec::with_capacity(self.history.len() + 1);
        out.push(ChatMessage::system(self.context.system_prompt.clone()));
        out.extend(self.history.iter().cloned());
        out
    }
}
