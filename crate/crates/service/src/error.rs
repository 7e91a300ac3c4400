use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use gad_access::AccessError;
use gad_core::gad::{Diagnostic, GadError};
use gad_render::RenderError;
use gad_scripting::ScriptError;
use serde::{Deserialize, Serialize};

/// Error body returned by every endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
    pub http_status: u16,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<Diagnostic>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            code: code.to_string(),
            message: message.into(),
            http_status: status.as_u16(),
            diagnostics: Vec::new(),
        }
    }

    pub fn validation(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn not_found(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }

    pub fn status(&self) -> StatusCode {
        StatusCode::from_u16(self.http_status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR)
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({}): {}", self.code, self.http_status, self.message)
    }
}

impl std::error::Error for ApiError {}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status(), Json(self)).into_response()
    }
}

impl From<AccessError> for ApiError {
    fn from(e: AccessError) -> Self {
        let msg = e.to_string();
        match e {
            AccessError::Spec(_) => Self::validation("invalid_spec", msg),
            AccessError::NotFound(_) => Self::not_found("unknown_dataset", msg),
            AccessError::Range(_) => Self::new(StatusCode::RANGE_NOT_SATISFIABLE, "out_of_range", msg),
            AccessError::BadRequest(_) => Self::validation("rejected_by_dataset_server", msg),
            AccessError::Transport(_) => Self::new(StatusCode::BAD_GATEWAY, "upstream_unavailable", msg),
            AccessError::Protocol(_) => Self::new(StatusCode::BAD_GATEWAY, "upstream_protocol", msg),
            AccessError::Gad(e) => e.into(),
            AccessError::Io { .. } => Self::internal(msg),
        }
    }
}

impl From<GadError> for ApiError {
    fn from(e: GadError) -> Self {
        let msg = e.to_string();
        match e {
            GadError::InvalidDocument(d) => Self {
                diagnostics: d,
                ..Self::validation("invalid_gad", msg)
            },
            GadError::SchemaViolation { .. } | GadError::IntegrityViolation { .. } => Self::validation("invalid_gad", msg),
            _ => Self::new(StatusCode::INTERNAL_SERVER_ERROR, "gad_unreadable", msg),
        }
    }
}

impl From<RenderError> for ApiError {
    fn from(e: RenderError) -> Self {
        let msg = e.to_string();
        match e {
            RenderError::InvalidSettings(_) => Self::validation("invalid_render_settings", msg),
            RenderError::Gad(e) => e.into(),
            _ => Self::new(StatusCode::INTERNAL_SERVER_ERROR, "render_failed", msg),
        }
    }
}

impl From<ScriptError> for ApiError {
    fn from(e: ScriptError) -> Self {
        let msg = e.to_string();
        match e {
            ScriptError::Spec(_) => Self::validation("invalid_spec", msg),
            ScriptError::Access(e) => e.into(),
            ScriptError::Render(e) => e.into(),
            ScriptError::Gad(e) => e.into(),
            ScriptError::LlmTransport(_) => Self::new(StatusCode::BAD_GATEWAY, "llm_unavailable", msg),
            ScriptError::MalformedToolCall { .. } => Self::new(StatusCode::BAD_GATEWAY, "llm_malformed_tool_call", msg),
            ScriptError::InvalidChoice(_) => Self::validation("invalid_choice", msg),
            ScriptError::NoFrames => Self::validation("no_frames", msg),
            ScriptError::Config(_) | ScriptError::Io { .. } | ScriptError::Task(_) => Self::internal(msg),
        }
    }
}
