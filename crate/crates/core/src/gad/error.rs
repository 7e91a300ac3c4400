use std::path::PathBuf;

use super::validate::Diagnostic;

#[derive(Debug, thiserror::Error)]
pub enum GadError {
    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("schema violation at {path}: {message}")]
    SchemaViolation { path: String, message: String },

    #[error("integrity violation at {path}: {message}")]
    IntegrityViolation { path: String, message: String },

    #[error("invalid document ({} diagnostics, first: {})", .0.len(), first_message(.0))]
    InvalidDocument(Vec<Diagnostic>),

    #[error("i/o failure on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("degenerate blend: {0} vectors cancel out")]
    DegenerateBlend(&'static str),

    #[error("transfer function domains differ: {a:?} vs {b:?}")]
    DomainMismatch { a: [f64; 2], b: [f64; 2] },
}

fn first_message(diags: &[Diagnostic]) -> String {
    diags
        .first()
        .map(|d| format!("{}: {}", d.path, d.message))
        .unwrap_or_default()
}

impl GadError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        GadError::Io {
            path: path.into(),
            source,
        }
    }
}
