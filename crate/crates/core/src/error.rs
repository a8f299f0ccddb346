use thiserror::Error;

use crate::tree::Diagnostic;

#[derive(Debug, Error)]
pub enum Error {
    #[error("arity mismatch: expected {expected}, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("invalid tree: {}", summarize(.0))]
    InvalidTree(Vec<Diagnostic>),

    #[error("division at vertex {0} is not supported")]
    Division(String),

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("{0}")]
    Domain(String),

    /// A resource guard tripped (term count, disjunct count, cell count).
    #[error("{what} limit of {limit} exceeded")]
    Limit { what: &'static str, limit: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

fn summarize(diags: &[Diagnostic]) -> String {
    let mut out = diags
        .iter()
        .take(3)
        .map(|d| d.message.clone())
        .collect::<Vec<_>>()
        .join("; ");
    if diags.len() > 3 {
        out.push_str(&format!(" (+{} more)", diags.len() - 3));
    }
    out
}

pub(crate) fn check_arity(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Arity { expected, got })
    }
}
