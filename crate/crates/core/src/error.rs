use thiserror::Error;

use crate::model::Diagnostic;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game: {}", format_diagnostics(.0))]
    InvalidGame(Vec<Diagnostic>),

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("invalid selector at state `{state}`: {reason}")]
    InvalidSelector { state: String, reason: String },

    #[error("linear program failed at state `{state}`: {reason}")]
    Lp { state: String, reason: String },

    #[error("selector at state `{state}` is not optimal for the valuation")]
    NotOptimal { state: String },

    #[error(
        "state `{state}` has {bits} combined move bits; support enumeration is limited to {limit}"
    )]
    EnumerationGuard { state: String, bits: usize, limit: usize },

    #[error("selector is not proper{}: end component {component:?} avoids the goal", iteration_suffix(*.iteration))]
    NotProper {
        iteration: Option<usize>,
        component: Vec<String>,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("malformed game file: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

fn format_diagnostics(diagnostics: &[Diagnostic]) -> String {
    diagnostics
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

fn iteration_suffix(iteration: Option<usize>) -> String {
    iteration
        .map(|i| format!(" at iteration {i}"))
        .unwrap_or_default()
}
