//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced while parsing formula text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("connective `{connective}` is not part of logic {logic} (at byte {pos})")]
    UnsupportedConnective {
        connective: String,
        logic: String,
        pos: usize,
    },
    #[error("symbol `{name}` is already used as a {prior}, cannot reuse it as a {requested}")]
    NamespaceClash {
        name: String,
        prior: &'static str,
        requested: &'static str,
    },
    #[error("`{name}` is a reserved word and cannot name a symbol (at byte {pos})")]
    ReservedWord { name: String, pos: usize },
}

/// Errors produced by the decision and construction engines.
///
/// `BudgetExceeded` is the "unknown" outcome: the engine gave up within its
/// configured budget without determining an answer. Callers must never
/// translate it into a boolean.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("budget exceeded in {place}: {detail}")]
    BudgetExceeded { place: &'static str, detail: String },
    #[error("closure too large for the explicit type engine: {free_bits} free members (cap {cap})")]
    ClosureTooLarge { free_bits: usize, cap: usize },
    #[error("precondition violated in {place}: {detail}")]
    PreconditionViolated { place: &'static str, detail: String },
    #[error("model error: {0}")]
    Model(String),
    #[error("internal verification failed in {place}: {detail}")]
    VerificationFailed { place: &'static str, detail: String },
}

impl EngineError {
    /// True when the error means "ran out of budget", i.e. the three-valued
    /// outcome "unknown" rather than a hard failure.
    pub fn is_unknown(&self) -> bool {
        matches!(
            self,
            EngineError::BudgetExceeded { .. } | EngineError::ClosureTooLarge { .. }
        )
    }
}
