use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("symbol `{symbol}` used with arity {found}, previously {expected}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },

    #[error("rule {rule} is unsafe: variable `{variable}` has no positive body occurrence")]
    UnsafeRule { rule: usize, variable: String },

    #[error("resource limit exceeded: {0}")]
    ResourceExceeded(String),

    #[error("invalid {kind} description at line {line}: {message}")]
    SpecFormat {
        kind: &'static str,
        line: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
