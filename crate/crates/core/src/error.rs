use thiserror::Error;

use crate::sexpr::Pos;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{pos}: {msg}")]
    Parse { pos: Pos, msg: String },

    #[error("operator {schema}: {rule}")]
    Schema { schema: String, rule: String },

    #[error("problem {problem}: {msg}")]
    Problem { problem: String, msg: String },

    #[error("plan document line {line}: {msg}")]
    Document { line: usize, msg: String },

    #[error("plan does not fit the domain: {0}")]
    Mismatch(String),

    #[error("unknown operator {0}")]
    UnknownOperator(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
