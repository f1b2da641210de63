use thiserror::Error;

use crate::validate::ValidationReport;

/// Errors raised while building, parsing, validating or simulating programs.
#[derive(Clone, Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {msg}")]
    Syntax {
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("invalid field `{field}`: {msg}")]
    Field { field: String, msg: String },
    #[error("node id {0} is referenced but not defined")]
    DanglingId(usize),
    #[error("duplicate edge {from} -> {to} with bit {bit}")]
    DuplicateEdge { from: usize, to: usize, bit: u8 },
    #[error("invalid program structure: {0}")]
    Structure(String),
    #[error("wrong mode: expected {expected}, found {found}")]
    WrongMode { expected: String, found: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("program contains a cycle")]
    Cyclic,
    #[error("unitary completion impossible: {0}")]
    Completion(String),
    #[error("premise failed: {0}")]
    Premise(String),
    #[error("linear solve failed: {0}")]
    Solve(String),
    #[error("quantum Turing machine: {0}")]
    Qtm(String),
    #[error("validation failed:\n{0}")]
    Validation(ValidationReport),
}

pub type Result<T> = std::result::Result<T, Error>;
