//! Terms, clauses, language biases and fact bases; parsing, printing and
//! bottom-up coverage of clauses over ground facts.

pub mod bias;
pub mod canon;
pub mod eval;
pub mod facts;
pub mod parse;
pub mod term;

use thiserror::Error;

pub use bias::{
    parse_bias, parse_bias_with, validate_bias_text, BiasOptions, BiasSpec, Direction,
    PredicateSignature, Role, Violation, ViolationKind,
};
pub use canon::canonicalize;
pub use eval::{clause_entails, program_covers, program_proves, FactIndex};
pub use facts::{parse_facts, FactBase};
pub use parse::{parse_atom, parse_clause, parse_clauses, parse_program};
pub use term::{Atom, Clause, Program, Term};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LogicError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: `{predicate}` has arity {found}, declared {declared}")]
    ArityClash {
        line: usize,
        predicate: String,
        declared: usize,
        found: usize,
    },
    #[error("invalid bias: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidBias(Vec<Violation>),
    #[error("`{0}` is not ground")]
    NotGround(String),
    #[error("`{0}` is labelled both positive and negative")]
    ConflictingLabel(String),
    #[error("clauses define `{found}` but the program head is `{expected}`")]
    MixedHeads { expected: String, found: String },
}

impl LogicError {
    pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Self {
        LogicError::Syntax {
            line,
            message: message.into(),
        }
    }
}
