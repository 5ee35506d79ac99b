//! STRIPS/typing subset of PDDL: model, parser, printer and grounder.

mod ground;
mod model;
mod parser;
pub mod sexpr;
mod state;

use thiserror::Error;

pub use ground::{ground, normalize_action_name, GroundAction, GroundTask, PreconditionViolation};
pub use model::{
    ActionSchema, Atom, Domain, GroundAtom, Literal, Predicate, Problem, Term, TypedName, ROOT_TYPE,
};
pub use parser::{parse_domain, parse_problem, validate_problem};
pub use state::{ActionId, FactId, State};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PddlError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("unsupported requirement `{0}` (only :strips and :typing are supported)")]
    UnknownRequirement(String),
    #[error("unsupported PDDL feature: {0}")]
    Unsupported(String),
    #[error("duplicate action `{0}`")]
    DuplicateAction(String),
    #[error("unresolved predicate `{predicate}` in `{context}`")]
    UnresolvedPredicate { predicate: String, context: String },
    #[error("arity mismatch for `{predicate}`: expected {expected}, found {found}")]
    ArityMismatch {
        predicate: String,
        expected: usize,
        found: usize,
    },
    #[error("undeclared variable `?{variable}` in action `{action}`")]
    UndeclaredVariable { variable: String, action: String },
    #[error("undeclared object `{0}`")]
    UndeclaredObject(String),
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("problem is for domain `{found}`, expected `{expected}`")]
    DomainMismatch { expected: String, found: String },
    #[error("goal is empty")]
    EmptyGoal,
}

impl PddlError {
    pub(crate) fn syntax(pos: sexpr::Pos, message: impl Into<String>) -> Self {
        PddlError::Syntax {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }
}
