use thiserror::Error;

use crate::coterm::Kind;

/// A violated well-formedness invariant of a [`CoSystem`](crate::coterm::CoSystem).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("roster is empty")]
    EmptyRoster,
    #[error("system has no classes")]
    EmptyClasses,
    #[error("class {class} references class {target}, which does not exist")]
    InvalidRef { class: usize, target: usize },
    #[error("root references class {target}, which does not exist")]
    InvalidRoot { target: usize },
    #[error("class {0} is a strategy node without a choice")]
    MissingChoice(usize),
    #[error("class {0} is a game node carrying a choice")]
    ExtraChoice(usize),
    #[error("class {class} is owned by `{agent}`, who is not in the roster")]
    UnknownOwner { class: usize, agent: String },
    #[error("leaf class {class} has no payoff for `{agent}`")]
    MissingPayoff { class: usize, agent: String },
    #[error("leaf class {class} assigns a payoff to `{agent}`, who is not in the roster")]
    ExtraPayoff { class: usize, agent: String },
    #[error("class names and classes differ in length ({names} names, {classes} classes)")]
    NameCount { names: usize, classes: usize },
    #[error("`{0}` is not a usable identifier")]
    InvalidName(String),
    #[error("class name `{0}` is used twice")]
    DuplicateName(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid system: {0}")]
    Invalid(#[from] ValidationError),
    #[error("exact bisimilarity requires non-parametric systems; use the bounded check")]
    ParametricUnsupported,
    #[error("kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: Kind, found: Kind },
    #[error("the two systems declare different rosters")]
    RosterMismatch,
    #[error("agent `{0}` is not in the roster")]
    UnknownAgent(String),
    #[error("integer overflow while evaluating utilities")]
    Overflow,
    #[error("precondition not met: {0}")]
    NotApplicable(String),
    #[error("{agent} owns {nodes} nodes, more than the {limit}-profile enumeration bound allows")]
    TooLarge { agent: String, nodes: usize, limit: u64 },
    #[error("class {0} reaches the truncation horizon with no leaf child to close it")]
    NoLeafAtHorizon(usize),
    #[error("system is cyclic and cannot be unrolled into a finite tree")]
    Cyclic,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
