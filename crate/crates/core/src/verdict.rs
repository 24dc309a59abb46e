//! Outcomes of predicate checks together with the evidence behind them.
//!
//! Every failing verdict carries a finite witness that can be replayed
//! against the system in linear time. Holding verdicts for coinductive
//! predicates carry the closed set or relation that establishes them.

use std::fmt;

use serde::Serialize;

use crate::coterm::{Agent, AffineUtility, Choice, ParamRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Holds,
    Fails,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub note: String,
    pub evidence: Evidence,
}

impl Verdict {
    pub fn holds(note: impl Into<String>, evidence: Evidence) -> Self {
        Verdict {
            outcome: Outcome::Holds,
            note: note.into(),
            evidence,
        }
    }

    pub fn fails(note: impl Into<String>, evidence: Evidence) -> Self {
        Verdict {
            outcome: Outcome::Fails,
            note: note.into(),
            evidence,
        }
    }

    pub fn is_holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }

    pub fn is_vacuous(&self) -> bool {
        matches!(self.evidence, Evidence::Vacuous)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word = match self.outcome {
            Outcome::Holds => "holds",
            Outcome::Fails => "fails",
        };
        write!(f, "{word}: {}", self.note)
    }
}

/// A class reached during an analysis, with the length of the choice walk
/// that takes it to a leaf.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassWalk {
    pub class: usize,
    pub steps: usize,
}

/// One move of a deviation path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Step {
    pub class: usize,
    pub choice: Choice,
    /// True iff the deviating agent overrides the strategy's choice here.
    pub overridden: bool,
}

/// A profitable unilateral deviation: play `prefix`, then `cycle` repeated
/// `repeat` times, then `suffix`, ending at `leaf` at root-relative
/// index `index`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Deviation {
    pub agent: Agent,
    pub baseline: i128,
    pub value: i128,
    pub leaf: usize,
    pub index: u64,
    pub prefix: Vec<Step>,
    pub cycle: Vec<Step>,
    pub repeat: u64,
    pub suffix: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AgentOptimum {
    pub agent: Agent,
    pub on_path: i128,
    pub best_deviation: i128,
}

/// Per-class dominance data for subgame perfection. Utilities are functions
/// of the class's own index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SgpeRow {
    pub class: usize,
    pub owner: Agent,
    pub choice: Choice,
    pub favored: AffineUtility,
    pub other: AffineUtility,
    /// `favored - other`.
    pub margin: AffineUtility,
    pub n_min: u64,
    /// Largest reachable index, or `None` when the reachable set is infinite.
    pub n_max: Option<u64>,
}

/// A choice rewritten at a node of an explicit finite tree, identified by
/// preorder position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Override {
    pub node: usize,
    pub choice: Choice,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    None,
    /// The predicate holds because its antecedent fails.
    Vacuous,
    Invalid {
        error: String,
    },
    /// A bisimulation: pairs of classes closed under observation.
    Relation {
        pairs: Vec<(usize, usize)>,
    },
    BoundedAgreement {
        depth: usize,
        states: usize,
    },
    Distinguishing {
        path: Vec<Choice>,
        left: String,
        right: String,
    },
    LeafPath {
        refs: Vec<ParamRef>,
        choices: Vec<Choice>,
    },
    ChoiceCycle {
        prefix: Vec<usize>,
        cycle: Vec<usize>,
    },
    AlwaysLeaf {
        classes: Vec<ClassWalk>,
    },
    FailingClass {
        class: usize,
        cycle: Vec<usize>,
    },
    NashOptima {
        agents: Vec<AgentOptimum>,
    },
    Deviation(Deviation),
    FiniteDeviation {
        agent: Agent,
        baseline: i64,
        value: i64,
        overrides: Vec<Override>,
    },
    SgpeTable {
        rows: Vec<SgpeRow>,
    },
    SgpeViolation {
        row: SgpeRow,
        index: u64,
        favored: i128,
        other: i128,
    },
    Preservation {
        source: Box<Verdict>,
        target: Box<Verdict>,
    },
}
