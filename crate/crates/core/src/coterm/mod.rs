//! Finitely presented infinite games and strategies.
//!
//! A [`CoSystem`] is a list of parametric equations `c(n) = term`, where each
//! term is either a leaf whose payoffs are affine in `n`, or a node whose two
//! children refer to classes instantiated at `n + k`. Instantiating the root
//! class at `n = 0` and unfolding the equations forever yields the (possibly
//! infinite) binary tree the system denotes.
//!
//! Equality of denoted trees is bisimilarity ([`bisimilar`],
//! [`bisimilar_bounded`]). Structural equality of two `CoSystem` values is
//! only equality of presentations.

mod bisim;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ValidationError};

pub use bisim::{bisimilar, bisimilar_bounded};

/// One of the two moves available at every node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Choice {
    #[serde(rename = "l")]
    L,
    #[serde(rename = "r")]
    R,
}

impl Choice {
    pub const BOTH: [Choice; 2] = [Choice::L, Choice::R];

    pub fn flip(self) -> Choice {
        match self {
            Choice::L => Choice::R,
            Choice::R => Choice::L,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Choice::L => 'l',
            Choice::R => 'r',
        }
    }
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Agent(String);

impl Agent {
    pub fn new(name: impl Into<String>) -> Self {
        Agent(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Agent {
    fn from(s: &str) -> Self {
        Agent(s.to_owned())
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A payoff `slope * n + intercept` as a function of the unrolling index `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct AffineUtility {
    pub slope: i64,
    pub intercept: i64,
}

impl AffineUtility {
    pub fn new(slope: i64, intercept: i64) -> Self {
        AffineUtility { slope, intercept }
    }

    pub fn constant(value: i64) -> Self {
        AffineUtility::new(0, value)
    }

    /// Exact value at `n`. Cannot overflow: |slope·n| < 2^127.
    pub fn eval(&self, n: u64) -> i128 {
        self.slope as i128 * n as i128 + self.intercept as i128
    }

    /// The same function re-expressed relative to an index shifted by `k`,
    /// i.e. `m ↦ self(m + k)`.
    pub fn shifted(&self, k: u64) -> Result<AffineUtility> {
        let k = i64::try_from(k).map_err(|_| Error::Overflow)?;
        let intercept = self
            .slope
            .checked_mul(k)
            .and_then(|d| d.checked_add(self.intercept))
            .ok_or(Error::Overflow)?;
        Ok(AffineUtility::new(self.slope, intercept))
    }
}

impl fmt::Display for AffineUtility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.slope, self.intercept) {
            (0, b) => write!(f, "{b}"),
            (a, 0) => write!(f, "{a}*n"),
            (a, b) if b < 0 => write!(f, "{a}*n-{}", (b as i128).unsigned_abs()),
            (a, b) => write!(f, "{a}*n+{b}"),
        }
    }
}

/// Leaf payoffs: one affine utility per roster agent.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UtilityFun(pub BTreeMap<Agent, AffineUtility>);

impl UtilityFun {
    pub fn get(&self, agent: &Agent) -> Option<AffineUtility> {
        self.0.get(agent).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Agent, &AffineUtility)> {
        self.0.iter()
    }

    pub fn shifted(&self, k: u64) -> Result<UtilityFun> {
        self.0
            .iter()
            .map(|(a, u)| Ok((a.clone(), u.shifted(k)?)))
            .collect::<Result<_>>()
            .map(UtilityFun)
    }

    pub fn has_slope(&self) -> bool {
        self.0.values().any(|u| u.slope != 0)
    }
}

impl<A: Into<Agent>> FromIterator<(A, AffineUtility)> for UtilityFun {
    fn from_iter<I: IntoIterator<Item = (A, AffineUtility)>>(iter: I) -> Self {
        UtilityFun(iter.into_iter().map(|(a, u)| (a.into(), u)).collect())
    }
}

/// A reference to class `class` instantiated at `n + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ParamRef {
    pub class: usize,
    pub offset: u64,
}

impl ParamRef {
    pub fn new(class: usize, offset: u64) -> Self {
        ParamRef { class, offset }
    }

    pub fn at(class: usize) -> Self {
        ParamRef::new(class, 0)
    }

    /// Compose with an enclosing offset.
    pub fn shifted(self, k: u64) -> Result<ParamRef> {
        let offset = self.offset.checked_add(k).ok_or(Error::Overflow)?;
        Ok(ParamRef::new(self.class, offset))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Game,
    Strategy,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Game => "game",
            Kind::Strategy => "strategy",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeClass {
    Leaf(UtilityFun),
    Node {
        owner: Agent,
        choice: Option<Choice>,
        left: ParamRef,
        right: ParamRef,
    },
}

impl NodeClass {
    pub fn child(&self, c: Choice) -> Option<ParamRef> {
        match self {
            NodeClass::Leaf(_) => None,
            NodeClass::Node { left, right, .. } => Some(match c {
                Choice::L => *left,
                Choice::R => *right,
            }),
        }
    }

    pub fn children(&self) -> impl Iterator<Item = ParamRef> {
        let pair = match self {
            NodeClass::Leaf(_) => None,
            NodeClass::Node { left, right, .. } => Some([*left, *right]),
        };
        pair.into_iter().flatten()
    }

    /// The child selected by this node's choice, if it is a strategy node.
    pub fn chosen(&self) -> Option<(Choice, ParamRef)> {
        match self {
            NodeClass::Node {
                choice: Some(c), ..
            } => Some((*c, self.child(*c).expect("node has children"))),
            _ => None,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, NodeClass::Leaf(_))
    }

    pub fn owner(&self) -> Option<&Agent> {
        match self {
            NodeClass::Node { owner, .. } => Some(owner),
            NodeClass::Leaf(_) => None,
        }
    }
}

/// A finite system of parametric corecursive equations.
///
/// Fields are plain data; [`CoSystem::validate`] checks the invariants every
/// analysis relies on, and the public analyses call it on entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoSystem {
    pub kind: Kind,
    pub roster: BTreeSet<Agent>,
    pub classes: Vec<NodeClass>,
    /// Equation names, one per class. Only the text form uses them.
    pub names: Vec<String>,
    pub root: ParamRef,
}

/// Words with a fixed meaning in the text form; never usable as names.
pub const RESERVED: &[&str] = &["strategy", "game", "agents", "root", "leaf", "l", "r", "n"];

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    let head_ok = chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
    head_ok
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !RESERVED.contains(&s)
}

impl CoSystem {
    pub fn class(&self, id: usize) -> &NodeClass {
        &self.classes[id]
    }

    pub fn class_id(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn agent(&self, name: &str) -> Result<Agent> {
        let a = Agent::from(name);
        if self.roster.contains(&a) {
            Ok(a)
        } else {
            Err(Error::UnknownAgent(name.to_owned()))
        }
    }

    /// Checks every structural invariant and reports the first violation.
    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.roster.is_empty() {
            return Err(ValidationError::EmptyRoster);
        }
        if self.classes.is_empty() {
            return Err(ValidationError::EmptyClasses);
        }
        if self.names.len() != self.classes.len() {
            return Err(ValidationError::NameCount {
                names: self.names.len(),
                classes: self.classes.len(),
            });
        }
        for a in &self.roster {
            if !is_identifier(a.name()) {
                return Err(ValidationError::InvalidName(a.name().to_owned()));
            }
        }
        let mut seen = BTreeSet::new();
        for name in &self.names {
            if !is_identifier(name) {
                return Err(ValidationError::InvalidName(name.clone()));
            }
            if !seen.insert(name.as_str()) {
                return Err(ValidationError::DuplicateName(name.clone()));
            }
        }
        if self.root.class >= self.classes.len() {
            return Err(ValidationError::InvalidRoot {
                target: self.root.class,
            });
        }
        for (id, class) in self.classes.iter().enumerate() {
            match class {
                NodeClass::Leaf(payoff) => {
                    for a in &self.roster {
                        if !payoff.0.contains_key(a) {
                            return Err(ValidationError::MissingPayoff {
                                class: id,
                                agent: a.name().to_owned(),
                            });
                        }
                    }
                    if let Some(extra) = payoff.0.keys().find(|a| !self.roster.contains(*a)) {
                        return Err(ValidationError::ExtraPayoff {
                            class: id,
                            agent: extra.name().to_owned(),
                        });
                    }
                }
                NodeClass::Node {
                    owner,
                    choice,
                    left,
                    right,
                } => {
                    for r in [left, right] {
                        if r.class >= self.classes.len() {
                            return Err(ValidationError::InvalidRef {
                                class: id,
                                target: r.class,
                            });
                        }
                    }
                    match (self.kind, choice) {
                        (Kind::Strategy, None) => return Err(ValidationError::MissingChoice(id)),
                        (Kind::Game, Some(_)) => return Err(ValidationError::ExtraChoice(id)),
                        _ => {}
                    }
                    if !self.roster.contains(owner) {
                        return Err(ValidationError::UnknownOwner {
                            class: id,
                            agent: owner.name().to_owned(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub(crate) fn expect_kind(&self, kind: Kind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::KindMismatch {
                expected: kind,
                found: self.kind,
            })
        }
    }

    /// Class ids reachable from the root through both children, in
    /// breadth-first order.
    pub fn reachable(&self) -> Vec<usize> {
        let mut seen = vec![false; self.classes.len()];
        let mut order = Vec::new();
        let mut queue = VecDeque::from([self.root.class]);
        seen[self.root.class] = true;
        while let Some(c) = queue.pop_front() {
            order.push(c);
            for child in self.classes[c].children() {
                if !seen[child.class] {
                    seen[child.class] = true;
                    queue.push_back(child.class);
                }
            }
        }
        order
    }

    /// True iff some reachable reference carries a positive offset or some
    /// reachable leaf has a non-constant payoff.
    pub fn is_parametric(&self) -> bool {
        if self.root.offset > 0 {
            return true;
        }
        self.reachable().into_iter().any(|c| match &self.classes[c] {
            NodeClass::Leaf(payoff) => payoff.has_slope(),
            NodeClass::Node { left, right, .. } => left.offset > 0 || right.offset > 0,
        })
    }

    /// One-step observation of the tree denoted at `at`, as a function of the
    /// observation index `n`.
    pub fn unfold(&self, at: ParamRef) -> Result<HeadForm> {
        self.validate()?;
        if at.class >= self.classes.len() {
            return Err(ValidationError::InvalidRef {
                class: at.class,
                target: at.class,
            }
            .into());
        }
        Ok(match &self.classes[at.class] {
            NodeClass::Leaf(payoff) => HeadForm::Leaf(payoff.shifted(at.offset)?),
            NodeClass::Node {
                owner,
                choice,
                left,
                right,
            } => HeadForm::Node {
                owner: owner.clone(),
                choice: *choice,
                left: left.shifted(at.offset)?,
                right: right.shifted(at.offset)?,
            },
        })
    }

    /// The same system observed from `at` instead of the current root.
    pub fn rooted_at(&self, at: ParamRef) -> CoSystem {
        CoSystem {
            root: at,
            ..self.clone()
        }
    }

    /// Erases every choice, yielding the underlying game.
    pub fn strategy_to_game(&self) -> Result<CoSystem> {
        self.validate()?;
        self.expect_kind(Kind::Strategy)?;
        let classes = self
            .classes
            .iter()
            .map(|c| match c {
                NodeClass::Node {
                    owner, left, right, ..
                } => NodeClass::Node {
                    owner: owner.clone(),
                    choice: None,
                    left: *left,
                    right: *right,
                },
                leaf => leaf.clone(),
            })
            .collect();
        Ok(CoSystem {
            kind: Kind::Game,
            classes,
            ..self.clone()
        })
    }

    /// Turns a game into a strategy by attaching `choose(class)` at every
    /// node class.
    pub fn annotate(&self, mut choose: impl FnMut(usize) -> Choice) -> Result<CoSystem> {
        self.validate()?;
        self.expect_kind(Kind::Game)?;
        let classes = self
            .classes
            .iter()
            .enumerate()
            .map(|(id, c)| match c {
                NodeClass::Node {
                    owner, left, right, ..
                } => NodeClass::Node {
                    owner: owner.clone(),
                    choice: Some(choose(id)),
                    left: *left,
                    right: *right,
                },
                leaf => leaf.clone(),
            })
            .collect();
        Ok(CoSystem {
            kind: Kind::Strategy,
            classes,
            ..self.clone()
        })
    }

    /// The choices of a strategy, one per class (`None` at leaves).
    pub fn choices(&self) -> Vec<Option<Choice>> {
        self.classes
            .iter()
            .map(|c| match c {
                NodeClass::Node { choice, .. } => *choice,
                NodeClass::Leaf(_) => None,
            })
            .collect()
    }

    /// A fresh class name derived from `base` that is not yet taken.
    pub fn fresh_name(&self, base: &str) -> String {
        (1..)
            .map(|i| format!("{base}_{i}"))
            .find(|n| !self.names.contains(n))
            .expect("unbounded supply of names")
    }
}

/// One-step observation of a system at a reference.
///
/// Leaf payoffs have the reference's offset folded into their intercepts;
/// node children have it added to their offsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeadForm {
    Leaf(UtilityFun),
    Node {
        owner: Agent,
        choice: Option<Choice>,
        left: ParamRef,
        right: ParamRef,
    },
}

impl HeadForm {
    /// Adds the head as a new class of `sys` and makes it the root. The
    /// result denotes the same tree as `sys` observed at the unfolded ref.
    pub fn embed_as_root(&self, sys: &CoSystem) -> CoSystem {
        let class = match self.clone() {
            HeadForm::Leaf(payoff) => NodeClass::Leaf(payoff),
            HeadForm::Node {
                owner,
                choice,
                left,
                right,
            } => NodeClass::Node {
                owner,
                choice,
                left,
                right,
            },
        };
        let mut out = sys.clone();
        out.names.push(sys.fresh_name("head"));
        out.classes.push(class);
        out.root = ParamRef::at(out.classes.len() - 1);
        out
    }
}
