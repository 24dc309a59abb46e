//! Brute-force ground truth on explicit finite trees.
//!
//! Nothing here shares code with the equation-system analyses: utilities are
//! computed by walking the tree, Nash equilibrium by enumerating every
//! rewrite of one agent's choices, and subgame perfection by plain
//! recursion. The engine is validated against these.

mod random;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::coterm::{AffineUtility, Agent, Choice, CoSystem, Kind, NodeClass, ParamRef, UtilityFun};
use crate::error::{Error, Result};
use crate::verdict::{AgentOptimum, Evidence, Override, Verdict};

pub use random::{random_game, random_strategy, random_system, GameConfig, SystemConfig};

pub type Payoffs = BTreeMap<Agent, i64>;

/// An explicit finite binary tree. Node annotations are `()` for games and
/// [`Choice`] for strategies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Tree<C> {
    Leaf(Payoffs),
    Node {
        owner: Agent,
        choice: C,
        left: Box<Tree<C>>,
        right: Box<Tree<C>>,
    },
}

pub type FiniteGame = Tree<()>;
pub type FiniteStrategy = Tree<Choice>;

/// Default cap on profiles enumerated per agent by [`exhaustive_nash`].
pub const DEFAULT_PROFILE_LIMIT: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    PreferLeft,
    PreferRight,
}

impl<C: Clone> Tree<C> {
    pub fn leaf(payoffs: impl IntoIterator<Item = (&'static str, i64)>) -> Self {
        Tree::Leaf(payoffs.into_iter().map(|(a, v)| (Agent::from(a), v)).collect())
    }

    pub fn node(owner: &str, choice: C, left: Tree<C>, right: Tree<C>) -> Self {
        Tree::Node {
            owner: owner.into(),
            choice,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Number of nodes, leaves included.
    pub fn size(&self) -> usize {
        match self {
            Tree::Leaf(_) => 1,
            Tree::Node { left, right, .. } => 1 + left.size() + right.size(),
        }
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Node { left, right, .. } => 1 + left.height().max(right.height()),
        }
    }

    /// The top `depth` levels; nodes at level `depth` keep their owner and
    /// annotation but lose their subtrees.
    pub fn prefix(&self, depth: usize) -> Tree<C> {
        match self {
            Tree::Leaf(p) => Tree::Leaf(p.clone()),
            Tree::Node {
                owner,
                choice,
                left,
                right,
            } => {
                let (l, r) = if depth == 0 {
                    (Tree::Leaf(Payoffs::new()), Tree::Leaf(Payoffs::new()))
                } else {
                    (left.prefix(depth - 1), right.prefix(depth - 1))
                };
                Tree::Node {
                    owner: owner.clone(),
                    choice: choice.clone(),
                    left: Box::new(l),
                    right: Box::new(r),
                }
            }
        }
    }

    pub fn erase(&self) -> FiniteGame {
        match self {
            Tree::Leaf(p) => Tree::Leaf(p.clone()),
            Tree::Node {
                owner, left, right, ..
            } => Tree::Node {
                owner: owner.clone(),
                choice: (),
                left: Box::new(left.erase()),
                right: Box::new(right.erase()),
            },
        }
    }

    pub fn agents(&self) -> BTreeSet<Agent> {
        let mut out = BTreeSet::new();
        self.collect_agents(&mut out);
        out
    }

    fn collect_agents(&self, out: &mut BTreeSet<Agent>) {
        match self {
            Tree::Leaf(p) => out.extend(p.keys().cloned()),
            Tree::Node {
                owner, left, right, ..
            } => {
                out.insert(owner.clone());
                left.collect_agents(out);
                right.collect_agents(out);
            }
        }
    }
}

impl FiniteGame {
    /// Annotates every node, in preorder, with the next choice from `choose`.
    pub fn with_choices(&self, choose: &mut impl FnMut() -> Choice) -> FiniteStrategy {
        match self {
            Tree::Leaf(p) => Tree::Leaf(p.clone()),
            Tree::Node {
                owner, left, right, ..
            } => {
                let choice = choose();
                let l = left.with_choices(choose);
                let r = right.with_choices(choose);
                Tree::node(owner.name(), choice, l, r)
            }
        }
    }
}

impl FiniteStrategy {
    /// The leaf reached by following the choices.
    pub fn outcome(&self) -> &Payoffs {
        match self {
            Tree::Leaf(p) => p,
            Tree::Node {
                choice,
                left,
                right,
                ..
            } => match choice {
                Choice::L => left.outcome(),
                Choice::R => right.outcome(),
            },
        }
    }
}

/// Utility of `agent` at the leaf reached by following the choices.
pub fn finite_utility(s: &FiniteStrategy, agent: &Agent) -> Result<i64> {
    s.outcome()
        .get(agent)
        .copied()
        .ok_or_else(|| Error::UnknownAgent(agent.name().to_owned()))
}

/// Bottom-up optimal choices: each owner picks the child whose outcome pays
/// them most, ties resolved by `tiebreak`.
pub fn backward_induction(g: &FiniteGame, tiebreak: TieBreak) -> FiniteStrategy {
    fn solve(g: &FiniteGame, tiebreak: TieBreak) -> (FiniteStrategy, Payoffs) {
        match g {
            Tree::Leaf(p) => (Tree::Leaf(p.clone()), p.clone()),
            Tree::Node {
                owner, left, right, ..
            } => {
                let (ls, lo) = solve(left, tiebreak);
                let (rs, ro) = solve(right, tiebreak);
                let (u, v) = (lo.get(owner), ro.get(owner));
                let choice = match u.cmp(&v) {
                    std::cmp::Ordering::Greater => Choice::L,
                    std::cmp::Ordering::Less => Choice::R,
                    std::cmp::Ordering::Equal => match tiebreak {
                        TieBreak::PreferLeft => Choice::L,
                        TieBreak::PreferRight => Choice::R,
                    },
                };
                let outcome = if choice == Choice::L { lo } else { ro };
                (Tree::node(owner.name(), choice, ls, rs), outcome)
            }
        }
    }
    solve(g, tiebreak).0
}

/// Preorder positions of the nodes owned by `agent`.
fn owned_positions(s: &FiniteStrategy, agent: &Agent) -> Vec<usize> {
    fn walk(t: &FiniteStrategy, agent: &Agent, next: &mut usize, out: &mut Vec<usize>) {
        let here = *next;
        *next += 1;
        if let Tree::Node {
            owner, left, right, ..
        } = t
        {
            if owner == agent {
                out.push(here);
            }
            walk(left, agent, next, out);
            walk(right, agent, next, out);
        }
    }
    let mut out = Vec::new();
    walk(s, agent, &mut 0, &mut out);
    out
}

/// Follows the choices of `s` with some of them rewritten, returning the
/// outcome and the rewrites that were actually on the played path.
fn play(s: &FiniteStrategy, rewrites: &BTreeMap<usize, Choice>) -> (Payoffs, Vec<Override>) {
    let mut node = s;
    let mut position = 0;
    let mut used = Vec::new();
    loop {
        match node {
            Tree::Leaf(p) => return (p.clone(), used),
            Tree::Node {
                choice,
                left,
                right,
                ..
            } => {
                let c = match rewrites.get(&position) {
                    Some(&c) => {
                        if c != *choice {
                            used.push(Override { node: position, choice: c });
                        }
                        c
                    }
                    None => *choice,
                };
                position += 1;
                node = match c {
                    Choice::L => left,
                    Choice::R => {
                        position += left.size();
                        right
                    }
                };
            }
        }
    }
}

/// Nash equilibrium by enumeration: for every agent, every assignment of
/// that agent's choices is played out and compared with the profile's
/// outcome.
pub fn exhaustive_nash(s: &FiniteStrategy) -> Result<Verdict> {
    exhaustive_nash_bounded(s, DEFAULT_PROFILE_LIMIT)
}

pub fn exhaustive_nash_bounded(s: &FiniteStrategy, limit: u64) -> Result<Verdict> {
    let mut optima = Vec::new();
    for agent in s.agents() {
        let positions = owned_positions(s, &agent);
        let profiles = 1u64.checked_shl(positions.len() as u32).unwrap_or(u64::MAX);
        if positions.len() >= 64 || profiles > limit {
            return Err(Error::TooLarge {
                agent: agent.name().to_owned(),
                nodes: positions.len(),
                limit,
            });
        }
        let base = finite_utility(s, &agent)?;
        let mut best = base;
        for mask in 0..profiles {
            let rewrites: BTreeMap<usize, Choice> = positions
                .iter()
                .enumerate()
                .map(|(bit, &p)| (p, if mask >> bit & 1 == 1 { Choice::R } else { Choice::L }))
                .collect();
            let (outcome, overrides) = play(s, &rewrites);
            let value = outcome[&agent];
            if value > base {
                return Ok(Verdict::fails(
                    format!("{agent} gains by deviating ({value} > {base})"),
                    Evidence::FiniteDeviation {
                        agent,
                        baseline: base,
                        value,
                        overrides,
                    },
                ));
            }
            best = best.max(value);
        }
        optima.push(AgentOptimum {
            agent,
            on_path: base as i128,
            best_deviation: best as i128,
        });
    }
    Ok(Verdict::holds(
        "no agent has a profitable deviation",
        Evidence::NashOptima { agents: optima },
    ))
}

/// Subgame perfection on a finite tree: every node's owner weakly prefers
/// the chosen child's outcome, recursively.
pub fn finite_sgpe(s: &FiniteStrategy) -> bool {
    match s {
        Tree::Leaf(_) => true,
        Tree::Node {
            owner,
            choice,
            left,
            right,
        } => {
            let u = left.outcome().get(owner);
            let v = right.outcome().get(owner);
            let dominates = match choice {
                Choice::L => v <= u,
                Choice::R => u <= v,
            };
            dominates && finite_sgpe(left) && finite_sgpe(right)
        }
    }
}

/// Annotation slot of a tree node, bridging finite trees and systems.
pub trait Annotation: Clone {
    const KIND: Kind;
    fn to_choice(&self) -> Option<Choice>;
}

impl Annotation for () {
    const KIND: Kind = Kind::Game;
    fn to_choice(&self) -> Option<Choice> {
        None
    }
}

impl Annotation for Choice {
    const KIND: Kind = Kind::Strategy;
    fn to_choice(&self) -> Option<Choice> {
        Some(*self)
    }
}

/// One class per tree node in preorder, all offsets zero, constant payoffs.
pub fn embed<C: Annotation>(tree: &Tree<C>) -> CoSystem {
    fn go<C: Annotation>(t: &Tree<C>, classes: &mut Vec<NodeClass>) -> usize {
        let id = classes.len();
        match t {
            Tree::Leaf(p) => {
                classes.push(NodeClass::Leaf(UtilityFun(
                    p.iter()
                        .map(|(a, v)| (a.clone(), AffineUtility::constant(*v)))
                        .collect(),
                )));
            }
            Tree::Node {
                owner,
                choice,
                left,
                right,
            } => {
                classes.push(NodeClass::Leaf(UtilityFun::default()));
                let l = go(left, classes);
                let r = go(right, classes);
                classes[id] = NodeClass::Node {
                    owner: owner.clone(),
                    choice: choice.to_choice(),
                    left: ParamRef::at(l),
                    right: ParamRef::at(r),
                };
            }
        }
        id
    }
    let mut classes = Vec::new();
    go(tree, &mut classes);
    CoSystem {
        kind: C::KIND,
        roster: tree.agents(),
        names: (0..classes.len()).map(|i| format!("t{i}")).collect(),
        classes,
        root: ParamRef::at(0),
    }
}

/// Unrolls an acyclic system into its explicit strategy tree.
pub fn unroll_strategy(sys: &CoSystem) -> Result<FiniteStrategy> {
    if !crate::histories::is_finite(sys)? {
        return Err(Error::Cyclic);
    }
    crate::families::truncate_strategy(sys, sys.classes.len())
}

/// Unrolls an acyclic system into its explicit game tree.
pub fn unroll_game(sys: &CoSystem) -> Result<FiniteGame> {
    if !crate::histories::is_finite(sys)? {
        return Err(Error::Cyclic);
    }
    crate::families::truncate_game(sys, sys.classes.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The running example with the expression's orientation: leaf (1, 2)
    /// on the left, Bob's node on the right.
    fn paper_game() -> FiniteGame {
        Tree::node(
            "Alice",
            (),
            Tree::leaf([("Alice", 1), ("Bob", 2)]),
            Tree::node(
                "Bob",
                (),
                Tree::leaf([("Alice", 2), ("Bob", 2)]),
                Tree::leaf([("Alice", 3), ("Bob", 2)]),
            ),
        )
    }

    #[test]
    fn s0_gives_alice_two() {
        let s0 = paper_game().with_choices(&mut {
            let mut it = [Choice::R, Choice::L].into_iter();
            move || it.next().unwrap()
        });
        assert_eq!(finite_utility(&s0, &"Alice".into()), Ok(2));
    }

    #[test]
    fn backward_induction_on_the_running_example() {
        let s = backward_induction(&paper_game(), TieBreak::PreferLeft);
        assert_eq!(s.outcome(), &Payoffs::from([("Alice".into(), 2), ("Bob".into(), 2)]));
        let Tree::Node { choice, right, .. } = &s else { panic!() };
        assert_eq!(*choice, Choice::R);
        let Tree::Node { choice: bob, .. } = right.as_ref() else { panic!() };
        assert_eq!(*bob, Choice::L);
        assert_eq!(s.erase(), paper_game());
    }

    #[test]
    fn backward_induction_on_a_leaf_is_the_leaf() {
        let g: FiniteGame = Tree::leaf([("A", 4)]);
        assert_eq!(backward_induction(&g, TieBreak::PreferRight), Tree::leaf([("A", 4)]));
    }

    #[test]
    fn worse_root_choice_is_caught() {
        let s: FiniteStrategy = Tree::node("A", Choice::L, Tree::leaf([("A", 0)]), Tree::leaf([("A", 1)]));
        let v = exhaustive_nash(&s).unwrap();
        assert!(!v.is_holds());
        let Evidence::FiniteDeviation { overrides, value, .. } = v.evidence else { panic!() };
        assert_eq!(value, 1);
        assert_eq!(overrides, vec![Override { node: 0, choice: Choice::R }]);
    }

    #[test]
    fn enumeration_is_capped() {
        let mut t: FiniteStrategy = Tree::leaf([("A", 0)]);
        for _ in 0..5 {
            t = Tree::node("A", Choice::L, t, Tree::leaf([("A", 0)]));
        }
        assert!(matches!(
            exhaustive_nash_bounded(&t, 16),
            Err(Error::TooLarge { nodes: 5, .. })
        ));
        assert!(exhaustive_nash_bounded(&t, 32).unwrap().is_holds());
    }

    #[test]
    fn finite_sgpe_uses_weak_preference() {
        let tie: FiniteStrategy = Tree::node("A", Choice::R, Tree::leaf([("A", 1)]), Tree::leaf([("A", 1)]));
        assert!(finite_sgpe(&tie));
        let bad: FiniteStrategy = Tree::node("A", Choice::R, Tree::leaf([("A", 2)]), Tree::leaf([("A", 1)]));
        assert!(!finite_sgpe(&bad));
    }

    #[test]
    fn embed_is_acyclic_and_valid() {
        let sys = embed(&paper_game());
        assert_eq!(sys.validate(), Ok(()));
        assert_eq!(sys.kind, Kind::Game);
        assert!(!sys.is_parametric());
        assert_eq!(unroll_game(&sys).unwrap(), paper_game());
    }
}
