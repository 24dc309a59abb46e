//! The two centipede-shaped infinite games (dollar auction and centipede),
//! their "always give up" and "never give up" profiles, the small finite
//! game used as a running example, and finite truncation.
//!
//! Both infinite games share one shape. At index `n`, Alice either continues
//! (left) to Bob at the same index or stops (right) at a leaf; Bob either
//! continues (left) to Alice at `n + 1` or stops (right) at a leaf.
//!
//! Dollar auction payoffs are stored as negated costs, so the leaf reached
//! when Alice stops at `n` pays Alice `-(2n+1)` and Bob `-2n`.
//!
//! `agu` stops at every node and `ngu` continues at every node. The choices
//! point at the leaves for `agu`, which is what makes it always lead to a
//! leaf and therefore eligible for subgame perfection.

use std::collections::BTreeMap;

use crate::coterm::{AffineUtility, Agent, Choice, CoSystem, Kind, NodeClass, ParamRef, UtilityFun};
use crate::error::{Error, Result};
use crate::oracle::{FiniteGame, FiniteStrategy, Payoffs, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Profile {
    /// Always give up: stop at every node.
    Agu,
    /// Never give up: continue at every node.
    Ngu,
}

impl Profile {
    pub fn choice(self) -> Choice {
        match self {
            Profile::Agu => Choice::R,
            Profile::Ngu => Choice::L,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Profile::Agu => "agu",
            Profile::Ngu => "ngu",
        }
    }
}

fn payoff(alice: AffineUtility, bob: AffineUtility) -> UtilityFun {
    [("Alice", alice), ("Bob", bob)].into_iter().collect()
}

/// Class layout shared by both families, in the order the text form's
/// inline terms desugar: Alice node, Bob node, Bob's stop leaf, Alice's stop
/// leaf.
fn backbone(
    base: &str,
    choice: Option<Choice>,
    alice_stop: UtilityFun,
    bob_stop: UtilityFun,
) -> CoSystem {
    let node = |owner: &str, left: ParamRef, right: ParamRef| NodeClass::Node {
        owner: owner.into(),
        choice,
        left,
        right,
    };
    CoSystem {
        kind: if choice.is_some() { Kind::Strategy } else { Kind::Game },
        roster: [Agent::from("Alice"), Agent::from("Bob")].into(),
        classes: vec![
            node("Alice", ParamRef::at(1), ParamRef::at(3)),
            node("Bob", ParamRef::new(0, 1), ParamRef::at(2)),
            NodeClass::Leaf(bob_stop),
            NodeClass::Leaf(alice_stop),
        ],
        names: (0..4)
            .map(|i| if i == 0 { base.to_owned() } else { format!("{base}_{i}") })
            .collect(),
        root: ParamRef::at(0),
    }
}

fn dollar(base: &str, choice: Option<Choice>) -> CoSystem {
    backbone(
        base,
        choice,
        payoff(AffineUtility::new(-2, -1), AffineUtility::new(-2, 0)),
        payoff(AffineUtility::new(-2, -1), AffineUtility::new(-2, -2)),
    )
}

fn centipede(base: &str, choice: Option<Choice>) -> CoSystem {
    backbone(
        base,
        choice,
        payoff(AffineUtility::new(2, 0), AffineUtility::new(2, 0)),
        payoff(AffineUtility::new(2, -1), AffineUtility::new(2, 3)),
    )
}

pub fn dollar_auction_game() -> CoSystem {
    dollar("dollar", None)
}

pub fn dollar_auction_strategy(profile: Profile) -> CoSystem {
    dollar(profile.name(), Some(profile.choice()))
}

pub fn centipede_game() -> CoSystem {
    centipede("centipede", None)
}

pub fn centipede_strategy(profile: Profile) -> CoSystem {
    centipede(profile.name(), Some(profile.choice()))
}

fn constant_payoff(alice: i64, bob: i64) -> UtilityFun {
    payoff(AffineUtility::constant(alice), AffineUtility::constant(bob))
}

fn small_example(base: &str, choices: Option<(Choice, Choice)>) -> CoSystem {
    let (alice, bob) = match choices {
        Some((a, b)) => (Some(a), Some(b)),
        None => (None, None),
    };
    CoSystem {
        kind: if choices.is_some() { Kind::Strategy } else { Kind::Game },
        roster: [Agent::from("Alice"), Agent::from("Bob")].into(),
        classes: vec![
            NodeClass::Node {
                owner: "Alice".into(),
                choice: alice,
                left: ParamRef::at(1),
                right: ParamRef::at(2),
            },
            NodeClass::Leaf(constant_payoff(1, 2)),
            NodeClass::Node {
                owner: "Bob".into(),
                choice: bob,
                left: ParamRef::at(3),
                right: ParamRef::at(4),
            },
            NodeClass::Leaf(constant_payoff(2, 2)),
            NodeClass::Leaf(constant_payoff(3, 2)),
        ],
        names: (0..5)
            .map(|i| if i == 0 { base.to_owned() } else { format!("{base}_{i}") })
            .collect(),
        root: ParamRef::at(0),
    }
}

/// The finite running example: Alice chooses between the leaf (1, 2) on the
/// left and a Bob node with leaves (2, 2) and (3, 2).
pub fn paper_game() -> CoSystem {
    small_example("g", None)
}

/// The example profile where Alice goes right and Bob goes left, giving
/// Alice a utility of 2.
pub fn paper_s0() -> CoSystem {
    small_example("s0", Some((Choice::R, Choice::L)))
}

/// Unrolls `sys` to `depth` levels. A node at the horizon keeps its leaf
/// children; any non-leaf child is replaced by a copy of the node's own
/// stop leaf.
pub fn truncate_game(sys: &CoSystem, depth: usize) -> Result<FiniteGame> {
    sys.validate()?;
    sys.expect_kind(Kind::Game)?;
    unroll(sys, sys.root, 0, depth, &|_| ())
}

/// As [`truncate_game`], keeping each node's choice. At the horizon a choice
/// that pointed into the interior now selects the copied stop leaf.
pub fn truncate_strategy(sys: &CoSystem, depth: usize) -> Result<FiniteStrategy> {
    sys.validate()?;
    sys.expect_kind(Kind::Strategy)?;
    unroll(sys, sys.root, 0, depth, &|class| {
        sys.classes[class]
            .chosen()
            .expect("strategy nodes carry choices")
            .0
    })
}

fn evaluate(payoff: &UtilityFun, index: u64) -> Result<Payoffs> {
    payoff
        .iter()
        .map(|(a, u)| {
            let v = i64::try_from(u.eval(index)).map_err(|_| Error::Overflow)?;
            Ok((a.clone(), v))
        })
        .collect::<Result<BTreeMap<_, _>>>()
}

fn unroll<C: Clone>(
    sys: &CoSystem,
    at: ParamRef,
    level: usize,
    horizon: usize,
    choice_of: &dyn Fn(usize) -> C,
) -> Result<Tree<C>> {
    let index = at.offset;
    match &sys.classes[at.class] {
        NodeClass::Leaf(payoff) => Ok(Tree::Leaf(evaluate(payoff, index)?)),
        NodeClass::Node {
            owner, left, right, ..
        } => {
            let (left, right) = (left.shifted(index)?, right.shifted(index)?);
            let (l, r) = if level < horizon {
                (
                    unroll(sys, left, level + 1, horizon, choice_of)?,
                    unroll(sys, right, level + 1, horizon, choice_of)?,
                )
            } else {
                let stop = [left, right]
                    .into_iter()
                    .find(|r| sys.classes[r.class].is_leaf())
                    .ok_or(Error::NoLeafAtHorizon(at.class))?;
                let close = |r: ParamRef| -> Result<Tree<C>> {
                    let target = if sys.classes[r.class].is_leaf() { r } else { stop };
                    match &sys.classes[target.class] {
                        NodeClass::Leaf(p) => Ok(Tree::Leaf(evaluate(p, target.offset)?)),
                        NodeClass::Node { .. } => unreachable!("closure targets a leaf"),
                    }
                };
                (close(left)?, close(right)?)
            };
            Ok(Tree::Node {
                owner: owner.clone(),
                choice: choice_of(at.class),
                left: Box::new(l),
                right: Box::new(r),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{backward_induction, exhaustive_nash, TieBreak};

    fn leaf(alice: i64, bob: i64) -> Payoffs {
        [(Agent::from("Alice"), alice), (Agent::from("Bob"), bob)].into()
    }

    #[test]
    fn constructors_validate() {
        for sys in [
            dollar_auction_game(),
            dollar_auction_strategy(Profile::Agu),
            dollar_auction_strategy(Profile::Ngu),
            centipede_game(),
            centipede_strategy(Profile::Agu),
            centipede_strategy(Profile::Ngu),
            paper_game(),
            paper_s0(),
        ] {
            assert_eq!(sys.validate(), Ok(()));
        }
        assert!(dollar_auction_game().is_parametric());
        assert!(centipede_game().is_parametric());
    }

    #[test]
    fn agu_root_gives_up_with_figure_payoffs() {
        let agu = dollar_auction_strategy(Profile::Agu);
        let (c, r) = agu.class(0).chosen().unwrap();
        assert_eq!(c, Choice::R);
        let NodeClass::Leaf(p) = agu.class(r.class) else { panic!() };
        assert_eq!(p.get(&"Alice".into()).unwrap().eval(0), -1);
        assert_eq!(p.get(&"Bob".into()).unwrap().eval(0), 0);
    }

    #[test]
    fn centipede_alice_stop_leaf_at_one() {
        let NodeClass::Leaf(p) = centipede_game().class(3).clone() else { panic!() };
        assert_eq!(p.get(&"Alice".into()).unwrap().eval(1), 2);
        assert_eq!(p.get(&"Bob".into()).unwrap().eval(1), 2);
    }

    #[test]
    fn truncation_at_the_root_closes_both_sides() {
        let t = truncate_game(&dollar_auction_game(), 0).unwrap();
        let Tree::Node { left, right, .. } = t else { panic!() };
        assert_eq!(*left, Tree::Leaf(leaf(-1, 0)));
        assert_eq!(*right, Tree::Leaf(leaf(-1, 0)));
    }

    #[test]
    fn truncation_depth_is_bounded() {
        for d in 0..8 {
            let t = truncate_game(&centipede_game(), d).unwrap();
            assert!(t.height() <= d + 1);
        }
    }

    #[test]
    fn consecutive_truncations_agree_above_the_horizon() {
        for d in 0..8 {
            let a = truncate_game(&dollar_auction_game(), d).unwrap();
            let b = truncate_game(&dollar_auction_game(), d + 1).unwrap();
            assert_eq!(a.prefix(d), b.prefix(d));
        }
    }

    #[test]
    fn truncated_dollar_auction_gives_up_at_the_root() {
        let g = truncate_game(&dollar_auction_game(), 6).unwrap();
        for tb in [TieBreak::PreferLeft, TieBreak::PreferRight] {
            let s = backward_induction(&g, tb);
            let Tree::Node { choice, .. } = &s else { panic!() };
            assert_eq!(*choice, Choice::R);
            assert_eq!(s.outcome(), &leaf(-1, 0));
        }
    }

    #[test]
    fn truncated_centipede_all_continue_is_not_nash() {
        let s = truncate_strategy(&centipede_strategy(Profile::Ngu), 10).unwrap();
        let v = exhaustive_nash(&s).unwrap();
        assert!(!v.is_holds());
    }

    #[test]
    fn horizon_without_leaf_child_is_an_error() {
        let mut g = dollar_auction_game();
        if let NodeClass::Node { right, .. } = &mut g.classes[0] {
            *right = ParamRef::at(1);
        }
        assert_eq!(truncate_game(&g, 0), Err(Error::NoLeafAtHorizon(0)));
    }
}
