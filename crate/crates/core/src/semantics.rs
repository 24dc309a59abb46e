//! Utility of a strategy, "leads to a leaf" and "always leads to a leaf".
//!
//! Choices are attached to classes, not to instances of a class. Following
//! the choices from any reference therefore visits classes in a fixed
//! sequence that does not depend on the index: once a class repeats, the
//! walk has entered a loop of classes and never reaches a leaf. This makes
//! the inductive predicate decidable in at most `|classes| + 1` steps and
//! the coinductive one by checking every reachable class.

use crate::coterm::{AffineUtility, Agent, Choice, CoSystem, Kind, NodeClass, ParamRef};
use crate::error::{Error, Result};
use crate::verdict::{ClassWalk, Evidence, Verdict};

/// The result of following the choices from a reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Walk {
    /// Reached a leaf. `refs` starts at the origin and ends at the leaf, with
    /// offsets accumulated along the way.
    Leaf { refs: Vec<ParamRef>, choices: Vec<Choice> },
    /// Classes visited before entering the loop, and the loop itself.
    Cycle { prefix: Vec<usize>, cycle: Vec<usize> },
}

pub(crate) fn walk(s: &CoSystem, at: ParamRef) -> Result<Walk> {
    let mut refs: Vec<ParamRef> = Vec::new();
    let mut choices = Vec::new();
    let mut cur = at;
    loop {
        if let Some(start) = refs.iter().position(|r| r.class == cur.class) {
            let classes: Vec<usize> = refs.iter().map(|r| r.class).collect();
            return Ok(Walk::Cycle {
                prefix: classes[..start].to_vec(),
                cycle: classes[start..].to_vec(),
            });
        }
        refs.push(cur);
        match s.classes[cur.class].chosen() {
            None => return Ok(Walk::Leaf { refs, choices }),
            Some((c, child)) => {
                choices.push(c);
                cur = child.shifted(cur.offset)?;
            }
        }
    }
}

fn check_strategy(s: &CoSystem) -> Result<()> {
    s.validate()?;
    s.expect_kind(Kind::Strategy)
}

fn check_ref(s: &CoSystem, at: ParamRef) -> Result<()> {
    if at.class < s.classes.len() {
        Ok(())
    } else {
        Err(crate::error::ValidationError::InvalidRoot { target: at.class }.into())
    }
}

/// Whether following the choices from `at` reaches a leaf.
pub fn leads_to_leaf(s: &CoSystem, at: ParamRef) -> Result<Verdict> {
    check_strategy(s)?;
    check_ref(s, at)?;
    Ok(match walk(s, at)? {
        Walk::Leaf { refs, choices } => Verdict::holds(
            match choices.len() {
                1 => "reaches a leaf after 1 step".to_owned(),
                k => format!("reaches a leaf after {k} steps"),
            },
            Evidence::LeafPath { refs, choices },
        ),
        Walk::Cycle { prefix, cycle } => Verdict::fails(
            format!("choices loop through {} classes", cycle.len()),
            Evidence::ChoiceCycle { prefix, cycle },
        ),
    })
}

/// Whether following the choices reaches a leaf from every node of the
/// tree, i.e. from every class reachable through either child.
pub fn alw_leads_to_leaf(s: &CoSystem) -> Result<Verdict> {
    check_strategy(s)?;
    let mut classes = Vec::new();
    for class in s.reachable() {
        match walk(s, ParamRef::at(class))? {
            Walk::Leaf { choices, .. } => classes.push(ClassWalk {
                class,
                steps: choices.len(),
            }),
            Walk::Cycle { cycle, .. } => {
                return Ok(Verdict::fails(
                    format!("class `{}` never reaches a leaf", s.names[class]),
                    Evidence::FailingClass { class, cycle },
                ))
            }
        }
    }
    Ok(Verdict::holds(
        format!("all {} reachable classes lead to a leaf", classes.len()),
        Evidence::AlwaysLeaf { classes },
    ))
}

/// Utility of `agent` when following the choices from `at`, as an affine
/// function of the index `at` is observed at. `None` iff the walk never
/// reaches a leaf.
pub fn s2u_at(s: &CoSystem, at: ParamRef, agent: &Agent) -> Result<Option<AffineUtility>> {
    check_strategy(s)?;
    check_ref(s, at)?;
    if !s.roster.contains(agent) {
        return Err(Error::UnknownAgent(agent.name().to_owned()));
    }
    match walk(s, at)? {
        Walk::Cycle { .. } => Ok(None),
        Walk::Leaf { refs, .. } => {
            let end = refs.last().expect("walk visits at least its origin");
            let NodeClass::Leaf(payoff) = &s.classes[end.class] else {
                unreachable!("walk ends at a leaf")
            };
            let u = payoff.get(agent).expect("validated payoffs cover the roster");
            u.shifted(end.offset).map(Some)
        }
    }
}

/// Utility of `agent` under `s`, as a function of the root index.
pub fn s2u(s: &CoSystem, agent: &Agent) -> Result<Option<AffineUtility>> {
    s2u_at(s, s.root, agent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{self, Profile};
    use crate::oracle::{self, SystemConfig};

    #[test]
    fn ngu_loops_through_alice_and_bob() {
        let ngu = families::dollar_auction_strategy(Profile::Ngu);
        let v = leads_to_leaf(&ngu, ngu.root).unwrap();
        assert!(!v.is_holds());
        assert_eq!(
            v.evidence,
            Evidence::ChoiceCycle {
                prefix: vec![],
                cycle: vec![0, 1]
            }
        );
    }

    #[test]
    fn agu_stops_in_one_step() {
        let agu = families::dollar_auction_strategy(Profile::Agu);
        let v = leads_to_leaf(&agu, agu.root).unwrap();
        let Evidence::LeafPath { choices, .. } = v.evidence else { panic!() };
        assert_eq!(choices, vec![Choice::R]);
    }

    #[test]
    fn a_leaf_leads_to_itself() {
        let s0 = families::paper_s0();
        let v = leads_to_leaf(&s0, ParamRef::at(1)).unwrap();
        let Evidence::LeafPath { choices, .. } = v.evidence else { panic!() };
        assert!(choices.is_empty());
    }

    #[test]
    fn always_leads_to_leaf_on_the_profiles() {
        let agu = families::dollar_auction_strategy(Profile::Agu);
        assert!(alw_leads_to_leaf(&agu).unwrap().is_holds());
        let ngu = families::dollar_auction_strategy(Profile::Ngu);
        let v = alw_leads_to_leaf(&ngu).unwrap();
        assert!(matches!(v.evidence, Evidence::FailingClass { class: 0, .. }));
    }

    #[test]
    fn off_path_escalation_breaks_only_the_coinductive_predicate() {
        // root stops at once; its other child escalates forever
        let mut agu = families::dollar_auction_strategy(Profile::Agu);
        agu.classes.push(NodeClass::Node {
            owner: "Bob".into(),
            choice: Some(Choice::L),
            left: ParamRef::new(4, 1),
            right: ParamRef::at(2),
        });
        agu.names.push("esc".into());
        agu.classes[0] = NodeClass::Node {
            owner: "Alice".into(),
            choice: Some(Choice::R),
            left: ParamRef::at(4),
            right: ParamRef::at(3),
        };
        assert_eq!(agu.validate(), Ok(()));
        assert!(leads_to_leaf(&agu, agu.root).unwrap().is_holds());
        assert!(!alw_leads_to_leaf(&agu).unwrap().is_holds());
    }

    #[test]
    fn utility_of_alice_in_s0_is_two() {
        let s0 = families::paper_s0();
        let u = s2u(&s0, &"Alice".into()).unwrap().unwrap();
        assert_eq!(u.eval(0), 2);
    }

    #[test]
    fn utility_of_a_leaf_is_its_payoff() {
        let s0 = families::paper_s0().rooted_at(ParamRef::at(4));
        assert_eq!(s2u(&s0, &"Alice".into()).unwrap().unwrap().eval(0), 3);
    }

    #[test]
    fn ngu_has_no_utility() {
        let ngu = families::dollar_auction_strategy(Profile::Ngu);
        assert_eq!(s2u(&ngu, &"Alice".into()), Ok(None));
    }

    #[test]
    fn utility_folds_accumulated_offsets() {
        let agu = families::dollar_auction_strategy(Profile::Agu);
        // Bob's node reached at n+1 from a root shifted by 2
        let u = s2u_at(&agu, ParamRef::new(1, 3), &"Bob".into()).unwrap().unwrap();
        assert_eq!(u, AffineUtility::new(-2, -8));
    }

    #[test]
    fn unknown_agent_is_rejected() {
        let s0 = families::paper_s0();
        assert_eq!(s2u(&s0, &"Carol".into()), Err(Error::UnknownAgent("Carol".into())));
    }

    #[test]
    fn unreachable_classes_do_not_change_verdicts() {
        let cfg = SystemConfig::default();
        for seed in 0..200 {
            let s = oracle::random_system(seed, &cfg);
            let mut padded = s.clone();
            padded.classes.push(NodeClass::Node {
                owner: "A".into(),
                choice: Some(Choice::L),
                left: ParamRef::at(padded.classes.len()),
                right: ParamRef::at(0),
            });
            padded.names.push("unused".into());
            assert_eq!(
                leads_to_leaf(&s, s.root).unwrap().outcome,
                leads_to_leaf(&padded, padded.root).unwrap().outcome
            );
            assert_eq!(
                alw_leads_to_leaf(&s).unwrap().outcome,
                alw_leads_to_leaf(&padded).unwrap().outcome
            );
        }
    }
}
