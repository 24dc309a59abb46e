use super::reach::{IndexGraph, Reachability};
use crate::coterm::{AffineUtility, Agent, Choice, CoSystem, NodeClass};
use crate::error::{Error, Result};
use crate::semantics::{leads_to_leaf, s2u};
use crate::verdict::{AgentOptimum, Deviation, Evidence, Step, Verdict};

/// The moves available to `agent` when everyone else keeps their choices.
fn deviation_graph(s: &CoSystem, agent: &Agent) -> IndexGraph {
    IndexGraph::filtered(s, |class, c| match &s.classes[class] {
        NodeClass::Node { owner, choice, .. } => owner == agent || *choice == Some(c),
        NodeClass::Leaf(_) => false,
    })
}

fn steps(s: &CoSystem, moves: &[(usize, Choice)]) -> Vec<Step> {
    moves
        .iter()
        .map(|&(class, choice)| Step {
            class,
            choice,
            overridden: s.classes[class].chosen().map(|c| c.0) != Some(choice),
        })
        .collect()
}

/// Nash equilibrium: no agent gains by unilaterally changing its own
/// choices at finitely many nodes so that play still ends at a leaf.
/// Holds vacuously when the strategy itself never reaches a leaf.
pub fn nash_eq(s: &CoSystem) -> Result<Verdict> {
    if !leads_to_leaf(s, s.root)?.is_holds() {
        return Ok(Verdict::holds("vacuous: strategy does not lead to a leaf", Evidence::Vacuous));
    }
    let mut optima = Vec::new();
    for agent in &s.roster {
        let baseline = s2u(s, agent)?.expect("strategy leads to a leaf").eval(0);
        let reach = Reachability::new(deviation_graph(s, agent), s.root)?;
        let mut best = baseline;
        for (leaf, class) in s.classes.iter().enumerate() {
            let NodeClass::Leaf(payoff) = class else { continue };
            let Some(set) = reach.set(leaf)? else { continue };
            let f = payoff.get(agent).expect("validated payoffs cover the roster");
            if f.slope > 0 && set.unbounded {
                let dev = pump(s, &reach, agent, baseline, leaf, f)?;
                return Ok(Verdict::fails(
                    format!("{agent} gains by escalating to `{}`", s.names[leaf]),
                    Evidence::Deviation(dev),
                ));
            }
            let index = if f.slope > 0 {
                set.max().expect("bounded sets are explicit")
            } else {
                set.min
            };
            let value = f.eval(index);
            if value > baseline {
                let path = reach.path_at(leaf, index)?.expect("index is reachable");
                return Ok(Verdict::fails(
                    format!("{agent} gains {} by deviating to `{}`", value - baseline, s.names[leaf]),
                    Evidence::Deviation(Deviation {
                        agent: agent.clone(),
                        baseline,
                        value,
                        leaf,
                        index,
                        prefix: steps(s, &path),
                        cycle: Vec::new(),
                        repeat: 0,
                        suffix: Vec::new(),
                    }),
                ));
            }
            best = best.max(value);
        }
        optima.push(AgentOptimum {
            agent: agent.clone(),
            on_path: baseline,
            best_deviation: best,
        });
    }
    Ok(Verdict::holds(
        "no agent has a profitable deviation",
        Evidence::NashOptima { agents: optima },
    ))
}

/// Deviation reaching `leaf` after enough turns around a positive cycle
/// that `f` exceeds `baseline`.
fn pump(
    s: &CoSystem,
    reach: &Reachability,
    agent: &Agent,
    baseline: i128,
    leaf: usize,
    f: AffineUtility,
) -> Result<Deviation> {
    let p = reach.pump_towards(leaf).expect("unbounded sets have a pump");
    let prefix = reach.shortest_path(p.anchor);
    let d1 = reach.distance(p.anchor).expect("anchor is reachable");
    let (suffix, d2) = reach.path_between(p.anchor, leaf)?.expect("leaf is reachable from the anchor");
    let base = i128::from(d1) + i128::from(d2);
    let at0 = f.eval(0) + i128::from(f.slope) * base;
    let gain = i128::from(f.slope) * i128::from(p.weight);
    let repeat = if at0 > baseline {
        0
    } else {
        (baseline - at0) / gain + 1
    };
    let index = u64::try_from(base + repeat * i128::from(p.weight)).map_err(|_| Error::Overflow)?;
    Ok(Deviation {
        agent: agent.clone(),
        baseline,
        value: f.eval(index),
        leaf,
        index,
        prefix: steps(s, &prefix),
        cycle: steps(s, &p.cycle),
        repeat: u64::try_from(repeat).map_err(|_| Error::Overflow)?,
        suffix: steps(s, &suffix),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coterm::{Kind, ParamRef, UtilityFun};
    use crate::families::{self, Profile};

    /// Replays a deviation against the system: every step follows an edge,
    /// non-overridden steps agree with the strategy, overridden ones are at
    /// the agent's nodes, and the walk ends at the claimed leaf and index.
    fn replay(s: &CoSystem, d: &Deviation) {
        let cycle = d.cycle.iter().cycle().take(d.cycle.len() * d.repeat as usize);
        let mut at = s.root;
        for step in d.prefix.iter().chain(cycle).chain(&d.suffix) {
            assert_eq!(step.class, at.class);
            let class = &s.classes[at.class];
            if step.overridden {
                assert_eq!(class.owner(), Some(&d.agent));
            } else {
                assert_eq!(class.chosen().unwrap().0, step.choice);
            }
            at = class.child(step.choice).unwrap().shifted(at.offset).unwrap();
        }
        assert_eq!(at, ParamRef::new(d.leaf, d.index));
        let NodeClass::Leaf(p) = &s.classes[d.leaf] else { panic!() };
        assert_eq!(p.get(&d.agent).unwrap().eval(d.index), d.value);
        assert!(d.value > d.baseline);
    }

    #[test]
    fn never_stopping_is_vacuously_nash() {
        let v = nash_eq(&families::dollar_auction_strategy(Profile::Ngu)).unwrap();
        assert!(v.is_holds() && v.is_vacuous());
        assert!(v.note.starts_with("vacuous"));
    }

    #[test]
    fn stopping_at_once_is_nash_in_the_dollar_auction() {
        let v = nash_eq(&families::dollar_auction_strategy(Profile::Agu)).unwrap();
        assert!(v.is_holds());
        let Evidence::NashOptima { agents } = v.evidence else { panic!() };
        let alice = agents.iter().find(|o| o.agent.name() == "Alice").unwrap();
        assert_eq!(alice.on_path, -1);
        assert_eq!(alice.best_deviation, -1);
    }

    #[test]
    fn centipede_profiles() {
        assert!(nash_eq(&families::centipede_strategy(Profile::Agu)).unwrap().is_holds());
        let v = nash_eq(&families::centipede_strategy(Profile::Ngu)).unwrap();
        assert!(v.is_holds() && v.is_vacuous());
    }

    #[test]
    fn the_worse_leaf_gives_a_one_step_deviation() {
        let s = CoSystem {
            kind: Kind::Strategy,
            roster: ["A".into()].into(),
            classes: vec![
                NodeClass::Node {
                    owner: "A".into(),
                    choice: Some(Choice::L),
                    left: ParamRef::at(1),
                    right: ParamRef::at(2),
                },
                NodeClass::Leaf(UtilityFun::from_iter([("A", AffineUtility::constant(0))])),
                NodeClass::Leaf(UtilityFun::from_iter([("A", AffineUtility::constant(1))])),
            ],
            names: vec!["g".into(), "worse".into(), "better".into()],
            root: ParamRef::at(0),
        };
        let v = nash_eq(&s).unwrap();
        assert!(!v.is_holds());
        let Evidence::Deviation(d) = v.evidence else { panic!() };
        replay(&s, &d);
        assert_eq!(d.prefix.len(), 1);
        assert!(d.prefix[0].overridden);
    }

    #[test]
    fn growing_payoffs_are_reached_by_pumping() {
        // Alice stops at once for 5, or loops with n+1 and stops for 2n
        let s = CoSystem {
            kind: Kind::Strategy,
            roster: ["Alice".into()].into(),
            classes: vec![
                NodeClass::Node {
                    owner: "Alice".into(),
                    choice: Some(Choice::R),
                    left: ParamRef::new(1, 1),
                    right: ParamRef::at(2),
                },
                NodeClass::Node {
                    owner: "Alice".into(),
                    choice: Some(Choice::R),
                    left: ParamRef::new(1, 1),
                    right: ParamRef::at(3),
                },
                NodeClass::Leaf(UtilityFun::from_iter([("Alice", AffineUtility::constant(5))])),
                NodeClass::Leaf(UtilityFun::from_iter([("Alice", AffineUtility::new(2, 0))])),
            ],
            names: vec!["start".into(), "loop".into(), "quit".into(), "late".into()],
            root: ParamRef::at(0),
        };
        let v = nash_eq(&s).unwrap();
        let Evidence::Deviation(d) = v.evidence else { panic!("{v}") };
        replay(&s, &d);
        assert_eq!(d.index, 3);
        assert_eq!(d.value, 6);
    }
}
