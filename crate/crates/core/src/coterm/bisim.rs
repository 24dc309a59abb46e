use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::hash::Hash;

use super::{Agent, Choice, CoSystem, NodeClass};
use crate::error::{Error, Result};
use crate::verdict::{Evidence, Verdict};

/// What a single unfolding step reveals about a tree.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Observation {
    Leaf(Vec<(Agent, i128)>),
    Node {
        owner: Agent,
        choice: Option<Choice>,
    },
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observation::Leaf(payoffs) => {
                let body: Vec<String> = payoffs.iter().map(|(a, v)| format!("{a}: {v}")).collect();
                write!(f, "leaf[{}]", body.join(", "))
            }
            Observation::Node {
                owner,
                choice: Some(c),
            } => write!(f, "<{owner}, {c}>"),
            Observation::Node { owner, choice: None } => write!(f, "<{owner}>"),
        }
    }
}

fn observe(sys: &CoSystem, class: usize, index: u64) -> Observation {
    match &sys.classes[class] {
        NodeClass::Leaf(payoff) => {
            Observation::Leaf(payoff.iter().map(|(a, u)| (a.clone(), u.eval(index))).collect())
        }
        NodeClass::Node { owner, choice, .. } => Observation::Node {
            owner: owner.clone(),
            choice: *choice,
        },
    }
}

fn check_comparable(a: &CoSystem, b: &CoSystem) -> Result<()> {
    a.validate()?;
    b.validate()?;
    b.expect_kind(a.kind)?;
    if a.roster != b.roster {
        return Err(Error::RosterMismatch);
    }
    Ok(())
}

fn path_to<S: Copy + Eq + Hash>(parents: &HashMap<S, (S, Choice)>, mut state: S) -> Vec<Choice> {
    let mut path = Vec::new();
    while let Some(&(prev, c)) = parents.get(&state) {
        path.push(c);
        state = prev;
    }
    path.reverse();
    path
}

/// Decides bisimilarity of two non-parametric systems.
///
/// Explores the synchronized product of the two class graphs from the roots.
/// Trees are deterministic, so the reachable product pairs form a
/// bisimulation iff no reachable pair disagrees on its head observation.
/// The first disagreement found breadth-first gives a shortest
/// distinguishing path.
pub fn bisimilar(a: &CoSystem, b: &CoSystem) -> Result<Verdict> {
    check_comparable(a, b)?;
    if a.is_parametric() || b.is_parametric() {
        return Err(Error::ParametricUnsupported);
    }
    let start = (a.root.class, b.root.class);
    let mut parents: HashMap<(usize, usize), ((usize, usize), Choice)> = HashMap::new();
    let mut seen = vec![start];
    let mut queue = VecDeque::from([start]);
    let mut visited = std::collections::HashSet::from([start]);
    while let Some((ca, cb)) = queue.pop_front() {
        let (oa, ob) = (observe(a, ca, 0), observe(b, cb, 0));
        if oa != ob {
            return Ok(Verdict::fails(
                "head observations differ",
                Evidence::Distinguishing {
                    path: path_to(&parents, (ca, cb)),
                    left: oa.to_string(),
                    right: ob.to_string(),
                },
            ));
        }
        for c in Choice::BOTH {
            if let (Some(ra), Some(rb)) = (a.classes[ca].child(c), b.classes[cb].child(c)) {
                let next = (ra.class, rb.class);
                if visited.insert(next) {
                    parents.insert(next, ((ca, cb), c));
                    seen.push(next);
                    queue.push_back(next);
                }
            }
        }
    }
    seen.sort_unstable();
    Ok(Verdict::holds(
        format!("bisimulation of {} class pairs", seen.len()),
        Evidence::Relation { pairs: seen },
    ))
}

/// Compares the two denoted trees on every path of length at most `depth`.
///
/// Leaf payoffs are compared as integers at the index accumulated along the
/// path. Product states are `(class, index)` pairs on both sides; a state
/// first met at the smallest depth covers every later visit, so each is
/// expanded once.
pub fn bisimilar_bounded(a: &CoSystem, b: &CoSystem, depth: usize) -> Result<Verdict> {
    check_comparable(a, b)?;
    type State = (usize, u64, usize, u64);
    let start: State = (a.root.class, a.root.offset, b.root.class, b.root.offset);
    let mut parents: HashMap<State, (State, Choice)> = HashMap::new();
    let mut level: HashMap<State, usize> = HashMap::from([(start, 0)]);
    let mut queue = VecDeque::from([start]);
    while let Some(state @ (ca, na, cb, nb)) = queue.pop_front() {
        let d = level[&state];
        let (oa, ob) = (observe(a, ca, na), observe(b, cb, nb));
        if oa != ob {
            return Ok(Verdict::fails(
                format!("observations differ at depth {d}"),
                Evidence::Distinguishing {
                    path: path_to(&parents, state),
                    left: oa.to_string(),
                    right: ob.to_string(),
                },
            ));
        }
        if d == depth {
            continue;
        }
        for c in Choice::BOTH {
            if let (Some(ra), Some(rb)) = (a.classes[ca].child(c), b.classes[cb].child(c)) {
                let next: State = (
                    ra.class,
                    na.checked_add(ra.offset).ok_or(Error::Overflow)?,
                    rb.class,
                    nb.checked_add(rb.offset).ok_or(Error::Overflow)?,
                );
                if let std::collections::hash_map::Entry::Vacant(e) = level.entry(next) {
                    e.insert(d + 1);
                    parents.insert(next, (state, c));
                    queue.push_back(next);
                }
            }
        }
    }
    Ok(Verdict::holds(
        format!("trees agree to depth {depth}"),
        Evidence::BoundedAgreement {
            depth,
            states: level.len(),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coterm::{AffineUtility, Kind, ParamRef};
    use crate::families::{self, Profile};

    fn constant_leaf(v: i64) -> NodeClass {
        NodeClass::Leaf([("A", AffineUtility::constant(v))].into_iter().collect())
    }

    fn node(left: usize, right: usize) -> NodeClass {
        NodeClass::Node {
            owner: "A".into(),
            choice: None,
            left: ParamRef::at(left),
            right: ParamRef::at(right),
        }
    }

    fn game(classes: Vec<NodeClass>) -> CoSystem {
        let names = (0..classes.len()).map(|i| format!("c{i}")).collect();
        CoSystem {
            kind: Kind::Game,
            roster: [Agent::from("A")].into(),
            classes,
            names,
            root: ParamRef::at(0),
        }
    }

    /// The infinite left comb g = <A, g, leaf 0>, once with a self loop and
    /// once through two classes that refer to each other.
    fn combs() -> (CoSystem, CoSystem) {
        let one = game(vec![node(0, 1), constant_leaf(0)]);
        let two = game(vec![node(1, 2), node(0, 3), constant_leaf(0), constant_leaf(0)]);
        (one, two)
    }

    #[test]
    fn reflexive_with_diagonal_relation() {
        let g = families::paper_game();
        let v = bisimilar(&g, &g).unwrap();
        assert!(v.is_holds());
        let Evidence::Relation { pairs } = v.evidence else { panic!() };
        assert!(pairs.iter().all(|(x, y)| x == y));
    }

    #[test]
    fn differently_presented_combs_are_bisimilar() {
        let (one, two) = combs();
        assert!(bisimilar(&one, &two).unwrap().is_holds());
        // cross-check by bounded unrolling
        assert!(bisimilar_bounded(&one, &two, 20).unwrap().is_holds());
    }

    #[test]
    fn leaf_mismatch_has_empty_witness() {
        let x = game(vec![constant_leaf(1)]);
        let y = game(vec![constant_leaf(2)]);
        let v = bisimilar(&x, &y).unwrap();
        assert!(!v.is_holds());
        let Evidence::Distinguishing { path, .. } = v.evidence else { panic!() };
        assert!(path.is_empty());
    }

    #[test]
    fn deep_difference_yields_replayable_path() {
        let (one, _) = combs();
        let other = game(vec![node(1, 2), node(3, 2), constant_leaf(0), constant_leaf(5)]);
        let v = bisimilar(&one, &other).unwrap();
        let Evidence::Distinguishing { path, .. } = v.evidence else { panic!() };
        assert_eq!(path, vec![Choice::L, Choice::L]);
    }

    #[test]
    fn parametric_systems_need_bounded_check() {
        let agu = families::dollar_auction_strategy(Profile::Agu);
        assert_eq!(bisimilar(&agu, &agu), Err(Error::ParametricUnsupported));
        assert!(bisimilar_bounded(&agu, &agu, 50).unwrap().is_holds());
    }

    #[test]
    fn kind_mismatch_is_an_error() {
        let g = families::paper_game();
        let s = families::paper_s0();
        assert!(matches!(bisimilar(&g, &s), Err(Error::KindMismatch { .. })));
    }

    #[test]
    fn agu_and_ngu_differ_at_the_root() {
        let agu = families::dollar_auction_strategy(Profile::Agu);
        let ngu = families::dollar_auction_strategy(Profile::Ngu);
        let v = bisimilar_bounded(&agu, &ngu, 1).unwrap();
        let Evidence::Distinguishing { path, .. } = v.evidence else { panic!() };
        assert!(path.is_empty());
    }

    #[test]
    fn depth_zero_compares_only_the_root() {
        let x = game(vec![node(1, 1), constant_leaf(1)]);
        let y = game(vec![node(1, 1), constant_leaf(2)]);
        assert!(bisimilar_bounded(&x, &y, 0).unwrap().is_holds());
        assert!(!bisimilar_bounded(&x, &y, 1).unwrap().is_holds());
    }

    #[test]
    fn erased_profiles_share_the_game() {
        let game = families::dollar_auction_game();
        for p in [Profile::Agu, Profile::Ngu] {
            let erased = families::dollar_auction_strategy(p).strategy_to_game().unwrap();
            for d in [0, 1, 5, 20] {
                assert!(bisimilar_bounded(&erased, &game, d).unwrap().is_holds());
            }
        }
    }
}
