//! Convertibility of two strategies by changes of one agent's choices.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;

use crate::coterm::{Agent, Choice, CoSystem, Kind, NodeClass};
use crate::error::{Error, Result};

/// A pair of classes observed together, with `delta` the index on the right
/// minus the index on the left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ProductState {
    pub left: usize,
    pub right: usize,
    pub delta: i128,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvValue {
    NotConvertible,
    InductiveConv,
    CoinductiveOnlyConv,
}

impl fmt::Display for ConvValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConvValue::NotConvertible => "NotConvertible",
            ConvValue::InductiveConv => "InductiveConv",
            ConvValue::CoinductiveOnlyConv => "CoinductiveOnlyConv",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvWitness {
    /// Number of product states where the agent's choices differ, all of
    /// which are visited at most once along any path.
    Finite { differences: usize },
    Mismatch {
        path: Vec<Choice>,
        state: ProductState,
        reason: String,
    },
    /// `cycle` is a closed walk of product states; `difference` is reachable
    /// from it and carries a choice difference at one of the agent's nodes.
    Recurring {
        cycle: Vec<ProductState>,
        difference: ProductState,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConvClass {
    pub value: ConvValue,
    pub witness: ConvWitness,
}

fn offsets(sys: &CoSystem) -> u64 {
    sys.classes
        .iter()
        .flat_map(|c| c.children())
        .map(|r| r.offset)
        .chain([sys.root.offset])
        .max()
        .unwrap_or(0)
}

/// Classes from which some leaf with a non-constant payoff is reachable.
fn slope_relevant(sys: &CoSystem) -> Vec<bool> {
    let n = sys.classes.len();
    let mut preds = vec![Vec::new(); n];
    let mut rel = vec![false; n];
    let mut stack = Vec::new();
    for (id, class) in sys.classes.iter().enumerate() {
        for r in class.children() {
            preds[r.class].push(id);
        }
        if let NodeClass::Leaf(p) = class {
            if p.has_slope() {
                rel[id] = true;
                stack.push(id);
            }
        }
    }
    while let Some(c) = stack.pop() {
        for &p in &preds[c] {
            if !rel[p] {
                rel[p] = true;
                stack.push(p);
            }
        }
    }
    rel
}

fn mismatch(a: &CoSystem, b: &CoSystem, agent: &Agent, st: ProductState) -> Option<String> {
    match (&a.classes[st.left], &b.classes[st.right]) {
        (NodeClass::Leaf(p), NodeClass::Leaf(q)) => {
            for (who, u) in p.iter() {
                let v = q.get(who).expect("rosters agree");
                let aligned = i128::from(v.intercept) + i128::from(v.slope) * st.delta;
                if u.slope != v.slope || i128::from(u.intercept) != aligned {
                    return Some(format!("payoffs of {who} differ: {u} vs {v}"));
                }
            }
            None
        }
        (
            NodeClass::Node {
                owner: o1,
                choice: c1,
                ..
            },
            NodeClass::Node {
                owner: o2,
                choice: c2,
                ..
            },
        ) => {
            if o1 != o2 {
                Some(format!("owners differ: {o1} vs {o2}"))
            } else if c1 != c2 && o1 != agent {
                Some(format!("choices of {o1} differ"))
            } else {
                None
            }
        }
        _ => Some("a leaf faces a node".to_owned()),
    }
}

/// Classifies whether `t` arises from `s` by changing only `agent`'s
/// choices, at finitely many nodes of the unfolded tree or at infinitely
/// many.
pub fn convertible(s: &CoSystem, t: &CoSystem, agent: &Agent) -> Result<ConvClass> {
    s.validate()?;
    t.validate()?;
    s.expect_kind(Kind::Strategy)?;
    t.expect_kind(Kind::Strategy)?;
    if s.roster != t.roster {
        return Err(Error::RosterMismatch);
    }
    if !s.roster.contains(agent) {
        return Err(Error::UnknownAgent(agent.name().to_owned()));
    }

    let (rel_s, rel_t) = (slope_relevant(s), slope_relevant(t));
    let normalize = |st: ProductState| {
        if rel_s[st.left] || rel_t[st.right] {
            st
        } else {
            ProductState { delta: 0, ..st }
        }
    };
    let start = normalize(ProductState {
        left: s.root.class,
        right: t.root.class,
        delta: i128::from(t.root.offset) - i128::from(s.root.offset),
    });
    // beyond this drift no alignment of sloped leaves can be restored
    let cap = start.delta.abs()
        + (s.classes.len() as i128) * (t.classes.len() as i128) * i128::from(offsets(s).max(offsets(t)));

    let mut index: HashMap<ProductState, usize> = HashMap::from([(start, 0)]);
    let mut states = vec![start];
    let mut parent: Vec<Option<(usize, Choice)>> = vec![None];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    let path_of = |parent: &[Option<(usize, Choice)>], mut i: usize| {
        let mut path = Vec::new();
        while let Some((p, c)) = parent[i] {
            path.push(c);
            i = p;
        }
        path.reverse();
        path
    };

    while let Some(i) = queue.pop_front() {
        let st = states[i];
        if st.delta.abs() > cap {
            return Ok(ConvClass {
                value: ConvValue::NotConvertible,
                witness: ConvWitness::Mismatch {
                    path: path_of(&parent, i),
                    state: st,
                    reason: format!("index difference {} exceeds {cap}", st.delta),
                },
            });
        }
        if let Some(reason) = mismatch(s, t, agent, st) {
            return Ok(ConvClass {
                value: ConvValue::NotConvertible,
                witness: ConvWitness::Mismatch {
                    path: path_of(&parent, i),
                    state: st,
                    reason,
                },
            });
        }
        for c in Choice::BOTH {
            let (Some(x), Some(y)) = (s.classes[st.left].child(c), t.classes[st.right].child(c)) else {
                continue;
            };
            let next = normalize(ProductState {
                left: x.class,
                right: y.class,
                delta: st.delta + i128::from(y.offset) - i128::from(x.offset),
            });
            let j = *index.entry(next).or_insert_with(|| {
                states.push(next);
                parent.push(Some((i, c)));
                queue.push_back(states.len() - 1);
                states.len() - 1
            });
            edges.push((i, j));
        }
    }

    let differs = |st: &ProductState| s.classes[st.left].chosen().map(|c| c.0) != t.classes[st.right].chosen().map(|c| c.0);

    let mut g = DiGraph::<(), ()>::new();
    let nodes: Vec<NodeIndex> = states.iter().map(|_| g.add_node(())).collect();
    for &(i, j) in &edges {
        g.add_edge(nodes[i], nodes[j], ());
    }
    let mut comp = vec![0; states.len()];
    let mut comp_size = Vec::new();
    for (k, scc) in tarjan_scc(&g).into_iter().enumerate() {
        comp_size.push(scc.len());
        for n in scc {
            comp[n.index()] = k;
        }
    }
    let cyclic = |i: usize| comp_size[comp[i]] > 1 || edges.contains(&(i, i));

    // states reachable from some cyclic state, remembering which one
    let mut origin: Vec<Option<usize>> = vec![None; states.len()];
    let mut stack = Vec::new();
    for i in 0..states.len() {
        if cyclic(i) {
            origin[i] = Some(i);
            stack.push(i);
        }
    }
    let succ = |i: usize| edges.iter().filter(move |e| e.0 == i).map(|e| e.1);
    while let Some(i) = stack.pop() {
        for j in succ(i) {
            if origin[j].is_none() {
                origin[j] = origin[i];
                stack.push(j);
            }
        }
    }

    let mut differences = 0;
    for (i, st) in states.iter().enumerate() {
        if !differs(st) {
            continue;
        }
        differences += 1;
        if let Some(o) = origin[i] {
            return Ok(ConvClass {
                value: ConvValue::CoinductiveOnlyConv,
                witness: ConvWitness::Recurring {
                    cycle: closed_walk(&edges, &comp, o).into_iter().map(|k| states[k]).collect(),
                    difference: *st,
                },
            });
        }
    }
    Ok(ConvClass {
        value: ConvValue::InductiveConv,
        witness: ConvWitness::Finite { differences },
    })
}

/// A closed walk through `start` inside its strongly connected component.
fn closed_walk(edges: &[(usize, usize)], comp: &[usize], start: usize) -> Vec<usize> {
    let mut parent: HashMap<usize, usize> = HashMap::new();
    let mut queue = VecDeque::from([start]);
    while let Some(i) = queue.pop_front() {
        for &(_, j) in edges.iter().filter(|e| e.0 == i) {
            if j == start {
                let mut walk = vec![i];
                let mut k = i;
                while k != start {
                    k = parent[&k];
                    walk.push(k);
                }
                walk.reverse();
                return walk;
            }
            if comp[j] == comp[start] && !parent.contains_key(&j) {
                parent.insert(j, i);
                queue.push_back(j);
            }
        }
    }
    unreachable!("start lies on a cycle")
}
