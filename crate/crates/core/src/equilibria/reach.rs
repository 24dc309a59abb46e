//! Index reachability over class graphs whose edges add nonnegative offsets.
//!
//! The set of root-relative indices at which a class can be reached is the
//! set of path weights from the root to it. It is infinite exactly when some
//! path to the class passes through a cycle of positive total weight; in
//! every other case all cycles on the way weigh zero and the set is finite.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::coterm::{Choice, CoSystem, NodeClass, ParamRef};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Edge {
    pub target: usize,
    pub offset: u64,
    pub choice: Choice,
}

/// Outgoing edges per class.
#[derive(Debug, Clone)]
pub(crate) struct IndexGraph {
    pub edges: Vec<Vec<Edge>>,
}

impl IndexGraph {
    /// Every node contributes both children.
    pub fn full(sys: &CoSystem) -> Self {
        IndexGraph::filtered(sys, |_, _| true)
    }

    /// Keeps the children for which `keep(class, choice)` holds.
    pub fn filtered(sys: &CoSystem, keep: impl Fn(usize, Choice) -> bool) -> Self {
        let edges = sys
            .classes
            .iter()
            .enumerate()
            .map(|(id, class)| match class {
                NodeClass::Leaf(_) => Vec::new(),
                NodeClass::Node { .. } => Choice::BOTH
                    .into_iter()
                    .filter(|&c| keep(id, c))
                    .map(|c| {
                        let r = class.child(c).expect("node has children");
                        Edge {
                            target: r.class,
                            offset: r.offset,
                            choice: c,
                        }
                    })
                    .collect(),
            })
            .collect();
        IndexGraph { edges }
    }

    fn len(&self) -> usize {
        self.edges.len()
    }

    fn forward(&self, from: impl IntoIterator<Item = usize>) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack: Vec<usize> = from.into_iter().collect();
        for &s in &stack {
            seen[s] = true;
        }
        while let Some(c) = stack.pop() {
            for e in &self.edges[c] {
                if !seen[e.target] {
                    seen[e.target] = true;
                    stack.push(e.target);
                }
            }
        }
        seen
    }

    fn backward(&self, to: usize) -> Vec<bool> {
        let mut preds = vec![Vec::new(); self.len()];
        for (c, es) in self.edges.iter().enumerate() {
            for e in es {
                preds[e.target].push(c);
            }
        }
        let mut seen = vec![false; self.len()];
        seen[to] = true;
        let mut stack = vec![to];
        while let Some(c) = stack.pop() {
            for &p in &preds[c] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// Strongly connected component id of every class.
    fn components(&self) -> Vec<usize> {
        let mut g = DiGraph::<(), ()>::new();
        let nodes: Vec<_> = (0..self.len()).map(|_| g.add_node(())).collect();
        for (c, es) in self.edges.iter().enumerate() {
            for e in es {
                g.add_edge(nodes[c], nodes[e.target], ());
            }
        }
        let mut comp = vec![0; self.len()];
        for (i, scc) in tarjan_scc(&g).into_iter().enumerate() {
            for n in scc {
                comp[n.index()] = i;
            }
        }
        comp
    }
}

/// The indices at which a class is reachable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReachSet {
    pub min: u64,
    /// A positive-weight cycle lies on some path to the class.
    pub unbounded: bool,
    /// All reachable indices, present iff the set is finite.
    pub explicit: Option<BTreeSet<u64>>,
}

impl ReachSet {
    pub fn max(&self) -> Option<u64> {
        self.explicit.as_ref().and_then(|s| s.last().copied())
    }
}

/// A positive cycle reachable from the root, usable to pump indices.
#[derive(Debug, Clone)]
pub(crate) struct Pump {
    /// Class where the cycle starts and ends.
    pub anchor: usize,
    /// Moves of one turn around the cycle, by (class, choice).
    pub cycle: Vec<(usize, Choice)>,
    pub weight: u64,
}

pub(crate) struct Reachability {
    graph: IndexGraph,
    root: ParamRef,
    reachable: Vec<bool>,
    component: Vec<usize>,
    /// Component contains an internal edge of positive offset.
    positive: Vec<bool>,
    /// Reachable from a positive component.
    pumped: Vec<bool>,
    dist: Vec<Option<u64>>,
    parent: Vec<Option<(usize, Choice)>>,
}

impl Reachability {
    pub fn new(graph: IndexGraph, root: ParamRef) -> Result<Self> {
        let reachable = graph.forward([root.class]);
        let component = graph.components();
        let mut positive = vec![false; graph.len()];
        for (c, es) in graph.edges.iter().enumerate() {
            for e in es {
                if reachable[c] && e.offset > 0 && component[c] == component[e.target] {
                    positive[component[c]] = true;
                }
            }
        }
        let pumped = graph.forward((0..graph.len()).filter(|&c| reachable[c] && positive[component[c]]));
        let (dist, parent) = shortest(&graph, root)?;
        Ok(Reachability {
            graph,
            root,
            reachable,
            component,
            positive,
            pumped,
            dist,
            parent,
        })
    }

    pub fn set(&self, class: usize) -> Result<Option<ReachSet>> {
        if !self.reachable[class] {
            return Ok(None);
        }
        let min = self.dist[class].expect("reachable classes have a distance");
        let unbounded = self.pumped[class];
        let explicit = if unbounded {
            None
        } else {
            Some(self.enumerate(class, None)?.0)
        };
        Ok(Some(ReachSet {
            min,
            unbounded,
            explicit,
        }))
    }

    /// Breadth-first search over `(class, index)` restricted to classes that
    /// can reach `target`, optionally cutting off indices above `cap`.
    /// Returns the indices found at `target` and the parent links.
    #[allow(clippy::type_complexity)]
    fn enumerate(
        &self,
        target: usize,
        cap: Option<u64>,
    ) -> Result<(BTreeSet<u64>, HashMap<(usize, u64), ((usize, u64), Choice)>)> {
        let useful = self.graph.backward(target);
        let start = (self.root.class, self.root.offset);
        let mut found = BTreeSet::new();
        let mut parents = HashMap::new();
        let mut seen = std::collections::HashSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(state @ (c, n)) = queue.pop_front() {
            if c == target {
                found.insert(n);
            }
            for e in &self.graph.edges[c] {
                if !useful[e.target] {
                    continue;
                }
                let m = n.checked_add(e.offset).ok_or(Error::Overflow)?;
                if cap.is_some_and(|cap| m > cap) {
                    continue;
                }
                let next = (e.target, m);
                if seen.insert(next) {
                    parents.insert(next, (state, e.choice));
                    queue.push_back(next);
                }
            }
        }
        Ok((found, parents))
    }

    /// A path from the root reaching `target` exactly at `index`.
    pub fn path_at(&self, target: usize, index: u64) -> Result<Option<Vec<(usize, Choice)>>> {
        let (found, parents) = self.enumerate(target, Some(index))?;
        if !found.contains(&index) {
            return Ok(None);
        }
        let mut steps = Vec::new();
        let mut state = (target, index);
        while let Some(&(prev, c)) = parents.get(&state) {
            steps.push((prev.0, c));
            state = prev;
        }
        steps.reverse();
        Ok(Some(steps))
    }

    /// Shortest-weight path from the root to `target`.
    pub fn shortest_path(&self, target: usize) -> Vec<(usize, Choice)> {
        let mut steps = Vec::new();
        let mut c = target;
        while let Some((p, choice)) = self.parent[c] {
            steps.push((p, choice));
            c = p;
        }
        steps.reverse();
        steps
    }

    pub fn distance(&self, class: usize) -> Option<u64> {
        self.dist[class]
    }

    /// A positive cycle that is reachable from the root and from which
    /// `target` is reachable, if any.
    pub fn pump_towards(&self, target: usize) -> Option<Pump> {
        let useful = self.graph.backward(target);
        let (u, e) = self.graph.edges.iter().enumerate().find_map(|(u, es)| {
            es.iter()
                .find(|e| {
                    self.reachable[u]
                        && useful[u]
                        && e.offset > 0
                        && self.component[u] == self.component[e.target]
                        && self.positive[self.component[u]]
                })
                .map(|e| (u, *e))
        })?;
        // close the cycle from e.target back to u inside the component
        let back = self.path_within(e.target, u);
        let mut cycle = vec![(u, e.choice)];
        cycle.extend(back);
        let weight = cycle
            .iter()
            .map(|&(c, ch)| {
                self.graph.edges[c]
                    .iter()
                    .find(|x| x.choice == ch)
                    .expect("cycle follows edges")
                    .offset
            })
            .sum();
        Some(Pump {
            anchor: u,
            cycle,
            weight,
        })
    }

    /// Any path from `from` to `to` staying inside their shared component.
    fn path_within(&self, from: usize, to: usize) -> Vec<(usize, Choice)> {
        let comp = self.component[from];
        let mut parent: HashMap<usize, (usize, Choice)> = HashMap::new();
        let mut queue = VecDeque::from([from]);
        let mut seen = std::collections::HashSet::from([from]);
        while let Some(c) = queue.pop_front() {
            if c == to {
                break;
            }
            for e in &self.graph.edges[c] {
                if self.component[e.target] == comp && seen.insert(e.target) {
                    parent.insert(e.target, (c, e.choice));
                    queue.push_back(e.target);
                }
            }
        }
        let mut steps = Vec::new();
        let mut c = to;
        while c != from {
            let (p, ch) = parent[&c];
            steps.push((p, ch));
            c = p;
        }
        steps.reverse();
        steps
    }

    /// Path from `from` to `to` of minimal weight, with that weight.
    pub fn path_between(&self, from: usize, to: usize) -> Result<Option<(Vec<(usize, Choice)>, u64)>> {
        let (dist, parent) = shortest(&self.graph, ParamRef::at(from))?;
        let Some(w) = dist[to] else { return Ok(None) };
        let mut steps = Vec::new();
        let mut c = to;
        while c != from {
            let (p, ch) = parent[c].expect("reachable");
            steps.push((p, ch));
            c = p;
        }
        steps.reverse();
        Ok(Some((steps, w)))
    }
}

#[allow(clippy::type_complexity)]
fn shortest(graph: &IndexGraph, root: ParamRef) -> Result<(Vec<Option<u64>>, Vec<Option<(usize, Choice)>>)> {
    let mut dist = vec![None; graph.len()];
    let mut parent = vec![None; graph.len()];
    let mut heap = BinaryHeap::from([Reverse((root.offset, root.class))]);
    dist[root.class] = Some(root.offset);
    while let Some(Reverse((d, c))) = heap.pop() {
        if dist[c].is_some_and(|best| d > best) {
            continue;
        }
        for e in &graph.edges[c] {
            let nd = d.checked_add(e.offset).ok_or(Error::Overflow)?;
            if dist[e.target].is_none_or(|best| nd < best) {
                dist[e.target] = Some(nd);
                parent[e.target] = Some((c, e.choice));
                heap.push(Reverse((nd, e.target)));
            }
        }
    }
    Ok((dist, parent))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    /// Brute-force reachable indices up to `bound` by exhaustive path
    /// enumeration of length at most `len`.
    fn brute(sys: &CoSystem, class: usize, len: usize, bound: u64) -> BTreeSet<u64> {
        let mut out = BTreeSet::new();
        let mut frontier = vec![(sys.root.class, sys.root.offset)];
        for _ in 0..=len {
            let mut next = Vec::new();
            for (c, n) in frontier {
                if n > bound {
                    continue;
                }
                if c == class {
                    out.insert(n);
                }
                for r in sys.classes[c].children() {
                    next.push((r.class, n + r.offset));
                }
            }
            next.sort_unstable();
            next.dedup();
            frontier = next;
        }
        out
    }

    #[test]
    fn backbone_classes_are_reachable_at_every_index() {
        let g = families::dollar_auction_game();
        let r = Reachability::new(IndexGraph::full(&g), g.root).unwrap();
        for c in 0..4 {
            let s = r.set(c).unwrap().unwrap();
            assert_eq!(s.min, 0);
            assert!(s.unbounded);
        }
    }

    #[test]
    fn finite_sets_match_enumeration() {
        let cfg = crate::oracle::SystemConfig {
            parametric: true,
            acyclic: true,
            max_classes: 7,
            max_offset: 3,
            ..Default::default()
        };
        for seed in 0..200 {
            let sys = crate::oracle::random_system(seed, &cfg);
            let r = Reachability::new(IndexGraph::full(&sys), sys.root).unwrap();
            for c in 0..sys.classes.len() {
                let expected = brute(&sys, c, sys.classes.len(), u64::MAX / 2);
                match r.set(c).unwrap() {
                    None => assert!(expected.is_empty()),
                    Some(s) => {
                        assert!(!s.unbounded);
                        assert_eq!(s.explicit.unwrap(), expected);
                        assert_eq!(s.min, *expected.first().unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn unbounded_flag_matches_growth() {
        let cfg = crate::oracle::SystemConfig {
            parametric: true,
            max_classes: 5,
            ..Default::default()
        };
        for seed in 0..200 {
            let sys = crate::oracle::random_system(seed, &cfg);
            let r = Reachability::new(IndexGraph::full(&sys), sys.root).unwrap();
            for c in 0..sys.classes.len() {
                let Some(s) = r.set(c).unwrap() else { continue };
                let found = brute(&sys, c, 40, 1000);
                assert_eq!(s.min, *found.first().unwrap());
                if s.unbounded {
                    assert!(*found.last().unwrap() > 10, "seed {seed} class {c}");
                } else {
                    assert_eq!(s.explicit.unwrap(), found);
                }
            }
        }
    }

    #[test]
    fn paths_hit_the_requested_index() {
        let g = families::dollar_auction_game();
        let r = Reachability::new(IndexGraph::full(&g), g.root).unwrap();
        let path = r.path_at(2, 3).unwrap().unwrap();
        let weight: u64 = path
            .iter()
            .map(|&(c, ch)| g.classes[c].child(ch).unwrap().offset)
            .sum();
        assert_eq!(weight, 3);
        assert_eq!(path.last().unwrap().0, 1);
        let pump = r.pump_towards(2).unwrap();
        assert_eq!(pump.weight, 1);
    }
}
