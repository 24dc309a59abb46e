//! Finite and eventually periodic histories.
//!
//! A [`LassoHistory`] `u(v)^w` is the finite word `u` when `v` is empty and
//! the ω-word `u v v v …` otherwise. Every history followed by a finitely
//! presented strategy has this shape.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::coterm::{Choice, CoSystem, Kind, NodeClass};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct LassoHistory {
    pub prefix: Vec<Choice>,
    pub cycle: Vec<Choice>,
}

impl LassoHistory {
    pub fn new(prefix: Vec<Choice>, cycle: Vec<Choice>) -> Self {
        LassoHistory { prefix, cycle }
    }

    pub fn finite(prefix: Vec<Choice>) -> Self {
        LassoHistory::new(prefix, Vec::new())
    }

    pub fn is_finite(&self) -> bool {
        self.cycle.is_empty()
    }

    /// The `i`-th symbol, or `None` past the end of a finite history.
    pub fn symbol(&self, i: usize) -> Option<Choice> {
        if i < self.prefix.len() {
            Some(self.prefix[i])
        } else if self.cycle.is_empty() {
            None
        } else {
            Some(self.cycle[(i - self.prefix.len()) % self.cycle.len()])
        }
    }

    /// The first `n` symbols (fewer if the history is shorter).
    pub fn expand(&self, n: usize) -> Vec<Choice> {
        (0..n).map_while(|i| self.symbol(i)).collect()
    }

    /// The unique normal form: the cycle is replaced by its primitive root,
    /// then rotated backwards while the prefix ends with the cycle's last
    /// symbol.
    pub fn canonicalize(&self) -> LassoHistory {
        if self.cycle.is_empty() {
            return self.clone();
        }
        let len = self.cycle.len();
        let period = (1..=len)
            .find(|&p| len % p == 0 && (p..len).all(|i| self.cycle[i] == self.cycle[i - p]))
            .unwrap_or(len);
        let mut prefix = self.prefix.clone();
        let mut cycle = self.cycle[..period].to_vec();
        while !prefix.is_empty() && prefix.last() == cycle.last() {
            prefix.pop();
            cycle.rotate_right(1);
        }
        LassoHistory { prefix, cycle }
    }
}

impl fmt::Display for LassoHistory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.prefix.is_empty() && self.cycle.is_empty() {
            return f.write_str("[]");
        }
        for c in &self.prefix {
            write!(f, "{c}")?;
        }
        if !self.cycle.is_empty() {
            f.write_str("(")?;
            for c in &self.cycle {
                write!(f, "{c}")?;
            }
            f.write_str(")^w")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("`{0}` is not a history; expected letters l/r with an optional `(cycle)^w` suffix")]
pub struct HistoryParseError(String);

impl FromStr for LassoHistory {
    type Err = HistoryParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || HistoryParseError(s.to_owned());
        let letters = |t: &str| -> Result<Vec<Choice>, HistoryParseError> {
            t.chars()
                .map(|c| match c {
                    'l' => Ok(Choice::L),
                    'r' => Ok(Choice::R),
                    _ => Err(err()),
                })
                .collect()
        };
        let s = s.trim();
        if s.is_empty() || s == "[]" {
            return Ok(LassoHistory::finite(Vec::new()));
        }
        match s.split_once('(') {
            None => Ok(LassoHistory::finite(letters(s)?)),
            Some((prefix, rest)) => {
                let cycle = rest.strip_suffix(")^w").ok_or_else(err)?;
                if cycle.is_empty() {
                    return Err(err());
                }
                Ok(LassoHistory::new(letters(prefix)?, letters(cycle)?))
            }
        }
    }
}

/// Symbol-wise equality of the denoted words.
pub fn h_bisimilar(a: &LassoHistory, b: &LassoHistory) -> bool {
    a.canonicalize() == b.canonicalize()
}

/// Finite, or ending with `l` forever.
pub fn in_h1(h: &LassoHistory) -> bool {
    let h = h.canonicalize();
    h.is_finite() || h.cycle == [Choice::L]
}

/// Finite, or containing infinitely many `l`.
pub fn in_h2(h: &LassoHistory) -> bool {
    let h = h.canonicalize();
    h.is_finite() || h.cycle.contains(&Choice::L)
}

/// Whether the walk that follows `h` through `g` is defined at every step.
///
/// A finite history may stop at an interior node. An infinite one is
/// accepted once a `(class, position in cycle)` state repeats, since the
/// walk is then periodic.
pub fn is_history_of(g: &CoSystem, h: &LassoHistory) -> Result<bool> {
    g.validate()?;
    let mut class = g.root.class;
    let step = |class: usize, c: Choice| g.classes[class].child(c).map(|r| r.class);
    for &c in &h.prefix {
        match step(class, c) {
            Some(next) => class = next,
            None => return Ok(false),
        }
    }
    if h.cycle.is_empty() {
        return Ok(true);
    }
    let mut seen = HashSet::new();
    let mut pos = 0;
    while seen.insert((class, pos)) {
        match step(class, h.cycle[pos]) {
            Some(next) => class = next,
            None => return Ok(false),
        }
        pos = (pos + 1) % h.cycle.len();
    }
    Ok(true)
}

/// The history obtained by following the strategy's choices from the root,
/// in canonical form.
pub fn strategy_history(s: &CoSystem) -> Result<LassoHistory> {
    s.validate()?;
    s.expect_kind(Kind::Strategy)?;
    let mut visited: Vec<usize> = Vec::new();
    let mut choices = Vec::new();
    let mut class = s.root.class;
    loop {
        if let Some(start) = visited.iter().position(|&c| c == class) {
            let cycle = choices.split_off(start);
            return Ok(LassoHistory::new(choices, cycle).canonicalize());
        }
        visited.push(class);
        match s.classes[class].chosen() {
            None => return Ok(LassoHistory::finite(choices)),
            Some((c, next)) => {
                choices.push(c);
                class = next.class;
            }
        }
    }
}

/// Whether the denoted tree is finite, i.e. the class graph reachable from
/// the root through both children has no cycle.
pub fn is_finite(sys: &CoSystem) -> Result<bool> {
    sys.validate()?;
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let mut mark = vec![Mark::New; sys.classes.len()];
    // iterative DFS; a child still `Open` closes a cycle
    let mut stack = vec![(sys.root.class, 0usize)];
    mark[sys.root.class] = Mark::Open;
    while let Some((class, next)) = stack.last_mut() {
        let children: Vec<usize> = match &sys.classes[*class] {
            NodeClass::Leaf(_) => Vec::new(),
            NodeClass::Node { left, right, .. } => vec![left.class, right.class],
        };
        if let Some(&child) = children.get(*next) {
            *next += 1;
            match mark[child] {
                Mark::Open => return Ok(false),
                Mark::New => {
                    mark[child] = Mark::Open;
                    stack.push((child, 0));
                }
                Mark::Done => {}
            }
        } else {
            mark[*class] = Mark::Done;
            stack.pop();
        }
    }
    Ok(true)
}
