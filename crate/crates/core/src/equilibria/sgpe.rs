use super::reach::{IndexGraph, Reachability};
use crate::coterm::{AffineUtility, Choice, CoSystem, NodeClass};
use crate::error::{Error, Result};
use crate::semantics::{alw_leads_to_leaf, s2u_at};
use crate::verdict::{Evidence, SgpeRow, Verdict};

fn difference(a: AffineUtility, b: AffineUtility) -> Result<AffineUtility> {
    Ok(AffineUtility::new(
        a.slope.checked_sub(b.slope).ok_or(Error::Overflow)?,
        a.intercept.checked_sub(b.intercept).ok_or(Error::Overflow)?,
    ))
}

/// The smallest reachable index at which `row.margin` is negative, if any.
fn violation(row: &SgpeRow) -> Option<u64> {
    let d = row.margin;
    if d.slope >= 0 {
        return (d.eval(row.n_min) < 0).then_some(row.n_min);
    }
    match row.n_max {
        Some(max) => (d.eval(max) < 0).then_some(max),
        None => {
            // first n with slope * n + intercept < 0
            let first = if d.intercept < 0 {
                0
            } else {
                (d.intercept / -d.slope) as u64 + 1
            };
            Some(first.max(row.n_min))
        }
    }
}

/// Subgame perfection: always leads to a leaf, and at every reachable node
/// the owner weakly prefers the chosen child at every index the node is
/// reached at.
pub fn sgpe(s: &CoSystem) -> Result<Verdict> {
    let altl = alw_leads_to_leaf(s)?;
    if !altl.is_holds() {
        return Ok(Verdict::fails(
            format!("does not always lead to a leaf ({})", altl.note),
            altl.evidence,
        ));
    }
    let reach = Reachability::new(IndexGraph::full(s), s.root)?;
    let mut rows = Vec::new();
    for class in s.reachable() {
        let NodeClass::Node {
            owner,
            choice: Some(choice),
            left,
            right,
        } = &s.classes[class]
        else {
            continue;
        };
        let utility = |r| s2u_at(s, r, owner).map(|u| u.expect("always leads to a leaf"));
        let (u, v) = (utility(*left)?, utility(*right)?);
        let (favored, other) = match choice {
            Choice::L => (u, v),
            Choice::R => (v, u),
        };
        let set = reach.set(class)?.expect("class is reachable");
        let row = SgpeRow {
            class,
            owner: owner.clone(),
            choice: *choice,
            favored,
            other,
            margin: difference(favored, other)?,
            n_min: set.min,
            n_max: set.max(),
        };
        if let Some(index) = violation(&row) {
            return Ok(Verdict::fails(
                format!("{owner} prefers the other child at `{}` for n = {index}", s.names[class]),
                Evidence::SgpeViolation {
                    favored: row.favored.eval(index),
                    other: row.other.eval(index),
                    row,
                    index,
                },
            ));
        }
        rows.push(row);
    }
    Ok(Verdict::holds(
        format!("every chosen child weakly dominates at {} node classes", rows.len()),
        Evidence::SgpeTable { rows },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{self, Profile};

    fn rows(v: Verdict) -> Vec<SgpeRow> {
        match v.evidence {
            Evidence::SgpeTable { rows } => rows,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dollar_auction_margins_are_zero() {
        let v = sgpe(&families::dollar_auction_strategy(Profile::Agu)).unwrap();
        assert!(v.is_holds());
        let rows = rows(v);
        assert_eq!(rows.len(), 2);
        for r in rows {
            assert_eq!(r.margin, AffineUtility::constant(0));
            assert_eq!(r.n_min, 0);
            assert_eq!(r.n_max, None);
        }
    }

    #[test]
    fn centipede_margins_are_one() {
        let rows = rows(sgpe(&families::centipede_strategy(Profile::Agu)).unwrap());
        assert_eq!(rows.len(), 2);
        for r in rows {
            assert_eq!(r.margin, AffineUtility::constant(1));
        }
    }

    #[test]
    fn never_stopping_is_not_subgame_perfect() {
        let v = sgpe(&families::dollar_auction_strategy(Profile::Ngu)).unwrap();
        assert!(!v.is_holds());
        assert!(matches!(v.evidence, Evidence::FailingClass { class: 0, .. }));
    }

    #[test]
    fn shrinking_margins_fail_at_the_first_negative_index() {
        // Alice's stop now pays 6 - 3n instead of -2n - 1
        let mut s = families::dollar_auction_strategy(Profile::Agu);
        s.classes[3] = NodeClass::Leaf(crate::coterm::UtilityFun::from_iter([
            ("Alice", AffineUtility::new(-3, 6)),
            ("Bob", AffineUtility::new(-2, 0)),
        ]));
        // continuing ends at Bob's stop, which pays Alice -2n - 1
        let v = sgpe(&s).unwrap();
        let Evidence::SgpeViolation { index, row, favored, other } = v.evidence else { panic!("{v}") };
        assert_eq!(row.class, 0);
        assert_eq!(row.margin, AffineUtility::new(-1, 7));
        assert_eq!((index, favored, other), (8, -18, -17));
    }
}
