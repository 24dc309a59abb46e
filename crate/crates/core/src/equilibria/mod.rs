//! Convertibility, Nash equilibrium and subgame perfection.

mod conv;
mod nash;
mod reach;
mod sgpe;

pub use conv::{convertible, ConvClass, ConvValue, ConvWitness, ProductState};
pub use nash::nash_eq;
pub use reach::ReachSet;
pub use sgpe::sgpe;

use crate::coterm::{Agent, CoSystem};
use crate::error::{Error, Result};
use crate::semantics::alw_leads_to_leaf;
use crate::verdict::{Evidence, Verdict};

/// If `s` always leads to a leaf and `t` differs from it in finitely many
/// of `agent`'s choices, `t` always leads to a leaf too. Checks one instance.
pub fn check_altl_preservation(s: &CoSystem, t: &CoSystem, agent: &Agent) -> Result<Verdict> {
    let conv = convertible(s, t, agent)?;
    if conv.value != ConvValue::InductiveConv {
        return Err(Error::NotApplicable(format!("strategies are {}", conv.value)));
    }
    let source = alw_leads_to_leaf(s)?;
    if !source.is_holds() {
        return Ok(Verdict::holds(
            "vacuous: source does not always lead to a leaf",
            Evidence::Vacuous,
        ));
    }
    let target = alw_leads_to_leaf(t)?;
    let outcome_holds = target.is_holds();
    let evidence = Evidence::Preservation {
        source: Box::new(source),
        target: Box::new(target),
    };
    Ok(if outcome_holds {
        Verdict::holds("always leads to a leaf on both sides", evidence)
    } else {
        Verdict::fails("target lost the property", evidence)
    })
}
