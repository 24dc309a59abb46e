use cogame::coterm::bisimilar_bounded;
use cogame::equilibria::{nash_eq, sgpe};
use cogame::families::{self, Profile};
use cogame::histories::strategy_history;
use cogame::semantics::{alw_leads_to_leaf, leads_to_leaf};
use cogame::{CoSystem, Outcome, Verdict};
use serde_json::json;

use crate::render;
use crate::report::Check;
use crate::{CliError, Family};

/// Depth used when comparing the erased profiles with the game.
const DEPTH: usize = 16;

fn verdict(name: &str, who: &str, sys: &CoSystem, v: &Verdict, expected: Outcome) -> Check {
    Check::from_verdict(name, who, v)
        .with_lines(render::evidence(sys, v))
        .expecting(expected)
}

/// Every predicate on both profiles of a family, each paired with the
/// outcome the family is known to have.
pub fn run(family: Family) -> Result<Vec<Check>, CliError> {
    let (game, agu, ngu) = match family {
        Family::Dollar => (
            families::dollar_auction_game(),
            families::dollar_auction_strategy(Profile::Agu),
            families::dollar_auction_strategy(Profile::Ngu),
        ),
        Family::Centipede => (
            families::centipede_game(),
            families::centipede_strategy(Profile::Agu),
            families::centipede_strategy(Profile::Ngu),
        ),
    };
    use Outcome::{Fails, Holds};
    let mut checks = Vec::new();
    for (who, s, stops) in [("agu", &agu, true), ("ngu", &ngu, false)] {
        let (on_path, everywhere) = if stops { (Holds, Holds) } else { (Fails, Fails) };
        checks.push(verdict("ltl", who, s, &leads_to_leaf(s, s.root)?, on_path));
        checks.push(verdict("altl", who, s, &alw_leads_to_leaf(s)?, everywhere));
        checks.push(verdict("sgpe", who, s, &sgpe(s)?, everywhere));
        checks.push(verdict("nash", who, s, &nash_eq(s)?, Holds));
        let erased = bisimilar_bounded(&s.strategy_to_game()?, &game, DEPTH)?;
        checks.push(verdict("same_game", who, s, &erased, Holds));
    }
    let h = strategy_history(&ngu)?;
    let text = h.to_string();
    let ok = text == "(l)^w";
    checks.push(
        Check::new(
            "history",
            "ngu",
            if ok { Holds } else { Fails },
            text.clone(),
            json!({ "history": text }),
        )
        .expecting(Holds),
    );
    Ok(checks)
}
