use std::path::Path;

use cogame::dsl;
use cogame::families::{
    centipede_game, centipede_strategy, dollar_auction_game, dollar_auction_strategy, paper_game, paper_s0, Profile,
};
use cogame::CoSystem;

fn shipped() -> Vec<(&'static str, CoSystem)> {
    vec![
        ("dollar_auction.cog", dollar_auction_game()),
        ("dollar_auction_agu.cog", dollar_auction_strategy(Profile::Agu)),
        ("dollar_auction_ngu.cog", dollar_auction_strategy(Profile::Ngu)),
        ("centipede.cog", centipede_game()),
        ("centipede_agu.cog", centipede_strategy(Profile::Agu)),
        ("centipede_ngu.cog", centipede_strategy(Profile::Ngu)),
        ("paper_game.cog", paper_game()),
        ("paper_s0.cog", paper_s0()),
    ]
}

#[test]
fn shipped_examples_match_the_constructors() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
    for (file, sys) in shipped() {
        let text = std::fs::read_to_string(dir.join(file)).unwrap();
        assert_eq!(dsl::parse(&text).unwrap(), sys, "{file}");
        assert_eq!(dsl::print(&sys), text, "{file}");
    }
}
