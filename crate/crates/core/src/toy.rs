//! A small air travel query grammar used by the examples and tests.

use crate::grammar::Grammar;

/// Source text of the air travel grammar.
pub const AIR_TRAVEL: &str = include_str!("../grammars/air_travel.grammar");

/// The air travel grammar, parsed.
pub fn air_travel() -> Grammar {
    Grammar::parse(AIR_TRAVEL).expect("bundled grammar parses")
}
