mod common;

use common::{enumerate_derivations, random_grammar_text};
use gspec::chart::{full_pass, lexical_pass, phrasal_pass, FullRules};
use gspec::{Grammar, Lattice};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn analyses(grammar: &Grammar, words: &[&str]) -> Vec<String> {
    let lattice = Lattice::from_text("t", &words.join(" ")).unwrap();
    let mut chart = lexical_pass(&lattice, grammar).unwrap();
    phrasal_pass(&mut chart, grammar);
    full_pass(&mut chart, FullRules::Original(grammar), None)
        .unwrap()
        .into_iter()
        .map(|a| a.derivation.to_sexpr())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn full_pass_finds_exactly_the_enumerated_derivations(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grammar = Grammar::parse(&random_grammar_text(&mut rng, 9)).unwrap();
        prop_assert!(grammar.rules().len() <= 10);
        let len = rng.gen_range(1..=5);
        let words: Vec<&str> = (0..len).map(|_| if rng.gen_bool(0.5) { "a" } else { "b" }).collect();
        let found = analyses(&grammar, &words);
        let expected = enumerate_derivations(&grammar, &words);
        prop_assert_eq!(found.len(), expected.len(), "duplicate analyses");
        let found: std::collections::BTreeSet<String> = found.into_iter().collect();
        prop_assert_eq!(found, expected);
    }
}

#[test]
fn ambiguous_grammar_has_catalan_many_analyses() {
    let g = Grammar::parse(
        "start S\nlex \"a\" : S class c\nrule join : S -> S S {class: nonphrasal}\n",
    )
    .unwrap();
    let counts: Vec<usize> = (1..=5).map(|n| analyses(&g, &vec!["a"; n]).len()).collect();
    assert_eq!(counts, vec![1, 1, 2, 5, 14]);
}
