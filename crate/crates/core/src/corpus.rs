//! Treebank sampling and the JSONL corpus format.
//!
//! Sentences are drawn top down from the grammar: each category expands by
//! a rule chosen with probability proportional to its weight, among the
//! rules that can still bottom out within the remaining depth.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::category::CategoryTag;
use crate::derivation::{validate_derivation, Derivation};
use crate::error::{Error, Result};
use crate::grammar::{Grammar, Rule};

pub const DEFAULT_MAX_DEPTH: usize = 12;

/// One treebank entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub id: String,
    pub sentence: String,
    pub tree: Arc<Derivation>,
}

#[derive(Serialize, Deserialize)]
struct EntryLine {
    id: String,
    sentence: String,
    tree: String,
}

/// Smallest derivation depth of each category (lexical categories have
/// depth 0, a rule adds one).
fn min_depths(grammar: &Grammar) -> HashMap<CategoryTag, usize> {
    let mut depth: HashMap<CategoryTag, usize> = grammar
        .lexicon()
        .categories()
        .into_iter()
        .map(|c| (c, 0))
        .collect();
    loop {
        let mut changed = false;
        for r in grammar.rules() {
            let Some(d) = rule_depth(r, &depth) else {
                continue;
            };
            let slot = depth.entry(r.lhs.clone()).or_insert(usize::MAX);
            if d < *slot {
                *slot = d;
                changed = true;
            }
        }
        if !changed {
            return depth;
        }
    }
}

fn rule_depth(r: &Rule, depth: &HashMap<CategoryTag, usize>) -> Option<usize> {
    let mut d = 0;
    for c in &r.rhs {
        d = d.max(*depth.get(c)?);
    }
    Some(d + 1)
}

/// Samples derivations from a grammar.
pub struct Sampler<'g> {
    grammar: &'g Grammar,
    depth: HashMap<CategoryTag, usize>,
    rules_by_lhs: BTreeMap<CategoryTag, Vec<&'g Rule>>,
    words_by_category: BTreeMap<CategoryTag, Vec<(&'g str, &'g str)>>,
    max_depth: usize,
}

impl<'g> Sampler<'g> {
    pub fn new(grammar: &'g Grammar, max_depth: usize) -> Result<Self> {
        let depth = min_depths(grammar);
        let mut rules_by_lhs: BTreeMap<CategoryTag, Vec<&Rule>> = BTreeMap::new();
        for r in grammar.rules() {
            rules_by_lhs.entry(r.lhs.clone()).or_default().push(r);
        }
        let mut words_by_category: BTreeMap<CategoryTag, Vec<(&str, &str)>> = BTreeMap::new();
        for (word, e) in grammar.lexicon().iter() {
            words_by_category
                .entry(e.category.clone())
                .or_default()
                .push((word, &e.word_class));
        }
        let sampler = Sampler {
            grammar,
            depth,
            rules_by_lhs,
            words_by_category,
            max_depth,
        };
        if sampler.start_choices().is_empty() {
            let names: Vec<String> = grammar
                .start_categories()
                .iter()
                .map(|c| c.to_string())
                .collect();
            return Err(Error::Ungenerable(names.join(", ")));
        }
        Ok(sampler)
    }

    fn start_choices(&self) -> Vec<&CategoryTag> {
        self.grammar
            .start_categories()
            .iter()
            .filter(|c| self.depth.get(*c).is_some_and(|&d| d <= self.max_depth))
            .collect()
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Arc<Derivation> {
        let starts = self.start_choices();
        let start = starts[rng.gen_range(0..starts.len())];
        self.expand(start, self.max_depth, rng)
    }

    fn expand(&self, category: &CategoryTag, budget: usize, rng: &mut impl Rng) -> Arc<Derivation> {
        let rules: Vec<&Rule> = self
            .rules_by_lhs
            .get(category)
            .map(|rs| {
                rs.iter()
                    .copied()
                    .filter(|r| rule_depth(r, &self.depth).is_some_and(|d| d <= budget))
                    .collect()
            })
            .unwrap_or_default();
        let words = self
            .words_by_category
            .get(category)
            .map(Vec::as_slice)
            .unwrap_or(&[]);
        // lexical entries of a category count as one option of weight 1
        let lexical_weight = if words.is_empty() { 0.0 } else { 1.0 };
        let total: f64 = rules.iter().map(|r| r.weight).sum::<f64>() + lexical_weight;
        let mut x = rng.gen::<f64>() * total;
        for r in &rules {
            if x < r.weight {
                let children = r
                    .rhs
                    .iter()
                    .map(|c| self.expand(c, budget - 1, rng))
                    .collect();
                return Arc::new(Derivation::Node {
                    rule: r.id.clone(),
                    category: r.lhs.clone(),
                    children,
                });
            }
            x -= r.weight;
        }
        if words.is_empty() {
            // rounding left x just past the last rule
            let r = rules.last().expect("category is generable within budget");
            let children = r
                .rhs
                .iter()
                .map(|c| self.expand(c, budget - 1, rng))
                .collect();
            return Arc::new(Derivation::Node {
                rule: r.id.clone(),
                category: r.lhs.clone(),
                children,
            });
        }
        let (word, class) = words[rng.gen_range(0..words.len())];
        Derivation::leaf(word, category.clone(), class)
    }
}

/// Draws `n` derivations with a seeded generator. The same grammar, size,
/// seed and depth bound always give the same corpus.
pub fn gen_corpus(
    grammar: &Grammar,
    n: usize,
    seed: u64,
    max_depth: usize,
) -> Result<Vec<CorpusEntry>> {
    let sampler = Sampler::new(grammar, max_depth)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|i| {
            let tree = sampler.sample(&mut rng);
            CorpusEntry {
                id: format!("s{seed}-{:06}", i + 1),
                sentence: tree.sentence(),
                tree,
            }
        })
        .collect())
}

pub fn write_corpus(entries: &[CorpusEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        let line = EntryLine {
            id: e.id.clone(),
            sentence: e.sentence.clone(),
            tree: e.tree.to_sexpr(),
        };
        out.push_str(&serde_json::to_string(&line).expect("serializable"));
        out.push('\n');
    }
    out
}

/// Reads a JSONL corpus, validating each tree against `grammar`.
pub fn parse_corpus(text: &str, grammar: &Grammar) -> Result<Vec<CorpusEntry>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw: EntryLine = serde_json::from_str(line).map_err(|source| Error::Json {
            line: i + 1,
            source,
        })?;
        let tree = Derivation::parse_with(&raw.tree, grammar)?;
        validate_derivation(&tree, grammar).into_result()?;
        if tree.sentence()
            != raw
                .sentence
                .split_whitespace()
                .collect::<Vec<_>>()
                .join(" ")
        {
            return Err(Error::YieldMismatch(raw.sentence));
        }
        out.push(CorpusEntry {
            id: raw.id,
            sentence: raw.sentence,
            tree,
        });
    }
    Ok(out)
}

/// Number of sentences of each token length.
pub fn length_histogram(entries: &[CorpusEntry]) -> BTreeMap<usize, usize> {
    let mut out = BTreeMap::new();
    for e in entries {
        *out.entry(e.tree.token_count()).or_insert(0) += 1;
    }
    out
}
