//! Derivation trees: rule applications over lexical leaves.
//!
//! Trees are written as s-expressions of rule ids. Leaves carry the surface
//! word, its category, and its word class:
//!
//! ```text
//! (utt_s (s_imp (vp_v_np "show":V:show (np_det "the":DET:the (nbar_n "flight":N:flight)))))
//! ```

use std::fmt::{self, Write as _};
use std::sync::Arc;

use crate::category::CategoryTag;
use crate::error::{Error, Result};
use crate::grammar::{Grammar, LineCursor};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Derivation {
    Leaf {
        word: Arc<str>,
        category: CategoryTag,
        word_class: Arc<str>,
    },
    Node {
        rule: Arc<str>,
        category: CategoryTag,
        children: Vec<Arc<Derivation>>,
    },
}

impl Derivation {
    pub fn leaf(word: &str, category: CategoryTag, word_class: &str) -> Arc<Self> {
        Arc::new(Derivation::Leaf {
            word: Arc::from(word),
            category,
            word_class: Arc::from(word_class),
        })
    }

    pub fn node(rule: &str, category: CategoryTag, children: Vec<Arc<Derivation>>) -> Arc<Self> {
        Arc::new(Derivation::Node {
            rule: Arc::from(rule),
            category,
            children,
        })
    }

    pub fn category(&self) -> &CategoryTag {
        match self {
            Derivation::Leaf { category, .. } | Derivation::Node { category, .. } => category,
        }
    }

    pub fn rule_id(&self) -> Option<&str> {
        match self {
            Derivation::Node { rule, .. } => Some(rule),
            Derivation::Leaf { .. } => None,
        }
    }

    pub fn children(&self) -> &[Arc<Derivation>] {
        match self {
            Derivation::Node { children, .. } => children,
            Derivation::Leaf { .. } => &[],
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Derivation::Leaf { .. })
    }

    /// Leaf words, left to right. A multiword leaf contributes one item.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Derivation::Leaf { word, .. } => out.push(word),
            Derivation::Node { children, .. } => {
                for c in children {
                    c.collect_leaves(out);
                }
            }
        }
    }

    /// The yield as whitespace-separated tokens.
    pub fn tokens(&self) -> Vec<&str> {
        self.leaves()
            .into_iter()
            .flat_map(|w| w.split(' '))
            .collect()
    }

    pub fn sentence(&self) -> String {
        self.tokens().join(" ")
    }

    /// Number of lattice words a leaf covers.
    pub fn token_count(&self) -> usize {
        match self {
            Derivation::Leaf { word, .. } => word.split(' ').count(),
            Derivation::Node { children, .. } => children.iter().map(|c| c.token_count()).sum(),
        }
    }

    /// Height counted in rule applications; a leaf has depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Derivation::Leaf { .. } => 0,
            Derivation::Node { children, .. } => {
                1 + children.iter().map(|c| c.depth()).max().unwrap_or(0)
            }
        }
    }

    /// Calls `f` on every subtree in preorder.
    pub fn walk<'a>(self: &'a Arc<Self>, f: &mut impl FnMut(&'a Arc<Derivation>)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// Canonical s-expression of rule ids with full leaves.
    pub fn to_sexpr(&self) -> String {
        let mut out = String::new();
        self.write_sexpr(&mut out);
        out
    }

    fn write_sexpr(&self, out: &mut String) {
        match self {
            Derivation::Leaf {
                word,
                category,
                word_class,
            } => {
                let _ = write!(out, "\"{}\":{}:{}", escape(word), category, word_class);
            }
            Derivation::Node { rule, children, .. } => {
                out.push('(');
                out.push_str(rule);
                for c in children {
                    out.push(' ');
                    c.write_sexpr(out);
                }
                out.push(')');
            }
        }
    }

    /// Rule tree with word classes in place of words. Trees that differ only
    /// in words of the same class share a key.
    pub fn class_key(&self) -> String {
        let mut out = String::new();
        self.write_class_key(&mut out);
        out
    }

    fn write_class_key(&self, out: &mut String) {
        match self {
            Derivation::Leaf {
                category,
                word_class,
                ..
            } => {
                let _ = write!(out, "{category}:{word_class}");
            }
            Derivation::Node { rule, children, .. } => {
                out.push('(');
                out.push_str(rule);
                for c in children {
                    out.push(' ');
                    c.write_class_key(out);
                }
                out.push(')');
            }
        }
    }

    /// Bracketed form labelled by category, e.g. `[NP [DET the] [N flight]]`.
    pub fn bracketed(&self) -> String {
        let mut out = String::new();
        self.write_bracketed(&mut out);
        out
    }

    fn write_bracketed(&self, out: &mut String) {
        match self {
            Derivation::Leaf { word, category, .. } => {
                let _ = write!(out, "[{category} {word}]");
            }
            Derivation::Node {
                category, children, ..
            } => {
                let _ = write!(out, "[{category}");
                for c in children {
                    out.push(' ');
                    c.write_bracketed(out);
                }
                out.push(']');
            }
        }
    }

    /// Parses an s-expression; `lhs_of` resolves a rule id to its category.
    pub fn parse(text: &str, lhs_of: &dyn Fn(&str) -> Option<CategoryTag>) -> Result<Arc<Self>> {
        let mut cur = LineCursor::new(1, text);
        let tree = parse_node(&mut cur, lhs_of)?;
        if !cur.at_end() {
            return Err(cur.error("trailing text after derivation"));
        }
        Ok(tree)
    }

    /// Parses an s-expression whose rule ids belong to `grammar`.
    pub fn parse_with(text: &str, grammar: &Grammar) -> Result<Arc<Self>> {
        Self::parse(text, &|id| grammar.rule(id).map(|r| r.lhs.clone()))
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sexpr())
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn parse_node(
    cur: &mut LineCursor<'_>,
    lhs_of: &dyn Fn(&str) -> Option<CategoryTag>,
) -> Result<Arc<Derivation>> {
    match cur.peek() {
        Some('(') => {
            cur.expect("(")?;
            let rule = cur.word(false)?;
            let category =
                lhs_of(rule).ok_or_else(|| cur.error(format!("unknown rule `{rule}`")))?;
            let mut children = Vec::new();
            while !cur.eat(")") {
                if cur.at_end() {
                    return Err(cur.error("unbalanced parentheses"));
                }
                children.push(parse_node(cur, lhs_of)?);
            }
            if children.is_empty() {
                return Err(cur.error("rule application without children"));
            }
            Ok(Derivation::node(rule, category, children))
        }
        Some('"') => {
            let word = cur.quoted()?;
            cur.expect(":")?;
            let category = cur.category(false)?;
            cur.expect(":")?;
            let class = cur.word(false)?;
            Ok(Derivation::leaf(&word, category, class))
        }
        _ => Err(cur.error("expected `(` or a quoted word")),
    }
}

/// A single problem found by [`validate_derivation`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Child indexes from the root to the offending node.
    pub path: Vec<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path: Vec<String> = self.path.iter().map(|i| i.to_string()).collect();
        write!(f, "at /{}: {}", path.join("/"), self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
            Err(Error::InvalidGold(msgs.join("; ")))
        }
    }
}

/// Checks every rule application and leaf of `tree` against `grammar`.
pub fn validate_derivation(tree: &Derivation, grammar: &Grammar) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut path = Vec::new();
    validate_into(tree, grammar, &mut path, &mut report.violations);
    report
}

fn validate_into(
    tree: &Derivation,
    grammar: &Grammar,
    path: &mut Vec<usize>,
    out: &mut Vec<Violation>,
) {
    let mut push = |path: &Vec<usize>, message: String| {
        out.push(Violation {
            path: path.clone(),
            message,
        })
    };
    match tree {
        Derivation::Leaf {
            word,
            category,
            word_class,
        } => match grammar.lexicon().entry(word, category) {
            None => push(path, format!("`{word}` : {category} is not in the lexicon")),
            Some(e) if e.word_class != *word_class => push(
                path,
                format!(
                    "`{word}` : {category} has word class `{}`, not `{word_class}`",
                    e.word_class
                ),
            ),
            Some(_) => {}
        },
        Derivation::Node {
            rule,
            category,
            children,
        } => {
            let Some(r) = grammar.rule(rule) else {
                push(path, format!("unknown rule `{rule}`"));
                return;
            };
            if &r.lhs != category {
                push(
                    path,
                    format!(
                        "rule `{rule}` builds {}, node is labelled {category}",
                        r.lhs
                    ),
                );
            }
            if r.rhs.len() != children.len() {
                push(
                    path,
                    format!(
                        "rule `{rule}` expects {} children, found {}",
                        r.rhs.len(),
                        children.len()
                    ),
                );
            } else {
                for (i, (want, child)) in r.rhs.iter().zip(children).enumerate() {
                    if child.category() != want {
                        push(
                            path,
                            format!(
                                "child {i} of `{rule}`: expected {want}, found {}",
                                child.category()
                            ),
                        );
                    }
                }
            }
            for (i, child) in children.iter().enumerate() {
                path.push(i);
                validate_into(child, grammar, path, out);
                path.pop();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::parse_grammar_file;

    fn grammar() -> Grammar {
        parse_grammar_file(
            r#"
rule utt : UTT -> S {class: nonphrasal}
rule s_imp : S -> VP {class: nonphrasal, marker: s_to_vp}
rule vp : VP -> V NP {class: nonphrasal}
rule np : NP -> Det N {class: phrasal}
lex "show" : V class show
lex "the" : Det class the
lex "flight" : N class flight
lex "boston" : CITY class city
start UTT
"#,
        )
        .unwrap()
    }

    const SHOW: &str = r#"(utt (s_imp (vp "show":V:show (np "the":Det:the "flight":N:flight))))"#;

    #[test]
    fn leaf_only_tree_is_valid() {
        let g = grammar();
        let leaf = Derivation::leaf("boston", CategoryTag::new("CITY"), "city");
        assert!(validate_derivation(&leaf, &g).is_ok());
    }

    #[test]
    fn sexpr_round_trip_and_validity() {
        let g = grammar();
        let t = Derivation::parse_with(SHOW, &g).unwrap();
        assert_eq!(t.to_sexpr(), SHOW);
        assert!(validate_derivation(&t, &g).is_ok());
        assert_eq!(t.sentence(), "show the flight");
        assert_eq!(t.depth(), 4);
        assert_eq!(
            t.bracketed(),
            "[UTT [S [VP [V show] [NP [Det the] [N flight]]]]]"
        );
        assert_eq!(
            t.class_key(),
            "(utt (s_imp (vp V:show (np Det:the N:flight))))"
        );
    }

    #[test]
    fn child_mismatch_names_path() {
        let g = grammar();
        let bad = Derivation::node(
            "vp",
            CategoryTag::new("VP"),
            vec![
                Derivation::leaf("show", CategoryTag::new("V"), "show"),
                Derivation::leaf("flight", CategoryTag::new("N"), "flight"),
            ],
        );
        let report = validate_derivation(&bad, &g);
        assert_eq!(report.violations.len(), 1);
        let v = &report.violations[0];
        assert!(v.path.is_empty());
        assert!(v.message.contains("expected NP, found N"), "{}", v.message);
    }

    #[test]
    fn unknown_leaf_reported_with_path() {
        let g = grammar();
        let t = Derivation::parse_with(r#"(np "the":Det:the "plane":N:plane)"#, &g).unwrap();
        let report = validate_derivation(&t, &g);
        assert_eq!(report.violations[0].path, vec![1]);
    }

    #[test]
    fn parse_errors() {
        let g = grammar();
        assert!(Derivation::parse_with("(nope \"a\":N:a)", &g).is_err());
        assert!(Derivation::parse_with("(np \"the\":Det:the", &g).is_err());
        assert!(Derivation::parse_with("(np)", &g).is_err());
    }
}
