use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::category::{is_symbol, CategoryTag};
use crate::chart::{ChartEdge, EdgeKind};

/// What identifies an edge besides its tag: the word class of a lexical
/// edge, or the topmost rule of a built edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Anchor {
    WordClass(Arc<str>),
    Rule(Arc<str>),
}

impl Anchor {
    pub fn of(edge: &ChartEdge) -> Anchor {
        match (edge.kind, edge.derivation.as_ref()) {
            (EdgeKind::Lexical, crate::derivation::Derivation::Leaf { word_class, .. }) => {
                Anchor::WordClass(word_class.clone())
            }
            (_, d) => Anchor::Rule(Arc::from(d.rule_id().unwrap_or("?"))),
        }
    }
}

/// The tag of a neighbouring edge, or the chart boundary.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Neighbour {
    Boundary,
    Tag(CategoryTag),
}

const BOUNDARY: &str = "<boundary>";

/// Key of a left- or right-bigram criterion entry.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BigramKey {
    pub tag: CategoryTag,
    pub anchor: Anchor,
    pub neighbour: Neighbour,
}

/// An edge property that a criterion estimates correctness from.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeProperty {
    LeftBigram(BigramKey),
    RightBigram(BigramKey),
    /// Rule tree with word classes at the leaves.
    Unigram(String),
}

impl fmt::Display for Anchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Anchor::WordClass(c) => write!(f, "w:{c}"),
            Anchor::Rule(r) => write!(f, "r:{r}"),
        }
    }
}

impl fmt::Display for Neighbour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Neighbour::Boundary => f.write_str(BOUNDARY),
            Neighbour::Tag(t) => write!(f, "{t}"),
        }
    }
}

impl fmt::Display for BigramKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.tag, self.anchor, self.neighbour)
    }
}

impl fmt::Display for EdgeProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeProperty::LeftBigram(k) => write!(f, "LEFT {k}"),
            EdgeProperty::RightBigram(k) => write!(f, "RIGHT {k}"),
            EdgeProperty::Unigram(k) => write!(f, "UNIGRAM {k}"),
        }
    }
}

impl FromStr for BigramKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        let [tag, anchor, neighbour] = parts.as_slice() else {
            return Err(format!("bigram key needs three fields: `{s}`"));
        };
        let tag: CategoryTag = tag.parse()?;
        let anchor = match anchor.split_once(':') {
            Some(("w", c)) if is_symbol(c) => Anchor::WordClass(Arc::from(c)),
            Some(("r", r)) if is_symbol(r) => Anchor::Rule(Arc::from(r)),
            _ => return Err(format!("invalid anchor `{anchor}`")),
        };
        let neighbour = if *neighbour == BOUNDARY {
            Neighbour::Boundary
        } else {
            Neighbour::Tag(neighbour.parse()?)
        };
        Ok(BigramKey {
            tag,
            anchor,
            neighbour,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bigram_key_text_round_trip() {
        let k = BigramKey {
            tag: CategoryTag::refined("NUM", "digit"),
            anchor: Anchor::WordClass(Arc::from("digit")),
            neighbour: Neighbour::Boundary,
        };
        assert_eq!(k.to_string(), "NUM/digit w:digit <boundary>");
        assert_eq!(k.to_string().parse::<BigramKey>().unwrap(), k);
        let k2: BigramKey = "NP r:np_det NUM/card".parse().unwrap();
        assert_eq!(
            k2.neighbour,
            Neighbour::Tag(CategoryTag::refined("NUM", "card"))
        );
        assert!("NP x:y Z".parse::<BigramKey>().is_err());
        assert!("NP r:a".parse::<BigramKey>().is_err());
    }
}
