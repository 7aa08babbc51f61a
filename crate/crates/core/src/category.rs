use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// A category tag: a major category symbol plus an optional refinement used
/// to split a few categories by feature value (e.g. `NUM/digit` vs `NUM/card`).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CategoryTag {
    major: Arc<str>,
    refinement: Option<Arc<str>>,
}

impl CategoryTag {
    pub fn new(major: &str) -> Self {
        debug_assert!(!major.is_empty());
        CategoryTag {
            major: Arc::from(major),
            refinement: None,
        }
    }

    pub fn refined(major: &str, refinement: &str) -> Self {
        CategoryTag {
            major: Arc::from(major),
            refinement: Some(Arc::from(refinement)),
        }
    }

    pub fn with_refinement(major: &str, refinement: Option<&str>) -> Self {
        match refinement {
            Some(r) => Self::refined(major, r),
            None => Self::new(major),
        }
    }

    pub fn major(&self) -> &str {
        &self.major
    }

    pub fn refinement(&self) -> Option<&str> {
        self.refinement.as_deref()
    }
}

impl fmt::Display for CategoryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.refinement {
            Some(r) => write!(f, "{}/{}", self.major, r),
            None => f.write_str(&self.major),
        }
    }
}

impl fmt::Debug for CategoryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Characters allowed in symbols (category majors, refinements, rule ids,
/// word classes). `@` only appears in names generated by specialization.
pub fn is_symbol_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '\'' | '@')
}

pub fn is_symbol(s: &str) -> bool {
    !s.is_empty() && s.chars().all(is_symbol_char)
}

impl FromStr for CategoryTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (major, refinement) = match s.split_once('/') {
            Some((m, r)) => (m, Some(r)),
            None => (s, None),
        };
        if !is_symbol(major) {
            return Err(format!("invalid category symbol `{s}`"));
        }
        if let Some(r) = refinement {
            if !is_symbol(r) {
                return Err(format!("invalid refinement in `{s}`"));
            }
        }
        Ok(CategoryTag::with_refinement(major, refinement))
    }
}
