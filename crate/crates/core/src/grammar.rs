//! Grammar, lexicon, and the line-oriented grammar file format.
//!
//! ```text
//! rule np_det : NP -> DET NBAR {class: phrasal}
//! rule s_imp  : S -> VP {class: nonphrasal, marker: s_to_vp}
//! lex "D L" : AIRLINE class airline
//! chunktype NP => np
//! start UTT
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::category::{is_symbol, is_symbol_char, CategoryTag};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleClass {
    Phrasal,
    Nonphrasal,
}

impl RuleClass {
    pub fn name(self) -> &'static str {
        match self {
            RuleClass::Phrasal => "phrasal",
            RuleClass::Nonphrasal => "nonphrasal",
        }
    }
}

/// Annotations naming the rules the chunking criteria refer to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Marker {
    /// The `S -> VP` rule heading imperatives.
    SToVp,
    AdverbialModification,
    /// The `NP -> NP VP` postmodification rule.
    NpNpVp,
}

impl Marker {
    pub fn name(self) -> &'static str {
        match self {
            Marker::SToVp => "s_to_vp",
            Marker::AdverbialModification => "adverbial_modification",
            Marker::NpNpVp => "np_np_vp",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "s_to_vp" => Some(Marker::SToVp),
            "adverbial_modification" => Some(Marker::AdverbialModification),
            "np_np_vp" => Some(Marker::NpNpVp),
            _ => None,
        }
    }
}

/// What kind of constituent a category major symbol denotes, for chunking.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChunkKind {
    Utterance,
    UtteranceUnit,
    Vp,
    Np,
    Rel,
    Pp,
    Other,
}

impl ChunkKind {
    pub fn name(self) -> &'static str {
        match self {
            ChunkKind::Utterance => "utterance",
            ChunkKind::UtteranceUnit => "utterance_unit",
            ChunkKind::Vp => "vp",
            ChunkKind::Np => "np",
            ChunkKind::Rel => "rel",
            ChunkKind::Pp => "pp",
            ChunkKind::Other => "other",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "utterance" => ChunkKind::Utterance,
            "utterance_unit" => ChunkKind::UtteranceUnit,
            "vp" => ChunkKind::Vp,
            "np" => ChunkKind::Np,
            "rel" => ChunkKind::Rel,
            "pp" => ChunkKind::Pp,
            "other" => ChunkKind::Other,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub id: Arc<str>,
    pub lhs: CategoryTag,
    pub rhs: Vec<CategoryTag>,
    pub class: RuleClass,
    pub markers: BTreeSet<Marker>,
    /// Relative weight used by the corpus sampler; ignored by parsing.
    pub weight: f64,
}

impl Rule {
    pub fn new(id: &str, lhs: CategoryTag, rhs: Vec<CategoryTag>, class: RuleClass) -> Self {
        Rule {
            id: Arc::from(id),
            lhs,
            rhs,
            class,
            markers: BTreeSet::new(),
            weight: 1.0,
        }
    }

    pub fn with_marker(mut self, marker: Marker) -> Self {
        self.markers.insert(marker);
        self
    }

    pub fn has_marker(&self, marker: Marker) -> bool {
        self.markers.contains(&marker)
    }

    pub fn is_phrasal(&self) -> bool {
        self.class == RuleClass::Phrasal
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LexEntry {
    pub category: CategoryTag,
    pub word_class: Arc<str>,
}

/// Full-form lexicon. Keys are surface strings; multiword keys are
/// space-separated and match consecutive lattice words.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Lexicon {
    entries: BTreeMap<String, Vec<LexEntry>>,
    max_tokens: usize,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: &str, category: CategoryTag, word_class: &str) -> Result<()> {
        let key = normalize_surface(word);
        let list = self.entries.entry(key.clone()).or_default();
        if list.iter().any(|e| e.category == category) {
            return Err(Error::DuplicateLexEntry {
                word: key,
                category: category.to_string(),
            });
        }
        list.push(LexEntry {
            category,
            word_class: Arc::from(word_class),
        });
        self.max_tokens = self.max_tokens.max(key.split(' ').count());
        Ok(())
    }

    pub fn lookup(&self, surface: &str) -> &[LexEntry] {
        self.entries.get(surface).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn contains(&self, word: &str, category: &CategoryTag) -> bool {
        self.lookup(word).iter().any(|e| &e.category == category)
    }

    pub fn entry(&self, word: &str, category: &CategoryTag) -> Option<&LexEntry> {
        self.lookup(word).iter().find(|e| &e.category == category)
    }

    /// Longest key in tokens.
    pub fn max_tokens(&self) -> usize {
        self.max_tokens
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &LexEntry)> {
        self.entries
            .iter()
            .flat_map(|(w, es)| es.iter().map(move |e| (w.as_str(), e)))
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn categories(&self) -> BTreeSet<CategoryTag> {
        self.iter().map(|(_, e)| e.category.clone()).collect()
    }
}

fn normalize_surface(word: &str) -> String {
    word.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// A validated context-free grammar. Immutable after construction.
#[derive(Clone, Debug)]
pub struct Grammar {
    rules: Vec<Rule>,
    by_id: HashMap<Arc<str>, usize>,
    lexicon: Lexicon,
    chunk_types: BTreeMap<String, ChunkKind>,
    start: BTreeSet<CategoryTag>,
    warnings: Vec<String>,
}

impl PartialEq for Grammar {
    fn eq(&self, other: &Self) -> bool {
        self.rules == other.rules
            && self.lexicon == other.lexicon
            && self.chunk_types == other.chunk_types
            && self.start == other.start
    }
}

impl Grammar {
    pub fn new(
        rules: Vec<Rule>,
        lexicon: Lexicon,
        chunk_types: BTreeMap<String, ChunkKind>,
        start: BTreeSet<CategoryTag>,
    ) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(rules.len());
        for (i, r) in rules.iter().enumerate() {
            if by_id.insert(r.id.clone(), i).is_some() {
                return Err(Error::DuplicateRule(r.id.to_string()));
            }
            if r.is_phrasal() && !r.markers.is_empty() {
                return Err(Error::MarkerOnPhrasal(r.id.to_string()));
            }
        }
        if start.is_empty() {
            return Err(Error::NoStartCategory);
        }

        let mut known: HashSet<&CategoryTag> = rules.iter().map(|r| &r.lhs).collect();
        let lexical = lexicon.categories();
        known.extend(lexical.iter());
        for r in &rules {
            if let Some(c) = r.rhs.iter().find(|c| !known.contains(c)) {
                return Err(Error::UnknownCategory {
                    rule: r.id.to_string(),
                    category: c.to_string(),
                });
            }
        }
        if let Some(c) = start.iter().find(|c| !known.contains(c)) {
            return Err(Error::UnknownCategory {
                rule: "start".into(),
                category: c.to_string(),
            });
        }

        let mut g = Grammar {
            rules,
            by_id,
            lexicon,
            chunk_types,
            start,
            warnings: Vec::new(),
        };
        g.warnings = g.structural_warnings();
        Ok(g)
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: &str) -> Option<&Rule> {
        self.by_id.get(id).map(|&i| &self.rules[i])
    }

    pub fn phrasal_rules(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(|r| r.is_phrasal())
    }

    pub fn nonphrasal_rules(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(|r| !r.is_phrasal())
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn start_categories(&self) -> &BTreeSet<CategoryTag> {
        &self.start
    }

    pub fn chunk_types(&self) -> &BTreeMap<String, ChunkKind> {
        &self.chunk_types
    }

    /// Chunk kind of a category; unmapped majors are `Other`.
    pub fn chunk_kind(&self, category: &CategoryTag) -> ChunkKind {
        self.chunk_types
            .get(category.major())
            .copied()
            .unwrap_or(ChunkKind::Other)
    }

    /// Non-fatal structural problems found at load time.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Every category mentioned by rules, lexicon, or start declarations.
    pub fn categories(&self) -> BTreeSet<CategoryTag> {
        let mut set = self.lexicon.categories();
        for r in &self.rules {
            set.insert(r.lhs.clone());
            set.extend(r.rhs.iter().cloned());
        }
        set.extend(self.start.iter().cloned());
        set
    }

    /// True when the phrasal rules contain a category cycle.
    pub fn phrasal_rules_recursive(&self) -> bool {
        has_cycle(self.phrasal_rules())
    }

    fn structural_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.phrasal_rules_recursive() {
            out.push(
                "phrasal rules contain a category cycle; the phrasal pass is depth-capped".into(),
            );
        }
        let nonphrasal_lhs: HashSet<&CategoryTag> =
            self.nonphrasal_rules().map(|r| &r.lhs).collect();
        for r in self.phrasal_rules() {
            if let Some(c) = r.rhs.iter().find(|c| nonphrasal_lhs.contains(c)) {
                out.push(format!(
                    "phrasal rule `{}` consumes `{}`, which nonphrasal rules build; the phrasal pass cannot see those edges",
                    r.id, c
                ));
            }
        }
        out
    }

    /// Digest of the canonical serialization.
    pub fn checksum(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Canonical serialization in the grammar file format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let phrasal = self.phrasal_rules().count();
        let _ = writeln!(
            out,
            "# rules: {} phrasal, {} nonphrasal",
            phrasal,
            self.rules.len() - phrasal
        );
        for c in &self.start {
            let _ = writeln!(out, "start {c}");
        }
        for (major, kind) in &self.chunk_types {
            let _ = writeln!(out, "chunktype {major} => {}", kind.name());
        }
        for r in &self.rules {
            let _ = writeln!(out, "{}", RuleLine(r, r.class.name(), None));
        }
        for (word, e) in self.lexicon.iter() {
            let _ = writeln!(
                out,
                "lex \"{}\" : {} class {}",
                escape(word),
                e.category,
                e.word_class
            );
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_grammar_file(text)
    }
}

/// Formats a rule line; `extra` appends attributes such as a chunk type.
pub(crate) struct RuleLine<'a>(pub &'a Rule, pub &'a str, pub Option<(&'a str, &'a str)>);

impl fmt::Display for RuleLine<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let RuleLine(r, class, extra) = self;
        write!(f, "rule {} : {} ->", r.id, CategoryTag::new(r.lhs.major()))?;
        for c in &r.rhs {
            write!(f, " {c}")?;
        }
        write!(f, " {{class: {class}")?;
        for m in &r.markers {
            write!(f, ", marker: {}", m.name())?;
        }
        if let Some(refine) = r.lhs.refinement() {
            write!(f, ", refine: {refine}")?;
        }
        if r.weight != 1.0 {
            write!(f, ", weight: {}", r.weight)?;
        }
        if let Some((k, v)) = extra {
            write!(f, ", {k}: {v}")?;
        }
        f.write_str("}")
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn has_cycle<'a>(rules: impl Iterator<Item = &'a Rule>) -> bool {
    let mut edges: BTreeMap<&CategoryTag, BTreeSet<&CategoryTag>> = BTreeMap::new();
    for r in rules {
        edges.entry(&r.lhs).or_default().extend(r.rhs.iter());
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state: HashMap<&CategoryTag, u8> = HashMap::new();
    fn visit<'a>(
        n: &'a CategoryTag,
        edges: &BTreeMap<&'a CategoryTag, BTreeSet<&'a CategoryTag>>,
        state: &mut HashMap<&'a CategoryTag, u8>,
    ) -> bool {
        match state.get(n) {
            Some(1) => return true,
            Some(2) => return false,
            _ => {}
        }
        state.insert(n, 1);
        if let Some(next) = edges.get(n) {
            for &m in next {
                if visit(m, edges, state) {
                    return true;
                }
            }
        }
        state.insert(n, 2);
        false
    }
    let roots: Vec<&CategoryTag> = edges.keys().copied().collect();
    roots.into_iter().any(|n| visit(n, &edges, &mut state))
}

// ---------------------------------------------------------------------------
// File format

/// A cursor over one line that tracks 1-based columns for error messages.
pub(crate) struct LineCursor<'a> {
    line_no: usize,
    text: &'a str,
    pos: usize,
}

impl<'a> LineCursor<'a> {
    pub(crate) fn new(line_no: usize, text: &'a str) -> Self {
        LineCursor {
            line_no,
            text,
            pos: 0,
        }
    }

    pub(crate) fn column(&self) -> usize {
        self.text[..self.pos].chars().count() + 1
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> Error {
        Error::syntax(self.line_no, self.column(), message)
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    pub(crate) fn skip_ws(&mut self) {
        let rest = self.rest();
        self.pos += rest.len() - rest.trim_start().len();
    }

    pub(crate) fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.text.len()
    }

    pub(crate) fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    pub(crate) fn expect(&mut self, token: &str) -> Result<()> {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            Ok(())
        } else {
            Err(self.error(format!("expected `{token}`")))
        }
    }

    pub(crate) fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    /// A run of symbol characters, optionally including `/` for refinements.
    pub(crate) fn word(&mut self, allow_slash: bool) -> Result<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let len = rest
            .char_indices()
            .find(|&(_, c)| !(is_symbol_char(c) || (allow_slash && c == '/')))
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        if len == 0 {
            return Err(self.error("expected a symbol"));
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    pub(crate) fn category(&mut self, user: bool) -> Result<CategoryTag> {
        self.skip_ws();
        let col_pos = self.pos;
        let w = self.word(true)?;
        let tag: CategoryTag = w.parse().map_err(|e: String| {
            self.pos = col_pos;
            self.error(e)
        })?;
        if user && w.contains('@') {
            self.pos = col_pos;
            return Err(self.error("`@` is reserved for generated categories"));
        }
        Ok(tag)
    }

    pub(crate) fn quoted(&mut self) -> Result<String> {
        self.expect("\"")?;
        let mut out = String::new();
        let mut chars = self.rest().char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '"' => {
                    self.pos += i + 1;
                    return Ok(out);
                }
                '\\' => match chars.next() {
                    Some((_, e)) => out.push(e),
                    None => break,
                },
                c => out.push(c),
            }
        }
        self.pos = self.text.len();
        Err(self.error("unterminated string"))
    }

    /// Parses `{key: value, ...}` into an ordered list of pairs.
    pub(crate) fn attributes(&mut self) -> Result<Vec<(&'a str, &'a str, usize)>> {
        self.expect("{")?;
        let mut out = Vec::new();
        if self.eat("}") {
            return Ok(out);
        }
        loop {
            let key = self.word(false)?;
            self.expect(":")?;
            self.skip_ws();
            let col = self.column();
            let value = self.word(false)?;
            out.push((key, value, col));
            if self.eat("}") {
                return Ok(out);
            }
            self.expect(",")?;
        }
    }
}

/// Removes a trailing `#` comment, ignoring `#` inside quoted strings.
pub(crate) fn strip_comment(line: &str) -> &str {
    let mut in_quote = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        if escaped {
            escaped = false;
            continue;
        }
        match c {
            '\\' if in_quote => escaped = true,
            '"' => in_quote = !in_quote,
            '#' if !in_quote => return &line[..i],
            _ => {}
        }
    }
    line
}

pub(crate) struct RuleDecl {
    pub rule: Rule,
    pub class_name: String,
    pub extra: BTreeMap<String, String>,
}

/// Parses the body of a `rule` line (after the keyword). Accepts class names
/// beyond phrasal/nonphrasal when `other_classes` allows them.
pub(crate) fn parse_rule_line(
    cur: &mut LineCursor<'_>,
    user: bool,
    other_classes: &[&str],
) -> Result<RuleDecl> {
    let id = cur.word(false)?;
    if user && id.contains('@') {
        return Err(cur.error("`@` is reserved for generated rule ids"));
    }
    cur.expect(":")?;
    let mut lhs = cur.category(user)?;
    cur.expect("->")?;
    let mut rhs = Vec::new();
    while cur.peek().is_some_and(|c| c != '{') {
        rhs.push(cur.category(user)?);
    }
    if rhs.is_empty() {
        return Err(cur.error("rule needs at least one right-hand-side category"));
    }
    let attrs = cur.attributes()?;
    if !cur.at_end() {
        return Err(cur.error("unexpected text after attributes"));
    }
    let mut class = None;
    let mut class_name = String::new();
    let mut markers = BTreeSet::new();
    let mut weight = 1.0;
    let mut extra = BTreeMap::new();
    for (key, value, col) in attrs {
        let err = |m: String| Error::syntax(cur.line_no, col, m);
        match key {
            "class" => {
                class = match value {
                    "phrasal" => Some(RuleClass::Phrasal),
                    "nonphrasal" => Some(RuleClass::Nonphrasal),
                    v if other_classes.contains(&v) => Some(RuleClass::Nonphrasal),
                    v => return Err(err(format!("unknown rule class `{v}`"))),
                };
                class_name = value.to_string();
            }
            "marker" => {
                let m = Marker::from_name(value)
                    .ok_or_else(|| err(format!("unknown marker `{value}`")))?;
                markers.insert(m);
            }
            "refine" => {
                if lhs.refinement().is_some() {
                    return Err(err("refinement given twice".into()));
                }
                lhs = CategoryTag::refined(lhs.major(), value);
            }
            "weight" => {
                weight = value
                    .parse::<f64>()
                    .ok()
                    .filter(|w| w.is_finite() && *w > 0.0)
                    .ok_or_else(|| err(format!("invalid weight `{value}`")))?;
            }
            k => {
                extra.insert(k.to_string(), value.to_string());
            }
        }
    }
    let class = class.ok_or_else(|| cur.error("rule has no `class` attribute"))?;
    let mut rule = Rule::new(id, lhs, rhs, class);
    rule.markers = markers;
    rule.weight = weight;
    Ok(RuleDecl {
        rule,
        class_name,
        extra,
    })
}

/// Parses and validates a grammar file.
pub fn parse_grammar_file(text: &str) -> Result<Grammar> {
    let mut rules = Vec::new();
    let mut lexicon = Lexicon::new();
    let mut chunk_types = BTreeMap::new();
    let mut start = BTreeSet::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(raw);
        let mut cur = LineCursor::new(line_no, line);
        if cur.at_end() {
            continue;
        }
        let keyword = cur.word(false)?;
        match keyword {
            "rule" => {
                let decl = parse_rule_line(&mut cur, true, &[])?;
                if let Some(k) = decl.extra.keys().next() {
                    return Err(Error::syntax(
                        line_no,
                        1,
                        format!("unknown attribute `{k}`"),
                    ));
                }
                rules.push(decl.rule);
            }
            "lex" => {
                let surface = cur.quoted()?;
                if surface.trim().is_empty() {
                    return Err(cur.error("empty lexical entry"));
                }
                cur.expect(":")?;
                let category = cur.category(true)?;
                if cur.word(false)? != "class" {
                    return Err(cur.error("expected `class`"));
                }
                let class = cur.word(false)?;
                if !cur.at_end() {
                    return Err(cur.error("unexpected text after word class"));
                }
                lexicon.insert(&surface, category, class)?;
            }
            "chunktype" => {
                let major = cur.word(false)?;
                cur.expect("=>")?;
                let kind = cur.word(false)?;
                let kind = ChunkKind::from_name(kind)
                    .ok_or_else(|| Error::UnknownChunkType(kind.to_string()))?;
                if !cur.at_end() {
                    return Err(cur.error("unexpected text after chunk type"));
                }
                if !is_symbol(major) {
                    return Err(cur.error("invalid category symbol"));
                }
                chunk_types.insert(major.to_string(), kind);
            }
            "start" => {
                start.insert(cur.category(true)?);
                if !cur.at_end() {
                    return Err(cur.error("unexpected text after start category"));
                }
            }
            other => {
                return Err(Error::syntax(
                    line_no,
                    1,
                    format!("unknown declaration `{other}`"),
                ));
            }
        }
    }
    Grammar::new(rules, lexicon, chunk_types, start)
}
