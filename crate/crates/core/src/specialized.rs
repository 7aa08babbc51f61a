//! Specialized grammars: macro rules that flatten chunks of nonphrasal rule
//! applications, each carrying the template needed to expand it back into
//! an original-grammar derivation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::sync::Arc;

use crate::category::CategoryTag;
use crate::derivation::Derivation;
use crate::ebl::{ChunkScheme, ChunkType};
use crate::error::{Error, Result};
use crate::grammar::{parse_rule_line, strip_comment, Grammar, LineCursor, Rule, RuleLine};

/// A chunk skeleton: original rule applications with numbered slots at the
/// frontier. Slot `i` is filled by the macro rule's `i`-th child.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Template {
    Slot(usize),
    Node {
        rule: Arc<str>,
        category: CategoryTag,
        children: Vec<Template>,
    },
}

impl Template {
    pub fn category<'a>(&'a self, rhs: &'a [CategoryTag]) -> &'a CategoryTag {
        match self {
            Template::Slot(i) => &rhs[*i],
            Template::Node { category, .. } => category,
        }
    }

    /// Slot indexes in left-to-right order.
    pub fn slots(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_slots(&mut out);
        out
    }

    fn collect_slots(&self, out: &mut Vec<usize>) {
        match self {
            Template::Slot(i) => out.push(*i),
            Template::Node { children, .. } => children.iter().for_each(|c| c.collect_slots(out)),
        }
    }

    /// Rule ids used, in preorder.
    pub fn rule_ids(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_rules(&mut out);
        out
    }

    fn collect_rules<'a>(&'a self, out: &mut Vec<&'a str>) {
        if let Template::Node { rule, children, .. } = self {
            out.push(rule);
            children.iter().for_each(|c| c.collect_rules(out));
        }
    }

    /// Number of rule applications.
    pub fn size(&self) -> usize {
        self.rule_ids().len()
    }

    pub fn to_sexpr(&self) -> String {
        let mut out = String::new();
        self.write(&mut out);
        out
    }

    fn write(&self, out: &mut String) {
        match self {
            Template::Slot(i) => {
                let _ = write!(out, "${i}");
            }
            Template::Node { rule, children, .. } => {
                out.push('(');
                out.push_str(rule);
                for c in children {
                    out.push(' ');
                    c.write(out);
                }
                out.push(')');
            }
        }
    }

    fn instantiate(&self, kids: &[Arc<Derivation>], macro_id: &str) -> Result<Arc<Derivation>> {
        match self {
            Template::Slot(i) => kids.get(*i).cloned().ok_or_else(|| Error::TemplateArity {
                rule: macro_id.to_string(),
                expected: i + 1,
                found: kids.len(),
            }),
            Template::Node {
                rule,
                category,
                children,
            } => {
                let children = children
                    .iter()
                    .map(|c| c.instantiate(kids, macro_id))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Arc::new(Derivation::Node {
                    rule: rule.clone(),
                    category: category.clone(),
                    children,
                }))
            }
        }
    }

    fn parse(cur: &mut LineCursor<'_>, grammar: &Grammar) -> Result<Template> {
        if cur.eat("$") {
            let n = cur.word(false)?;
            return n
                .parse()
                .map(Template::Slot)
                .map_err(|_| cur.error("invalid slot number"));
        }
        cur.expect("(")?;
        let rule = cur.word(false)?;
        let r = grammar
            .rule(rule)
            .ok_or_else(|| cur.error(format!("template uses unknown rule `{rule}`")))?;
        let mut children = Vec::new();
        while !cur.eat(")") {
            if cur.at_end() {
                return Err(cur.error("unbalanced parentheses"));
            }
            children.push(Template::parse(cur, grammar)?);
        }
        Ok(Template::Node {
            rule: r.id.clone(),
            category: r.lhs.clone(),
            children,
        })
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sexpr())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MacroRule {
    pub id: Arc<str>,
    pub lhs: CategoryTag,
    pub rhs: Vec<CategoryTag>,
    pub template: Template,
    pub chunk_type: ChunkType,
}

/// The category a chunk of `chunk_type` rooted at `original` is given in the
/// specialized grammar, e.g. `np@NP`.
pub fn chunk_category(chunk_type: ChunkType, original: &CategoryTag) -> CategoryTag {
    CategoryTag::with_refinement(
        &format!("{}@{}", chunk_type.name(), original.major()),
        original.refinement(),
    )
}

#[derive(Clone, Debug)]
pub struct SpecializedGrammar {
    macro_rules: Vec<MacroRule>,
    by_id: HashMap<Arc<str>, usize>,
    phrasal_rules: Vec<Rule>,
    source_grammar_id: String,
    start: BTreeSet<CategoryTag>,
    scheme: ChunkScheme,
}

impl PartialEq for SpecializedGrammar {
    fn eq(&self, other: &Self) -> bool {
        self.macro_rules == other.macro_rules
            && self.phrasal_rules == other.phrasal_rules
            && self.source_grammar_id == other.source_grammar_id
            && self.start == other.start
            && self.scheme == other.scheme
    }
}

impl SpecializedGrammar {
    pub fn new(
        macro_rules: Vec<MacroRule>,
        source: &Grammar,
        start: BTreeSet<CategoryTag>,
        scheme: ChunkScheme,
    ) -> Self {
        let by_id = macro_rules
            .iter()
            .enumerate()
            .map(|(i, m)| (m.id.clone(), i))
            .collect();
        SpecializedGrammar {
            macro_rules,
            by_id,
            phrasal_rules: source.phrasal_rules().cloned().collect(),
            source_grammar_id: source.checksum(),
            start,
            scheme,
        }
    }

    pub fn macro_rules(&self) -> &[MacroRule] {
        &self.macro_rules
    }

    pub fn macro_rule(&self, id: &str) -> Option<&MacroRule> {
        self.by_id.get(id).map(|&i| &self.macro_rules[i])
    }

    pub fn phrasal_rules(&self) -> &[Rule] {
        &self.phrasal_rules
    }

    pub fn source_grammar_id(&self) -> &str {
        &self.source_grammar_id
    }

    /// Categories a complete specialized parse must have.
    pub fn start_categories(&self) -> &BTreeSet<CategoryTag> {
        &self.start
    }

    pub fn scheme(&self) -> ChunkScheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.macro_rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.macro_rules.is_empty()
    }

    pub fn counts_by_type(&self) -> BTreeMap<ChunkType, usize> {
        let mut out = BTreeMap::new();
        for m in &self.macro_rules {
            *out.entry(m.chunk_type).or_insert(0) += 1;
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# specialized grammar: {} macro rules, {} phrasal rules",
            self.macro_rules.len(),
            self.phrasal_rules.len()
        );
        let _ = writeln!(out, "source {}", self.source_grammar_id);
        let _ = writeln!(out, "scheme {}", self.scheme.name());
        for c in &self.start {
            let _ = writeln!(out, "start {c}");
        }
        for m in &self.macro_rules {
            let rule = Rule::new(
                &m.id,
                m.lhs.clone(),
                m.rhs.clone(),
                crate::grammar::RuleClass::Nonphrasal,
            );
            let _ = writeln!(
                out,
                "{}",
                RuleLine(&rule, "macro", Some(("chunk", m.chunk_type.name())))
            );
            let _ = writeln!(out, "template {} : {}", m.id, m.template);
        }
        for r in &self.phrasal_rules {
            let _ = writeln!(out, "{}", RuleLine(r, "phrasal", None));
        }
        out
    }

    /// Loads a serialized specialized grammar built from `grammar`.
    pub fn parse(text: &str, grammar: &Grammar) -> Result<Self> {
        let mut source = None;
        let mut scheme = None;
        let mut start = BTreeSet::new();
        let mut pending: Vec<(Rule, ChunkType)> = Vec::new();
        let mut templates: HashMap<String, (Template, usize)> = HashMap::new();
        let mut phrasal = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let mut cur = LineCursor::new(line_no, strip_comment(raw));
            if cur.at_end() {
                continue;
            }
            match cur.word(false)? {
                "source" => source = Some(cur.word(false)?.to_string()),
                "scheme" => {
                    let name = cur.word(false)?;
                    scheme = Some(
                        ChunkScheme::from_name(name)
                            .ok_or_else(|| cur.error(format!("unknown scheme `{name}`")))?,
                    );
                }
                "start" => {
                    start.insert(cur.category(false)?);
                }
                "rule" => {
                    let decl = parse_rule_line(&mut cur, false, &["macro"])?;
                    if decl.class_name == "phrasal" {
                        phrasal.push(decl.rule);
                    } else {
                        let name = decl.extra.get("chunk").ok_or_else(|| {
                            Error::syntax(line_no, 1, "macro rule without `chunk`")
                        })?;
                        let ct = ChunkType::from_name(name)
                            .ok_or_else(|| Error::UnknownChunkType(name.clone()))?;
                        pending.push((decl.rule, ct));
                    }
                }
                "template" => {
                    let id = cur.word(false)?.to_string();
                    cur.expect(":")?;
                    let t = Template::parse(&mut cur, grammar)?;
                    if !cur.at_end() {
                        return Err(cur.error("trailing text after template"));
                    }
                    templates.insert(id, (t, line_no));
                }
                other => {
                    return Err(Error::syntax(
                        line_no,
                        1,
                        format!("unknown declaration `{other}`"),
                    ))
                }
            }
        }

        let source = source.ok_or_else(|| Error::syntax(1, 1, "missing `source` line"))?;
        if source != grammar.checksum() {
            return Err(Error::GrammarMismatch {
                expected: source,
                found: grammar.checksum(),
            });
        }
        let mut macros = Vec::with_capacity(pending.len());
        for (rule, chunk_type) in pending {
            let (template, _) = templates.remove(rule.id.as_ref()).ok_or_else(|| {
                Error::syntax(1, 1, format!("macro `{}` has no template", rule.id))
            })?;
            let mut slots = template.slots();
            slots.sort_unstable();
            if slots != (0..rule.rhs.len()).collect::<Vec<_>>() {
                return Err(Error::TemplateArity {
                    rule: rule.id.to_string(),
                    expected: rule.rhs.len(),
                    found: slots.len(),
                });
            }
            macros.push(MacroRule {
                id: rule.id,
                lhs: rule.lhs,
                rhs: rule.rhs,
                template,
                chunk_type,
            });
        }
        if let Some(id) = templates.keys().next() {
            return Err(Error::syntax(
                templates[id].1,
                1,
                format!("template for unknown macro `{id}`"),
            ));
        }
        let mut sg = SpecializedGrammar::new(
            macros,
            grammar,
            start,
            scheme.ok_or_else(|| Error::syntax(1, 1, "missing `scheme` line"))?,
        );
        sg.phrasal_rules = phrasal;
        Ok(sg)
    }
}

/// Rewrites a derivation over macro rules into the original grammar's rules.
/// Subtrees headed by original rules are kept as they are.
pub fn expand_specialized_derivation(
    tree: &Arc<Derivation>,
    sg: &SpecializedGrammar,
) -> Result<Arc<Derivation>> {
    match tree.as_ref() {
        Derivation::Leaf { .. } => Ok(tree.clone()),
        Derivation::Node {
            rule,
            category,
            children,
        } => match sg.macro_rule(rule) {
            Some(m) => {
                if children.len() != m.rhs.len() {
                    return Err(Error::TemplateArity {
                        rule: rule.to_string(),
                        expected: m.rhs.len(),
                        found: children.len(),
                    });
                }
                let kids = children
                    .iter()
                    .map(|c| expand_specialized_derivation(c, sg))
                    .collect::<Result<Vec<_>>>()?;
                m.template.instantiate(&kids, rule)
            }
            None => {
                if !children.iter().any(|c| contains_macro(c, sg)) {
                    return Ok(tree.clone());
                }
                let kids = children
                    .iter()
                    .map(|c| expand_specialized_derivation(c, sg))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Derivation::node(rule, category.clone(), kids))
            }
        },
    }
}

fn contains_macro(tree: &Derivation, sg: &SpecializedGrammar) -> bool {
    match tree {
        Derivation::Leaf { .. } => false,
        Derivation::Node { rule, children, .. } => {
            sg.macro_rule(rule).is_some() || children.iter().any(|c| contains_macro(c, sg))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::validate_derivation;

    const GRAMMAR: &str = "start S\nlex \"x\" : X class x\nrule a : A -> X X {class: nonphrasal}\nrule s : S -> A X {class: nonphrasal}\nrule p : P -> X {class: phrasal}\n";

    fn grammar() -> Grammar {
        Grammar::parse(GRAMMAR).unwrap()
    }

    fn file(g: &Grammar, body: &str) -> String {
        format!(
            "source {}\nscheme new\nstart utterance_unit@S\n{body}",
            g.checksum()
        )
    }

    const NESTED: &str = "\
rule non_phrasal_np@0 : non_phrasal_np@A -> X X {class: macro, chunk: non_phrasal_np}
template non_phrasal_np@0 : (a $0 $1)
rule utterance_unit@0 : utterance_unit@S -> non_phrasal_np@A X {class: macro, chunk: utterance_unit}
template utterance_unit@0 : (s $0 $1)
";

    fn x() -> Arc<Derivation> {
        Derivation::leaf("x", CategoryTag::new("X"), "x")
    }

    #[test]
    fn template_slots_and_rules() {
        let g = grammar();
        let sg = SpecializedGrammar::parse(&file(&g, "rule m : utterance_unit@S -> X X X {class: macro, chunk: utterance_unit}\ntemplate m : (s (a $0 $1) $2)\n"), &g).unwrap();
        let t = &sg.macro_rule("m").unwrap().template;
        assert_eq!(t.slots(), vec![0, 1, 2]);
        assert_eq!(t.rule_ids(), vec!["s", "a"]);
        assert_eq!(t.size(), 2);
        assert_eq!(t.to_sexpr(), "(s (a $0 $1) $2)");
    }

    #[test]
    fn nested_macros_expand_to_a_valid_original_tree() {
        let g = grammar();
        let sg = SpecializedGrammar::parse(&file(&g, NESTED), &g).unwrap();
        let np = Derivation::node(
            "non_phrasal_np@0",
            CategoryTag::new("non_phrasal_np@A"),
            vec![x(), x()],
        );
        let top = Derivation::node(
            "utterance_unit@0",
            CategoryTag::new("utterance_unit@S"),
            vec![np, x()],
        );
        let expanded = expand_specialized_derivation(&top, &sg).unwrap();
        let expected = Derivation::node(
            "s",
            CategoryTag::new("S"),
            vec![
                Derivation::node("a", CategoryTag::new("A"), vec![x(), x()]),
                x(),
            ],
        );
        assert_eq!(expanded, expected);
        assert!(validate_derivation(&expanded, &g).is_ok());
    }

    #[test]
    fn text_round_trip_keeps_phrasal_rules() {
        let g = grammar();
        let sg = SpecializedGrammar::parse(&file(&g, NESTED), &g).unwrap();
        assert_eq!(sg.phrasal_rules().len(), 0);
        let built = SpecializedGrammar::new(
            sg.macro_rules().to_vec(),
            &g,
            sg.start_categories().clone(),
            ChunkScheme::New,
        );
        assert_eq!(built.phrasal_rules().len(), 1);
        let again = SpecializedGrammar::parse(&built.to_text(), &g).unwrap();
        assert_eq!(built, again);
    }

    #[test]
    fn slot_numbers_must_match_arity() {
        let g = grammar();
        let text = file(&g, "rule m : utterance_unit@S -> X X {class: macro, chunk: utterance_unit}\ntemplate m : (s (a $0 $1) $2)\n");
        assert!(matches!(
            SpecializedGrammar::parse(&text, &g),
            Err(Error::TemplateArity {
                expected: 2,
                found: 3,
                ..
            })
        ));
    }

    #[test]
    fn malformed_files_are_rejected() {
        let g = grammar();
        let cases = [
            "rule m : utterance_unit@S -> X {class: macro, chunk: utterance_unit}\n",
            "template m : (s $0 $1)\n",
            "rule m : utterance_unit@S -> X {class: macro, chunk: utterance_unit}\ntemplate m : (zz $0)\n",
            "rule m : utterance_unit@S -> X {class: macro, chunk: utterance_unit}\ntemplate m : (a $0\n",
            "rule m : utterance_unit@S -> X {class: macro, chunk: nope}\ntemplate m : (a $0)\n",
            "rule m : utterance_unit@S -> X {class: macro}\ntemplate m : (a $0)\n",
            "bogus line\n",
        ];
        for body in cases {
            assert!(
                SpecializedGrammar::parse(&file(&g, body), &g).is_err(),
                "{body}"
            );
        }
        assert!(
            SpecializedGrammar::parse(&file(&g, NESTED).replace("scheme new\n", ""), &g).is_err()
        );
    }

    #[test]
    fn other_grammar_is_a_mismatch() {
        let g = grammar();
        let other = Grammar::parse(&format!("{GRAMMAR}lex \"y\" : X class y\n")).unwrap();
        assert!(matches!(
            SpecializedGrammar::parse(&file(&g, NESTED), &other),
            Err(Error::GrammarMismatch { .. })
        ));
    }

    #[test]
    fn chunk_categories_keep_refinement() {
        let c = chunk_category(
            ChunkType::Pp,
            &CategoryTag::with_refinement("NUM", Some("card")),
        );
        assert_eq!(c.major(), "pp@NUM");
        assert_eq!(c.refinement(), Some("card"));
    }
}
