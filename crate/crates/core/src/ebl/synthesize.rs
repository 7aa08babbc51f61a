use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::category::CategoryTag;
use crate::derivation::Derivation;
use crate::error::{Error, Result};
use crate::grammar::{ChunkKind, Grammar};
use crate::specialized::{chunk_category, MacroRule, SpecializedGrammar, Template};

use super::annotate::{classify_nodes, AnnotatedTree};
use super::{ChunkScheme, ChunkType};

/// What fills one frontier position of a chunk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SlotKind {
    Lexical,
    /// A phrasal constituent, kept under its original category.
    Phrasal,
    Chunk(ChunkType),
}

/// A piece of a derivation that becomes one macro rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chunk {
    pub chunk_type: ChunkType,
    /// Category of the chunk's root in the original derivation.
    pub category: CategoryTag,
    /// Category of the chunk in the specialized grammar.
    pub lhs: CategoryTag,
    pub rhs: Vec<CategoryTag>,
    pub slots: Vec<SlotKind>,
    pub template: Template,
    /// Rooted at the root of the derivation.
    pub is_root: bool,
}

/// Where chunks start and which frontier nodes are cut as phrasal.
struct Cuts {
    chunk_of: Vec<Option<ChunkType>>,
    phrasal_cut: Vec<bool>,
}

fn cuts(t: &AnnotatedTree, scheme: ChunkScheme) -> Cuts {
    let n = t.nodes.len();
    let mut chunk_of = vec![None; n];
    let mut phrasal_cut: Vec<bool> = t.nodes.iter().map(|x| x.phrasal_top).collect();
    match scheme {
        ChunkScheme::New => {
            for (i, node) in t.nodes.iter().enumerate() {
                chunk_of[i] = node.annotation.chunk_type;
            }
        }
        ChunkScheme::WholeSentence => chunk_of[0] = Some(ChunkType::Utterance),
        ChunkScheme::Identity => {
            for (i, node) in t.nodes.iter().enumerate() {
                if !node.phrasal_top {
                    chunk_of[i] = Some(ChunkType::Single);
                }
            }
            if chunk_of[0].is_none() {
                chunk_of[0] = Some(ChunkType::Single);
            }
        }
        ChunkScheme::Old => {
            phrasal_cut = t.nodes.iter().map(|x| x.tree.is_leaf()).collect();
            chunk_of[0] = Some(ChunkType::Utterance);
            // (np ancestor, pp ancestor) flags along the path
            let mut flags = vec![(false, false); n];
            for i in 1..n {
                let node = &t.nodes[i];
                let p = node.parent.expect("non-root");
                let (np_above, pp_above) = flags[p];
                let parent_np = t.nodes[p].kind == ChunkKind::Np;
                let parent_pp = t.nodes[p].kind == ChunkKind::Pp;
                let np_above = np_above || parent_np;
                let pp_above = pp_above || parent_pp;
                flags[i] = (np_above, pp_above);
                if node.tree.is_leaf() {
                    continue;
                }
                if node.kind == ChunkKind::Np && !np_above {
                    let recursive = contains_kind_below(t, i, ChunkKind::Np);
                    chunk_of[i] = Some(if recursive {
                        ChunkType::RecursiveNp
                    } else {
                        ChunkType::NonRecursiveNp
                    });
                } else if node.kind == ChunkKind::Pp && !pp_above {
                    chunk_of[i] = Some(ChunkType::Pp);
                }
            }
        }
    }
    Cuts {
        chunk_of,
        phrasal_cut,
    }
}

fn contains_kind_below(t: &AnnotatedTree, i: usize, kind: ChunkKind) -> bool {
    t.nodes[i]
        .children
        .iter()
        .any(|&c| t.nodes[c].kind == kind || contains_kind_below(t, c, kind))
}

struct Builder<'a> {
    tree: &'a AnnotatedTree,
    cuts: &'a Cuts,
    rhs: Vec<CategoryTag>,
    slots: Vec<SlotKind>,
}

impl Builder<'_> {
    fn slot(&mut self, category: CategoryTag, kind: SlotKind) -> Template {
        self.rhs.push(category);
        self.slots.push(kind);
        Template::Slot(self.rhs.len() - 1)
    }

    fn build(&mut self, i: usize, is_chunk_root: bool) -> Template {
        let node = &self.tree.nodes[i];
        let category = node.tree.category().clone();
        if !is_chunk_root {
            if let Some(t) = self.cuts.chunk_of[i] {
                return self.slot(chunk_category(t, &category), SlotKind::Chunk(t));
            }
        }
        if node.tree.is_leaf() {
            return self.slot(category, SlotKind::Lexical);
        }
        if self.cuts.phrasal_cut[i] {
            return self.slot(category, SlotKind::Phrasal);
        }
        let children = node
            .children
            .iter()
            .map(|&c| self.build(c, false))
            .collect();
        Template::Node {
            rule: Arc::from(node.tree.rule_id().expect("rule node")),
            category,
            children,
        }
    }
}

/// Cuts an annotated derivation into chunks according to `scheme`. For the
/// hierarchical scheme the annotation from [`classify_nodes`] decides the
/// chunk roots; the other schemes compute their own.
pub fn extract_chunks(tree: &AnnotatedTree, scheme: ChunkScheme) -> Vec<Chunk> {
    let cuts = cuts(tree, scheme);
    let mut out = Vec::new();
    for (i, t) in cuts.chunk_of.iter().enumerate() {
        let Some(t) = *t else { continue };
        let mut b = Builder {
            tree,
            cuts: &cuts,
            rhs: Vec::new(),
            slots: Vec::new(),
        };
        let template = b.build(i, true);
        let category = tree.nodes[i].tree.category().clone();
        out.push(Chunk {
            chunk_type: t,
            lhs: chunk_category(t, &category),
            category,
            rhs: b.rhs,
            slots: b.slots,
            template,
            is_root: i == 0,
        });
    }
    out
}

/// Classifies and chunks one derivation.
pub fn chunk_derivation(
    tree: &Arc<Derivation>,
    grammar: &Grammar,
    scheme: ChunkScheme,
) -> Result<(Vec<Chunk>, Vec<String>)> {
    let annotated = match scheme {
        ChunkScheme::New => classify_nodes(tree, grammar)?,
        _ => AnnotatedTree::build(tree, grammar)?,
    };
    Ok((extract_chunks(&annotated, scheme), annotated.notes))
}

/// Builds a specialized grammar with one macro rule per distinct chunk.
/// Macro rules are numbered in a canonical order, so the result does not
/// depend on the order of `chunks`.
pub fn synthesize(
    chunks: &[Chunk],
    grammar: &Grammar,
    scheme: ChunkScheme,
) -> Result<SpecializedGrammar> {
    let mut distinct: BTreeSet<(ChunkType, &CategoryTag, &[CategoryTag], &Template)> =
        BTreeSet::new();
    let mut start = BTreeSet::new();
    for c in chunks {
        if scheme == ChunkScheme::New {
            for s in &c.slots {
                if let SlotKind::Chunk(inner) = s {
                    if !c.chunk_type.dominates(*inner) {
                        return Err(Error::DominanceViolation {
                            parent: c.chunk_type.name().into(),
                            child: inner.name().into(),
                        });
                    }
                }
            }
        }
        if c.is_root {
            start.insert(c.lhs.clone());
        }
        distinct.insert((c.chunk_type, &c.lhs, &c.rhs, &c.template));
    }
    let macros = distinct
        .into_iter()
        .enumerate()
        .map(|(n, (chunk_type, lhs, rhs, template))| MacroRule {
            id: Arc::from(format!("{}@{}", chunk_type.name(), n + 1)),
            lhs: lhs.clone(),
            rhs: rhs.to_vec(),
            template: template.clone(),
            chunk_type,
        })
        .collect();
    Ok(SpecializedGrammar::new(macros, grammar, start, scheme))
}

/// Structural facts about a specialized grammar.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub macro_rules: usize,
    pub counts_by_type: BTreeMap<ChunkType, usize>,
    /// The graph from each chunk type to the chunk types it contains is
    /// acyclic.
    pub type_graph_acyclic: bool,
    /// No specialized category can derive itself.
    pub category_graph_acyclic: bool,
    /// Longest chain of nested macro rules; `None` when unbounded.
    pub depth: Option<usize>,
    /// Macro rules whose template uses a phrasal rule.
    pub phrasal_in_templates: usize,
    pub problems: Vec<String>,
}

impl CheckReport {
    pub fn is_ok(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Longest path (in nodes) from `v`, or `None` on a cycle.
fn longest_from<T: Ord + Clone + std::hash::Hash>(
    v: &T,
    edges: &BTreeMap<T, BTreeSet<T>>,
    memo: &mut HashMap<T, Option<usize>>,
    on_stack: &mut BTreeSet<T>,
) -> Option<usize> {
    if let Some(d) = memo.get(v) {
        return *d;
    }
    if !on_stack.insert(v.clone()) {
        return None;
    }
    let mut best = Some(1);
    if let Some(next) = edges.get(v) {
        for w in next {
            best = match (best, longest_from(w, edges, memo, on_stack)) {
                (Some(b), Some(d)) => Some(b.max(d + 1)),
                _ => None,
            };
            if best.is_none() {
                break;
            }
        }
    }
    on_stack.remove(v);
    memo.insert(v.clone(), best);
    best
}

fn acyclic_depth<T: Ord + Clone + std::hash::Hash>(
    edges: &BTreeMap<T, BTreeSet<T>>,
    roots: &[T],
) -> (bool, Option<usize>) {
    let mut memo = HashMap::new();
    let mut all_ok = true;
    for v in edges.keys() {
        if longest_from(v, edges, &mut memo, &mut BTreeSet::new()).is_none() {
            all_ok = false;
        }
    }
    if !all_ok {
        return (false, None);
    }
    let depth = roots
        .iter()
        .filter_map(|r| longest_from(r, edges, &mut memo, &mut BTreeSet::new()))
        .max()
        .unwrap_or(0);
    (true, Some(depth))
}

/// Reports recursion, nesting depth, and phrasal rules inside templates.
/// The hierarchical scheme must be acyclic with depth at most 6.
pub fn check_specialized(sg: &SpecializedGrammar, grammar: &Grammar) -> CheckReport {
    let mut type_edges: BTreeMap<ChunkType, BTreeSet<ChunkType>> = BTreeMap::new();
    let mut cat_edges: BTreeMap<CategoryTag, BTreeSet<CategoryTag>> = BTreeMap::new();
    let lhs_cats: BTreeSet<&CategoryTag> = sg.macro_rules().iter().map(|m| &m.lhs).collect();
    let type_of: HashMap<&CategoryTag, ChunkType> = sg
        .macro_rules()
        .iter()
        .map(|m| (&m.lhs, m.chunk_type))
        .collect();
    let mut phrasal_in_templates = 0;
    for m in sg.macro_rules() {
        type_edges.entry(m.chunk_type).or_default();
        cat_edges.entry(m.lhs.clone()).or_default();
        for c in &m.rhs {
            if lhs_cats.contains(c) {
                cat_edges
                    .entry(m.lhs.clone())
                    .or_default()
                    .insert(c.clone());
                type_edges
                    .entry(m.chunk_type)
                    .or_default()
                    .insert(type_of[c]);
            }
        }
        if m.template
            .rule_ids()
            .iter()
            .any(|r| grammar.rule(r).is_some_and(|r| r.is_phrasal()))
        {
            phrasal_in_templates += 1;
        }
    }
    let (type_graph_acyclic, _) = acyclic_depth(&type_edges, &[]);
    let roots: Vec<CategoryTag> = sg.start_categories().iter().cloned().collect();
    let (category_graph_acyclic, depth) = acyclic_depth(&cat_edges, &roots);

    let mut problems = Vec::new();
    if sg.scheme() == ChunkScheme::New {
        if !type_graph_acyclic {
            problems.push("chunk type graph has a cycle".to_string());
        }
        match depth {
            Some(d) if d <= 6 => {}
            Some(d) => problems.push(format!("macro nesting depth {d} exceeds 6")),
            None => problems.push("macro nesting is unbounded".to_string()),
        }
        if phrasal_in_templates > 0 {
            problems.push(format!(
                "{phrasal_in_templates} templates contain phrasal rules"
            ));
        }
    }
    if !category_graph_acyclic {
        problems.push("specialized grammar is recursive".to_string());
    }
    CheckReport {
        macro_rules: sg.len(),
        counts_by_type: sg.counts_by_type(),
        type_graph_acyclic,
        category_graph_acyclic,
        depth,
        phrasal_in_templates,
        problems,
    }
}
