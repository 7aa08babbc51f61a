use std::sync::Arc;

use crate::derivation::Derivation;
use crate::error::{Error, Result};
use crate::grammar::{ChunkKind, Grammar, Marker, Rule};

use super::ChunkType;

/// Chunking information for one derivation node.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NodeAnnotation {
    /// Root of a maximal subtree built only from phrasal rules and leaves.
    pub is_phrasal_subtree_root: bool,
    /// Type of the chunk rooted here, if this node roots one.
    pub chunk_type: Option<ChunkType>,
    /// The chunk rooted here is the largest subtree of its type at this
    /// position.
    pub is_maximal_for_type: bool,
}

#[derive(Clone, Debug)]
pub struct AnnotatedNode {
    pub tree: Arc<Derivation>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Chunk kind of the node's category.
    pub kind: ChunkKind,
    /// A leaf or a phrasal rule application.
    pub phrasal_top: bool,
    /// No nonphrasal application anywhere in the subtree.
    pub pure_phrasal: bool,
    pub rule: Option<Rule>,
    pub annotation: NodeAnnotation,
}

impl AnnotatedNode {
    pub fn has_marker(&self, m: Marker) -> bool {
        self.rule.as_ref().is_some_and(|r| r.has_marker(m))
    }
}

/// A derivation flattened in preorder; node 0 is the root.
#[derive(Clone, Debug)]
pub struct AnnotatedTree {
    pub nodes: Vec<AnnotatedNode>,
    /// Observations about ambiguous cases met while classifying.
    pub notes: Vec<String>,
}

impl AnnotatedTree {
    /// Flattens `tree` without classifying it.
    pub fn build(tree: &Arc<Derivation>, grammar: &Grammar) -> Result<Self> {
        let mut out = AnnotatedTree {
            nodes: Vec::new(),
            notes: Vec::new(),
        };
        out.add(tree, None, grammar)?;
        Ok(out)
    }

    fn add(
        &mut self,
        tree: &Arc<Derivation>,
        parent: Option<usize>,
        grammar: &Grammar,
    ) -> Result<usize> {
        let rule = match tree.rule_id() {
            Some(id) => Some(
                grammar
                    .rule(id)
                    .ok_or_else(|| Error::InvalidGold(format!("unknown rule `{id}`")))?
                    .clone(),
            ),
            None => None,
        };
        let phrasal_top = rule.as_ref().is_none_or(|r| r.is_phrasal());
        let at = self.nodes.len();
        self.nodes.push(AnnotatedNode {
            tree: tree.clone(),
            parent,
            children: Vec::new(),
            kind: grammar.chunk_kind(tree.category()),
            phrasal_top,
            pure_phrasal: phrasal_top,
            rule,
            annotation: NodeAnnotation::default(),
        });
        let mut pure = phrasal_top;
        for c in tree.children() {
            let ci = self.add(c, Some(at), grammar)?;
            pure &= self.nodes[ci].pure_phrasal;
            self.nodes[at].children.push(ci);
        }
        self.nodes[at].pure_phrasal = pure;
        Ok(at)
    }

    pub fn root(&self) -> &AnnotatedNode {
        &self.nodes[0]
    }

    /// Indices of chunk roots in preorder.
    pub fn chunk_roots(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].annotation.chunk_type.is_some())
    }

    fn mark_phrasal_roots(&mut self) {
        for i in 0..self.nodes.len() {
            let parent_nonphrasal = match self.nodes[i].parent {
                None => true,
                Some(p) => !self.nodes[p].phrasal_top,
            };
            self.nodes[i].annotation.is_phrasal_subtree_root =
                self.nodes[i].pure_phrasal && parent_nonphrasal;
        }
    }

    /// Whether node `i` heads the verb phrase of an imperative: it sits below
    /// an `s_to_vp` application, possibly through adverbial modifications.
    fn in_imperative_position(&self, i: usize) -> bool {
        let Some(p) = self.nodes[i].parent else {
            return false;
        };
        let parent = &self.nodes[p];
        if parent.has_marker(Marker::SToVp) {
            return true;
        }
        parent.has_marker(Marker::AdverbialModification)
            && self.nodes[i].kind == ChunkKind::Vp
            && self.in_imperative_position(p)
    }

    fn candidate(&self, i: usize, wanted: ChunkType) -> bool {
        let n = &self.nodes[i];
        match wanted {
            ChunkType::UtteranceUnit => n.kind == ChunkKind::UtteranceUnit,
            ChunkType::ImperativeVp => {
                !n.has_marker(Marker::AdverbialModification) && self.in_imperative_position(i)
            }
            ChunkType::NonPhrasalNp => n.kind == ChunkKind::Np,
            ChunkType::Rel => n.kind == ChunkKind::Rel,
            ChunkType::VpModifier => {
                n.kind == ChunkKind::Vp
                    && n.parent
                        .is_some_and(|p| self.nodes[p].has_marker(Marker::NpNpVp))
            }
            ChunkType::Pp => n.kind == ChunkKind::Pp,
            _ => false,
        }
    }

    fn classify_below(&mut self, i: usize, context: ChunkType) {
        for ci in self.nodes[i].children.clone() {
            let child = &self.nodes[ci];
            if child.pure_phrasal {
                continue;
            }
            if child.phrasal_top {
                // phrasal rule over nonphrasal material: cut as a phrasal
                // constituent; classify below it in the same context
                self.classify_below(ci, context);
                continue;
            }
            let found = context
                .allowed_cuts()
                .iter()
                .copied()
                .find(|&t| self.candidate(ci, t));
            let next = match found {
                Some(t) => {
                    let a = &mut self.nodes[ci].annotation;
                    a.chunk_type = Some(t);
                    a.is_maximal_for_type = true;
                    t
                }
                None => context,
            };
            self.classify_below(ci, next);
        }
    }

    fn note_nested_adverbials(&mut self) {
        for i in 0..self.nodes.len() {
            let n = &self.nodes[i];
            if n.has_marker(Marker::AdverbialModification) {
                if let Some(p) = n.parent {
                    if self.nodes[p].has_marker(Marker::AdverbialModification) {
                        let note = format!(
                            "nested adverbial modification at `{}`; imperative verb phrase taken below all modifiers",
                            n.tree.to_sexpr()
                        );
                        self.notes.push(note);
                    }
                }
            }
        }
    }
}

/// Checks that marked rules have the shapes the chunking criteria assume.
pub fn check_markers(grammar: &Grammar) -> Result<()> {
    let kind = |c| grammar.chunk_kind(c);
    for r in grammar.rules() {
        let bad = |message: &str| Error::MarkerInconsistency {
            rule: r.id.to_string(),
            message: message.to_string(),
        };
        if r.has_marker(Marker::SToVp) && !(r.rhs.len() == 1 && kind(&r.rhs[0]) == ChunkKind::Vp) {
            return Err(bad("s_to_vp needs a single vp-typed child"));
        }
        if r.has_marker(Marker::AdverbialModification)
            && !(kind(&r.lhs) == ChunkKind::Vp && r.rhs.iter().any(|c| kind(c) == ChunkKind::Vp))
        {
            return Err(bad(
                "adverbial_modification needs a vp-typed parent and child",
            ));
        }
        if r.has_marker(Marker::NpNpVp)
            && !(kind(&r.lhs) == ChunkKind::Np && r.rhs.iter().any(|c| kind(c) == ChunkKind::Vp))
        {
            return Err(bad(
                "np_np_vp needs an np-typed parent and a vp-typed child",
            ));
        }
    }
    Ok(())
}

/// Annotates every node of a derivation with the hierarchical chunk scheme.
///
/// Chunks are assigned top down. The root is an utterance chunk; below a
/// chunk of type `t`, a nonphrasal node starts a new chunk of the first type
/// allowed below `t` whose criterion it meets, and otherwise stays inside
/// the current chunk. Phrasal subtrees are never chunked.
pub fn classify_nodes(tree: &Arc<Derivation>, grammar: &Grammar) -> Result<AnnotatedTree> {
    check_markers(grammar)?;
    let mut t = AnnotatedTree::build(tree, grammar)?;
    t.mark_phrasal_roots();
    let root = &mut t.nodes[0].annotation;
    root.chunk_type = Some(ChunkType::Utterance);
    root.is_maximal_for_type = true;
    if !t.nodes[0].pure_phrasal {
        t.classify_below(0, ChunkType::Utterance);
    }
    t.note_nested_adverbials();
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    const G: &str = r#"
start UTT
rule utt : UTT -> S {class: nonphrasal}
rule s_imp : S -> VP {class: nonphrasal, marker: s_to_vp}
rule s_decl : S -> NP VP {class: nonphrasal}
rule vp_adv : VP -> VP ADV {class: nonphrasal, marker: adverbial_modification}
rule vp_v_np : VP -> V NP {class: nonphrasal}
rule np_pp : NP -> NP PP {class: nonphrasal}
rule np_vp : NP -> NP VP {class: nonphrasal, marker: np_np_vp}
rule vp_ving : VP -> VING PP {class: nonphrasal}
rule pp : PP -> P NP {class: nonphrasal}
rule np_n : NP -> N {class: phrasal}
lex "show" : V class verb
lex "flights" : N class noun
lex "boston" : N class city
lex "to" : P class prep
lex "leaving" : VING class verb
lex "now" : ADV class adv
chunktype UTT => utterance
chunktype S => utterance_unit
chunktype VP => vp
chunktype NP => np
chunktype PP => pp
"#;

    fn types(t: &AnnotatedTree) -> Vec<(String, ChunkType)> {
        t.chunk_roots()
            .map(|i| {
                (
                    t.nodes[i].tree.rule_id().unwrap().to_string(),
                    t.nodes[i].annotation.chunk_type.unwrap(),
                )
            })
            .collect()
    }

    #[test]
    fn imperative_with_postmodified_np() {
        let g = Grammar::parse(G).unwrap();
        let d = Derivation::parse_with(
            r#"(utt (s_imp (vp_v_np "show":V:verb (np_vp (np_n "flights":N:noun) (vp_ving "leaving":VING:verb (pp "to":P:prep (np_n "boston":N:city)))))))"#,
            &g,
        )
        .unwrap();
        let t = classify_nodes(&d, &g).unwrap();
        use ChunkType::*;
        assert_eq!(
            types(&t),
            vec![
                ("utt".into(), Utterance),
                ("s_imp".into(), UtteranceUnit),
                ("vp_v_np".into(), ImperativeVp),
                ("np_vp".into(), NonPhrasalNp),
                ("vp_ving".into(), VpModifier),
                ("pp".into(), Pp),
            ]
        );
        let phrasal_roots = t
            .nodes
            .iter()
            .filter(|n| n.annotation.is_phrasal_subtree_root)
            .count();
        // show, two np_n subtrees, leaving, to
        assert_eq!(phrasal_roots, 5);
    }

    #[test]
    fn imperative_vp_found_below_adverbial() {
        let g = Grammar::parse(G).unwrap();
        let d = Derivation::parse_with(
            r#"(utt (s_imp (vp_adv (vp_adv (vp_v_np "show":V:verb (np_n "flights":N:noun)) "now":ADV:adv) "now":ADV:adv)))"#,
            &g,
        )
        .unwrap();
        let t = classify_nodes(&d, &g).unwrap();
        let got = types(&t);
        assert_eq!(got[2], ("vp_v_np".into(), ChunkType::ImperativeVp));
        assert_eq!(got.len(), 3);
        assert_eq!(t.notes.len(), 1);
    }

    #[test]
    fn np_in_declarative_subject_is_chunked() {
        let g = Grammar::parse(G).unwrap();
        let d = Derivation::parse_with(
            r#"(utt (s_decl (np_pp (np_n "flights":N:noun) (pp "to":P:prep (np_n "boston":N:city))) (vp_v_np "show":V:verb (np_n "flights":N:noun))))"#,
            &g,
        )
        .unwrap();
        let t = classify_nodes(&d, &g).unwrap();
        use ChunkType::*;
        // the declarative VP is not imperative and stays in the S chunk
        assert_eq!(
            types(&t),
            vec![
                ("utt".into(), Utterance),
                ("s_decl".into(), UtteranceUnit),
                ("np_pp".into(), NonPhrasalNp),
                ("pp".into(), Pp),
            ]
        );
    }

    #[test]
    fn inconsistent_marker_rejected() {
        let text = G.replace("rule s_imp : S -> VP", "rule s_imp : S -> NP");
        let g = Grammar::parse(&text).unwrap();
        let d = Derivation::parse_with(r#"(utt (s_imp (np_n "flights":N:noun)))"#, &g).unwrap();
        match classify_nodes(&d, &g) {
            Err(Error::MarkerInconsistency { rule, .. }) => assert_eq!(rule, "s_imp"),
            other => panic!("{other:?}"),
        }
    }
}
