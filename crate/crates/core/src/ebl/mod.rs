//! Grammar specialization from example derivations.
//!
//! Each training derivation is cut into chunks. A chunk is a connected piece
//! of the tree whose interior is made of nonphrasal rule applications; its
//! frontier consists of lexical leaves, phrasal subtrees, and the roots of
//! smaller chunks. Every distinct chunk becomes one macro rule. Chunk roots
//! are given fresh categories, so a macro rule can only combine with the
//! kinds of chunk it was seen combined with in training.

mod annotate;
mod synthesize;

use std::fmt;

pub use annotate::{check_markers, classify_nodes, AnnotatedNode, AnnotatedTree, NodeAnnotation};
pub use synthesize::{
    check_specialized, chunk_derivation, extract_chunks, synthesize, CheckReport, Chunk, SlotKind,
};

/// The type of a chunk. The first seven are the types of the hierarchical
/// scheme, listed from the most to the least dominant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChunkType {
    Utterance,
    UtteranceUnit,
    ImperativeVp,
    NonPhrasalNp,
    Rel,
    VpModifier,
    Pp,
    /// Flat scheme: noun phrase containing another noun phrase.
    RecursiveNp,
    /// Flat scheme: noun phrase with no noun phrase below it.
    NonRecursiveNp,
    /// A single rule application.
    Single,
}

impl ChunkType {
    pub const ALL: [ChunkType; 10] = [
        ChunkType::Utterance,
        ChunkType::UtteranceUnit,
        ChunkType::ImperativeVp,
        ChunkType::NonPhrasalNp,
        ChunkType::Rel,
        ChunkType::VpModifier,
        ChunkType::Pp,
        ChunkType::RecursiveNp,
        ChunkType::NonRecursiveNp,
        ChunkType::Single,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChunkType::Utterance => "utterance",
            ChunkType::UtteranceUnit => "utterance_unit",
            ChunkType::ImperativeVp => "imperative_vp",
            ChunkType::NonPhrasalNp => "non_phrasal_np",
            ChunkType::Rel => "rel",
            ChunkType::VpModifier => "vp_modifier",
            ChunkType::Pp => "pp",
            ChunkType::RecursiveNp => "recursive_np",
            ChunkType::NonRecursiveNp => "nonrecursive_np",
            ChunkType::Single => "single",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        ChunkType::ALL.into_iter().find(|t| t.name() == s)
    }

    /// Level in the dominance hierarchy (higher dominates lower); `None` for
    /// types outside it.
    pub fn rank(self) -> Option<u8> {
        Some(match self {
            ChunkType::Utterance => 6,
            ChunkType::UtteranceUnit => 5,
            ChunkType::ImperativeVp => 4,
            ChunkType::NonPhrasalNp => 3,
            ChunkType::Rel | ChunkType::VpModifier => 2,
            ChunkType::Pp => 1,
            _ => return None,
        })
    }

    /// Whether a chunk of this type may directly contain one of `other`.
    pub fn dominates(self, other: ChunkType) -> bool {
        match (self.rank(), other.rank()) {
            (Some(a), Some(b)) => a > b,
            _ => false,
        }
    }

    /// Chunk types that may be cut out directly below a chunk of this type
    /// in the hierarchical scheme.
    pub fn allowed_cuts(self) -> &'static [ChunkType] {
        use ChunkType::*;
        match self {
            Utterance => &[UtteranceUnit, NonPhrasalNp, Pp],
            UtteranceUnit => &[ImperativeVp, NonPhrasalNp, Pp],
            ImperativeVp => &[NonPhrasalNp, Pp],
            NonPhrasalNp => &[Rel, VpModifier, Pp],
            Rel | VpModifier => &[Pp],
            _ => &[],
        }
    }
}

impl fmt::Display for ChunkType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How derivations are cut into chunks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChunkScheme {
    /// Hierarchical chunk types over nonphrasal rules.
    New,
    /// Utterance, maximal noun phrases and maximal prepositional phrases,
    /// over all rules.
    Old,
    /// One chunk per utterance.
    WholeSentence,
    /// One chunk per nonphrasal rule application.
    Identity,
}

impl ChunkScheme {
    pub const ALL: [ChunkScheme; 4] = [
        ChunkScheme::New,
        ChunkScheme::Old,
        ChunkScheme::WholeSentence,
        ChunkScheme::Identity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChunkScheme::New => "new",
            ChunkScheme::Old => "old",
            ChunkScheme::WholeSentence => "whole",
            ChunkScheme::Identity => "identity",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        ChunkScheme::ALL.into_iter().find(|t| t.name() == s)
    }
}

impl fmt::Display for ChunkScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
