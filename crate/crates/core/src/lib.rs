//! Grammar specialization and statistical pruning for a chart parser.
//!
//! A [`Grammar`] splits its rules into phrasal and nonphrasal ones. Parsing
//! a word lattice runs a lexical pass, a phrasal pass, and a full pass
//! ([`chart`]), optionally pruning the chart after the first two
//! ([`pruner`]). The full pass can use a [`SpecializedGrammar`] learned from
//! a treebank ([`ebl`]) in place of the nonphrasal rules. [`pipeline`] ties
//! the pieces together for training and evaluation.

pub mod category;
pub mod chart;
pub mod corpus;
pub mod derivation;
pub mod ebl;
pub mod error;
pub mod grammar;
pub mod lattice;
pub mod pipeline;
pub mod pruner;
pub mod specialized;
pub mod toy;

pub use category::CategoryTag;
pub use chart::{Analysis, Chart, ChartEdge, EdgeKind};
pub use derivation::Derivation;
pub use ebl::{ChunkScheme, ChunkType};
pub use error::{Error, Result};
pub use grammar::{Grammar, Rule, RuleClass};
pub use lattice::{Lattice, WordEdge};
pub use pruner::PruneModel;
pub use specialized::SpecializedGrammar;
