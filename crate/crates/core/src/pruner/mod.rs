//! Statistical chart pruning.
//!
//! Each edge gets a pessimistic estimate of the probability that it belongs
//! to the correct analysis, derived from counts collected on training charts.
//! Edge scores are then capped by the best complete path through their end
//! vertices and edges far below the best path are removed.

mod model;
mod property;
mod scoring;

pub use model::{CountTable, Counts, PruneModel, PruneParams};
pub use property::{Anchor, BigramKey, EdgeProperty, Neighbour};
pub use scoring::{
    best_path_scores, observe, prune, prune_with_model, score_chart, score_edge,
    vertex_best_path_scores, GoldConstituents, PruneOutcome,
};
