use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use crate::category::CategoryTag;
use crate::chart::Chart;
use crate::derivation::{validate_derivation, Derivation};
use crate::error::{Error, Result};
use crate::grammar::Grammar;

use super::model::PruneModel;
use super::property::{Anchor, BigramKey, Neighbour};

/// Distinct tags of the edges at positions `positions`.
fn neighbour_tags(chart: &Chart, positions: &[usize]) -> Vec<Neighbour> {
    if positions.is_empty() {
        return vec![Neighbour::Boundary];
    }
    let tags: BTreeSet<&CategoryTag> = positions
        .iter()
        .map(|&p| &chart.edges()[p].category)
        .collect();
    tags.into_iter()
        .map(|t| Neighbour::Tag(t.clone()))
        .collect()
}

/// Best estimate over the candidate neighbours of one side.
fn best_side(
    model: &PruneModel,
    table: &super::model::CountTable<BigramKey>,
    key: &mut BigramKey,
    neighbours: &[Neighbour],
) -> f64 {
    let mut best = 0.0f64;
    for n in neighbours {
        key.neighbour = n.clone();
        best = best.max(model.estimate_counts(table.get(key)));
    }
    best
}

/// The pessimistic correctness estimate of the edge at `pos`: the least of
/// the three criteria, each of which takes the most favourable neighbour,
/// times the edge's acoustic score.
pub fn score_edge(model: &PruneModel, chart: &Chart, pos: usize) -> f64 {
    let e = &chart.edges()[pos];
    let mut key = BigramKey {
        tag: e.category.clone(),
        anchor: Anchor::of(e),
        neighbour: Neighbour::Boundary,
    };
    let left = best_side(
        model,
        &model.left,
        &mut key,
        &neighbour_tags(chart, chart.ending_at(e.start)),
    );
    let right = best_side(
        model,
        &model.right,
        &mut key,
        &neighbour_tags(chart, chart.starting_at(e.end)),
    );
    let unigram = model.estimate_counts(model.unigram.get(&e.derivation.class_key()));
    left.min(right).min(unigram) * e.acoustic
}

/// Scores every edge in the chart.
pub fn score_chart(model: &PruneModel, chart: &mut Chart) {
    let scores: Vec<f64> = (0..chart.len())
        .map(|p| score_edge(model, chart, p))
        .collect();
    for (p, s) in scores.into_iter().enumerate() {
        chart.set_score(p, s);
    }
}

/// Best path scores through the chart, where a path scores the minimum of
/// its edge scores: `(forward, backward)`, `None` when no path reaches the
/// vertex from the source (or the sink from it).
pub fn best_path_scores(chart: &Chart) -> (Vec<Option<f64>>, Vec<Option<f64>>) {
    let n = chart.n_vertices();
    let edges = chart.edges();
    let mut fwd: Vec<Option<f64>> = vec![None; n];
    fwd[chart.source()] = Some(1.0);
    for v in 0..n {
        for &p in chart.ending_at(v) {
            let e = &edges[p];
            if let Some(f) = fwd[e.start] {
                let s = f.min(e.score);
                fwd[v] = Some(fwd[v].map_or(s, |x| x.max(s)));
            }
        }
    }
    let mut bwd: Vec<Option<f64>> = vec![None; n];
    bwd[chart.sink()] = Some(1.0);
    for v in (0..n).rev() {
        for &p in chart.starting_at(v) {
            let e = &edges[p];
            if let Some(b) = bwd[e.end] {
                let s = b.min(e.score);
                bwd[v] = Some(bwd[v].map_or(s, |x| x.max(s)));
            }
        }
    }
    (fwd, bwd)
}

/// Score of the best complete path through each vertex; 0 where none exists.
pub fn vertex_best_path_scores(chart: &Chart) -> Vec<f64> {
    let (fwd, bwd) = best_path_scores(chart);
    fwd.iter()
        .zip(&bwd)
        .map(|(f, b)| match (f, b) {
            (Some(f), Some(b)) => f.min(*b),
            _ => 0.0,
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PruneOutcome {
    pub removed: usize,
    /// Best complete path score, if any path exists.
    pub best: Option<f64>,
    pub threshold: Option<f64>,
}

/// Caps each edge score by the vertex scores at both ends and removes edges
/// scoring below `fraction` of the best complete path. With no complete path
/// the chart is left alone and a warning is recorded.
pub fn prune(chart: &mut Chart, fraction: f64) -> PruneOutcome {
    let (fwd, bwd) = best_path_scores(chart);
    let Some(best) = fwd[chart.sink()] else {
        chart.warn("no complete path through the chart; pruning skipped".into());
        return PruneOutcome {
            removed: 0,
            best: None,
            threshold: None,
        };
    };
    let vs: Vec<f64> = fwd
        .iter()
        .zip(&bwd)
        .map(|(f, b)| match (f, b) {
            (Some(f), Some(b)) => f.min(*b),
            _ => 0.0,
        })
        .collect();
    for p in 0..chart.len() {
        let e = &chart.edges()[p];
        let capped = e.score.min(vs[e.start]).min(vs[e.end]);
        chart.set_score(p, capped);
    }
    let threshold = best * fraction;
    let removed = chart.retain(|e| e.score >= threshold);
    PruneOutcome {
        removed,
        best: Some(best),
        threshold: Some(threshold),
    }
}

/// Scores every edge with `model`, then prunes.
pub fn prune_with_model(chart: &mut Chart, model: &PruneModel, fraction: f64) -> PruneOutcome {
    score_chart(model, chart);
    prune(chart, fraction)
}

/// Constituents of a gold derivation located on the chart's lattice.
#[derive(Clone, Debug)]
pub struct GoldConstituents {
    spans: HashSet<(usize, usize, Arc<Derivation>)>,
    tags_ending: Vec<HashSet<CategoryTag>>,
    tags_starting: Vec<HashSet<CategoryTag>>,
}

impl GoldConstituents {
    /// Validates `gold` and aligns its yield with the chart's lattice.
    pub fn locate(chart: &Chart, gold: &Arc<Derivation>, grammar: &Grammar) -> Result<Self> {
        validate_derivation(gold, grammar).into_result()?;
        let tokens = gold.tokens();
        let vertices = chart
            .lattice()
            .align(&tokens)
            .ok_or_else(|| Error::YieldMismatch(tokens.join(" ")))?;
        let n = chart.n_vertices();
        let mut out = GoldConstituents {
            spans: HashSet::new(),
            tags_ending: vec![HashSet::new(); n],
            tags_starting: vec![HashSet::new(); n],
        };
        out.add(gold, 0, &vertices);
        Ok(out)
    }

    /// Adds `node` whose yield starts at token `first`; returns the token
    /// count of its yield.
    fn add(&mut self, node: &Arc<Derivation>, first: usize, vertices: &[usize]) -> usize {
        let width = match node.as_ref() {
            Derivation::Leaf { .. } => node.token_count(),
            Derivation::Node { children, .. } => {
                let mut at = first;
                for c in children {
                    at += self.add(c, at, vertices);
                }
                at - first
            }
        };
        let (s, e) = (vertices[first], vertices[first + width]);
        self.tags_ending[e].insert(node.category().clone());
        self.tags_starting[s].insert(node.category().clone());
        self.spans.insert((s, e, node.clone()));
        width
    }

    pub fn contains(&self, start: usize, end: usize, derivation: &Arc<Derivation>) -> bool {
        self.spans.contains(&(start, end, derivation.clone()))
    }

    /// `(start vertex, end vertex, subtree)` for every gold node.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &Arc<Derivation>)> {
        self.spans.iter().map(|(s, e, d)| (*s, *e, d))
    }

    pub fn len(&self) -> usize {
        self.spans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }
}

fn neighbour_is_gold(n: &Neighbour, gold_tags: &HashSet<CategoryTag>) -> bool {
    match n {
        Neighbour::Boundary => true,
        Neighbour::Tag(t) => gold_tags.contains(t),
    }
}

/// Adds the counts of every edge in an unpruned chart to `model`. An edge is
/// correct if it is a constituent of the gold derivation; a bigram
/// occurrence is correct if, in addition, a gold constituent with the
/// neighbour's tag is adjacent on that side.
pub fn observe(chart: &Chart, gold: &GoldConstituents, model: &mut PruneModel) {
    for e in chart.edges() {
        let is_gold = gold.contains(e.start, e.end, &e.derivation);
        let mut key = BigramKey {
            tag: e.category.clone(),
            anchor: Anchor::of(e),
            neighbour: Neighbour::Boundary,
        };
        for n in neighbour_tags(chart, chart.ending_at(e.start)) {
            let correct = is_gold && neighbour_is_gold(&n, &gold.tags_ending[e.start]);
            key.neighbour = n;
            model.left.record(&key, correct);
        }
        for n in neighbour_tags(chart, chart.starting_at(e.end)) {
            let correct = is_gold && neighbour_is_gold(&n, &gold.tags_starting[e.end]);
            key.neighbour = n;
            model.right.record(&key, correct);
        }
        model.unigram.record(&e.derivation.class_key(), is_gold);
    }
}
