//! Bottom-up all-analyses chart parsing over word lattices.
//!
//! Parsing runs in three passes. The lexical pass hypothesizes word analyses,
//! the phrasal pass closes the chart under the phrasal rules, and the full
//! pass closes it under either the nonphrasal rules or a specialized
//! grammar's macro rules and collects complete analyses.
//!
//! Every pass uses the same engine. Edges are processed in order of end
//! vertex; an edge is combined only as the rightmost child of a rule, with
//! left siblings taken from edges that end at its start vertex. Since those
//! all end strictly earlier they are final, so every combination is built
//! exactly once.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::category::CategoryTag;
use crate::derivation::Derivation;
use crate::error::{Error, Result};
use crate::grammar::Grammar;
use crate::lattice::Lattice;
use crate::specialized::{expand_specialized_derivation, SpecializedGrammar};

/// Default bound on derivation depth, reached only by cyclic rule sets.
pub const DEFAULT_MAX_DEPTH: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    Lexical,
    Phrasal,
    Full,
}

#[derive(Clone, Debug)]
pub struct ChartEdge {
    pub id: u32,
    pub start: usize,
    pub end: usize,
    pub category: CategoryTag,
    pub kind: EdgeKind,
    pub derivation: Arc<Derivation>,
    /// Estimated probability of belonging to the correct analysis.
    pub score: f64,
    /// Minimum confidence of the lattice words covered.
    pub acoustic: f64,
    depth: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum EdgeKey {
    Lexical(usize, usize, CategoryTag, Arc<str>),
    Rule(Arc<str>, Vec<u32>),
}

/// Edges over the vertices of one lattice, indexed by start and end vertex.
#[derive(Clone, Debug)]
pub struct Chart {
    lattice: Lattice,
    edges: Vec<ChartEdge>,
    by_start: Vec<Vec<usize>>,
    by_end: Vec<Vec<usize>>,
    keys: HashSet<EdgeKey>,
    next_id: u32,
    warnings: Vec<String>,
}

impl Chart {
    pub fn new(lattice: Lattice) -> Self {
        let n = lattice.n_vertices;
        Chart {
            lattice,
            edges: Vec::new(),
            by_start: vec![Vec::new(); n],
            by_end: vec![Vec::new(); n],
            keys: HashSet::new(),
            next_id: 0,
            warnings: Vec::new(),
        }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn n_vertices(&self) -> usize {
        self.lattice.n_vertices
    }

    pub fn source(&self) -> usize {
        self.lattice.source()
    }

    pub fn sink(&self) -> usize {
        self.lattice.sink()
    }

    pub fn edges(&self) -> &[ChartEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Positions (into [`Chart::edges`]) of edges ending at `v`.
    pub fn ending_at(&self, v: usize) -> &[usize] {
        &self.by_end[v]
    }

    /// Positions of edges starting at `v`.
    pub fn starting_at(&self, v: usize) -> &[usize] {
        &self.by_start[v]
    }

    pub fn count_kind(&self, kind: EdgeKind) -> usize {
        self.edges.iter().filter(|e| e.kind == kind).count()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub(crate) fn warn(&mut self, message: String) {
        self.warnings.push(message);
    }

    pub fn set_score(&mut self, pos: usize, score: f64) {
        self.edges[pos].score = score;
    }

    /// Adds a lexical edge, or raises the acoustic score of an identical one.
    pub fn add_lexical(
        &mut self,
        start: usize,
        end: usize,
        derivation: Arc<Derivation>,
        acoustic: f64,
    ) -> usize {
        let Derivation::Leaf { word, category, .. } = derivation.as_ref() else {
            panic!("lexical edge needs a leaf derivation");
        };
        let key = EdgeKey::Lexical(start, end, category.clone(), word.clone());
        if self.keys.contains(&key) {
            let pos = self.by_start[start]
                .iter()
                .copied()
                .find(|&p| {
                    let e = &self.edges[p];
                    e.end == end && e.kind == EdgeKind::Lexical && e.derivation == derivation
                })
                .expect("indexed lexical edge");
            let e = &mut self.edges[pos];
            e.acoustic = e.acoustic.max(acoustic);
            return pos;
        }
        self.keys.insert(key);
        let category = category.clone();
        self.push(ChartEdge {
            id: 0,
            start,
            end,
            category,
            kind: EdgeKind::Lexical,
            derivation,
            score: 1.0,
            acoustic,
            depth: 0,
        })
    }

    fn push(&mut self, mut edge: ChartEdge) -> usize {
        edge.id = self.next_id;
        self.next_id += 1;
        let pos = self.edges.len();
        self.by_start[edge.start].push(pos);
        self.by_end[edge.end].push(pos);
        self.edges.push(edge);
        pos
    }

    /// Keeps only edges for which `keep` holds; returns how many were removed.
    pub fn retain(&mut self, mut keep: impl FnMut(&ChartEdge) -> bool) -> usize {
        let before = self.edges.len();
        self.edges.retain(|e| keep(e));
        for list in self.by_start.iter_mut().chain(self.by_end.iter_mut()) {
            list.clear();
        }
        for (pos, e) in self.edges.iter().enumerate() {
            self.by_start[e.start].push(pos);
            self.by_end[e.end].push(pos);
        }
        before - self.edges.len()
    }

    /// Edges spanning the whole lattice.
    pub fn spanning(&self) -> impl Iterator<Item = &ChartEdge> {
        let sink = self.sink();
        self.by_start[self.source()]
            .iter()
            .map(|&p| &self.edges[p])
            .filter(move |e| e.end == sink)
    }
}

/// A rule set compiled for the chart engine, indexed by last rhs category.
#[derive(Clone, Debug)]
pub struct RuleSet {
    rules: Vec<ChartRule>,
    by_last: HashMap<CategoryTag, Vec<usize>>,
    kind: EdgeKind,
}

#[derive(Clone, Debug)]
struct ChartRule {
    id: Arc<str>,
    lhs: CategoryTag,
    rhs: Vec<CategoryTag>,
}

impl RuleSet {
    fn build<'a>(
        kind: EdgeKind,
        rules: impl Iterator<Item = (&'a Arc<str>, &'a CategoryTag, &'a [CategoryTag])>,
    ) -> Self {
        let rules: Vec<ChartRule> = rules
            .map(|(id, lhs, rhs)| ChartRule {
                id: id.clone(),
                lhs: lhs.clone(),
                rhs: rhs.to_vec(),
            })
            .collect();
        let mut by_last: HashMap<CategoryTag, Vec<usize>> = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            by_last
                .entry(r.rhs.last().expect("nonempty rhs").clone())
                .or_default()
                .push(i);
        }
        RuleSet {
            rules,
            by_last,
            kind,
        }
    }

    pub fn phrasal(grammar: &Grammar) -> Self {
        Self::build(
            EdgeKind::Phrasal,
            grammar
                .phrasal_rules()
                .map(|r| (&r.id, &r.lhs, r.rhs.as_slice())),
        )
    }

    pub fn nonphrasal(grammar: &Grammar) -> Self {
        Self::build(
            EdgeKind::Full,
            grammar
                .nonphrasal_rules()
                .map(|r| (&r.id, &r.lhs, r.rhs.as_slice())),
        )
    }

    pub fn macros(sg: &SpecializedGrammar) -> Self {
        Self::build(
            EdgeKind::Full,
            sg.macro_rules()
                .iter()
                .map(|m| (&m.id, &m.lhs, m.rhs.as_slice())),
        )
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PassLimits {
    pub max_depth: usize,
    pub timeout: Option<Duration>,
    pub deadline: Option<Instant>,
}

impl Default for PassLimits {
    fn default() -> Self {
        PassLimits {
            max_depth: DEFAULT_MAX_DEPTH,
            timeout: None,
            deadline: None,
        }
    }
}

impl PassLimits {
    /// Limits whose deadline starts counting now.
    pub fn with_timeout(timeout: Option<Duration>) -> Self {
        PassLimits {
            max_depth: DEFAULT_MAX_DEPTH,
            timeout,
            deadline: timeout.map(|t| Instant::now() + t),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PassStats {
    pub added: usize,
    /// Some combination was skipped for exceeding the depth cap.
    pub capped: bool,
}

/// Closes the chart under `rules`. Existing edges are never modified.
pub fn run_pass(chart: &mut Chart, rules: &RuleSet, limits: &PassLimits) -> Result<PassStats> {
    let mut stats = PassStats::default();
    let mut combos: Vec<Vec<usize>> = Vec::new();
    let mut chain: Vec<usize> = Vec::new();

    for v in 0..chart.n_vertices() {
        let mut initial: Vec<usize> = chart.by_end[v].clone();
        initial.sort_by_key(|&p| (std::cmp::Reverse(chart.edges[p].start), chart.edges[p].id));
        let mut queue: VecDeque<usize> = initial.into();

        while let Some(pos) = queue.pop_front() {
            if let Some(deadline) = limits.deadline {
                if Instant::now() >= deadline {
                    let secs = limits.timeout.unwrap_or_default().as_secs_f64();
                    return Err(Error::Timeout(secs));
                }
            }
            let Some(candidates) = rules.by_last.get(&chart.edges[pos].category) else {
                continue;
            };
            for &ri in candidates {
                let rule = &rules.rules[ri];
                combos.clear();
                chain.clear();
                chain.push(pos);
                collect_left(
                    chart,
                    &rule.rhs[..rule.rhs.len() - 1],
                    chart.edges[pos].start,
                    &mut chain,
                    &mut combos,
                );
                for combo in combos.drain(..) {
                    // combo lists children right to left
                    let children: Vec<usize> = combo.into_iter().rev().collect();
                    let depth = 1 + children
                        .iter()
                        .map(|&c| chart.edges[c].depth)
                        .max()
                        .unwrap_or(0);
                    if depth > limits.max_depth {
                        stats.capped = true;
                        continue;
                    }
                    let ids: Vec<u32> = children.iter().map(|&c| chart.edges[c].id).collect();
                    let key = EdgeKey::Rule(rule.id.clone(), ids);
                    if !chart.keys.insert(key) {
                        continue;
                    }
                    let first = &chart.edges[children[0]];
                    let start = first.start;
                    let mut score = f64::INFINITY;
                    let mut acoustic = f64::INFINITY;
                    let mut kids = Vec::with_capacity(children.len());
                    for &c in &children {
                        let e = &chart.edges[c];
                        score = score.min(e.score);
                        acoustic = acoustic.min(e.acoustic);
                        kids.push(e.derivation.clone());
                    }
                    let derivation = Arc::new(Derivation::Node {
                        rule: rule.id.clone(),
                        category: rule.lhs.clone(),
                        children: kids,
                    });
                    let new_pos = chart.push(ChartEdge {
                        id: 0,
                        start,
                        end: v,
                        category: rule.lhs.clone(),
                        kind: rules.kind,
                        derivation,
                        score,
                        acoustic,
                        depth,
                    });
                    stats.added += 1;
                    queue.push_back(new_pos);
                }
            }
        }
    }
    Ok(stats)
}

/// Extends `chain` leftwards through edges matching `rhs` (read right to
/// left), ending at vertex `at`, and records each complete chain.
fn collect_left(
    chart: &Chart,
    rhs: &[CategoryTag],
    at: usize,
    chain: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    let Some((want, rest)) = rhs.split_last() else {
        out.push(chain.clone());
        return;
    };
    for &p in &chart.by_end[at] {
        let e = &chart.edges[p];
        if &e.category == want {
            chain.push(p);
            collect_left(chart, rest, e.start, chain, out);
            chain.pop();
        }
    }
}

/// Hypothesizes a lexical edge for every lexicon entry matching a run of
/// consecutive lattice words. Words with no entry are reported as warnings.
pub fn lexical_pass(lattice: &Lattice, grammar: &Grammar) -> Result<Chart> {
    lattice.validate()?;
    let mut chart = Chart::new(lattice.clone());
    let lexicon = grammar.lexicon();
    let max_tokens = lexicon.max_tokens().max(1);

    let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); lattice.n_vertices];
    for (i, e) in lattice.edges.iter().enumerate() {
        out_edges[e.from].push(i);
    }
    let mut covered = vec![false; lattice.edges.len()];

    // (end vertex, words so far, min confidence, word edges used)
    let mut stack: Vec<(usize, String, f64, Vec<usize>)> = Vec::new();
    for start in 0..lattice.n_vertices {
        stack.clear();
        for &i in &out_edges[start] {
            let e = &lattice.edges[i];
            stack.push((e.to, e.word.clone(), e.conf, vec![i]));
        }
        while let Some((end, surface, conf, used)) = stack.pop() {
            let entries = lexicon.lookup(&surface);
            if !entries.is_empty() {
                for entry in entries {
                    let leaf =
                        Derivation::leaf(&surface, entry.category.clone(), &entry.word_class);
                    chart.add_lexical(start, end, leaf, conf);
                }
                for &i in &used {
                    covered[i] = true;
                }
            }
            if used.len() < max_tokens {
                for &i in &out_edges[end] {
                    let e = &lattice.edges[i];
                    let mut used = used.clone();
                    used.push(i);
                    stack.push((
                        e.to,
                        format!("{surface} {}", e.word),
                        conf.min(e.conf),
                        used,
                    ));
                }
            }
        }
    }
    // stable edge order: by start, end, category, word
    let mut edges = std::mem::take(&mut chart.edges);
    edges.sort_by(|a, b| {
        (a.start, a.end, &a.category, &a.derivation).cmp(&(
            b.start,
            b.end,
            &b.category,
            &b.derivation,
        ))
    });
    let mut sorted = Chart::new(lattice.clone());
    sorted.keys = std::mem::take(&mut chart.keys);
    for e in edges {
        sorted.push(e);
    }
    for (i, e) in lattice.edges.iter().enumerate() {
        if !covered[i] {
            sorted.warn(format!(
                "no lexical entry covers `{}` at {}-{}",
                e.word, e.from, e.to
            ));
        }
    }
    Ok(sorted)
}

/// Adds every edge derivable with the phrasal rules.
pub fn phrasal_pass(chart: &mut Chart, grammar: &Grammar) -> PassStats {
    phrasal_pass_with(
        chart,
        &RuleSet::phrasal(grammar),
        grammar.phrasal_rules_recursive(),
    )
}

pub fn phrasal_pass_with(chart: &mut Chart, rules: &RuleSet, recursive: bool) -> PassStats {
    let stats = run_pass(chart, rules, &PassLimits::default()).expect("no deadline set");
    if recursive && stats.capped {
        chart.warn(format!(
            "phrasal pass capped at derivation depth {DEFAULT_MAX_DEPTH}"
        ));
    }
    stats
}

/// A complete parse of a lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct Analysis {
    /// Derivation under the original grammar.
    pub derivation: Arc<Derivation>,
    pub category: CategoryTag,
    pub score: f64,
}

/// The rule set driving the full pass.
#[derive(Clone, Copy, Debug)]
pub enum FullRules<'a> {
    Original(&'a Grammar),
    Specialized(&'a SpecializedGrammar),
}

impl FullRules<'_> {
    pub fn compile(&self) -> RuleSet {
        match self {
            FullRules::Original(g) => RuleSet::nonphrasal(g),
            FullRules::Specialized(sg) => RuleSet::macros(sg),
        }
    }

    fn start_categories(&self) -> &BTreeSet<CategoryTag> {
        match self {
            FullRules::Original(g) => g.start_categories(),
            FullRules::Specialized(sg) => sg.start_categories(),
        }
    }
}

/// Searches for complete analyses. Specialized derivations are returned
/// expanded into the original grammar.
pub fn full_pass(
    chart: &mut Chart,
    rules: FullRules<'_>,
    timeout: Option<Duration>,
) -> Result<Vec<Analysis>> {
    let compiled = rules.compile();
    full_pass_with(chart, rules, &compiled, &PassLimits::with_timeout(timeout))
}

pub fn full_pass_with(
    chart: &mut Chart,
    rules: FullRules<'_>,
    compiled: &RuleSet,
    limits: &PassLimits,
) -> Result<Vec<Analysis>> {
    run_pass(chart, compiled, limits)?;
    collect_analyses(chart, rules)
}

/// Complete analyses in the chart: spanning edges with a start category,
/// deduplicated on derivation, ordered by score then derivation.
pub fn collect_analyses(chart: &Chart, rules: FullRules<'_>) -> Result<Vec<Analysis>> {
    let start = rules.start_categories();
    let mut best: HashMap<Arc<Derivation>, f64> = HashMap::new();
    for e in chart.spanning().filter(|e| start.contains(&e.category)) {
        let derivation = match rules {
            FullRules::Original(_) => e.derivation.clone(),
            FullRules::Specialized(sg) => expand_specialized_derivation(&e.derivation, sg)?,
        };
        let slot = best.entry(derivation).or_insert(e.score);
        *slot = slot.max(e.score);
    }
    let mut out: Vec<Analysis> = best
        .into_iter()
        .map(|(derivation, score)| Analysis {
            category: derivation.category().clone(),
            derivation,
            score,
        })
        .collect();
    out.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.derivation.cmp(&b.derivation))
    });
    Ok(out)
}
