//! End-to-end parsing, training, and evaluation.

use std::collections::{BTreeSet, HashSet};
use std::fmt::{self, Write as _};
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::chart::{
    collect_analyses, lexical_pass, phrasal_pass_with, run_pass, Analysis, Chart, FullRules,
    PassLimits, RuleSet,
};
use crate::corpus::CorpusEntry;
use crate::derivation::Derivation;
use crate::ebl::{check_specialized, chunk_derivation, synthesize, CheckReport, ChunkScheme};
use crate::error::{Error, Result};
use crate::grammar::Grammar;
use crate::lattice::Lattice;
use crate::pruner::{observe, prune_with_model, GoldConstituents, PruneModel, PruneParams};
use crate::specialized::SpecializedGrammar;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(90);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParseOptions {
    pub prune: bool,
    /// Use the specialized grammar in the full pass.
    pub specialized: bool,
    pub fraction_phase1: f64,
    pub fraction_phase2: f64,
    pub timeout: Option<Duration>,
}

impl Default for ParseOptions {
    fn default() -> Self {
        let p = PruneParams::default();
        ParseOptions {
            prune: false,
            specialized: false,
            fraction_phase1: p.fraction_phase1,
            fraction_phase2: p.fraction_phase2,
            timeout: Some(DEFAULT_TIMEOUT),
        }
    }
}

impl ParseOptions {
    pub fn variant(variant: Variant) -> Self {
        ParseOptions {
            prune: variant.prune,
            specialized: variant.specialized,
            ..ParseOptions::default()
        }
    }
}

/// Wall-clock time spent in each phase of one parse.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseTimings {
    pub lexical: Duration,
    pub prune1: Duration,
    pub phrasal: Duration,
    pub prune2: Duration,
    pub full: Duration,
}

impl PhaseTimings {
    pub fn total(&self) -> Duration {
        self.lexical + self.prune1 + self.phrasal + self.prune2 + self.full
    }

    pub fn pruning(&self) -> Duration {
        self.prune1 + self.prune2
    }

    fn add(&mut self, o: &PhaseTimings) {
        self.lexical += o.lexical;
        self.prune1 += o.prune1;
        self.phrasal += o.phrasal;
        self.prune2 += o.prune2;
        self.full += o.full;
    }
}

/// Chart size after each phase.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EdgeCounts {
    pub lexical: usize,
    pub after_prune1: usize,
    pub phrasal: usize,
    pub after_prune2: usize,
    pub full: usize,
}

#[derive(Clone, Debug)]
pub struct ParseOutcome {
    /// Analyses in the original grammar, best first. Empty on timeout.
    pub analyses: Vec<Analysis>,
    pub timed_out: bool,
    pub timings: PhaseTimings,
    pub edges: EdgeCounts,
    pub warnings: Vec<String>,
}

impl ParseOutcome {
    pub fn contains(&self, tree: &Derivation) -> bool {
        self.analyses.iter().any(|a| a.derivation.as_ref() == tree)
    }
}

/// Grammar, model and specialized grammar compiled for repeated parsing.
pub struct Parser<'a> {
    grammar: &'a Grammar,
    model: Option<&'a PruneModel>,
    specialized: Option<&'a SpecializedGrammar>,
    phrasal: RuleSet,
    phrasal_recursive: bool,
    nonphrasal: RuleSet,
    macros: Option<RuleSet>,
}

impl<'a> Parser<'a> {
    pub fn new(
        grammar: &'a Grammar,
        model: Option<&'a PruneModel>,
        specialized: Option<&'a SpecializedGrammar>,
    ) -> Result<Self> {
        if let Some(sg) = specialized {
            if sg.source_grammar_id() != grammar.checksum() {
                return Err(Error::GrammarMismatch {
                    expected: sg.source_grammar_id().to_string(),
                    found: grammar.checksum(),
                });
            }
        }
        Ok(Parser {
            grammar,
            model,
            specialized,
            phrasal: RuleSet::phrasal(grammar),
            phrasal_recursive: grammar.phrasal_rules_recursive(),
            nonphrasal: RuleSet::nonphrasal(grammar),
            macros: specialized.map(RuleSet::macros),
        })
    }

    pub fn grammar(&self) -> &Grammar {
        self.grammar
    }

    /// Parses a lattice through all phases.
    pub fn parse(&self, lattice: &Lattice, opts: &ParseOptions) -> Result<ParseOutcome> {
        let model = match (opts.prune, self.model) {
            (true, None) => return Err(Error::Config("pruning requested without a model".into())),
            (true, Some(m)) => Some(m),
            (false, _) => None,
        };
        let (rules, compiled) = match (opts.specialized, self.specialized, &self.macros) {
            (true, Some(sg), Some(m)) => (FullRules::Specialized(sg), m),
            (true, _, _) => {
                return Err(Error::Config(
                    "specialized parsing requested without a specialized grammar".into(),
                ))
            }
            (false, _, _) => (FullRules::Original(self.grammar), &self.nonphrasal),
        };
        for f in [opts.fraction_phase1, opts.fraction_phase2] {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::Config(format!("fraction {f} outside (0, 1)")));
            }
        }

        let limits = PassLimits::with_timeout(opts.timeout);
        let mut timings = PhaseTimings::default();
        let mut edges = EdgeCounts::default();
        let expired = || limits.deadline.is_some_and(|d| Instant::now() >= d);

        let t = Instant::now();
        let mut chart = lexical_pass(lattice, self.grammar)?;
        timings.lexical = t.elapsed();
        edges.lexical = chart.len();

        if let Some(m) = model {
            let t = Instant::now();
            prune_with_model(&mut chart, m, opts.fraction_phase1);
            timings.prune1 = t.elapsed();
        }
        edges.after_prune1 = chart.len();

        let t = Instant::now();
        phrasal_pass_with(&mut chart, &self.phrasal, self.phrasal_recursive);
        timings.phrasal = t.elapsed();
        edges.phrasal = chart.len();

        if let Some(m) = model {
            let t = Instant::now();
            prune_with_model(&mut chart, m, opts.fraction_phase2);
            timings.prune2 = t.elapsed();
        }
        edges.after_prune2 = chart.len();

        let timed_out = |chart: Chart, timings, edges| ParseOutcome {
            analyses: Vec::new(),
            timed_out: true,
            timings,
            edges,
            warnings: chart.warnings().to_vec(),
        };
        if expired() {
            return Ok(timed_out(chart, timings, edges));
        }
        let t = Instant::now();
        let pass = run_pass(&mut chart, compiled, &limits);
        timings.full = t.elapsed();
        edges.full = chart.len();
        match pass {
            Ok(_) => {}
            Err(Error::Timeout(_)) => return Ok(timed_out(chart, timings, edges)),
            Err(e) => return Err(e),
        }
        let analyses = collect_analyses(&chart, rules)?;
        Ok(ParseOutcome {
            analyses,
            timed_out: false,
            timings,
            edges,
            warnings: chart.warnings().to_vec(),
        })
    }
}

/// Parses one lattice; see [`Parser::parse`].
pub fn parse(
    lattice: &Lattice,
    grammar: &Grammar,
    specialized: Option<&SpecializedGrammar>,
    model: Option<&PruneModel>,
    opts: &ParseOptions,
) -> Result<ParseOutcome> {
    Parser::new(grammar, model, specialized)?.parse(lattice, opts)
}

// ---------------------------------------------------------------------------
// Training

#[derive(Clone, Debug)]
pub struct TrainReport {
    pub utterances: usize,
    pub chunks: usize,
    /// Utterances whose gold derivation the parser cannot rebuild.
    pub irreproducible: Vec<String>,
    /// Notes from chunk classification.
    pub notes: Vec<String>,
    pub check: CheckReport,
}

impl fmt::Display for TrainReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "utterances {}", self.utterances)?;
        writeln!(f, "chunks {}", self.chunks)?;
        writeln!(f, "macro_rules {}", self.check.macro_rules)?;
        for (t, n) in &self.check.counts_by_type {
            writeln!(f, "macro_rules.{t} {n}")?;
        }
        writeln!(f, "type_graph_acyclic {}", self.check.type_graph_acyclic)?;
        writeln!(
            f,
            "category_graph_acyclic {}",
            self.check.category_graph_acyclic
        )?;
        match self.check.depth {
            Some(d) => writeln!(f, "depth {d}")?,
            None => writeln!(f, "depth unbounded")?,
        }
        writeln!(
            f,
            "phrasal_in_templates {}",
            self.check.phrasal_in_templates
        )?;
        for p in &self.check.problems {
            writeln!(f, "problem {p}")?;
        }
        writeln!(f, "irreproducible {}", self.irreproducible.len())?;
        for id in &self.irreproducible {
            writeln!(f, "irreproducible.id {id}")?;
        }
        for n in &self.notes {
            writeln!(f, "note {n}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Trained {
    pub model: PruneModel,
    pub specialized: SpecializedGrammar,
    pub report: TrainReport,
}

fn is_pure_phrasal(d: &Derivation, grammar: &Grammar) -> bool {
    match d {
        Derivation::Leaf { .. } => true,
        Derivation::Node { rule, children, .. } => {
            grammar.rule(rule).is_some_and(|r| r.is_phrasal())
                && children.iter().all(|c| is_pure_phrasal(c, grammar))
        }
    }
}

/// Collects pruning counts from a treebank. Returns the model and the ids
/// of utterances whose gold phrasal constituents are not all in the chart.
pub fn train_model(
    grammar: &Grammar,
    corpus: &[CorpusEntry],
    params: PruneParams,
) -> Result<(PruneModel, Vec<String>)> {
    params.validate()?;
    let mut model = PruneModel::new(params);
    let phrasal = RuleSet::phrasal(grammar);
    let recursive = grammar.phrasal_rules_recursive();
    let mut irreproducible = Vec::new();
    for entry in corpus {
        let lattice = Lattice::from_text(&entry.id, &entry.sentence)?;
        let mut chart = lexical_pass(&lattice, grammar)?;
        let gold = GoldConstituents::locate(&chart, &entry.tree, grammar)?;
        observe(&chart, &gold, &mut model);
        phrasal_pass_with(&mut chart, &phrasal, recursive);
        observe(&chart, &gold, &mut model);
        model.utterances += 1;

        let built: HashSet<(usize, usize, &Arc<Derivation>)> = chart
            .edges()
            .iter()
            .map(|e| (e.start, e.end, &e.derivation))
            .collect();
        let complete = gold
            .iter()
            .filter(|(_, _, d)| is_pure_phrasal(d, grammar))
            .all(|span| built.contains(&span));
        if !complete || any_mixed(&entry.tree, grammar) {
            irreproducible.push(entry.id.clone());
        }
    }
    Ok((model, irreproducible))
}

/// Some phrasal rule application has nonphrasal material below it.
fn any_mixed(d: &Derivation, grammar: &Grammar) -> bool {
    let phrasal = d
        .rule_id()
        .and_then(|r| grammar.rule(r))
        .is_some_and(|r| r.is_phrasal());
    (phrasal && !is_pure_phrasal(d, grammar)) || d.children().iter().any(|c| any_mixed(c, grammar))
}

/// Learns a specialized grammar from a treebank.
pub fn specialize(
    grammar: &Grammar,
    corpus: &[CorpusEntry],
    scheme: ChunkScheme,
) -> Result<(SpecializedGrammar, usize, Vec<String>)> {
    let mut chunks = Vec::new();
    let mut notes = Vec::new();
    for entry in corpus {
        let (c, n) = chunk_derivation(&entry.tree, grammar, scheme)?;
        chunks.extend(c);
        notes.extend(n.into_iter().map(|n| format!("{}: {n}", entry.id)));
    }
    let sg = synthesize(&chunks, grammar, scheme)?;
    Ok((sg, chunks.len(), notes))
}

/// Trains the pruning model and the specialized grammar on one treebank.
pub fn train(
    grammar: &Grammar,
    corpus: &[CorpusEntry],
    scheme: ChunkScheme,
    params: PruneParams,
) -> Result<Trained> {
    let (model, irreproducible) = train_model(grammar, corpus, params)?;
    let (specialized, chunks, notes) = specialize(grammar, corpus, scheme)?;
    let check = check_specialized(&specialized, grammar);
    Ok(Trained {
        model,
        specialized,
        report: TrainReport {
            utterances: corpus.len(),
            chunks,
            irreproducible,
            notes,
            check,
        },
    })
}

// ---------------------------------------------------------------------------
// Evaluation

/// A parser configuration: specialized grammar or not (E), pruning or not (P).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variant {
    pub specialized: bool,
    pub prune: bool,
}

impl Variant {
    pub const BASELINE: Variant = Variant {
        specialized: false,
        prune: false,
    };

    pub const ALL: [Variant; 4] = [
        Variant::BASELINE,
        Variant {
            specialized: true,
            prune: false,
        },
        Variant {
            specialized: false,
            prune: true,
        },
        Variant {
            specialized: true,
            prune: true,
        },
    ];

    pub fn name(self) -> String {
        let sign = |b: bool| if b { '+' } else { '-' };
        format!("E{}P{}", sign(self.specialized), sign(self.prune))
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Variant::ALL.into_iter().find(|v| v.name() == s)
    }

    /// Parses `all` or a comma-separated list of names.
    pub fn parse_list(s: &str) -> Result<Vec<Variant>> {
        if s == "all" {
            return Ok(Variant::ALL.to_vec());
        }
        let mut out = BTreeSet::new();
        for name in s.split(',') {
            out.insert(Variant::from_name(name.trim()).ok_or_else(|| {
                Error::Config(format!(
                    "unknown variant `{name}`; expected one of E-P-, E+P-, E-P+, E+P+ or all"
                ))
            })?);
        }
        Ok(out.into_iter().collect())
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UtteranceRecord {
    pub id: String,
    pub variant: Variant,
    pub analyses: usize,
    pub gold_found: bool,
    pub timed_out: bool,
    pub timings: PhaseTimings,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariantSummary {
    pub variant: Variant,
    pub utterances: usize,
    /// Utterances with at least one analysis.
    pub parsed: usize,
    pub gold_found: usize,
    pub timeouts: usize,
    pub total_analyses: usize,
    /// Summed over utterances.
    pub timings: PhaseTimings,
    /// Among utterances whose gold the baseline finds, the fraction this
    /// variant misses. `None` without a baseline run.
    pub coverage_loss: Option<f64>,
}

impl VariantSummary {
    pub fn mean_analyses(&self) -> f64 {
        self.total_analyses as f64 / self.utterances.max(1) as f64
    }

    pub fn coverage(&self) -> f64 {
        self.gold_found as f64 / self.utterances.max(1) as f64
    }

    pub fn mean_time(&self, d: Duration) -> f64 {
        d.as_secs_f64() * 1000.0 / self.utterances.max(1) as f64
    }
}

#[derive(Clone, Debug)]
pub struct EvalOptions {
    pub fraction_phase1: f64,
    pub fraction_phase2: f64,
    pub timeout: Option<Duration>,
    /// Utterances parsed once per variant before timing starts.
    pub warmup: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        let p = PruneParams::default();
        EvalOptions {
            fraction_phase1: p.fraction_phase1,
            fraction_phase2: p.fraction_phase2,
            timeout: Some(DEFAULT_TIMEOUT),
            warmup: 10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EvalReport {
    pub records: Vec<UtteranceRecord>,
    pub summaries: Vec<VariantSummary>,
}

impl EvalReport {
    pub fn summary(&self, v: Variant) -> Option<&VariantSummary> {
        self.summaries.iter().find(|s| s.variant == v)
    }

    /// Per-phase mean times in milliseconds, one column per variant.
    pub fn timing_table(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<18}", "ms / utterance");
        for s in &self.summaries {
            let _ = write!(out, "{:>10}", s.variant.name());
        }
        out.push('\n');
        type Row = (&'static str, fn(&PhaseTimings) -> Duration);
        let rows: [Row; 5] = [
            ("Lexical lookup", |t| t.lexical),
            ("Phrasal parsing", |t| t.phrasal),
            ("Pruning", |t| t.pruning()),
            ("Full parsing", |t| t.full),
            ("TOTAL", |t| t.total()),
        ];
        for (label, get) in rows {
            let _ = write!(out, "{label:<18}");
            for s in &self.summaries {
                let _ = write!(out, "{:>10.3}", s.mean_time(get(&s.timings)));
            }
            out.push('\n');
        }
        out
    }

    /// Coverage and ambiguity per variant. Contains no timings, so it is
    /// identical across runs.
    pub fn coverage_table(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<18}", "");
        for s in &self.summaries {
            let _ = write!(out, "{:>10}", s.variant.name());
        }
        out.push('\n');
        type Row = (&'static str, fn(&VariantSummary) -> String);
        let rows: [Row; 4] = [
            ("Coverage", |s| format!("{:.1}%", 100.0 * s.coverage())),
            ("Coverage loss", |s| match s.coverage_loss {
                Some(l) => format!("{:.1}%", 100.0 * l),
                None => "n/a".into(),
            }),
            ("Mean analyses", |s| format!("{:.2}", s.mean_analyses())),
            ("Timeouts", |s| s.timeouts.to_string()),
        ];
        for (label, get) in rows {
            let _ = write!(out, "{label:<18}");
            for s in &self.summaries {
                let _ = write!(out, "{:>10}", get(s));
            }
            out.push('\n');
        }
        out
    }

    /// Machine-readable per-utterance results, without timings.
    pub fn records_text(&self) -> String {
        let mut out = String::new();
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "summary variant={} utterances={} parsed={} gold_found={} timeouts={} analyses={} coverage_loss={}",
                s.variant,
                s.utterances,
                s.parsed,
                s.gold_found,
                s.timeouts,
                s.total_analyses,
                s.coverage_loss.map_or("n/a".to_string(), |l| format!("{l:.6}")),
            );
        }
        for r in &self.records {
            let _ = writeln!(
                out,
                "utterance variant={} id={} analyses={} gold_found={} timeout={}",
                r.variant, r.id, r.analyses, r.gold_found as u8, r.timed_out as u8
            );
        }
        out
    }

    /// Per-utterance phase timings in milliseconds.
    pub fn timings_text(&self) -> String {
        let mut out = String::from("variant id lexical prune1 phrasal prune2 full total\n");
        let ms = |d: Duration| d.as_secs_f64() * 1000.0;
        for r in &self.records {
            let t = &r.timings;
            let _ = writeln!(
                out,
                "{} {} {:.4} {:.4} {:.4} {:.4} {:.4} {:.4}",
                r.variant,
                r.id,
                ms(t.lexical),
                ms(t.prune1),
                ms(t.phrasal),
                ms(t.prune2),
                ms(t.full),
                ms(t.total())
            );
        }
        out
    }
}

/// Parses every test utterance with every variant. Variants run one after
/// another over the whole test set, each preceded by an untimed warm-up.
pub fn evaluate(
    grammar: &Grammar,
    model: Option<&PruneModel>,
    specialized: Option<&SpecializedGrammar>,
    test: &[CorpusEntry],
    variants: &[Variant],
    opts: &EvalOptions,
) -> Result<EvalReport> {
    let parser = Parser::new(grammar, model, specialized)?;
    let lattices = test
        .iter()
        .map(|e| Lattice::from_text(&e.id, &e.sentence))
        .collect::<Result<Vec<_>>>()?;
    let mut records = Vec::new();
    let mut summaries = Vec::new();
    for &variant in variants {
        let popts = ParseOptions {
            prune: variant.prune,
            specialized: variant.specialized,
            fraction_phase1: opts.fraction_phase1,
            fraction_phase2: opts.fraction_phase2,
            timeout: opts.timeout,
        };
        for l in lattices.iter().take(opts.warmup) {
            parser.parse(l, &popts)?;
        }
        let mut s = VariantSummary {
            variant,
            utterances: test.len(),
            parsed: 0,
            gold_found: 0,
            timeouts: 0,
            total_analyses: 0,
            timings: PhaseTimings::default(),
            coverage_loss: None,
        };
        for (entry, lattice) in test.iter().zip(&lattices) {
            let out = parser.parse(lattice, &popts)?;
            let gold_found = out.contains(&entry.tree);
            s.parsed += !out.analyses.is_empty() as usize;
            s.gold_found += gold_found as usize;
            s.timeouts += out.timed_out as usize;
            s.total_analyses += out.analyses.len();
            s.timings.add(&out.timings);
            records.push(UtteranceRecord {
                id: entry.id.clone(),
                variant,
                analyses: out.analyses.len(),
                gold_found,
                timed_out: out.timed_out,
                timings: out.timings,
            });
        }
        summaries.push(s);
    }
    if variants.contains(&Variant::BASELINE) {
        let found = |v: Variant| -> Vec<bool> {
            records
                .iter()
                .filter(|r| r.variant == v)
                .map(|r| r.gold_found)
                .collect()
        };
        let base = found(Variant::BASELINE);
        for s in &mut summaries {
            s.coverage_loss = Some(coverage_loss(&base, &found(s.variant)));
        }
    }
    Ok(EvalReport { records, summaries })
}

/// Among utterances found by `base`, the fraction not found by `other`.
pub fn coverage_loss(base: &[bool], other: &[bool]) -> f64 {
    let denom = base.iter().filter(|&&b| b).count();
    if denom == 0 {
        return 0.0;
    }
    let lost = base.iter().zip(other).filter(|(&b, &o)| b && !o).count();
    lost as f64 / denom as f64
}

/// Whether each test utterance's gold derivation is found, parsing without
/// pruning with the original grammar or a specialized one.
pub fn gold_found(
    grammar: &Grammar,
    specialized: Option<&SpecializedGrammar>,
    test: &[CorpusEntry],
    timeout: Option<Duration>,
) -> Result<Vec<bool>> {
    let parser = Parser::new(grammar, None, specialized)?;
    let opts = ParseOptions {
        specialized: specialized.is_some(),
        timeout,
        ..ParseOptions::default()
    };
    test.iter()
        .map(|e| {
            let lattice = Lattice::from_text(&e.id, &e.sentence)?;
            Ok(parser.parse(&lattice, &opts)?.contains(&e.tree))
        })
        .collect()
}

/// One point of a learning curve.
#[derive(Clone, Debug)]
pub struct CurvePoint {
    pub training_size: usize,
    pub scheme: ChunkScheme,
    pub macro_rules: usize,
    pub coverage_loss: f64,
    pub check: CheckReport,
}

/// Specializes on growing prefixes of `train` and measures coverage loss on
/// `test` against the original grammar.
pub fn coverage_curve(
    grammar: &Grammar,
    train: &[CorpusEntry],
    sizes: &[usize],
    test: &[CorpusEntry],
    schemes: &[ChunkScheme],
    timeout: Option<Duration>,
) -> Result<Vec<CurvePoint>> {
    let base = gold_found(grammar, None, test, timeout)?;
    let mut out = Vec::new();
    for &size in sizes {
        if size > train.len() {
            return Err(Error::Config(format!(
                "training size {size} exceeds corpus size {}",
                train.len()
            )));
        }
        for &scheme in schemes {
            let (sg, _, _) = specialize(grammar, &train[..size], scheme)?;
            let found = gold_found(grammar, Some(&sg), test, timeout)?;
            out.push(CurvePoint {
                training_size: size,
                scheme,
                macro_rules: sg.len(),
                coverage_loss: coverage_loss(&base, &found),
                check: check_specialized(&sg, grammar),
            });
        }
    }
    Ok(out)
}

/// Formats a learning curve as rows of size, then rule count and coverage
/// loss per scheme.
pub fn curve_table(points: &[CurvePoint]) -> String {
    let schemes: BTreeSet<ChunkScheme> = points.iter().map(|p| p.scheme).collect();
    let sizes: BTreeSet<usize> = points.iter().map(|p| p.training_size).collect();
    let mut out = String::new();
    let _ = write!(out, "{:>8}", "size");
    for s in &schemes {
        let _ = write!(
            out,
            "{:>12}{:>12}",
            format!("{s} rules"),
            format!("{s} loss")
        );
    }
    out.push('\n');
    for size in sizes {
        let _ = write!(out, "{size:>8}");
        for s in &schemes {
            match points
                .iter()
                .find(|p| p.training_size == size && p.scheme == *s)
            {
                Some(p) => {
                    let _ = write!(
                        out,
                        "{:>12}{:>11.1}%",
                        p.macro_rules,
                        100.0 * p.coverage_loss
                    );
                }
                None => {
                    let _ = write!(out, "{:>12}{:>12}", "-", "-");
                }
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{gen_corpus, DEFAULT_MAX_DEPTH};
    use crate::toy::air_travel;

    #[test]
    fn variant_names() {
        let names: Vec<String> = Variant::ALL.iter().map(|v| v.name()).collect();
        assert_eq!(names, ["E-P-", "E+P-", "E-P+", "E+P+"]);
        assert_eq!(
            Variant::parse_list("E+P+,E-P-").unwrap(),
            vec![Variant::BASELINE, Variant::ALL[3]]
        );
        assert!(Variant::parse_list("E+").is_err());
    }

    #[test]
    fn coverage_loss_counts_only_baseline_hits() {
        assert_eq!(
            coverage_loss(&[true, true, false, true], &[true, false, true, true]),
            1.0 / 3.0
        );
        assert_eq!(coverage_loss(&[false], &[false]), 0.0);
    }

    #[test]
    fn prune_needs_model() {
        let g = air_travel();
        let l = Lattice::from_text("t", "show flights to boston").unwrap();
        let opts = ParseOptions {
            prune: true,
            ..ParseOptions::default()
        };
        assert!(matches!(
            parse(&l, &g, None, None, &opts),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn gold_trees_are_recovered() {
        let g = air_travel();
        let corpus = gen_corpus(&g, 20, 11, DEFAULT_MAX_DEPTH).unwrap();
        let found = gold_found(&g, None, &corpus, None).unwrap();
        assert!(found.iter().all(|&f| f));
        let trained = train(&g, &corpus, ChunkScheme::New, PruneParams::default()).unwrap();
        assert!(trained.report.irreproducible.is_empty());
        // the specialized grammar covers its own training set
        let found = gold_found(&g, Some(&trained.specialized), &corpus, None).unwrap();
        assert!(found.iter().all(|&f| f));
    }
}
