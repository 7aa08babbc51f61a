//! Acceptance suite on the bundled grammar. Prints one PASS or FAIL line per
//! criterion and exits nonzero if any fails.

mod common;

use std::collections::BTreeSet;
use std::process::{Command, ExitCode};

use common::{
    all_paths, best_path_edges, brute_force_vertex_scores, chart_with, enumerate_derivations,
    random_edges, random_grammar_text,
};
use gspec::chart::{full_pass, lexical_pass, phrasal_pass, FullRules};
use gspec::corpus::{gen_corpus, CorpusEntry, DEFAULT_MAX_DEPTH};
use gspec::derivation::validate_derivation;
use gspec::pipeline::{
    self, coverage_curve, curve_table, EvalOptions, EvalReport, ParseOptions, Parser, Variant,
};
use gspec::pruner::{prune, vertex_best_path_scores, PruneParams};
use gspec::toy::air_travel;
use gspec::{ChunkScheme, Grammar, Lattice};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TRAIN_SEED: u64 = 42;
const TEST_SEED: u64 = 4242;
const TRAIN_SIZE: usize = 1000;
const TEST_SIZE: usize = 200;
const SIZES: [usize; 4] = [100, 250, 500, 1000];
const RANDOM_CHARTS: usize = 500;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type EdgeList = Vec<(usize, usize, f64)>;

fn random_charts() -> Vec<(usize, EdgeList)> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    (0..RANDOM_CHARTS)
        .map(|_| random_edges(&mut rng, 8, 20))
        .collect()
}

fn maximin_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let mut with_path = 0;
    for (n, edges) in random_charts() {
        let got = vertex_best_path_scores(&chart_with(n, &edges));
        let want = brute_force_vertex_scores(n, &edges);
        for (a, b) in got.iter().zip(&want) {
            worst = worst.max((a - b).abs());
        }
        with_path += !all_paths(n, &edges).is_empty() as usize;
    }
    outcome(
        worst <= 1e-12,
        format!(
            "{RANDOM_CHARTS} charts ({with_path} with a complete path), max deviation {worst:e}"
        ),
    )
}

fn survivor_guarantee() -> Outcome {
    let mut violations = 0;
    let mut checked = 0;
    for (n, edges) in random_charts() {
        let protected = best_path_edges(n, &edges);
        for fraction in [1.0 / 20.0, 1.0 / 150.0, 0.999] {
            let mut chart = chart_with(n, &edges);
            prune(&mut chart, fraction);
            let kept: BTreeSet<String> = chart
                .edges()
                .iter()
                .map(|e| e.derivation.leaves()[0].to_string())
                .collect();
            for i in &protected {
                checked += 1;
                violations += !kept.contains(&format!("e{i}")) as usize;
            }
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations over {checked} best-path edge checks"),
    )
}

fn soundness(g: &Grammar, trained: &pipeline::Trained, test: &[CorpusEntry]) -> Outcome {
    let parser = Parser::new(g, None, Some(&trained.specialized)).unwrap();
    let opts = ParseOptions {
        specialized: true,
        ..ParseOptions::default()
    };
    let (mut total, mut bad) = (0, 0);
    for e in test {
        let lattice = Lattice::from_text(&e.id, &e.sentence).unwrap();
        for a in parser.parse(&lattice, &opts).unwrap().analyses {
            total += 1;
            if !validate_derivation(&a.derivation, g).is_ok()
                || a.derivation.sentence() != e.sentence
            {
                bad += 1;
            }
        }
    }
    outcome(
        bad == 0 && total > 0,
        format!("{total} specialized analyses, {bad} invalid or with a different yield"),
    )
}

fn small_parser_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut mismatches, mut nonempty, mut analyses) = (0, 0, 0);
    let cases = 500;
    for _ in 0..cases {
        let g = Grammar::parse(&random_grammar_text(&mut rng, 9)).unwrap();
        assert!(g.rules().len() <= 10);
        // retry a few sentences so that most cases have some analysis
        let mut words: Vec<&str> = Vec::new();
        for _ in 0..20 {
            let len = rng.gen_range(1..=5);
            words = (0..len)
                .map(|_| if rng.gen_bool(0.5) { "a" } else { "b" })
                .collect();
            if !enumerate_derivations(&g, &words).is_empty() {
                break;
            }
        }
        let lattice = Lattice::from_text("t", &words.join(" ")).unwrap();
        let mut chart = lexical_pass(&lattice, &g).unwrap();
        phrasal_pass(&mut chart, &g);
        let found: Vec<String> = full_pass(&mut chart, FullRules::Original(&g), None)
            .unwrap()
            .iter()
            .map(|a| a.derivation.to_sexpr())
            .collect();
        let expected = enumerate_derivations(&g, &words);
        let found_set: BTreeSet<String> = found.iter().cloned().collect();
        if found.len() != found_set.len() || found_set != expected {
            mismatches += 1;
        }
        nonempty += !expected.is_empty() as usize;
        analyses += expected.len();
    }
    outcome(
        mismatches == 0,
        format!("{cases} grammar/sentence pairs ({nonempty} parsable, {analyses} analyses), {mismatches} mismatches"),
    )
}

/// gen-corpus, train and evaluate through the command line into `dir`.
fn cli_run(dir: &std::path::Path) -> Result<(), String> {
    let grammar = concat!(env!("CARGO_MANIFEST_DIR"), "/grammars/air_travel.grammar");
    let p = |f: &str| dir.join(f).to_str().unwrap().to_string();
    let train_n = TRAIN_SIZE.to_string();
    let test_n = TEST_SIZE.to_string();
    let train_seed = TRAIN_SEED.to_string();
    let test_seed = TEST_SEED.to_string();
    let steps: [Vec<String>; 4] = [
        [
            "gen-corpus",
            "--grammar",
            grammar,
            "--n",
            &train_n,
            "--seed",
            &train_seed,
            "--out",
            &p("train.jsonl"),
        ]
        .map(String::from)
        .to_vec(),
        [
            "gen-corpus",
            "--grammar",
            grammar,
            "--n",
            &test_n,
            "--seed",
            &test_seed,
            "--out",
            &p("test.jsonl"),
        ]
        .map(String::from)
        .to_vec(),
        [
            "train",
            "--grammar",
            grammar,
            "--corpus",
            &p("train.jsonl"),
            "--out-model",
            &p("model.txt"),
            "--out-grammar",
            &p("special.grammar"),
        ]
        .map(String::from)
        .to_vec(),
        [
            "evaluate",
            "--grammar",
            grammar,
            "--model",
            &p("model.txt"),
            "--specialized",
            &p("special.grammar"),
            "--test",
            &p("test.jsonl"),
            "--out-records",
            &p("records.txt"),
        ]
        .map(String::from)
        .to_vec(),
    ];
    for args in steps {
        let out = Command::new(env!("CARGO_BIN_EXE_gspec"))
            .args(&args)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!(
                "{}: {}",
                args[0],
                String::from_utf8_lossy(&out.stderr)
            ));
        }
    }
    Ok(())
}

fn determinism() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    if let Err(e) = cli_run(a.path()).and_then(|_| cli_run(b.path())) {
        return outcome(false, e);
    }
    let files = [
        "train.jsonl",
        "test.jsonl",
        "model.txt",
        "special.grammar",
        "records.txt",
    ];
    let differing: Vec<&str> = files
        .iter()
        .copied()
        .filter(|f| std::fs::read(a.path().join(f)).ok() != std::fs::read(b.path().join(f)).ok())
        .collect();
    outcome(
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} files byte-identical across two runs", files.len())
        } else {
            format!("differing: {}", differing.join(", "))
        },
    )
}

fn ms(report: &EvalReport, v: Variant) -> f64 {
    let s = report.summary(v).unwrap();
    s.mean_time(s.timings.total())
}

fn main() -> ExitCode {
    let g = air_travel();
    let train = gen_corpus(&g, TRAIN_SIZE, TRAIN_SEED, DEFAULT_MAX_DEPTH).unwrap();
    let test = gen_corpus(&g, TEST_SIZE, TEST_SEED, DEFAULT_MAX_DEPTH).unwrap();
    let trained = pipeline::train(&g, &train, ChunkScheme::New, PruneParams::default()).unwrap();
    println!("{}", trained.report);

    let report = pipeline::evaluate(
        &g,
        Some(&trained.model),
        Some(&trained.specialized),
        &test,
        &Variant::ALL,
        &EvalOptions::default(),
    )
    .unwrap();
    println!("{}", report.timing_table());
    println!("{}", report.coverage_table());

    let curve = coverage_curve(
        &g,
        &train,
        &SIZES,
        &test,
        &[ChunkScheme::Old, ChunkScheme::New],
        Some(pipeline::DEFAULT_TIMEOUT),
    )
    .unwrap();
    println!("{}", curve_table(&curve));
    let points = |scheme: ChunkScheme| curve.iter().filter(move |p| p.scheme == scheme);

    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("1 maximin oracle", maximin_oracle()));
    results.push(("2 survivor guarantee", survivor_guarantee()));
    results.push(("3 specialization soundness", soundness(&g, &trained, &test)));

    let depth_ok: Vec<String> = points(ChunkScheme::New)
        .map(|p| {
            format!(
                "{}:{}",
                p.training_size,
                p.check.depth.map_or("unbounded".into(), |d| d.to_string())
            )
        })
        .collect();
    results.push((
        "4 non-recursion and depth",
        outcome(
            points(ChunkScheme::New).all(|p| {
                p.check.type_graph_acyclic
                    && p.check.depth.is_some_and(|d| d <= 6)
                    && p.check.is_ok()
            }),
            format!("depth by size {}", depth_ok.join(" ")),
        ),
    ));

    let losses: Vec<f64> = points(ChunkScheme::New).map(|p| p.coverage_loss).collect();
    results.push((
        "5 coverage-loss curve",
        outcome(
            losses.windows(2).all(|w| w[1] <= w[0]) && losses.last() < losses.first(),
            format!(
                "new-scheme loss {}",
                losses
                    .iter()
                    .map(|l| format!("{:.1}%", 100.0 * l))
                    .collect::<Vec<_>>()
                    .join(" -> ")
            ),
        ),
    ));

    let pairs: Vec<(usize, usize, usize)> = points(ChunkScheme::New)
        .zip(points(ChunkScheme::Old))
        .map(|(n, o)| (n.training_size, n.macro_rules, o.macro_rules))
        .collect();
    results.push((
        "6 rule-count reduction",
        outcome(
            pairs.iter().all(|&(_, n, o)| n < o),
            pairs
                .iter()
                .map(|(s, n, o)| format!("{s}: {n}/{o} = {:.2}", *n as f64 / *o as f64))
                .collect::<Vec<_>>()
                .join(", "),
        ),
    ));

    let fast = ms(
        &report,
        Variant {
            specialized: true,
            prune: true,
        },
    );
    let slow = ms(&report, Variant::BASELINE);
    results.push((
        "7 speedup",
        outcome(
            fast <= 0.5 * slow,
            format!(
                "E+P+ {fast:.3} ms vs E-P- {slow:.3} ms per utterance, {:.1}x",
                slow / fast
            ),
        ),
    ));

    let pruned = Variant {
        specialized: false,
        prune: true,
    };
    let base = report.summary(Variant::BASELINE).unwrap();
    let with_prune = report.summary(pruned).unwrap();
    let survival = 1.0 - with_prune.coverage_loss.unwrap();
    results.push((
        "8 pruning utility",
        outcome(
            with_prune.mean_analyses() < base.mean_analyses() && survival >= 0.95,
            format!(
                "mean analyses {:.2} -> {:.2}, gold survives pruning for {:.1}%",
                base.mean_analyses(),
                with_prune.mean_analyses(),
                100.0 * survival
            ),
        ),
    ));

    results.push(("9 determinism", determinism()));
    results.push(("10 small-instance parser oracle", small_parser_oracle()));

    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "{} criterion {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += !o.pass as usize;
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
