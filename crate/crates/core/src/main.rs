use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};

use gspec::corpus::{gen_corpus, length_histogram, parse_corpus, write_corpus, DEFAULT_MAX_DEPTH};
use gspec::ebl::{check_specialized, ChunkScheme};
use gspec::error::{read_file, write_file, Error, Result};
use gspec::lattice::parse_lattice_file;
use gspec::pipeline::{
    self, coverage_curve, curve_table, EvalOptions, ParseOptions, Parser as GParser, Variant,
};
use gspec::pruner::{PruneModel, PruneParams};
use gspec::{Grammar, Lattice, SpecializedGrammar};

/// Exit status when some input has no analysis.
const EXIT_NO_PARSE: u8 = 3;
/// Exit status when some input ran out of time.
const EXIT_TIMEOUT: u8 = 4;

#[derive(Parser)]
#[command(
    name = "gspec",
    version,
    about = "Grammar specialization and chart pruning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a treebank from a grammar.
    GenCorpus {
        #[arg(long)]
        grammar: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
        max_depth: usize,
    },
    /// Train a pruning model and a specialized grammar on a treebank.
    Train {
        #[arg(long)]
        grammar: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        /// new, old, whole or identity.
        #[arg(long, default_value = "new")]
        scheme: String,
        #[arg(long)]
        out_model: PathBuf,
        #[arg(long)]
        out_grammar: PathBuf,
        #[arg(long)]
        out_report: Option<PathBuf>,
    },
    /// Parse sentences or lattices.
    Parse {
        #[arg(long)]
        grammar: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Use this specialized grammar in the full pass.
        #[arg(long)]
        specialized: Option<PathBuf>,
        #[arg(long)]
        prune: bool,
        /// JSONL lattice file.
        #[arg(long, conflicts_with = "text")]
        lattice: Option<PathBuf>,
        /// A sentence; without this or --lattice, sentences are read from stdin.
        #[arg(long)]
        text: Option<String>,
        #[arg(long)]
        fraction1: Option<f64>,
        #[arg(long)]
        fraction2: Option<f64>,
        /// Seconds per input.
        #[arg(long, default_value_t = 90.0)]
        timeout: f64,
        /// Print at most this many analyses per input.
        #[arg(long)]
        max_analyses: Option<usize>,
    },
    /// Compare parser variants on a test treebank.
    Evaluate {
        #[arg(long)]
        grammar: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        specialized: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// `all` or a comma-separated list such as `E-P-,E+P+`.
        #[arg(long, default_value = "all")]
        variants: String,
        #[arg(long, default_value_t = 90.0)]
        timeout: f64,
        #[arg(long, default_value_t = 10)]
        warmup: usize,
        /// Per-utterance results without timings.
        #[arg(long)]
        out_records: Option<PathBuf>,
        #[arg(long)]
        out_timings: Option<PathBuf>,
    },
    /// Rule counts and coverage loss for growing training sets.
    Curve {
        #[arg(long)]
        grammar: PathBuf,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "100,250,500,1000")]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "old,new")]
        schemes: Vec<String>,
        #[arg(long, default_value_t = 90.0)]
        timeout: f64,
    },
    /// Report on a specialized grammar.
    Check {
        #[arg(long)]
        grammar: PathBuf,
        #[arg(long)]
        specialized: PathBuf,
    },
}

fn load_grammar(path: &Path) -> Result<Grammar> {
    let g = Grammar::parse(&read_file(path)?)?;
    for w in g.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(g)
}

fn scheme(name: &str) -> Result<ChunkScheme> {
    ChunkScheme::from_name(name).ok_or_else(|| {
        Error::Config(format!(
            "unknown scheme `{name}`; expected new, old, whole or identity"
        ))
    })
}

fn seconds(s: f64) -> Result<Option<Duration>> {
    if s <= 0.0 || !s.is_finite() {
        return Err(Error::Config(format!(
            "timeout {s} must be a positive number of seconds"
        )));
    }
    Ok(Some(Duration::from_secs_f64(s)))
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::GenCorpus {
            grammar,
            n,
            seed,
            out,
            max_depth,
        } => {
            let g = load_grammar(&grammar)?;
            let corpus = gen_corpus(&g, n, seed, max_depth)?;
            write_file(&out, &write_corpus(&corpus))?;
            let hist = length_histogram(&corpus);
            let words: usize = hist.iter().map(|(len, k)| len * k).sum();
            eprintln!(
                "wrote {} sentences, mean length {:.1} words",
                corpus.len(),
                words as f64 / corpus.len().max(1) as f64
            );
            Ok(0)
        }
        Command::Train {
            grammar,
            corpus,
            scheme: scheme_name,
            out_model,
            out_grammar,
            out_report,
        } => {
            let g = load_grammar(&grammar)?;
            let corpus = parse_corpus(&read_file(&corpus)?, &g)?;
            let trained =
                pipeline::train(&g, &corpus, scheme(&scheme_name)?, PruneParams::default())?;
            write_file(&out_model, &trained.model.to_text())?;
            write_file(&out_grammar, &trained.specialized.to_text())?;
            let report = trained.report.to_string();
            match out_report {
                Some(p) => write_file(&p, &report)?,
                None => eprint!("{report}"),
            }
            Ok(0)
        }
        Command::Parse {
            grammar,
            model,
            specialized,
            prune,
            lattice,
            text,
            fraction1,
            fraction2,
            timeout,
            max_analyses,
        } => {
            let g = load_grammar(&grammar)?;
            let model = model
                .map(|p| read_file(&p).and_then(|t| PruneModel::parse(&t)))
                .transpose()?;
            let sg = specialized
                .map(|p| read_file(&p).and_then(|t| SpecializedGrammar::parse(&t, &g)))
                .transpose()?;
            if prune && model.is_none() {
                return Err(Error::Config("--prune needs --model".into()));
            }
            let defaults = model.as_ref().map(|m| m.params).unwrap_or_default();
            let opts = ParseOptions {
                prune,
                specialized: sg.is_some(),
                fraction_phase1: fraction1.unwrap_or(defaults.fraction_phase1),
                fraction_phase2: fraction2.unwrap_or(defaults.fraction_phase2),
                timeout: seconds(timeout)?,
            };
            let parser = GParser::new(&g, model.as_ref(), sg.as_ref())?;
            let inputs: Vec<Lattice> = match (lattice, text) {
                (Some(p), _) => parse_lattice_file(&read_file(&p)?)?,
                (None, Some(t)) => vec![Lattice::from_text("input", &t)?],
                (None, None) => {
                    let mut out = Vec::new();
                    for (i, line) in io::stdin().lock().lines().enumerate() {
                        let line = line.map_err(|e| Error::io("<stdin>", e))?;
                        if !line.trim().is_empty() {
                            out.push(Lattice::from_text(format!("line{}", i + 1), &line)?);
                        }
                    }
                    out
                }
            };
            let mut status = 0;
            let stdout = io::stdout();
            let mut w = stdout.lock();
            for l in &inputs {
                let outcome = parser.parse(l, &opts)?;
                for warning in &outcome.warnings {
                    eprintln!("warning: {}: {warning}", l.id);
                }
                let state = if outcome.timed_out {
                    status = EXIT_TIMEOUT;
                    "timeout"
                } else if outcome.analyses.is_empty() {
                    if status == 0 {
                        status = EXIT_NO_PARSE;
                    }
                    "no parse"
                } else {
                    "ok"
                };
                let e = &outcome.edges;
                let _ = writeln!(
                    w,
                    "# {} analyses={} ({state}) edges lexical={}/{} phrasal={}/{} full={}",
                    l.id,
                    outcome.analyses.len(),
                    e.after_prune1,
                    e.lexical,
                    e.after_prune2,
                    e.phrasal,
                    e.full
                );
                for a in outcome
                    .analyses
                    .iter()
                    .take(max_analyses.unwrap_or(usize::MAX))
                {
                    let _ = writeln!(w, "{:.6} {}", a.score, a.derivation.to_sexpr());
                }
            }
            Ok(status)
        }
        Command::Evaluate {
            grammar,
            model,
            specialized,
            test,
            variants,
            timeout,
            warmup,
            out_records,
            out_timings,
        } => {
            let g = load_grammar(&grammar)?;
            let model = PruneModel::parse(&read_file(&model)?)?;
            let sg = SpecializedGrammar::parse(&read_file(&specialized)?, &g)?;
            let test = parse_corpus(&read_file(&test)?, &g)?;
            let opts = EvalOptions {
                fraction_phase1: model.params.fraction_phase1,
                fraction_phase2: model.params.fraction_phase2,
                timeout: seconds(timeout)?,
                warmup,
            };
            let report = pipeline::evaluate(
                &g,
                Some(&model),
                Some(&sg),
                &test,
                &Variant::parse_list(&variants)?,
                &opts,
            )?;
            print!("{}\n{}", report.timing_table(), report.coverage_table());
            if let Some(p) = out_records {
                write_file(&p, &report.records_text())?;
            }
            if let Some(p) = out_timings {
                write_file(&p, &report.timings_text())?;
            }
            Ok(0)
        }
        Command::Curve {
            grammar,
            train,
            test,
            sizes,
            schemes,
            timeout,
        } => {
            let g = load_grammar(&grammar)?;
            let train = parse_corpus(&read_file(&train)?, &g)?;
            let test = parse_corpus(&read_file(&test)?, &g)?;
            let schemes = schemes
                .iter()
                .map(|s| scheme(s))
                .collect::<Result<Vec<_>>>()?;
            let points = coverage_curve(&g, &train, &sizes, &test, &schemes, seconds(timeout)?)?;
            print!("{}", curve_table(&points));
            Ok(0)
        }
        Command::Check {
            grammar,
            specialized,
        } => {
            let g = load_grammar(&grammar)?;
            let sg = SpecializedGrammar::parse(&read_file(&specialized)?, &g)?;
            let report = check_specialized(&sg, &g);
            println!("scheme {}", sg.scheme());
            println!("macro_rules {}", report.macro_rules);
            for (t, n) in &report.counts_by_type {
                println!("macro_rules.{t} {n}");
            }
            println!("category_graph_acyclic {}", report.category_graph_acyclic);
            println!("type_graph_acyclic {}", report.type_graph_acyclic);
            match report.depth {
                Some(d) => println!("depth {d}"),
                None => println!("depth unbounded"),
            }
            println!("phrasal_in_templates {}", report.phrasal_in_templates);
            for p in &report.problems {
                println!("problem {p}");
            }
            Ok(if report.is_ok() { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
