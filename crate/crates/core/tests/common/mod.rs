//! Reference implementations shared by the integration tests. They favour
//! obviousness over speed and share no code with the library under test.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fmt::Write as _;

use gspec::{CategoryTag, Chart, Derivation, Grammar, Lattice, WordEdge};
use rand::Rng;

/// A chart over `n` vertices whose lattice is a simple chain, carrying
/// `edges` arbitrary forward edges with the given scores.
pub fn chart_with(n: usize, edges: &[(usize, usize, f64)]) -> Chart {
    let chain = (0..n - 1)
        .map(|i| WordEdge {
            from: i,
            to: i + 1,
            word: format!("w{i}"),
            conf: 1.0,
        })
        .collect();
    let mut chart = Chart::new(Lattice::new("random", n, chain).unwrap());
    let tag = CategoryTag::new("X");
    for (k, &(s, e, score)) in edges.iter().enumerate() {
        let pos = chart.add_lexical(
            s,
            e,
            Derivation::leaf(&format!("e{k}"), tag.clone(), "c"),
            1.0,
        );
        chart.set_score(pos, score);
    }
    chart
}

/// Random edge list: at most `max_vertices` vertices and `max_edges` edges,
/// scores drawn from a small grid so that ties occur.
pub fn random_edges(
    rng: &mut impl Rng,
    max_vertices: usize,
    max_edges: usize,
) -> (usize, Vec<(usize, usize, f64)>) {
    let n = rng.gen_range(2..=max_vertices);
    let m = rng.gen_range(0..=max_edges);
    let edges = (0..m)
        .map(|_| {
            let s = rng.gen_range(0..n - 1);
            let e = rng.gen_range(s + 1..n);
            let score = if rng.gen_bool(0.3) {
                rng.gen_range(1..=10) as f64 / 10.0
            } else {
                rng.gen_range(1e-6..1.0)
            };
            (s, e, score)
        })
        .collect();
    (n, edges)
}

/// Every source-to-sink path as a list of edge indices.
pub fn all_paths(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<usize>> {
    fn walk(
        v: usize,
        n: usize,
        edges: &[(usize, usize, f64)],
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if v == n - 1 {
            out.push(path.clone());
            return;
        }
        for (i, &(s, e, _)) in edges.iter().enumerate() {
            if s == v {
                path.push(i);
                walk(e, n, edges, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(0, n, edges, &mut Vec::new(), &mut out);
    out
}

pub fn path_score(path: &[usize], edges: &[(usize, usize, f64)]) -> f64 {
    path.iter().map(|&i| edges[i].2).fold(1.0, f64::min)
}

/// For each vertex, the best score of a complete path visiting it; 0 if no
/// complete path does.
pub fn brute_force_vertex_scores(n: usize, edges: &[(usize, usize, f64)]) -> Vec<f64> {
    let mut best = vec![0.0f64; n];
    for path in all_paths(n, edges) {
        let score = path_score(&path, edges);
        best[0] = best[0].max(score);
        for &i in &path {
            best[edges[i].1] = best[edges[i].1].max(score);
        }
    }
    best
}

/// Indices of edges lying on some best-scoring complete path.
pub fn best_path_edges(n: usize, edges: &[(usize, usize, f64)]) -> BTreeSet<usize> {
    let paths = all_paths(n, edges);
    let Some(best) = paths.iter().map(|p| path_score(p, edges)).reduce(f64::max) else {
        return BTreeSet::new();
    };
    paths
        .iter()
        .filter(|p| path_score(p, edges) == best)
        .flatten()
        .copied()
        .collect()
}

/// A random grammar of at most `max_rules` rules over a two-word lexicon.
/// Phrasal rules only build on lexical and phrasal categories, and unary
/// rules point strictly forward in a fixed category order, so derivations
/// of a fixed sentence are finite.
pub fn random_grammar_text(rng: &mut impl Rng, max_rules: usize) -> String {
    const PRETERMINALS: [&str; 2] = ["X", "Y"];
    const PHRASAL: [&str; 1] = ["P"];
    const NONPHRASAL: [&str; 3] = ["S", "A", "B"];
    // unary rules may only go from a category to a later one in this order
    let order = ["S", "A", "B", "P", "X", "Y"];
    let rank = |c: &str| order.iter().position(|&o| o == c).unwrap();

    let mut text = String::from("start S\n");
    text.push_str("lex \"a\" : X class ca\nlex \"b\" : Y class cb\nlex \"a\" : Y class ca\n");
    let n_rules = rng.gen_range(1..=max_rules);
    let mut defined: BTreeSet<&str> = PRETERMINALS.into_iter().collect();
    let mut lines = Vec::new();
    for k in 0..n_rules {
        let phrasal = rng.gen_bool(0.3);
        let lhs = if phrasal {
            PHRASAL[0]
        } else if k == 0 {
            "S"
        } else {
            NONPHRASAL[rng.gen_range(0..NONPHRASAL.len())]
        };
        let pool: Vec<&str> = if phrasal {
            PRETERMINALS.iter().chain(PHRASAL.iter()).copied().collect()
        } else {
            PRETERMINALS
                .iter()
                .chain(PHRASAL.iter())
                .chain(NONPHRASAL.iter())
                .copied()
                .collect()
        };
        let len = rng.gen_range(1..=3);
        let rhs: Vec<&str> = loop {
            let rhs: Vec<&str> = (0..len)
                .map(|_| pool[rng.gen_range(0..pool.len())])
                .collect();
            if len > 1 || rank(rhs[0]) > rank(lhs) {
                break rhs;
            }
        };
        let class = if phrasal { "phrasal" } else { "nonphrasal" };
        lines.push((lhs, rhs, class, k));
    }
    // keep only rules whose right-hand side is reachable from definitions,
    // iterating to a fixpoint
    loop {
        let before = defined.len();
        for (lhs, rhs, _, _) in &lines {
            if rhs.iter().all(|c| defined.contains(c)) {
                defined.insert(lhs);
            }
        }
        if defined.len() == before {
            break;
        }
    }
    let mut kept = 0;
    for (lhs, rhs, class, k) in &lines {
        if rhs.iter().all(|c| defined.contains(c)) {
            let _ = writeln!(
                text,
                "rule r{k} : {lhs} -> {} {{class: {class}}}",
                rhs.join(" ")
            );
            kept += 1;
        }
    }
    if !defined.contains("S") {
        let _ = writeln!(text, "rule r_fallback : S -> X {{class: nonphrasal}}");
        kept += 1;
    }
    assert!(kept <= max_rules + 1);
    text
}

/// All derivations of `words` rooted in a start category, computed by
/// exhaustive top-down enumeration, as bracketed strings.
pub fn enumerate_derivations(grammar: &Grammar, words: &[&str]) -> BTreeSet<String> {
    fn derive(grammar: &Grammar, cat: &CategoryTag, words: &[&str]) -> Vec<String> {
        let mut out = Vec::new();
        if words.len() == 1 {
            if let Some(e) = grammar.lexicon().entry(words[0], cat) {
                out.push(format!("\"{}\":{}:{}", words[0], cat, e.word_class));
            }
        }
        for r in grammar.rules().iter().filter(|r| &r.lhs == cat) {
            for split in splits(words.len(), r.rhs.len()) {
                let mut partial: Vec<Vec<String>> = vec![Vec::new()];
                for (c, (a, b)) in r.rhs.iter().zip(split) {
                    let subs = derive(grammar, c, &words[a..b]);
                    partial = partial
                        .into_iter()
                        .flat_map(|p| {
                            subs.iter().map(move |s| {
                                let mut p = p.clone();
                                p.push(s.clone());
                                p
                            })
                        })
                        .collect();
                }
                for kids in partial {
                    out.push(format!("({} {})", r.id, kids.join(" ")));
                }
            }
        }
        out
    }
    let mut out = BTreeSet::new();
    for s in grammar.start_categories() {
        out.extend(derive(grammar, s, words));
    }
    out
}

/// Ways of cutting `0..n` into `k` nonempty consecutive ranges.
fn splits(n: usize, k: usize) -> Vec<Vec<(usize, usize)>> {
    if k == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..=n {
        for rest in splits(n - first, k - 1) {
            let mut v = vec![(0, first)];
            v.extend(rest.into_iter().map(|(a, b)| (a + first, b + first)));
            out.push(v);
        }
    }
    out
}
