mod common;

use common::{best_path_edges, brute_force_vertex_scores, chart_with, random_edges};
use gspec::pruner::{prune, vertex_best_path_scores};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn surviving_labels(chart: &gspec::Chart) -> Vec<String> {
    chart
        .edges()
        .iter()
        .map(|e| e.derivation.leaves()[0].to_string())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn vertex_scores_match_path_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, edges) = random_edges(&mut rng, 8, 20);
        let chart = chart_with(n, &edges);
        prop_assert_eq!(vertex_best_path_scores(&chart), brute_force_vertex_scores(n, &edges));
    }

    #[test]
    fn best_paths_survive_pruning(seed in any::<u64>(), fraction in prop::sample::select(vec![1.0 / 20.0, 1.0 / 150.0, 0.999, 1.0])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, edges) = random_edges(&mut rng, 8, 20);
        let mut chart = chart_with(n, &edges);
        prune(&mut chart, fraction);
        let kept = surviving_labels(&chart);
        for i in best_path_edges(n, &edges) {
            let label = format!("e{i}");
            prop_assert!(kept.contains(&label), "edge {} pruned", i);
        }
    }

    #[test]
    fn scaling_scores_scales_vertex_scores(seed in any::<u64>(), k in 1u32..=8) {
        // powers of two keep the products exact
        let c = 0.5f64.powi(k as i32);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, edges) = random_edges(&mut rng, 8, 20);
        let scaled: Vec<_> = edges.iter().map(|&(s, e, x)| (s, e, x * c)).collect();
        let base = vertex_best_path_scores(&chart_with(n, &edges));
        let other = vertex_best_path_scores(&chart_with(n, &scaled));
        for (a, b) in base.iter().zip(&other) {
            prop_assert_eq!(a * c, *b);
        }
        let mut p = chart_with(n, &edges);
        let mut q = chart_with(n, &scaled);
        prune(&mut p, 0.05);
        prune(&mut q, 0.05);
        prop_assert_eq!(surviving_labels(&p), surviving_labels(&q));
    }

    #[test]
    fn pruning_is_idempotent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, edges) = random_edges(&mut rng, 8, 20);
        let mut chart = chart_with(n, &edges);
        prune(&mut chart, 0.1);
        let once = surviving_labels(&chart);
        let again = prune(&mut chart, 0.1);
        prop_assert_eq!(again.removed, 0);
        prop_assert_eq!(surviving_labels(&chart), once);
    }
}

#[test]
fn disconnected_chart_is_left_alone() {
    let edges = [(0, 1, 0.5), (2, 3, 0.9)];
    let mut chart = chart_with(4, &edges);
    let out = prune(&mut chart, 0.5);
    assert_eq!(out.removed, 0);
    assert_eq!(out.best, None);
    assert_eq!(chart.len(), 2);
    assert_eq!(chart.warnings().len(), 1);
    assert_eq!(vertex_best_path_scores(&chart), vec![0.0; 4]);
}
