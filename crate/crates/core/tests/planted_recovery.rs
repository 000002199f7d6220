//! End-to-end recovery of planted communities: generator -> bipartite ->
//! activity-Jaccard projection -> all five detection algorithms.

use newsgraph::bipartite::{build_bipartite, Channel};
use newsgraph::community::{
    best_modularity_cut, fast_greedy, infomap, label_propagation, louvain, walktrap, Partition,
};
use newsgraph::metrics::nmi;
use newsgraph::projection::{project_activity_jaccard, SourceGraph};
use newsgraph::synth::{generate, PlantedConfig};

fn planted_graph(seed: u64) -> (SourceGraph, Partition) {
    let config = PlantedConfig::benchmark(30, 500, seed);
    let data = generate(&config).unwrap();
    let bip = build_bipartite(&data.dataset, Channel::Engagement);
    (project_activity_jaccard(&bip), data.ground_truth)
}

fn recovery_scores(detect: impl Fn(&SourceGraph, u64) -> Partition) -> Vec<f64> {
    (0..10u64)
        .map(|seed| {
            let (graph, truth) = planted_graph(seed);
            let found = detect(&graph, seed);
            nmi(&found, &truth).unwrap()
        })
        .collect()
}

fn assert_recovers(name: &str, scores: &[f64]) {
    let good = scores.iter().filter(|&&s| s >= 0.9).count();
    assert!(
        good >= 9,
        "{name} recovered the planted partition on only {good}/10 seeds: {scores:?}"
    );
}

#[test]
fn louvain_recovers_planted_partition() {
    assert_recovers("louvain", &recovery_scores(|g, s| louvain(g, s).partition));
}

#[test]
fn fast_greedy_recovers_planted_partition() {
    assert_recovers("fast_greedy", &recovery_scores(|g, _| fast_greedy(g).partition));
}

#[test]
fn label_propagation_recovers_planted_partition() {
    assert_recovers("label_propagation", &recovery_scores(label_propagation));
}

#[test]
fn walktrap_recovers_planted_partition() {
    assert_recovers(
        "walktrap",
        &recovery_scores(|g, _| best_modularity_cut(g, &walktrap(g, 4)).0),
    );
}

#[test]
fn infomap_recovers_planted_partition() {
    assert_recovers("infomap", &recovery_scores(|g, s| infomap(g, s).partition));
}
