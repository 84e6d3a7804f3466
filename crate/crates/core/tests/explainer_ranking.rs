use expass::explain::{explain_graph, ranked_edges, ExplainerConfig, ExplainerKind};
use expass::graph::{split, synthetic_motif_dataset};
use expass::layers::{init_params, Architecture, Dims};
use expass::train::{train, TrainConfig};

#[test]
fn gnnexplainer_ranks_motif_above_median_on_trained_gcn() {
    let seed = 0;
    let set = synthetic_motif_dataset(500, 12, 0.5, seed).unwrap();
    let sp = split(&set, [0.8, 0.0, 0.2], seed).unwrap();
    let dims = Dims { input: set.feature_dim(), hidden: 32, classes: 2, depth: 3 };
    let cfg = TrainConfig { seed, explainer: ExplainerKind::None, ..TrainConfig::default() };
    let out = train(init_params(Architecture::Gcn, dims, seed).unwrap(), &set, &sp, &cfg).unwrap();

    let ecfg = ExplainerConfig::default();
    let (mut above, mut n) = (0, 0);
    for &id in sp.test.iter().filter(|&&i| set.graphs()[i].label() == 1) {
        let g = &set.graphs()[id];
        let e = explain_graph(ExplainerKind::Gnnexplainer, &out.params, g, id, 1, &ecfg, seed)
            .unwrap()
            .unwrap();
        let ranked = ranked_edges(&e.edge_scores);
        let motif = g.motif_edges();
        let mean_rank = motif
            .iter()
            .map(|m| ranked.iter().position(|r| r == m).unwrap() as f64)
            .sum::<f64>()
            / motif.len() as f64;
        if mean_rank < (g.num_edges() as f64 - 1.0) / 2.0 {
            above += 1;
        }
        n += 1;
    }
    assert!(n > 0);
    assert!(above as f64 >= 0.8 * n as f64, "motif above median in {above}/{n} graphs");
}
