//! Trains a small GCN on the motif benchmark, then recovers the motif with
//! GNNExplainer and reports precision at 4.

use expass::explain::{explain_graph, precision_at_k, ranked_edges, ExplainerConfig, ExplainerKind};
use expass::graph::{split, synthetic_motif_dataset};
use expass::layers::{init_params, predict_proba, Architecture, Dims, EdgeWeights};
use expass::train::{train, TrainConfig};

fn main() -> expass::Result<()> {
    let set = synthetic_motif_dataset(120, 12, 0.5, 0)?;
    let sp = split(&set, [0.8, 0.0, 0.2], 0)?;
    let dims = Dims { input: set.feature_dim(), hidden: 16, classes: 2, depth: 3 };
    let cfg = TrainConfig { epochs: 40, burn_in: 5, ..TrainConfig::default() };
    let out = train(init_params(Architecture::Gcn, dims, 0)?, &set, &sp, &cfg)?;

    let ecfg = ExplainerConfig { epochs: 100, runs: 3, ..ExplainerConfig::default() };
    for &id in sp.test.iter().filter(|&&i| set.graphs()[i].label() == 1).take(5) {
        let g = &set.graphs()[id];
        let e = explain_graph(ExplainerKind::Gnnexplainer, &out.params, g, id, 1, &ecfg, 0)?.expect("explainer set");
        let top: Vec<_> = ranked_edges(&e.edge_scores).into_iter().take(4).map(|i| g.edges()[i]).collect();
        let p = predict_proba(&out.params, g, &EdgeWeights::ones(g))?;
        println!(
            "graph {id}: p(motif) {:.3}, precision@4 {:.2}, top edges {top:?}",
            p[1],
            precision_at_k(&e.edge_scores, g.motif_edges(), 4)
        );
    }
    Ok(())
}
