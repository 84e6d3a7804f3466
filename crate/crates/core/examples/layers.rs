//! Forward passes of the four architectures under full, soft and empty edge masks.

use expass::graph::synthetic_motif_dataset;
use expass::layers::{init_params, predict_proba, Architecture, Dims, EdgeWeights};

fn main() -> expass::Result<()> {
    let set = synthetic_motif_dataset(4, 10, 1.0, 3)?;
    let g = &set.graphs()[0];
    let dims = Dims { input: set.feature_dim(), hidden: 16, classes: 2, depth: 3 };
    let half = EdgeWeights::from_values(g, vec![0.5; g.num_edges()])?;
    let none = EdgeWeights::from_values(g, vec![0.0; g.num_edges()])?;
    for arch in Architecture::ALL {
        let p = init_params(arch, dims, 0)?;
        let full = predict_proba(&p, g, &EdgeWeights::ones(g))?;
        let soft = predict_proba(&p, g, &half)?;
        let empty = predict_proba(&p, g, &none)?;
        println!(
            "{:<10} full {:.4} half {:.4} empty {:.4}",
            arch.name(),
            full[1],
            soft[1],
            empty[1]
        );
    }
    Ok(())
}
