//! Integrated Gradients on a toy function, then node and edge scores on a graph.

use expass::autodiff::Tensor;
use expass::explain::{integrated_gradients, integrated_gradients_core, ExplainerConfig};
use expass::graph::synthetic_motif_dataset;
use expass::layers::{init_params, Architecture, Dims};

fn main() -> expass::Result<()> {
    // f(x) = Σ x²; the attribution sum approaches f(x) − f(0) = 5.25.
    let x = Tensor::from_rows(&[[1.0, -2.0, 0.5]])?;
    for steps in [16, 64, 1024] {
        let attr = integrated_gradients_core(&x, steps, |p| Ok(p.map(|v| 2.0 * v)))?;
        let total: f64 = attr.data().iter().sum();
        println!("{steps:>5} steps: sum {total:.6}");
    }

    let set = synthetic_motif_dataset(2, 10, 1.0, 1)?;
    let g = &set.graphs()[0];
    let p = init_params(Architecture::GraphConv, Dims { input: set.feature_dim(), hidden: 8, classes: 2, depth: 2 }, 0)?;
    let e = integrated_gradients(&p, g, 0, 1, &ExplainerConfig::default())?;
    println!("node scores {:?}", e.node_scores.unwrap_or_default().iter().map(|s| format!("{s:.2}")).collect::<Vec<_>>());
    Ok(())
}
