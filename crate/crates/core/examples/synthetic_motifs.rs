//! Generates the house-motif benchmark and shows one positive graph.

use expass::graph::{synthetic_motif_dataset, MOTIF_SIZE};

fn main() -> expass::Result<()> {
    let set = synthetic_motif_dataset(20, 12, 0.5, 7)?;
    let positives = set.labels().iter().filter(|&&l| l == 1).count();
    println!("{} graphs, {} with a {}-node motif", set.len(), positives, MOTIF_SIZE);
    if let Some(g) = set.graphs().iter().find(|g| g.label() == 1) {
        println!("nodes {}, edges {}", g.num_nodes(), g.num_edges());
        let motif: Vec<_> = g.motif_edges().iter().map(|&e| g.edges()[e]).collect();
        println!("motif edges {motif:?}");
    }
    Ok(())
}
