//! Parses a TU-format dataset directory and prints class balance.
//!
//! `cargo run --example tu_dataset -- data/MUTAG MUTAG`

use expass::graph::parse_tu_dataset;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = args.next().unwrap_or_else(|| "data/MUTAG".into());
    let name = args.next().unwrap_or_else(|| "MUTAG".into());
    let set = parse_tu_dataset(&dir, &name)?;
    let mut counts = vec![0usize; set.num_classes()];
    for l in set.labels() {
        counts[l] += 1;
    }
    let nodes: usize = set.graphs().iter().map(|g| g.num_nodes()).sum();
    let edges: usize = set.graphs().iter().map(|g| g.num_edges()).sum();
    println!("{}: {} graphs, {} features, classes {:?}", set.name(), set.len(), set.feature_dim(), counts);
    println!("mean nodes {:.1}, mean edges {:.1}", nodes as f64 / set.len() as f64, edges as f64 / set.len() as f64);
    Ok(())
}
