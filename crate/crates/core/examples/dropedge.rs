//! Empirical keep rate of DropEdge masks.

use expass::graph::synthetic_motif_dataset;
use expass::train::apply_dropedge;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> expass::Result<()> {
    let set = synthetic_motif_dataset(50, 12, 0.5, 0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for p in [0.0, 0.2, 0.5, 0.9] {
        let (mut kept, mut total) = (0.0, 0usize);
        for g in set.graphs() {
            let m = apply_dropedge(g, p, &mut rng)?;
            kept += m.values().iter().sum::<f64>();
            total += m.len();
        }
        println!("p = {p:.1}: kept {:.3} of edges", kept / total as f64);
    }
    Ok(())
}
