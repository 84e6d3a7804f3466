//! Normalised Laplacian spectrum and Dirichlet energy of a path graph.

use expass::autodiff::Tensor;
use expass::graph::{spectral_pack, Graph};
use expass::metrics::dirichlet_energy;

fn main() -> expass::Result<()> {
    let n = 6;
    let g = Graph::new(n, (0..n - 1).map(|i| (i, i + 1)), Tensor::ones(n, 1), 0)?;
    let pack = spectral_pack(&g)?;
    println!("eigenvalues {:?}", pack.eigenvalues.iter().map(|l| format!("{l:.4}")).collect::<Vec<_>>());

    let smooth = Tensor::column(pack.d_tilde.iter().map(|d| d.sqrt()).collect())?;
    let rough = Tensor::column((0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect())?;
    println!("energy of sqrt-degree signal {:.3e}", dirichlet_energy(&smooth, &pack)?);
    println!("energy of alternating signal {:.4}", dirichlet_energy(&rough, &pack)?);
    Ok(())
}
