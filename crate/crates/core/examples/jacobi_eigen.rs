//! Cyclic Jacobi eigendecomposition and the spectral norm.

use expass::autodiff::Tensor;
use expass::metrics::{spectral_norm, symmetric_eigen};

fn main() -> expass::Result<()> {
    let m = Tensor::from_rows(&[[4.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]])?;
    let eig = symmetric_eigen(&m)?;
    println!("eigenvalues {:?}", eig.values);
    let v0: Vec<f64> = (0..3).map(|i| eig.vectors.get(i, 0)).collect();
    let mv: Vec<f64> = (0..3).map(|i| (0..3).map(|j| m.get(i, j) * v0[j]).sum()).collect();
    println!("residual {:.2e}", mv.iter().zip(&v0).map(|(a, b)| (a - eig.values[0] * b).abs()).fold(0.0, f64::max));
    let w = Tensor::from_rows(&[[1.0, 2.0], [0.0, 1.0]])?;
    println!("spectral norm {:.6}", spectral_norm(&w)?);
    Ok(())
}
