use super::Graph;
use crate::autodiff::Tensor;
use crate::error::Result;
use crate::metrics::symmetric_eigen;

/// Dense spectral quantities of one graph with self-loops added.
#[derive(Clone, Debug)]
pub struct SpectralPack {
    /// `Ã = A + I`.
    pub a_tilde: Tensor,
    /// Row sums of `Ã`, i.e. `deg + 1`.
    pub d_tilde: Vec<f64>,
    /// `Δ̃ = I − D̃^{-1/2} Ã D̃^{-1/2}`.
    pub delta_tilde: Tensor,
    /// `P = I − Δ̃`.
    pub p: Tensor,
    /// Eigenvalues of `Δ̃`, ascending.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors of `Δ̃`, one per column, matching `eigenvalues`.
    pub eigenvectors: Tensor,
}

pub fn spectral_pack(graph: &Graph) -> Result<SpectralPack> {
    let n = graph.num_nodes();
    let mut a = Tensor::identity(n).into_data();
    for &(u, v) in graph.edges().iter() {
        a[u * n + v] = 1.0;
        a[v * n + u] = 1.0;
    }
    let d_tilde: Vec<f64> = graph.degrees().iter().map(|&d| d as f64 + 1.0).collect();
    let inv_sqrt: Vec<f64> = d_tilde.iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut delta = vec![0.0; n * n];
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let eye = if i == j { 1.0 } else { 0.0 };
            let norm = inv_sqrt[i] * a[i * n + j] * inv_sqrt[j];
            delta[i * n + j] = eye - norm;
            p[i * n + j] = eye - delta[i * n + j];
        }
    }
    let delta_tilde = Tensor::from_raw(n, n, delta);
    let eig = symmetric_eigen(&delta_tilde)?;
    Ok(SpectralPack {
        a_tilde: Tensor::from_raw(n, n, a),
        d_tilde,
        delta_tilde,
        p: Tensor::from_raw(n, n, p),
        eigenvalues: eig.values,
        eigenvectors: eig.vectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Graph {
        Graph::new(n, edges.iter().copied(), Tensor::ones(n, 1), 0).unwrap()
    }

    #[test]
    fn single_node() {
        let s = spectral_pack(&graph(1, &[])).unwrap();
        assert_eq!(s.delta_tilde.data(), &[0.0]);
        assert_eq!(s.p.data(), &[1.0]);
    }

    #[test]
    fn one_edge_has_eigenvalues_zero_and_one() {
        let s = spectral_pack(&graph(2, &[(0, 1)])).unwrap();
        assert!((s.delta_tilde.get(0, 1) + 0.5).abs() < 1e-15);
        assert!(s.eigenvalues[0].abs() < 1e-12);
        assert!((s.eigenvalues[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn triangle_is_symmetric_and_sums_to_identity() {
        let s = spectral_pack(&graph(3, &[(0, 1), (1, 2), (0, 2)])).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((s.delta_tilde.get(i, j) - s.delta_tilde.get(j, i)).abs() < 1e-12);
                let eye = if i == j { 1.0 } else { 0.0 };
                assert_eq!(s.delta_tilde.get(i, j) + s.p.get(i, j), eye);
            }
        }
    }

    #[test]
    fn sqrt_degree_vector_is_in_the_null_space() {
        let g = graph(5, &[(0, 1), (1, 2), (2, 3), (1, 3), (3, 4)]);
        let s = spectral_pack(&g).unwrap();
        let x: Vec<f64> = s.d_tilde.iter().map(|d| d.sqrt()).collect();
        let y = s.delta_tilde.matmul(&Tensor::column(x).unwrap()).unwrap();
        assert!(y.max_abs() < 1e-9);
        assert!(s.eigenvalues[0] < 1e-9);
        assert!(s.eigenvalues.iter().all(|&l| l > -1e-12 && l < 2.0));
    }
}
