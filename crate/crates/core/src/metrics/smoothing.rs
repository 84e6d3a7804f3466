use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::graph::SpectralPack;

/// Dirichlet energy `tr(Hᵀ Δ̃ H)`.
pub fn dirichlet_energy(h: &Tensor, pack: &SpectralPack) -> Result<f64> {
    let n = pack.delta_tilde.rows();
    if h.rows() != n {
        return Err(Error::Dimension {
            op: "dirichlet_energy",
            left: h.shape(),
            right: pack.delta_tilde.shape(),
        });
    }
    let lh = pack.delta_tilde.matmul(h)?;
    Ok(h.data().iter().zip(lh.data()).map(|(a, b)| a * b).sum())
}

const GDR_INTRA_FLOOR: f64 = 1e-12;

/// Group distance ratio: mean pairwise L2 distance between rows of
/// different groups over the mean pairwise distance within groups (the
/// latter floored at 1e-12).
pub fn gdr(embeddings: &Tensor, labels: &[usize]) -> Result<f64> {
    let n = embeddings.rows();
    if labels.len() != n {
        return Err(Error::UndefinedMetric(format!("gdr: {} labels for {n} rows", labels.len())));
    }
    let (mut inter, mut n_inter) = (0.0, 0usize);
    let (mut intra, mut n_intra) = (0.0, 0usize);
    for i in 0..n {
        for j in i + 1..n {
            let d = embeddings
                .row(i)
                .iter()
                .zip(embeddings.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if labels[i] == labels[j] {
                intra += d;
                n_intra += 1;
            } else {
                inter += d;
                n_inter += 1;
            }
        }
    }
    if n_inter == 0 {
        return Err(Error::UndefinedMetric("gdr needs at least two groups".into()));
    }
    if n_intra == 0 {
        return Err(Error::UndefinedMetric("gdr needs a group with two members".into()));
    }
    Ok((inter / n_inter as f64) / (intra / n_intra as f64).max(GDR_INTRA_FLOOR))
}
