use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Graph, GraphSet};
use crate::autodiff::Tensor;
use crate::error::{contract, Result};

/// Number of edges in the planted cycle motif.
pub const MOTIF_SIZE: usize = 4;

const MAX_DEGREE_BUCKET: usize = 10;
const MAX_RESAMPLES: usize = 1_000_000;

/// Erdős–Rényi base graphs with edge probability `2 / base_size`, resampled
/// until connected. With probability `motif_attach_prob` a 4-cycle is joined
/// to a random base node through one bridge edge and the graph is labelled 1.
/// Features are one-hot node degrees capped at 10. The four cycle edges are
/// stored as the ground-truth explanation; the bridge is not part of it.
pub fn synthetic_motif_dataset(
    n_graphs: usize,
    base_size: usize,
    motif_attach_prob: f64,
    seed: u64,
) -> Result<GraphSet> {
    if n_graphs < 2 || base_size < 6 {
        return Err(contract("synthetic dataset needs n_graphs >= 2 and base_size >= 6"));
    }
    if !(0.0..=1.0).contains(&motif_attach_prob) {
        return Err(contract("motif_attach_prob must lie in [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = 2.0 / base_size as f64;
    let mut graphs = Vec::with_capacity(n_graphs);
    for _ in 0..n_graphs {
        let mut edges = connected_er(base_size, p, &mut rng)?;
        let with_motif = rng.gen_bool(motif_attach_prob);
        let mut motif = Vec::new();
        let mut n = base_size;
        if with_motif {
            let b = base_size;
            motif = vec![(b, b + 1), (b + 1, b + 2), (b + 2, b + 3), (b, b + 3)];
            edges.extend_from_slice(&motif);
            edges.push((rng.gen_range(0..base_size), b));
            n += MOTIF_SIZE;
        }
        let mut deg = vec![0usize; n];
        for &(u, v) in &edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        let dim = MAX_DEGREE_BUCKET + 1;
        let mut x = vec![0.0; n * dim];
        for (i, d) in deg.iter().enumerate() {
            x[i * dim + (*d).min(MAX_DEGREE_BUCKET)] = 1.0;
        }
        let g = Graph::new(n, edges, Tensor::new(n, dim, x)?, usize::from(with_motif))?
            .with_motif_edges(&motif)?;
        graphs.push(g);
    }
    GraphSet::new("synthetic-motif", graphs, 2)
}

fn connected_er(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Result<Vec<(usize, usize)>> {
    for _ in 0..MAX_RESAMPLES {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        if is_connected(n, &edges) {
            return Ok(edges);
        }
    }
    Err(contract(format!(
        "no connected G({n}, {p}) sample within {MAX_RESAMPLES} draws"
    )))
}

fn is_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut components = n;
    for &(u, v) in edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a] = b;
            components -= 1;
        }
    }
    components == 1
}
