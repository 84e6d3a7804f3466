//! Undirected graph data model, dataset ingestion and spectral quantities.
//!
//! Edges are stored once as `(u, v)` with `u < v`, sorted and free of
//! duplicates. Message passing materialises both directions from that pair.

mod spectral;
mod split;
mod synthetic;
mod tu;

use std::sync::Arc;

use crate::autodiff::{EdgeList, Tensor};
use crate::error::{contract, Result};

pub use spectral::{spectral_pack, SpectralPack};
pub use split::{split, Split};
pub use synthetic::{synthetic_motif_dataset, MOTIF_SIZE};
pub use tu::{parse_tu_dataset, write_tu};

#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    num_nodes: usize,
    edges: EdgeList,
    features: Tensor,
    label: usize,
    node_labels: Option<Vec<i64>>,
    motif_edges: Vec<usize>,
}

impl Graph {
    /// Normalises every pair to `u < v` and drops duplicates. Self-loops and
    /// out-of-range endpoints are contract errors.
    pub fn new(
        num_nodes: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        features: Tensor,
        label: usize,
    ) -> Result<Self> {
        if features.rows() != num_nodes {
            return Err(contract(format!(
                "feature rows {} != num_nodes {num_nodes}",
                features.rows()
            )));
        }
        let mut list = Vec::new();
        for (u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(contract(format!(
                    "edge ({u}, {v}) out of range for {num_nodes} nodes"
                )));
            }
            if u == v {
                return Err(contract(format!("self-loop at node {u}")));
            }
            list.push((u.min(v), u.max(v)));
        }
        list.sort_unstable();
        list.dedup();
        Ok(Self {
            num_nodes,
            edges: Arc::from(list),
            features,
            label,
            node_labels: None,
            motif_edges: Vec::new(),
        })
    }

    pub fn with_node_labels(mut self, labels: Vec<i64>) -> Result<Self> {
        if labels.len() != self.num_nodes {
            return Err(contract("node label count differs from num_nodes"));
        }
        self.node_labels = Some(labels);
        Ok(self)
    }

    /// Records ground-truth explanation edges given as endpoint pairs.
    pub fn with_motif_edges(mut self, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut ids = pairs
            .iter()
            .map(|&(u, v)| {
                self.edge_index(u, v)
                    .ok_or_else(|| contract(format!("motif edge ({u}, {v}) is not a graph edge")))
            })
            .collect::<Result<Vec<_>>>()?;
        ids.sort_unstable();
        ids.dedup();
        self.motif_edges = ids;
        Ok(self)
    }

    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    #[inline]
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn edges(&self) -> &EdgeList {
        &self.edges
    }

    #[inline]
    pub fn features(&self) -> &Tensor {
        &self.features
    }

    #[inline]
    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    #[inline]
    pub fn label(&self) -> usize {
        self.label
    }

    pub fn node_labels(&self) -> Option<&[i64]> {
        self.node_labels.as_deref()
    }

    /// Ids of the ground-truth motif edges; empty when none were recorded.
    pub fn motif_edges(&self) -> &[usize] {
        &self.motif_edges
    }

    /// Position of the undirected edge `{u, v}` in [`Graph::edges`].
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).ok()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_nodes];
        for &(u, v) in self.edges.iter() {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Same nodes and features with every edge removed.
    pub fn without_edges(&self) -> Self {
        Self {
            edges: Arc::from(Vec::new()),
            motif_edges: Vec::new(),
            ..self.clone()
        }
    }

    /// Relabels node `i` as `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.num_nodes;
        let mut seen = vec![false; n];
        if perm.len() != n || !perm.iter().all(|&p| p < n && !std::mem::replace(&mut seen[p], true)) {
            return Err(contract("not a permutation of the node set"));
        }
        let d = self.feature_dim();
        let mut feats = vec![0.0; n * d];
        for (i, &p) in perm.iter().enumerate() {
            feats[p * d..(p + 1) * d].copy_from_slice(self.features.row(i));
        }
        let edges = self.edges.iter().map(|&(u, v)| (perm[u], perm[v]));
        let mut g = Graph::new(n, edges, Tensor::from_raw(n, d, feats), self.label)?;
        if let Some(labels) = &self.node_labels {
            let mut out = vec![0; n];
            for (i, &p) in perm.iter().enumerate() {
                out[p] = labels[i];
            }
            g.node_labels = Some(out);
        }
        let motif: Vec<_> = self
            .motif_edges
            .iter()
            .map(|&e| {
                let (u, v) = self.edges[e];
                (perm[u], perm[v])
            })
            .collect();
        g.with_motif_edges(&motif)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphSet {
    graphs: Vec<Graph>,
    num_classes: usize,
    feature_dim: usize,
    name: String,
}

impl GraphSet {
    pub fn new(name: impl Into<String>, graphs: Vec<Graph>, num_classes: usize) -> Result<Self> {
        let feature_dim = graphs.first().map_or(0, Graph::feature_dim);
        for (i, g) in graphs.iter().enumerate() {
            if g.feature_dim() != feature_dim {
                return Err(contract(format!(
                    "graph {i} has feature dim {} but the set uses {feature_dim}",
                    g.feature_dim()
                )));
            }
            if g.label() >= num_classes {
                return Err(contract(format!(
                    "graph {i} label {} outside [0, {num_classes})",
                    g.label()
                )));
            }
        }
        Ok(Self {
            graphs,
            num_classes,
            feature_dim,
            name: name.into(),
        })
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn get(&self, i: usize) -> Option<&Graph> {
        self.graphs.get(i)
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> Vec<usize> {
        self.graphs.iter().map(Graph::label).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn feats(n: usize) -> Tensor {
        Tensor::ones(n, 1)
    }

    #[test]
    fn normalises_and_dedupes_edges() {
        let g = Graph::new(3, [(2, 0), (0, 2), (1, 2)], feats(3), 0).unwrap();
        assert_eq!(&g.edges()[..], &[(0, 2), (1, 2)]);
        assert_eq!(g.edge_index(2, 1), Some(1));
        assert_eq!(g.edge_index(0, 1), None);
        assert_eq!(g.degrees(), vec![1, 1, 2]);
    }

    #[test]
    fn rejects_self_loops_and_bad_endpoints() {
        assert!(Graph::new(2, [(1, 1)], feats(2), 0).is_err());
        assert!(Graph::new(2, [(0, 2)], feats(2), 0).is_err());
        assert!(Graph::new(3, [(0, 1)], feats(2), 0).is_err());
    }

    #[test]
    fn permutation_moves_features_and_motif() {
        let x = Tensor::from_rows(&[[1.0], [2.0], [3.0]]).unwrap();
        let g = Graph::new(3, [(0, 1), (1, 2)], x, 1)
            .unwrap()
            .with_motif_edges(&[(1, 2)])
            .unwrap();
        let p = g.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.features().data(), &[2.0, 3.0, 1.0]);
        assert_eq!(&p.edges()[..], &[(0, 1), (0, 2)]);
        assert_eq!(p.edges()[p.motif_edges()[0]], (0, 1));
        assert!(g.permuted(&[0, 0, 1]).is_err());
    }

    #[test]
    fn set_checks_dims_and_labels() {
        let a = Graph::new(1, [], feats(1), 0).unwrap();
        let b = Graph::new(1, [], Tensor::ones(1, 2), 0).unwrap();
        assert!(GraphSet::new("x", vec![a.clone(), b], 2).is_err());
        let c = Graph::new(1, [], feats(1), 2).unwrap();
        assert!(GraphSet::new("x", vec![a, c], 2).is_err());
    }
}
