//! Explainers that score edges (and optionally nodes or features) of one
//! graph prediction, plus the post-processing used to turn scores into
//! binary message-passing masks.

mod gnnexplainer;
mod ig;

use std::io;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::graph::Graph;
use crate::layers::{EdgeWeights, ModelParams};

pub use gnnexplainer::gnn_explainer;
pub use ig::{ig_attributions, integrated_gradients, integrated_gradients_core};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplanationSource {
    GnnExplainer,
    IntegratedGradients,
    GroundTruth,
    Random,
}

impl ExplanationSource {
    pub fn name(self) -> &'static str {
        match self {
            Self::GnnExplainer => "gnnexplainer",
            Self::IntegratedGradients => "integrated_gradients",
            Self::GroundTruth => "ground_truth",
            Self::Random => "random",
        }
    }
}

/// Explainer selected by a training or evaluation run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplainerKind {
    #[default]
    None,
    #[serde(alias = "gnn_explainer")]
    Gnnexplainer,
    #[serde(alias = "ig")]
    IntegratedGradients,
    Random,
    /// Recorded motif edges of synthetic graphs.
    GroundTruth,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Explanation {
    pub graph_id: usize,
    pub edge_scores: EdgeWeights,
    pub node_scores: Option<Vec<f64>>,
    pub feature_scores: Option<Vec<f64>>,
    pub source: ExplanationSource,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExplainerConfig {
    pub epochs: usize,
    pub lr: f64,
    pub runs: usize,
    pub size_coeff: f64,
    pub entropy_coeff: f64,
    pub ig_steps: usize,
    /// Standard deviation of the normal mask-logit initialisation.
    pub init_std: f64,
    /// Learn and apply a per-feature mask alongside the edge mask.
    pub feature_mask: bool,
}

impl Default for ExplainerConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            lr: 0.01,
            runs: 5,
            size_coeff: 0.005,
            entropy_coeff: 1.0,
            ig_steps: 50,
            init_std: 0.1,
            feature_mask: true,
        }
    }
}

impl ExplainerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.runs == 0 || self.ig_steps == 0 {
            return Err(contract("explainer epochs, runs and ig_steps must be positive"));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(contract(format!("explainer lr {} must be positive", self.lr)));
        }
        if !(self.init_std >= 0.0 && self.size_coeff >= 0.0 && self.entropy_coeff >= 0.0) {
            return Err(contract("explainer coefficients must be nonnegative"));
        }
        Ok(())
    }
}

/// Runs the selected explainer for `target_class`. GNNExplainer returns the
/// median of `cfg.runs` seeded runs. `ExplainerKind::None` yields `None`.
pub fn explain_graph(
    kind: ExplainerKind,
    params: &ModelParams,
    graph: &Graph,
    graph_id: usize,
    target_class: usize,
    cfg: &ExplainerConfig,
    seed: u64,
) -> Result<Option<Explanation>> {
    match kind {
        ExplainerKind::None => Ok(None),
        ExplainerKind::Gnnexplainer => {
            let runs = (0..cfg.runs)
                .map(|r| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(r as u64);
                    gnn_explainer(params, graph, graph_id, target_class, cfg, rand::Rng::gen(&mut rng))
                })
                .collect::<Result<Vec<_>>>()?;
            median_aggregate(&runs).map(Some)
        }
        ExplainerKind::IntegratedGradients => {
            integrated_gradients(params, graph, graph_id, target_class, cfg).map(Some)
        }
        ExplainerKind::Random => Ok(Some(random_explanation(graph, graph_id, seed))),
        ExplainerKind::GroundTruth => {
            if graph.motif_edges().is_empty() {
                return Err(contract(format!("graph {graph_id} has no ground-truth edges")));
            }
            Ok(Some(ground_truth_explanation(graph, graph_id)))
        }
    }
}

/// Explainer seed for one graph derived from a run seed.
pub fn graph_seed(seed: u64, graph_id: usize) -> u64 {
    seed ^ (graph_id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Edge score `(s_u + s_v) / 2`.
pub fn node_to_edge(graph: &Graph, node_scores: &[f64]) -> Result<EdgeWeights> {
    if node_scores.len() != graph.num_nodes() {
        return Err(contract(format!(
            "{} node scores for {} nodes",
            node_scores.len(),
            graph.num_nodes()
        )));
    }
    let values = graph
        .edges()
        .iter()
        .map(|&(u, v)| 0.5 * (node_scores[u] + node_scores[v]))
        .collect();
    EdgeWeights::from_values(graph, values)
}

/// Node score is the mean over incident edges; isolated nodes get 0.
pub fn edge_to_node(graph: &Graph, edge_scores: &EdgeWeights) -> Vec<f64> {
    let mut sum = vec![0.0; graph.num_nodes()];
    let mut count = vec![0usize; graph.num_nodes()];
    for (&(u, v), &s) in graph.edges().iter().zip(edge_scores.values()) {
        sum[u] += s;
        sum[v] += s;
        count[u] += 1;
        count[v] += 1;
    }
    sum.iter()
        .zip(&count)
        .map(|(&s, &c)| if c == 0 { 0.0 } else { s / c as f64 })
        .collect()
}

/// Edge ids ordered by score descending, ties by ascending id.
pub fn ranked_edges(scores: &EdgeWeights) -> Vec<usize> {
    let v = scores.values();
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
    order
}

/// Number of edges kept by a top-k fraction: `ceil(k_frac * num_edges)`.
pub fn topk_count(num_edges: usize, k_frac: f64) -> usize {
    // The small slack keeps products such as 0.7 * 10 from rounding up to 8.
    let raw = (k_frac * num_edges as f64 - 1e-9).ceil().max(0.0) as usize;
    raw.min(num_edges)
}

/// Binary mask keeping the `ceil(k_frac * |E|)` best-scoring edges.
pub fn topk_mask(scores: &EdgeWeights, k_frac: f64) -> Result<EdgeWeights> {
    if !(k_frac > 0.0 && k_frac <= 1.0) {
        return Err(contract(format!("top-k fraction {k_frac} outside (0, 1]")));
    }
    let keep = topk_count(scores.len(), k_frac);
    let mut mask = vec![0.0; scores.len()];
    for e in ranked_edges(scores).into_iter().take(keep) {
        mask[e] = 1.0;
    }
    Ok(EdgeWeights::from_raw(mask))
}

/// Element-wise lower median of several explanations of the same graph.
pub fn median_aggregate(explanations: &[Explanation]) -> Result<Explanation> {
    let first = explanations
        .first()
        .ok_or_else(|| contract("median of an empty explanation list"))?;
    for e in explanations {
        if e.graph_id != first.graph_id || e.source != first.source {
            return Err(contract("median over explanations of different graphs or sources"));
        }
        if e.edge_scores.len() != first.edge_scores.len() {
            return Err(contract("median over explanations with different edge counts"));
        }
    }
    let edge = lower_median(explanations.iter().map(|e| Some(e.edge_scores.values())))
        .expect("edge scores are always present");
    Ok(Explanation {
        graph_id: first.graph_id,
        edge_scores: EdgeWeights::from_raw(edge),
        node_scores: lower_median(explanations.iter().map(|e| e.node_scores.as_deref())),
        feature_scores: lower_median(explanations.iter().map(|e| e.feature_scores.as_deref())),
        source: first.source,
    })
}

fn lower_median<'a>(items: impl Iterator<Item = Option<&'a [f64]>>) -> Option<Vec<f64>> {
    let rows: Vec<&[f64]> = items.collect::<Option<Vec<_>>>()?;
    let len = rows.first()?.len();
    if rows.iter().any(|r| r.len() != len) {
        return None;
    }
    let mut column = vec![0.0; rows.len()];
    Some(
        (0..len)
            .map(|j| {
                for (c, r) in column.iter_mut().zip(&rows) {
                    *c = r[j];
                }
                column.sort_by(f64::total_cmp);
                column[(rows.len() - 1) / 2]
            })
            .collect(),
    )
}

/// Scores 1 on the recorded motif edges and 0 elsewhere.
pub fn ground_truth_explanation(graph: &Graph, graph_id: usize) -> Explanation {
    let mut scores = vec![0.0; graph.num_edges()];
    for &e in graph.motif_edges() {
        scores[e] = 1.0;
    }
    Explanation {
        graph_id,
        edge_scores: EdgeWeights::from_raw(scores),
        node_scores: None,
        feature_scores: None,
        source: ExplanationSource::GroundTruth,
    }
}

/// Independent uniform edge scores; a baseline for faithfulness comparisons.
pub fn random_explanation(graph: &Graph, graph_id: usize, seed: u64) -> Explanation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Uniform::new_inclusive(0.0, 1.0);
    let scores = (0..graph.num_edges()).map(|_| dist.sample(&mut rng)).collect();
    Explanation {
        graph_id,
        edge_scores: EdgeWeights::from_raw(scores),
        node_scores: None,
        feature_scores: None,
        source: ExplanationSource::Random,
    }
}

/// Fraction of the `k` top-ranked edges that are ground-truth edges.
pub fn precision_at_k(scores: &EdgeWeights, truth: &[usize], k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let hits = ranked_edges(scores)
        .into_iter()
        .take(k)
        .filter(|e| truth.contains(e))
        .count();
    hits as f64 / k as f64
}

#[derive(Serialize)]
struct DumpRow<'a> {
    graph_id: usize,
    edge_u: usize,
    edge_v: usize,
    score: f64,
    source: &'a str,
}

/// Writes `graph_id, edge_u, edge_v, score, source` rows, one per edge.
pub fn write_dump<W: io::Write>(out: W, rows: &[(&Graph, &Explanation)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (graph, exp) in rows {
        if exp.edge_scores.len() != graph.num_edges() {
            return Err(contract("explanation does not match its graph"));
        }
        for (&(u, v), &score) in graph.edges().iter().zip(exp.edge_scores.values()) {
            w.serialize(DumpRow {
                graph_id: exp.graph_id,
                edge_u: u,
                edge_v: v,
                score,
                source: exp.source.name(),
            })?;
        }
    }
    if rows.is_empty() {
        w.write_record(["graph_id", "edge_u", "edge_v", "score", "source"])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::Tensor;

    fn star(leaves: usize) -> Graph {
        Graph::new(leaves + 1, (1..=leaves).map(|i| (0, i)), Tensor::ones(leaves + 1, 1), 0).unwrap()
    }

    fn scores(v: &[f64]) -> EdgeWeights {
        EdgeWeights::from_raw(v.to_vec())
    }

    #[test]
    fn node_edge_conversions() {
        let g = star(3);
        let e = node_to_edge(&g, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(e.values(), &[0.5, 0.5, 0.5]);
        let c = node_to_edge(&g, &[0.3; 4]).unwrap();
        assert!(c.values().iter().all(|&x| x == 0.3));
        let cycle = Graph::new(4, [(0, 1), (1, 2), (2, 3), (0, 3)], Tensor::ones(4, 1), 0).unwrap();
        let s = vec![0.7; 4];
        assert_eq!(edge_to_node(&cycle, &node_to_edge(&cycle, &s).unwrap()), s);
        let lonely = Graph::new(2, [], Tensor::ones(2, 1), 0).unwrap();
        assert_eq!(edge_to_node(&lonely, &EdgeWeights::ones(&lonely)), vec![0.0, 0.0]);
    }

    #[test]
    fn topk_counts_and_ties() {
        let s = scores(&[0.1, 0.9, 0.3, 0.8, 0.2, 0.7, 0.4, 0.6, 0.5, 0.0]);
        let m = topk_mask(&s, 0.4).unwrap();
        assert_eq!(m.values().iter().sum::<f64>(), 4.0);
        assert_eq!(m.values(), &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        assert!(topk_mask(&s, 1.0).unwrap().is_all_ones());
        let tied = topk_mask(&scores(&[0.5; 6]), 0.5).unwrap();
        assert_eq!(tied.values(), &[1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
        assert!(topk_mask(&s, 0.0).is_err());
        assert_eq!(topk_count(10, 0.7), 7);
        assert_eq!(topk_count(3, 0.1), 1);
        assert_eq!(topk_count(0, 0.4), 0);
    }

    fn exp_with(edge: &[f64]) -> Explanation {
        Explanation {
            graph_id: 3,
            edge_scores: scores(edge),
            node_scores: None,
            feature_scores: Some(edge.to_vec()),
            source: ExplanationSource::GnnExplainer,
        }
    }

    #[test]
    fn median_rules() {
        let m = median_aggregate(&[exp_with(&[0.1]), exp_with(&[0.9]), exp_with(&[0.5])]).unwrap();
        assert_eq!(m.edge_scores.values(), &[0.5]);
        assert_eq!(m.feature_scores, Some(vec![0.5]));
        let even = median_aggregate(&[exp_with(&[0.2]), exp_with(&[0.8])]).unwrap();
        assert_eq!(even.edge_scores.values(), &[0.2]);
        let runs = [
            exp_with(&[0.4, 0.6]),
            exp_with(&[0.4, 0.6]),
            exp_with(&[1.0, 0.0]),
            exp_with(&[0.4, 0.6]),
            exp_with(&[0.4, 0.6]),
        ];
        assert_eq!(median_aggregate(&runs).unwrap().edge_scores.values(), &[0.4, 0.6]);
        let mut other = exp_with(&[0.1]);
        other.graph_id = 4;
        assert!(median_aggregate(&[exp_with(&[0.1]), other]).is_err());
        assert!(median_aggregate(&[]).is_err());
    }

    #[test]
    fn ground_truth_precision_is_one() {
        let g = Graph::new(5, [(0, 1), (1, 2), (2, 3), (3, 4)], Tensor::ones(5, 1), 1)
            .unwrap()
            .with_motif_edges(&[(1, 2), (3, 4)])
            .unwrap();
        let gt = ground_truth_explanation(&g, 0);
        assert_eq!(precision_at_k(&gt.edge_scores, g.motif_edges(), 2), 1.0);
        assert_eq!(precision_at_k(&scores(&[1.0, 0.0, 0.5, 0.7]), g.motif_edges(), 2), 0.5);
    }

    #[test]
    fn dump_has_expected_header() {
        let g = star(2);
        let e = ground_truth_explanation(&g, 7);
        let mut buf = Vec::new();
        write_dump(&mut buf, &[(&g, &e)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "graph_id,edge_u,edge_v,score,source\n7,0,1,0.0,ground_truth\n7,0,2,0.0,ground_truth\n"
        );
    }

    #[test]
    fn explainer_kind_names() {
        let k: ExplainerKind = serde_json::from_str("\"ig\"").unwrap();
        assert_eq!(k, ExplainerKind::IntegratedGradients);
        let k: ExplainerKind = serde_json::from_str("\"gnnexplainer\"").unwrap();
        assert_eq!(k, ExplainerKind::Gnnexplainer);
        let k: ExplainerKind = serde_json::from_str("\"none\"").unwrap();
        assert_eq!(k, ExplainerKind::None);
    }
}
