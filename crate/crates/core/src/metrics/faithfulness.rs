use crate::error::{Error, Result};
use crate::explain::{explain_graph, graph_seed, topk_mask, ExplainerConfig, ExplainerKind};
use crate::graph::Graph;
use crate::layers::{predict_proba, EdgeWeights, ModelParams};

const KL_CLAMP: f64 = 1e-12;

fn check_distribution(p: &[f64], name: &str) -> Result<()> {
    if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidDistribution(format!("{name} has a negative or non-finite entry")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!("{name} sums to {s}")));
    }
    Ok(())
}

/// `1 − exp(−KL(p_full ‖ p_masked))` with natural logs; masked entries are
/// clamped below at 1e-12.
pub fn gef(p_full: &[f64], p_masked: &[f64]) -> Result<f64> {
    if p_full.len() != p_masked.len() || p_full.is_empty() {
        return Err(Error::InvalidDistribution("distributions differ in length".into()));
    }
    check_distribution(p_full, "full prediction")?;
    check_distribution(p_masked, "masked prediction")?;
    let kl: f64 = p_full
        .iter()
        .zip(p_masked)
        .filter(|(&p, _)| p > 0.0)
        .map(|(&p, &q)| p * (p.ln() - q.max(KL_CLAMP).ln()))
        .sum();
    Ok(1.0 - (-kl.max(0.0)).exp())
}

/// Mean GEF over `graphs` (pairs of dataset id and graph). Each graph is
/// explained for its predicted class, the scores are hard-masked at
/// `eval_topk`, and the masked prediction is compared with the full one.
/// Graphs whose explainer fails are skipped with a warning.
pub fn gef_protocol(
    params: &ModelParams,
    graphs: &[(usize, &Graph)],
    explainer: ExplainerKind,
    cfg: &ExplainerConfig,
    eval_topk: f64,
    seed: u64,
) -> Result<f64> {
    let mut total = 0.0;
    let mut count = 0usize;
    for &(id, g) in graphs {
        let full = predict_proba(params, g, &EdgeWeights::ones(g))?;
        let target = argmax(&full);
        let scores = match explain_graph(explainer, params, g, id, target, cfg, graph_seed(seed, id)) {
            Ok(Some(e)) => e.edge_scores,
            Ok(None) => EdgeWeights::ones(g),
            Err(e) => {
                log::warn!("skipping graph {id} in faithfulness evaluation: {e}");
                continue;
            }
        };
        let mask = topk_mask(&scores, eval_topk)?;
        let masked = predict_proba(params, g, &mask)?;
        total += gef(&full, &masked)?;
        count += 1;
    }
    if count == 0 {
        return Err(Error::UndefinedMetric("no graph could be explained".into()));
    }
    Ok(total / count as f64)
}

pub(crate) fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in p.iter().enumerate() {
        if x > p[best] {
            best = i;
        }
    }
    best
}
