use super::{node_to_edge, ExplainerConfig, Explanation, ExplanationSource};
use crate::autodiff::{Tape, Tensor};
use crate::error::{contract, Result};
use crate::graph::Graph;
use crate::layers::{forward_vars, EdgeWeights, ModelParams, ParamVars};

/// Integrated Gradients from the zero baseline for an arbitrary function
/// given through its gradient: `x ⊙ (1/m) Σ_{k=1..m} ∇f(k/m · x)`.
pub fn integrated_gradients_core<F>(x: &Tensor, steps: usize, mut grad: F) -> Result<Tensor>
where
    F: FnMut(&Tensor) -> Result<Tensor>,
{
    if steps == 0 {
        return Err(contract("integrated gradients needs at least one step"));
    }
    let mut acc = Tensor::zeros(x.rows(), x.cols());
    for k in 1..=steps {
        let alpha = k as f64 / steps as f64;
        let g = grad(&x.map(|v| alpha * v))?;
        if g.shape() != x.shape() {
            return Err(contract("gradient shape differs from the input"));
        }
        acc.add_assign(&g);
    }
    let inv = 1.0 / steps as f64;
    Ok(x.zip_map(&acc, |xi, gi| xi * gi * inv))
}

/// Raw per-entry attributions (N×d) of the softmax probability of
/// `target_class` with respect to the node features.
pub fn ig_attributions(params: &ModelParams, graph: &Graph, target_class: usize, steps: usize) -> Result<Tensor> {
    if target_class >= params.dims().classes {
        return Err(contract(format!("target class {target_class} out of range")));
    }
    let ones = EdgeWeights::ones(graph).to_tensor();
    let mut tape = Tape::new();
    let pv = ParamVars::bind(&mut tape, params, false);
    let w = tape.constant(ones);
    let base = tape.len();
    integrated_gradients_core(graph.features(), steps, |xk| {
        tape.truncate(base);
        let x = tape.leaf(xk.clone());
        let fv = forward_vars(&mut tape, &pv, graph, x, w)?;
        let probs = tape.softmax(fv.logits)?;
        let p = tape.pick(probs, 0, target_class)?;
        let grads = tape.backward(p)?;
        Ok(grads.get_or_zeros(x, xk.shape()))
    })
}

/// Node scores `|Σ_features attribution|`, min-max normalised; a constant
/// score vector (for example all-zero attributions) maps to 0.5 everywhere.
/// Edge scores average their endpoint scores.
pub fn integrated_gradients(
    params: &ModelParams,
    graph: &Graph,
    graph_id: usize,
    target_class: usize,
    cfg: &ExplainerConfig,
) -> Result<Explanation> {
    cfg.validate()?;
    let attr = ig_attributions(params, graph, target_class, cfg.ig_steps)?;
    let raw: Vec<f64> = (0..attr.rows()).map(|i| attr.row(i).iter().sum::<f64>().abs()).collect();
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let node_scores: Vec<f64> = if hi > lo {
        raw.iter().map(|r| (r - lo) / (hi - lo)).collect()
    } else {
        vec![0.5; raw.len()]
    };
    Ok(Explanation {
        graph_id,
        edge_scores: node_to_edge(graph, &node_scores)?,
        node_scores: Some(node_scores),
        feature_scores: None,
        source: ExplanationSource::IntegratedGradients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layers::{init_params, predict_proba, Architecture, Dims};

    #[test]
    fn linear_model_closed_form() {
        // f(X) = mean over rows of X·w, so ∇f = w / N on every row.
        let x = Tensor::from_rows(&[[1.0, 2.0], [-0.5, 3.0], [0.0, 1.0]]).unwrap();
        let w = [0.3, -0.7];
        let n = x.rows() as f64;
        let grad = |_: &Tensor| {
            let g: Vec<f64> = (0..3).flat_map(|_| w.iter().map(|c| c / n)).collect();
            Tensor::new(3, 2, g)
        };
        let attr = integrated_gradients_core(&x, 17, grad).unwrap();
        for i in 0..3 {
            let node: f64 = attr.row(i).iter().sum();
            let exact = (x.get(i, 0) * w[0] + x.get(i, 1) * w[1]) / n;
            assert!((node - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn completeness_for_every_architecture() {
        let x = Tensor::from_rows(&[[1.0, 0.0, 0.5], [0.0, 1.0, 0.2], [1.0, 1.0, 0.0], [0.3, 0.0, 1.0]]).unwrap();
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3)], x, 0).unwrap();
        let dims = Dims {
            input: 3,
            hidden: 8,
            classes: 2,
            depth: 3,
        };
        for arch in Architecture::ALL {
            let p = init_params(arch, dims, 21).unwrap();
            let attr = ig_attributions(&p, &g, 1, 200).unwrap();
            let full = predict_proba(&p, &g, &EdgeWeights::ones(&g)).unwrap()[1];
            let base_graph = Graph::new(4, g.edges().iter().copied(), Tensor::zeros(4, 3), 0).unwrap();
            let base = predict_proba(&p, &base_graph, &EdgeWeights::ones(&base_graph)).unwrap()[1];
            let diff = full - base;
            let total = attr.sum();
            assert!(
                (total - diff).abs() <= 0.02 * diff.abs().max(1e-3),
                "{arch}: {total} vs {diff}"
            );
        }
    }

    #[test]
    fn zero_features_give_uniform_scores() {
        let g = Graph::new(3, [(0, 1), (1, 2)], Tensor::zeros(3, 2), 0).unwrap();
        let dims = Dims {
            input: 2,
            hidden: 4,
            classes: 2,
            depth: 2,
        };
        let p = init_params(Architecture::Gin, dims, 0).unwrap();
        let e = integrated_gradients(&p, &g, 0, 0, &ExplainerConfig::default()).unwrap();
        assert_eq!(e.node_scores, Some(vec![0.5; 3]));
        assert_eq!(e.edge_scores.values(), &[0.5, 0.5]);
    }
}
