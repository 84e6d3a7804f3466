use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{ExplainerConfig, Explanation, ExplanationSource};
use crate::autodiff::{Tape, Tensor, Var};
use crate::error::{contract, Result};
use crate::graph::Graph;
use crate::layers::{forward_vars, EdgeWeights, ModelParams, ParamVars};
use crate::train::{adam_step, AdamState};

const LOG_EPS: f64 = 1e-15;

/// One GNNExplainer run for `target_class` with frozen model weights.
///
/// Learns one logit per undirected edge and, when `cfg.feature_mask` is
/// set (the default), one per feature column. The loss is the target cross-entropy of the
/// masked prediction plus `size_coeff * Σσ(m_e)` plus
/// `entropy_coeff * mean binary entropy of σ(m_e)`, minimised with Adam.
pub fn gnn_explainer(
    params: &ModelParams,
    graph: &Graph,
    graph_id: usize,
    target_class: usize,
    cfg: &ExplainerConfig,
    seed: u64,
) -> Result<Explanation> {
    cfg.validate()?;
    if target_class >= params.dims().classes {
        return Err(contract(format!("target class {target_class} out of range")));
    }
    if graph.feature_dim() != params.dims().input {
        return Err(contract("graph features do not match the model input"));
    }
    let num_edges = graph.num_edges();
    let dim = graph.feature_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, cfg.init_std).map_err(|e| contract(e.to_string()))?;
    let mut sample = |r: usize, c: usize| Tensor::from_raw(r, c, (0..r * c).map(|_| normal.sample(&mut rng)).collect());
    let mut edge_logits = sample(num_edges, 1);
    let mut feat_logits = cfg.feature_mask.then(|| sample(1, dim));

    if num_edges > 0 || cfg.feature_mask {
        let mut tape = Tape::new();
        let pv = ParamVars::bind(&mut tape, params, false);
        let x_const = tape.constant(graph.features().clone());
        let base = tape.len();
        let mut shapes = vec![(num_edges, 1)];
        if cfg.feature_mask {
            shapes.push((1, dim));
        }
        let mut adam = AdamState::new(shapes);

        for _ in 0..cfg.epochs {
            tape.truncate(base);
            let me = tape.leaf(edge_logits.clone());
            let s = tape.sigmoid(me)?;
            let (x, mx) = match &feat_logits {
                Some(f) => {
                    let mx = tape.leaf(f.clone());
                    let sx = tape.sigmoid(mx)?;
                    (tape.col_scale(x_const, sx)?, Some(mx))
                }
                None => (x_const, None),
            };
            let fv = forward_vars(&mut tape, &pv, graph, x, s)?;
            let log_probs = tape.log_softmax(fv.logits)?;
            let picked = tape.pick(log_probs, 0, target_class)?;
            let mut loss = tape.scale(picked, -1.0)?;
            if num_edges > 0 {
                let reg = mask_regulariser(&mut tape, s, cfg)?;
                loss = tape.add(loss, reg)?;
            }
            let grads = tape.backward(loss)?;
            let ge = grads.get_or_zeros(me, (num_edges, 1));
            match (&mut feat_logits, mx) {
                (Some(f), Some(mx)) => {
                    let gx = grads.get_or_zeros(mx, (1, dim));
                    adam_step(&mut [&mut edge_logits, f], &[&ge, &gx], &mut adam, cfg.lr)?;
                }
                _ => adam_step(&mut [&mut edge_logits], &[&ge], &mut adam, cfg.lr)?,
            }
        }
    }

    let sigmoid = |t: &Tensor| t.data().iter().map(|&z| crate::autodiff::sigmoid(z)).collect::<Vec<_>>();
    Ok(Explanation {
        graph_id,
        edge_scores: EdgeWeights::from_raw(sigmoid(&edge_logits)),
        node_scores: None,
        feature_scores: feat_logits.as_ref().map(sigmoid),
        source: ExplanationSource::GnnExplainer,
    })
}

/// `size_coeff * Σ s + entropy_coeff * mean(−s ln s − (1−s) ln(1−s))`.
fn mask_regulariser(tape: &mut Tape, s: Var, cfg: &ExplainerConfig) -> Result<Var> {
    let total = tape.sum(s)?;
    let size = tape.scale(total, cfg.size_coeff)?;
    let s_eps = tape.add_scalar(s, LOG_EPS)?;
    let log_s = tape.log(s_eps)?;
    let a = tape.hadamard(s, log_s)?;
    let neg = tape.scale(s, -1.0)?;
    let one_minus = tape.add_scalar(neg, 1.0)?;
    let om_eps = tape.add_scalar(one_minus, LOG_EPS)?;
    let log_om = tape.log(om_eps)?;
    let b = tape.hadamard(one_minus, log_om)?;
    let ab = tape.add(a, b)?;
    let mean = tape.mean(ab)?;
    let ent = tape.scale(mean, -cfg.entropy_coeff)?;
    tape.add(size, ent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layers::{infer, init_params, Architecture, Dims};

    fn setup() -> (ModelParams, Graph) {
        let x = Tensor::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.5, 0.0], [0.0, 0.2]]).unwrap();
        let g = Graph::new(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)], x, 0).unwrap();
        let dims = Dims {
            input: 2,
            hidden: 8,
            classes: 2,
            depth: 2,
        };
        (init_params(Architecture::Gcn, dims, 4).unwrap(), g)
    }

    #[test]
    fn zero_init_without_training_gives_half() {
        let (p, g) = setup();
        let cfg = ExplainerConfig {
            init_std: 0.0,
            epochs: 1,
            lr: 1e-300,
            ..ExplainerConfig::default()
        };
        let e = gnn_explainer(&p, &g, 0, 0, &cfg, 1).unwrap();
        assert!(e.edge_scores.values().iter().all(|&s| (s - 0.5).abs() < 1e-12));
    }

    #[test]
    fn deterministic_and_in_unit_interval() {
        let (p, g) = setup();
        let cfg = ExplainerConfig {
            epochs: 30,
            feature_mask: true,
            ..ExplainerConfig::default()
        };
        let a = gnn_explainer(&p, &g, 2, 1, &cfg, 9).unwrap();
        assert_eq!(a, gnn_explainer(&p, &g, 2, 1, &cfg, 9).unwrap());
        assert!(a.edge_scores.values().iter().all(|s| (0.0..=1.0).contains(s)));
        assert_eq!(a.feature_scores.as_ref().map(Vec::len), Some(2));
        assert_eq!(a.graph_id, 2);
    }

    #[test]
    fn saturated_mask_data_term_is_unmasked_cross_entropy() {
        let (p, g) = setup();
        let mut tape = Tape::new();
        let pv = ParamVars::bind(&mut tape, &p, false);
        let x = tape.constant(g.features().clone());
        let me = tape.constant(Tensor::filled(g.num_edges(), 1, 40.0));
        let s = tape.sigmoid(me).unwrap();
        let fv = forward_vars(&mut tape, &pv, &g, x, s).unwrap();
        let masked = tape.value(fv.logits).clone();
        let plain = infer(&p, &g, &EdgeWeights::ones(&g)).unwrap().logits;
        for (a, b) in masked.data().iter().zip(plain.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn edgeless_graph_is_handled() {
        let (p, _) = setup();
        let g = Graph::new(2, [], Tensor::ones(2, 2), 0).unwrap();
        let e = gnn_explainer(&p, &g, 0, 0, &ExplainerConfig::default(), 0).unwrap();
        assert!(e.edge_scores.is_empty());
    }
}
