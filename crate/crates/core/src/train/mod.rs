//! Vanilla, explanation-directed and DropEdge training with Adam.
//!
//! Randomness is split into independent ChaCha streams (batch shuffling,
//! DropEdge, correct-prediction sampling, explainer seeds), so enabling one
//! mechanism never perturbs the draws of another.

mod adam;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Var};
use crate::error::{contract, Result};
use crate::explain::{explain_graph, topk_mask, ExplainerConfig, ExplainerKind, Explanation};
use crate::graph::{Graph, GraphSet, Split};
use crate::layers::{forward, infer, softmax, EdgeWeights, ModelParams, ParamVars};
use crate::metrics::{argmax, auroc, f1_score, F1Average, RunRecord, SplitTag};

pub use adam::{adam_step, AdamState};

const STREAM_SHUFFLE: u64 = 1;
const STREAM_DROPEDGE: u64 = 2;
const STREAM_SAMPLE: u64 = 3;
const STREAM_EXPLAIN: u64 = 4;

/// What happens to masks of graphs not sampled in an explanation round.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskPolicy {
    /// Earlier masks stay until overwritten.
    Persist,
    /// Each round clears all masks before installing the new ones.
    #[default]
    Refresh,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub burn_in: usize,
    pub sample_frac: f64,
    pub topk: f64,
    pub explainer: ExplainerKind,
    pub explainer_cfg: ExplainerConfig,
    pub dropedge_p: f64,
    pub mask_policy: MaskPolicy,
    pub batch_size: usize,
    pub seed: u64,
    pub f1_average: F1Average,
    /// Completed-epoch counts at which to snapshot parameters (0 = initial).
    pub checkpoint_epochs: Vec<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 150,
            lr: 0.01,
            burn_in: 10,
            sample_frac: 0.4,
            topk: 0.4,
            explainer: ExplainerKind::None,
            explainer_cfg: ExplainerConfig::default(),
            dropedge_p: 0.0,
            mask_policy: MaskPolicy::Refresh,
            batch_size: 32,
            seed: 0,
            f1_average: F1Average::Positive,
            checkpoint_epochs: Vec::new(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(contract("epochs and batch_size must be positive"));
        }
        if self.burn_in >= self.epochs {
            return Err(contract(format!(
                "burn_in {} must be below epochs {}",
                self.burn_in, self.epochs
            )));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(contract("lr must be positive"));
        }
        for (name, v) in [("sample_frac", self.sample_frac), ("topk", self.topk)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(contract(format!("{name} {v} outside [0, 1]")));
            }
        }
        if self.explainer != ExplainerKind::None && self.topk == 0.0 {
            return Err(contract("topk must be positive when an explainer is set"));
        }
        if !(0.0..1.0).contains(&self.dropedge_p) {
            return Err(contract(format!("dropedge_p {} outside [0, 1)", self.dropedge_p)));
        }
        self.explainer_cfg.validate()
    }
}

/// `−class_weights[label] · log_softmax(logits)[label]` for 1×C logits.
pub fn weighted_cross_entropy(tape: &mut Tape, logits: Var, label: usize, class_weights: &[f64]) -> Result<Var> {
    let c = tape.value(logits).cols();
    if label >= c || class_weights.len() != c {
        return Err(contract(format!(
            "label {label} / {} class weights for {c} logits",
            class_weights.len()
        )));
    }
    let ls = tape.log_softmax(logits)?;
    let picked = tape.pick(ls, 0, label)?;
    tape.scale(picked, -class_weights[label])
}

/// Inverse class frequency over `labels`, normalised to mean 1 over the
/// classes that occur. Absent classes get weight 0.
pub fn class_weights(labels: &[usize], num_classes: usize) -> Vec<f64> {
    let mut counts = vec![0usize; num_classes];
    for &l in labels {
        counts[l] += 1;
    }
    let inv: Vec<f64> = counts
        .iter()
        .map(|&c| if c == 0 { 0.0 } else { 1.0 / c as f64 })
        .collect();
    let present = counts.iter().filter(|&&c| c > 0).count().max(1);
    let mean = inv.iter().sum::<f64>() / present as f64;
    inv.iter().map(|w| if mean > 0.0 { w / mean } else { 0.0 }).collect()
}

/// Binary mask dropping each undirected edge independently with probability `p`.
pub fn apply_dropedge<R: Rng + ?Sized>(graph: &Graph, p: f64, rng: &mut R) -> Result<EdgeWeights> {
    if !(0.0..1.0).contains(&p) {
        return Err(contract(format!("DropEdge probability {p} outside [0, 1)")));
    }
    let values = (0..graph.num_edges())
        .map(|_| if rng.gen::<f64>() < p { 0.0 } else { 1.0 })
        .collect();
    EdgeWeights::from_values(graph, values)
}

/// Output of [`evaluate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub predictions: Vec<usize>,
    pub probabilities: Vec<Vec<f64>>,
    /// Mean unweighted cross-entropy.
    pub loss: f64,
}

/// Inference over `graphs`, optionally with per-graph edge weights.
pub fn evaluate(params: &ModelParams, graphs: &[&Graph], masks: Option<&[EdgeWeights]>) -> Result<Evaluation> {
    if let Some(m) = masks {
        if m.len() != graphs.len() {
            return Err(contract("one mask per graph required"));
        }
    }
    let mut predictions = Vec::with_capacity(graphs.len());
    let mut probabilities = Vec::with_capacity(graphs.len());
    let mut loss = 0.0;
    for (i, g) in graphs.iter().enumerate() {
        let ones;
        let w = match masks {
            Some(m) => &m[i],
            None => {
                ones = EdgeWeights::ones(g);
                &ones
            }
        };
        let logits = infer(params, g, w)?.logits;
        let z = logits.data();
        let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + z.iter().map(|x| (x - m).exp()).sum::<f64>().ln();
        loss += lse - z[g.label()];
        let p = softmax(z);
        predictions.push(argmax(&p));
        probabilities.push(p);
    }
    let n = graphs.len().max(1) as f64;
    Ok(Evaluation {
        predictions,
        probabilities,
        loss: loss / n,
    })
}

/// Result of [`train`].
#[derive(Clone, Debug)]
pub struct TrainOutput {
    pub params: ModelParams,
    pub records: Vec<RunRecord>,
    /// Most recent explanation per training graph that carries a mask.
    pub explanations: Vec<Explanation>,
    /// Active mask per training graph, aligned with `split.train`.
    pub masks: Vec<Option<EdgeWeights>>,
    /// `(completed epochs, params)` for each requested checkpoint.
    pub checkpoints: Vec<(usize, ModelParams)>,
    /// Number of explanation rounds that ran.
    pub explanation_rounds: usize,
}

/// Trains `init` on `split.train`.
///
/// Each epoch visits shuffled mini-batches; a graph is forwarded with its
/// explanation mask if one is installed, else with a fresh DropEdge mask when
/// `dropedge_p > 0`, else with all-ones weights. Losses are summed over the
/// batch and Adam steps once per batch. After every epoch index
/// `e >= burn_in` an explanation round runs when an explainer is configured:
/// correctly predicted training graphs are found on the unmasked model,
/// `⌊sample_frac · count⌋` of them are sampled, explained for their label,
/// and the top-k binary mask replaces any earlier mask of that graph. At
/// `topk = 1` every mask is all-ones whatever the scores, so no explainer
/// runs. Train and validation records are written after every epoch.
pub fn train(init: ModelParams, set: &GraphSet, split: &Split, cfg: &TrainConfig) -> Result<TrainOutput> {
    cfg.validate()?;
    if split.train.is_empty() {
        return Err(contract("empty training split"));
    }
    let mut params = init;
    let train_graphs: Vec<&Graph> = split
        .train
        .iter()
        .map(|&i| set.get(i).ok_or_else(|| contract(format!("graph index {i} out of range"))))
        .collect::<Result<_>>()?;
    let val_graphs: Vec<&Graph> = split.val.iter().filter_map(|&i| set.get(i)).collect();
    let labels: Vec<usize> = train_graphs.iter().map(|g| g.label()).collect();
    let weights = class_weights(&labels, set.num_classes());

    let stream = |s: u64| {
        let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
        r.set_stream(s);
        r
    };
    let mut shuffle_rng = stream(STREAM_SHUFFLE);
    let mut dropedge_rng = stream(STREAM_DROPEDGE);
    let mut sample_rng = stream(STREAM_SAMPLE);
    let mut explain_rng = stream(STREAM_EXPLAIN);

    let n = train_graphs.len();
    let mut masks: Vec<Option<EdgeWeights>> = vec![None; n];
    let mut latest: Vec<Option<Explanation>> = vec![None; n];
    let mut adam = AdamState::new(params.tensors().iter().map(|t| t.shape()));
    let mut records = Vec::new();
    let mut checkpoints = Vec::new();
    let mut rounds = 0;
    let mut order: Vec<usize> = (0..n).collect();
    if cfg.checkpoint_epochs.contains(&0) {
        checkpoints.push((0, params.clone()));
    }

    for epoch in 0..cfg.epochs {
        let dropped: Vec<Option<EdgeWeights>> = if cfg.dropedge_p > 0.0 {
            train_graphs
                .iter()
                .map(|g| apply_dropedge(g, cfg.dropedge_p, &mut dropedge_rng).map(Some))
                .collect::<Result<_>>()?
        } else {
            vec![None; n]
        };
        order.shuffle(&mut shuffle_rng);
        for batch in order.chunks(cfg.batch_size) {
            let mut tape = Tape::new();
            let pv = ParamVars::bind(&mut tape, &params, true);
            let mut total: Option<Var> = None;
            for &i in batch {
                let g = train_graphs[i];
                let ones;
                let w = match (&masks[i], &dropped[i]) {
                    (Some(m), _) => m,
                    (None, Some(d)) => d,
                    (None, None) => {
                        ones = EdgeWeights::ones(g);
                        &ones
                    }
                };
                let x = tape.constant(g.features().clone());
                let wv = tape.constant(w.to_tensor());
                let fv = crate::layers::forward_vars(&mut tape, &pv, g, x, wv)?;
                let loss = weighted_cross_entropy(&mut tape, fv.logits, g.label(), &weights)?;
                total = Some(match total {
                    Some(t) => tape.add(t, loss)?,
                    None => loss,
                });
            }
            let total = total.expect("batches are nonempty");
            let grads = tape.backward(total)?;
            let vars = pv.vars();
            let shapes: Vec<_> = params.tensors().iter().map(|t| t.shape()).collect();
            let gs: Vec<_> = vars
                .iter()
                .zip(&shapes)
                .map(|(&v, &s)| grads.get_or_zeros(v, s))
                .collect();
            let grefs: Vec<_> = gs.iter().collect();
            adam_step(&mut params.tensors_mut(), &grefs, &mut adam, cfg.lr)?;
        }

        if cfg.explainer != ExplainerKind::None && epoch >= cfg.burn_in {
            rounds += 1;
            if cfg.mask_policy == MaskPolicy::Refresh {
                masks.iter_mut().for_each(|m| *m = None);
            }
            let eval = evaluate(&params, &train_graphs, None)?;
            let correct: Vec<usize> = (0..n).filter(|&i| eval.predictions[i] == labels[i]).collect();
            let take = (cfg.sample_frac * correct.len() as f64).floor() as usize;
            let mut chosen: Vec<usize> = rand::seq::index::sample(&mut sample_rng, correct.len(), take)
                .into_iter()
                .map(|k| correct[k])
                .collect();
            chosen.sort_unstable();
            let seeds: Vec<u64> = chosen.iter().map(|_| explain_rng.gen()).collect();
            if cfg.topk >= 1.0 {
                for &i in &chosen {
                    masks[i] = Some(EdgeWeights::ones(train_graphs[i]));
                }
            } else {
                let results: Vec<(usize, Result<Option<Explanation>>)> = chosen
                    .par_iter()
                    .zip(&seeds)
                    .map(|(&i, &seed)| {
                        let g = train_graphs[i];
                        let r = explain_graph(
                            cfg.explainer,
                            &params,
                            g,
                            split.train[i],
                            labels[i],
                            &cfg.explainer_cfg,
                            seed,
                        );
                        (i, r)
                    })
                    .collect();
                for (i, r) in results {
                    match r.and_then(|e| {
                        let e = e.ok_or_else(|| contract("explainer returned nothing"))?;
                        let m = topk_mask(&e.edge_scores, cfg.topk)?;
                        Ok((e, m))
                    }) {
                        Ok((e, m)) => {
                            masks[i] = Some(m);
                            latest[i] = Some(e);
                        }
                        Err(err) => log::warn!("epoch {}: skipping graph {}: {err}", epoch + 1, split.train[i]),
                    }
                }
            }
        }

        let completed = epoch + 1;
        let masked = masks.iter().filter(|m| m.is_some()).count();
        records.push(record(&params, &train_graphs, cfg, completed, SplitTag::Train, masked, set.num_classes())?);
        if !val_graphs.is_empty() {
            records.push(record(&params, &val_graphs, cfg, completed, SplitTag::Val, masked, set.num_classes())?);
        }
        if let Some(last) = records.last() {
            log::debug!(
                "seed {} epoch {completed}: loss {:.4} auroc {:?} masked {masked}",
                cfg.seed,
                last.loss,
                last.auroc
            );
        }
        if cfg.checkpoint_epochs.contains(&completed) {
            checkpoints.push((completed, params.clone()));
        }
    }

    Ok(TrainOutput {
        params,
        records,
        explanations: latest.into_iter().flatten().collect(),
        masks,
        checkpoints,
        explanation_rounds: rounds,
    })
}

fn record(
    params: &ModelParams,
    graphs: &[&Graph],
    cfg: &TrainConfig,
    epoch: usize,
    split: SplitTag,
    masked: usize,
    num_classes: usize,
) -> Result<RunRecord> {
    let eval = evaluate(params, graphs, None)?;
    let labels: Vec<usize> = graphs.iter().map(|g| g.label()).collect();
    Ok(RunRecord {
        seed: cfg.seed,
        epoch,
        split,
        loss: eval.loss,
        auroc: positive_auroc(&eval, &labels),
        f1: f1_score(&eval.predictions, &labels, cfg.f1_average, num_classes),
        gef: None,
        gdr: None,
        dirichlet: None,
        masked_graph_count: masked,
    })
}

/// AUROC of the class-1 probability, or `None` when it is undefined.
pub fn positive_auroc(eval: &Evaluation, labels: &[usize]) -> Option<f64> {
    let scores: Vec<f64> = eval.probabilities.iter().map(|p| p.get(1).copied().unwrap_or(0.0)).collect();
    auroc(&scores, labels).ok()
}

/// Convenience wrapper used by tests and examples: forward plus weighted loss
/// for a single graph, returning the loss value.
pub fn graph_loss(params: &ModelParams, graph: &Graph, weights: &EdgeWeights, class_weights: &[f64]) -> Result<f64> {
    let mut tape = Tape::new();
    let (_, fv) = forward(params, graph, weights, &mut tape)?;
    let l = weighted_cross_entropy(&mut tape, fv.logits, graph.label(), class_weights)?;
    Ok(tape.scalar(l))
}
