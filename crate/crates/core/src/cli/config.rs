use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explain::{ExplainerConfig, ExplainerKind};
use crate::graph::{parse_tu_dataset, synthetic_motif_dataset, GraphSet};
use crate::layers::{Architecture, Dims};
use crate::metrics::F1Average;
use crate::train::{MaskPolicy, TrainConfig};

/// One flat JSON document shared by every command. Unknown keys are
/// rejected; keys a command does not use are ignored by it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `"synthetic"` or a directory holding TU files.
    pub dataset: String,
    /// TU file prefix; defaults to the directory name.
    pub dataset_name: Option<String>,
    pub synthetic_graphs: usize,
    pub synthetic_base_size: usize,
    pub synthetic_motif_prob: f64,
    pub synthetic_seed: u64,
    pub arch: Architecture,
    pub depth: usize,
    pub hidden: usize,
    pub lr: f64,
    pub epochs: usize,
    pub burn_in: usize,
    pub sample_frac: f64,
    pub topk: f64,
    pub explainer: ExplainerKind,
    pub explainer_runs: usize,
    pub explainer_epochs: usize,
    pub explainer_lr: f64,
    pub ig_steps: usize,
    /// Learn a per-feature mask alongside the GNNExplainer edge mask.
    pub feature_mask: bool,
    /// Explainer used to score test graphs for GEF.
    pub gef_explainer: ExplainerKind,
    /// Hard-mask fraction for GEF; 0.1 for GNNExplainer, 0.25 for
    /// node-level explainers when unset.
    pub eval_topk: Option<f64>,
    pub dropedge_p: f64,
    pub mask_policy: MaskPolicy,
    pub batch_size: usize,
    pub seeds: Vec<u64>,
    /// Train, validation and test fractions.
    pub split: [f64; 3],
    pub out_dir: PathBuf,
    pub f1_average: F1Average,
    pub depths: Vec<usize>,
    pub topks: Vec<f64>,
    /// Extra epochs at which `train` writes checkpoints (the final epoch is
    /// always written).
    pub checkpoint_epochs: Vec<usize>,
    pub checkpoints: Vec<PathBuf>,
    /// Graphs for `explain`; the first ten test graphs of the first seed
    /// when empty.
    pub graph_ids: Vec<usize>,
    pub precision_k: Option<usize>,
    pub instances: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        let e = ExplainerConfig::default();
        Self {
            dataset: "synthetic".into(),
            dataset_name: None,
            synthetic_graphs: 500,
            synthetic_base_size: 12,
            synthetic_motif_prob: 0.5,
            synthetic_seed: 0,
            arch: Architecture::Gcn,
            depth: 3,
            hidden: 32,
            lr: t.lr,
            epochs: t.epochs,
            burn_in: t.burn_in,
            sample_frac: t.sample_frac,
            topk: t.topk,
            explainer: ExplainerKind::Gnnexplainer,
            explainer_runs: e.runs,
            explainer_epochs: e.epochs,
            explainer_lr: e.lr,
            ig_steps: e.ig_steps,
            feature_mask: e.feature_mask,
            gef_explainer: ExplainerKind::Gnnexplainer,
            eval_topk: None,
            dropedge_p: 0.0,
            mask_policy: t.mask_policy,
            batch_size: t.batch_size,
            seeds: vec![0, 1, 2],
            split: [0.8, 0.0, 0.2],
            out_dir: PathBuf::from("out"),
            f1_average: F1Average::Positive,
            depths: vec![2, 3, 4, 5, 6],
            topks: vec![0.1, 0.2, 0.4, 0.6, 0.8, 1.0],
            checkpoint_epochs: Vec::new(),
            checkpoints: Vec::new(),
            graph_ids: Vec::new(),
            precision_k: None,
            instances: 100,
        }
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn is_synthetic(&self) -> bool {
        self.dataset == "synthetic"
    }

    pub fn explainer_config(&self) -> ExplainerConfig {
        ExplainerConfig {
            epochs: self.explainer_epochs,
            lr: self.explainer_lr,
            runs: self.explainer_runs,
            ig_steps: self.ig_steps,
            feature_mask: self.feature_mask,
            ..ExplainerConfig::default()
        }
    }

    pub fn eval_topk(&self) -> f64 {
        self.eval_topk.unwrap_or(match self.gef_explainer {
            ExplainerKind::IntegratedGradients => 0.25,
            _ => 0.1,
        })
    }

    /// Training configuration for one run; `explainer` and `dropedge_p`
    /// select the variant.
    pub fn train_config(&self, seed: u64, explainer: ExplainerKind, topk: f64, dropedge_p: f64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            lr: self.lr,
            burn_in: self.burn_in,
            sample_frac: self.sample_frac,
            topk,
            explainer,
            explainer_cfg: self.explainer_config(),
            dropedge_p,
            mask_policy: self.mask_policy,
            batch_size: self.batch_size,
            seed,
            f1_average: self.f1_average,
            checkpoint_epochs: self.checkpoint_epochs.clone(),
        }
    }

    pub fn dims(&self, set: &GraphSet, depth: usize) -> Dims {
        Dims {
            input: set.feature_dim(),
            hidden: self.hidden,
            classes: set.num_classes(),
            depth,
        }
    }

    /// Checks values and referenced paths before any work starts.
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(config_err("seeds must not be empty"));
        }
        if self.depth == 0 || self.hidden == 0 || self.depths.iter().any(|&d| d == 0) {
            return Err(config_err("depth and hidden must be positive"));
        }
        if self.topks.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
            return Err(config_err("topks must lie in (0, 1]"));
        }
        if let Some(k) = self.eval_topk {
            if !(k > 0.0 && k <= 1.0) {
                return Err(config_err(format!("eval_topk {k} outside (0, 1]")));
            }
        }
        let s: f64 = self.split.iter().sum();
        if (s - 1.0).abs() > 1e-9 || self.split.iter().any(|r| *r < 0.0) || self.split[2] == 0.0 {
            return Err(config_err(format!("split {:?} must be nonnegative, sum to 1 and keep a test part", self.split)));
        }
        self.train_config(0, self.explainer, self.topk, self.dropedge_p)
            .validate()
            .map_err(|e| config_err(e.to_string()))?;
        if self.is_synthetic() {
            if self.synthetic_graphs < 2 || self.synthetic_base_size < 2 {
                return Err(config_err("synthetic dataset needs at least 2 graphs of 2 nodes"));
            }
            if !(0.0..=1.0).contains(&self.synthetic_motif_prob) {
                return Err(config_err("synthetic_motif_prob outside [0, 1]"));
            }
        } else if !Path::new(&self.dataset).is_dir() {
            return Err(Error::MissingFile(PathBuf::from(&self.dataset)));
        }
        for c in &self.checkpoints {
            if !c.is_file() {
                return Err(Error::Checkpoint(format!("missing checkpoint {}", c.display())));
            }
        }
        Ok(())
    }

    pub fn load_dataset(&self) -> Result<GraphSet> {
        if self.is_synthetic() {
            return synthetic_motif_dataset(
                self.synthetic_graphs,
                self.synthetic_base_size,
                self.synthetic_motif_prob,
                self.synthetic_seed,
            );
        }
        let dir = Path::new(&self.dataset);
        let name = match &self.dataset_name {
            Some(n) => n.clone(),
            None => dir
                .file_name()
                .and_then(|n| n.to_str())
                .ok_or_else(|| config_err(format!("cannot infer dataset name from {}", dir.display())))?
                .to_string(),
        };
        parse_tu_dataset(dir, &name)
    }
}
