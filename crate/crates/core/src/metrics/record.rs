use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Val,
    Test,
}

impl fmt::Display for SplitTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Train => "train",
            Self::Val => "val",
            Self::Test => "test",
        })
    }
}

/// Metrics of one split after one epoch. `auroc` is absent when the split
/// holds a single class.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub epoch: usize,
    pub split: SplitTag,
    pub loss: f64,
    pub auroc: Option<f64>,
    pub f1: f64,
    pub gef: Option<f64>,
    pub gdr: Option<Vec<f64>>,
    pub dirichlet: Option<Vec<f64>>,
    pub masked_graph_count: usize,
}
