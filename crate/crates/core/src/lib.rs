//! Explanation-directed message passing for graph neural networks.
//!
//! GNN layers whose neighbourhood aggregation is re-weighted by edge masks that
//! an explainer produces during training, together with the dense autodiff
//! engine, datasets, metrics and theory checks needed to study them.

pub mod autodiff;
pub mod cli;
pub mod error;
pub mod explain;
pub mod graph;
pub mod layers;
pub mod metrics;
pub mod train;

pub use error::{Error, Result};
