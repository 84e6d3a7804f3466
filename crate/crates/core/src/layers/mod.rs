//! GNN layers with edge-weighted aggregation and a mean-pool readout.
//!
//! Every aggregation multiplies the message along edge `{u, v}` by a weight
//! `s_uv` in `[0, 1]`. All-ones weights give the ordinary architectures.

use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Tensor, Var};
use crate::error::{contract, Error, Result};
use crate::graph::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Gcn,
    GraphConv,
    GraphSage,
    Gin,
}

impl Architecture {
    pub const ALL: [Architecture; 4] = [Self::Gcn, Self::GraphConv, Self::GraphSage, Self::Gin];

    pub fn name(self) -> &'static str {
        match self {
            Self::Gcn => "gcn",
            Self::GraphConv => "graphconv",
            Self::GraphSage => "graphsage",
            Self::Gin => "gin",
        }
    }

    /// Stable numeric tag used in checkpoints.
    pub fn tag(self) -> u8 {
        match self {
            Self::Gcn => 0,
            Self::GraphConv => 1,
            Self::GraphSage => 2,
            Self::Gin => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.tag() == tag)
    }

    /// Weight tensors per layer: GCN has one, the others two.
    pub fn weights_per_layer(self) -> usize {
        match self {
            Self::Gcn => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown architecture {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dims {
    pub input: usize,
    pub hidden: usize,
    pub classes: usize,
    pub depth: usize,
}

/// Layer weights of one model.
///
/// Per layer: GCN `[W]`; GraphConv and GraphSAGE `[W_a, W_n]` (self and
/// neighbour); GIN `[W_1, W_2]` (the two MLP weights).
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    architecture: Architecture,
    layers: Vec<Vec<Tensor>>,
    readout: Tensor,
    dims: Dims,
}

impl ModelParams {
    pub fn from_parts(architecture: Architecture, layers: Vec<Vec<Tensor>>, readout: Tensor) -> Result<Self> {
        let depth = layers.len();
        if depth == 0 {
            return Err(contract("model needs at least one layer"));
        }
        let input = layers[0].first().map_or(0, Tensor::rows);
        let hidden = readout.rows();
        let dims = Dims {
            input,
            hidden,
            classes: readout.cols(),
            depth,
        };
        let expected = shapes(architecture, dims);
        for (l, (layer, want)) in layers.iter().zip(&expected).enumerate() {
            let got: Vec<_> = layer.iter().map(Tensor::shape).collect();
            if &got != want {
                return Err(contract(format!("layer {l} shapes {got:?}, expected {want:?}")));
            }
        }
        Ok(Self {
            architecture,
            layers,
            readout,
            dims,
        })
    }

    pub fn architecture(&self) -> Architecture {
        self.architecture
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn depth(&self) -> usize {
        self.dims.depth
    }

    pub fn hidden_dim(&self) -> usize {
        self.dims.hidden
    }

    pub fn layers(&self) -> &[Vec<Tensor>] {
        &self.layers
    }

    pub fn readout(&self) -> &Tensor {
        &self.readout
    }

    /// All weight tensors in a fixed order: layers first, readout last.
    pub fn tensors(&self) -> Vec<&Tensor> {
        self.layers.iter().flatten().chain(std::iter::once(&self.readout)).collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers
            .iter_mut()
            .flatten()
            .chain(std::iter::once(&mut self.readout))
            .collect()
    }
}

fn shapes(arch: Architecture, d: Dims) -> Vec<Vec<(usize, usize)>> {
    (0..d.depth)
        .map(|l| {
            let fan_in = if l == 0 { d.input } else { d.hidden };
            match arch {
                Architecture::Gcn => vec![(fan_in, d.hidden)],
                Architecture::GraphConv | Architecture::GraphSage => {
                    vec![(fan_in, d.hidden), (fan_in, d.hidden)]
                }
                Architecture::Gin => vec![(fan_in, d.hidden), (d.hidden, d.hidden)],
            }
        })
        .collect()
}

/// Glorot-uniform weights with bound `sqrt(6 / (fan_in + fan_out))`.
pub fn init_params(architecture: Architecture, dims: Dims, seed: u64) -> Result<ModelParams> {
    if dims.depth == 0 || dims.input == 0 || dims.hidden == 0 || dims.classes == 0 {
        return Err(contract(format!("invalid model dims {dims:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut glorot = |(r, c): (usize, usize)| {
        let bound = (6.0 / (r + c) as f64).sqrt();
        let dist = Uniform::new_inclusive(-bound, bound);
        Tensor::from_raw(r, c, (0..r * c).map(|_| dist.sample(&mut rng)).collect())
    };
    let layers = shapes(architecture, dims)
        .into_iter()
        .map(|layer| layer.into_iter().map(&mut glorot).collect())
        .collect();
    let readout = glorot((dims.hidden, dims.classes));
    ModelParams::from_parts(architecture, layers, readout)
}

/// Per-edge weights aligned with [`Graph::edges`]. One value serves both
/// directions of an edge.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeWeights {
    values: Vec<f64>,
}

impl EdgeWeights {
    pub fn ones(graph: &Graph) -> Self {
        Self {
            values: vec![1.0; graph.num_edges()],
        }
    }

    pub fn from_values(graph: &Graph, values: Vec<f64>) -> Result<Self> {
        if values.len() != graph.num_edges() {
            return Err(contract(format!(
                "{} edge weights for {} edges",
                values.len(),
                graph.num_edges()
            )));
        }
        if let Some(x) = values.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(contract(format!("edge weight {x} outside [0, 1]")));
        }
        Ok(Self { values })
    }

    /// Sets the listed edges; unlisted edges keep weight 1.
    pub fn from_pairs(graph: &Graph, pairs: &[((usize, usize), f64)]) -> Result<Self> {
        let mut values = vec![1.0; graph.num_edges()];
        for &((u, v), s) in pairs {
            let e = graph
                .edge_index(u, v)
                .ok_or_else(|| contract(format!("weight given for non-edge ({u}, {v})")))?;
            values[e] = s;
        }
        Self::from_values(graph, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_all_ones(&self) -> bool {
        self.values.iter().all(|&x| x == 1.0)
    }

    pub fn get(&self, graph: &Graph, u: usize, v: usize) -> Option<f64> {
        graph.edge_index(u, v).map(|e| self.values[e])
    }

    pub fn to_tensor(&self) -> Tensor {
        Tensor::from_raw(self.values.len(), 1, self.values.clone())
    }
}

/// Parameters placed on a tape.
#[derive(Clone, Debug)]
pub struct ParamVars {
    pub architecture: Architecture,
    pub layers: Vec<Vec<Var>>,
    pub readout: Var,
}

impl ParamVars {
    /// Leaves when `trainable`, constants otherwise.
    pub fn bind(tape: &mut Tape, params: &ModelParams, trainable: bool) -> Self {
        let mut put = |t: &Tensor| {
            if trainable {
                tape.leaf(t.clone())
            } else {
                tape.constant(t.clone())
            }
        };
        let layers = params.layers.iter().map(|l| l.iter().map(&mut put).collect()).collect();
        let readout = put(&params.readout);
        Self {
            architecture: params.architecture,
            layers,
            readout,
        }
    }

    /// Same order as [`ModelParams::tensors`].
    pub fn vars(&self) -> Vec<Var> {
        self.layers.iter().flatten().copied().chain(std::iter::once(self.readout)).collect()
    }
}

/// Tape handles produced by one forward pass.
#[derive(Clone, Debug)]
pub struct ForwardVars {
    /// Node embeddings after each layer (post-ReLU).
    pub embeddings: Vec<Var>,
    /// Mean-pooled last-layer embedding, 1×hidden.
    pub pooled: Var,
    /// 1×classes.
    pub logits: Var,
}

/// Forward pass on a tape with features `x` (N×d) and edge weights `w` (E×1)
/// supplied as tape variables.
pub fn forward_vars(tape: &mut Tape, pv: &ParamVars, graph: &Graph, x: Var, w: Var) -> Result<ForwardVars> {
    let n = graph.num_nodes();
    if n == 0 {
        return Err(contract("forward on a graph with no nodes"));
    }
    let edges = graph.edges();
    let mut h = x;
    let mut embeddings = Vec::with_capacity(pv.layers.len());

    // Degree-derived scalings depend only on w, so compute them once.
    let gcn_scale = if pv.architecture == Architecture::Gcn {
        let deg = tape.degree(w, edges, n)?;
        let deg1 = tape.add_scalar(deg, 1.0)?;
        Some(tape.powf(deg1, -0.5)?)
    } else {
        None
    };
    let sage_recip = if pv.architecture == Architecture::GraphSage {
        let deg = tape.degree(w, edges, n)?;
        Some(tape.safe_recip(deg)?)
    } else {
        None
    };

    for layer in &pv.layers {
        let pre = match pv.architecture {
            Architecture::Gcn => {
                let r = gcn_scale.expect("set for GCN");
                let hw = tape.matmul(h, layer[0])?;
                let t = tape.row_scale(hw, r)?;
                let agg = tape.propagate(t, w, edges)?;
                let s = tape.add(agg, t)?;
                tape.row_scale(s, r)?
            }
            Architecture::GraphConv => {
                let own = tape.matmul(h, layer[0])?;
                let hn = tape.matmul(h, layer[1])?;
                let agg = tape.propagate(hn, w, edges)?;
                tape.add(own, agg)?
            }
            Architecture::GraphSage => {
                let own = tape.matmul(h, layer[0])?;
                let hn = tape.matmul(h, layer[1])?;
                let agg = tape.propagate(hn, w, edges)?;
                let mean = tape.row_scale(agg, sage_recip.expect("set for GraphSAGE"))?;
                tape.add(own, mean)?
            }
            Architecture::Gin => {
                let agg = tape.propagate(h, w, edges)?;
                let s = tape.add(h, agg)?;
                let z = tape.matmul(s, layer[0])?;
                let z = tape.relu(z)?;
                tape.matmul(z, layer[1])?
            }
        };
        h = tape.relu(pre)?;
        embeddings.push(h);
    }
    let pooled = tape.mean_rows(h)?;
    let logits = tape.matmul(pooled, pv.readout)?;
    Ok(ForwardVars {
        embeddings,
        pooled,
        logits,
    })
}

fn check_input(params: &ModelParams, graph: &Graph, weights: &EdgeWeights) -> Result<()> {
    if graph.feature_dim() != params.dims.input {
        return Err(Error::Dimension {
            op: "forward",
            left: (graph.num_nodes(), graph.feature_dim()),
            right: (params.dims.input, params.dims.hidden),
        });
    }
    if weights.values.len() != graph.num_edges() {
        return Err(contract("edge weights do not match the graph's edge list"));
    }
    Ok(())
}

/// Forward pass with trainable parameter leaves on `tape`.
pub fn forward(
    params: &ModelParams,
    graph: &Graph,
    weights: &EdgeWeights,
    tape: &mut Tape,
) -> Result<(ParamVars, ForwardVars)> {
    check_input(params, graph, weights)?;
    let pv = ParamVars::bind(tape, params, true);
    let x = tape.constant(graph.features().clone());
    let w = tape.constant(weights.to_tensor());
    let fv = forward_vars(tape, &pv, graph, x, w)?;
    Ok((pv, fv))
}

/// Result of an inference-only forward pass.
#[derive(Clone, Debug)]
pub struct Inference {
    pub embeddings: Vec<Tensor>,
    pub pooled: Tensor,
    pub logits: Tensor,
}

pub fn infer(params: &ModelParams, graph: &Graph, weights: &EdgeWeights) -> Result<Inference> {
    check_input(params, graph, weights)?;
    let mut tape = Tape::new();
    let pv = ParamVars::bind(&mut tape, params, false);
    let x = tape.constant(graph.features().clone());
    let w = tape.constant(weights.to_tensor());
    let fv = forward_vars(&mut tape, &pv, graph, x, w)?;
    Ok(Inference {
        embeddings: fv.embeddings.iter().map(|&v| tape.value(v).clone()).collect(),
        pooled: tape.value(fv.pooled).clone(),
        logits: tape.value(fv.logits).clone(),
    })
}

/// Per-layer node embeddings `H^(1) .. H^(L)`.
pub fn node_embeddings(params: &ModelParams, graph: &Graph, weights: &EdgeWeights) -> Result<Vec<Tensor>> {
    infer(params, graph, weights).map(|i| i.embeddings)
}

/// Class probabilities of one graph.
pub fn predict_proba(params: &ModelParams, graph: &Graph, weights: &EdgeWeights) -> Result<Vec<f64>> {
    let logits = infer(params, graph, weights)?.logits;
    Ok(softmax(logits.data()))
}

pub(crate) fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|x| (x - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}
