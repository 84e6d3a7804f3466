//! Define-by-run tape. Every operation appends a node holding its value; a
//! reverse sweep in node-id order accumulates gradients.

use std::sync::Arc;

use super::tensor::{matmul_nn, matmul_nt, matmul_tn, Tensor};
use crate::error::{contract, Error, Result};

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Undirected edge list shared between a graph and the ops that read it.
pub type EdgeList = Arc<[(usize, usize)]>;

/// Elementwise operations available through [`Tape::elementwise`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Elementwise {
    Add,
    Sub,
    Hadamard,
    Sigmoid,
    Relu,
    Exp,
    Log,
    Scale(f64),
}

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Hadamard(Var, Var),
    Sigmoid(Var),
    Relu(Var),
    Exp(Var),
    Log(Var),
    Scale(Var, f64),
    AddScalar(Var),
    Powf(Var, f64),
    SafeRecip(Var),
    RowScale(Var, Var),
    ColScale(Var, Var),
    Propagate { h: Var, w: Var, edges: EdgeList },
    Degree { w: Var, edges: EdgeList },
    Sum(Var),
    MeanRows(Var),
    LogSoftmax(Var),
    Softmax(Var),
    Pick(Var, usize, usize),
}

#[derive(Clone, Debug)]
struct Node {
    op: Op,
    value: Tensor,
    requires_grad: bool,
}

/// Record of one forward computation.
#[derive(Default, Clone, Debug)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients produced by [`Tape::backward`], indexed by node.
#[derive(Clone, Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    pub fn take(&mut self, v: Var) -> Option<Tensor> {
        self.grads.get_mut(v.0).and_then(Option::take)
    }

    /// Gradient for `v`, or zeros of `shape` when `v` is not an ancestor of the loss.
    pub fn get_or_zeros(&self, v: Var, shape: (usize, usize)) -> Tensor {
        self.get(v)
            .cloned()
            .unwrap_or_else(|| Tensor::zeros(shape.0, shape.1))
    }
}

fn same_shape(op: &'static str, a: &Tensor, b: &Tensor) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension {
            op,
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(())
}

/// Logistic function, evaluated without overflow for large |x|.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Drops every node created after the first `len`, so constant inputs can
    /// stay on the tape across repeated passes. Vars past `len` become invalid.
    pub fn truncate(&mut self, len: usize) {
        self.nodes.truncate(len);
    }

    /// Differentiable input.
    pub fn leaf(&mut self, value: Tensor) -> Var {
        self.push_raw(Op::Leaf, value, true)
    }

    /// Input that never receives a gradient.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push_raw(Op::Leaf, value, false)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value.data()[0]
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn push_raw(&mut self, op: Op, value: Tensor, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            op,
            value,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn push(&mut self, name: &'static str, op: Op, value: Tensor, inputs: &[Var]) -> Result<Var> {
        if !value.all_finite() {
            return Err(Error::NonFinite(name));
        }
        let rg = inputs.iter().any(|v| self.nodes[v.0].requires_grad);
        Ok(self.push_raw(op, value, rg))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.cols() != vb.rows() {
            return Err(Error::Dimension {
                op: "matmul",
                left: va.shape(),
                right: vb.shape(),
            });
        }
        let out = matmul_nn(va, vb);
        self.push("matmul", Op::MatMul(a, b), out, &[a, b])
    }

    /// Generic entry point for the elementwise family. Binary ops take two
    /// arguments, unary ops one.
    pub fn elementwise(&mut self, op: Elementwise, args: &[Var]) -> Result<Var> {
        let arity = match op {
            Elementwise::Add | Elementwise::Sub | Elementwise::Hadamard => 2,
            _ => 1,
        };
        if args.len() != arity {
            return Err(contract(format!(
                "{op:?} expects {arity} argument(s), got {}",
                args.len()
            )));
        }
        match op {
            Elementwise::Add => self.add(args[0], args[1]),
            Elementwise::Sub => self.sub(args[0], args[1]),
            Elementwise::Hadamard => self.hadamard(args[0], args[1]),
            Elementwise::Sigmoid => self.sigmoid(args[0]),
            Elementwise::Relu => self.relu(args[0]),
            Elementwise::Exp => self.exp(args[0]),
            Elementwise::Log => self.log(args[0]),
            Elementwise::Scale(c) => self.scale(args[0], c),
        }
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        same_shape("add", self.value(a), self.value(b))?;
        let out = self.value(a).zip_map(self.value(b), |x, y| x + y);
        self.push("add", Op::Add(a, b), out, &[a, b])
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        same_shape("sub", self.value(a), self.value(b))?;
        let out = self.value(a).zip_map(self.value(b), |x, y| x - y);
        self.push("sub", Op::Sub(a, b), out, &[a, b])
    }

    pub fn hadamard(&mut self, a: Var, b: Var) -> Result<Var> {
        same_shape("hadamard", self.value(a), self.value(b))?;
        let out = self.value(a).zip_map(self.value(b), |x, y| x * y);
        self.push("hadamard", Op::Hadamard(a, b), out, &[a, b])
    }

    pub fn sigmoid(&mut self, a: Var) -> Result<Var> {
        let out = self.value(a).map(sigmoid);
        self.push("sigmoid", Op::Sigmoid(a), out, &[a])
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        let out = self.value(a).map(|x| if x > 0.0 { x } else { 0.0 });
        self.push("relu", Op::Relu(a), out, &[a])
    }

    pub fn exp(&mut self, a: Var) -> Result<Var> {
        let out = self.value(a).map(f64::exp);
        self.push("exp", Op::Exp(a), out, &[a])
    }

    pub fn log(&mut self, a: Var) -> Result<Var> {
        if let Some(bad) = self.value(a).data().iter().find(|&&x| x <= 0.0) {
            return Err(Error::Domain {
                op: "log",
                detail: format!("non-positive entry {bad}"),
            });
        }
        let out = self.value(a).map(f64::ln);
        self.push("log", Op::Log(a), out, &[a])
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Result<Var> {
        let out = self.value(a).map(|x| c * x);
        self.push("scale", Op::Scale(a, c), out, &[a])
    }

    pub fn add_scalar(&mut self, a: Var, c: f64) -> Result<Var> {
        let out = self.value(a).map(|x| x + c);
        self.push("add_scalar", Op::AddScalar(a), out, &[a])
    }

    /// x^p elementwise. Non-integer powers require positive entries.
    pub fn powf(&mut self, a: Var, p: f64) -> Result<Var> {
        if p.fract() != 0.0 {
            if let Some(bad) = self.value(a).data().iter().find(|&&x| x <= 0.0) {
                return Err(Error::Domain {
                    op: "powf",
                    detail: format!("entry {bad} raised to non-integer power {p}"),
                });
            }
        }
        let out = self.value(a).map(|x| x.powf(p));
        self.push("powf", Op::Powf(a, p), out, &[a])
    }

    /// 1/x where x ≠ 0, and 0 where x = 0.
    pub fn safe_recip(&mut self, a: Var) -> Result<Var> {
        let out = self.value(a).map(|x| if x != 0.0 { 1.0 / x } else { 0.0 });
        self.push("safe_recip", Op::SafeRecip(a), out, &[a])
    }

    /// Scales row i of `h` (N×F) by `r[i]` (r is N×1).
    pub fn row_scale(&mut self, h: Var, r: Var) -> Result<Var> {
        let (vh, vr) = (self.value(h), self.value(r));
        if vr.shape() != (vh.rows(), 1) {
            return Err(Error::Dimension {
                op: "row_scale",
                left: vh.shape(),
                right: vr.shape(),
            });
        }
        let cols = vh.cols();
        let mut out = vh.data().to_vec();
        for (i, chunk) in out.chunks_mut(cols.max(1)).enumerate().take(vh.rows()) {
            let s = vr.data()[i];
            chunk.iter_mut().for_each(|x| *x *= s);
        }
        let out = Tensor::from_raw(vh.rows(), cols, out);
        self.push("row_scale", Op::RowScale(h, r), out, &[h, r])
    }

    /// Scales column j of `h` (N×F) by `c[j]` (c is 1×F).
    pub fn col_scale(&mut self, h: Var, c: Var) -> Result<Var> {
        let (vh, vc) = (self.value(h), self.value(c));
        if vc.shape() != (1, vh.cols()) {
            return Err(Error::Dimension {
                op: "col_scale",
                left: vh.shape(),
                right: vc.shape(),
            });
        }
        let cols = vh.cols();
        let mut out = vh.data().to_vec();
        if cols > 0 {
            for chunk in out.chunks_mut(cols) {
                for (x, s) in chunk.iter_mut().zip(vc.data()) {
                    *x *= s;
                }
            }
        }
        let out = Tensor::from_raw(vh.rows(), cols, out);
        self.push("col_scale", Op::ColScale(h, c), out, &[h, c])
    }

    /// Weighted neighbour sum over an undirected edge list:
    /// out[u] = Σ_{e=(u,v)} w[e]·h[v], both directions of every edge.
    /// `w` is E×1.
    pub fn propagate(&mut self, h: Var, w: Var, edges: &EdgeList) -> Result<Var> {
        let (vh, vw) = (self.value(h), self.value(w));
        if vw.shape() != (edges.len(), 1) {
            return Err(Error::Dimension {
                op: "propagate",
                left: (edges.len(), 1),
                right: vw.shape(),
            });
        }
        let (n, f) = vh.shape();
        let mut out = vec![0.0; n * f];
        let hd = vh.data();
        for (e, &(u, v)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(contract(format!("edge ({u},{v}) out of range for {n} nodes")));
            }
            let we = vw.data()[e];
            if we == 0.0 {
                continue;
            }
            for k in 0..f {
                out[u * f + k] += we * hd[v * f + k];
            }
            for k in 0..f {
                out[v * f + k] += we * hd[u * f + k];
            }
        }
        let out = Tensor::from_raw(n, f, out);
        self.push(
            "propagate",
            Op::Propagate {
                h,
                w,
                edges: edges.clone(),
            },
            out,
            &[h, w],
        )
    }

    /// Weighted degree: out[u] = Σ_{e∋u} w[e], N×1.
    pub fn degree(&mut self, w: Var, edges: &EdgeList, num_nodes: usize) -> Result<Var> {
        let vw = self.value(w);
        if vw.shape() != (edges.len(), 1) {
            return Err(Error::Dimension {
                op: "degree",
                left: (edges.len(), 1),
                right: vw.shape(),
            });
        }
        let mut out = vec![0.0; num_nodes];
        for (e, &(u, v)) in edges.iter().enumerate() {
            if u >= num_nodes || v >= num_nodes {
                return Err(contract(format!(
                    "edge ({u},{v}) out of range for {num_nodes} nodes"
                )));
            }
            out[u] += vw.data()[e];
            out[v] += vw.data()[e];
        }
        let out = Tensor::from_raw(num_nodes, 1, out);
        self.push(
            "degree",
            Op::Degree {
                w,
                edges: edges.clone(),
            },
            out,
            &[w],
        )
    }

    pub fn sum(&mut self, a: Var) -> Result<Var> {
        let out = Tensor::from_raw(1, 1, vec![self.value(a).sum()]);
        self.push("sum", Op::Sum(a), out, &[a])
    }

    /// Column means over rows: N×F → 1×F.
    pub fn mean_rows(&mut self, a: Var) -> Result<Var> {
        let va = self.value(a);
        let (n, f) = va.shape();
        if n == 0 {
            return Err(contract("mean_rows of a tensor with no rows"));
        }
        let mut out = vec![0.0; f];
        for r in 0..n {
            for (o, x) in out.iter_mut().zip(va.row(r)) {
                *o += x;
            }
        }
        let inv = 1.0 / n as f64;
        out.iter_mut().for_each(|x| *x *= inv);
        let out = Tensor::from_raw(1, f, out);
        self.push("mean_rows", Op::MeanRows(a), out, &[a])
    }

    /// Row-wise log-softmax with max subtraction.
    pub fn log_softmax(&mut self, a: Var) -> Result<Var> {
        let va = self.value(a);
        let (n, c) = va.shape();
        if c == 0 {
            return Err(contract("log_softmax needs at least one column"));
        }
        let mut out = Vec::with_capacity(n * c);
        for r in 0..n {
            out.extend(log_softmax_row(va.row(r)));
        }
        let out = Tensor::from_raw(n, c, out);
        self.push("log_softmax", Op::LogSoftmax(a), out, &[a])
    }

    /// Row-wise softmax.
    pub fn softmax(&mut self, a: Var) -> Result<Var> {
        let va = self.value(a);
        let (n, c) = va.shape();
        if c == 0 {
            return Err(contract("softmax needs at least one column"));
        }
        let mut out = Vec::with_capacity(n * c);
        for r in 0..n {
            out.extend(log_softmax_row(va.row(r)).map(f64::exp));
        }
        let out = Tensor::from_raw(n, c, out);
        self.push("softmax", Op::Softmax(a), out, &[a])
    }

    /// Single entry as a 1×1 tensor.
    pub fn pick(&mut self, a: Var, row: usize, col: usize) -> Result<Var> {
        let va = self.value(a);
        if row >= va.rows() || col >= va.cols() {
            return Err(contract(format!(
                "pick ({row},{col}) outside {:?}",
                va.shape()
            )));
        }
        let out = Tensor::from_raw(1, 1, vec![va.get(row, col)]);
        self.push("pick", Op::Pick(a, row, col), out, &[a])
    }

    /// Mean of all entries as a 1×1 tensor.
    pub fn mean(&mut self, a: Var) -> Result<Var> {
        let n = self.value(a).len();
        if n == 0 {
            return Err(contract("mean of an empty tensor"));
        }
        let s = self.sum(a)?;
        self.scale(s, 1.0 / n as f64)
    }

    /// Per-ReLU-entry region codes (0: negative, 1: exactly zero, 2: positive),
    /// concatenated in node order. Two tapes built by the same program have
    /// equal signatures exactly when no ReLU input crossed its kink.
    pub fn relu_signature(&self) -> Vec<u8> {
        let mut sig = Vec::new();
        for node in &self.nodes {
            if let Op::Relu(a) = node.op {
                sig.extend(self.nodes[a.0].value.data().iter().map(|&x| {
                    if x > 0.0 {
                        2
                    } else if x == 0.0 {
                        1
                    } else {
                        0
                    }
                }));
            }
        }
        sig
    }

    /// Reverse sweep from a 1×1 loss. Every call starts from fresh
    /// accumulators; nodes that are not ancestors of `loss` get no entry.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        let lv = self.value(loss);
        if lv.shape() != (1, 1) {
            return Err(contract(format!(
                "backward needs a scalar loss, got shape {:?}",
                lv.shape()
            )));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(Tensor::ones(1, 1));

        for id in (0..=loss.0).rev() {
            let node = &self.nodes[id];
            if !node.requires_grad {
                continue;
            }
            let Some(g) = grads[id].take() else { continue };
            self.backprop_node(node, &g, &mut grads);
            grads[id] = Some(g);
        }
        Ok(Gradients { grads })
    }

    fn accumulate(&self, grads: &mut [Option<Tensor>], v: Var, g: Tensor) {
        if !self.nodes[v.0].requires_grad {
            return;
        }
        match &mut grads[v.0] {
            Some(acc) => acc.add_assign(&g),
            slot @ None => *slot = Some(g),
        }
    }

    fn wants(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn backprop_node(&self, node: &Node, g: &Tensor, grads: &mut [Option<Tensor>]) {
        let val = |v: Var| &self.nodes[v.0].value;
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                if self.wants(*a) {
                    self.accumulate(grads, *a, matmul_nt(g, val(*b)));
                }
                if self.wants(*b) {
                    self.accumulate(grads, *b, matmul_tn(val(*a), g));
                }
            }
            Op::Add(a, b) => {
                self.accumulate(grads, *a, g.clone());
                self.accumulate(grads, *b, g.clone());
            }
            Op::Sub(a, b) => {
                self.accumulate(grads, *a, g.clone());
                if self.wants(*b) {
                    self.accumulate(grads, *b, g.map(|x| -x));
                }
            }
            Op::Hadamard(a, b) => {
                if self.wants(*a) {
                    self.accumulate(grads, *a, g.zip_map(val(*b), |x, y| x * y));
                }
                if self.wants(*b) {
                    self.accumulate(grads, *b, g.zip_map(val(*a), |x, y| x * y));
                }
            }
            Op::Sigmoid(a) => {
                let y = &node.value;
                self.accumulate(grads, *a, g.zip_map(y, |gx, s| gx * s * (1.0 - s)));
            }
            Op::Relu(a) => {
                let x = val(*a);
                self.accumulate(grads, *a, g.zip_map(x, |gx, xi| if xi > 0.0 { gx } else { 0.0 }));
            }
            Op::Exp(a) => {
                self.accumulate(grads, *a, g.zip_map(&node.value, |gx, y| gx * y));
            }
            Op::Log(a) => {
                self.accumulate(grads, *a, g.zip_map(val(*a), |gx, x| gx / x));
            }
            Op::Scale(a, c) => {
                let c = *c;
                self.accumulate(grads, *a, g.map(|x| c * x));
            }
            Op::AddScalar(a) => self.accumulate(grads, *a, g.clone()),
            Op::Powf(a, p) => {
                let p = *p;
                self.accumulate(
                    grads,
                    *a,
                    g.zip_map(val(*a), |gx, x| gx * p * x.powf(p - 1.0)),
                );
            }
            Op::SafeRecip(a) => {
                self.accumulate(
                    grads,
                    *a,
                    g.zip_map(val(*a), |gx, x| if x != 0.0 { -gx / (x * x) } else { 0.0 }),
                );
            }
            Op::RowScale(h, r) => {
                let (vh, vr) = (val(*h), val(*r));
                let f = vh.cols();
                if self.wants(*h) {
                    let mut dh = g.data().to_vec();
                    for (i, x) in dh.iter_mut().enumerate() {
                        *x *= vr.data()[i / f];
                    }
                    self.accumulate(grads, *h, Tensor::from_raw(vh.rows(), f, dh));
                }
                if self.wants(*r) {
                    let dr = (0..vh.rows())
                        .map(|i| g.row(i).iter().zip(vh.row(i)).map(|(a, b)| a * b).sum())
                        .collect();
                    self.accumulate(grads, *r, Tensor::from_raw(vh.rows(), 1, dr));
                }
            }
            Op::ColScale(h, c) => {
                let (vh, vc) = (val(*h), val(*c));
                let f = vh.cols();
                if self.wants(*h) {
                    let mut dh = g.data().to_vec();
                    for (i, x) in dh.iter_mut().enumerate() {
                        *x *= vc.data()[i % f];
                    }
                    self.accumulate(grads, *h, Tensor::from_raw(vh.rows(), f, dh));
                }
                if self.wants(*c) {
                    let mut dc = vec![0.0; f];
                    for i in 0..vh.rows() {
                        for ((d, a), b) in dc.iter_mut().zip(g.row(i)).zip(vh.row(i)) {
                            *d += a * b;
                        }
                    }
                    self.accumulate(grads, *c, Tensor::from_raw(1, f, dc));
                }
            }
            Op::Propagate { h, w, edges } => {
                let (vh, vw) = (val(*h), val(*w));
                let (n, f) = vh.shape();
                let gd = g.data();
                let hd = vh.data();
                if self.wants(*h) {
                    let mut dh = vec![0.0; n * f];
                    for (e, &(u, v)) in edges.iter().enumerate() {
                        let we = vw.data()[e];
                        if we == 0.0 {
                            continue;
                        }
                        for k in 0..f {
                            dh[v * f + k] += we * gd[u * f + k];
                        }
                        for k in 0..f {
                            dh[u * f + k] += we * gd[v * f + k];
                        }
                    }
                    self.accumulate(grads, *h, Tensor::from_raw(n, f, dh));
                }
                if self.wants(*w) {
                    let dw = edges
                        .iter()
                        .map(|&(u, v)| {
                            let mut s = 0.0;
                            for k in 0..f {
                                s += gd[u * f + k] * hd[v * f + k] + gd[v * f + k] * hd[u * f + k];
                            }
                            s
                        })
                        .collect();
                    self.accumulate(grads, *w, Tensor::from_raw(edges.len(), 1, dw));
                }
            }
            Op::Degree { w, edges } => {
                let gd = g.data();
                let dw = edges.iter().map(|&(u, v)| gd[u] + gd[v]).collect();
                self.accumulate(grads, *w, Tensor::from_raw(edges.len(), 1, dw));
            }
            Op::Sum(a) => {
                let (r, c) = val(*a).shape();
                self.accumulate(grads, *a, Tensor::filled(r, c, g.data()[0]));
            }
            Op::MeanRows(a) => {
                let (n, f) = val(*a).shape();
                let inv = 1.0 / n as f64;
                let mut d = Vec::with_capacity(n * f);
                for _ in 0..n {
                    d.extend(g.data().iter().map(|x| x * inv));
                }
                self.accumulate(grads, *a, Tensor::from_raw(n, f, d));
            }
            Op::LogSoftmax(a) => {
                let y = &node.value;
                let (n, c) = y.shape();
                let mut d = Vec::with_capacity(n * c);
                for r in 0..n {
                    let gs: f64 = g.row(r).iter().sum();
                    d.extend(g.row(r).iter().zip(y.row(r)).map(|(gi, yi)| gi - yi.exp() * gs));
                }
                self.accumulate(grads, *a, Tensor::from_raw(n, c, d));
            }
            Op::Softmax(a) => {
                let y = &node.value;
                let (n, c) = y.shape();
                let mut d = Vec::with_capacity(n * c);
                for r in 0..n {
                    let dot: f64 = g.row(r).iter().zip(y.row(r)).map(|(a, b)| a * b).sum();
                    d.extend(g.row(r).iter().zip(y.row(r)).map(|(gi, yi)| yi * (gi - dot)));
                }
                self.accumulate(grads, *a, Tensor::from_raw(n, c, d));
            }
            Op::Pick(a, r, c) => {
                let (rows, cols) = val(*a).shape();
                let mut d = Tensor::zeros(rows, cols);
                d.data_mut()[*r * cols + *c] = g.data()[0];
                self.accumulate(grads, *a, d);
            }
        }
    }
}

fn log_softmax_row(row: &[f64]) -> impl Iterator<Item = f64> + '_ {
    let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + row.iter().map(|x| (x - m).exp()).sum::<f64>().ln();
    row.iter().map(move |x| x - lse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::grad_check;

    fn t(rows: &[&[f64]]) -> Tensor {
        Tensor::from_rows(rows).unwrap()
    }

    #[test]
    fn identity_times_matrix() {
        let m = t(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], &[7.0, 8.0, 9.0]]);
        let mut tape = Tape::new();
        let i = tape.constant(Tensor::identity(3));
        let mv = tape.constant(m.clone());
        let c = tape.matmul(i, mv).unwrap();
        assert_eq!(tape.value(c), &m);
    }

    #[test]
    fn elementwise_examples() {
        let mut tape = Tape::new();
        let z = tape.constant(Tensor::scalar(0.0).unwrap());
        let s = tape.elementwise(Elementwise::Sigmoid, &[z]).unwrap();
        assert_eq!(tape.scalar(s), 0.5);

        let x = tape.constant(t(&[&[-2.0, 3.0]]));
        let r = tape.relu(x).unwrap();
        assert_eq!(tape.value(r).data(), &[0.0, 3.0]);

        let a = tape.constant(t(&[&[1.0, 2.0]]));
        let b = tape.constant(t(&[&[3.0, 4.0]]));
        let h = tape.elementwise(Elementwise::Hadamard, &[a, b]).unwrap();
        assert_eq!(tape.value(h).data(), &[3.0, 8.0]);
    }

    #[test]
    fn binary_shape_mismatch_and_log_domain() {
        let mut tape = Tape::new();
        let a = tape.constant(Tensor::zeros(1, 2));
        let b = tape.constant(Tensor::zeros(2, 1));
        assert!(matches!(tape.add(a, b), Err(Error::Dimension { .. })));
        assert!(matches!(tape.log(a), Err(Error::Domain { .. })));
        assert!(tape.elementwise(Elementwise::Add, &[a]).is_err());
    }

    #[test]
    fn log_softmax_uniform_and_stable() {
        let mut tape = Tape::new();
        let x = tape.constant(t(&[&[0.0, 0.0], &[1000.0, 0.0]]));
        let y = tape.log_softmax(x).unwrap();
        let v = tape.value(y);
        let ln2 = std::f64::consts::LN_2;
        assert!((v.get(0, 0) + ln2).abs() < 1e-15);
        assert!((v.get(0, 1) + ln2).abs() < 1e-15);
        assert!(v.get(1, 0).abs() < 1e-12);
        assert!((v.get(1, 1) + 1000.0).abs() < 1e-9);
        for r in 0..2 {
            let s: f64 = v.row(r).iter().map(|x| x.exp()).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn square_gradient() {
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::scalar(3.0).unwrap());
        let y = tape.hadamard(x, x).unwrap();
        let g = tape.backward(y).unwrap();
        assert_eq!(g.get(x).unwrap().data(), &[6.0]);
    }

    #[test]
    fn sigmoid_sum_gradient_is_quarter() {
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::zeros(2, 3));
        let s = tape.sigmoid(x).unwrap();
        let l = tape.sum(s).unwrap();
        let g = tape.backward(l).unwrap();
        assert!(g.get(x).unwrap().data().iter().all(|&v| v == 0.25));
    }

    #[test]
    fn non_scalar_loss_is_rejected() {
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::zeros(2, 2));
        assert!(matches!(tape.backward(x), Err(Error::Contract(_))));
    }

    #[test]
    fn non_ancestors_have_no_gradient_and_repeat_is_identical() {
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::scalar(2.0).unwrap());
        let unused = tape.leaf(Tensor::scalar(5.0).unwrap());
        let y = tape.exp(x).unwrap();
        let g1 = tape.backward(y).unwrap();
        let g2 = tape.backward(y).unwrap();
        assert!(g1.get(unused).is_none());
        assert_eq!(
            g1.get(x).unwrap().data()[0].to_bits(),
            g2.get(x).unwrap().data()[0].to_bits()
        );
    }

    #[test]
    fn relu_subgradient_at_zero() {
        let mut tape = Tape::new();
        let x = tape.leaf(t(&[&[0.0, 1.0, -1.0]]));
        let r = tape.relu(x).unwrap();
        let l = tape.sum(r).unwrap();
        let g = tape.backward(l).unwrap();
        assert_eq!(g.get(x).unwrap().data(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn matmul_gradient_matches_finite_differences() {
        let a = t(&[&[0.3, -1.2, 0.7], &[2.0, 0.1, -0.4]]);
        let b = t(&[&[1.0, 0.5], &[-0.3, 0.8], &[0.2, -1.1]]);
        let report = grad_check(
            |tape, x| {
                let bv = tape.constant(b.clone());
                let c = tape.matmul(x, bv)?;
                tape.sum(c)
            },
            &a,
            1e-5,
        )
        .unwrap();
        assert!(report.max_rel_error < 1e-5, "{report:?}");
    }

    #[test]
    fn log_softmax_gradient_matches_finite_differences() {
        let x = t(&[&[0.2, -0.5, 1.3], &[2.0, 0.0, -1.0]]);
        let w = t(&[&[0.3, -1.0, 2.0], &[1.5, 0.25, -0.7]]);
        let report = grad_check(
            |tape, x| {
                let wv = tape.constant(w.clone());
                let y = tape.log_softmax(x)?;
                let p = tape.hadamard(y, wv)?;
                tape.sum(p)
            },
            &x,
            1e-5,
        )
        .unwrap();
        assert!(report.max_rel_error < 1e-5, "{report:?}");
    }

    #[test]
    fn propagate_and_degree_gradients() {
        let edges: EdgeList = vec![(0, 1), (1, 2), (0, 3)].into();
        let h = t(&[&[0.5, -1.0], &[1.2, 0.3], &[-0.7, 0.9], &[0.1, 0.4]]);
        let w = Tensor::column(vec![0.3, 0.8, 0.6]).unwrap();
        let proj = t(&[&[1.0, 2.0], &[-1.0, 0.5], &[0.3, 0.3], &[2.0, -1.5]]);
        let build = |tape: &mut Tape, hv: Var, wv: Var| -> Result<Var> {
            let d = tape.degree(wv, &edges, 4)?;
            let d1 = tape.add_scalar(d, 1.0)?;
            let r = tape.powf(d1, -0.5)?;
            let s = tape.row_scale(hv, r)?;
            let p = tape.propagate(s, wv, &edges)?;
            let q = tape.add(p, s)?;
            let o = tape.row_scale(q, r)?;
            let pv = tape.constant(proj.clone());
            let z = tape.hadamard(o, pv)?;
            tape.sum(z)
        };
        let rep_h = grad_check(
            |tape, hv| {
                let wv = tape.constant(w.clone());
                build(tape, hv, wv)
            },
            &h,
            1e-5,
        )
        .unwrap();
        assert!(rep_h.max_rel_error < 1e-6, "{rep_h:?}");
        let rep_w = grad_check(
            |tape, wv| {
                let hv = tape.constant(h.clone());
                build(tape, hv, wv)
            },
            &w,
            1e-5,
        )
        .unwrap();
        assert!(rep_w.max_rel_error < 1e-6, "{rep_w:?}");
    }

    #[test]
    fn scaling_ops_and_softmax_gradients() {
        let h = t(&[&[0.5, -1.0, 0.2], &[1.2, 0.3, -0.4]]);
        let c = t(&[&[0.7, 1.3, -0.2]]);
        let rep = grad_check(
            |tape, cv| {
                let hv = tape.constant(h.clone());
                let s = tape.col_scale(hv, cv)?;
                let m = tape.mean_rows(s)?;
                let p = tape.softmax(m)?;
                let q = tape.pick(p, 0, 1)?;
                let r = tape.safe_recip(q)?;
                tape.log(r)
            },
            &c,
            1e-5,
        )
        .unwrap();
        assert!(rep.max_rel_error < 1e-6, "{rep:?}");
    }
}
