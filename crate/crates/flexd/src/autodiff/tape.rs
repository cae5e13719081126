use std::sync::Arc;

use thiserror::Error;

use crate::linalg::{herm_dot, solve_hpd, CMat};
use crate::tensor::Tensor;

use super::{gelu, gelu_grad, sigmoid};

/// Index of a recorded tape node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Error)]
pub enum TapeError {
    #[error("shape mismatch at node {node} ({op}): {lhs} vs {rhs}")]
    ShapeMismatch {
        node: usize,
        op: &'static str,
        lhs: String,
        rhs: String,
    },
    #[error("backward requires a 1x1 output, node {node} is {shape}")]
    NonScalarOutput { node: usize, shape: String },
}

/// User-to-eavesdropper channel data consumed by the MMSE quadratic-form op.
///
/// Row `m` of `gains` is the channel vector from user `m` to the K
/// eavesdroppers; users `2k` and `2k+1` form pair `k` and are excluded from
/// each other's interference Gram matrix.
#[derive(Clone, Debug)]
pub struct EveChannels {
    pub gains: CMat,
    pub noise_w: f64,
}

enum Op {
    Leaf,
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Div(NodeId, NodeId),
    Recip(NodeId),
    AddScalar(NodeId),
    MulScalar(NodeId, f64),
    MatMul(NodeId, NodeId),
    Log1p(NodeId),
    Exp(NodeId),
    Gelu(NodeId),
    Sigmoid(NodeId),
    Softmax(NodeId),
    Sum(NodeId),
    ConcatRows(Vec<NodeId>),
    SliceRows(NodeId, usize),
    GatherRows(NodeId, Arc<Vec<usize>>),
    /// MMSE quadratic forms `q_m = g_m^H (sigma2 I + sum_{j not in pair(m)}
    /// w_j g_j g_j^H)^{-1} g_m` for every user `m`. Stores the per-user
    /// solve vectors for the backward pass.
    EveQuadform {
        w: NodeId,
        channels: Arc<EveChannels>,
        solves: Vec<Vec<crate::linalg::C64>>,
    },
}

struct Node {
    op: Op,
    value: Tensor,
    needs_grad: bool,
}

/// Append-only record of tensor operations with reverse-mode backward.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients produced by [`Tape::backward`].
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    /// Gradient w.r.t. a leaf, if it was tracked.
    pub fn wrt(&self, id: NodeId) -> Option<&Tensor> {
        self.grads[id.0].as_ref()
    }

    pub fn take(&mut self, id: NodeId) -> Option<Tensor> {
        self.grads[id.0].take()
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Drops all recorded nodes, keeping the allocation.
    pub fn clear(&mut self) {
        self.nodes.clear();
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    fn push(&mut self, op: Op, value: Tensor, needs_grad: bool) -> NodeId {
        self.nodes.push(Node {
            op,
            value,
            needs_grad,
        });
        NodeId(self.nodes.len() - 1)
    }

    fn needs(&self, id: NodeId) -> bool {
        self.nodes[id.0].needs_grad
    }

    /// Differentiable input.
    pub fn leaf(&mut self, value: Tensor) -> NodeId {
        self.push(Op::Leaf, value, true)
    }

    /// Non-differentiable input; backward never accumulates into it.
    pub fn constant(&mut self, value: Tensor) -> NodeId {
        self.push(Op::Leaf, value, false)
    }

    fn check_same_shape(
        &self,
        op: &'static str,
        a: NodeId,
        b: NodeId,
    ) -> Result<(), TapeError> {
        let (la, lb) = (self.value(a).shape(), self.value(b).shape());
        if la != lb {
            return Err(TapeError::ShapeMismatch {
                node: self.nodes.len(),
                op,
                lhs: format!("{la:?}"),
                rhs: format!("{lb:?}"),
            });
        }
        Ok(())
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, TapeError> {
        self.check_same_shape("add", a, b)?;
        let v = self.value(a).zip_map(self.value(b), |x, y| x + y);
        let ng = self.needs(a) || self.needs(b);
        Ok(self.push(Op::Add(a, b), v, ng))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, TapeError> {
        self.check_same_shape("sub", a, b)?;
        let v = self.value(a).zip_map(self.value(b), |x, y| x - y);
        let ng = self.needs(a) || self.needs(b);
        Ok(self.push(Op::Sub(a, b), v, ng))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, TapeError> {
        self.check_same_shape("mul", a, b)?;
        let v = self.value(a).zip_map(self.value(b), |x, y| x * y);
        let ng = self.needs(a) || self.needs(b);
        Ok(self.push(Op::Mul(a, b), v, ng))
    }

    pub fn div(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, TapeError> {
        self.check_same_shape("div", a, b)?;
        let v = self.value(a).zip_map(self.value(b), |x, y| x / y);
        let ng = self.needs(a) || self.needs(b);
        Ok(self.push(Op::Div(a, b), v, ng))
    }

    pub fn recip(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).map(|x| 1.0 / x);
        let ng = self.needs(a);
        self.push(Op::Recip(a), v, ng)
    }

    pub fn add_scalar(&mut self, a: NodeId, s: f64) -> NodeId {
        let v = self.value(a).map(|x| x + s);
        let ng = self.needs(a);
        self.push(Op::AddScalar(a), v, ng)
    }

    pub fn mul_scalar(&mut self, a: NodeId, s: f64) -> NodeId {
        let v = self.value(a).map(|x| x * s);
        let ng = self.needs(a);
        self.push(Op::MulScalar(a, s), v, ng)
    }

    pub fn neg(&mut self, a: NodeId) -> NodeId {
        self.mul_scalar(a, -1.0)
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, TapeError> {
        let (sa, sb) = (self.value(a).shape(), self.value(b).shape());
        if sa.1 != sb.0 {
            return Err(TapeError::ShapeMismatch {
                node: self.nodes.len(),
                op: "matmul",
                lhs: format!("{sa:?}"),
                rhs: format!("{sb:?}"),
            });
        }
        let v = self.value(a).matmul(self.value(b));
        let ng = self.needs(a) || self.needs(b);
        Ok(self.push(Op::MatMul(a, b), v, ng))
    }

    pub fn log1p(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).map(f64::ln_1p);
        let ng = self.needs(a);
        self.push(Op::Log1p(a), v, ng)
    }

    pub fn exp(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).map(f64::exp);
        let ng = self.needs(a);
        self.push(Op::Exp(a), v, ng)
    }

    pub fn gelu(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).map(gelu);
        let ng = self.needs(a);
        self.push(Op::Gelu(a), v, ng)
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).map(sigmoid);
        let ng = self.needs(a);
        self.push(Op::Sigmoid(a), v, ng)
    }

    /// Column-wise softmax.
    pub fn softmax(&mut self, a: NodeId) -> NodeId {
        let x = self.value(a);
        let (rows, cols) = x.shape();
        let mut v = Tensor::zeros(rows, cols);
        for c in 0..cols {
            let mut max = f64::NEG_INFINITY;
            for r in 0..rows {
                max = max.max(x.get(r, c));
            }
            let mut denom = 0.0;
            for r in 0..rows {
                let e = (x.get(r, c) - max).exp();
                v.set(r, c, e);
                denom += e;
            }
            for r in 0..rows {
                v.set(r, c, v.get(r, c) / denom);
            }
        }
        let ng = self.needs(a);
        self.push(Op::Softmax(a), v, ng)
    }

    /// Sum of all entries, as a 1x1 tensor.
    pub fn sum(&mut self, a: NodeId) -> NodeId {
        let v = Tensor::scalar(self.value(a).sum());
        let ng = self.needs(a);
        self.push(Op::Sum(a), v, ng)
    }

    /// Stacks tensors with equal column counts on top of each other.
    pub fn concat_rows(&mut self, parts: &[NodeId]) -> Result<NodeId, TapeError> {
        assert!(!parts.is_empty(), "concat_rows needs at least one part");
        let cols = self.value(parts[0]).cols();
        let mut rows = 0;
        for &p in parts {
            if self.value(p).cols() != cols {
                return Err(TapeError::ShapeMismatch {
                    node: self.nodes.len(),
                    op: "concat_rows",
                    lhs: format!("(_, {cols})"),
                    rhs: format!("{:?}", self.value(p).shape()),
                });
            }
            rows += self.value(p).rows();
        }
        let mut data = Vec::with_capacity(rows * cols);
        for &p in parts {
            data.extend_from_slice(self.value(p).as_slice());
        }
        let ng = parts.iter().any(|&p| self.needs(p));
        Ok(self.push(
            Op::ConcatRows(parts.to_vec()),
            Tensor::from_vec(rows, cols, data),
            ng,
        ))
    }

    /// Rows `[start, start + len)` of the input.
    pub fn slice_rows(&mut self, a: NodeId, start: usize, len: usize) -> Result<NodeId, TapeError> {
        let (rows, cols) = self.value(a).shape();
        if start + len > rows {
            return Err(TapeError::ShapeMismatch {
                node: self.nodes.len(),
                op: "slice_rows",
                lhs: format!("rows {start}..{}", start + len),
                rhs: format!("({rows}, {cols})"),
            });
        }
        let data = self.value(a).as_slice()[start * cols..(start + len) * cols].to_vec();
        let ng = self.needs(a);
        Ok(self.push(Op::SliceRows(a, start), Tensor::from_vec(len, cols, data), ng))
    }

    /// Row gather: output row `i` is input row `index[i]`.
    pub fn gather_rows(&mut self, a: NodeId, index: Arc<Vec<usize>>) -> Result<NodeId, TapeError> {
        let (rows, cols) = self.value(a).shape();
        if let Some(&bad) = index.iter().find(|&&i| i >= rows) {
            return Err(TapeError::ShapeMismatch {
                node: self.nodes.len(),
                op: "gather_rows",
                lhs: format!("index {bad}"),
                rhs: format!("({rows}, {cols})"),
            });
        }
        let mut data = Vec::with_capacity(index.len() * cols);
        for &i in index.iter() {
            data.extend_from_slice(&self.value(a).as_slice()[i * cols..(i + 1) * cols]);
        }
        let out = Tensor::from_vec(index.len(), cols, data);
        let ng = self.needs(a);
        Ok(self.push(Op::GatherRows(a, index), out, ng))
    }

    /// MMSE quadratic forms against the coordinated eavesdroppers, one per
    /// user, as a function of the per-user transmit weights `w` (a 2N x 1
    /// column). The solve is differentiated through its adjoint.
    pub fn eve_quadform(
        &mut self,
        w: NodeId,
        channels: Arc<EveChannels>,
    ) -> Result<NodeId, TapeError> {
        let n_users = channels.gains.rows();
        let k = channels.gains.cols();
        if self.value(w).shape() != (n_users, 1) {
            return Err(TapeError::ShapeMismatch {
                node: self.nodes.len(),
                op: "eve_quadform",
                lhs: format!("({n_users}, 1)"),
                rhs: format!("{:?}", self.value(w).shape()),
            });
        }
        let weights = self.value(w).as_slice().to_vec();
        let mut q = Tensor::zeros(n_users, 1);
        let mut solves = Vec::with_capacity(n_users);
        for m in 0..n_users {
            let partner = m ^ 1;
            let mut a = CMat::scaled_identity(k, channels.noise_w);
            for (j, &wj) in weights.iter().enumerate() {
                if j == m || j == partner || wj == 0.0 {
                    continue;
                }
                a.add_scaled_outer(wj, channels.gains.row(j));
            }
            let u = solve_hpd(&a, channels.gains.row(m))
                .expect("eavesdropper Gram matrix must be positive definite");
            q.set(m, 0, herm_dot(channels.gains.row(m), &u).re);
            solves.push(u);
        }
        let ng = self.needs(w);
        Ok(self.push(Op::EveQuadform { w, channels, solves }, q, ng))
    }

    /// Reverse pass from a scalar output. Returns per-node gradients; only
    /// nodes on a `needs_grad` path are populated.
    pub fn backward(&self, output: NodeId) -> Result<Gradients, TapeError> {
        let out_shape = self.value(output).shape();
        if out_shape != (1, 1) {
            return Err(TapeError::NonScalarOutput {
                node: output.0,
                shape: format!("{out_shape:?}"),
            });
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        grads[output.0] = Some(Tensor::scalar(1.0));

        for idx in (0..=output.0).rev() {
            if !self.nodes[idx].needs_grad {
                continue;
            }
            let g = match grads[idx].take() {
                Some(g) => g,
                None => continue,
            };
            self.accumulate(idx, &g, &mut grads);
            grads[idx] = Some(g);
        }
        Ok(Gradients { grads })
    }

    fn add_grad(&self, grads: &mut [Option<Tensor>], id: NodeId, delta: Tensor) {
        if !self.needs(id) {
            return;
        }
        match &mut grads[id.0] {
            Some(existing) => {
                let dst = existing.as_mut_slice();
                for (d, s) in dst.iter_mut().zip(delta.as_slice()) {
                    *d += s;
                }
            }
            slot @ None => *slot = Some(delta),
        }
    }

    fn accumulate(&self, idx: usize, g: &Tensor, grads: &mut [Option<Tensor>]) {
        match &self.nodes[idx].op {
            Op::Leaf => {}
            Op::Add(a, b) => {
                self.add_grad(grads, *a, g.clone());
                self.add_grad(grads, *b, g.clone());
            }
            Op::Sub(a, b) => {
                self.add_grad(grads, *a, g.clone());
                self.add_grad(grads, *b, g.map(|x| -x));
            }
            Op::Mul(a, b) => {
                if self.needs(*a) {
                    self.add_grad(grads, *a, g.zip_map(self.value(*b), |gi, bi| gi * bi));
                }
                if self.needs(*b) {
                    self.add_grad(grads, *b, g.zip_map(self.value(*a), |gi, ai| gi * ai));
                }
            }
            Op::Div(a, b) => {
                if self.needs(*a) {
                    self.add_grad(grads, *a, g.zip_map(self.value(*b), |gi, bi| gi / bi));
                }
                if self.needs(*b) {
                    let out = &self.nodes[idx].value;
                    let mut d = g.zip_map(out, |gi, yi| gi * yi);
                    d = d.zip_map(self.value(*b), |x, bi| -x / bi);
                    self.add_grad(grads, *b, d);
                }
            }
            Op::Recip(a) => {
                let out = &self.nodes[idx].value;
                self.add_grad(grads, *a, g.zip_map(out, |gi, yi| -gi * yi * yi));
            }
            Op::AddScalar(a) => self.add_grad(grads, *a, g.clone()),
            Op::MulScalar(a, s) => self.add_grad(grads, *a, g.map(|x| x * s)),
            Op::MatMul(a, b) => {
                if self.needs(*a) {
                    self.add_grad(grads, *a, g.matmul(&self.value(*b).transpose()));
                }
                if self.needs(*b) {
                    self.add_grad(grads, *b, self.value(*a).transpose().matmul(g));
                }
            }
            Op::Log1p(a) => {
                self.add_grad(grads, *a, g.zip_map(self.value(*a), |gi, ai| gi / (1.0 + ai)));
            }
            Op::Exp(a) => {
                let out = &self.nodes[idx].value;
                self.add_grad(grads, *a, g.zip_map(out, |gi, yi| gi * yi));
            }
            Op::Gelu(a) => {
                self.add_grad(
                    grads,
                    *a,
                    g.zip_map(self.value(*a), |gi, ai| gi * gelu_grad(ai)),
                );
            }
            Op::Sigmoid(a) => {
                let out = &self.nodes[idx].value;
                self.add_grad(grads, *a, g.zip_map(out, |gi, yi| gi * yi * (1.0 - yi)));
            }
            Op::Softmax(a) => {
                let y = &self.nodes[idx].value;
                let (rows, cols) = y.shape();
                let mut d = Tensor::zeros(rows, cols);
                for c in 0..cols {
                    let mut dot = 0.0;
                    for r in 0..rows {
                        dot += y.get(r, c) * g.get(r, c);
                    }
                    for r in 0..rows {
                        d.set(r, c, y.get(r, c) * (g.get(r, c) - dot));
                    }
                }
                self.add_grad(grads, *a, d);
            }
            Op::Sum(a) => {
                let gi = g.item();
                let (rows, cols) = self.value(*a).shape();
                self.add_grad(grads, *a, Tensor::from_fn(rows, cols, |_, _| gi));
            }
            Op::ConcatRows(parts) => {
                let cols = self.nodes[idx].value.cols();
                let mut offset = 0;
                for &p in parts {
                    let rows = self.value(p).rows();
                    if self.needs(p) {
                        let data =
                            g.as_slice()[offset * cols..(offset + rows) * cols].to_vec();
                        self.add_grad(grads, p, Tensor::from_vec(rows, cols, data));
                    }
                    offset += rows;
                }
            }
            Op::SliceRows(a, start) => {
                let (rows, cols) = self.value(*a).shape();
                let mut d = Tensor::zeros(rows, cols);
                let len = self.nodes[idx].value.rows();
                d.as_mut_slice()[start * cols..(start + len) * cols]
                    .copy_from_slice(g.as_slice());
                self.add_grad(grads, *a, d);
            }
            Op::GatherRows(a, index) => {
                let (rows, cols) = self.value(*a).shape();
                let mut d = Tensor::zeros(rows, cols);
                for (out_row, &src_row) in index.iter().enumerate() {
                    for c in 0..cols {
                        let v = d.get(src_row, c) + g.get(out_row, c);
                        d.set(src_row, c, v);
                    }
                }
                self.add_grad(grads, *a, d);
            }
            Op::EveQuadform { w, channels, solves } => {
                // dq_m/dw_j = -|g_j^H u_m|^2 for j outside pair(m).
                let n_users = channels.gains.rows();
                let mut d = Tensor::zeros(n_users, 1);
                for m in 0..n_users {
                    let gm = g.get(m, 0);
                    if gm == 0.0 {
                        continue;
                    }
                    let u = &solves[m];
                    let partner = m ^ 1;
                    for j in 0..n_users {
                        if j == m || j == partner {
                            continue;
                        }
                        let dot = herm_dot(channels.gains.row(j), u);
                        let v = d.get(j, 0) - gm * dot.norm_sqr();
                        d.set(j, 0, v);
                    }
                }
                self.add_grad(grads, *w, d);
            }
        }
    }
}
