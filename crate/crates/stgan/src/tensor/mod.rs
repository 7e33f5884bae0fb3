//! Dense f64 tensors with define-by-run reverse-mode differentiation.
//!
//! A [`Graph`] records every operation as it runs; [`Graph::backward`] walks
//! the record in reverse and emits the vector-Jacobian products *as further
//! graph operations*. Gradients are therefore ordinary tensors, and a scalar
//! built from them (the Wasserstein gradient penalty) can itself be
//! differentiated by calling `backward` again.
//!
//! Graphs are rebuilt every forward pass, which keeps recurrent unrolls over
//! variable sentence lengths trivially correct. Parameters persist across
//! passes in a [`ParamStore`] and are bound into each new graph with
//! [`Graph::param`].

mod fdcheck;
mod optim;
mod store;

pub use fdcheck::{finite_difference_check, FdReport};
pub use optim::{clamp_params, clip_global_norm, Adam, AdamConfig};
pub use store::{ParamId, ParamStore};

use std::cell::RefCell;
use std::rc::Rc;

use thiserror::Error;

/// Inputs to log / reciprocal are floored at this value to avoid -inf;
/// degenerate softmax outputs occur early in training and must stay finite.
pub const LOG_FLOOR: f64 = 1e-12;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum TensorError {
    #[error("{op}: shape mismatch between {lhs:?} and {rhs:?}")]
    ShapeMismatch { op: &'static str, lhs: Vec<usize>, rhs: Vec<usize> },
    #[error("{op}: expected {expected}, got shape {got:?}")]
    BadShape { op: &'static str, expected: &'static str, got: Vec<usize> },
    #[error("backward: loss must be a scalar, got shape {0:?}")]
    NonScalarLoss(Vec<usize>),
    #[error("tensors belong to different graphs")]
    GraphMismatch,
    #[error("data length {got} does not match shape {shape:?} (need {need})")]
    DataLength { shape: Vec<usize>, need: usize, got: usize },
    #[error("parameter {0:?} has no gradient; run backward and apply_grads first")]
    MissingGrad(String),
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("{op}: index {index} out of range for dimension of size {size}")]
    IndexOutOfRange { op: &'static str, index: usize, size: usize },
}

pub type Result<T> = std::result::Result<T, TensorError>;

pub type NodeId = usize;

fn numel(shape: &[usize]) -> usize {
    shape.iter().product()
}

/// Interpret a shape as (rows, cols): scalars are 1x1, vectors 1xN.
fn rows_cols(shape: &[usize]) -> (usize, usize) {
    match shape.len() {
        0 => (1, 1),
        1 => (1, shape[0]),
        2 => (shape[0], shape[1]),
        _ => unreachable!("ops are defined for at most 2 dimensions"),
    }
}

// Some recorded bounds (slice ends, gate slopes) are not needed by the
// backward rules but keep the operation record self-describing.
#[allow(dead_code)]
#[derive(Clone, Debug)]
enum Op {
    Leaf,
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Neg(NodeId),
    ScaleConst(NodeId, f64),
    AddConst(NodeId, f64),
    Matmul(NodeId, NodeId),
    Transpose(NodeId),
    Sigmoid(NodeId),
    Tanh(NodeId),
    Exp(NodeId),
    LogFloored(NodeId),
    RecipFloored(NodeId),
    Sqrt(NodeId),
    Abs(NodeId),
    Sign(NodeId),
    LeakyRelu(NodeId, f64),
    LreluGate(NodeId, f64),
    Softmax(NodeId),
    SumAll(NodeId),
    MeanAll(NodeId),
    SumAxis0(NodeId),
    SumAxis1(NodeId),
    BcastScalar(NodeId),
    BcastRows(NodeId),
    BcastCols(NodeId),
    ConcatCols(Rc<Vec<NodeId>>),
    ConcatRows(Rc<Vec<NodeId>>),
    SliceRows(NodeId, usize, usize),
    SliceCols(NodeId, usize, usize),
    PadRows(NodeId, usize, usize),
    PadCols(NodeId, usize, usize),
    Reshape(NodeId),
    EmbedLookup(NodeId, Rc<Vec<usize>>),
    ScatterRows(NodeId, Rc<Vec<usize>>, usize),
    PickCols(NodeId, Rc<Vec<usize>>),
    ScatterCols(NodeId, Rc<Vec<usize>>),
}

struct Node {
    op: Op,
    shape: Vec<usize>,
    value: Vec<f64>,
    requires_grad: bool,
}

#[derive(Default)]
struct GraphInner {
    nodes: Vec<Node>,
    /// (node, slot) for every parameter bound with `Graph::param`.
    bound: Vec<(NodeId, ParamId)>,
    /// Gradient node per node id, populated by the most recent `backward`.
    grads: Vec<Option<NodeId>>,
}

/// Append-only operation record. Cheap to clone (shared handle).
#[derive(Clone, Default)]
pub struct Graph {
    inner: Rc<RefCell<GraphInner>>,
}

/// Handle to a value in a [`Graph`].
#[derive(Clone)]
pub struct Tensor {
    graph: Graph,
    id: NodeId,
}

impl std::fmt::Debug for Tensor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Tensor")
            .field("id", &self.id)
            .field("shape", &self.shape())
            .field("requires_grad", &self.requires_grad())
            .finish()
    }
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    pub fn len(&self) -> usize {
        self.inner.borrow().nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn push(&self, op: Op, shape: Vec<usize>, value: Vec<f64>, requires_grad: bool) -> Tensor {
        debug_assert_eq!(numel(&shape), value.len());
        let mut inner = self.inner.borrow_mut();
        let id = inner.nodes.len();
        inner.nodes.push(Node { op, shape, value, requires_grad });
        Tensor { graph: self.clone(), id }
    }

    /// Constant leaf; gradients never flow into it.
    pub fn constant(&self, shape: &[usize], data: Vec<f64>) -> Result<Tensor> {
        if numel(shape) != data.len() {
            return Err(TensorError::DataLength {
                shape: shape.to_vec(),
                need: numel(shape),
                got: data.len(),
            });
        }
        Ok(self.push(Op::Leaf, shape.to_vec(), data, false))
    }

    pub fn scalar(&self, v: f64) -> Tensor {
        self.push(Op::Leaf, vec![], vec![v], false)
    }

    pub fn zeros(&self, shape: &[usize]) -> Tensor {
        self.push(Op::Leaf, shape.to_vec(), vec![0.0; numel(shape)], false)
    }

    /// Differentiable leaf that is not a parameter (e.g. the interpolates the
    /// gradient penalty differentiates against).
    pub fn input(&self, shape: &[usize], data: Vec<f64>) -> Result<Tensor> {
        if numel(shape) != data.len() {
            return Err(TensorError::DataLength {
                shape: shape.to_vec(),
                need: numel(shape),
                got: data.len(),
            });
        }
        Ok(self.push(Op::Leaf, shape.to_vec(), data, true))
    }

    /// Bind a stored parameter into this graph as a differentiable leaf.
    /// After `backward`, [`Graph::apply_grads`] writes its gradient back.
    pub fn param(&self, store: &ParamStore, id: ParamId) -> Tensor {
        let t = self.push(
            Op::Leaf,
            store.shape(id).to_vec(),
            store.value(id).to_vec(),
            true,
        );
        self.inner.borrow_mut().bound.push((t.id, id));
        t
    }

    /// Bind a stored parameter as a constant (e.g. the critic while the
    /// generator trains).
    pub fn frozen(&self, store: &ParamStore, id: ParamId) -> Tensor {
        self.push(Op::Leaf, store.shape(id).to_vec(), store.value(id).to_vec(), false)
    }

    fn shape_of(&self, id: NodeId) -> Vec<usize> {
        self.inner.borrow().nodes[id].shape.clone()
    }

    fn value_of(&self, id: NodeId) -> Vec<f64> {
        self.inner.borrow().nodes[id].value.clone()
    }

    /// Gradient tensor of `t` from the most recent `backward`, if it received one.
    pub fn grad(&self, t: &Tensor) -> Option<Tensor> {
        let inner = self.inner.borrow();
        inner
            .grads
            .get(t.id)
            .copied()
            .flatten()
            .map(|id| Tensor { graph: self.clone(), id })
    }

    /// Accumulate the gradients of all bound parameters into the store.
    /// Bound parameters the loss did not reach receive zeros.
    pub fn apply_grads(&self, store: &mut ParamStore) {
        let bound = self.inner.borrow().bound.clone();
        for (node_id, param_id) in bound {
            let grad_node = self.inner.borrow().grads.get(node_id).copied().flatten();
            match grad_node {
                Some(g) => {
                    let inner = self.inner.borrow();
                    store.accumulate_grad(param_id, &inner.nodes[g].value);
                }
                None => store.accumulate_grad(param_id, &vec![0.0; store.len(param_id)]),
            }
        }
    }

    /// Reverse-mode differentiation of a scalar loss. Gradients from any
    /// previous call are discarded first. The vector-Jacobian products are
    /// emitted as graph operations, so gradients are themselves tensors and
    /// may be differentiated again.
    pub fn backward(&self, loss: &Tensor) -> Result<()> {
        if !Rc::ptr_eq(&self.inner, &loss.graph.inner) {
            return Err(TensorError::GraphMismatch);
        }
        {
            let inner = self.inner.borrow();
            if inner.nodes[loss.id].value.len() != 1 {
                return Err(TensorError::NonScalarLoss(inner.nodes[loss.id].shape.clone()));
            }
        }
        let start = loss.id;
        let mut grads: Vec<Option<NodeId>> = vec![None; start + 1];
        grads[start] = Some(self.scalar(1.0).id);

        for id in (0..=start).rev() {
            let Some(g_id) = grads[id] else { continue };
            let op = self.inner.borrow().nodes[id].op.clone();
            let g = Tensor { graph: self.clone(), id: g_id };
            self.emit_vjp(id, &op, &g, &mut grads)?;
        }

        let mut inner = self.inner.borrow_mut();
        grads.resize(inner.nodes.len(), None);
        inner.grads = grads;
        Ok(())
    }

    fn wants_grad(&self, id: NodeId) -> bool {
        self.inner.borrow().nodes[id].requires_grad
    }

    fn accumulate(&self, grads: &mut [Option<NodeId>], input: NodeId, partial: Tensor) {
        if !self.wants_grad(input) {
            return;
        }
        grads[input] = Some(match grads[input] {
            None => partial.id,
            Some(prev) => {
                let prev_t = Tensor { graph: self.clone(), id: prev };
                prev_t.add(&partial).expect("gradient shapes agree by construction").id
            }
        });
    }

    fn node_tensor(&self, id: NodeId) -> Tensor {
        Tensor { graph: self.clone(), id }
    }

    #[allow(clippy::too_many_lines)]
    fn emit_vjp(
        &self,
        out_id: NodeId,
        op: &Op,
        g: &Tensor,
        grads: &mut [Option<NodeId>],
    ) -> Result<()> {
        let y = |s: &Graph| s.node_tensor(out_id);
        match *op {
            Op::Leaf => {}
            Op::Add(a, b) => {
                self.accumulate(grads, a, g.clone());
                self.accumulate(grads, b, g.clone());
            }
            Op::Sub(a, b) => {
                self.accumulate(grads, a, g.clone());
                self.accumulate(grads, b, g.neg());
            }
            Op::Mul(a, b) => {
                if self.wants_grad(a) {
                    let p = g.mul(&self.node_tensor(b))?;
                    self.accumulate(grads, a, p);
                }
                if self.wants_grad(b) {
                    let p = g.mul(&self.node_tensor(a))?;
                    self.accumulate(grads, b, p);
                }
            }
            Op::Neg(a) => self.accumulate(grads, a, g.neg()),
            Op::ScaleConst(a, c) => self.accumulate(grads, a, g.scale(c)),
            Op::AddConst(a, _) => self.accumulate(grads, a, g.clone()),
            Op::Matmul(a, b) => {
                if self.wants_grad(a) {
                    let p = g.matmul(&self.node_tensor(b).t())?;
                    self.accumulate(grads, a, p);
                }
                if self.wants_grad(b) {
                    let p = self.node_tensor(a).t().matmul(g)?;
                    self.accumulate(grads, b, p);
                }
            }
            Op::Transpose(a) => self.accumulate(grads, a, g.t()),
            Op::Sigmoid(a) => {
                // d * y * (1 - y)
                let yt = y(self);
                let one_minus = yt.neg().add_const(1.0);
                let p = g.mul(&yt)?.mul(&one_minus)?;
                self.accumulate(grads, a, p);
            }
            Op::Tanh(a) => {
                let yt = y(self);
                let one_minus_sq = yt.mul(&yt)?.neg().add_const(1.0);
                self.accumulate(grads, a, g.mul(&one_minus_sq)?);
            }
            Op::Exp(a) => self.accumulate(grads, a, g.mul(&y(self))?),
            Op::LogFloored(a) => {
                let p = g.mul(&self.node_tensor(a).recip_floored())?;
                self.accumulate(grads, a, p);
            }
            Op::RecipFloored(a) => {
                let yt = y(self);
                let p = g.mul(&yt)?.mul(&yt)?.neg();
                self.accumulate(grads, a, p);
            }
            Op::Sqrt(a) => {
                // d / (2 sqrt(x))
                let p = g.mul(&y(self).recip_floored())?.scale(0.5);
                self.accumulate(grads, a, p);
            }
            Op::Abs(a) => {
                let p = g.mul(&self.node_tensor(a).sign())?;
                self.accumulate(grads, a, p);
            }
            Op::Sign(_) | Op::LreluGate(_, _) => {
                // Piecewise-constant; zero derivative almost everywhere.
            }
            Op::LeakyRelu(a, slope) => {
                let gate = self.node_tensor(a).lrelu_gate(slope);
                self.accumulate(grads, a, g.mul(&gate)?);
            }
            Op::Softmax(a) => {
                let yt = y(self);
                let shape = self.shape_of(out_id);
                let p = if shape.len() == 2 {
                    let dot = g.mul(&yt)?.sum_axis1()?; // [n]
                    let m = shape[1];
                    yt.mul(&g.sub(&dot.bcast_cols(m)?)?)?
                } else {
                    let dot = g.mul(&yt)?.sum_all();
                    yt.mul(&g.sub(&dot.bcast_to(&shape)?)?)?
                };
                self.accumulate(grads, a, p);
            }
            Op::SumAll(a) => {
                let shape = self.shape_of(a);
                self.accumulate(grads, a, g.bcast_to(&shape)?);
            }
            Op::MeanAll(a) => {
                let shape = self.shape_of(a);
                let n = numel(&shape) as f64;
                self.accumulate(grads, a, g.scale(1.0 / n).bcast_to(&shape)?);
            }
            Op::SumAxis0(a) => {
                let n = self.shape_of(a)[0];
                self.accumulate(grads, a, g.bcast_rows(n)?);
            }
            Op::SumAxis1(a) => {
                let m = self.shape_of(a)[1];
                self.accumulate(grads, a, g.bcast_cols(m)?);
            }
            Op::BcastScalar(a) => self.accumulate(grads, a, g.sum_all()),
            Op::BcastRows(a) => self.accumulate(grads, a, g.sum_axis0()?),
            Op::BcastCols(a) => self.accumulate(grads, a, g.sum_axis1()?),
            Op::ConcatCols(ref parts) => {
                let mut offset = 0;
                for &p in parts.iter() {
                    let (_, w) = rows_cols(&self.shape_of(p));
                    if self.wants_grad(p) {
                        let slice = g.slice_cols(offset, offset + w)?;
                        let slice = slice.reshape(&self.shape_of(p))?;
                        self.accumulate(grads, p, slice);
                    }
                    offset += w;
                }
            }
            Op::ConcatRows(ref parts) => {
                let mut offset = 0;
                for &p in parts.iter() {
                    let (h, _) = rows_cols(&self.shape_of(p));
                    if self.wants_grad(p) {
                        let slice = g.slice_rows(offset, offset + h)?;
                        let slice = slice.reshape(&self.shape_of(p))?;
                        self.accumulate(grads, p, slice);
                    }
                    offset += h;
                }
            }
            Op::SliceRows(a, r0, _) => {
                let (rows, _) = rows_cols(&self.shape_of(a));
                self.accumulate(grads, a, g.pad_rows(rows, r0)?.reshape(&self.shape_of(a))?);
            }
            Op::SliceCols(a, c0, _) => {
                let (_, cols) = rows_cols(&self.shape_of(a));
                self.accumulate(grads, a, g.pad_cols(cols, c0)?.reshape(&self.shape_of(a))?);
            }
            Op::PadRows(a, _, offset) => {
                let (h, _) = rows_cols(&self.shape_of(a));
                let p = g.slice_rows(offset, offset + h)?.reshape(&self.shape_of(a))?;
                self.accumulate(grads, a, p);
            }
            Op::PadCols(a, _, offset) => {
                let (_, w) = rows_cols(&self.shape_of(a));
                let p = g.slice_cols(offset, offset + w)?.reshape(&self.shape_of(a))?;
                self.accumulate(grads, a, p);
            }
            Op::Reshape(a) => {
                self.accumulate(grads, a, g.reshape(&self.shape_of(a))?);
            }
            Op::EmbedLookup(table, ref ids) => {
                let v = self.shape_of(table)[0];
                self.accumulate(grads, table, g.scatter_rows(ids, v)?);
            }
            Op::ScatterRows(a, ref ids, _) => {
                self.accumulate(grads, a, g.embed_lookup_ids(ids)?);
            }
            Op::PickCols(a, ref ids) => {
                let m = self.shape_of(a)[1];
                self.accumulate(grads, a, g.scatter_cols(ids, m)?);
            }
            Op::ScatterCols(a, ref ids) => {
                self.accumulate(grads, a, g.pick_cols(ids)?);
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// kernels
// ---------------------------------------------------------------------------

fn matmul_kernel(a: &[f64], b: &[f64], n: usize, k: usize, m: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * m];
    for i in 0..n {
        let arow = &a[i * k..(i + 1) * k];
        let orow = &mut out[i * m..(i + 1) * m];
        for (kk, &av) in arow.iter().enumerate() {
            let brow = &b[kk * m..(kk + 1) * m];
            for (o, &bv) in orow.iter_mut().zip(brow.iter()) {
                *o += av * bv;
            }
        }
    }
    out
}

fn softmax_rows(x: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows {
        let row = &x[r * cols..(r + 1) * cols];
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let orow = &mut out[r * cols..(r + 1) * cols];
        let mut sum = 0.0;
        for (o, &v) in orow.iter_mut().zip(row.iter()) {
            *o = (v - max).exp();
            sum += *o;
        }
        for o in orow.iter_mut() {
            *o /= sum;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// public ops
// ---------------------------------------------------------------------------

impl Tensor {
    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn shape(&self) -> Vec<usize> {
        self.graph.shape_of(self.id)
    }

    pub fn data(&self) -> Vec<f64> {
        self.graph.value_of(self.id)
    }

    /// Value of a one-element tensor.
    pub fn item(&self) -> f64 {
        let inner = self.graph.inner.borrow();
        debug_assert_eq!(inner.nodes[self.id].value.len(), 1);
        inner.nodes[self.id].value[0]
    }

    pub fn requires_grad(&self) -> bool {
        self.graph.inner.borrow().nodes[self.id].requires_grad
    }

    /// Gradient values from the most recent backward pass, if any reached
    /// this tensor.
    pub fn grad(&self) -> Option<Vec<f64>> {
        self.graph.grad(self).map(|t| t.data())
    }

    fn same_graph(&self, other: &Tensor, op: &'static str) -> Result<()> {
        if Rc::ptr_eq(&self.graph.inner, &other.graph.inner) {
            Ok(())
        } else {
            let _ = op;
            Err(TensorError::GraphMismatch)
        }
    }

    fn unary(&self, op: Op, value: Vec<f64>) -> Tensor {
        let shape = self.shape();
        let req = self.requires_grad();
        self.graph.push(op, shape, value, req)
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.graph.inner.borrow().nodes[self.id].value.iter().map(|&v| f(v)).collect()
    }

    /// Elementwise binary op with broadcasting of scalars and of row vectors
    /// over a batch; other shape pairs are rejected.
    fn broadcast_pair(&self, other: &Tensor, op: &'static str) -> Result<(Tensor, Tensor)> {
        self.same_graph(other, op)?;
        let (sa, sb) = (self.shape(), other.shape());
        if sa == sb {
            return Ok((self.clone(), other.clone()));
        }
        let (na, nb) = (numel(&sa), numel(&sb));
        if nb == 1 {
            return Ok((self.clone(), other.bcast_to(&sa)?));
        }
        if na == 1 {
            return Ok((self.bcast_to(&sb)?, other.clone()));
        }
        // Row-vector over batch.
        if sa.len() == 2 && sb.len() == 1 && sa[1] == sb[0] {
            return Ok((self.clone(), other.bcast_rows(sa[0])?));
        }
        if sb.len() == 2 && sa.len() == 1 && sb[1] == sa[0] {
            return Ok((self.bcast_rows(sb[0])?, other.clone()));
        }
        Err(TensorError::ShapeMismatch { op, lhs: sa, rhs: sb })
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        let (a, b) = self.broadcast_pair(other, "add")?;
        let value: Vec<f64> =
            a.data().iter().zip(b.data().iter()).map(|(&x, &y)| x + y).collect();
        let req = a.requires_grad() || b.requires_grad();
        Ok(self.graph.push(Op::Add(a.id, b.id), a.shape(), value, req))
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        let (a, b) = self.broadcast_pair(other, "sub")?;
        let value: Vec<f64> =
            a.data().iter().zip(b.data().iter()).map(|(&x, &y)| x - y).collect();
        let req = a.requires_grad() || b.requires_grad();
        Ok(self.graph.push(Op::Sub(a.id, b.id), a.shape(), value, req))
    }

    pub fn mul(&self, other: &Tensor) -> Result<Tensor> {
        let (a, b) = self.broadcast_pair(other, "mul")?;
        let value: Vec<f64> =
            a.data().iter().zip(b.data().iter()).map(|(&x, &y)| x * y).collect();
        let req = a.requires_grad() || b.requires_grad();
        Ok(self.graph.push(Op::Mul(a.id, b.id), a.shape(), value, req))
    }

    pub fn neg(&self) -> Tensor {
        let v = self.map(|x| -x);
        self.unary(Op::Neg(self.id), v)
    }

    pub fn scale(&self, c: f64) -> Tensor {
        let v = self.map(|x| c * x);
        self.unary(Op::ScaleConst(self.id, c), v)
    }

    pub fn add_const(&self, c: f64) -> Tensor {
        let v = self.map(|x| x + c);
        self.unary(Op::AddConst(self.id, c), v)
    }

    pub fn matmul(&self, other: &Tensor) -> Result<Tensor> {
        self.same_graph(other, "matmul")?;
        let (sa, sb) = (self.shape(), other.shape());
        if sa.len() != 2 || sb.len() != 2 || sa[1] != sb[0] {
            return Err(TensorError::ShapeMismatch { op: "matmul", lhs: sa, rhs: sb });
        }
        let (n, k, m) = (sa[0], sa[1], sb[1]);
        let value = {
            let inner = self.graph.inner.borrow();
            matmul_kernel(&inner.nodes[self.id].value, &inner.nodes[other.id].value, n, k, m)
        };
        let req = self.requires_grad() || other.requires_grad();
        Ok(self.graph.push(Op::Matmul(self.id, other.id), vec![n, m], value, req))
    }

    /// Transpose of a 2-D tensor (vectors become 1xN first).
    pub fn t(&self) -> Tensor {
        let shape = self.shape();
        let (n, m) = rows_cols(&shape);
        let data = self.data();
        let mut out = vec![0.0; n * m];
        for i in 0..n {
            for j in 0..m {
                out[j * n + i] = data[i * m + j];
            }
        }
        let req = self.requires_grad();
        self.graph.push(Op::Transpose(self.id), vec![m, n], out, req)
    }

    pub fn sigmoid(&self) -> Tensor {
        let v = self.map(|x| 1.0 / (1.0 + (-x).exp()));
        self.unary(Op::Sigmoid(self.id), v)
    }

    pub fn tanh(&self) -> Tensor {
        let v = self.map(f64::tanh);
        self.unary(Op::Tanh(self.id), v)
    }

    pub fn exp(&self) -> Tensor {
        let v = self.map(f64::exp);
        self.unary(Op::Exp(self.id), v)
    }

    /// Natural log of max(x, 1e-12).
    pub fn log(&self) -> Tensor {
        let v = self.map(|x| x.max(LOG_FLOOR).ln());
        self.unary(Op::LogFloored(self.id), v)
    }

    /// 1 / max(x, 1e-12).
    pub fn recip_floored(&self) -> Tensor {
        let v = self.map(|x| 1.0 / x.max(LOG_FLOOR));
        self.unary(Op::RecipFloored(self.id), v)
    }

    /// Square root of max(x, 0).
    pub fn sqrt(&self) -> Tensor {
        let v = self.map(|x| x.max(0.0).sqrt());
        self.unary(Op::Sqrt(self.id), v)
    }

    pub fn abs(&self) -> Tensor {
        let v = self.map(f64::abs);
        self.unary(Op::Abs(self.id), v)
    }

    /// Elementwise sign in {-1, 0, 1}; carries no gradient.
    pub fn sign(&self) -> Tensor {
        let v = self.map(|x| {
            if x > 0.0 {
                1.0
            } else if x < 0.0 {
                -1.0
            } else {
                0.0
            }
        });
        let shape = self.shape();
        self.graph.push(Op::Sign(self.id), shape, v, false)
    }

    pub fn leaky_relu(&self, slope: f64) -> Tensor {
        let v = self.map(|x| if x > 0.0 { x } else { slope * x });
        self.unary(Op::LeakyRelu(self.id, slope), v)
    }

    fn lrelu_gate(&self, slope: f64) -> Tensor {
        let v = self.map(|x| if x > 0.0 { 1.0 } else { slope });
        let shape = self.shape();
        self.graph.push(Op::LreluGate(self.id, slope), shape, v, false)
    }

    /// Softmax over the last axis (per row for 2-D input).
    pub fn softmax(&self) -> Tensor {
        let shape = self.shape();
        let (n, m) = rows_cols(&shape);
        let v = {
            let inner = self.graph.inner.borrow();
            softmax_rows(&inner.nodes[self.id].value, n, m)
        };
        self.unary(Op::Softmax(self.id), v)
    }

    pub fn sum_all(&self) -> Tensor {
        let s: f64 = self.graph.inner.borrow().nodes[self.id].value.iter().sum();
        let req = self.requires_grad();
        self.graph.push(Op::SumAll(self.id), vec![], vec![s], req)
    }

    pub fn mean_all(&self) -> Tensor {
        let inner_sum: f64 = self.graph.inner.borrow().nodes[self.id].value.iter().sum();
        let n = numel(&self.shape()) as f64;
        let req = self.requires_grad();
        self.graph.push(Op::MeanAll(self.id), vec![], vec![inner_sum / n], req)
    }

    /// Column sums of a 2-D tensor: [n, m] -> [m].
    pub fn sum_axis0(&self) -> Result<Tensor> {
        let shape = self.shape();
        if shape.len() != 2 {
            return Err(TensorError::BadShape { op: "sum_axis0", expected: "2-D", got: shape });
        }
        let (n, m) = (shape[0], shape[1]);
        let data = self.data();
        let mut out = vec![0.0; m];
        for i in 0..n {
            for j in 0..m {
                out[j] += data[i * m + j];
            }
        }
        let req = self.requires_grad();
        Ok(self.graph.push(Op::SumAxis0(self.id), vec![m], out, req))
    }

    /// Row sums of a 2-D tensor: [n, m] -> [n].
    pub fn sum_axis1(&self) -> Result<Tensor> {
        let shape = self.shape();
        if shape.len() != 2 {
            return Err(TensorError::BadShape { op: "sum_axis1", expected: "2-D", got: shape });
        }
        let (n, m) = (shape[0], shape[1]);
        let data = self.data();
        let out: Vec<f64> = (0..n).map(|i| data[i * m..(i + 1) * m].iter().sum()).collect();
        let req = self.requires_grad();
        Ok(self.graph.push(Op::SumAxis1(self.id), vec![n], out, req))
    }

    /// Broadcast a one-element tensor to an arbitrary shape.
    pub fn bcast_to(&self, shape: &[usize]) -> Result<Tensor> {
        if self.data().len() != 1 {
            return Err(TensorError::BadShape {
                op: "bcast_to",
                expected: "scalar",
                got: self.shape(),
            });
        }
        let v = vec![self.item(); numel(shape)];
        let req = self.requires_grad();
        Ok(self.graph.push(Op::BcastScalar(self.id), shape.to_vec(), v, req))
    }

    /// Repeat a vector [m] as n rows: -> [n, m].
    pub fn bcast_rows(&self, n: usize) -> Result<Tensor> {
        let shape = self.shape();
        if shape.len() != 1 {
            return Err(TensorError::BadShape { op: "bcast_rows", expected: "1-D", got: shape });
        }
        let m = shape[0];
        let data = self.data();
        let mut out = Vec::with_capacity(n * m);
        for _ in 0..n {
            out.extend_from_slice(&data);
        }
        let req = self.requires_grad();
        Ok(self.graph.push(Op::BcastRows(self.id), vec![n, m], out, req))
    }

    /// Repeat a vector [n] as m columns: -> [n, m].
    pub fn bcast_cols(&self, m: usize) -> Result<Tensor> {
        let shape = self.shape();
        if shape.len() != 1 {
            return Err(TensorError::BadShape { op: "bcast_cols", expected: "1-D", got: shape });
        }
        let n = shape[0];
        let data = self.data();
        let mut out = Vec::with_capacity(n * m);
        for &v in &data {
            out.extend(std::iter::repeat_n(v, m));
        }
        let req = self.requires_grad();
        Ok(self.graph.push(Op::BcastCols(self.id), vec![n, m], out, req))
    }

    /// Concatenate along the column axis; row counts must agree.
    pub fn concat_cols(parts: &[&Tensor]) -> Result<Tensor> {
        assert!(!parts.is_empty(), "concat of zero tensors");
        let graph = parts[0].graph.clone();
        let (n, _) = rows_cols(&parts[0].shape());
        let mut widths = Vec::with_capacity(parts.len());
        for p in parts {
            parts[0].same_graph(p, "concat_cols")?;
            let (pn, pm) = rows_cols(&p.shape());
            if pn != n {
                return Err(TensorError::ShapeMismatch {
                    op: "concat_cols",
                    lhs: parts[0].shape(),
                    rhs: p.shape(),
                });
            }
            widths.push(pm);
        }
        let total: usize = widths.iter().sum();
        let mut out = Vec::with_capacity(n * total);
        let datas: Vec<Vec<f64>> = parts.iter().map(|p| p.data()).collect();
        for i in 0..n {
            for (p, w) in datas.iter().zip(widths.iter()) {
                out.extend_from_slice(&p[i * w..(i + 1) * w]);
            }
        }
        let req = parts.iter().any(|p| p.requires_grad());
        let ids = Rc::new(parts.iter().map(|p| p.id).collect::<Vec<_>>());
        let shape = if parts[0].shape().len() == 1 && n == 1 { vec![total] } else { vec![n, total] };
        Ok(graph.push(Op::ConcatCols(ids), shape, out, req))
    }

    /// Concatenate along the row axis; column counts must agree.
    pub fn concat_rows(parts: &[&Tensor]) -> Result<Tensor> {
        assert!(!parts.is_empty(), "concat of zero tensors");
        let graph = parts[0].graph.clone();
        let (_, m) = rows_cols(&parts[0].shape());
        let mut heights = Vec::with_capacity(parts.len());
        for p in parts {
            parts[0].same_graph(p, "concat_rows")?;
            let (pn, pm) = rows_cols(&p.shape());
            if pm != m {
                return Err(TensorError::ShapeMismatch {
                    op: "concat_rows",
                    lhs: parts[0].shape(),
                    rhs: p.shape(),
                });
            }
            heights.push(pn);
        }
        let total: usize = heights.iter().sum();
        let mut out = Vec::with_capacity(total * m);
        for p in parts {
            out.extend_from_slice(&p.data());
        }
        let req = parts.iter().any(|p| p.requires_grad());
        let ids = Rc::new(parts.iter().map(|p| p.id).collect::<Vec<_>>());
        Ok(graph.push(Op::ConcatRows(ids), vec![total, m], out, req))
    }

    pub fn slice_rows(&self, r0: usize, r1: usize) -> Result<Tensor> {
        let shape = self.shape();
        let (n, m) = rows_cols(&shape);
        if r1 > n || r0 >= r1 {
            return Err(TensorError::IndexOutOfRange { op: "slice_rows", index: r1, size: n });
        }
        let data = self.data();
        let out = data[r0 * m..r1 * m].to_vec();
        let req = self.requires_grad();
        Ok(self.graph.push(Op::SliceRows(self.id, r0, r1), vec![r1 - r0, m], out, req))
    }

    pub fn slice_cols(&self, c0: usize, c1: usize) -> Result<Tensor> {
        let shape = self.shape();
        let (n, m) = rows_cols(&shape);
        if c1 > m || c0 >= c1 {
            return Err(TensorError::IndexOutOfRange { op: "slice_cols", index: c1, size: m });
        }
        let data = self.data();
        let w = c1 - c0;
        let mut out = Vec::with_capacity(n * w);
        for i in 0..n {
            out.extend_from_slice(&data[i * m + c0..i * m + c1]);
        }
        let req = self.requires_grad();
        Ok(self.graph.push(Op::SliceCols(self.id, c0, c1), vec![n, w], out, req))
    }

    /// Embed rows into a taller zero matrix at a row offset.
    pub fn pad_rows(&self, total: usize, offset: usize) -> Result<Tensor> {
        let shape = self.shape();
        let (n, m) = rows_cols(&shape);
        if offset + n > total {
            return Err(TensorError::IndexOutOfRange { op: "pad_rows", index: offset + n, size: total });
        }
        let mut out = vec![0.0; total * m];
        out[offset * m..(offset + n) * m].copy_from_slice(&self.data());
        let req = self.requires_grad();
        Ok(self.graph.push(Op::PadRows(self.id, total, offset), vec![total, m], out, req))
    }

    /// Embed columns into a wider zero matrix at a column offset.
    pub fn pad_cols(&self, total: usize, offset: usize) -> Result<Tensor> {
        let shape = self.shape();
        let (n, m) = rows_cols(&shape);
        if offset + m > total {
            return Err(TensorError::IndexOutOfRange { op: "pad_cols", index: offset + m, size: total });
        }
        let data = self.data();
        let mut out = vec![0.0; n * total];
        for i in 0..n {
            out[i * total + offset..i * total + offset + m]
                .copy_from_slice(&data[i * m..(i + 1) * m]);
        }
        let req = self.requires_grad();
        Ok(self.graph.push(Op::PadCols(self.id, total, offset), vec![n, total], out, req))
    }

    pub fn reshape(&self, shape: &[usize]) -> Result<Tensor> {
        if numel(shape) != self.data().len() {
            return Err(TensorError::DataLength {
                shape: shape.to_vec(),
                need: numel(shape),
                got: self.data().len(),
            });
        }
        let v = self.data();
        let req = self.requires_grad();
        Ok(self.graph.push(Op::Reshape(self.id), shape.to_vec(), v, req))
    }

    /// Row lookup: self is a [V, d] table, result is [ids.len(), d].
    pub fn embed_lookup(&self, ids: &[usize]) -> Result<Tensor> {
        self.embed_lookup_ids(&Rc::new(ids.to_vec()))
    }

    fn embed_lookup_ids(&self, ids: &Rc<Vec<usize>>) -> Result<Tensor> {
        let shape = self.shape();
        if shape.len() != 2 {
            return Err(TensorError::BadShape { op: "embed_lookup", expected: "2-D table", got: shape });
        }
        let (v, d) = (shape[0], shape[1]);
        for &i in ids.iter() {
            if i >= v {
                return Err(TensorError::IndexOutOfRange { op: "embed_lookup", index: i, size: v });
            }
        }
        let data = self.data();
        let mut out = Vec::with_capacity(ids.len() * d);
        for &i in ids.iter() {
            out.extend_from_slice(&data[i * d..(i + 1) * d]);
        }
        let req = self.requires_grad();
        Ok(self.graph.push(
            Op::EmbedLookup(self.id, Rc::clone(ids)),
            vec![ids.len(), d],
            out,
            req,
        ))
    }

    /// Scatter-add rows of self ([ids.len(), d]) into a [rows, d] zero matrix.
    pub fn scatter_rows(&self, ids: &Rc<Vec<usize>>, rows: usize) -> Result<Tensor> {
        let shape = self.shape();
        if shape.len() != 2 || shape[0] != ids.len() {
            return Err(TensorError::BadShape { op: "scatter_rows", expected: "[ids, d]", got: shape });
        }
        let d = shape[1];
        let data = self.data();
        let mut out = vec![0.0; rows * d];
        for (r, &i) in ids.iter().enumerate() {
            if i >= rows {
                return Err(TensorError::IndexOutOfRange { op: "scatter_rows", index: i, size: rows });
            }
            for j in 0..d {
                out[i * d + j] += data[r * d + j];
            }
        }
        let req = self.requires_grad();
        Ok(self.graph.push(Op::ScatterRows(self.id, Rc::clone(ids), rows), vec![rows, d], out, req))
    }

    /// Per-row column pick: self [n, m], ids len n, result [n].
    pub fn pick_cols(&self, ids: &Rc<Vec<usize>>) -> Result<Tensor> {
        let shape = self.shape();
        if shape.len() != 2 || shape[0] != ids.len() {
            return Err(TensorError::BadShape { op: "pick_cols", expected: "[n, m] with n ids", got: shape });
        }
        let m = shape[1];
        for &i in ids.iter() {
            if i >= m {
                return Err(TensorError::IndexOutOfRange { op: "pick_cols", index: i, size: m });
            }
        }
        let data = self.data();
        let out: Vec<f64> = ids.iter().enumerate().map(|(r, &c)| data[r * m + c]).collect();
        let req = self.requires_grad();
        Ok(self.graph.push(Op::PickCols(self.id, Rc::clone(ids)), vec![ids.len()], out, req))
    }

    /// Per-row column scatter: self [n], result [n, cols] with self on the
    /// picked positions.
    pub fn scatter_cols(&self, ids: &Rc<Vec<usize>>, cols: usize) -> Result<Tensor> {
        let shape = self.shape();
        if shape.len() != 1 || shape[0] != ids.len() {
            return Err(TensorError::BadShape { op: "scatter_cols", expected: "[n] with n ids", got: shape });
        }
        let n = shape[0];
        let data = self.data();
        let mut out = vec![0.0; n * cols];
        for (r, &c) in ids.iter().enumerate() {
            if c >= cols {
                return Err(TensorError::IndexOutOfRange { op: "scatter_cols", index: c, size: cols });
            }
            out[r * cols + c] = data[r];
        }
        let req = self.requires_grad();
        Ok(self.graph.push(Op::ScatterCols(self.id, Rc::clone(ids)), vec![n, cols], out, req))
    }

    /// Sum of absolute values.
    pub fn l1_norm(&self) -> Tensor {
        self.abs().sum_all()
    }

    /// Euclidean norm of the whole tensor.
    pub fn l2_norm(&self) -> Result<Tensor> {
        Ok(self.mul(self)?.sum_all().sqrt())
    }

    /// Per-row Euclidean norms of a 2-D tensor: [n, m] -> [n].
    pub fn row_l2_norms(&self) -> Result<Tensor> {
        Ok(self.mul(self)?.sum_axis1()?.sqrt())
    }
}
