use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::tensor::Tensor;

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Per-column reduction over rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Reduction {
    Mean,
    Sum,
    Max,
    /// Population variance (divides by the row count).
    Var,
}

#[derive(Debug)]
enum Op {
    Leaf,
    Matmul(Var, Var),
    SparseMatmul(Arc<Graph>, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Scale(Var, f64),
    MulScalar(Var, Var),
    Hadamard(Var, Var),
    Mask(Var, Tensor),
    Relu(Var),
    Tanh(Var),
    Log(Var),
    Powf(Var, f64),
    SoftmaxRows(Var),
    ConcatCols(Vec<Var>),
    Reduce(Var, Reduction, Vec<usize>),
    SumAll(Var),
    GatherRows(Var, Vec<usize>),
    Transpose(Var),
    Reshape(Var),
    SymNormalize(Var, Vec<f64>),
    CrossEntropy {
        logits: Var,
        labels: Vec<usize>,
        rows: Vec<usize>,
        probs: Tensor,
    },
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    grad: Option<Tensor>,
    requires_grad: bool,
    op: Op,
}

/// Records primitive operations in execution order, which is a topological
/// order of the computation graph, and replays them backwards to
/// accumulate vector-Jacobian products.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
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

    pub fn leaf(&mut self, value: Tensor, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            grad: None,
            requires_grad,
            op: Op::Leaf,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn constant(&mut self, value: Tensor) -> Var {
        self.leaf(value, false)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        self.nodes[v.0].value.shape()
    }

    pub fn grad(&self, v: Var) -> Option<&Tensor> {
        self.nodes[v.0].grad.as_ref()
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    pub fn zero_grad(&mut self) {
        for n in &mut self.nodes {
            n.grad = None;
        }
    }

    fn push(&mut self, value: Tensor, op: Op, inputs: &[Var], name: &str) -> Result<Var> {
        value.check_finite(name)?;
        let requires_grad = inputs.iter().any(|v| self.nodes[v.0].requires_grad);
        self.nodes.push(Node {
            value,
            grad: None,
            requires_grad,
            op,
        });
        Ok(Var(self.nodes.len() - 1))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.value(a).matmul(self.value(b))?;
        self.push(out, Op::Matmul(a, b), &[a, b], "matmul")
    }

    /// `A x` for a fixed sparse adjacency.
    pub fn sparse_matmul(&mut self, g: &Arc<Graph>, x: Var) -> Result<Var> {
        let out = g.spmm(self.value(x))?;
        self.push(out, Op::SparseMatmul(Arc::clone(g), x), &[x], "sparse_matmul")
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.value(a).add(self.value(b))?;
        self.push(out, Op::Add(a, b), &[a, b], "add")
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.value(a).sub(self.value(b))?;
        self.push(out, Op::Sub(a, b), &[a, b], "sub")
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Result<Var> {
        let out = self.value(a).scale(s);
        self.push(out, Op::Scale(a, s), &[a], "scale")
    }

    /// Matrix times a `1x1` variable.
    pub fn mul_scalar(&mut self, a: Var, s: Var) -> Result<Var> {
        if self.shape(s) != (1, 1) {
            return Err(Error::Shape("mul_scalar expects a 1x1 scalar".into()));
        }
        let out = self.value(a).scale(self.value(s).item());
        self.push(out, Op::MulScalar(a, s), &[a, s], "mul_scalar")
    }

    pub fn hadamard(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.value(a).zip_map(self.value(b), |x, y| x * y)?;
        self.push(out, Op::Hadamard(a, b), &[a, b], "hadamard")
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        let out = self.value(a).map(|v| v.max(0.0));
        self.push(out, Op::Relu(a), &[a], "relu")
    }

    pub fn tanh(&mut self, a: Var) -> Result<Var> {
        let out = self.value(a).map(f64::tanh);
        self.push(out, Op::Tanh(a), &[a], "tanh")
    }

    pub fn log(&mut self, a: Var) -> Result<Var> {
        let out = self.value(a).map(f64::ln);
        self.push(out, Op::Log(a), &[a], "log")
    }

    /// Elementwise `a^p`.
    pub fn powf(&mut self, a: Var, p: f64) -> Result<Var> {
        let out = self.value(a).map(|v| v.powf(p));
        self.push(out, Op::Powf(a, p), &[a], "powf")
    }

    pub fn softmax_rows(&mut self, a: Var) -> Result<Var> {
        let out = softmax_rows(self.value(a));
        self.push(out, Op::SoftmaxRows(a), &[a], "softmax_rows")
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let Some(&first) = parts.first() else {
            return Err(Error::Shape("concat_cols of nothing".into()));
        };
        let rows = self.shape(first).0;
        if let Some(bad) = parts.iter().find(|&&p| self.shape(p).0 != rows) {
            return Err(Error::Shape(format!(
                "concat_cols: {} rows vs {rows}",
                self.shape(*bad).0
            )));
        }
        let cols: usize = parts.iter().map(|&p| self.shape(p).1).sum();
        let mut out = Tensor::zeros(rows, cols);
        for r in 0..rows {
            let mut offset = 0;
            for &p in parts {
                let src = self.value(p).row_slice(r);
                out.row_slice_mut(r)[offset..offset + src.len()].copy_from_slice(src);
                offset += src.len();
            }
        }
        self.push(out, Op::ConcatCols(parts.to_vec()), parts, "concat_cols")
    }

    /// Per-column statistic over rows, giving a `1 x cols` row.
    pub fn reduce(&mut self, a: Var, how: Reduction) -> Result<Var> {
        let x = self.value(a);
        let (rows, cols) = x.shape();
        if rows == 0 {
            return Err(Error::EmptyGraph("reduce over zero rows".into()));
        }
        let mut out = Tensor::zeros(1, cols);
        let mut argmax = Vec::new();
        for c in 0..cols {
            let column = (0..rows).map(|r| x[(r, c)]);
            out[(0, c)] = match how {
                Reduction::Sum => column.sum(),
                Reduction::Mean => column.sum::<f64>() / rows as f64,
                Reduction::Max => {
                    let mut best = 0;
                    for r in 1..rows {
                        if x[(r, c)] > x[(best, c)] {
                            best = r;
                        }
                    }
                    argmax.push(best);
                    x[(best, c)]
                }
                Reduction::Var => {
                    let mean = column.clone().sum::<f64>() / rows as f64;
                    column.map(|v| (v - mean) * (v - mean)).sum::<f64>() / rows as f64
                }
            };
        }
        self.push(out, Op::Reduce(a, how, argmax), &[a], "reduce")
    }

    pub fn sum_all(&mut self, a: Var) -> Result<Var> {
        let out = Tensor::scalar(self.value(a).sum());
        self.push(out, Op::SumAll(a), &[a], "sum_all")
    }

    pub fn gather_rows(&mut self, a: Var, idx: &[usize]) -> Result<Var> {
        let out = self.value(a).gather_rows(idx)?;
        self.push(out, Op::GatherRows(a, idx.to_vec()), &[a], "gather_rows")
    }

    pub fn transpose(&mut self, a: Var) -> Result<Var> {
        let out = self.value(a).transpose();
        self.push(out, Op::Transpose(a), &[a], "transpose")
    }

    /// Row-major reshape.
    pub fn reshape(&mut self, a: Var, rows: usize, cols: usize) -> Result<Var> {
        let out = Tensor::from_vec(rows, cols, self.value(a).data().to_vec())?;
        self.push(out, Op::Reshape(a), &[a], "reshape")
    }

    /// Multiplies by a fixed mask (dropout, gating by constants).
    pub fn mask(&mut self, a: Var, mask: Tensor) -> Result<Var> {
        let out = self.value(a).zip_map(&mask, |x, m| x * m)?;
        self.push(out, Op::Mask(a, mask), &[a], "mask")
    }

    /// Inverted dropout: kept entries are scaled by `1 / (1 - rate)`.
    /// Identity when `train` is false or `rate` is zero.
    pub fn dropout<R: Rng + ?Sized>(
        &mut self,
        a: Var,
        rate: f64,
        train: bool,
        rng: &mut R,
    ) -> Result<Var> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::Domain(format!("dropout rate {rate} not in [0, 1)")));
        }
        if !train || rate == 0.0 {
            return Ok(a);
        }
        let (rows, cols) = self.shape(a);
        let keep = 1.0 / (1.0 - rate);
        let mask: Vec<f64> = (0..rows * cols)
            .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
            .collect();
        self.mask(a, Tensor::from_vec(rows, cols, mask)?)
    }

    /// `D^{-1/2} B D^{-1/2}` for a dense square `B`, where `B = A + I` when
    /// `self_loops` is set and `D` holds the row sums of `B`. Rows with
    /// non-positive degree map to zero.
    pub fn sym_normalize(&mut self, a: Var, self_loops: bool) -> Result<Var> {
        let (n, m) = self.shape(a);
        if n != m {
            return Err(Error::Shape("sym_normalize needs a square matrix".into()));
        }
        let mut b = self.value(a).clone();
        if self_loops {
            for i in 0..n {
                b[(i, i)] += 1.0;
            }
        }
        let inv_sqrt: Vec<f64> = (0..n)
            .map(|i| {
                let d: f64 = b.row_slice(i).iter().sum();
                if d > 0.0 {
                    1.0 / d.sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        let mut out = b;
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] *= inv_sqrt[i] * inv_sqrt[j];
            }
        }
        self.push(out, Op::SymNormalize(a, inv_sqrt), &[a], "sym_normalize")
    }

    /// Mean negative log-likelihood of `labels[r]` under `softmax(logits[r])`
    /// over the rows listed in `rows`.
    pub fn cross_entropy(&mut self, logits: Var, labels: &[usize], rows: &[usize]) -> Result<Var> {
        if rows.is_empty() {
            return Err(Error::EmptyBatch("cross_entropy mask selects no rows".into()));
        }
        let x = self.value(logits);
        let (n, m) = x.shape();
        if labels.len() != n {
            return Err(Error::Shape(format!(
                "{} labels for {n} logit rows",
                labels.len()
            )));
        }
        let probs = softmax_rows(x);
        let mut total = 0.0;
        for &r in rows {
            if r >= n || labels[r] >= m {
                return Err(Error::Shape(format!(
                    "row {r} / label out of range for {n}x{m} logits"
                )));
            }
            let row = x.row_slice(r);
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            total += lse - row[labels[r]];
        }
        let out = Tensor::scalar(total / rows.len() as f64);
        self.push(
            out,
            Op::CrossEntropy {
                logits,
                labels: labels.to_vec(),
                rows: rows.to_vec(),
                probs,
            },
            &[logits],
            "cross_entropy",
        )
    }

    /// Accumulates `d loss / d leaf` into every leaf that requires a
    /// gradient. Intermediate gradients are scratch, so repeated calls add
    /// up linearly on the leaves.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        if self.shape(loss) != (1, 1) {
            let (r, c) = self.shape(loss);
            return Err(Error::Contract(format!(
                "backward needs a scalar loss, got {r}x{c}"
            )));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(Tensor::scalar(1.0));
        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            if !self.nodes[i].requires_grad {
                continue;
            }
            if matches!(self.nodes[i].op, Op::Leaf) {
                let node = &mut self.nodes[i];
                match &mut node.grad {
                    Some(acc) => acc.add_assign(&g)?,
                    None => node.grad = Some(g),
                }
                continue;
            }
            for (input, contrib) in self.vjp(i, &g)? {
                if !self.nodes[input.0].requires_grad {
                    continue;
                }
                match &mut grads[input.0] {
                    Some(acc) => acc.add_assign(&contrib)?,
                    slot @ None => *slot = Some(contrib),
                }
            }
        }
        Ok(())
    }

    /// Vector-Jacobian products of node `i` for upstream gradient `g`.
    fn vjp(&self, i: usize, g: &Tensor) -> Result<Vec<(Var, Tensor)>> {
        let node = &self.nodes[i];
        let val = |v: Var| &self.nodes[v.0].value;
        let out = match &node.op {
            Op::Leaf => Vec::new(),
            Op::Matmul(a, b) => vec![
                (*a, g.matmul(&val(*b).transpose())?),
                (*b, val(*a).transpose().matmul(g)?),
            ],
            Op::SparseMatmul(graph, x) => vec![(*x, graph.spmm_transpose(g)?)],
            Op::Add(a, b) => vec![(*a, g.clone()), (*b, g.clone())],
            Op::Sub(a, b) => vec![(*a, g.clone()), (*b, g.scale(-1.0))],
            Op::Scale(a, s) => vec![(*a, g.scale(*s))],
            Op::MulScalar(a, s) => {
                let sv = val(*s).item();
                let ds: f64 = g.data().iter().zip(val(*a).data()).map(|(x, y)| x * y).sum();
                vec![(*a, g.scale(sv)), (*s, Tensor::scalar(ds))]
            }
            Op::Hadamard(a, b) => vec![
                (*a, g.zip_map(val(*b), |x, y| x * y)?),
                (*b, g.zip_map(val(*a), |x, y| x * y)?),
            ],
            Op::Mask(a, m) => vec![(*a, g.zip_map(m, |x, y| x * y)?)],
            Op::Relu(a) => vec![(*a, g.zip_map(val(*a), |x, v| if v > 0.0 { x } else { 0.0 })?)],
            Op::Tanh(a) => vec![(*a, g.zip_map(&node.value, |x, t| x * (1.0 - t * t))?)],
            Op::Log(a) => vec![(*a, g.zip_map(val(*a), |x, v| x / v)?)],
            Op::Powf(a, p) => vec![(*a, g.zip_map(val(*a), |x, v| x * p * v.powf(p - 1.0))?)],
            Op::SoftmaxRows(a) => {
                let s = &node.value;
                let mut da = Tensor::zeros(s.rows(), s.cols());
                for r in 0..s.rows() {
                    let srow = s.row_slice(r);
                    let grow = g.row_slice(r);
                    let dot: f64 = srow.iter().zip(grow).map(|(x, y)| x * y).sum();
                    for (c, d) in da.row_slice_mut(r).iter_mut().enumerate() {
                        *d = srow[c] * (grow[c] - dot);
                    }
                }
                vec![(*a, da)]
            }
            Op::ConcatCols(parts) => {
                let mut offset = 0;
                let mut res = Vec::with_capacity(parts.len());
                for &p in parts {
                    let (rows, cols) = val(p).shape();
                    let mut dp = Tensor::zeros(rows, cols);
                    for r in 0..rows {
                        dp.row_slice_mut(r)
                            .copy_from_slice(&g.row_slice(r)[offset..offset + cols]);
                    }
                    offset += cols;
                    res.push((p, dp));
                }
                res
            }
            Op::Reduce(a, how, argmax) => {
                let x = val(*a);
                let (rows, cols) = x.shape();
                let mut da = Tensor::zeros(rows, cols);
                for c in 0..cols {
                    let gc = g[(0, c)];
                    match how {
                        Reduction::Sum => (0..rows).for_each(|r| da[(r, c)] = gc),
                        Reduction::Mean => (0..rows).for_each(|r| da[(r, c)] = gc / rows as f64),
                        Reduction::Max => da[(argmax[c], c)] = gc,
                        Reduction::Var => {
                            let mean = (0..rows).map(|r| x[(r, c)]).sum::<f64>() / rows as f64;
                            for r in 0..rows {
                                da[(r, c)] = gc * 2.0 * (x[(r, c)] - mean) / rows as f64;
                            }
                        }
                    }
                }
                vec![(*a, da)]
            }
            Op::SumAll(a) => {
                let (r, c) = val(*a).shape();
                vec![(*a, Tensor::filled(r, c, g.item()))]
            }
            Op::GatherRows(a, idx) => {
                let (rows, cols) = val(*a).shape();
                let mut da = Tensor::zeros(rows, cols);
                for (o, &src) in idx.iter().enumerate() {
                    for (d, s) in da.row_slice_mut(src).iter_mut().zip(g.row_slice(o)) {
                        *d += s;
                    }
                }
                vec![(*a, da)]
            }
            Op::Transpose(a) => vec![(*a, g.transpose())],
            Op::Reshape(a) => {
                let (r, c) = val(*a).shape();
                vec![(*a, Tensor::from_vec(r, c, g.data().to_vec())?)]
            }
            Op::SymNormalize(a, inv_sqrt) => {
                // out_ij = b_ij s_i s_j, s_i = d_i^{-1/2}, d_i = sum_j b_ij
                let n = inv_sqrt.len();
                let out = &node.value;
                let mut ds = vec![0.0; n];
                for i in 0..n {
                    for j in 0..n {
                        let t = g[(i, j)] * out[(i, j)];
                        if inv_sqrt[i] > 0.0 {
                            ds[i] += t / inv_sqrt[i];
                        }
                        if inv_sqrt[j] > 0.0 {
                            ds[j] += t / inv_sqrt[j];
                        }
                    }
                }
                let mut da = Tensor::zeros(n, n);
                for i in 0..n {
                    let dd = -0.5 * ds[i] * inv_sqrt[i].powi(3);
                    for j in 0..n {
                        da[(i, j)] = g[(i, j)] * inv_sqrt[i] * inv_sqrt[j] + dd;
                    }
                }
                vec![(*a, da)]
            }
            Op::CrossEntropy {
                logits,
                labels,
                rows,
                probs,
            } => {
                let (n, m) = probs.shape();
                let mut d = Tensor::zeros(n, m);
                let w = g.item() / rows.len() as f64;
                for &r in rows {
                    for c in 0..m {
                        d[(r, c)] += w * probs[(r, c)];
                    }
                    d[(r, labels[r])] -= w;
                }
                vec![(*logits, d)]
            }
        };
        Ok(out)
    }
}

pub(crate) fn softmax_rows(x: &Tensor) -> Tensor {
    let mut out = x.clone();
    for r in 0..x.rows() {
        let row = out.row_slice_mut(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    out
}
