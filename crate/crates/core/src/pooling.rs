//! Graph pooling: Top-k, self-attention (SAG), SortPool and DiffPool.
//!
//! All selection ties go to the lowest node index.

use std::cmp::Ordering;
use std::sync::Arc;

use crate::autodiff::{BoundParams, Tape, Var};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::layers::{GcnLayer, Operator};
use crate::tensor::Tensor;

/// Reduced adjacency: sparse for selection methods, dense on the tape for DiffPool.
#[derive(Clone, Debug)]
pub enum PooledAdjacency {
    Sparse(Arc<Graph>),
    Dense(Var),
}

#[derive(Clone, Debug)]
pub enum SelectionRecord {
    /// Kept node indices, strictly increasing.
    Kept(Vec<usize>),
    /// Soft assignment `S`, `N x clusters`.
    Assignment(Var),
}

#[derive(Clone, Debug)]
pub struct PoolResult {
    pub x: Var,
    pub adjacency: PooledAdjacency,
    pub record: SelectionRecord,
    pub aux_losses: Vec<(&'static str, Var)>,
}

impl PoolResult {
    pub fn kept(&self) -> Option<&[usize]> {
        match &self.record {
            SelectionRecord::Kept(idx) => Some(idx),
            SelectionRecord::Assignment(_) => None,
        }
    }
}

/// `ceil(ratio * n)`, guarded against float noise such as `0.1 * 30`.
pub fn kept_count(ratio: f64, n: usize) -> Result<usize> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::Domain(format!("pool ratio {ratio} not in (0, 1]")));
    }
    let k = (ratio * n as f64 - 1e-9).ceil().max(1.0) as usize;
    Ok(k.min(n))
}

/// Indices of the `count` largest scores (ties to the lower index),
/// returned in increasing index order.
pub fn select_top(scores: &[f64], count: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = order.into_iter().take(count).collect();
    kept.sort_unstable();
    kept
}

/// Gathers `idx` rows of `x` and multiplies each by the matching gate value.
fn gate_rows(tape: &mut Tape, x: Var, gates: Var, idx: &[usize]) -> Result<Var> {
    let c = tape.shape(x).1;
    let xs = tape.gather_rows(x, idx)?;
    let gs = tape.gather_rows(gates, idx)?;
    let ones = tape.constant(Tensor::filled(1, c, 1.0));
    let spread = tape.matmul(gs, ones)?;
    tape.hadamard(xs, spread)
}

fn check_nonempty(tape: &Tape, g: &Graph, x: Var) -> Result<()> {
    let n = tape.shape(x).0;
    if n == 0 {
        return Err(Error::EmptyGraph("pooling a graph with no nodes".into()));
    }
    if g.n() != n {
        return Err(Error::Shape(format!("signal has {n} rows, graph has {} nodes", g.n())));
    }
    Ok(())
}

/// Projection scores `s = x p / ||p||`, keep the top `ceil(ratio N)`,
/// gate kept rows by `tanh(s)` and take the induced subgraph.
pub fn topk_pool(tape: &mut Tape, g: &Arc<Graph>, x: Var, ratio: f64, p: Var) -> Result<PoolResult> {
    check_nonempty(tape, g, x)?;
    let count = kept_count(ratio, g.n())?;
    if tape.shape(p) != (tape.shape(x).1, 1) {
        return Err(Error::Shape(format!(
            "projection is {:?}, expected {}x1",
            tape.shape(p),
            tape.shape(x).1
        )));
    }
    if tape.value(p).frobenius_norm() == 0.0 {
        return Err(Error::DegenerateProjection);
    }
    let sq = tape.hadamard(p, p)?;
    let norm2 = tape.sum_all(sq)?;
    let inv_norm = tape.powf(norm2, -0.5)?;
    let raw = tape.matmul(x, p)?;
    let s = tape.mul_scalar(raw, inv_norm)?;
    let idx = select_top(tape.value(s).data(), count);
    let gates = tape.tanh(s)?;
    let xr = gate_rows(tape, x, gates, &idx)?;
    Ok(PoolResult {
        x: xr,
        adjacency: PooledAdjacency::Sparse(Arc::new(g.submatrix(&idx)?)),
        record: SelectionRecord::Kept(idx),
        aux_losses: Vec::new(),
    })
}

/// Self-attention pooling: scores come from a one-channel GCN with tanh.
/// `op` is the GCN propagation operator of `g`.
pub fn sag_pool(
    tape: &mut Tape,
    bound: &BoundParams,
    g: &Arc<Graph>,
    op: &Operator,
    x: Var,
    ratio: f64,
    scorer: &GcnLayer,
) -> Result<PoolResult> {
    check_nonempty(tape, g, x)?;
    let count = kept_count(ratio, g.n())?;
    let scores = scorer.forward(tape, bound, op, x)?;
    if tape.shape(scores).1 != 1 {
        return Err(Error::Shape("SAG scorer must emit one channel".into()));
    }
    let idx = select_top(tape.value(scores).data(), count);
    let xr = gate_rows(tape, x, scores, &idx)?;
    Ok(PoolResult {
        x: xr,
        adjacency: PooledAdjacency::Sparse(Arc::new(g.submatrix(&idx)?)),
        record: SelectionRecord::Kept(idx),
        aux_losses: Vec::new(),
    })
}

/// Row order used by SortPool: descending by the last channel, ties by
/// the preceding channels, then by lower index.
pub fn sort_order(x: &Tensor) -> Vec<usize> {
    let c = x.cols();
    let mut order: Vec<usize> = (0..x.rows()).collect();
    order.sort_by(|&a, &b| {
        for ch in (0..c).rev() {
            match x[(b, ch)].total_cmp(&x[(a, ch)]) {
                Ordering::Equal => continue,
                other => return other,
            }
        }
        a.cmp(&b)
    });
    order
}

/// `k x C` block of sorted rows, truncated or zero-padded.
pub fn sort_pool(tape: &mut Tape, x: Var, k: usize) -> Result<Var> {
    if k == 0 {
        return Err(Error::Contract("sortpool k must be >= 1".into()));
    }
    let n = tape.shape(x).0;
    let order = sort_order(tape.value(x));
    let mut select = Tensor::zeros(k, n);
    for (r, &i) in order.iter().take(k).enumerate() {
        select[(r, i)] = 1.0;
    }
    let sel = tape.constant(select);
    tape.matmul(sel, x)
}

/// Soft cluster assignment. `op` is the GCN operator of `g`; both GNNs
/// read it. The pooled adjacency `S^T A S` is built from the raw `A`.
#[allow(clippy::too_many_arguments)]
pub fn diff_pool(
    tape: &mut Tape,
    bound: &BoundParams,
    g: &Arc<Graph>,
    op: &Operator,
    x: Var,
    assign: &GcnLayer,
    embed: &GcnLayer,
    clusters: usize,
) -> Result<PoolResult> {
    check_nonempty(tape, g, x)?;
    let n = g.n();
    if clusters == 0 || clusters > n {
        return Err(Error::Contract(format!("{clusters} clusters for a {n}-node graph")));
    }
    let logits = assign.forward(tape, bound, op, x)?;
    if tape.shape(logits).1 != clusters {
        return Err(Error::Shape(format!(
            "assignment GNN emits {} channels for {clusters} clusters",
            tape.shape(logits).1
        )));
    }
    let s = tape.softmax_rows(logits)?;
    let z = embed.forward(tape, bound, op, x)?;
    let st = tape.transpose(s)?;
    let xr = tape.matmul(st, z)?;
    let a_s = tape.sparse_matmul(g, s)?;
    let ar = tape.matmul(st, a_s)?;
    let aux_losses = assignment_losses(tape, g, s)?;
    Ok(PoolResult {
        x: xr,
        adjacency: PooledAdjacency::Dense(ar),
        record: SelectionRecord::Assignment(s),
        aux_losses,
    })
}

/// DiffPool auxiliary terms on the tape: link `||A - S S^T||_F / N^2` and
/// mean row entropy of `S`. `S` must be strictly positive (a softmax output).
pub fn assignment_losses(tape: &mut Tape, g: &Graph, s: Var) -> Result<Vec<(&'static str, Var)>> {
    let n = g.n();
    let a = tape.constant(g.dense()?);
    let st = tape.transpose(s)?;
    let sst = tape.matmul(s, st)?;
    let diff = tape.sub(a, sst)?;
    let sq = tape.hadamard(diff, diff)?;
    let total = tape.sum_all(sq)?;
    let norm = tape.powf(total, 0.5)?;
    let link = tape.scale(norm, 1.0 / (n * n) as f64)?;
    let log_s = tape.log(s)?;
    let plogp = tape.hadamard(s, log_s)?;
    let sum = tape.sum_all(plogp)?;
    let entropy = tape.scale(sum, -1.0 / n as f64)?;
    Ok(vec![("link", link), ("entropy", entropy)])
}

/// Mean row entropy of an assignment matrix with `0 log 0 = 0`.
pub fn assignment_entropy(s: &Tensor) -> f64 {
    let total: f64 = s
        .data()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum();
    total / s.rows() as f64
}

/// `||A - S S^T||_F / N^2` without a tape.
pub fn link_loss(a: &Tensor, s: &Tensor) -> Result<f64> {
    let sst = s.matmul(&s.transpose())?;
    Ok(a.sub(&sst)?.frobenius_norm() / (a.rows() * a.rows()) as f64)
}
