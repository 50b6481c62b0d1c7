//! Interclass walk statistics and edge entropy of a labeled graph.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::tensor::Tensor;

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyReport {
    pub order: usize,
    pub classes: usize,
    /// Row `i` is the distribution of end classes over length-`order` walks
    /// starting in class `i`; undefined rows are all zero.
    pub p: Tensor,
    /// `H_n(i)` in base `classes`; `None` where no walk starts in class `i`.
    pub entropy: Vec<Option<f64>>,
    pub undefined_classes: Vec<usize>,
}

/// Class count implied by `labels`, which must all be `>= 0`.
fn class_count(g: &Graph, labels: &[i64]) -> Result<usize> {
    if labels.len() != g.n() {
        return Err(Error::Labeling(format!(
            "{} labels for {} nodes",
            labels.len(),
            g.n()
        )));
    }
    if let Some(v) = labels.iter().position(|&l| l < 0) {
        return Err(Error::Labeling(format!("node {v} is unlabeled")));
    }
    Ok(labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0))
}

/// `count[i][j] = 1_{V_i}^T B^n 1_{V_j}` on the binarized adjacency.
pub fn interclass_walk_counts(g: &Graph, labels: &[i64], n: usize) -> Result<Tensor> {
    if n == 0 {
        return Err(Error::Contract("walk order must be >= 1".into()));
    }
    let m = class_count(g, labels)?;
    let b = g.binarized();
    let mut y = Tensor::zeros(g.n(), m);
    for (v, &l) in labels.iter().enumerate() {
        y[(v, l as usize)] = 1.0;
    }
    for _ in 0..n {
        y = b.spmm(&y)?;
    }
    let mut counts = Tensor::zeros(m, m);
    for (v, &l) in labels.iter().enumerate() {
        for j in 0..m {
            counts[(l as usize, j)] += y[(v, j)];
        }
    }
    counts.check_finite("walk counts")?;
    Ok(counts)
}

/// Row-normalized walk counts and the classes whose rows are undefined.
pub fn interclass_probability(g: &Graph, labels: &[i64], n: usize) -> Result<(Tensor, Vec<usize>)> {
    let mut p = interclass_walk_counts(g, labels, n)?;
    let mut undefined = Vec::new();
    for i in 0..p.rows() {
        let total: f64 = p.row_slice(i).iter().sum();
        if total > 0.0 {
            p.row_slice_mut(i).iter_mut().for_each(|v| *v /= total);
        } else {
            undefined.push(i);
        }
    }
    Ok((p, undefined))
}

/// `-sum_j p_j log_base(p_j)` with `0 log 0 = 0`.
pub fn normalized_entropy(row: &[f64], base: usize) -> f64 {
    let ln_base = (base as f64).ln();
    let h: f64 = row
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum();
    (h / ln_base).max(0.0)
}

pub fn edge_entropy(g: &Graph, labels: &[i64], n: usize) -> Result<EntropyReport> {
    let m = class_count(g, labels)?;
    if m < 2 {
        return Err(Error::SingleClass);
    }
    let (p, undefined) = interclass_probability(g, labels, n)?;
    let entropy = (0..m)
        .map(|i| {
            if undefined.contains(&i) {
                None
            } else {
                Some(normalized_entropy(p.row_slice(i), m))
            }
        })
        .collect();
    Ok(EntropyReport {
        order: n,
        classes: m,
        p,
        entropy,
        undefined_classes: undefined,
    })
}
