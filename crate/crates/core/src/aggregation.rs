//! Readout statistics and the harmonic-distance graph descriptor.

use crate::autodiff::{BoundParams, Reduction, Tape, Var};
use crate::error::{Error, Result};
use crate::graph::{laplacian, Graph};
use crate::layers::DenseLayer;
use crate::linalg::symmetric_eigen;
use crate::tensor::Tensor;

/// Laplacian eigenvalues at or below this count as zero.
pub const ZERO_EIGENVALUE_CUTOFF: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FgsdConfig {
    pub bins: usize,
    pub range_max: f64,
}

impl Default for FgsdConfig {
    fn default() -> Self {
        Self {
            bins: 32,
            range_max: 4.0,
        }
    }
}

/// Per-column statistics concatenated as mean, sum, max, var (whichever
/// are requested), giving `1 x (C * |stats|)`.
pub fn readout(tape: &mut Tape, x: Var, stats: &[Reduction]) -> Result<Var> {
    if tape.shape(x).0 == 0 {
        return Err(Error::EmptyGraph("readout of a graph with no nodes".into()));
    }
    let mut stats = stats.to_vec();
    stats.sort();
    stats.dedup();
    if stats.is_empty() {
        return Err(Error::Contract("readout needs at least one statistic".into()));
    }
    let parts = stats
        .iter()
        .map(|&s| tape.reduce(x, s))
        .collect::<Result<Vec<_>>>()?;
    if parts.len() == 1 {
        return Ok(parts[0]);
    }
    tape.concat_cols(&parts)
}

/// Harmonic distances `S(i, j)` for all pairs `i < j`, row-major.
/// Eigenpairs with `lambda <= 1e-9` are skipped, so pairs in different
/// components only pick up the nonzero modes.
pub fn harmonic_distances(g: &Graph) -> Result<Vec<f64>> {
    let n = g.n();
    if n < 2 {
        return Err(Error::DegenerateGraph(format!("harmonic distances need 2+ nodes, got {n}")));
    }
    let eig = symmetric_eigen(&laplacian(g)?)?;
    let modes: Vec<usize> = (0..n).filter(|&k| eig.values[k] > ZERO_EIGENVALUE_CUTOFF).collect();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let s: f64 = modes
                .iter()
                .map(|&k| {
                    let d = eig.vectors[(i, k)] - eig.vectors[(j, k)];
                    d * d / eig.values[k]
                })
                .sum();
            out.push(s);
        }
    }
    Ok(out)
}

/// Normalized histogram of harmonic distances over `[0, range_max]` with
/// overflow clamped into the last bin.
pub fn fgsd_features(g: &Graph, bins: usize, range_max: f64) -> Result<Tensor> {
    if bins == 0 || !(range_max > 0.0) {
        return Err(Error::Domain(format!("fgsd bins={bins}, range={range_max}")));
    }
    let dists = harmonic_distances(g)?;
    let width = range_max / bins as f64;
    let mut hist = Tensor::zeros(1, bins);
    let unit = 1.0 / dists.len() as f64;
    for s in &dists {
        // values a rounding step below a bin edge belong to the upper bin
        let b = ((s / width) + 1e-9).floor().max(0.0) as usize;
        hist[(0, b.min(bins - 1))] += unit;
    }
    Ok(hist)
}

/// Dense head applied to a graph-level vector.
pub fn graph_logits(tape: &mut Tape, bound: &BoundParams, z: Var, head: &[DenseLayer]) -> Result<Var> {
    let mut h = z;
    for layer in head {
        h = layer.forward(tape, bound, h)?;
    }
    Ok(h)
}
