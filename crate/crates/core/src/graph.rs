//! Weighted graphs stored as canonical sparse triplets.
//!
//! An entry `(row, col, w)` is the adjacency coefficient `A[row][col] = w`.
//! Shifting a signal computes `(A x)[row] += w * x[col]`, so the directed
//! ring that delays a periodic signal by one sample has entries
//! `((i + 1) mod n, i, 1)`. Degrees are row sums.
//!
//! Entries are kept sorted by `(row, col)` with no duplicates. Undirected
//! graphs store both orientations explicitly and symmetry is checked at
//! construction.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::seeded_rng;
use crate::tensor::Tensor;

/// Largest vertex count for which dense adjacency is materialized.
pub const DEFAULT_DENSE_CAP: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Entry {
    pub row: usize,
    pub col: usize,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    n: usize,
    directed: bool,
    entries: Vec<Entry>,
}

impl Graph {
    /// Validating constructor; entries may arrive in any order.
    pub fn from_entries(n: usize, directed: bool, mut entries: Vec<Entry>) -> Result<Self> {
        for e in &entries {
            if e.row >= n || e.col >= n {
                return Err(Error::InvalidSize(format!(
                    "entry ({}, {}) out of range for {n} vertices",
                    e.row, e.col
                )));
            }
            if !e.weight.is_finite() {
                return Err(Error::NumericHealth(format!(
                    "weight of entry ({}, {})",
                    e.row, e.col
                )));
            }
        }
        entries.sort_by_key(|e| (e.row, e.col));
        if let Some(w) = entries
            .windows(2)
            .find(|w| (w[0].row, w[0].col) == (w[1].row, w[1].col))
        {
            return Err(Error::Contract(format!(
                "duplicate entry ({}, {})",
                w[0].row, w[0].col
            )));
        }
        let g = Self {
            n,
            directed,
            entries,
        };
        if !directed && !g.is_symmetric() {
            return Err(Error::Contract(
                "undirected graph given an asymmetric entry set".into(),
            ));
        }
        Ok(g)
    }

    pub fn empty(n: usize, directed: bool) -> Self {
        Self {
            n,
            directed,
            entries: Vec::new(),
        }
    }

    /// Undirected graph from unordered pairs; both orientations are stored.
    /// Repeated pairs are rejected.
    pub fn undirected(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut entries = Vec::with_capacity(2 * edges.len());
        for &(u, v, w) in edges {
            entries.push(Entry {
                row: u,
                col: v,
                weight: w,
            });
            if u != v {
                entries.push(Entry {
                    row: v,
                    col: u,
                    weight: w,
                });
            }
        }
        Self::from_entries(n, false, entries)
    }

    pub fn directed(n: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        Self::from_entries(
            n,
            true,
            entries
                .iter()
                .map(|&(row, col, weight)| Entry { row, col, weight })
                .collect(),
        )
    }

    /// Sparse form of a dense matrix; zero entries are dropped.
    pub fn from_dense(a: &Tensor, directed: bool) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::Shape("adjacency must be square".into()));
        }
        let mut entries = Vec::new();
        for r in 0..a.rows() {
            for c in 0..a.cols() {
                let w = a[(r, c)];
                if w != 0.0 {
                    entries.push(Entry {
                        row: r,
                        col: c,
                        weight: w,
                    });
                }
            }
        }
        Self::from_entries(a.rows(), directed, entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Number of edges: stored entries for directed graphs, unordered pairs
    /// (self-loops counted once) for undirected graphs.
    pub fn edge_count(&self) -> usize {
        if self.directed {
            self.entries.len()
        } else {
            let loops = self.entries.iter().filter(|e| e.row == e.col).count();
            (self.entries.len() - loops) / 2 + loops
        }
    }

    pub fn weight(&self, row: usize, col: usize) -> f64 {
        self.entries
            .binary_search_by_key(&(row, col), |e| (e.row, e.col))
            .map_or(0.0, |i| self.entries[i].weight)
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries
            .iter()
            .all(|e| self.weight(e.col, e.row) == e.weight)
    }

    /// Dense adjacency; refuses graphs above [`DEFAULT_DENSE_CAP`].
    pub fn dense(&self) -> Result<Tensor> {
        self.dense_with_cap(DEFAULT_DENSE_CAP)
    }

    pub fn dense_with_cap(&self, cap: usize) -> Result<Tensor> {
        if self.n > cap {
            return Err(Error::InvalidSize(format!(
                "{} vertices exceeds dense cap {cap}",
                self.n
            )));
        }
        let mut a = Tensor::zeros(self.n, self.n);
        for e in &self.entries {
            a[(e.row, e.col)] = e.weight;
        }
        Ok(a)
    }

    /// `A x` for an `n x c` signal.
    pub fn spmm(&self, x: &Tensor) -> Result<Tensor> {
        if x.rows() != self.n {
            return Err(Error::Shape(format!(
                "signal has {} rows, graph has {} vertices",
                x.rows(),
                self.n
            )));
        }
        let c = x.cols();
        let mut out = Tensor::zeros(self.n, c);
        for e in &self.entries {
            let src = &x.data()[e.col * c..(e.col + 1) * c];
            let dst = out.row_slice_mut(e.row);
            for (o, s) in dst.iter_mut().zip(src) {
                *o += e.weight * s;
            }
        }
        Ok(out)
    }

    /// `A^T x` for an `n x c` signal.
    pub fn spmm_transpose(&self, x: &Tensor) -> Result<Tensor> {
        if x.rows() != self.n {
            return Err(Error::Shape(format!(
                "signal has {} rows, graph has {} vertices",
                x.rows(),
                self.n
            )));
        }
        let c = x.cols();
        let mut out = Tensor::zeros(self.n, c);
        for e in &self.entries {
            let src = &x.data()[e.row * c..(e.row + 1) * c];
            let dst = out.row_slice_mut(e.col);
            for (o, s) in dst.iter_mut().zip(src) {
                *o += e.weight * s;
            }
        }
        Ok(out)
    }

    pub fn scale_weights(&self, s: f64) -> Graph {
        Graph {
            n: self.n,
            directed: self.directed,
            entries: self
                .entries
                .iter()
                .map(|e| Entry {
                    weight: e.weight * s,
                    ..*e
                })
                .collect(),
        }
    }

    /// Same support with every weight set to 1.
    pub fn binarized(&self) -> Graph {
        Graph {
            n: self.n,
            directed: self.directed,
            entries: self
                .entries
                .iter()
                .filter(|e| e.weight > 0.0)
                .map(|e| Entry { weight: 1.0, ..*e })
                .collect(),
        }
    }

    /// Identity adjacency on the same vertex set.
    pub fn identity_like(&self) -> Graph {
        Graph {
            n: self.n,
            directed: self.directed,
            entries: (0..self.n)
                .map(|i| Entry {
                    row: i,
                    col: i,
                    weight: 1.0,
                })
                .collect(),
        }
    }

    /// Induced subgraph on `idx`; vertex `idx[k]` becomes vertex `k`.
    pub fn submatrix(&self, idx: &[usize]) -> Result<Graph> {
        let mut position = vec![usize::MAX; self.n];
        for (k, &i) in idx.iter().enumerate() {
            if i >= self.n {
                return Err(Error::Shape(format!("vertex {i} out of range")));
            }
            if position[i] != usize::MAX {
                return Err(Error::Contract(format!("vertex {i} selected twice")));
            }
            position[i] = k;
        }
        let entries = self
            .entries
            .iter()
            .filter(|e| position[e.row] != usize::MAX && position[e.col] != usize::MAX)
            .map(|e| Entry {
                row: position[e.row],
                col: position[e.col],
                weight: e.weight,
            })
            .collect();
        Graph::from_entries(idx.len(), self.directed, entries)
    }

    /// Column indices of nonzero entries per row.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.entries {
            if e.weight != 0.0 {
                adj[e.row].push(e.col);
            }
        }
        adj
    }
}

/// Directed cycle whose adjacency is the cyclic delay matrix.
pub fn ring_graph(n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidSize("ring graph needs n >= 1".into()));
    }
    let entries = (0..n)
        .map(|i| Entry {
            row: (i + 1) % n,
            col: i,
            weight: 1.0,
        })
        .collect();
    Graph::from_entries(n, true, entries)
}

/// Undirected cycle on `n >= 3` vertices.
pub fn cycle_graph(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InvalidSize("undirected cycle needs n >= 3".into()));
    }
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
    Graph::undirected(n, &edges)
}

/// Undirected path `0 - 1 - ... - (n-1)`.
pub fn path_graph(n: usize) -> Result<Graph> {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i, 1.0)).collect();
    Graph::undirected(n, &edges)
}

fn check_probability(p: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("{what} = {p} is not in [0, 1]")));
    }
    Ok(())
}

/// G(n, p): every unordered pair independently with probability `p`.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    check_probability(p, "p")?;
    let mut rng = seeded_rng(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((i, j, 1.0));
            }
        }
    }
    Graph::undirected(n, &edges)
}

/// Stochastic block model. Vertices are assigned to blocks contiguously in
/// the order of `class_sizes`; the returned labels give each vertex's block.
pub fn sbm(class_sizes: &[usize], p_in: f64, p_out: f64, seed: u64) -> Result<(Graph, Vec<usize>)> {
    if class_sizes.is_empty() {
        return Err(Error::InvalidSize("sbm needs at least one class".into()));
    }
    check_probability(p_in, "p_in")?;
    check_probability(p_out, "p_out")?;
    let labels: Vec<usize> = class_sizes
        .iter()
        .enumerate()
        .flat_map(|(c, &size)| std::iter::repeat(c).take(size))
        .collect();
    let n = labels.len();
    let mut rng = seeded_rng(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if labels[i] == labels[j] { p_in } else { p_out };
            if rng.gen::<f64>() < p {
                edges.push((i, j, 1.0));
            }
        }
    }
    Ok((Graph::undirected(n, &edges)?, labels))
}

/// Row sums of the adjacency.
pub fn degree_matrix(g: &Graph) -> Vec<f64> {
    let mut d = vec![0.0; g.n];
    for e in &g.entries {
        d[e.row] += e.weight;
    }
    d
}

/// Graph Laplacian `L = D - A` for undirected graphs, dense.
pub fn laplacian(g: &Graph) -> Result<Tensor> {
    if g.directed {
        return Err(Error::UnsupportedStructure(
            "Laplacian is defined for undirected graphs only".into(),
        ));
    }
    let mut l = g.dense()?.scale(-1.0);
    for (i, d) in degree_matrix(g).into_iter().enumerate() {
        l[(i, i)] += d;
    }
    Ok(l)
}

/// `D^{-1/2} A D^{-1/2}`; vertices of zero degree keep zero rows and columns.
pub fn normalize_sym(g: &Graph) -> Result<Graph> {
    if g.directed {
        return Err(Error::UnsupportedStructure(
            "symmetric normalization needs an undirected graph".into(),
        ));
    }
    let inv_sqrt: Vec<f64> = degree_matrix(g)
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();
    let entries = g
        .entries
        .iter()
        .map(|e| Entry {
            weight: e.weight * inv_sqrt[e.row] * inv_sqrt[e.col],
            ..*e
        })
        .collect();
    Ok(Graph {
        n: g.n,
        directed: false,
        entries,
    })
}

/// Largest eigenvalue modulus of the adjacency.
pub fn spectral_radius(g: &Graph) -> Result<f64> {
    let a = g.dense()?;
    if g.directed {
        let e = linalg::general_eigen(&a)?;
        Ok(e.values.iter().map(|z| z.norm()).fold(0.0, f64::max))
    } else {
        let e = linalg::symmetric_eigen(&a)?;
        Ok(e.values.iter().map(|v| v.abs()).fold(0.0, f64::max))
    }
}

/// Divides all weights by the spectral radius.
pub fn normalize_spectral(g: &Graph) -> Result<Graph> {
    // a nonnegative matrix is nilpotent exactly when its support is acyclic;
    // the eigensolver only sees rounding noise there
    if g.entries.iter().all(|e| e.weight >= 0.0) && is_acyclic(g) {
        return Err(Error::DegenerateSpectrum(
            "adjacency has no nonzero eigenvalue".into(),
        ));
    }
    let radius = spectral_radius(g)?;
    let scale = g
        .entries
        .iter()
        .map(|e| e.weight.abs())
        .fold(0.0, f64::max);
    if radius <= 1e-12 * scale.max(f64::MIN_POSITIVE) || radius == 0.0 {
        return Err(Error::DegenerateSpectrum(
            "adjacency has no nonzero eigenvalue".into(),
        ));
    }
    Ok(g.scale_weights(1.0 / radius))
}

/// True when the directed support of `g` has no cycle (self-loops count).
pub fn is_acyclic(g: &Graph) -> bool {
    let mut indegree = vec![0usize; g.n];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); g.n];
    for e in g.entries.iter().filter(|e| e.weight != 0.0) {
        // row receives from col
        out[e.col].push(e.row);
        indegree[e.row] += 1;
    }
    let mut stack: Vec<usize> = (0..g.n).filter(|&v| indegree[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = stack.pop() {
        seen += 1;
        for &w in &out[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                stack.push(w);
            }
        }
    }
    seen == g.n
}

/// `A + I`.
pub fn add_self_loops(g: &Graph) -> Graph {
    let mut entries = g.entries.clone();
    for i in 0..g.n {
        match entries.binary_search_by_key(&(i, i), |e| (e.row, e.col)) {
            Ok(pos) => entries[pos].weight += 1.0,
            Err(pos) => entries.insert(
                pos,
                Entry {
                    row: i,
                    col: i,
                    weight: 1.0,
                },
            ),
        }
    }
    Graph {
        n: g.n,
        directed: g.directed,
        entries,
    }
}

/// Bijection on `[0, n)`. Vertex `i` of the source graph becomes vertex
/// `map[i]` of the permuted graph, i.e. the permutation matrix has
/// `P[map[i]][i] = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &m in &map {
            if m >= map.len() || seen[m] {
                return Err(Error::Contract(format!(
                    "{map:?} is not a permutation of 0..{}",
                    map.len()
                )));
            }
            seen[m] = true;
        }
        Ok(Self { map })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut map: Vec<usize> = (0..n).collect();
        map.shuffle(rng);
        Self { map }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &m) in self.map.iter().enumerate() {
            inv[m] = i;
        }
        Self { map: inv }
    }

    /// Dense `P` with `P[map[i]][i] = 1`.
    pub fn matrix(&self) -> Tensor {
        let n = self.map.len();
        let mut p = Tensor::zeros(n, n);
        for (i, &m) in self.map.iter().enumerate() {
            p[(m, i)] = 1.0;
        }
        p
    }
}

/// `P A P^T`.
pub fn permute(g: &Graph, p: &Permutation) -> Result<Graph> {
    if p.len() != g.n {
        return Err(Error::Shape(format!(
            "permutation of length {} for {} vertices",
            p.len(),
            g.n
        )));
    }
    let entries = g
        .entries
        .iter()
        .map(|e| Entry {
            row: p.map[e.row],
            col: p.map[e.col],
            weight: e.weight,
        })
        .collect();
    Graph::from_entries(g.n, g.directed, entries)
}

/// `P x`: row `i` of `x` moves to row `map[i]`.
pub fn permute_signal(x: &Tensor, p: &Permutation) -> Result<Tensor> {
    if p.len() != x.rows() {
        return Err(Error::Shape(format!(
            "permutation of length {} for {} signal rows",
            p.len(),
            x.rows()
        )));
    }
    let mut out = Tensor::zeros(x.rows(), x.cols());
    for (i, &m) in p.map.iter().enumerate() {
        out.row_slice_mut(m).copy_from_slice(x.row_slice(i));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Diameter {
    Finite(usize),
    Disconnected,
}

impl Diameter {
    pub fn finite(self) -> Option<usize> {
        match self {
            Diameter::Finite(d) => Some(d),
            Diameter::Disconnected => None,
        }
    }
}

/// Longest unweighted shortest path over ordered vertex pairs, following
/// entry direction. A graph with no vertices has diameter 0.
pub fn diameter(g: &Graph) -> Diameter {
    let adj = g.neighbors();
    let mut best = 0;
    let mut dist = vec![usize::MAX; g.n];
    let mut queue = VecDeque::new();
    for s in 0..g.n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[s] = 0;
        queue.clear();
        queue.push_back(s);
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    best = best.max(dist[v]);
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        if reached < g.n {
            return Diameter::Disconnected;
        }
    }
    Diameter::Finite(best)
}

pub fn average_degree(g: &Graph) -> f64 {
    if g.n == 0 {
        return 0.0;
    }
    degree_matrix(g).iter().sum::<f64>() / g.n as f64
}

/// Connected components of the underlying undirected support.
pub fn connected_components(g: &Graph) -> Vec<usize> {
    let mut adj = g.neighbors();
    if g.directed {
        for e in &g.entries {
            adj[e.col].push(e.row);
        }
    }
    let mut comp = vec![usize::MAX; g.n];
    let mut next = 0;
    for s in 0..g.n {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = next;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if comp[v] == usize::MAX {
                    comp[v] = next;
                    stack.push(v);
                }
            }
        }
        next += 1;
    }
    comp
}
