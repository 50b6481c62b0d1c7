//! Node- and graph-classification datasets: text loaders, writers and
//! synthetic generators.
//!
//! Node dataset directory:
//! - `edges.txt`: first line `undirected` or `directed`, then one edge per
//!   line as `u v` or `u v w` (0-indexed, whitespace separated). Undirected
//!   pairs are listed once.
//! - `features.csv`: one row per node, comma-separated decimals.
//! - `labels.txt`: one integer per line, `-1` for unlabeled.
//! - `split.txt`: one of `train`, `val`, `test`, `none` per line.
//!
//! Graph dataset directory (TU layout, files optionally prefixed `NAME_`):
//! `A.txt` (1-indexed `i, j` pairs), `graph_indicator.txt`,
//! `graph_labels.txt`, optional `node_labels.txt` and `node_attributes.txt`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{self, cycle_graph, erdos_renyi, permute, Graph, Permutation};
use crate::rng::{derive_seed, seeded_rng};
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Val,
    Test,
    None,
}

impl Split {
    fn token(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
            Split::None => "none",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "train" => Split::Train,
            "val" => Split::Val,
            "test" => Split::Test,
            "none" => Split::None,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeDataset {
    pub graph: Graph,
    pub features: Tensor,
    /// `-1` marks an unlabeled node.
    pub labels: Vec<i64>,
    pub split: Vec<Split>,
}

impl NodeDataset {
    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn n_classes(&self) -> usize {
        self.labels.iter().map(|&l| (l + 1).max(0) as usize).max().unwrap_or(0)
    }

    pub fn indices(&self, which: Split) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.split[i] == which).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.graph.n();
        if self.features.rows() != n || self.labels.len() != n || self.split.len() != n {
            return Err(Error::Shape(format!(
                "{n} nodes, {} feature rows, {} labels, {} split entries",
                self.features.rows(),
                self.labels.len(),
                self.split.len()
            )));
        }
        self.features.check_finite("node features")?;
        for i in 0..n {
            if self.labels[i] < -1 {
                return Err(Error::Labeling(format!("node {i} has label {}", self.labels[i])));
            }
            if self.split[i] != Split::None && self.labels[i] < 0 {
                return Err(Error::Labeling(format!(
                    "node {i} is in the {} split but unlabeled",
                    self.split[i].token()
                )));
            }
        }
        Ok(())
    }

    /// Features scaled so each nonzero row sums to one.
    pub fn row_normalized_features(&self) -> Tensor {
        row_normalize(&self.features)
    }
}

pub fn row_normalize(x: &Tensor) -> Tensor {
    let mut out = x.clone();
    for r in 0..out.rows() {
        let s: f64 = out.row_slice(r).iter().sum();
        if s != 0.0 {
            out.row_slice_mut(r).iter_mut().for_each(|v| *v /= s);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphSample {
    pub graph: Graph,
    pub features: Tensor,
    pub label: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphDataset {
    pub graphs: Vec<GraphSample>,
    pub n_classes: usize,
}

impl GraphDataset {
    pub fn new(graphs: Vec<GraphSample>, n_classes: usize) -> Result<Self> {
        if graphs.is_empty() {
            return Err(Error::InvalidSize("graph dataset is empty".into()));
        }
        let dim = graphs[0].features.cols();
        for (i, s) in graphs.iter().enumerate() {
            if s.label >= n_classes {
                return Err(Error::Labeling(format!("graph {i} has label {} of {n_classes}", s.label)));
            }
            if s.features.shape() != (s.graph.n(), dim) {
                return Err(Error::Shape(format!(
                    "graph {i}: features {:?} for {} nodes, expected width {dim}",
                    s.features.shape(),
                    s.graph.n()
                )));
            }
            s.features.check_finite("graph features")?;
        }
        Ok(Self { graphs, n_classes })
    }

    pub fn feature_dim(&self) -> usize {
        self.graphs[0].features.cols()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.graphs.iter().map(|s| s.label).collect()
    }
}

/// Nonblank lines with their 1-based line numbers.
fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.trim().to_string()))
        .collect())
}

fn parse_f64(path: &Path, line: usize, tok: &str) -> Result<f64> {
    let v: f64 = tok
        .trim()
        .parse()
        .map_err(|_| Error::parse(path, line, format!("not a number: {tok:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(path, line, format!("non-finite value {tok:?}")));
    }
    Ok(v)
}

fn parse_int<T: std::str::FromStr>(path: &Path, line: usize, tok: &str) -> Result<T> {
    tok.trim()
        .parse()
        .map_err(|_| Error::parse(path, line, format!("not an integer: {tok:?}")))
}

fn parse_csv_rows(path: &Path) -> Result<Vec<(usize, Vec<f64>)>> {
    let lines = read_lines(path)?;
    let mut rows = Vec::with_capacity(lines.len());
    let mut width = None;
    for (no, l) in lines {
        let row = l
            .split(',')
            .map(|t| parse_f64(path, no, t))
            .collect::<Result<Vec<_>>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::parse(path, no, format!("{} columns, expected {w}", row.len())));
            }
            _ => {}
        }
        rows.push((no, row));
    }
    Ok(rows)
}

fn rows_to_tensor(rows: &[Vec<f64>], cols: usize) -> Result<Tensor> {
    let data: Vec<f64> = rows.iter().flatten().copied().collect();
    Tensor::from_vec(rows.len(), cols, data)
}

pub fn load_node_dataset(dir: &Path) -> Result<NodeDataset> {
    if !dir.is_dir() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "dataset directory not found"),
        ));
    }
    let labels_path = dir.join("labels.txt");
    let labels: Vec<i64> = read_lines(&labels_path)?
        .into_iter()
        .map(|(no, l)| parse_int(&labels_path, no, &l))
        .collect::<Result<_>>()?;
    let n = labels.len();

    let split_path = dir.join("split.txt");
    let split_lines = read_lines(&split_path)?;
    if split_lines.len() != n {
        return Err(Error::parse(
            &split_path,
            split_lines.last().map_or(1, |l| l.0),
            format!("{} entries for {n} labeled nodes", split_lines.len()),
        ));
    }
    let split = split_lines
        .iter()
        .map(|(no, l)| Split::parse(l).ok_or_else(|| Error::parse(&split_path, *no, format!("unknown split {l:?}"))))
        .collect::<Result<Vec<_>>>()?;

    let feat_path = dir.join("features.csv");
    let rows = parse_csv_rows(&feat_path)?;
    if rows.len() != n {
        return Err(Error::parse(
            &feat_path,
            rows.last().map_or(1, |r| r.0),
            format!("{} feature rows for {n} nodes", rows.len()),
        ));
    }
    let cols = rows.first().map_or(0, |r| r.1.len());
    let rows: Vec<Vec<f64>> = rows.into_iter().map(|r| r.1).collect();
    let features = rows_to_tensor(&rows, cols)?;

    let graph = load_edges(&dir.join("edges.txt"), n)?;
    let ds = NodeDataset {
        graph,
        features,
        labels,
        split,
    };
    ds.validate()?;
    Ok(ds)
}

fn load_edges(path: &Path, n: usize) -> Result<Graph> {
    let lines = read_lines(path)?;
    let Some((first_no, header)) = lines.first() else {
        return Err(Error::parse(path, 1, "missing `undirected`/`directed` header"));
    };
    let directed = match header.as_str() {
        "undirected" => false,
        "directed" => true,
        other => {
            return Err(Error::parse(
                path,
                *first_no,
                format!("expected `undirected` or `directed`, got {other:?}"),
            ))
        }
    };
    let mut seen = HashSet::new();
    let mut edges = Vec::with_capacity(lines.len());
    for (no, l) in &lines[1..] {
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 2 && toks.len() != 3 {
            return Err(Error::parse(path, *no, "expected `u v` or `u v w`"));
        }
        let u: usize = parse_int(path, *no, toks[0])?;
        let v: usize = parse_int(path, *no, toks[1])?;
        let w = if toks.len() == 3 {
            parse_f64(path, *no, toks[2])?
        } else {
            1.0
        };
        if u >= n || v >= n {
            return Err(Error::parse(path, *no, format!("node index out of range for {n} nodes")));
        }
        let key = if directed { (u, v) } else { (u.min(v), u.max(v)) };
        if !seen.insert(key) {
            return Err(Error::parse(path, *no, format!("duplicate edge {u} {v}")));
        }
        edges.push((u, v, w));
    }
    let g = if directed {
        Graph::directed(n, &edges)
    } else {
        Graph::undirected(n, &edges)
    };
    g.map_err(|e| Error::parse(path, *first_no, e.to_string()))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn format_row(values: &[f64], sep: &str) -> String {
    values.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(sep)
}

/// Writes the four files of a node dataset directory, creating it if needed.
pub fn write_node_dataset(ds: &NodeDataset, dir: &Path) -> Result<()> {
    ds.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut edges = String::from(if ds.graph.is_directed() { "directed\n" } else { "undirected\n" });
    for e in ds.graph.entries() {
        if !ds.graph.is_directed() && e.row > e.col {
            continue;
        }
        if e.weight == 1.0 {
            let _ = writeln!(edges, "{} {}", e.row, e.col);
        } else {
            let _ = writeln!(edges, "{} {} {}", e.row, e.col, e.weight);
        }
    }
    write_file(&dir.join("edges.txt"), &edges)?;
    let mut feats = String::new();
    for r in 0..ds.features.rows() {
        let _ = writeln!(feats, "{}", format_row(ds.features.row_slice(r), ","));
    }
    write_file(&dir.join("features.csv"), &feats)?;
    let labels: String = ds.labels.iter().map(|l| format!("{l}\n")).collect();
    write_file(&dir.join("labels.txt"), &labels)?;
    let split: String = ds.split.iter().map(|s| format!("{}\n", s.token())).collect();
    write_file(&dir.join("split.txt"), &split)
}

/// Finds `A.txt` or `<prefix>_A.txt` and returns the prefix (with
/// trailing underscore, possibly empty).
fn tu_prefix(dir: &Path) -> Result<String> {
    if dir.join("A.txt").is_file() {
        return Ok(String::new());
    }
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut found: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().into_string().ok())
        .filter_map(|name| name.strip_suffix("_A.txt").map(|p| format!("{p}_")))
        .collect();
    found.sort();
    match found.len() {
        1 => Ok(found.remove(0)),
        0 => Err(Error::io(
            dir.join("A.txt"),
            std::io::Error::new(std::io::ErrorKind::NotFound, "no A.txt in graph dataset directory"),
        )),
        _ => Err(Error::parse(dir.join("A.txt"), 1, format!("several TU prefixes: {found:?}"))),
    }
}

fn tu_pairs(path: &Path) -> Result<Vec<(usize, usize, usize)>> {
    read_lines(path)?
        .into_iter()
        .map(|(no, l)| {
            let toks: Vec<&str> = l.split(',').collect();
            if toks.len() != 2 {
                return Err(Error::parse(path, no, "expected `i, j`"));
            }
            Ok((no, parse_int(path, no, toks[0])?, parse_int(path, no, toks[1])?))
        })
        .collect()
}

pub fn load_graph_dataset(dir: &Path) -> Result<GraphDataset> {
    if !dir.is_dir() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "dataset directory not found"),
        ));
    }
    let prefix = tu_prefix(dir)?;
    let file = |name: &str| -> PathBuf { dir.join(format!("{prefix}{name}")) };

    let ind_path = file("graph_indicator.txt");
    let indicator: Vec<usize> = read_lines(&ind_path)?
        .into_iter()
        .map(|(no, l)| {
            let g: usize = parse_int(&ind_path, no, &l)?;
            if g == 0 {
                return Err(Error::parse(&ind_path, no, "graph ids are 1-indexed"));
            }
            Ok(g - 1)
        })
        .collect::<Result<_>>()?;
    let total_nodes = indicator.len();

    let gl_path = file("graph_labels.txt");
    let raw_labels: Vec<i64> = read_lines(&gl_path)?
        .into_iter()
        .map(|(no, l)| parse_int(&gl_path, no, &l))
        .collect::<Result<_>>()?;
    let n_graphs = raw_labels.len();
    if let Some(&g) = indicator.iter().find(|&&g| g >= n_graphs) {
        return Err(Error::parse(
            &ind_path,
            1,
            format!("graph id {} exceeds the {n_graphs} graph labels", g + 1),
        ));
    }
    let label_values: Vec<i64> = raw_labels.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let label_index: BTreeMap<i64, usize> = label_values.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    // local reindexing
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_graphs];
    let mut local = vec![0usize; total_nodes];
    for (v, &g) in indicator.iter().enumerate() {
        local[v] = members[g].len();
        members[g].push(v);
    }
    if let Some(g) = members.iter().position(|m| m.is_empty()) {
        return Err(Error::parse(&ind_path, 1, format!("graph {} has no nodes", g + 1)));
    }

    let a_path = file("A.txt");
    let mut edge_sets: Vec<BTreeSet<(usize, usize)>> = vec![BTreeSet::new(); n_graphs];
    for (no, i, j) in tu_pairs(&a_path)? {
        if i == 0 || j == 0 || i > total_nodes || j > total_nodes {
            return Err(Error::parse(&a_path, no, format!("node id out of range 1..={total_nodes}")));
        }
        let (i, j) = (i - 1, j - 1);
        if indicator[i] != indicator[j] {
            return Err(Error::parse(&a_path, no, "edge joins nodes of different graphs"));
        }
        let (a, b) = (local[i], local[j]);
        edge_sets[indicator[i]].insert((a.min(b), a.max(b)));
    }

    let mut feature_blocks: Vec<Tensor> = Vec::new();
    let nl_path = file("node_labels.txt");
    if nl_path.is_file() {
        let vals: Vec<i64> = read_lines(&nl_path)?
            .into_iter()
            .map(|(no, l)| parse_int(&nl_path, no, l.split(',').next().unwrap_or("")))
            .collect::<Result<_>>()?;
        if vals.len() != total_nodes {
            return Err(Error::parse(&nl_path, vals.len().max(1), format!("{} node labels for {total_nodes} nodes", vals.len())));
        }
        let distinct: Vec<i64> = vals.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let mut onehot = Tensor::zeros(total_nodes, distinct.len());
        for (v, x) in vals.iter().enumerate() {
            let c = distinct.binary_search(x).expect("value is in its own set");
            onehot[(v, c)] = 1.0;
        }
        feature_blocks.push(onehot);
    }
    let na_path = file("node_attributes.txt");
    if na_path.is_file() {
        let rows = parse_csv_rows(&na_path)?;
        if rows.len() != total_nodes {
            return Err(Error::parse(&na_path, rows.last().map_or(1, |r| r.0), format!("{} attribute rows for {total_nodes} nodes", rows.len())));
        }
        let cols = rows.first().map_or(0, |r| r.1.len());
        let rows: Vec<Vec<f64>> = rows.into_iter().map(|r| r.1).collect();
        feature_blocks.push(rows_to_tensor(&rows, cols)?);
    }

    let mut graphs = Vec::with_capacity(n_graphs);
    for g in 0..n_graphs {
        let n = members[g].len();
        let edges: Vec<(usize, usize, f64)> = edge_sets[g].iter().map(|&(a, b)| (a, b, 1.0)).collect();
        let graph = Graph::undirected(n, &edges)?;
        let features = if feature_blocks.is_empty() {
            degree_features(&graph)
        } else {
            let width: usize = feature_blocks.iter().map(Tensor::cols).sum();
            let mut f = Tensor::zeros(n, width);
            for (r, &v) in members[g].iter().enumerate() {
                let mut off = 0;
                for block in &feature_blocks {
                    let src = block.row_slice(v);
                    f.row_slice_mut(r)[off..off + src.len()].copy_from_slice(src);
                    off += src.len();
                }
            }
            f
        };
        graphs.push(GraphSample {
            graph,
            features,
            label: label_index[&raw_labels[g]],
        });
    }
    GraphDataset::new(graphs, label_values.len())
}

/// TU layout with `node_attributes.txt` holding the features and graph
/// labels written as class indices.
pub fn write_graph_dataset(ds: &GraphDataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (mut a, mut ind, mut labels, mut attrs) = (String::new(), String::new(), String::new(), String::new());
    let mut offset = 0;
    for (gi, s) in ds.graphs.iter().enumerate() {
        for e in s.graph.entries() {
            let _ = writeln!(a, "{}, {}", offset + e.row + 1, offset + e.col + 1);
        }
        for r in 0..s.graph.n() {
            let _ = writeln!(ind, "{}", gi + 1);
            let _ = writeln!(attrs, "{}", format_row(s.features.row_slice(r), ", "));
        }
        let _ = writeln!(labels, "{}", s.label);
        offset += s.graph.n();
    }
    write_file(&dir.join("A.txt"), &a)?;
    write_file(&dir.join("graph_indicator.txt"), &ind)?;
    write_file(&dir.join("graph_labels.txt"), &labels)?;
    write_file(&dir.join("node_attributes.txt"), &attrs)
}

/// One column holding each node's neighbor count.
pub fn degree_features(g: &Graph) -> Tensor {
    let deg = graph::degree_matrix(&g.binarized());
    Tensor::column(&deg)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SbmTask {
    pub sizes: Vec<usize>,
    pub p_in: f64,
    pub p_out: f64,
    /// Probability that a node's one-hot feature points at a wrong class.
    pub flip: f64,
    pub train_per_class: usize,
    pub val_per_class: usize,
}

impl Default for SbmTask {
    fn default() -> Self {
        Self {
            sizes: vec![100; 4],
            p_in: 0.10,
            p_out: 0.005,
            flip: 0.3,
            train_per_class: 20,
            val_per_class: 30,
        }
    }
}

/// SBM graph, noisy one-hot class features and a stratified split; the
/// remaining nodes of each class form the test set.
pub fn make_sbm_node_task(task: &SbmTask, seed: u64) -> Result<NodeDataset> {
    if task.sizes.len() < 2 {
        return Err(Error::Domain("SBM task needs at least two classes".into()));
    }
    if !(0.0..=1.0).contains(&task.flip) {
        return Err(Error::Domain(format!("flip probability {} not in [0, 1]", task.flip)));
    }
    if let Some(&s) = task
        .sizes
        .iter()
        .find(|&&s| s <= task.train_per_class + task.val_per_class)
    {
        return Err(Error::Domain(format!(
            "class of {s} nodes cannot hold {} train + {} val nodes and a test set",
            task.train_per_class, task.val_per_class
        )));
    }
    let (graph, blocks) = graph::sbm(&task.sizes, task.p_in, task.p_out, derive_seed(seed, 0))?;
    let m = task.sizes.len();
    let mut rng = seeded_rng(derive_seed(seed, 1));
    let mut features = Tensor::zeros(graph.n(), m);
    for (v, &c) in blocks.iter().enumerate() {
        let hot = if rng.gen::<f64>() < task.flip {
            // uniform over the other classes
            let other = rng.gen_range(0..m - 1);
            if other >= c {
                other + 1
            } else {
                other
            }
        } else {
            c
        };
        features[(v, hot)] = 1.0;
    }
    let mut rng = seeded_rng(derive_seed(seed, 2));
    let mut split = vec![Split::Test; graph.n()];
    let mut start = 0;
    for &size in &task.sizes {
        let mut members: Vec<usize> = (start..start + size).collect();
        members.shuffle(&mut rng);
        for (k, &v) in members.iter().enumerate() {
            if k < task.train_per_class {
                split[v] = Split::Train;
            } else if k < task.train_per_class + task.val_per_class {
                split[v] = Split::Val;
            }
        }
        start += size;
    }
    Ok(NodeDataset {
        graph,
        features,
        labels: blocks.iter().map(|&c| c as i64).collect(),
        split,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum GraphTask {
    /// Class 0: cycles; class 1: Erdős–Rényi graphs with edge probability `p`.
    RingVsEr {
        graphs_per_class: usize,
        nodes: usize,
        p: f64,
    },
    /// Class `i`: `components[i]` disjoint paths covering `nodes` vertices.
    ComponentCount {
        graphs_per_class: usize,
        nodes: usize,
        components: Vec<usize>,
    },
}

/// Synthetic graph-classification task with degree features; every graph
/// is randomly relabeled.
pub fn make_synthetic_graph_task(task: &GraphTask, seed: u64) -> Result<GraphDataset> {
    let mut rng = seeded_rng(derive_seed(seed, 0));
    let mut graphs = Vec::new();
    let mut push = |g: Graph, label: usize, rng: &mut crate::rng::SeededRng| -> Result<()> {
        let p = Permutation::random(g.n(), rng);
        let g = permute(&g, &p)?;
        graphs.push(GraphSample {
            features: degree_features(&g),
            graph: g,
            label,
        });
        Ok(())
    };
    let n_classes = match task {
        GraphTask::RingVsEr {
            graphs_per_class,
            nodes,
            p,
        } => {
            if *graphs_per_class == 0 || *nodes < 3 {
                return Err(Error::Domain("ring-vs-er needs >= 1 graph per class and >= 3 nodes".into()));
            }
            for i in 0..*graphs_per_class {
                push(cycle_graph(*nodes)?, 0, &mut rng)?;
                let er = erdos_renyi(*nodes, *p, derive_seed(seed, 1 + i as u64))?;
                push(er, 1, &mut rng)?;
            }
            2
        }
        GraphTask::ComponentCount {
            graphs_per_class,
            nodes,
            components,
        } => {
            if *graphs_per_class == 0 || components.len() < 2 {
                return Err(Error::Domain("component-count needs >= 1 graph per class and >= 2 classes".into()));
            }
            if let Some(&c) = components.iter().find(|&&c| c == 0 || 2 * c > *nodes) {
                return Err(Error::Domain(format!("{c} paths of >= 2 nodes do not fit in {nodes} nodes")));
            }
            for _ in 0..*graphs_per_class {
                for (label, &c) in components.iter().enumerate() {
                    push(disjoint_paths(*nodes, c, &mut rng)?, label, &mut rng)?;
                }
            }
            components.len()
        }
    };
    GraphDataset::new(graphs, n_classes)
}

/// `c` vertex-disjoint paths of at least two nodes each, sizes drawn at random.
fn disjoint_paths<R: Rng + ?Sized>(n: usize, c: usize, rng: &mut R) -> Result<Graph> {
    let mut sizes = vec![2usize; c];
    for _ in 0..n - 2 * c {
        sizes[rng.gen_range(0..c)] += 1;
    }
    let mut edges = Vec::new();
    let mut start = 0;
    for s in sizes {
        for k in start..start + s - 1 {
            edges.push((k, k + 1, 1.0));
        }
        start += s;
    }
    Graph::undirected(n, &edges)
}
