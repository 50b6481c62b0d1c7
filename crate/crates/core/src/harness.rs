//! Training loops, cross-validation, sweeps and CSV reports.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::autodiff::{adam_step, AdamState, Tape};
use crate::config::{DataSource, ExperimentConfig, PoolingChoice, Structure, SweepAxis, SyntheticKind};
use crate::dataset::{
    self, load_graph_dataset, load_node_dataset, make_sbm_node_task, make_synthetic_graph_task, GraphDataset,
    NodeDataset, Split,
};
use crate::entropy::edge_entropy;
use crate::error::{Error, Result};
use crate::graph::{erdos_renyi, Graph};
use crate::layers::{build_model, ConvKind, Model, PreparedGraph, Task};
use crate::rng::{derive_seed, seeded_rng};
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_acc: f64,
    pub test_acc: f64,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub seed: u64,
    pub fold: Option<usize>,
    pub epochs: Vec<EpochRecord>,
    /// Index into `epochs` of the first epoch with the highest validation accuracy.
    pub best: usize,
    pub test_acc: f64,
    pub train_acc: f64,
    pub wall_clock: Duration,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation (`n - 1`); zero for a single value.
    pub std: f64,
}

pub fn summarize(values: &[f64]) -> Summary {
    let n = values.len();
    if n == 0 {
        return Summary {
            mean: f64::NAN,
            std: f64::NAN,
        };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    Summary { mean, std }
}

/// First epoch attaining the highest validation accuracy.
pub fn best_epoch(epochs: &[EpochRecord]) -> usize {
    let mut best = 0;
    for (i, e) in epochs.iter().enumerate() {
        if e.val_acc > epochs[best].val_acc {
            best = i;
        }
    }
    best
}

pub fn accuracy(logits: &Tensor, labels: &[usize], rows: &[usize]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let pred = logits.argmax_rows();
    let hits = rows.iter().filter(|&&r| pred[r] == labels[r]).count();
    hits as f64 / rows.len() as f64
}

fn cross_entropy_value(logits: &Tensor, labels: &[usize], rows: &[usize]) -> Result<f64> {
    let mut tape = Tape::new();
    let l = tape.constant(logits.clone());
    let loss = tape.cross_entropy(l, labels, rows)?;
    Ok(tape.value(loss).item())
}

/// Tracks validation loss for patience-based stopping.
struct EarlyStop {
    patience: usize,
    best: f64,
    waited: usize,
}

impl EarlyStop {
    fn new(patience: usize) -> Self {
        Self {
            patience,
            best: f64::INFINITY,
            waited: 0,
        }
    }

    /// Returns true when training should stop.
    fn update(&mut self, val_loss: f64) -> bool {
        if val_loss < self.best {
            self.best = val_loss;
            self.waited = 0;
        } else {
            self.waited += 1;
        }
        self.patience > 0 && self.waited >= self.patience
    }
}

fn finish(seed: u64, fold: Option<usize>, epochs: Vec<EpochRecord>, train_accs: Vec<f64>, start: Instant) -> RunResult {
    let best = best_epoch(&epochs);
    RunResult {
        seed,
        fold,
        test_acc: epochs[best].test_acc,
        train_acc: train_accs[best],
        best,
        epochs,
        wall_clock: start.elapsed(),
    }
}

/// Node dataset for one run: loaded from disk or generated from the seed.
pub fn node_dataset(cfg: &ExperimentConfig, seed: u64) -> Result<NodeDataset> {
    match &cfg.data {
        DataSource::Dir(dir) => load_node_dataset(dir),
        DataSource::Synthetic(SyntheticKind::Sbm) => make_sbm_node_task(&cfg.sbm, seed),
        DataSource::Synthetic(_) => Err(Error::Config("node tasks need `synthetic = sbm` or a data directory".into())),
    }
}

pub fn graph_dataset(cfg: &ExperimentConfig, seed: u64) -> Result<GraphDataset> {
    match &cfg.data {
        DataSource::Dir(dir) => load_graph_dataset(dir),
        DataSource::Synthetic(kind) => make_synthetic_graph_task(&cfg.graph_task(*kind)?, seed),
    }
}

/// The adjacency a node model sees under `structure`.
pub fn structure_variant(g: &Graph, structure: Structure, seed: u64) -> Result<Graph> {
    match structure {
        Structure::Graph => Ok(g.clone()),
        Structure::Identity => Ok(g.identity_like()),
        Structure::ErdosRenyi => {
            let n = g.n();
            let pairs = (n * n.saturating_sub(1) / 2).max(1) as f64;
            let loops = (0..n).filter(|&i| g.weight(i, i) != 0.0).count();
            let p = ((g.edge_count() - loops) as f64 / pairs).min(1.0);
            erdos_renyi(n, p, derive_seed(seed, 0xE5))
        }
    }
}

/// Full-batch training on one node dataset with one seed.
pub fn train_node_on(ds: &NodeDataset, cfg: &ExperimentConfig, seed: u64) -> Result<RunResult> {
    let start = Instant::now();
    let train = ds.indices(Split::Train);
    let val = ds.indices(Split::Val);
    let test = ds.indices(Split::Test);
    if train.is_empty() {
        return Err(Error::Config("training split is empty".into()));
    }
    if val.is_empty() || test.is_empty() {
        return Err(Error::Config("validation and test splits must be nonempty".into()));
    }
    let labels: Vec<usize> = ds.labels.iter().map(|&l| l.max(0) as usize).collect();
    let features = if cfg.normalize_features {
        ds.row_normalized_features()
    } else {
        ds.features.clone()
    };
    let spec = cfg.model.to_spec(Task::Node);
    let mut model = build_model(&spec, features.cols(), ds.n_classes(), derive_seed(seed, 1))?;
    let graph = structure_variant(&ds.graph, cfg.structure, seed)?;
    let prepared = model.prepare(graph)?;
    let mut adam = AdamState::new(model.params.values());
    let mut rng = seeded_rng(derive_seed(seed, 2));
    let mut stop = EarlyStop::new(cfg.patience);
    let mut epochs = Vec::with_capacity(cfg.epochs);
    let mut train_accs = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let mut tape = Tape::new();
        let bound = model.params.bind(&mut tape);
        let x = tape.constant(features.clone());
        let out = model.forward(&mut tape, &bound, &prepared, x, true, &mut rng)?;
        let loss = tape.cross_entropy(out.logits, &labels, &train)?;
        let train_loss = tape.value(loss).item();
        tape.backward(loss)?;
        let grads = bound.grads(&tape);
        adam_step(model.params.values_mut(), &grads, &mut adam, &cfg.optimizer)?;

        let logits = model.predict(&prepared, &features)?;
        let val_loss = cross_entropy_value(&logits, &labels, &val)?;
        epochs.push(EpochRecord {
            epoch,
            train_loss,
            val_acc: accuracy(&logits, &labels, &val),
            test_acc: accuracy(&logits, &labels, &test),
        });
        train_accs.push(accuracy(&logits, &labels, &train));
        if stop.update(val_loss) {
            break;
        }
    }
    Ok(finish(seed, None, epochs, train_accs, start))
}

#[derive(Clone, Debug)]
pub struct Report {
    pub runs: Vec<RunResult>,
    /// One `(seed, test accuracy)` per seed; fold means for graph tasks.
    pub per_seed: Vec<(u64, f64)>,
    pub summary: Summary,
}

impl Report {
    fn from_runs(runs: Vec<RunResult>, seeds: &[u64]) -> Self {
        let per_seed: Vec<(u64, f64)> = seeds
            .iter()
            .map(|&s| {
                let accs: Vec<f64> = runs.iter().filter(|r| r.seed == s).map(|r| r.test_acc).collect();
                (s, summarize(&accs).mean)
            })
            .collect();
        let summary = summarize(&per_seed.iter().map(|p| p.1).collect::<Vec<_>>());
        Self {
            runs,
            per_seed,
            summary,
        }
    }
}

/// Trains one node model per seed, in parallel, results in seed order.
pub fn train_node(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    if cfg.task != Task::Node {
        return Err(Error::Config("train_node needs task = node".into()));
    }
    let loaded = match &cfg.data {
        DataSource::Dir(_) => Some(node_dataset(cfg, 0)?),
        DataSource::Synthetic(_) => None,
    };
    let runs = cfg
        .seeds
        .par_iter()
        .map(|&seed| match &loaded {
            Some(ds) => train_node_on(ds, cfg, seed),
            None => train_node_on(&node_dataset(cfg, seed)?, cfg, seed),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Report::from_runs(runs, &cfg.seeds))
}

/// Fold id per sample; each class is shuffled and dealt round-robin.
pub fn stratified_folds(labels: &[usize], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::Fold(format!("{k} folds")));
    }
    let m = labels.iter().max().map_or(0, |&l| l + 1);
    let mut rng = seeded_rng(seed);
    let mut fold = vec![0; labels.len()];
    let mut next = 0;
    for c in 0..m {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < k {
            return Err(Error::Fold(format!(
                "class {c} has {} members for {k} folds",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for &i in &members {
            fold[i] = next % k;
            next += 1;
        }
    }
    Ok(fold)
}

/// Holds out about a tenth of each class (at least one member when the
/// class has two or more) as validation set.
fn inner_split(pool: &[usize], labels: &[usize], seed: u64) -> (Vec<usize>, Vec<usize>) {
    let m = labels.iter().max().map_or(0, |&l| l + 1);
    let mut rng = seeded_rng(seed);
    let (mut train, mut val) = (Vec::new(), Vec::new());
    for c in 0..m {
        let mut members: Vec<usize> = pool.iter().copied().filter(|&i| labels[i] == c).collect();
        members.shuffle(&mut rng);
        let take = if members.len() >= 2 {
            ((members.len() as f64 * 0.1).round() as usize).max(1)
        } else {
            0
        };
        val.extend_from_slice(&members[..take]);
        train.extend_from_slice(&members[take..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    (train, val)
}

fn graph_predictions(model: &Model, prepared: &[PreparedGraph], ds: &GraphDataset, idx: &[usize]) -> Result<Tensor> {
    let mut out = Tensor::zeros(ds.graphs.len(), ds.n_classes);
    for &i in idx {
        let logits = model.predict(&prepared[i], &ds.graphs[i].features)?;
        out.row_slice_mut(i).copy_from_slice(logits.row_slice(0));
    }
    Ok(out)
}

/// Trains on `train`, selects by `val`, reports on `test`. Gradients are
/// averaged over mini-batches of `batch_size` graphs.
#[allow(clippy::too_many_arguments)]
pub fn fit_graphs(
    ds: &GraphDataset,
    prepared: &[PreparedGraph],
    cfg: &ExperimentConfig,
    seed: u64,
    fold: Option<usize>,
    train: &[usize],
    val: &[usize],
    test: &[usize],
) -> Result<RunResult> {
    let start = Instant::now();
    if train.is_empty() {
        return Err(Error::Config("training split is empty".into()));
    }
    let labels = ds.labels();
    let spec = cfg.model.to_spec(Task::Graph);
    let mut model = build_model(&spec, ds.feature_dim(), ds.n_classes, derive_seed(seed, 1))?;
    let mut adam = AdamState::new(model.params.values());
    let mut rng = seeded_rng(derive_seed(seed, 2 + fold.unwrap_or(0) as u64));
    let mut stop = EarlyStop::new(cfg.patience);
    let mut order = train.to_vec();
    let mut epochs = Vec::with_capacity(cfg.epochs);
    let mut train_accs = Vec::with_capacity(cfg.epochs);
    let val_sel = if val.is_empty() { train } else { val };
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let mut acc: Vec<Tensor> = model
                .params
                .values()
                .iter()
                .map(|p| Tensor::zeros(p.rows(), p.cols()))
                .collect();
            for &i in batch {
                let mut tape = Tape::new();
                let bound = model.params.bind(&mut tape);
                let x = tape.constant(ds.graphs[i].features.clone());
                let out = model.forward(&mut tape, &bound, &prepared[i], x, true, &mut rng)?;
                let mut loss = tape.cross_entropy(out.logits, &[labels[i]], &[0])?;
                for (_, aux) in &out.aux_losses {
                    let w = tape.scale(*aux, cfg.aux_weight)?;
                    loss = tape.add(loss, w)?;
                }
                total += tape.value(loss).item();
                tape.backward(loss)?;
                for (a, g) in acc.iter_mut().zip(bound.grads(&tape)) {
                    a.add_assign(&g)?;
                }
            }
            let scale = 1.0 / batch.len() as f64;
            let grads: Vec<Tensor> = acc.iter().map(|a| a.scale(scale)).collect();
            adam_step(model.params.values_mut(), &grads, &mut adam, &cfg.optimizer)?;
        }
        let mut eval_idx: Vec<usize> = train.iter().chain(val).chain(test).copied().collect();
        eval_idx.sort_unstable();
        eval_idx.dedup();
        let logits = graph_predictions(&model, prepared, ds, &eval_idx)?;
        let val_loss = cross_entropy_value(&logits, &labels, val_sel)?;
        epochs.push(EpochRecord {
            epoch,
            train_loss: total / train.len() as f64,
            val_acc: accuracy(&logits, &labels, val_sel),
            test_acc: accuracy(&logits, &labels, test),
        });
        train_accs.push(accuracy(&logits, &labels, train));
        if stop.update(val_loss) {
            break;
        }
    }
    Ok(finish(seed, fold, epochs, train_accs, start))
}

pub fn prepare_graphs(ds: &GraphDataset, cfg: &ExperimentConfig) -> Result<Vec<PreparedGraph>> {
    let spec = cfg.model.to_spec(Task::Graph);
    ds.graphs
        .par_iter()
        .map(|s| PreparedGraph::new(s.graph.clone(), &spec))
        .collect()
}

/// Stratified k-fold cross-validation per seed; folds run in parallel.
pub fn train_graph(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    if cfg.task != Task::Graph {
        return Err(Error::Config("train_graph needs task = graph".into()));
    }
    let mut runs = Vec::new();
    for &seed in &cfg.seeds {
        let ds = graph_dataset(cfg, seed)?;
        runs.extend(cross_validate(&ds, cfg, seed)?);
    }
    Ok(Report::from_runs(runs, &cfg.seeds))
}

pub fn cross_validate(ds: &GraphDataset, cfg: &ExperimentConfig, seed: u64) -> Result<Vec<RunResult>> {
    let labels = ds.labels();
    let folds = stratified_folds(&labels, cfg.folds, derive_seed(cfg.fold_seed, seed))?;
    let prepared = prepare_graphs(ds, cfg)?;
    (0..cfg.folds)
        .into_par_iter()
        .map(|f| {
            let test: Vec<usize> = (0..labels.len()).filter(|&i| folds[i] == f).collect();
            let pool: Vec<usize> = (0..labels.len()).filter(|&i| folds[i] != f).collect();
            let (train, val) = inner_split(&pool, &labels, derive_seed(seed, 100 + f as u64));
            fit_graphs(ds, &prepared, cfg, seed, Some(f), &train, &val, &test)
        })
        .collect()
}

pub fn train(cfg: &ExperimentConfig) -> Result<Report> {
    match cfg.task {
        Task::Node => train_node(cfg),
        Task::Graph => train_graph(cfg),
    }
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub axis: &'static str,
    pub value: String,
    pub receptive_field: usize,
    pub summary: Summary,
    pub per_seed: Vec<(u64, f64)>,
}

/// One summary row per axis value, all on the same seeds.
pub fn sweep(cfg: &ExperimentConfig, axis: SweepAxis) -> Result<Vec<SweepRow>> {
    let mut variants: Vec<(String, ExperimentConfig)> = Vec::new();
    match axis {
        SweepAxis::Depth => {
            for d in 1..=4 {
                let mut c = cfg.clone();
                c.model.depth = d;
                variants.push((d.to_string(), c));
            }
        }
        SweepAxis::K => {
            for k in 1..=3 {
                let mut c = cfg.clone();
                c.model.conv = ConvKind::Tagcn;
                c.model.k = k;
                variants.push((k.to_string(), c));
            }
        }
        SweepAxis::Pooling => {
            if cfg.task != Task::Graph {
                return Err(Error::Config("pooling sweep needs task = graph".into()));
            }
            for p in PoolingChoice::ALL {
                let mut c = cfg.clone();
                c.model.pooling = p;
                let name = c.model.pooling_spec().name().to_string();
                variants.push((name, c));
            }
        }
        SweepAxis::Readout => {
            if cfg.task != Task::Graph {
                return Err(Error::Config("readout sweep needs task = graph".into()));
            }
            for set in ["mean", "sum", "max", "var", "mean,var", "mean,sum,max,var"] {
                let mut c = cfg.clone();
                c.model.readout = crate::config::parse_readout(set)?;
                variants.push((set.replace(',', "+"), c));
            }
        }
    }
    let axis_name = match axis {
        SweepAxis::Depth => "depth",
        SweepAxis::K => "k",
        SweepAxis::Pooling => "pooling",
        SweepAxis::Readout => "readout",
    };
    variants
        .into_iter()
        .map(|(value, c)| {
            let report = train(&c)?;
            Ok(SweepRow {
                axis: axis_name,
                value,
                receptive_field: c.model.to_spec(c.task).receptive_field(),
                summary: report.summary,
                per_seed: report.per_seed,
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct ProbeRow {
    pub structure: Structure,
    pub accuracies: Vec<f64>,
    pub summary: Summary,
}

#[derive(Clone, Debug)]
pub struct ProbeReport {
    pub rows: Vec<ProbeRow>,
    /// Edge entropy of the first seed's graph at orders 1 and 2.
    pub h1: Vec<Option<f64>>,
    pub h2: Vec<Option<f64>>,
}

/// Trains the same node model with the true adjacency, the identity and a
/// density-matched Erdős–Rényi graph.
pub fn effectiveness_probe(cfg: &ExperimentConfig) -> Result<ProbeReport> {
    let mut rows = Vec::new();
    for structure in [Structure::Graph, Structure::Identity, Structure::ErdosRenyi] {
        let mut c = cfg.clone();
        c.structure = structure;
        let report = train_node(&c)?;
        let accuracies: Vec<f64> = report.per_seed.iter().map(|p| p.1).collect();
        rows.push(ProbeRow {
            structure,
            summary: summarize(&accuracies),
            accuracies,
        });
    }
    let ds = node_dataset(cfg, cfg.seeds[0])?;
    let h1 = edge_entropy(&ds.graph, &ds.labels, 1)?.entropy;
    let h2 = edge_entropy(&ds.graph, &ds.labels, 2)?.entropy;
    Ok(ProbeReport { rows, h1, h2 })
}

pub fn metrics_csv(run: &RunResult) -> String {
    let mut s = String::from("epoch,train_loss,val_acc,test_acc\n");
    for e in &run.epochs {
        let _ = writeln!(s, "{},{},{},{}", e.epoch, e.train_loss, e.val_acc, e.test_acc);
    }
    s
}

pub fn summary_csv(report: &Report) -> String {
    let mut s = String::from("seed,test_acc\n");
    for (seed, acc) in &report.per_seed {
        let _ = writeln!(s, "{seed},{acc}");
    }
    let _ = writeln!(s, "mean,{}", report.summary.mean);
    let _ = writeln!(s, "std,{}", report.summary.std);
    s
}

pub fn folds_csv(report: &Report) -> String {
    let mut s = String::from("seed,fold,best_epoch,test_acc\n");
    for r in &report.runs {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            r.seed,
            r.fold.unwrap_or(0),
            r.epochs[r.best].epoch,
            r.test_acc
        );
    }
    s
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("axis,value,receptive_field,mean_test_acc,std_test_acc\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.axis, r.value, r.receptive_field, r.summary.mean, r.summary.std
        );
    }
    s
}

pub fn probe_csv(report: &ProbeReport) -> String {
    let mut s = String::from("structure,mean_test_acc,std_test_acc\n");
    for r in &report.rows {
        let _ = writeln!(s, "{},{},{}", r.structure.name(), r.summary.mean, r.summary.std);
    }
    s
}

/// Loads a dataset (node or graph) only to surface data errors early.
pub fn check_data(cfg: &ExperimentConfig) -> Result<()> {
    match cfg.task {
        Task::Node => node_dataset(cfg, cfg.seeds[0]).map(|_| ()),
        Task::Graph => graph_dataset(cfg, cfg.seeds[0]).map(|_| ()),
    }
}

/// Writes a node or graph dataset for the `synth` subcommand.
pub fn write_synthetic(cfg: &ExperimentConfig, seed: u64, dir: &std::path::Path) -> Result<()> {
    match cfg.task {
        Task::Node => dataset::write_node_dataset(&node_dataset(cfg, seed)?, dir),
        Task::Graph => dataset::write_graph_dataset(&graph_dataset(cfg, seed)?, dir),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_statistics() {
        let s = summarize(&[1.0, 2.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.std, 1.0);
        assert_eq!(summarize(&[0.5]).std, 0.0);
    }

    #[test]
    fn best_epoch_prefers_first_maximum() {
        let rec = |epoch, val_acc| EpochRecord {
            epoch,
            train_loss: 0.0,
            val_acc,
            test_acc: epoch as f64,
        };
        assert_eq!(best_epoch(&[rec(1, 0.2), rec(2, 0.5), rec(3, 0.5), rec(4, 0.1)]), 1);
    }

    #[test]
    fn folds_are_stratified() {
        let labels: Vec<usize> = (0..40).map(|i| usize::from(i >= 30)).collect();
        let folds = stratified_folds(&labels, 10, 3).unwrap();
        for f in 0..10 {
            let members: Vec<usize> = (0..40).filter(|&i| folds[i] == f).collect();
            assert_eq!(members.len(), 4);
            assert_eq!(members.iter().filter(|&&i| labels[i] == 1).count(), 1);
        }
        assert!(matches!(stratified_folds(&[0, 0, 1], 2, 0), Err(Error::Fold(_))));
    }

    #[test]
    fn empty_train_split_is_config_error() {
        let mut ds = make_sbm_node_task(
            &dataset::SbmTask {
                sizes: vec![10, 10],
                train_per_class: 2,
                val_per_class: 2,
                ..Default::default()
            },
            0,
        )
        .unwrap();
        for s in ds.split.iter_mut() {
            if *s == Split::Train {
                *s = Split::None;
            }
        }
        let cfg = ExperimentConfig::default();
        assert!(matches!(train_node_on(&ds, &cfg, 0), Err(Error::Config(_))));
    }

    #[test]
    fn identity_variant_has_no_edges_between_nodes() {
        let g = crate::graph::path_graph(4).unwrap();
        let i = structure_variant(&g, Structure::Identity, 0).unwrap();
        assert_eq!(i.dense().unwrap(), Tensor::identity(4));
        let er = structure_variant(&g, Structure::ErdosRenyi, 0).unwrap();
        assert_eq!(er.n(), 4);
    }
}
