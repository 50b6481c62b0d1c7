//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are
//! comma-separated. Unknown keys are errors.

use std::path::PathBuf;

use crate::aggregation::FgsdConfig;
use crate::autodiff::{AdamConfig, Reduction};
use crate::dataset::{GraphTask, SbmTask};
use crate::error::{Error, Result};
use crate::layers::{ConvKind, ModelSpec, PoolingSpec, Task};

pub const VALID_KEYS: &[&str] = &[
    "task",
    "data",
    "synthetic",
    "sbm_sizes",
    "sbm_p_in",
    "sbm_p_out",
    "sbm_flip",
    "sbm_train_per_class",
    "sbm_val_per_class",
    "synth_graphs_per_class",
    "synth_nodes",
    "synth_er_p",
    "synth_components",
    "conv",
    "depth",
    "hidden",
    "k",
    "dropout",
    "pooling",
    "pool_ratio",
    "sortpool_k",
    "diffpool_clusters",
    "readout",
    "fgsd",
    "fgsd_bins",
    "fgsd_range",
    "head_hidden",
    "aux_weight",
    "lr",
    "beta1",
    "beta2",
    "eps",
    "weight_decay",
    "epochs",
    "patience",
    "seeds",
    "folds",
    "fold_seed",
    "batch_size",
    "normalize_features",
    "structure",
    "sweep_axis",
    "entropy_order",
    "output",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SyntheticKind {
    Sbm,
    RingVsEr,
    ComponentCount,
}

/// Which adjacency a node model is trained with.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Structure {
    Graph,
    Identity,
    ErdosRenyi,
}

impl Structure {
    pub fn name(self) -> &'static str {
        match self {
            Structure::Graph => "graph",
            Structure::Identity => "identity",
            Structure::ErdosRenyi => "er",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    Depth,
    K,
    Pooling,
    Readout,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PoolingChoice {
    None,
    TopK,
    Sag,
    Sort,
    Diff,
}

impl PoolingChoice {
    pub const ALL: [PoolingChoice; 5] = [
        PoolingChoice::None,
        PoolingChoice::TopK,
        PoolingChoice::Sag,
        PoolingChoice::Sort,
        PoolingChoice::Diff,
    ];
}

/// Model hyperparameters from which a [`ModelSpec`] is derived.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub conv: ConvKind,
    pub depth: usize,
    pub hidden: usize,
    pub k: usize,
    pub dropout: f64,
    pub pooling: PoolingChoice,
    pub pool_ratio: f64,
    pub sortpool_k: usize,
    pub diffpool_clusters: usize,
    pub readout: Vec<Reduction>,
    pub fgsd: Option<FgsdConfig>,
    pub head_hidden: Vec<usize>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            conv: ConvKind::Gcn,
            depth: 2,
            hidden: 16,
            k: 2,
            dropout: 0.5,
            pooling: PoolingChoice::None,
            pool_ratio: 0.5,
            sortpool_k: 10,
            diffpool_clusters: 4,
            readout: vec![Reduction::Mean],
            fgsd: None,
            head_hidden: vec![16],
        }
    }
}

impl ModelConfig {
    pub fn pooling_spec(&self) -> PoolingSpec {
        match self.pooling {
            PoolingChoice::None => PoolingSpec::None,
            PoolingChoice::TopK => PoolingSpec::TopK { ratio: self.pool_ratio },
            PoolingChoice::Sag => PoolingSpec::Sag { ratio: self.pool_ratio },
            PoolingChoice::Sort => PoolingSpec::Sort { k: self.sortpool_k },
            PoolingChoice::Diff => PoolingSpec::Diff {
                clusters: self.diffpool_clusters,
            },
        }
    }

    pub fn to_spec(&self, task: Task) -> ModelSpec {
        match task {
            Task::Node => ModelSpec::node_classifier(self.conv, self.depth, self.hidden, self.k, self.dropout),
            Task::Graph => {
                let mut spec = ModelSpec::graph_classifier(
                    self.conv,
                    self.depth,
                    self.hidden,
                    self.k,
                    self.dropout,
                    self.pooling_spec(),
                    self.readout.clone(),
                );
                spec.fgsd = self.fgsd;
                spec.head_hidden = self.head_hidden.clone();
                spec
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DataSource {
    Dir(PathBuf),
    Synthetic(SyntheticKind),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub task: Task,
    pub data: DataSource,
    pub sbm: SbmTask,
    pub synth_graphs_per_class: usize,
    pub synth_nodes: usize,
    pub synth_er_p: f64,
    pub synth_components: Vec<usize>,
    pub model: ModelConfig,
    /// Weight on DiffPool auxiliary losses.
    pub aux_weight: f64,
    pub optimizer: AdamConfig,
    pub epochs: usize,
    /// Epochs without validation-loss improvement before stopping; 0 disables.
    pub patience: usize,
    pub seeds: Vec<u64>,
    pub folds: usize,
    pub fold_seed: u64,
    pub batch_size: usize,
    pub normalize_features: bool,
    pub structure: Structure,
    pub sweep_axis: SweepAxis,
    pub entropy_order: usize,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            task: Task::Node,
            data: DataSource::Synthetic(SyntheticKind::Sbm),
            sbm: SbmTask::default(),
            synth_graphs_per_class: 50,
            synth_nodes: 20,
            synth_er_p: 0.2,
            synth_components: vec![1, 2],
            model: ModelConfig::default(),
            aux_weight: 1.0,
            optimizer: AdamConfig::default(),
            epochs: 200,
            patience: 10,
            seeds: vec![0],
            folds: 10,
            fold_seed: 0,
            batch_size: 8,
            normalize_features: true,
            structure: Structure::Graph,
            sweep_axis: SweepAxis::Depth,
            entropy_order: 1,
            output: PathBuf::from("out"),
        }
    }
}

fn list<T, F: Fn(&str) -> Result<T>>(value: &str, f: F) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(f)
        .collect()
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected on/off, got {value:?}"))),
    }
}

fn reduction(v: &str) -> Result<Reduction> {
    Ok(match v {
        "mean" => Reduction::Mean,
        "sum" => Reduction::Sum,
        "max" => Reduction::Max,
        "var" | "variance" => Reduction::Var,
        _ => return Err(Error::Config(format!("readout: unknown statistic {v:?}"))),
    })
}

pub fn parse_readout(value: &str) -> Result<Vec<Reduction>> {
    let mut stats = list(value, reduction)?;
    stats.sort();
    stats.dedup();
    Ok(stats)
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!("line {}: expected `key = value`", no + 1)));
            };
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", no + 1)))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "task" => {
                self.task = match value {
                    "node" => Task::Node,
                    "graph" => Task::Graph,
                    _ => return Err(Error::Config(format!("task: expected node|graph, got {value:?}"))),
                };
                if matches!(self.data, DataSource::Synthetic(_)) {
                    self.data = DataSource::Synthetic(match self.task {
                        Task::Node => SyntheticKind::Sbm,
                        Task::Graph => SyntheticKind::RingVsEr,
                    });
                }
            }
            "data" => self.data = DataSource::Dir(PathBuf::from(value)),
            "synthetic" => {
                self.data = DataSource::Synthetic(match value {
                    "sbm" => SyntheticKind::Sbm,
                    "ring-vs-er" => SyntheticKind::RingVsEr,
                    "component-count" => SyntheticKind::ComponentCount,
                    _ => {
                        return Err(Error::Config(format!(
                            "synthetic: expected sbm|ring-vs-er|component-count, got {value:?}"
                        )))
                    }
                })
            }
            "sbm_sizes" => self.sbm.sizes = list(value, |v| num(key, v))?,
            "sbm_p_in" => self.sbm.p_in = num(key, value)?,
            "sbm_p_out" => self.sbm.p_out = num(key, value)?,
            "sbm_flip" => self.sbm.flip = num(key, value)?,
            "sbm_train_per_class" => self.sbm.train_per_class = num(key, value)?,
            "sbm_val_per_class" => self.sbm.val_per_class = num(key, value)?,
            "synth_graphs_per_class" => self.synth_graphs_per_class = num(key, value)?,
            "synth_nodes" => self.synth_nodes = num(key, value)?,
            "synth_er_p" => self.synth_er_p = num(key, value)?,
            "synth_components" => self.synth_components = list(value, |v| num(key, v))?,
            "conv" => {
                self.model.conv = match value {
                    "gcn" => ConvKind::Gcn,
                    "tagcn" => ConvKind::Tagcn,
                    _ => return Err(Error::Config(format!("conv: expected gcn|tagcn, got {value:?}"))),
                }
            }
            "depth" => self.model.depth = num(key, value)?,
            "hidden" => self.model.hidden = num(key, value)?,
            "k" => self.model.k = num(key, value)?,
            "dropout" => self.model.dropout = num(key, value)?,
            "pooling" => {
                self.model.pooling = match value {
                    "none" => PoolingChoice::None,
                    "topk" => PoolingChoice::TopK,
                    "sagpool" => PoolingChoice::Sag,
                    "sortpool" => PoolingChoice::Sort,
                    "diffpool" => PoolingChoice::Diff,
                    _ => {
                        return Err(Error::Config(format!(
                            "pooling: expected none|topk|sagpool|sortpool|diffpool, got {value:?}"
                        )))
                    }
                }
            }
            "pool_ratio" => self.model.pool_ratio = num(key, value)?,
            "sortpool_k" => self.model.sortpool_k = num(key, value)?,
            "diffpool_clusters" => self.model.diffpool_clusters = num(key, value)?,
            "readout" => self.model.readout = parse_readout(value)?,
            "fgsd" => {
                self.model.fgsd = if flag(key, value)? {
                    Some(self.model.fgsd.unwrap_or_default())
                } else {
                    None
                }
            }
            "fgsd_bins" => self.model.fgsd.get_or_insert_with(FgsdConfig::default).bins = num(key, value)?,
            "fgsd_range" => self.model.fgsd.get_or_insert_with(FgsdConfig::default).range_max = num(key, value)?,
            "head_hidden" => {
                self.model.head_hidden = if value == "none" {
                    Vec::new()
                } else {
                    list(value, |v| num(key, v))?
                }
            }
            "aux_weight" => self.aux_weight = num(key, value)?,
            "lr" => self.optimizer.lr = num(key, value)?,
            "beta1" => self.optimizer.beta1 = num(key, value)?,
            "beta2" => self.optimizer.beta2 = num(key, value)?,
            "eps" => self.optimizer.eps = num(key, value)?,
            "weight_decay" => self.optimizer.weight_decay = num(key, value)?,
            "epochs" => self.epochs = num(key, value)?,
            "patience" => self.patience = num(key, value)?,
            "seeds" => self.seeds = list(value, |v| num(key, v))?,
            "folds" => self.folds = num(key, value)?,
            "fold_seed" => self.fold_seed = num(key, value)?,
            "batch_size" => self.batch_size = num(key, value)?,
            "normalize_features" => self.normalize_features = flag(key, value)?,
            "structure" => {
                self.structure = match value {
                    "graph" => Structure::Graph,
                    "identity" => Structure::Identity,
                    "er" => Structure::ErdosRenyi,
                    _ => return Err(Error::Config(format!("structure: expected graph|identity|er, got {value:?}"))),
                }
            }
            "sweep_axis" => {
                self.sweep_axis = match value {
                    "depth" => SweepAxis::Depth,
                    "k" => SweepAxis::K,
                    "pooling" => SweepAxis::Pooling,
                    "readout" => SweepAxis::Readout,
                    _ => {
                        return Err(Error::Config(format!(
                            "sweep_axis: expected depth|k|pooling|readout, got {value:?}"
                        )))
                    }
                }
            }
            "entropy_order" => self.entropy_order = num(key, value)?,
            "output" => self.output = PathBuf::from(value),
            _ => {
                return Err(Error::Config(format!(
                    "unknown key {key:?}; valid keys: {}",
                    VALID_KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must be nonempty".into()));
        }
        if !(self.optimizer.lr > 0.0) {
            return Err(Error::Config("lr must be > 0".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        if self.task == Task::Graph && self.folds < 2 {
            return Err(Error::Config("folds must be >= 2".into()));
        }
        if self.entropy_order == 0 {
            return Err(Error::Config("entropy_order must be >= 1".into()));
        }
        self.model
            .to_spec(self.task)
            .validate()
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn graph_task(&self, kind: SyntheticKind) -> Result<GraphTask> {
        match kind {
            SyntheticKind::RingVsEr => Ok(GraphTask::RingVsEr {
                graphs_per_class: self.synth_graphs_per_class,
                nodes: self.synth_nodes,
                p: self.synth_er_p,
            }),
            SyntheticKind::ComponentCount => Ok(GraphTask::ComponentCount {
                graphs_per_class: self.synth_graphs_per_class,
                nodes: self.synth_nodes,
                components: self.synth_components.clone(),
            }),
            SyntheticKind::Sbm => Err(Error::Config("sbm is a node-classification generator".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_comments() {
        let cfg = ExperimentConfig::parse(
            "# experiment\nconv = tagcn\nk=3\nseeds = 1, 2,3\nreadout = var,mean\n\nfgsd = on\nfgsd_bins = 8\n",
        )
        .unwrap();
        assert_eq!(cfg.model.conv, ConvKind::Tagcn);
        assert_eq!(cfg.model.k, 3);
        assert_eq!(cfg.seeds, vec![1, 2, 3]);
        assert_eq!(cfg.model.readout, vec![Reduction::Mean, Reduction::Var]);
        assert_eq!(cfg.model.fgsd.unwrap().bins, 8);
    }

    #[test]
    fn unknown_key_lists_valid_keys() {
        let err = ExperimentConfig::parse("learning_rate = 0.1").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("learning_rate") && msg.contains("weight_decay"), "{msg}");
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(ExperimentConfig::parse("epochs = many").is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.epochs = 0;
        assert!(cfg.validate().is_err());
        cfg.epochs = 1;
        cfg.seeds.clear();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn task_switch_moves_default_generator() {
        let cfg = ExperimentConfig::parse("task = graph").unwrap();
        assert_eq!(cfg.data, DataSource::Synthetic(SyntheticKind::RingVsEr));
    }
}
