//! `gspcnn`: experiment driver for node and graph classification.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 numeric failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gsp_cnn::config::{DataSource, ExperimentConfig};
use gsp_cnn::entropy::edge_entropy;
use gsp_cnn::gsp::spectrum;
use gsp_cnn::harness::{self, Report};
use gsp_cnn::layers::Task;
use gsp_cnn::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "gspcnn", version, about = "Graph CNN workbench: training, sweeps and graph diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Run with this single seed instead of the configured list.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Root for relative dataset paths; used as the dataset itself when
    /// the config names none.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,

    /// Output directory (overrides `output`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Extra `key=value` overrides, applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full-batch semisupervised node classification, one run per seed.
    TrainNode,
    /// Stratified k-fold graph classification, per seed.
    TrainGraph,
    /// One summary row per value of a hyperparameter axis.
    Sweep {
        /// depth | k | pooling | readout (overrides `sweep_axis`).
        #[arg(long)]
        axis: Option<String>,
    },
    /// Edge entropy of the labeled node graph.
    Entropy {
        /// Walk length (overrides `entropy_order`).
        #[arg(long)]
        order: Option<usize>,
    },
    /// Adjacency eigenvalues of the dataset graph.
    SpectrumReport {
        /// Graph index for graph-classification datasets.
        #[arg(long, default_value_t = 0)]
        graph: usize,
    },
    /// Writes the configured synthetic dataset to the output directory.
    Synth,
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn load_config(cli: &Cli) -> std::result::Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    match &cli.command {
        Command::TrainNode => cfg.set("task", "node")?,
        Command::TrainGraph => cfg.set("task", "graph")?,
        _ => {}
    }
    for kv in &cli.overrides {
        let Some((k, v)) = kv.split_once('=') else {
            return Err(Failure::Usage(format!("--set expects KEY=VALUE, got {kv:?}")));
        };
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(seed) = cli.seed {
        cfg.seeds = vec![seed];
    }
    if let Some(root) = &cli.data_dir {
        cfg.data = match &cfg.data {
            DataSource::Dir(p) if p.is_relative() => DataSource::Dir(root.join(p)),
            DataSource::Dir(p) => DataSource::Dir(p.clone()),
            DataSource::Synthetic(_) => DataSource::Dir(root.clone()),
        };
    }
    if let Some(out) = &cli.out {
        cfg.output = out.clone();
    }
    match &cli.command {
        Command::Sweep { axis: Some(a) } => cfg.set("sweep_axis", a)?,
        Command::Entropy { order: Some(n) } => cfg.entropy_order = *n,
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|source| Error::Io { path, source })
}

fn write_report(cfg: &ExperimentConfig, report: &Report) -> Result<()> {
    for run in &report.runs {
        let name = match run.fold {
            Some(f) => format!("metrics_{}_fold{f}.csv", run.seed),
            None => format!("metrics_{}.csv", run.seed),
        };
        write(&cfg.output, &name, &harness::metrics_csv(run))?;
    }
    if cfg.task == Task::Graph {
        write(&cfg.output, "folds.csv", &harness::folds_csv(report))?;
    }
    write(&cfg.output, "summary.csv", &harness::summary_csv(report))
}

fn entropy_report(cfg: &ExperimentConfig) -> Result<()> {
    let ds = harness::node_dataset(cfg, cfg.seeds[0])?;
    let r = edge_entropy(&ds.graph, &ds.labels, cfg.entropy_order)?;
    let mut rows = String::from("class,order,entropy,defined\n");
    for (c, h) in r.entropy.iter().enumerate() {
        match h {
            Some(h) => writeln!(rows, "{c},{},{h},true", r.order),
            None => writeln!(rows, "{c},{},,false", r.order),
        }
        .unwrap();
    }
    let mut p = String::from("class");
    for j in 0..r.classes {
        write!(p, ",p{j}").unwrap();
    }
    p.push('\n');
    for i in 0..r.classes {
        write!(p, "{i}").unwrap();
        for v in r.p.row_slice(i) {
            write!(p, ",{v}").unwrap();
        }
        p.push('\n');
    }
    write(&cfg.output, "entropy.csv", &rows)?;
    write(&cfg.output, "entropy_p.csv", &p)
}

fn spectrum_report(cfg: &ExperimentConfig, index: usize) -> Result<()> {
    let g = match cfg.task {
        Task::Node => harness::node_dataset(cfg, cfg.seeds[0])?.graph,
        Task::Graph => {
            let ds = harness::graph_dataset(cfg, cfg.seeds[0])?;
            let n = ds.graphs.len();
            ds.graphs
                .into_iter()
                .nth(index)
                .ok_or_else(|| Error::Config(format!("graph index {index} out of range for {n} graphs")))?
                .graph
        }
    };
    let s = spectrum(&g)?;
    let mut eig = s.eigenvalues.clone();
    // descending real part, then descending imaginary part
    eig.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    let mut out = String::from("index,re_lambda,im_lambda\n");
    for (i, z) in eig.iter().enumerate() {
        writeln!(out, "{i},{},{}", z.re, z.im).unwrap();
    }
    if s.repeated_warning {
        eprintln!("warning: repeated eigenvalues (min gap {:e}); the GFT basis is not unique", s.min_gap);
    }
    write(&cfg.output, "spectrum.csv", &out)
}

fn run(cli: &Cli) -> std::result::Result<(), Failure> {
    let cfg = load_config(cli)?;
    fs::create_dir_all(&cfg.output).map_err(|source| Error::Io {
        path: cfg.output.clone(),
        source,
    })?;
    match &cli.command {
        Command::TrainNode | Command::TrainGraph => {
            harness::check_data(&cfg)?;
            let report = harness::train(&cfg)?;
            write_report(&cfg, &report)?;
            println!(
                "mean test accuracy {:.4} (std {:.4}) over {} seed(s)",
                report.summary.mean,
                report.summary.std,
                report.per_seed.len()
            );
        }
        Command::Sweep { .. } => {
            harness::check_data(&cfg)?;
            let rows = harness::sweep(&cfg, cfg.sweep_axis)?;
            write(&cfg.output, "sweep.csv", &harness::sweep_csv(&rows))?;
            for r in &rows {
                println!("{} = {}: {:.4} +- {:.4}", r.axis, r.value, r.summary.mean, r.summary.std);
            }
        }
        Command::Entropy { .. } => entropy_report(&cfg)?,
        Command::SpectrumReport { graph } => spectrum_report(&cfg, *graph)?,
        Command::Synth => {
            let seed = cfg.seeds[0];
            harness::write_synthetic(&cfg, seed, &cfg.output)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() {
                2
            } else if e.is_numeric_error() {
                3
            } else {
                1
            })
        }
    }
}
