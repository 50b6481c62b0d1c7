//! Graph signal processing and graph convolutional network workbench.
//!
//! The crate is organized bottom-up:
//! - [`graph`]: sparse graphs, constructors, normalizations, permutations
//! - [`gsp`]: shift, polynomial filters, graph Fourier transform
//! - [`autodiff`]: dense reverse-mode differentiation and Adam
//! - [`layers`]: GCN/TAGCN layers and model assembly
//! - [`pooling`], [`aggregation`]: graph reduction and readout
//! - [`entropy`]: edge entropy of a labeled graph
//! - [`dataset`]: text loaders and synthetic benchmarks
//! - [`harness`]: training loops, cross-validation and sweeps

pub mod aggregation;
pub mod autodiff;
pub mod config;
pub mod dataset;
pub mod entropy;
pub mod error;
pub mod graph;
pub mod gsp;
pub mod harness;
pub mod layers;
pub mod linalg;
pub mod pooling;
pub mod rng;
pub mod tensor;

pub use error::{Error, Result};
pub use graph::{Graph, Permutation};
pub use tensor::Tensor;
