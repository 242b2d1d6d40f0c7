//! Gabriel-graph margin classifiers.
//!
//! The graph of a training set gives its structural support vectors (the
//! endpoints of edges joining different classes). Those feed small
//! activation networks whose output weights are either fixed per query or
//! solved in closed form.

pub mod classifier;
pub mod dataset;
pub mod error;
pub mod graph;
pub mod harness;
pub mod numeric;
pub mod preprocess;
pub mod regularization;

pub use classifier::{Architecture, TrainedModel};
pub use dataset::Dataset;
pub use error::{Error, ErrorKind, Result};
pub use graph::{GabrielGraph, SupportStructure};
pub use harness::{ExperimentConfig, PreparedSplit};
pub use preprocess::Standardizer;
pub use regularization::{FilterModel, FilterPolicy, MembershipKind};
