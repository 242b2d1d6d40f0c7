//! Data loading, cross-validation and benchmarking.

mod bench;
mod config;
mod cv;
mod folds;
mod io;
mod synthetic;

pub use crate::preprocess::standardize;
pub use bench::{bench_recompute, write_bench_csv, BenchMethod, BenchSample, BenchmarkRecord};
pub use config::{
    CountGrid, ExperimentConfig, FilterChoice, FilterSearch, SigmaSearch, SigmaStrategy,
};
pub use cv::{
    evaluate, format_table, run_nested_cv, run_nested_cv_on, train_model, CvReport, FitOutcome,
    FoldResult, FoldTrace, NestedCvResult, PreparedSplit, TrainSettings,
};
pub use folds::{stratified_kfold, Fold};
pub use io::{
    label_order, load_csv, read_csv_columns, read_csv_table, write_probability_csv, CsvTable,
};
pub use synthetic::{gaussian_blobs, uniform_dataset};
