//! Experiment orchestration: configs, study runners and result emission.

mod config;
mod emit;
mod runner;

pub use config::{
    ExperimentConfig, FusionMode, GammaPolicy, Method, PartitionMethod, RunRecord, Study,
    WeightSource,
};
pub use emit::{aggregate_by_method, emit, runs_csv, summarize, summary_csv, SummaryRow};
pub use runner::{run_study, StudyOutput};
