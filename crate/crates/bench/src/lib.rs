//! Experiment harness for the `rowsketch` solver: problem generators,
//! Monte Carlo trials, CSV reports and Matrix Market I/O.

pub mod config;
pub mod error;
pub mod experiment;
pub mod mtx;
pub mod presets;
pub mod problem;
pub mod report;

pub use config::{DistributionChoice, SampleRule, TrialConfig};
pub use error::{BenchError, Result};
pub use experiment::{
    run_experiment, run_experiment_on, Aggregate, ExperimentReport, RunSummary, TrialRecord,
    TrialStatus,
};
pub use mtx::{format_matrix, parse_matrix, read_matrix, write_matrix};
pub use presets::{all_presets, evaluate, find_preset, Expectation, Preset, PresetOutcome};
pub use problem::{
    generate_problem, Problem, ProblemKind, ProblemMeta, ProblemSpec, PROBLEM_STREAM,
};
pub use report::{render_csv, strip_timing, write_report, COLUMNS};
