//! Model evaluation harness and command-line front end for `planbench`.

pub mod cli;
pub mod client;
pub mod run;

pub use client::{
    query_model, ClientError, Completion, EndpointConfig, HttpModel, MockModel, Model, RetryPolicy,
};
pub use run::{
    build_prompt, manifest_path, read_run_records, run_evaluation, EvalMode, RunError, RunManifest,
    RunOptions, RunRecord, RunSummary, Timing,
};
