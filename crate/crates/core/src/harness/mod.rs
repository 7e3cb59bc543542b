//! Benchmark orchestration: the oracle label, training data, per-case link
//! evaluation, the grid runner and result files.
//!
//! Seeds are derived from the grid's master seed. All cases of one grid
//! share the evaluation stream (channel, payload and noise), so algorithms,
//! resolutions and training sizes are compared on identical conditions.
//! Training data likewise comes from one stream, smaller training sets being
//! prefixes of larger ones, and each algorithm starts from the same initial
//! weights whatever the resolution or training size.

mod config;
mod data;
mod eval;
mod link;
mod report;

pub use config::{GridConfig, HarnessConfig};
pub use data::{derive_seed, generate_dataset, oracle_label, CsiFrame, CsiStream};
pub use eval::{
    evaluate_case, evaluation_seed, frames_for_bits, grid_cases, model_seed, run_grid, run_link,
    train_grid_models, training_seed, CaseFailure, CaseSpec, GridOutcome, GridResult, LinkStats,
    ModelKey,
};
pub use link::{Link, GUARD_SAMPLES};
pub use report::{parse_results_csv, report, results_csv, series_table, CSV_HEADER};
