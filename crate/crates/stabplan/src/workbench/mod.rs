//! Case ingestion, bundled fixtures, the CLI, and report emission.

pub mod casefile;
pub mod cli;
pub mod coeffs;
pub mod fixtures;
pub mod pipeline;
pub mod profiles;
pub mod reports;
pub mod treefile;

pub use casefile::{parse_case, write_case, CaseBundle};
pub use pipeline::{
    case_comparison, feature_dims, metric_specs, plan_once, run_active_sampling, two_stage_plan,
    CaseRow, ComparisonStudy, ExactEvaluator, RunConfig,
};
