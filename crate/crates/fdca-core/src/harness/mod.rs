//! Scenario configuration, end-to-end estimation pipelines, Monte-Carlo
//! sweeps, estimate-to-truth matching, and RMSE/MAPE aggregation.

mod config;
mod matching;
mod metrics;
mod montecarlo;
mod pipeline;

pub use config::{
    default_grids_for, GridSpec, Grids, LayoutCfg, McCfg, Method, MethodCfg, ScenarioConfig,
    SceneCfg, SNR_DEFINITION,
};
pub use matching::{match_estimates, min_cost_assignment, Assignment};
pub use metrics::{mape, rmse, ErrorParam};
pub use montecarlo::{run_monte_carlo, McReport, McRow};
pub use pipeline::{run_pipeline, PipelineOptions, PipelineOutput, SolverDiagnostics, TrialResult};
