//! Experiment orchestration and report emission.

pub mod checks;
pub mod cli;
pub mod config;
pub mod ladder;
pub mod report;

pub use checks::{
    first_order_direct, run_correction, run_first_order_check, run_k_convergence, CorrectionReport,
    FirstOrderReport, KConvergenceReport,
};
pub use config::{ExperimentConfig, PhiName, PhiSpec};
pub use ladder::{loglog_slope, run_ladder, LadderReport, LadderRow};
pub use report::{emit, write_report, Format, Report};
