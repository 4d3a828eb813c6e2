//! Experiment orchestration: h-sweeps, slope fits, report files and the CLI.

mod cli;
mod report;
mod sweep;

pub use cli::cli_main;
pub use report::{fit_loglog, SlopeFit, SweepReport, SweepRow, RATE_RESIDUAL_LIMIT};
pub use sweep::{
    compare_at_check_times, run_convergence_sweep, run_recovery_experiment, sweep_entry, CheckError,
    RecoveryExperiment, DEFAULT_H_LIST,
};
