//! Scenario files, runs and report files.

mod config;
mod report;
mod run;

pub use config::{boundary_kind_name, Initial, RunSettings, ScenarioConfig, DEFAULT_N_CAP};
pub use report::{
    defects_csv, density_csv, ensemble_csv, resolve_output_dir, summary_toml, timeseries_csv,
    write_reports, DEFECTS_FILE, DENSITY_FILE, ENSEMBLE_FILE, OUT_DIR_ENV, SUMMARY_FILE,
    TIMESERIES_FILE,
};
pub use run::{
    lambda_defect, run_scenario, window_defect, BilliardSummary, MassAccounting, ResolventSample, ScenarioReport, TimeRow,
};
