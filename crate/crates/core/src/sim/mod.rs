//! Scenario files, Monte Carlo sweeps and result files.

mod config;
mod engine;
mod output;

pub use config::{ArraySection, OrbitSection, ScenarioConfig, SweepAxis, SweepSpec};
pub use engine::{run_point, run_sweep, sweep_points, trial_rng, PointContext, SweepPoint};
pub use output::{
    from_csv, from_json, rows_to_csv, to_csv, to_json, write_results, CsvRow, OutputFormat,
    SweepRecord,
};
