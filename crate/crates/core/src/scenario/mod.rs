//! Configured runs of the simulator and auditors, with CSV and JSON artifacts.

mod config;
mod run;

pub use config::{
    parse_list, parse_range, parse_window, Command, Constants, EnsembleConfig, EvolveConfig,
    FluxConfig, GridSpec, NodesConfig, QuantileConfig, ScenarioConfig, TrajectoriesConfig,
    OUTPUT_DIR_VAR,
};
pub use run::{build_state, fan_start_points, read_summary, run_scenario, RunOutcome, NODE_TOUCH};
