//! Scenario front end: configuration files in, CSV tables plus metadata
//! sidecars and plot scripts out. This is everything the `dcgle` binary does
//! apart from argument handling.

mod config;
mod csv_out;
mod plot;
mod scenario;

pub use config::{
    parse_config, serialize_config, PerturbationKind, RangeSpec, ScanConfig, ScenarioConfig,
    SimConfig, SCENARIO_NAMES,
};
pub use csv_out::{Cell, CsvArtifact, Metadata};
pub use plot::{emit_plot_script, figure_tag_for};
pub use scenario::run_scenario;
