//! Scenario runner for the HCSNet simulator: configuration, the CoMP and
//! handover experiments, parameter sweeps, CSV artifacts and SVG plots.

pub mod config;
pub mod error;
pub mod output;
pub mod plot;
pub mod scenario;
pub mod sweep;

pub use config::{parse_config, ScenarioConfig};
pub use error::{SimError, SimResult};
pub use scenario::{run_scenario, ScenarioOutput};
pub use sweep::{run_sweep, SweepSpec};
