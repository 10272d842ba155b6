//! Scenario runner for the `nls-core` soliton simulator: TOML scenarios,
//! output bundles (CSV/JSON/binary snapshots), convergence studies and the
//! `nls-lab` command line.

pub mod bundle;
pub mod config;
pub mod reference;
pub mod scenario;
pub mod study;
pub mod threads;

pub use config::{Horizon, Scenario, ScenarioKind};
pub use scenario::{run_scenario, Check, ScenarioReport};
