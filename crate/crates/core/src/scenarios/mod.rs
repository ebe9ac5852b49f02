//! Configuration-driven experiment runner: scenario files, parameter sweeps,
//! CSV tables and channel classification.

pub mod classify;
pub mod config;
pub mod presets;
pub mod run;

pub use classify::{classify_channel, classify_scenario, ClassifyReport, AGREEMENT_TOL};
pub use config::{Protocol, ScenarioConfig, ScenarioPoint, SweepConfig, DEFAULT_K_W0, OP_NAMES};
pub use presets::{preset, preset_names, PRESETS};
pub use run::{emit_csv, run_scenario, write_csv, SweepRow, SweepTable, CSV_DIGITS, INVARIANCE_TOL};
