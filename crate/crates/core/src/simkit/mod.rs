//! Scenarios, the simulation engine, trace export and the built-in examples.

pub mod builtin;
pub mod engine;
pub mod export;
pub mod scenario;

pub use builtin::builtin_scenarios;
pub use engine::{run, run_prepared, ControllerEvent, Sample, Trace};
pub use export::{export, Format};
pub use scenario::{GainSpec, PreparedScenario, Scenario, SCHEMA_VERSION};
