//! Experiment harness for the `vcalloc` allocators and release simulator:
//! configuration, sweep presets, CSV output and plot-data extraction.

pub mod args;
pub mod config;
pub mod output;
pub mod plot;
pub mod presets;
pub mod run;

pub use config::{ExperimentConfig, Mode, SchedulerKind, StaticParams, Sweep, SweepVar};
pub use plot::{emit_plot_data, AxisSpec};
pub use presets::{apply_preset, PRESETS};
pub use run::run_experiment;

/// A problem with the configuration or command line rather than with a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}
