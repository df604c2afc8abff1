use crate::config::{ExperimentConfig, SchedulerKind, Sweep, SweepVar};
use crate::UsageError;

pub const PRESETS: [&str; 7] = [
    "cost_sweep",
    "confirm_sweep",
    "budget_sweep",
    "heavy_sweep",
    "fund_sweep",
    "beta_sweep",
    "alpha_sweep",
];

/// Applies a named sweep from the evaluation settings on top of `config`.
pub fn apply_preset(name: &str, config: &mut ExperimentConfig) -> Result<(), UsageError> {
    let sweep = |variable, values: &[f64]| {
        Some(Sweep {
            variable,
            values: values.to_vec(),
        })
    };
    match name {
        "cost_sweep" => config.sweep = sweep(SweepVar::Cost, &[8.0, 16.0, 32.0, 64.0, 128.0]),
        "confirm_sweep" => {
            config.sweep = sweep(
                SweepVar::ConfirmTime,
                &[0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0],
            )
        }
        "budget_sweep" => config.sweep = sweep(SweepVar::BudgetRatio, &[2.0, 2.5, 3.0, 3.5, 4.0]),
        "heavy_sweep" => config.sweep = sweep(SweepVar::HeavyProb, &[0.0, 0.1, 0.2, 0.3, 0.4, 0.5]),
        "fund_sweep" => {
            config.sweep = sweep(SweepVar::ServerFund, &[1.0, 2.0, 4.0, 8.0, 16.0, 32.0])
        }
        "beta_sweep" => {
            config.sweep = sweep(SweepVar::Beta, &[0.2, 0.4, 0.6, 0.8, 1.0]);
            config.schedulers = vec![SchedulerKind::Parallel];
            config.alphas = vec![0.0, 0.3, 0.6, 1.0];
        }
        "alpha_sweep" => {
            config.sweep = sweep(SweepVar::Alpha, &[0.0, 0.3, 0.6, 1.0]);
            config.schedulers = vec![SchedulerKind::Parallel];
        }
        other => {
            return Err(UsageError(format!(
                "unknown preset `{other}`; expected one of {}",
                PRESETS.join(", ")
            )))
        }
    }
    Ok(())
}
