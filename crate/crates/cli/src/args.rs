use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{ExperimentConfig, Mode, SchedulerKind, Sweep, SweepVar};
use crate::presets::apply_preset;
use crate::UsageError;

#[derive(Debug, Parser)]
#[command(
    name = "vcalloc",
    version,
    about = "Deposit allocation and release-scheduling experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare the greedy allocator with the baselines on random instances.
    Static(StaticArgs),
    /// Simulate sequential and parallel releasing over a parameter sweep.
    Dynamic(DynamicArgs),
    /// Turn an experiment table into tidy (series, x, y) plot data.
    Plotdata(PlotArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Output CSV; the seed-averaged summary goes next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the effective config as TOML and exit.
    #[arg(long)]
    pub print_config: bool,
}

#[derive(Debug, Args)]
pub struct StaticArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub n_clients: Option<usize>,
    #[arg(long)]
    pub tasks_per_client: Option<usize>,
    #[arg(long)]
    pub cost_min: Option<f64>,
    #[arg(long)]
    pub cost_max: Option<f64>,
    #[arg(long)]
    pub ttp_ratio_min: Option<f64>,
    #[arg(long)]
    pub ttp_ratio_max: Option<f64>,
    #[arg(long)]
    pub budget_ratio: Option<f64>,
    #[arg(long)]
    pub fund_ratio: Option<f64>,
    #[arg(long)]
    pub delta_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DynamicArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Named sweep: cost_sweep, confirm_sweep, budget_sweep, heavy_sweep,
    /// fund_sweep, beta_sweep, alpha_sweep.
    #[arg(long)]
    pub preset: Option<String>,
    /// Sweep variable (see `--values` for the grid).
    #[arg(long)]
    pub sweep: Option<SweepVar>,
    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',', requires = "sweep")]
    pub values: Option<Vec<f64>>,
    /// Comma-separated subset of sequential, parallel.
    #[arg(long, value_delimiter = ',', value_parser = parse_scheduler)]
    pub schedulers: Option<Vec<SchedulerKind>>,
    /// Comma-separated α values; parallel releasing runs once per value.
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Per-task timeline dump.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub n_groups: Option<usize>,
    #[arg(long)]
    pub tasks_per_group: Option<usize>,
    #[arg(long)]
    pub cost_mean: Option<f64>,
    #[arg(long)]
    pub heavy_prob: Option<f64>,
    #[arg(long)]
    pub heavy_factor: Option<f64>,
    #[arg(long)]
    pub ttp_ratio: Option<f64>,
    #[arg(long)]
    pub budget_ratio: Option<f64>,
    #[arg(long)]
    pub confirm_time: Option<f64>,
    #[arg(long)]
    pub server_fund: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Experiment CSV written by `static` or `dynamic`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "sweep_value")]
    pub x: String,
    #[arg(long)]
    pub y: String,
    #[arg(long, default_value = "series")]
    pub series: String,
    /// Output path; `-` for standard output.
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

fn parse_scheduler(s: &str) -> Result<SchedulerKind, String> {
    match s {
        "sequential" => Ok(SchedulerKind::Sequential),
        "parallel" => Ok(SchedulerKind::Parallel),
        _ => Err(format!("unknown scheduler `{s}`")),
    }
}

fn base_config(common: &CommonArgs) -> Result<ExperimentConfig, UsageError> {
    match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| UsageError(format!("config {}: {e}", path.display())))?;
            ExperimentConfig::from_toml(&text)
        }
        None => Ok(ExperimentConfig::default()),
    }
}

fn apply_common(common: &CommonArgs, c: &mut ExperimentConfig) {
    if let Some(v) = &common.seeds {
        c.seeds = v.clone();
    }
    if let Some(v) = &common.out {
        c.out = v.clone();
    }
}

macro_rules! set {
    ($target:expr, $($field:ident),+ from $args:expr) => {
        $(if let Some(v) = $args.$field { $target.$field = v; })+
    };
}

/// Defaults, then the config file, then the preset, then individual flags.
pub fn resolve_static(args: &StaticArgs) -> Result<ExperimentConfig, UsageError> {
    let mut c = base_config(&args.common)?;
    c.mode = Mode::Static;
    apply_common(&args.common, &mut c);
    set!(c.static_params, n_clients, tasks_per_client, cost_min, cost_max, ttp_ratio_min,
        ttp_ratio_max, budget_ratio, fund_ratio, delta_fraction from args);
    c.validate()?;
    Ok(c)
}

pub fn resolve_dynamic(args: &DynamicArgs) -> Result<ExperimentConfig, UsageError> {
    let mut c = base_config(&args.common)?;
    c.mode = Mode::Dynamic;
    if let Some(name) = &args.preset {
        apply_preset(name, &mut c)?;
    }
    apply_common(&args.common, &mut c);
    if let Some(variable) = args.sweep {
        let values = args
            .values
            .clone()
            .or_else(|| {
                c.sweep
                    .as_ref()
                    .filter(|s| s.variable == variable)
                    .map(|s| s.values.clone())
            })
            .ok_or_else(|| UsageError("--sweep needs --values".into()))?;
        c.sweep = Some(Sweep { variable, values });
    }
    if let Some(v) = &args.schedulers {
        c.schedulers = v.clone();
    }
    if let Some(v) = &args.alpha {
        c.alphas = v.clone();
    }
    if let Some(v) = args.beta {
        c.beta = v;
    }
    if let Some(v) = &args.trace {
        c.trace = Some(v.clone());
    }
    set!(c.stream, tau, n_groups, tasks_per_group, cost_mean, heavy_prob, heavy_factor,
        ttp_ratio, budget_ratio, confirm_time, server_fund from args);
    c.validate()?;
    Ok(c)
}
