use std::fs::File;
use std::io::{self, BufReader};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use vcalloc_cli::args::{resolve_dynamic, resolve_static, Cli, Command};
use vcalloc_cli::{emit_plot_data, run_experiment, AxisSpec, ExperimentConfig, UsageError};

fn execute(config: ExperimentConfig, print_config: bool) -> Result<()> {
    if print_config {
        print!("{}", config.to_toml());
        return Ok(());
    }
    for path in run_experiment(&config)? {
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Static(args) => execute(resolve_static(&args)?, args.common.print_config),
        Command::Dynamic(args) => execute(resolve_dynamic(&args)?, args.common.print_config),
        Command::Plotdata(args) => {
            let input = File::open(&args.input)
                .with_context(|| format!("opening {}", args.input.display()))?;
            let axes = AxisSpec {
                x: args.x,
                y: args.y,
                series: args.series,
            };
            if args.out.as_os_str() == "-" {
                emit_plot_data(BufReader::new(input), &axes, io::stdout().lock())
            } else {
                let out = File::create(&args.out)
                    .with_context(|| format!("creating {}", args.out.display()))?;
                emit_plot_data(BufReader::new(input), &axes, out)
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("usage error: {e:#}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
