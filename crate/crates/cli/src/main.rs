use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ratchet_cli::{cmd_analyze, cmd_calibrate, cmd_run, cmd_sweep, exit_code, Overrides, Report};

/// Time-of-day price impact simulator.
///
/// Flags override the matching config fields; config fields override
/// built-in defaults.
#[derive(Parser)]
#[command(name = "ratchet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write the daily CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        days: Option<u32>,
        /// Daily CSV path; defaults to output.daily_csv in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split an OHLC or daily CSV into overnight and intraday returns.
    Analyze {
        #[arg(long)]
        csv: PathBuf,
        /// Decomposition report path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the scenario over a parameter grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Axis as name=v1,v2,...; repeat for a cartesian product.
        #[arg(long = "grid", required = true)]
        grid: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        days: Option<u32>,
        /// Sweep table path; defaults to output.sweep_csv, else stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Solve for the impact coefficient giving a target daily nudge.
    Calibrate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "target-bps")]
        target_bps: f64,
    },
}

fn emit(report: &Report) {
    print!("{}", report.render());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            seed,
            days,
            out,
        } => cmd_run(&config, &Overrides { seed, days, out }).map(|o| {
            emit(&o.report);
            0
        }),
        Command::Analyze { csv, out } => cmd_analyze(&csv, out.as_deref()).map(|o| {
            emit(&o.report);
            0
        }),
        Command::Sweep {
            config,
            grid,
            seed,
            days,
            out,
            workers,
        } => {
            let workers = workers.unwrap_or_else(|| {
                std::thread::available_parallelism().map_or(1, |n| n.get())
            });
            cmd_sweep(&config, &grid, &Overrides { seed, days, out }, workers).map(|o| {
                emit(&o.report);
                for cell in o.cells.iter() {
                    if let Err(e) = &cell.outcome {
                        eprintln!("cell {:?}: {e}", cell.params);
                    }
                }
                o.exit_code()
            })
        }
        Command::Calibrate { config, target_bps } => cmd_calibrate(&config, target_bps).map(|o| {
            emit(&o.report);
            0
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
