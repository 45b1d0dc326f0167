use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use trs_cli::config::{Axis, RunConfig};
use trs_cli::run::{run_simulate, run_sweep};
use trs_cli::selftest::run_selftest;
use trs_cli::CliError;

/// Transient linear response of a driven two-level system coupled to a
/// bosonic bath, under correlated and factorized initial conditions.
#[derive(Parser)]
#[command(name = "trs", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Figure preset: fig1, fig2, fig3 or fig4.
    #[arg(long)]
    preset: Option<String>,
    /// Config file (one `key = value` per line, `#` comments).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a single key, e.g. --set temperature=0.5. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (overrides the out_dir config key).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation: two trace CSVs plus a comparison report.
    Simulate(ConfigArgs),
    /// Run one comparison per value of a swept parameter.
    Sweep {
        /// Swept parameter: temperature, s, omega_c or omega_p.
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        values: Vec<f64>,
        #[command(flatten)]
        common: ConfigArgs,
    },
    /// Run the embedded analytic-identity checks.
    Selftest {
        /// Multiply every check tolerance by this factor.
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
    },
}

fn build_config(args: &ConfigArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.preset {
        Some(name) => RunConfig::preset(name)?,
        None => RunConfig::default(),
    };
    if let Some(path) = &args.config {
        cfg.apply_file(path)?;
    }
    for pair in &args.set {
        cfg.apply_set(pair)?;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.display().to_string();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn init_workers() {
    if let Ok(value) = std::env::var("TRS_WORKERS") {
        match value.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("warning: ignoring TRS_WORKERS='{value}' (expected a positive integer)"),
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => {
            let cfg = build_config(&args)?;
            let artifacts = run_simulate(&cfg)?;
            println!(
                "wrote {} and {}",
                artifacts.trace_paths[0].display(),
                artifacts.trace_paths[1].display()
            );
            println!("wrote {}", artifacts.report_path.display());
            Ok(())
        }
        Command::Sweep {
            axis,
            values,
            common,
        } => {
            let cfg = build_config(&common)?;
            let axis = Axis::from_str(&axis)?;
            let artifacts = run_sweep(&cfg, axis, &values)?;
            let failures = artifacts.points.iter().filter(|p| p.error.is_some()).count();
            println!(
                "wrote {} and {} ({} points, {failures} failed)",
                artifacts.json_path.display(),
                artifacts.csv_path.display(),
                artifacts.points.len()
            );
            Ok(())
        }
        Command::Selftest { tolerance_scale } => match run_selftest(tolerance_scale) {
            0 => Ok(()),
            code => std::process::exit(code),
        },
    }
}

fn main() -> ExitCode {
    init_workers();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
