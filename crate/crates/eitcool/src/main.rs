use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use eitcool::config::Scenario;
use eitcool::output::write_report;
use eitcool::runner::{run_scenario, settings, with_pool, worker_count, Overrides, WORKERS_ENV};
use eitcool::RunError;

#[derive(Parser)]
#[command(name = "eitcool", version, about = "EIT and double-bright EIT cooling simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its CSV outputs.
    Run {
        scenario: PathBuf,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Worker threads (default: $EITCOOL_WORKERS, else the CPU count).
        #[arg(long)]
        workers: Option<usize>,
        /// Fock-space dimension, overriding the scenario.
        #[arg(long)]
        fock: Option<usize>,
        /// Integrator tolerance per unit of Γt, overriding the scenario.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Also write a gnuplot script next to every CSV.
        #[arg(long)]
        gnuplot_stub: bool,
    },
    /// Parse a scenario and print it back in canonical form.
    Check { scenario: PathBuf },
}

fn run(cmd: Command) -> Result<(), RunError> {
    match cmd {
        Command::Check { scenario } => {
            let scn = Scenario::load(&scenario)?;
            print!("{}", scn.to_toml()?);
            Ok(())
        }
        Command::Run { scenario, out, workers, fock, tolerance, gnuplot_stub } => {
            let scn = Scenario::load(&scenario)?;
            let settings = settings(&scn, Overrides { fock, tolerance });
            let base = scenario.parent().map(|p| p.to_path_buf()).unwrap_or_default();
            let workers = worker_count(workers);
            log::info!("{} workers ({WORKERS_ENV} sets the default), fock = {}", workers, settings.fock);
            let start = Instant::now();
            let report = with_pool(workers, || run_scenario(&scn, &settings, &base))??;
            let elapsed = start.elapsed();
            for w in &report.warnings {
                log::warn!("{w}");
            }
            let paths = write_report(&out, scn.output_prefix(), &report, gnuplot_stub)?;
            println!("scenario {} ({})", scn.scenario.name, scn.experiment.kind());
            for (k, v) in &report.summary {
                println!("  {k} = {v}");
            }
            println!("  wall_time_s = {:.3}", elapsed.as_secs_f64());
            println!("wrote {} files to {}", paths.len(), out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
