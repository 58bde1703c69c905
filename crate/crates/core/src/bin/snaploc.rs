use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use snaploc::check::run_checks;
use snaploc::pipeline::{compare_grids, grid_dump, run_algorithm1, ExperimentConfig};

#[derive(Parser)]
#[command(name = "snaploc", version, about = "POD snapshot location for heat-equation optimal control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its CSV outputs.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the equidistant and adaptive comparison tables.
    Compare {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the adaptive time grid for a coarse width and dof budget.
    GridDump {
        #[arg(long, default_value_t = 0.2)]
        dx: f64,
        #[arg(long, default_value_t = 21)]
        dof: usize,
        /// Optional config supplying problem parameters.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the built-in property checks.
    Check,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> snaploc::Result<ExitCode> {
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = run_algorithm1(&cfg)?;
            report.write(&cfg.output_dir)?;
            for (k, v) in report.summary() {
                println!("{k:>16}  {v}");
            }
            println!("outputs written to {}", cfg.output_dir.display());
        }
        Command::Compare { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let cmp = compare_grids(&cfg)?;
            cmp.write(&cfg.output_dir)?;
            println!("{:>6} {:>12} {:>12} | {:>6} {:>12} {:>12}", "n", "eps_y", "eps_u", "dof", "eps_y", "eps_u");
            for (e, a) in cmp.equidistant.iter().zip(&cmp.adaptive) {
                println!(
                    "{:>6} {:>12.4e} {:>12.4e} | {:>6} {:>12.4e} {:>12.4e}",
                    e.size, e.eps_y, e.eps_u, a.size, a.eps_y, a.eps_u
                );
            }
            println!("tables written to {}", cfg.output_dir.display());
        }
        Command::GridDump { dx, dof, config } => {
            let cfg = match config {
                Some(p) => ExperimentConfig::load(p)?,
                None => ExperimentConfig::default(),
            };
            let adapted = grid_dump(&cfg, dx, dof)?;
            adapted.grid.write_csv(std::io::stdout().lock())?;
        }
        Command::Check => {
            let results = run_checks()?;
            let mut ok = true;
            for r in &results {
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
                ok &= r.passed;
            }
            return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
    }
    Ok(ExitCode::SUCCESS)
}
