use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "topodyn", version, about = "Compact dynamical systems: sensitivity time sets, combinatorial certificates, and relation probes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the runs of an experiment config (TOML or JSON)
    Run {
        config: PathBuf,
        /// worker pool size (falls back to TOPODYN_WORKERS, then all cores)
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Re-validate every certificate and witness embedded in a report
    Validate { report: PathBuf },
    /// Emit a stored series as CSV on stdout
    Plotdata {
        report: PathBuf,
        /// timeset | gaps | diam-profile
        #[arg(long, default_value = "timeset")]
        what: topodyn_cli::PlotSeries,
        /// which series of that kind within the report
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// List catalog systems with predicted properties
    Catalog,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, workers } => topodyn_cli::run(&config, workers),
        Command::Validate { report } => topodyn_cli::validate(&report),
        Command::Plotdata { report, what, index } => {
            let mut out = std::io::stdout().lock();
            topodyn_cli::plotdata(&report, what, index, &mut out)
        }
        Command::Catalog => {
            let mut out = std::io::stdout().lock();
            topodyn_cli::print_catalog(&mut out);
            0
        }
    };
    ExitCode::from(code as u8)
}
