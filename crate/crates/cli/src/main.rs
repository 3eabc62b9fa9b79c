use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use optiplace_cli::commands::{self, Common, Format};

/// Optimal sensor placement: construct, check and simulate.
#[derive(Parser)]
#[command(name = "optiplace", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Output file (positions scenario, report or trajectory CSV)
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Certificate tolerance; convergence tolerance for `simulate`
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

impl From<CommonArgs> for Common {
    fn from(a: CommonArgs) -> Self {
        Common { output: a.output, tol: a.tol, seed: a.seed, format: a.format }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build an optimal placement for the sensors in a scenario
    Construct {
        scenario: PathBuf,
        /// Also write the JSON report here
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Certify the sensor positions in a scenario
    Check {
        scenario: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the gradient-flow controller from the positions in a scenario
    Simulate {
        scenario: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Irregularity of a coefficient sequence
    Irregularity {
        #[arg(allow_negative_numbers = true)]
        values: Vec<f64>,
        #[arg(long, short)]
        dim: Option<usize>,
        /// Read coefficients from a scenario instead
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { commands::exit::USAGE as u8 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Construct { scenario, report, common } => {
            commands::construct(&scenario, report.as_deref(), &common.into())
        }
        Command::Check { scenario, common } => commands::check(&scenario, &common.into()),
        Command::Simulate { scenario, common } => commands::simulate(&scenario, &common.into()),
        Command::Irregularity { values, dim, scenario, common } => {
            commands::irregularity_cmd(&values, dim, scenario.as_deref(), &common.into())
        }
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
