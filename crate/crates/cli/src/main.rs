use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use iqc_cli::commands::{self, Overrides};
use iqc_cli::{config, CliError};

#[derive(Parser)]
#[command(name = "iqc", version, about = "Stability certificates for delay systems via projection-based IQCs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SweepFlags {
    /// Comma-separated projection orders, e.g. 0,2,5,7
    #[arg(long)]
    orders: Option<String>,
    /// Delay grid as MIN:MAX:STEP
    #[arg(long)]
    grid: Option<String>,
    /// Strictness margin of the LMIs
    #[arg(long)]
    eps: Option<f64>,
    /// Skip the spectral oracle comparison
    #[arg(long)]
    no_oracle: bool,
}

impl SweepFlags {
    fn overrides(&self) -> Result<Overrides, CliError> {
        if let Some(e) = self.eps {
            if !(e > 0.0 && e.is_finite()) {
                return Err(CliError::Usage(format!("--eps must be positive, got {e}")));
            }
        }
        Ok(Overrides {
            orders: self.orders.as_deref().map(commands::parse_orders).transpose()?,
            grid: self.grid.as_deref().map(commands::parse_grid).transpose()?,
            eps: self.eps,
            no_oracle: self.no_oracle,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Certify a delay grid and write intervals.csv, verdicts.csv and summary.txt
    Certify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Recorded in every output (defaults to the config's validation seed)
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        sweep: SweepFlags,
    },
    /// Reproduce the chatter benchmark table and compare with the published values
    Table1 {
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        sweep: SweepFlags,
    },
    /// Run the randomized IQC, Bessel and filter-consistency suites
    Validate {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact stable delay intervals from the spectral oracle
    Oracle {
        /// Defaults to the bundled chatter benchmark
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the LMI problem at one (order, delay) in SDPA sparse format
    Sdpa {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        delay: f64,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn report(text: &str, failures: &[String]) -> Result<(), CliError> {
    print!("{text}");
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("{} check(s) failed:\n  {}", failures.len(), failures.join("\n  "))))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Certify { config, out, seed, sweep } => {
            let loaded = config::load(&config)?;
            let seed = seed.unwrap_or(loaded.config.validation.seed);
            let o = commands::cmd_certify(&loaded, &sweep.overrides()?, &out, seed)?;
            report(&o.text, &o.failures)
        }
        Command::Table1 { out, sweep } => {
            let o = commands::cmd_table1(&sweep.overrides()?, out.as_deref())?;
            report(&o.text, &o.failures)?;
            eprintln!("elapsed {:.1?}", o.elapsed);
            Ok(())
        }
        Command::Validate { seed, out } => {
            let o = commands::cmd_validate(seed, out.as_deref())?;
            report(&o.text, &o.failures)
        }
        Command::Oracle { config, grid, out } => {
            let loaded = match config {
                Some(p) => config::load(&p)?,
                None => config::chatter(),
            };
            let overrides = Overrides { grid: grid.as_deref().map(commands::parse_grid).transpose()?, ..Overrides::default() };
            let (_, text) = commands::cmd_oracle(&loaded, &overrides, out.as_deref())?;
            report(&text, &[])
        }
        Command::Sdpa { config, order, delay, eps, out } => {
            if !(delay > 0.0 && delay.is_finite()) {
                return Err(CliError::Usage(format!("--delay must be positive, got {delay}")));
            }
            let loaded = config::load(&config)?;
            commands::cmd_sdpa(&loaded, order, delay, eps, &out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
