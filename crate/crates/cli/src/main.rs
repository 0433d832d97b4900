//! `qspec`: runs filter, decoherence, Monte Carlo, spectroscopy and
//! non-Gaussianity experiments described by a TOML file and writes CSVs.

mod config;
mod error;
mod experiments;
mod table;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::{CliError, CliResult};
use crate::experiments::{read_config, ChiScan, Experiment, FilterDump, Reconstruct, Scan, Simulate, Witness};
use crate::table::{sha256_hex, write_outputs, Manifest};

#[derive(Debug, Parser)]
#[command(name = "qspec", version, about = "Noise spectroscopy with sequential measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Overrides the `seed` key of the configuration.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads (defaults to the available parallelism).
    #[arg(long, value_name = "N", env = "QSPEC_THREADS")]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Validate and print the derived timing without computing.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo correlators on one protocol.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Also write the first noise trajectory to trajectory.csv.
        #[arg(long)]
        dump_trajectory: bool,
    },
    /// Analytic decoherence function over the comb frequency grid.
    ChiScan {
        #[command(flatten)]
        common: Common,
    },
    /// Comb spectroscopy scan, analytic or Monte Carlo.
    Scan {
        #[command(flatten)]
        common: Common,
    },
    /// Spectrum reconstruction from decay rates.
    Reconstruct {
        #[command(flatten)]
        common: Common,
    },
    /// Non-Gaussianity witness sweep for quadratic noise.
    Witness {
        #[command(flatten)]
        common: Common,
    },
    /// Filter breakpoints and filter power spectrum.
    FilterDump {
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate { .. } => "simulate",
            Command::ChiScan { .. } => "chi-scan",
            Command::Scan { .. } => "scan",
            Command::Reconstruct { .. } => "reconstruct",
            Command::Witness { .. } => "witness",
            Command::FilterDump { .. } => "filter-dump",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Simulate { common, .. }
            | Command::ChiScan { common }
            | Command::Scan { common }
            | Command::Reconstruct { common }
            | Command::Witness { common }
            | Command::FilterDump { common } => common,
        }
    }
}

fn execute(cmd: &Command) -> CliResult<()> {
    let common = cmd.common();
    let (bytes, cfg) = read_config(&common.config)?;
    let seed = common.seed.or(cfg.seed).unwrap_or(0);
    let experiment: Box<dyn Experiment + Sync> = match cmd {
        Command::Simulate { dump_trajectory, .. } => Box::new(Simulate::prepare(&cfg, seed, *dump_trajectory)?),
        Command::ChiScan { .. } => Box::new(ChiScan::prepare(&cfg)?),
        Command::Scan { .. } => Box::new(Scan::prepare(&cfg, seed)?),
        Command::Reconstruct { .. } => Box::new(Reconstruct::prepare(&cfg, seed)?),
        Command::Witness { .. } => Box::new(Witness::prepare(&cfg, seed)?),
        Command::FilterDump { .. } => Box::new(FilterDump::prepare(&cfg)?),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    match common.threads {
        Some(0) => return Err(CliError::invalid("threads", "must be at least 1")),
        Some(n) => pool = pool.num_threads(n),
        None => {}
    }
    let pool = pool.build().map_err(|e| CliError::invalid("threads", e.to_string()))?;

    if common.dry_run {
        print!("{}", experiment.schedule().to_text());
        println!("configuration valid; nothing computed (--dry-run)");
        return Ok(());
    }

    let report = pool.install(|| experiment.run())?;
    let manifest = Manifest {
        experiment: cmd.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        config_sha256: sha256_hex(&bytes),
        outputs: BTreeMap::new(),
    };
    for path in write_outputs(&common.out, &report.tables, manifest)? {
        eprintln!("wrote {path}");
    }
    for note in &report.notes {
        println!("{note}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
