use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use quincunx::cli::config::{parse_unvalidated, ExperimentSpec, RwModeName};
use quincunx::cli::output::{emit_distributions, emit_sweep};
use quincunx::cli::{emit_csv, run_experiment};
use quincunx::Result;

#[derive(Parser)]
#[command(name = "quincunx", version, about = "Quantum walk on a circle of coherent states in a lossy cavity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the lossless walk, the classical baseline and the lossy walks.
    Run(Common),
    /// Print the lattice validity report and exit (no files written).
    Validate(Common),
    /// Write phase and quadrature distributions at one step.
    DumpDist {
        #[command(flatten)]
        common: Common,
        /// Step to dump.
        #[arg(long)]
        step: usize,
    },
    /// Sweep the loss parameter; writes sweep.csv next to the run files.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; omitted keys take their defaults.
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    fock_levels: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    /// Loss values, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    g: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    substeps: Option<usize>,
    #[arg(long, value_parser = ["ensemble", "monte_carlo"])]
    rw_mode: Option<String>,
    #[arg(long)]
    n_traj: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run even if the lattice conditions fail (recorded in provenance).
    #[arg(long)]
    allow_invalid_lattice: bool,
}

impl Common {
    fn spec(&self) -> Result<ExperimentSpec> {
        let mut spec = match &self.config {
            Some(path) => parse_unvalidated(&fs::read_to_string(path)?)?,
            None => ExperimentSpec::default(),
        };
        if let Some(v) = self.alpha {
            spec.alpha = v;
        }
        if let Some(v) = self.d {
            spec.d = v;
        }
        if let Some(v) = self.fock_levels {
            spec.fock_levels = v;
        }
        if let Some(v) = self.steps {
            spec.steps = v;
        }
        if let Some(v) = &self.g {
            spec.g_values = v.clone();
        }
        if let Some(v) = self.seed {
            spec.seed = v;
        }
        if let Some(v) = self.substeps {
            spec.substeps = v;
        }
        if let Some(v) = &self.rw_mode {
            spec.rw_mode = if v == "monte_carlo" {
                RwModeName::MonteCarlo
            } else {
                RwModeName::Ensemble
            };
        }
        if let Some(v) = self.n_traj {
            spec.n_traj = v;
        }
        if let Some(v) = &self.out {
            spec.out = v.clone();
        }
        spec.allow_invalid_lattice |= self.allow_invalid_lattice;
        Ok(spec)
    }
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Validate(common) => {
            let spec = common.spec()?;
            spec.check_parameters()?;
            let report = spec.lattice_report();
            println!("{report}");
            Ok(report.pass())
        }
        Command::Run(common) => {
            let spec = common.spec()?;
            let bundle = run_experiment(&spec)?;
            for path in emit_csv(&bundle, &spec.out)? {
                println!("wrote {}", path.display());
            }
            Ok(true)
        }
        Command::DumpDist { common, step } => {
            let mut spec = common.spec()?;
            spec.steps = spec.steps.max(step);
            let bundle = run_experiment(&spec)?;
            for path in emit_distributions(&bundle, step, &spec.out)? {
                println!("wrote {}", path.display());
            }
            Ok(true)
        }
        Command::Sweep(common) => {
            let spec = common.spec()?;
            let bundle = run_experiment(&spec)?;
            for path in emit_sweep(&bundle, &spec.out)? {
                println!("wrote {}", path.display());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::new()
        .filter_level(log::LevelFilter::Warn)
        .init();
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
