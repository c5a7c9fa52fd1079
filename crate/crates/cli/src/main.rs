use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use omcache_cli::{configure_threads, run, CliError, Experiment, Flags, RunConfig};

#[derive(Parser)]
#[command(name = "omcache", version, about = "Optomechanical single-photon and GHZ-state experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write <name>.csv and <name>.meta.json
    Run {
        experiment: Experiment,
        /// `target`, `near-term`, or a path to an INI file
        #[arg(long, default_value = "target")]
        preset: String,
        /// Output directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// key=value override of a system parameter or experiment setting
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
        /// Bath temperature, K
        #[arg(long = "Tb")]
        t_b: Option<f64>,
        /// Detector efficiency
        #[arg(long = "eta-d")]
        eta_d: Option<f64>,
        /// Thermal phonon number
        #[arg(long = "n-th")]
        n_th: Option<f64>,
        /// Number of parallel sources
        #[arg(long = "N")]
        n: Option<usize>,
    },
    /// List the experiments
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads(std::env::var("OMCACHE_THREADS").ok().as_deref()) {
        eprintln!("omcache: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    match cli.command {
        Command::List => {
            for exp in Experiment::value_variants() {
                println!("{:<16} {}", exp.name(), exp.description());
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            experiment,
            preset,
            out,
            seed,
            sets,
            t_b,
            eta_d,
            n_th,
            n,
        } => {
            let cfg = RunConfig {
                experiment,
                preset,
                out,
                seed,
                sets,
                flags: Flags { t_b, eta_d, n_th, n },
            };
            match run(&cfg) {
                Ok(r) => {
                    println!("{}", r.csv.display());
                    println!("{}", r.meta.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    report(&e);
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}

fn report(e: &CliError) {
    eprintln!("omcache: {e}");
}
