use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use creasim::society::DEFAULT_ENUMERATION_CAP;
use creasim_cli::commands::{self, default_out};
use creasim_cli::CliError;

/// Simulate societies of creative agents on scale-free networks.
///
/// Exit codes: 0 success, 2 usage or configuration error, 3 invariant violation.
/// Set CREASIM_LOG (e.g. `info`, `debug`) for diagnostics on stderr.
#[derive(Debug, Parser)]
#[command(name = "creasim", version)]
struct Cli {
    /// Run seed (overrides the config seed for `run`; graph seed for `gen-network`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output file (`gen-network`) or directory (`run`, `analyze`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Suppress summaries on stdout.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Grow a Barabási–Albert graph; requires nodes >= max(m, 2).
    GenNetwork {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        m: usize,
    },
    /// Execute a society config and write events, snapshots, final state and manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compute metrics from a completed run directory.
    Analyze {
        #[arg(long)]
        run: PathBuf,
        /// Largest artefact space enumerated exhaustively.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        espace_cap: u64,
    },
    /// Print the form-of-creativity table for a config's categories.
    Classify {
        #[arg(long)]
        config: PathBuf,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::GenNetwork { nodes, m } => {
            let out = default_out(cli.out, "gen-network")?;
            let s = commands::gen_network(nodes, m, cli.seed.unwrap_or(0), &out)?;
            if !cli.quiet {
                println!("edges: {}", s.edges);
                println!("max_degree: {}", s.max_degree);
            }
        }
        Command::Run { config } => {
            let out = default_out(cli.out, "run")?;
            let m = commands::run(&config, cli.seed, &out)?;
            if !cli.quiet {
                println!("run_id: {}", m.run_id());
                println!("seed: {}", m.seed);
                println!("output: {}", out.display());
            }
        }
        Command::Analyze { run, espace_cap } => {
            let out = default_out(cli.out, "analyze")?;
            let r = commands::analyze(&run, &out, espace_cap)?;
            if !cli.quiet {
                println!("run_id: {}", r.run_id);
                println!("p_creative: {}", r.creativity.p_total);
                println!("h_creative: {}", r.creativity.h_total);
                println!("output: {}", out.display());
            }
        }
        Command::Classify { config } => {
            let rows = commands::classify(&config)?;
            print!("{}", commands::format_classification(&rows));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CREASIM_LOG", "warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
