//! `vscreen`: command-line front end for the screening runtime.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "vscreen", version, about = "Desk-scale virtual screening campaign runtime")]
struct Cli {
    /// Master seed for every stochastic stage (overrides a campaign's own).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Write a JSONL event trace here.
    #[arg(long, global = true)]
    trace: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a full campaign from a JSON config.
    Run(commands::run::Args),
    /// Compress a SMILES library line by line.
    Compress(commands::codec::CompressArgs),
    /// Restore a compressed library.
    Decompress(commands::codec::DecompressArgs),
    /// Train a dictionary on a SMILES corpus.
    TrainDict(commands::codec::TrainArgs),
    /// Write a seeded synthetic SMILES library.
    GenLibrary(commands::codec::GenArgs),
    /// Dock ligands into a pocket.
    Dock(commands::dock::Args),
    /// Simulate a task set on a cluster.
    SchedSim(commands::sched::Args),
    /// Autotune pipeline knobs.
    Tune(commands::tune::Args),
    /// Relative free energies for ligand pairs, or an analytic self-check.
    Fep(commands::fep::Args),
}

pub struct Globals {
    pub seed_override: Option<u64>,
    pub trace: Option<PathBuf>,
}

impl Globals {
    pub fn seed(&self) -> u64 {
        self.seed_override.unwrap_or(0)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let g = Globals { seed_override: cli.seed, trace: cli.trace };
    let result = match cli.command {
        Command::Run(a) => commands::run::main(a, &g),
        Command::Compress(a) => commands::codec::compress(a),
        Command::Decompress(a) => commands::codec::decompress(a),
        Command::TrainDict(a) => commands::codec::train(a),
        Command::GenLibrary(a) => commands::codec::generate(a, &g),
        Command::Dock(a) => commands::dock::main(a, &g),
        Command::SchedSim(a) => commands::sched::main(a, &g),
        Command::Tune(a) => commands::tune::main(a, &g),
        Command::Fep(a) => commands::fep::main(a, &g),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.inner);
            ExitCode::from(e.code)
        }
    }
}
