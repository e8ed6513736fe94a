use clap::{Args, Parser, Subcommand};
use qrecon::cli::{run, Command, RunConfig};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "qrecon", version, about = "Quantum state reconstruction from incomplete data")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed for every stochastic step.
    #[arg(long)]
    seed: Option<u64>,
    /// Parameters as key=value.
    params: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// MaxEnt reconstruction of a field state on an observation level.
    FieldMaxent(Common),
    /// Simulated homodyne tomography with pattern and MaxEnt reconstructions.
    Tomo(Common),
    /// Spin MaxEnt on a preset or custom Pauli level.
    Spin(Common),
    /// Bayesian posterior mean from a measurement record.
    Bayes(Common),
    /// Optimal finite POVM and its fidelity audit.
    Povm(Common),
}

fn main() {
    let cli = Cli::parse();
    let (command, c) = match cli.cmd {
        Cmd::FieldMaxent(c) => (Command::FieldMaxent, c),
        Cmd::Tomo(c) => (Command::Tomo, c),
        Cmd::Spin(c) => (Command::Spin, c),
        Cmd::Bayes(c) => (Command::Bayes, c),
        Cmd::Povm(c) => (Command::Povm, c),
    };
    let cfg = match RunConfig::new(command, &c.params, c.out, c.seed) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    };
    let (code, res) = run(&cfg);
    match res {
        Ok(o) => print!("{}", o.summary),
        Err(e) => eprintln!("error: {e}"),
    }
    std::process::exit(code);
}
