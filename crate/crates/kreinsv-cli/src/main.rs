use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use kreinsv_cli::{run, Command, ExperimentConfig, Failure};

/// Singular-value asymptotics of resolvent differences for δ and δ′ interactions.
#[derive(Debug, Parser)]
#[command(name = "kreinsv", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// TOML experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set interaction.beta=3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Output file; overrides output.path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for mode sweeps.
    #[arg(long)]
    threads: Option<usize>,
}

fn execute(args: &Args) -> Result<(), Failure> {
    let text = match &args.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut cfg = ExperimentConfig::parse(&text, &args.sets).map_err(|e| Failure::Config(e.0))?;
    if let Some(out) = &args.out {
        cfg.output.path = Some(out.clone());
    }
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("--threads: {e}")))?;
    }
    let outcome = run(args.command, &cfg)?;
    let text = outcome.render(&cfg);
    match &cfg.output.path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Numerical(format!("{}: {e}", p.display())))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).ok();
        }
    }
    match outcome.failed {
        Some(reason) => Err(Failure::Check(reason)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.line());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
