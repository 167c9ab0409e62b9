use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use greenfn::config::{ExperimentConfig, Task};
use greenfn::output::run_to_dir;
use greenfn::{init_threads, reproduce, RunError};

#[derive(Parser)]
#[command(name = "greenfn", version, about = "Green's functions of small Hubbard models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed (overrides `seed` in the config).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the task named in the config.
    Run(Common),
    /// Run a canonical reproduction target.
    Reproduce {
        target: String,
        /// Root directory for the target's outputs.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    Vqe(Common),
    SsvqeGreen(Common),
    VqsGreen(Common),
    TrotterGreen(Common),
    ExactGreen(Common),
    Spectral(Common),
    MaeSweep(Common),
    Resources(Common),
}

fn load(common: &Common, task: Option<Task>) -> Result<ExperimentConfig, RunError> {
    let mut c = ExperimentConfig::load(&common.config)?;
    if let Some(t) = task {
        c.task = t;
    }
    if let Some(s) = common.seed {
        c.seed = s;
    }
    if let Some(o) = &common.out {
        c.output = o.clone();
    }
    c.validate()?;
    Ok(c)
}

fn execute(config: &ExperimentConfig) -> Result<(), RunError> {
    let out = run_to_dir(config, &config.output)?;
    println!("{}", serde_json::to_string_pretty(&out.summary).expect("json"));
    eprintln!("wrote {} files to {}", out.artifacts.len() + 2, config.output.display());
    Ok(())
}

fn main_inner(cli: Cli) -> Result<(), RunError> {
    init_threads()?;
    let (common, task) = match cli.command {
        Command::Reproduce { target, out, seed } => {
            for mut c in reproduce::targets(&target)? {
                if let Some(root) = &out {
                    let rel = c
                        .output
                        .strip_prefix("out")
                        .map(|p| p.to_path_buf())
                        .unwrap_or(c.output.clone());
                    c.output = root.join(rel);
                }
                if let Some(s) = seed {
                    c.seed = s;
                }
                execute(&c)?;
            }
            return Ok(());
        }
        Command::Run(c) => (c, None),
        Command::Vqe(c) => (c, Some(Task::Vqe)),
        Command::SsvqeGreen(c) => (c, Some(Task::SsvqeGreen)),
        Command::VqsGreen(c) => (c, Some(Task::VqsGreen)),
        Command::TrotterGreen(c) => (c, Some(Task::TrotterGreen)),
        Command::ExactGreen(c) => (c, Some(Task::ExactGreen)),
        Command::Spectral(c) => (c, Some(Task::Spectral)),
        Command::MaeSweep(c) => (c, Some(Task::MaeSweep)),
        Command::Resources(c) => (c, Some(Task::Resources)),
    };
    execute(&load(&common, task)?)
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
