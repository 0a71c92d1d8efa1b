use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "isoflow", version, about = "Heat-flow and exit-time verification runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a configuration file.
    Run {
        config: PathBuf,
        /// Output directory, overriding `[output] dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Double every grid resolution this many times.
        #[arg(long, default_value_t = 0)]
        refine: u32,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more checks failed; see summary.txt");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Run { config, out, refine } => {
            let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let cfg = isoflow::parse_config(&text)?;
            let out = out.unwrap_or_else(|| cfg.output_dir.clone());
            isoflow::run(&cfg, &out, refine)
        }
    }
}
