use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, ValueEnum};
use expass::cli::{exit_code, run, Command, ExperimentConfig};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    Train,
    Oversmoothing,
    AblateTopk,
    Explain,
    Theory,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Train => Command::Train,
            Cmd::Oversmoothing => Command::Oversmoothing,
            Cmd::AblateTopk => Command::AblateTopk,
            Cmd::Explain => Command::Explain,
            Cmd::Theory => Command::Theory,
        }
    }
}

/// Explanation-directed message passing experiments.
#[derive(Parser, Debug)]
#[command(version)]
struct Args {
    command: Cmd,
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let command = Command::from(args.command);
    let mut cfg = match ExperimentConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e) as u8);
        }
    };
    if let Some(out) = args.out {
        cfg.out_dir = out;
    }
    match run(command, &cfg).with_context(|| format!("expass {command} failed")) {
        Ok(outcome) => {
            for line in &outcome.report {
                println!("{line}");
            }
            for f in &outcome.files {
                log::info!("wrote {}", f.display());
            }
            if outcome.violations > 0 {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<expass::Error>().map(exit_code).unwrap_or(1);
            ExitCode::from(code as u8)
        }
    }
}
