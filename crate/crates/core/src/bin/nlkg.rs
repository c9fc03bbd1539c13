use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use nlkg::config::{Command, RunConfig};
use nlkg::run::run;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sub {
    Spectrum,
    FgrScan,
    Evolve,
    Shoot,
    Virial,
    Selftest,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Command {
        match s {
            Sub::Spectrum => Command::Spectrum,
            Sub::FgrScan => Command::FgrScan,
            Sub::Evolve => Command::Evolve,
            Sub::Shoot => Command::Shoot,
            Sub::Virial => Command::Virial,
            Sub::Selftest => Command::Selftest,
        }
    }
}

/// Soliton laboratory for the 1D nonlinear Klein–Gordon equation.
///
/// Exit codes: 0 ok, 2 configuration error, 3 numerical failure, 4 selftest failure.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    #[arg(value_enum)]
    command: Sub,
    /// Flat `key = value` config file, applied before `--set`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set p=1.9`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn configure(cli: &Cli) -> nlkg::Result<RunConfig> {
    let mut cfg = RunConfig::new(cli.command.into());
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    for s in &cli.sets {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| nlkg::NlkgError::Config(format!("--set expects KEY=VALUE, got '{s}'")))?;
        cfg.set(k.trim(), v)?;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure(&cli).and_then(|cfg| run(&cfg));
    match result {
        Ok(report) => {
            for line in &report.lines {
                println!("{line}");
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(4)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
