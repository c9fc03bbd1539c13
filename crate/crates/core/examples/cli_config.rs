//! Driving a command programmatically: the same path the `nlkg` binary takes.
//!
//!     cargo run --release --example cli_config

use nlkg::config::{Command, RunConfig};
use nlkg::run::run;

fn main() {
    let mut cfg = RunConfig::new(Command::Evolve);
    let text = "p = 1.85\nn_points = 1024\nt_final = 5\nz2 = 0.01\n";
    let outcome = cfg
        .apply_text(text)
        .and_then(|()| {
            cfg.out_dir = std::env::temp_dir().join("nlkg-example");
            run(&cfg)
        });
    match outcome {
        Ok(report) => {
            for line in &report.lines {
                println!("{line}");
            }
            for file in &report.files {
                println!("wrote {}", file.display());
            }
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
