use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use rmean_cli::config::{Overrides, RunConfig};
use rmean_core::curvature::ConstantMode;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Paper,
    Corrected,
}

/// Runs one analysis described by a TOML config and writes CSV traces and
/// a JSON report to the output directory.
#[derive(Debug, Parser)]
#[command(name = "rmean", version)]
struct Args {
    /// Run description (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, replacing `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    constant_mode: Option<Mode>,
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let overrides = Overrides {
        out: args.out,
        seed: args.seed,
        constant_mode: args.constant_mode.map(|m| match m {
            Mode::Paper => ConstantMode::Paper,
            Mode::Corrected => ConstantMode::Corrected,
        }),
        t_max: args.tmax,
        tol: args.tol,
    };
    let run = || -> anyhow::Result<_> {
        let mut cfg = RunConfig::load(&args.config)?;
        cfg.apply(&overrides);
        rmean_cli::execute(&cfg)
    };
    match run() {
        Ok(report) => {
            for s in &report.stages {
                println!("{:<20} {:<14} {}", s.name, s.verdict, s.summary);
            }
            if let Some(c) = &report.conclusion {
                println!(
                    "{:<20} {:<14} {}",
                    c.stage,
                    c.verdict,
                    c.statement.as_deref().unwrap_or(&c.reasons.join("; "))
                );
            }
            println!("report: {}", report.config.output.dir.join(&report.config.output.report).display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
