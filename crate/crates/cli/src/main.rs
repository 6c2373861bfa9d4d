use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use bifrac_cli::{run, Mode, Overrides, RunConfig};
use clap::Parser;

/// Boundedness classifier and numerical probes for bilinear fractional integrals.
///
/// Exit status: 0 bounded or success, 1 unbounded, 2 invalid input.
#[derive(Debug, Parser)]
#[command(name = "bifrac", version)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the mode in the configuration.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Write the primary output here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Maximum refinement depth of the adaptive scheme.
    #[arg(long)]
    depth: Option<u32>,
    /// Sample count of the quasi-random scheme.
    #[arg(long)]
    samples: Option<u64>,
    /// Grid points per axis; the rational divisor in sweep mode.
    #[arg(long)]
    grid: Option<usize>,
    /// Half-width of the integration box.
    #[arg(long)]
    trunc: Option<f64>,
}

fn execute(args: Args) -> Result<i32> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let mut cfg = RunConfig::from_json(&text)?;
    cfg.apply(&Overrides {
        mode: args.mode,
        out: args.out,
        seed: args.seed,
        depth: args.depth,
        samples: args.samples,
        grid: args.grid,
        trunc: args.trunc,
    });
    let outcome = run(&cfg)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, &outcome.body)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{}", outcome.body),
    }
    for (path, content) in &outcome.files {
        std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(outcome.code)
}

fn main() -> ExitCode {
    match execute(Args::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
