//! `ambimerton`: robust consumption and portfolio rules from a TOML config.
//!
//! Exit codes: 0 success, 1 invalid input or config, 2 tolerance or saddle
//! check failed, 3 numerical failure inside a solver.

mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{Format, RunConfig};
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "ambimerton", version, about = "Consumption and portfolio choice under drift, volatility and rate ambiguity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Regimes, worst-case parameters, weights, beta and the value at t = 0.
    Policy(Common),
    /// Regime labels along a sweep of mu_lo or rate_lo.
    Regions(Common),
    /// Finite-difference HJB solve checked against the closed form.
    Verify(Common),
    /// Monte Carlo minimax table over constant priors and weights.
    Minimax(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Overrides [mc] seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the solvers.
    #[arg(long, env = "AMBIMERTON_THREADS")]
    threads: Option<usize>,
    /// Omit the timestamp so identical runs give identical bytes.
    #[arg(long)]
    reproducible: bool,
}

/// Text to write and whether the command's own check passed.
struct Rendered {
    body: String,
    passed: bool,
    status: Option<String>,
}

fn unsupported(command: &'static str, format: Format) -> CliError {
    CliError::UnsupportedFormat {
        command,
        format: format.as_str(),
    }
}

fn render(command: &Command, common: &Common, cfg: &RunConfig) -> Result<Rendered> {
    let format = common
        .format
        .or(cfg.output.format)
        .unwrap_or(Format::Json);
    let repro = common.reproducible;
    let plain = |body| Rendered {
        body,
        passed: true,
        status: None,
    };
    match command {
        Command::Policy(_) => {
            let r = commands::policy(cfg)?;
            match format {
                Format::Json => Ok(plain(output::json("policy", &r, repro)?)),
                Format::Csv => Ok(plain(output::policy_csv(&r)?)),
                Format::Svg => Err(unsupported("policy", format)),
            }
        }
        Command::Regions(_) => {
            let r = commands::regions(cfg)?;
            Ok(plain(match format {
                Format::Json => output::json("regions", &r, repro)?,
                Format::Csv => output::regions_csv(&r)?,
                Format::Svg => output::regions_svg(&r),
            }))
        }
        Command::Verify(_) => {
            let (r, surface) = commands::verify(cfg)?;
            let body = match format {
                Format::Json => output::json("verify", &r, repro)?,
                Format::Csv => {
                    let stride = cfg
                        .grid
                        .as_ref()
                        .and_then(|g| g.csv_stride)
                        .unwrap_or((r.nt / 100).max(1));
                    output::surface_csv(&surface, stride)?
                }
                Format::Svg => return Err(unsupported("verify", format)),
            };
            Ok(Rendered {
                body,
                passed: r.passed,
                status: Some(r.message),
            })
        }
        Command::Minimax(_) => {
            if format == Format::Svg {
                return Err(unsupported("minimax", format));
            }
            let r = commands::minimax(cfg, common.seed)?;
            let body = match format {
                Format::Csv => output::minimax_csv(&r)?,
                _ => output::json("minimax", &r, repro)?,
            };
            Ok(Rendered {
                body,
                passed: r.saddle.saddle_holds,
                status: Some(r.message),
            })
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let common = match &cli.command {
        Command::Policy(c) | Command::Regions(c) | Command::Verify(c) | Command::Minimax(c) => c,
    };
    let cfg = RunConfig::load(&common.config)?;
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let rendered = render(&cli.command, common, &cfg)?;
    match common.out.as_ref().or(cfg.output.path.as_ref()) {
        Some(path) => std::fs::write(path, &rendered.body).map_err(|source| CliError::Write {
            path: path.clone(),
            source,
        })?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(rendered.body.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Write {
                    path: PathBuf::from("<stdout>"),
                    source,
                })?;
        }
    }
    if let Some(status) = rendered.status {
        eprintln!("{status}");
    }
    Ok(rendered.passed)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
