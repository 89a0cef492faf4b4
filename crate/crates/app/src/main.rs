use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gelo_app::config::{Preset, RunConfig};
use gelo_app::csv_io;
use gelo_app::pipeline::{self, ConversionRequest, ConvergenceOutput, IdentifyOutput};
use gelo_app::{AppError, Result};

/// Elo and G-Elo ratings, decoupled prediction models and diagnostics.
#[derive(Parser)]
#[command(name = "gelo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset used when the configuration names none.
    #[arg(long)]
    preset: Option<Preset>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured number of realizations.
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args, Clone)]
struct DataArgs {
    #[command(flatten)]
    common: Common,
    /// Match log CSV; without one the configured simulation is used.
    #[arg(long)]
    matches: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one synthetic match log.
    Simulate(Common),
    /// Run the rating engine over a match log.
    Rank(DataArgs),
    /// Identify prediction models, or run the binary scale-fit study.
    Identify(DataArgs),
    /// Compare prediction methods by log-score.
    Evaluate(DataArgs),
    /// Convergence counters per checkpoint, or the ensemble study.
    Convergence(DataArgs),
    /// Convert a rating scale between bases and expected-score families.
    ConvertScale {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        scale: Option<f64>,
        /// Base of the exponential in the expected score.
        #[arg(long)]
        base: Option<f64>,
        #[arg(long)]
        hfa: Option<f64>,
        #[arg(long)]
        levels: Option<usize>,
        /// Free entries of a symmetric α, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alpha: Option<Vec<f64>>,
    },
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut config = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    config = config.with_preset_defaults(common.preset)?;
    if let Some(seed) = common.seed {
        config.seed = Some(seed);
    }
    if let Some(j) = common.realizations {
        config.realizations = Some(j);
    }
    Ok(config)
}

fn matches_arg(args: &DataArgs) -> Option<&Path> {
    args.matches.as_deref()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(common) => {
            let config = load_config(&common)?;
            let matches = pipeline::run_simulate(&config, &common.out_dir)?;
            println!("simulated {} matches into {}", matches.len(), common.out_dir.display());
        }
        Command::Rank(args) => {
            let config = load_config(&args.common)?;
            let log = pipeline::load_matches(&config, matches_arg(&args))?;
            let summary = pipeline::run_rank(&config, &log, &args.common.out_dir)?;
            println!(
                "ranked {} players over {} matches into {}",
                summary.players,
                summary.matches,
                args.common.out_dir.display()
            );
        }
        Command::Identify(args) => {
            let config = load_config(&args.common)?;
            match pipeline::run_identify(&config, matches_arg(&args), &args.common.out_dir)? {
                IdentifyOutput::Data(id) => {
                    for m in &id.models {
                        println!("{}: alpha {:?} eta {:.4} beta {:.4}", m.method, m.alpha, m.hfa, m.beta);
                    }
                    for (method, reason) in &id.failures {
                        println!("{method}: not identified ({reason})");
                    }
                }
                IdentifyOutput::Study(report) => print!("{}", report.to_table()),
            }
        }
        Command::Evaluate(args) => {
            let config = load_config(&args.common)?;
            let report = pipeline::run_evaluate(&config, matches_arg(&args), &args.common.out_dir)?;
            print!("{}", report.to_table());
            let failures = report.failures();
            if failures > 0 {
                println!("warnings: {failures} method evaluations failed");
            }
        }
        Command::Convergence(args) => {
            let config = load_config(&args.common)?;
            match pipeline::run_convergence(&config, matches_arg(&args), &args.common.out_dir)? {
                ConvergenceOutput::Checkpoints(list) => {
                    for (s, _) in list {
                        println!(
                            "{}: {} matches, share with Λ ≥ 1: {:.3}, Λ ≥ 2: {:.3}",
                            s.label, s.matches, s.fraction_lambda_ge_1, s.fraction_lambda_ge_2
                        );
                    }
                }
                ConvergenceOutput::Ensemble(e) => {
                    println!(
                        "converged variance {:.0} (predicted {:.0}), time constant {:.1}",
                        e.converged_variance, e.predicted_variance, e.time_constant
                    );
                }
            }
        }
        Command::ConvertScale {
            common,
            scale,
            base,
            hfa,
            levels,
            alpha,
        } => {
            let config = match (&common.config, common.preset) {
                (None, None) => None,
                _ => Some(load_config(&common)?),
            };
            let engine = config.as_ref().and_then(|c| c.engine.clone()).unwrap_or_default();
            let request = ConversionRequest {
                scale: scale
                    .or(engine.scale)
                    .ok_or_else(|| AppError::Config("--scale is required".into()))?,
                base: base.or(engine.base),
                hfa: hfa.or(engine.hfa).unwrap_or(0.0),
                levels: levels.or(if alpha.is_some() { engine.levels } else { None }),
                alpha,
            };
            let report = pipeline::convert_scale(&request)?;
            csv_io::write_json(&common.out_dir.join("conversion.json"), &report)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
