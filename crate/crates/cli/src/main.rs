use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eigent::config::{Experiment, ExperimentConfig, IsingParams};
use eigent::experiments;
use eigent::Error;

/// Eigenstate entanglement experiments on spin-1/2 chains.
#[derive(Debug, Parser)]
#[command(name = "eigent", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Average eigenstate entropy and its finite-size correction.
    Figure1(Common),
    /// Eigenstate and average entanglement bounds.
    Bounds(Common),
    /// Random-basis toy model per magnetization sector.
    Modelm(Common),
    /// Page's formula against Monte Carlo.
    Page(Common),
    /// Quadratures of the toy-model asymptotics.
    Quadcheck(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Comma-separated chain lengths.
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    #[arg(long, allow_hyphen_values = true)]
    g: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    h: Option<f64>,
}

impl Command {
    fn split(self) -> (Experiment, Common) {
        match self {
            Command::Figure1(c) => (Experiment::Figure1, c),
            Command::Bounds(c) => (Experiment::Bounds, c),
            Command::Modelm(c) => (Experiment::Modelm, c),
            Command::Page(c) => (Experiment::Page, c),
            Command::Quadcheck(c) => (Experiment::Quadcheck, c),
        }
    }
}

fn build_config(experiment: Experiment, args: Common) -> Result<ExperimentConfig, Error> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    config.experiment = experiment;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = args.out {
        config.output_dir = out;
    }
    if let Some(threads) = args.threads {
        config.threads = threads;
    }
    if let Some(ns) = args.n_list {
        config.n_values = ns;
    }
    if args.g.is_some() || args.h.is_some() {
        let base = config.models.first().copied().unwrap_or(IsingParams { g: 1.05, h: 0.5 });
        config.models = vec![IsingParams { g: args.g.unwrap_or(base.g), h: args.h.unwrap_or(base.h) }];
    }
    Ok(config)
}

fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::Config(_) | Error::Domain(_) | Error::CapExceeded { .. } | Error::NotTranslationInvariant => 2,
        Error::Quadrature { .. } => 1,
        _ => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let (experiment, args) = Cli::parse().command.split();

    let result = build_config(experiment, args).and_then(|config| {
        let outcome = experiments::run(&config)?;
        let written = outcome.write(&config.output_dir)?;
        Ok((outcome, written))
    });
    match result {
        Ok((outcome, written)) => {
            for path in written {
                println!("{}", path.display());
            }
            if outcome.violations > 0 {
                log::error!("{} check(s) failed", outcome.violations);
            }
            if outcome.quadrature_failures > 0 {
                log::error!("{} quadrature(s) did not converge", outcome.quadrature_failures);
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
