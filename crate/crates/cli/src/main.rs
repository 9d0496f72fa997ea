//! `flrd`: fit, cross-validate, predict, evaluate and simulate functional
//! linear regression with derivatives from CSV files.

mod commands;
mod config;
mod csv_io;
mod error;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "flrd", version, about = "Functional linear regression with derivatives")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model and write it to --model.
    Fit(Settings),
    /// Leave-one-out grid search over (alpha, beta).
    Cv(Settings),
    /// Predict responses for new curves with a saved model.
    Predict(Settings),
    /// Mean squared error of predictions against responses.
    Eval(Settings),
    /// Write a synthetic dataset with known truth into --out.
    Simulate(Settings),
}

/// Every configuration key, settable from the command line. Values given
/// here override the `--config` file.
#[derive(Args)]
struct Settings {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<std::path::PathBuf>,
    #[arg(long)]
    curves: Option<String>,
    #[arg(long)]
    responses: Option<String>,
    #[arg(long)]
    validation_curves: Option<String>,
    #[arg(long)]
    validation_responses: Option<String>,
    #[arg(long)]
    predictions: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// CSV of the fitted functions on a 512-point grid.
    #[arg(long)]
    plot_out: Option<String>,
    /// flrd or ridge.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    degree: Option<String>,
    #[arg(long)]
    domain_min: Option<String>,
    #[arg(long)]
    domain_max: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    /// Comma-separated positive values.
    #[arg(long)]
    alpha_grid: Option<String>,
    #[arg(long)]
    beta_grid: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    sigma_eps: Option<String>,
    #[arg(long)]
    decay: Option<String>,
    #[arg(long)]
    points: Option<String>,
}

impl Settings {
    fn resolve(self) -> CliResult<RunConfig> {
        let mut config = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        config.overlay([
            ("curves", self.curves),
            ("responses", self.responses),
            ("validation_curves", self.validation_curves),
            ("validation_responses", self.validation_responses),
            ("predictions", self.predictions),
            ("model", self.model),
            ("out", self.out),
            ("plot_out", self.plot_out),
            ("method", self.method),
            ("k", self.k),
            ("degree", self.degree),
            ("domain_min", self.domain_min),
            ("domain_max", self.domain_max),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("alpha_grid", self.alpha_grid),
            ("beta_grid", self.beta_grid),
            ("seed", self.seed),
            ("n", self.n),
            ("sigma_eps", self.sigma_eps),
            ("decay", self.decay),
            ("points", self.points),
        ]);
        Ok(config)
    }
}

fn run(command: Command) -> CliResult<commands::Report> {
    match command {
        Command::Fit(s) => commands::cmd_fit(&s.resolve()?),
        Command::Cv(s) => commands::cmd_cv(&s.resolve()?),
        Command::Predict(s) => commands::cmd_predict(&s.resolve()?),
        Command::Eval(s) => commands::cmd_eval(&s.resolve()?),
        Command::Simulate(s) => commands::cmd_simulate(&s.resolve()?),
    }
}

fn fail(err: &CliError) -> ExitCode {
    let message = err.to_string().replace('\n', " ");
    eprintln!("error:{}: {message}", err.kind());
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            let first = first.strip_prefix("error: ").unwrap_or(first);
            return fail(&CliError::Usage(first.to_string()));
        }
    };
    match run(cli.command) {
        Ok(report) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", report.stdout);
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
