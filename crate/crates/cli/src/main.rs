use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use eventum_cli::commands::{self, CommandOutput, Engine};
use eventum_cli::config::SEED_ENV;
use eventum_cli::{CliError, Experiment, ExperimentConfig, Overrides};

/// Atom-cat quantum filtering experiments.
///
/// Exit status: 0 on success, 1 when a check fails, 2 on a usage error.
#[derive(Parser, Debug)]
#[command(name = "eventum", version)]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON experiment config (defaults to the shipped configs/default.json).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Write the table or record stream here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// RNG seed; falls back to EVENTUM_SEED, then the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo sample count (expect --engine mc, trajectories).
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Event-count truncation of the quadrature engine.
    #[arg(long, global = true)]
    nmax: Option<usize>,
    /// Emission rate.
    #[arg(long, global = true)]
    nu: Option<f64>,
    /// Horizon of the observation window.
    #[arg(long, global = true)]
    r: Option<f64>,
    /// Real part of the ground amplitude.
    #[arg(long, global = true, allow_hyphen_values = true)]
    alpha_re: Option<f64>,
    /// Imaginary part of the ground amplitude.
    #[arg(long, global = true, allow_hyphen_values = true)]
    alpha_im: Option<f64>,
    /// Real part of the excited amplitude.
    #[arg(long, global = true, allow_hyphen_values = true)]
    beta_re: Option<f64>,
    /// Imaginary part of the excited amplitude.
    #[arg(long, global = true, allow_hyphen_values = true)]
    beta_im: Option<f64>,
    /// Phase rate of the lowering operator.
    #[arg(long, global = true, allow_hyphen_values = true)]
    epsilon: Option<f64>,
    /// Comma-separated ascending times in [0, r].
    #[arg(long, global = true, value_delimiter = ',')]
    t_grid: Option<Vec<f64>>,
    /// RK4 step.
    #[arg(long, global = true)]
    dt: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// RK4 master equation against the closed form.
    ///
    /// Columns: t, analytic rho (gg, ge re, ge im, ee), RK4 rho (same),
    /// max_deviation. Exits 1 if any deviation exceeds 1e-6.
    Decay,
    /// Expectation of a counting observable over the time grid.
    ///
    /// Columns: analytic `t,value`; quadrature `t,value,tail_mass`;
    /// mc `t,value,std_err,analytic,flagged` (flagged rows differ from the
    /// closed form by more than 4 standard errors and make the exit status 1).
    Expect {
        #[arg(long, value_enum, default_value_t = EngineArg::Analytic)]
        engine: EngineArg,
        /// One of N0, N1, Pi_empty, Pi_0, Pi_1.
        #[arg(long, default_value = "N1")]
        observable: String,
    },
    /// Sampled observation records with the filter replay, as JSON lines
    /// `{times, outcomes, class, eps_series, counts}`.
    ///
    /// A class-frequency summary goes to stderr.
    Trajectories {
        /// excited, ground, sigma_x, or 8 numbers: 4 real parts then 4
        /// imaginary parts of X, row-major.
        #[arg(long, num_args = 1..=8, default_value = "excited", allow_negative_numbers = true)]
        x: Vec<String>,
    },
    /// Pseudo-Hilbert identities: columns `t,check,deviation,status`.
    BelavkinCheck {
        #[arg(long, hide = true, allow_hyphen_values = true)]
        perturb_s: Option<f64>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EngineArg {
    Analytic,
    Quadrature,
    Mc,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Analytic => Engine::Analytic,
            EngineArg::Quadrature => Engine::Quadrature,
            EngineArg::Mc => Engine::Mc,
        }
    }
}

fn experiment(common: &Common) -> Result<Experiment, CliError> {
    let config = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let overrides = Overrides {
        nu: common.nu,
        r: common.r,
        alpha_re: common.alpha_re,
        alpha_im: common.alpha_im,
        beta_re: common.beta_re,
        beta_im: common.beta_im,
        epsilon: common.epsilon,
        t_grid: common.t_grid.clone(),
        n_max: common.nmax,
        samples: common.samples,
        seed: common.seed,
        dt: common.dt,
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    Experiment::resolve(config, &overrides, env_seed.as_deref())
}

fn dispatch(cli: &Cli) -> Result<CommandOutput, CliError> {
    let exp = experiment(&cli.common)?;
    for warning in &exp.warnings {
        eprintln!("warning: {warning}");
    }
    match &cli.command {
        Command::Decay => commands::decay(&exp),
        Command::Expect { engine, observable } => {
            let obs = commands::parse_observable(observable)?;
            commands::expect(&exp, &obs, (*engine).into())
        }
        Command::Trajectories { x } => {
            let x = commands::parse_x_spec(x)?;
            commands::trajectories(&exp, &x)
        }
        Command::BelavkinCheck { perturb_s } => commands::belavkin_check(&exp, *perturb_s),
    }
}

fn emit(out: &CommandOutput, path: Option<&PathBuf>) -> anyhow::Result<()> {
    match path {
        Some(path) => std::fs::write(path, &out.body)
            .with_context(|| format!("writing {}", path.display()))?,
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(out.body.as_bytes())?;
        }
    }
    for line in &out.summary {
        eprintln!("{line}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(out) => match emit(&out, cli.common.out.as_ref()) {
            Ok(()) if out.passed => ExitCode::SUCCESS,
            Ok(()) => ExitCode::from(1),
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
