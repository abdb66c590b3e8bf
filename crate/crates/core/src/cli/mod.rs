//! The `hvlab` command line.

pub mod args;
pub mod commands;
pub mod output;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{HvError, Result};
use crate::models::discretize::default_grid_settings;
use crate::models::{discretize_paper_model, save_model};
use args::{parse_angle, resolve_seed, SEED_ENV};
use commands::{
    BackendKind, ChshConfig, CommandConfig, DecomposeConfig, Given, JointConfig, Level,
    MarginalConfig, SignalConfig, SiteArg, ValidateConfig, VerifyConfig,
};
use output::{parse_report, Format};

const DEFAULT_SAMPLES: u64 = 1_000_000;

#[derive(Debug, Parser)]
#[command(
    name = "hvlab",
    version,
    about = "Hidden-variable models of bipartite correlations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Joint outcome table for one setting pair or a sweep over lists of settings.
    Joint(JointArgs),
    /// Outcome marginals with W (and for `abu` also V) averaged out, over a grid of hidden-variable values.
    Marginal(MarginalArgs),
    /// Remote-setting dependence: observable marginals, marginals given (U, V), or full response tables.
    Signal(SignalArgs),
    /// Split the hidden variables into a local part and a nonlocal part.
    Decompose(DecomposeArgs),
    /// CHSH value S = E(a0,b0) − E(a0,b1) + E(a1,b0) + E(a1,b1).
    Chsh(ChshArgs),
    /// Check on random models that locality given (U, V) implies observable non-signaling.
    #[command(name = "verify-eq6")]
    VerifyEq6(VerifyArgs),
    /// Validate a model file.
    Validate(ValidateArgs),
    /// Write the grid version of the arc-response model as a model file.
    Discretize(DiscretizeArgs),
    /// Re-run the command recorded in a JSON report.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SamplingArgs {
    #[arg(long, value_enum, default_value = "exact")]
    backend: BackendKind,
    /// Monte Carlo sample count per setting pair.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: u64,
    /// RNG seed; falls back to HVLAB_SEED, then 42.
    #[arg(long)]
    seed: Option<u64>,
    /// Sampling threads (default: available parallelism). Never changes results.
    #[arg(long)]
    workers: Option<usize>,
}

/// `paper`, `singlet`, `local-coin`, `paper-grid:N`, or a model file path.
#[derive(Debug, Args)]
struct ModelArg {
    #[arg(long, default_value = "paper")]
    model: String,
}

#[derive(Debug, Args)]
struct JointArgs {
    #[command(flatten)]
    model: ModelArg,
    /// Alice's settings: comma-separated radians or fractions like pi/4.
    #[arg(long, value_parser = parse_angle, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    a: Vec<f64>,
    /// Bob's settings.
    #[arg(long, value_parser = parse_angle, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    b: Vec<f64>,
    #[command(flatten)]
    sampling: SamplingArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct MarginalArgs {
    #[command(flatten)]
    model: ModelArg,
    #[arg(long, value_enum, default_value = "y")]
    site: SiteArg,
    /// `abuv`: condition on (u, v) and average W; `abu`: condition on u and average V and W.
    #[arg(long, value_enum, default_value = "abuv")]
    given: Given,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    a: f64,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    b: f64,
    /// Grid points for a continuous hidden variable.
    #[arg(long, default_value_t = 360)]
    points: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct SignalArgs {
    #[command(flatten)]
    model: ModelArg,
    #[arg(long, value_enum, default_value = "observable")]
    level: Level,
    #[command(flatten)]
    sampling: SamplingArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    #[command(flatten)]
    model: ModelArg,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct ChshArgs {
    #[command(flatten)]
    model: ModelArg,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "0")]
    a0: f64,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "pi/2")]
    a1: f64,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "pi/4")]
    b0: f64,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "3pi/4")]
    b1: f64,
    #[command(flatten)]
    sampling: SamplingArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Number of random models.
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Index of a model whose W table is replaced by a signaling one.
    #[arg(long)]
    inject: Option<usize>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    path: String,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct DiscretizeArgs {
    #[arg(long, default_value_t = 360)]
    points: usize,
    /// Write the model file here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    report: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    out: OutputArgs,
}

/// Exit code and captured output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn error(e: impl std::fmt::Display) -> Self {
        Outcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        }
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Runs `argv` (program name first), reading the seed fallback from the environment.
pub fn run(argv: &[String]) -> Outcome {
    let env = std::env::var(SEED_ENV).ok();
    run_with_env(argv, env.as_deref())
}

/// Like [`run`] with an explicit value for `HVLAB_SEED`.
pub fn run_with_env(argv: &[String], seed_env: Option<&str>) -> Outcome {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match dispatch(cli.command, seed_env) {
        Ok(o) => o,
        Err(e) => Outcome::error(e),
    }
}

fn emit(text: String, output: Option<&Path>) -> Result<Outcome> {
    match output {
        Some(path) => {
            fs::write(path, text).map_err(|source| HvError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            Ok(Outcome {
                code: 0,
                stdout: String::new(),
                stderr: String::new(),
            })
        }
        None => Ok(Outcome {
            code: 0,
            stdout: text,
            stderr: String::new(),
        }),
    }
}

fn execute(config: CommandConfig, workers: Option<usize>, out: &OutputArgs) -> Result<Outcome> {
    let report = config.execute(workers.unwrap_or_else(default_workers))?;
    emit(report.render(out.format), out.output.as_deref())
}

fn require_settings(name: &str, xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(HvError::Domain(format!(
            "--{name} needs at least one setting"
        )));
    }
    Ok(())
}

fn dispatch(command: Command, seed_env: Option<&str>) -> Result<Outcome> {
    let seed = |flag: Option<u64>| resolve_seed(flag, seed_env);
    match command {
        Command::Joint(a) => {
            require_settings("a", &a.a)?;
            require_settings("b", &a.b)?;
            let cfg = JointConfig {
                model: a.model.model,
                a: a.a,
                b: a.b,
                backend: a.sampling.backend,
                samples: a.sampling.samples,
                seed: seed(a.sampling.seed)?,
            };
            execute(CommandConfig::Joint(cfg), a.sampling.workers, &a.out)
        }
        Command::Marginal(a) => {
            let cfg = MarginalConfig {
                model: a.model.model,
                site: a.site,
                given: a.given,
                a: a.a,
                b: a.b,
                points: a.points,
            };
            execute(CommandConfig::Marginal(cfg), None, &a.out)
        }
        Command::Signal(a) => {
            let cfg = SignalConfig {
                model: a.model.model,
                level: a.level,
                backend: a.sampling.backend,
                samples: a.sampling.samples,
                seed: seed(a.sampling.seed)?,
            };
            execute(CommandConfig::Signal(cfg), a.sampling.workers, &a.out)
        }
        Command::Decompose(a) => execute(
            CommandConfig::Decompose(DecomposeConfig {
                model: a.model.model,
            }),
            None,
            &a.out,
        ),
        Command::Chsh(a) => {
            let cfg = ChshConfig {
                model: a.model.model,
                a0: a.a0,
                a1: a.a1,
                b0: a.b0,
                b1: a.b1,
                backend: a.sampling.backend,
                samples: a.sampling.samples,
                seed: seed(a.sampling.seed)?,
            };
            execute(CommandConfig::Chsh(cfg), a.sampling.workers, &a.out)
        }
        Command::VerifyEq6(a) => {
            let cfg = VerifyConfig {
                count: a.count,
                seed: seed(a.seed)?,
                inject: a.inject,
            };
            execute(CommandConfig::VerifyEq6(cfg), None, &a.out)
        }
        Command::Validate(a) => execute(
            CommandConfig::Validate(ValidateConfig { path: a.path }),
            None,
            &a.out,
        ),
        Command::Discretize(a) => {
            let model = discretize_paper_model(a.points)?;
            if default_grid_settings(a.points).is_empty() {
                return Err(HvError::Domain(format!(
                    "no multiple of π/4 lies on the {}-point grid",
                    a.points
                )));
            }
            match a.output {
                Some(path) => {
                    save_model(&model, &path)?;
                    Ok(Outcome {
                        code: 0,
                        stdout: String::new(),
                        stderr: String::new(),
                    })
                }
                None => {
                    let text =
                        serde_json::to_string(&model.to_file()).expect("model file serializes");
                    Ok(Outcome {
                        code: 0,
                        stdout: text + "\n",
                        stderr: String::new(),
                    })
                }
            }
        }
        Command::Replay(a) => {
            let text = fs::read_to_string(&a.report).map_err(|source| HvError::Io {
                path: a.report.clone(),
                source,
            })?;
            let parsed = parse_report(&text, &a.report)?;
            let cfg = CommandConfig::from_report(&parsed.command, parsed.config)?;
            execute(cfg, a.workers, &a.out)
        }
    }
}

/// Entry point used by the binary: prints captured output and returns the exit code.
pub fn main_with_args(argv: &[String]) -> i32 {
    let o = run(argv);
    print!("{}", o.stdout);
    eprint!("{}", o.stderr);
    o.code
}
