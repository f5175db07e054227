//! The `ionsynth` command line: `synth`, `run` and `sweep`.

use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::harness::{self, OutputPaths};
use crate::iontools::TrapParams;
use crate::propagator::Mode;
use crate::synthesis::synthesize;
use crate::targets::{self, TargetOperator};

/// Exit status for malformed invocations.
pub const EXIT_USAGE: i32 = 1;
/// Exit status for failures while synthesizing, running or writing.
pub const EXIT_RUNTIME: i32 = 2;

const DEFAULT_RATIOS: [f64; 6] = [20.0, 50.0, 100.0, 200.0, 500.0, 1000.0];

#[derive(Parser, Debug)]
#[command(
    name = "ionsynth",
    version,
    about = "Compile and simulate trapped-ion pulse schedules for operators on a vibrational mode"
)]
struct Cli {
    #[command(subcommand)]
    command: CommandArgs,
}

#[derive(Subcommand, Debug)]
enum CommandArgs {
    /// Compile a target into a pulse schedule
    Synth(Flags),
    /// Compile (or load) a schedule and simulate one input
    Run(Flags),
    /// Fidelity and success probability over a list of chi / |g1| ratios
    Sweep(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// Built-in target: identity, qft, rotation or random
    #[arg(long, conflicts_with = "matrix")]
    target: Option<String>,
    /// Target matrix as JSON {"dim": d, "elements": [[re, im], ...]}
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Register dimension N + 1
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    eta_x: Option<f64>,
    #[arg(long)]
    eta_y: Option<f64>,
    /// chi / |g1|
    #[arg(long)]
    chi_ratio: Option<f64>,
    /// Comma-separated chi / |g1| ratios for sweep
    #[arg(long, value_delimiter = ',')]
    chi_ratios: Option<Vec<f64>>,
    /// ideal or full
    #[arg(long)]
    mode: Option<String>,
    /// uniform, basis:k or a JSON coefficient file
    #[arg(long)]
    input: Option<String>,
    /// Seed of the random target
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (schedule JSON, run JSON or sweep CSV)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Schedule JSON to run instead of compiling
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// JSON file with defaults for any of the flags above
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Flag values read from `--config`; command-line flags take precedence.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    target: Option<String>,
    matrix: Option<PathBuf>,
    dim: Option<usize>,
    eta_x: Option<f64>,
    eta_y: Option<f64>,
    chi_ratio: Option<f64>,
    chi_ratios: Option<Vec<f64>>,
    mode: Option<String>,
    input: Option<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    schedule: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Synth,
    Run,
    Sweep,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TargetSpec {
    Builtin(String),
    Matrix(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CliConfig {
    pub command: Command,
    pub target: TargetSpec,
    pub dim: usize,
    pub eta_x: f64,
    pub eta_y: f64,
    pub chi_ratio: f64,
    pub chi_ratios: Vec<f64>,
    pub mode: Mode,
    pub input: String,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub schedule: Option<PathBuf>,
}

impl CliConfig {
    pub fn params(&self) -> TrapParams {
        TrapParams::new(self.dim - 1)
            .with_eta(self.eta_x, self.eta_y)
            .with_chi_ratio(self.chi_ratio)
    }

    pub fn load_target(&self) -> Result<TargetOperator> {
        match &self.target {
            TargetSpec::Matrix(path) => targets::load_matrix(path),
            TargetSpec::Builtin(name) => match name.as_str() {
                "identity" => targets::identity(self.dim),
                "qft" => targets::qft(self.dim),
                "rotation" => targets::cyclic_rotation(self.dim),
                "random" => targets::random_unitary(self.dim, self.seed),
                other => Err(Error::Usage(format!(
                    "--target: unknown target '{other}' (expected identity, qft, rotation or random)"
                ))),
            },
        }
    }
}

fn read_config(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Usage(format!("--config {}: {e}", path.display())))
}

/// Parses `argv` (program name first) into a validated config.
pub fn parse_args<I, T>(argv: I) -> Result<CliConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::Usage(e.render().to_string()))?;
    let (command, flags) = match cli.command {
        CommandArgs::Synth(f) => (Command::Synth, f),
        CommandArgs::Run(f) => (Command::Run, f),
        CommandArgs::Sweep(f) => (Command::Sweep, f),
    };
    let file = match &flags.config {
        Some(path) => read_config(path)?,
        None => ConfigFile::default(),
    };

    let (target, matrix) = if flags.target.is_some() || flags.matrix.is_some() {
        (flags.target, flags.matrix)
    } else {
        (file.target, file.matrix)
    };
    let target = match (target, matrix) {
        (Some(_), Some(_)) => {
            return Err(Error::Usage(
                "--target and --matrix are mutually exclusive".into(),
            ))
        }
        (Some(name), None) => TargetSpec::Builtin(name),
        (None, Some(path)) => TargetSpec::Matrix(path),
        (None, None) => {
            return Err(Error::Usage(
                "one of --target or --matrix is required".into(),
            ))
        }
    };
    let dim = flags.dim.or(file.dim).unwrap_or(6);
    if dim == 0 {
        return Err(Error::Usage("--dim must be at least 1".into()));
    }
    let mode: Mode = flags
        .mode
        .or(file.mode)
        .as_deref()
        .unwrap_or("full")
        .parse()?;
    let chi_ratio = flags.chi_ratio.or(file.chi_ratio).unwrap_or(100.0);
    let chi_ratios = flags
        .chi_ratios
        .or(file.chi_ratios)
        .unwrap_or_else(|| DEFAULT_RATIOS.to_vec());
    for (flag, r) in std::iter::once(("--chi-ratio", &chi_ratio))
        .chain(chi_ratios.iter().map(|r| ("--chi-ratios", r)))
    {
        if !(*r > 0.0 && r.is_finite()) {
            return Err(Error::Usage(format!(
                "{flag}: ratios must be positive, got {r}"
            )));
        }
    }
    let eta_x = flags.eta_x.or(file.eta_x).unwrap_or(0.4);
    let eta_y = flags.eta_y.or(file.eta_y).unwrap_or(0.4);
    for (flag, eta) in [("--eta-x", eta_x), ("--eta-y", eta_y)] {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::Usage(format!(
                "{flag}: expected a non-negative number, got {eta}"
            )));
        }
    }
    Ok(CliConfig {
        command,
        target,
        dim,
        eta_x,
        eta_y,
        chi_ratio,
        chi_ratios,
        mode,
        input: flags
            .input
            .or(file.input)
            .unwrap_or_else(|| "uniform".into()),
        seed: flags.seed.or(file.seed).unwrap_or(0),
        out: flags.out.or(file.out),
        schedule: flags.schedule.or(file.schedule),
    })
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    }
}

/// Dispatches a parsed config, printing a summary; returns the exit status.
pub fn main(config: &CliConfig) -> i32 {
    match dispatch(config) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Parses `argv` and runs it.
pub fn run_from_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    if let Err(e) = Cli::try_parse_from(&argv) {
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            let _ = e.print();
            return 0;
        }
    }
    match parse_args(argv) {
        Ok(config) => main(&config),
        Err(Error::Usage(text)) => {
            let text = text.trim_end();
            if text.starts_with("error:") {
                eprintln!("{text}");
            } else {
                eprintln!("error: {text}");
            }
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.10}"))
        .unwrap_or_else(|| "undefined".into())
}

fn dispatch(config: &CliConfig) -> Result<()> {
    let target = config.load_target()?;
    // a matrix file carries its own dimension
    let mut config = config.clone();
    config.dim = target.dim();
    let params = config.params();
    match config.command {
        Command::Synth => {
            let schedule = synthesize(&target, &params)?;
            let paths = OutputPaths {
                schedule: config.out.as_deref(),
                ..OutputPaths::default()
            };
            harness::write_outputs(&paths, Some(&schedule), None, None)?;
            println!("target        {} (dim {})", target.name, target.dim());
            println!("pulses        {}", schedule.pulses.len());
            println!(
                "success prob  {:.10} per unit |V psi|^2",
                schedule.nominal_success_prob
            );
            println!(
                "ledger match  {}",
                schedule
                    .matching_convention
                    .map(|c| format!("{c:?}").to_lowercase())
                    .unwrap_or_else(|| "none".into())
            );
        }
        Command::Run => {
            let schedule = match &config.schedule {
                Some(path) => harness::load_schedule(path)?,
                None => synthesize(&target, &params)?,
            };
            let input = harness::parse_input(&config.input, target.dim())?;
            let result = harness::run(&schedule, &target, &input, config.mode)?;
            let paths = OutputPaths {
                run: config.out.as_deref(),
                ..OutputPaths::default()
            };
            harness::write_outputs(&paths, None, Some(&result), None)?;
            println!("target        {} (dim {})", target.name, target.dim());
            println!("mode          {}", result.mode.name());
            println!("pulses        {}", schedule.pulses.len());
            println!("fidelity      {}", fmt_opt(result.fidelity_vs_ideal));
            println!("success prob  {:.10}", result.success_prob);
            println!("guard occ.    {:.3e}", result.guard_occupancy);
        }
        Command::Sweep => {
            let input = harness::parse_input(&config.input, target.dim())?;
            let rows =
                harness::sweep_chi(&target, &config.chi_ratios, &input, &params, config.mode)?;
            match &config.out {
                Some(path) => {
                    let paths = OutputPaths {
                        sweep: Some(path),
                        ..OutputPaths::default()
                    };
                    harness::write_outputs(&paths, None, None, Some(&rows))?;
                }
                None => print!("{}", String::from_utf8_lossy(&harness::sweep_csv(&rows)?)),
            }
            let mut failed = 0;
            for row in &rows {
                match &row.error {
                    Some(e) => {
                        failed += 1;
                        eprintln!("chi/g1 {}: {e}", row.chi_ratio);
                    }
                    None if config.out.is_some() => println!(
                        "chi/g1 {:>10}  fidelity {}  success prob {}",
                        row.chi_ratio,
                        fmt_opt(row.fidelity),
                        fmt_opt(row.success_prob)
                    ),
                    None => {}
                }
            }
            if failed > 0 {
                return Err(Error::Internal(format!(
                    "{failed} of {} sweep rows failed",
                    rows.len()
                )));
            }
        }
    }
    Ok(())
}
