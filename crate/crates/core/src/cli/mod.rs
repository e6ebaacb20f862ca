//! The `isolindblad` command line: `simulate`, `solve-coefficients` and
//! `verify`.
//!
//! Exit codes are a stable contract: 0 success, 1 usage or config error,
//! 2 truncation leakage under `--strict`, 3 complete-positivity violation.

pub mod config;
pub mod simulate;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::isoenergetic::solve_oscillator_coefficients;
use crate::operators::ScheduleKind;
use crate::Error;
use config::{Auto, OmegaRef, OutputFormat, Overrides, RunConfig, StateKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_LEAKAGE: i32 = 2;
pub const EXIT_CP: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "isolindblad", version, about = "Energy-conserving Lindblad dynamics of a driven oscillator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Integrate the isoenergetic master equation described by a config file.
    Simulate(SimulateArgs),
    /// Solve the oscillator coefficient equations at one instant.
    SolveCoefficients(SolveArgs),
    /// Run the invariant suites on seeded random inputs.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Trajectory path, overriding `output.path`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit with code 2 when truncation leakage is detected.
    #[arg(long)]
    pub strict: bool,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub hbar: Option<f64>,
    /// A positive number or `auto`.
    #[arg(long, value_parser = parse_omega_ref)]
    pub omega_ref: Option<OmegaRef>,
    #[arg(long, value_parser = parse_schedule_kind)]
    pub kind: Option<ScheduleKind>,
    #[arg(long)]
    pub k0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub t_floor: Option<f64>,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub t1: Option<f64>,
    #[arg(long)]
    pub n_steps: Option<usize>,
    #[arg(long)]
    pub record_every: Option<usize>,
    #[arg(long, value_parser = parse_state)]
    pub state: Option<StateKind>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, value_parser = parse_format)]
    pub format: Option<OutputFormat>,
}

impl SimulateArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            dim: self.dim,
            hbar: self.hbar,
            omega_ref: self.omega_ref,
            kind: self.kind,
            k0: self.k0,
            rate: self.rate,
            t_floor: self.t_floor,
            t0: self.t0,
            t1: self.t1,
            n_steps: self.n_steps,
            record_every: self.record_every,
            state: self.state,
            beta: self.beta,
            path: self.out.clone(),
            format: self.format,
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub k: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub kdot: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 8, allow_negative_numbers = true)]
    pub dim: i64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub cases: usize,
}

fn parse_omega_ref(s: &str) -> Result<OmegaRef, String> {
    if s == "auto" {
        return Ok(OmegaRef::Keyword(Auto::Auto));
    }
    s.parse::<f64>().map(OmegaRef::Value).map_err(|_| format!("expected a number or `auto`, got `{s}`"))
}

fn parse_schedule_kind(s: &str) -> Result<ScheduleKind, String> {
    match s {
        "constant" => Ok(ScheduleKind::Constant),
        "linear" => Ok(ScheduleKind::Linear),
        "exponential" => Ok(ScheduleKind::Exponential),
        _ => Err(format!("expected constant, linear or exponential, got `{s}`")),
    }
}

fn parse_state(s: &str) -> Result<StateKind, String> {
    match s {
        "ground" => Ok(StateKind::Ground),
        "thermal" => Ok(StateKind::Thermal),
        _ => Err(format!("expected ground or thermal, got `{s}`")),
    }
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    match s {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        _ => Err(format!("expected csv or json, got `{s}`")),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::CpViolation { .. } => EXIT_CP,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (program name first) and runs the command, writing to the
/// given streams. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&a, out, err),
        Command::SolveCoefficients(a) => cmd_solve_coefficients(&a, out, err),
        Command::Verify(a) => cmd_verify(&a, out, err),
    }
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let config = match RunConfig::load(&args.config, &args.overrides()) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", args.config.display());
            return EXIT_USAGE;
        }
    };
    let (traj, summary) = match simulate::run_config(&config) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit_code(&e);
        }
    };
    if let Err(e) = simulate::write_outputs(&config.output.path, config.output.format, &traj, &summary) {
        let _ = writeln!(err, "error: writing {}: {e}", config.output.path.display());
        return EXIT_USAGE;
    }
    let _ = writeln!(out, "{}", simulate::summary_line(&traj, &summary));
    for w in &traj.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    if args.strict && traj.has_leakage() {
        return EXIT_LEAKAGE;
    }
    EXIT_OK
}

pub fn cmd_solve_coefficients(args: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    if !(args.hbar.is_finite() && args.hbar > 0.0) {
        let _ = writeln!(err, "error: --hbar must be positive, got {}", args.hbar);
        return EXIT_USAGE;
    }
    match solve_oscillator_coefficients(args.k, args.kdot, args.hbar) {
        Ok(sol) => {
            let _ = writeln!(out, "{}", serde_json::to_string(&sol).expect("solution serialises"));
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let dim = match usize::try_from(args.dim) {
        Ok(d) if d >= verify::MIN_DIM => d,
        _ => {
            let _ = writeln!(
                err,
                "error: dimension too small: --dim {} (need {} to {})",
                args.dim,
                verify::MIN_DIM,
                verify::MAX_DIM
            );
            return EXIT_USAGE;
        }
    };
    if dim > verify::MAX_DIM {
        let _ = writeln!(err, "error: --dim {dim} exceeds {} (dense oracle checks)", verify::MAX_DIM);
        return EXIT_USAGE;
    }
    if args.cases == 0 {
        let _ = writeln!(err, "error: --cases must be at least 1");
        return EXIT_USAGE;
    }
    let report = verify::run_suites(dim, args.seed, args.cases);
    let _ = write!(out, "{}", report.render());
    if report.all_passed() {
        EXIT_OK
    } else {
        EXIT_USAGE
    }
}
