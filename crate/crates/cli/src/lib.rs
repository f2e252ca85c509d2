//! The `chl` command-line front end.
//!
//! Exit codes: 0 success, 1 domain or admissibility error, 2 numeric
//! failure or non-convergence, 3 usage error.

mod commands;
pub mod params;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use params::{Format, RunConfig, DEFAULT_SEED};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "chl",
    version,
    about = "Fully nonlinear conformal equations: operators, cones, profiles, radial solver, diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Invocation {
    /// JSON run config (or, for the solver commands, a solver config).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the resolved run config as JSON instead of running.
    #[arg(long)]
    emit_config: bool,
    #[command(flatten)]
    run: RunConfig,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate an operator at an eigenvalue tuple.
    Eval(Invocation),
    /// Gradient of an operator.
    Grad(Invocation),
    /// Sampled check of the structural conditions of an operator.
    Axioms(Invocation),
    /// Cone membership and boundary shift of an eigenvalue tuple.
    Cone(Invocation),
    /// Sampled check that Gamma_k lies in Sigma_delta.
    Inclusion(Invocation),
    /// Schouten eigenvalues of a profile at a point.
    Schouten(Invocation),
    /// Kelvin transform of a profile at a point.
    Kelvin(Invocation),
    /// Newton solve of a radial problem.
    Solve(Invocation),
    /// Continuation in the exponent p.
    #[command(name = "continue-p")]
    ContinueP(Invocation),
    /// Grid refinement study against the exact solution.
    Converge(Invocation),
    /// Cut-off gradient or Hessian monitor.
    Monitor(Invocation),
    /// Volume ratio curve of a radial metric.
    #[command(name = "bishop-gromov")]
    BishopGromov(Invocation),
    /// Harnack exponent and sampled Hölder seminorm.
    Harnack(Invocation),
}

impl Command {
    fn split(self) -> (&'static str, Invocation) {
        match self {
            Command::Eval(i) => ("eval", i),
            Command::Grad(i) => ("grad", i),
            Command::Axioms(i) => ("axioms", i),
            Command::Cone(i) => ("cone", i),
            Command::Inclusion(i) => ("inclusion", i),
            Command::Schouten(i) => ("schouten", i),
            Command::Kelvin(i) => ("kelvin", i),
            Command::Solve(i) => ("solve", i),
            Command::ContinueP(i) => ("continue-p", i),
            Command::Converge(i) => ("converge", i),
            Command::Monitor(i) => ("monitor", i),
            Command::BishopGromov(i) => ("bishop-gromov", i),
            Command::Harnack(i) => ("harnack", i),
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(chl_core::Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(chl_core::Error::Parse { .. }) => EXIT_USAGE,
            CliError::Core(e) if e.is_domain() => EXIT_DOMAIN,
            CliError::Core(_) | CliError::Io(_) => EXIT_NUMERIC,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<chl_core::Error> for CliError {
    fn from(e: chl_core::Error) -> Self {
        CliError::Core(e)
    }
}

/// What a command produced, in every format it supports.
pub struct Output {
    pub json: serde_json::Value,
    pub text: String,
    pub csv: Option<String>,
    /// Exit code to return after writing the output.
    pub exit: i32,
}

/// Parses `argv`, runs one subcommand and returns the exit code. Output
/// goes to `--out` or `stdout`, diagnostics to `stderr`.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    match dispatch(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let (name, inv) = cli.command.split();
    let cfg = resolve(name, inv.config.as_deref(), &inv.run)?;
    if inv.emit_config {
        let text = serde_json::to_string_pretty(&cfg).expect("run config serializes");
        writeln!(stdout, "{text}").map_err(|e| CliError::Io(e.to_string()))?;
        return Ok(EXIT_OK);
    }
    let format = cfg.format.unwrap_or(Format::Text);
    let output = commands::execute(name, &cfg)?;
    let payload = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&output.json).expect("output serializes");
            s.push('\n');
            s
        }
        Format::Text => output.text,
        Format::Csv => output
            .csv
            .ok_or_else(|| CliError::Usage(format!("`{name}` has no CSV output")))?,
    };
    match &cfg.out {
        Some(path) => std::fs::write(path, payload)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => stdout
            .write_all(payload.as_bytes())
            .map_err(|e| CliError::Io(e.to_string()))?,
    }
    Ok(output.exit)
}

/// Config file under flags, with the command name checked and unused
/// inputs rejected.
fn resolve(name: &str, config: Option<&Path>, flags: &RunConfig) -> Result<RunConfig, CliError> {
    let base = match config {
        Some(path) => load_config(name, path)?,
        None => RunConfig::default(),
    };
    if let Some(other) = &base.command {
        if other != name {
            return Err(CliError::Usage(format!(
                "config is for `{other}`, not `{name}`"
            )));
        }
    }
    let mut cfg = base.overlay(flags);
    cfg.command = Some(name.to_string());
    let allowed = commands::inputs(name);
    for field in cfg.set_fields() {
        if !allowed.contains(&field) && !["out", "format"].contains(&field) {
            return Err(CliError::Usage(format!("`{name}` does not take `{field}`")));
        }
    }
    Ok(cfg)
}

fn load_config(name: &str, path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let as_run = serde_json::from_str::<RunConfig>(&text);
    if commands::inputs(name).contains(&"solver") {
        if let Ok(solver) = chl_core::radial_solver::SolverConfig::from_json(&text) {
            return Ok(RunConfig {
                solver: Some(solver),
                ..RunConfig::default()
            });
        }
        if as_run.is_err() {
            // Report against the solver schema: that is the usual input.
            chl_core::radial_solver::SolverConfig::from_json(&text)?;
        }
    }
    as_run.map_err(|e| {
        CliError::Core(chl_core::Error::Parse {
            field: json_field(&e),
            message: e.to_string(),
        })
    })
}

fn json_field(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    for marker in ["unknown field `", "missing field `", "unknown variant `"] {
        if let Some(start) = msg.find(marker) {
            let rest = &msg[start + marker.len()..];
            if let Some(end) = rest.find('`') {
                return rest[..end].to_string();
            }
        }
    }
    format!("line {} column {}", e.line(), e.column())
}

/// `--seed`, else `CHL_SEED`, else [`DEFAULT_SEED`].
fn seed(cfg: &RunConfig) -> Result<u64, CliError> {
    if let Some(s) = cfg.seed {
        return Ok(s);
    }
    match std::env::var("CHL_SEED") {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("CHL_SEED is not an unsigned integer: {text:?}"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}
