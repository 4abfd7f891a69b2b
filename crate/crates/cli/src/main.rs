//! `hhvix`: command-line front end for the Heston-Hawkes VIX pricer.
//!
//! Exit codes: 0 success, 1 domain or admissibility failure, 2 usage or
//! parse error, 3 numerical failure. Errors are also printed to stderr as
//! a JSON object `{"error": {"kind", "message", "exit_code"}}`.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "hhvix", version, about = "European VIX options under the Heston-Hawkes model")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Monte Carlo seed, overriding `sim.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Main output file, overriding `output.path` (default: stdout).
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Admissibility report: c_l, L_J, a_max and every condition.
    Validate,
    /// Fourier price of a VIX call.
    #[command(allow_negative_numbers = true)]
    Price(PriceArgs),
    /// Joint transform E[exp(phi v_T + psi lambda_T)] and its Riccati solution.
    #[command(allow_negative_numbers = true)]
    Charfn(CharfnArgs),
    /// Coefficients of VIX_T^2 = A v_T + B lambda_T + C.
    Vix,
    /// Monte Carlo estimate with its analytic counterpart.
    #[command(allow_negative_numbers = true)]
    Simulate(SimulateArgs),
    /// Transform and pricing integrand on a uniform phi_I grid.
    #[command(allow_negative_numbers = true)]
    DumpIntegrand(DumpArgs),
}

#[derive(Debug, Clone, Copy, Args)]
pub struct StateArgs {
    /// Valuation time t.
    #[arg(long = "valuation-time")]
    pub t: Option<f64>,
    /// Variance v_t at valuation time (default v0).
    #[arg(long)]
    pub v: Option<f64>,
    /// Intensity lambda_t at valuation time (default lambda0).
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ContractArgs {
    /// Strike K in VIX points.
    #[arg(long)]
    pub strike: Option<f64>,
    /// Option maturity T_mat in years.
    #[arg(long)]
    pub maturity: Option<f64>,
    /// Fraction of the admissible bound used as phi_R.
    #[arg(long)]
    pub phi_r_fraction: Option<f64>,
    #[command(flatten)]
    pub state: StateArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PriceArgs {
    #[command(flatten)]
    pub contract: ContractArgs,
    /// Write every quadrature sample as CSV (phi_I, integrand).
    #[arg(long, value_name = "PATH")]
    pub dump_integrand: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CharfnArgs {
    /// phi as `re` or `re,im`.
    #[arg(long, value_parser = parse_complex)]
    pub phi: Complex64,
    /// psi as `re` or `re,im`.
    #[arg(long, value_parser = parse_complex, default_value = "0")]
    pub psi: Complex64,
    #[command(flatten)]
    pub state: StateArgs,
    /// Uniform output grid size for the trajectory.
    #[arg(long, default_value_t = 512)]
    pub grid_points: usize,
    /// Write the trajectory as CSV (t, re_G, im_G, re_H, im_H, re_F, im_F).
    #[arg(long, value_name = "PATH")]
    pub trajectory: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Charfn,
    Price,
    ForwardVariance,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub target: Target,
    #[arg(long, value_parser = parse_complex)]
    pub phi: Option<Complex64>,
    #[arg(long, value_parser = parse_complex)]
    pub psi: Option<Complex64>,
    #[arg(long)]
    pub strike: Option<f64>,
    #[arg(long)]
    pub maturity: Option<f64>,
    /// Time for the forward-variance target (default T).
    #[arg(long)]
    pub time: Option<f64>,
    /// Number of paths, overriding `sim.n_paths`.
    #[arg(long)]
    pub paths: Option<usize>,
    /// Write per-path CSV (path_id, v_T, lambda_T, n_events).
    #[arg(long, value_name = "PATH")]
    pub paths_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DumpArgs {
    #[command(flatten)]
    pub contract: ContractArgs,
    /// Largest phi_I on the grid.
    #[arg(long, default_value_t = 200.0)]
    pub max_phi_i: f64,
    /// Number of grid points, endpoints included.
    #[arg(long, default_value_t = 401)]
    pub points: usize,
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |x: &str| x.parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected `re` or `re,im`, got {s:?}")),
    }
}

/// An error with its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: u8,
    pub kind: String,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, kind: "usage".into(), message: message.into() }
    }

    pub fn inadmissible(message: impl Into<String>) -> Self {
        Self { code: 1, kind: "inadmissible".into(), message: message.into() }
    }

    pub fn io(e: std::io::Error, path: &std::path::Path) -> Self {
        Self { code: 2, kind: "io".into(), message: format!("{}: {e}", path.display()) }
    }
}

impl From<hhvix::Error> for CliError {
    fn from(e: hhvix::Error) -> Self {
        use hhvix::Error as E;
        let mut root = &e;
        while let E::AtIndex { source, .. } = root {
            root = source;
        }
        let (code, kind) = match root {
            E::InvalidInput(_) => (2, "invalid_input"),
            E::NoAdmissibleC => (1, "no_admissible_c"),
            E::AssumptionViolated(_) => (1, "assumption_violated"),
            E::ShiftOutOfRange { .. } => (1, "shift_out_of_range"),
            E::SingularShift { .. } => (1, "singular_shift"),
            E::DomainViolation(_) => (1, "domain_violation"),
            E::NegativeVixSquared(_) => (1, "negative_vix_squared"),
            E::DegenerateDenominator { .. } => (3, "degenerate_denominator"),
            E::StepSizeUnderflow { .. } => (3, "step_size_underflow"),
            E::ExplosionGuard { .. } => (3, "explosion_guard"),
            E::OutOfGrid { .. } => (3, "out_of_grid"),
            E::QuadratureNotConverged(_) => (3, "quadrature_not_converged"),
            E::SchemeUnavailable(_) => (3, "scheme_unavailable"),
            E::AtIndex { .. } => unreachable!(),
        };
        Self { code, kind: kind.into(), message: e.to_string() }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(format!("thread pool: {e}")))?;
    }
    let path = cli.config.as_deref().ok_or_else(|| CliError::usage("--config PATH is required"))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        let mut sim = cfg.sim_config();
        sim.seed = seed;
        cfg.sim = Some(sim);
    }
    if let Some(out) = &cli.output {
        cfg.output.path = Some(out.display().to_string());
    }
    match &cli.command {
        Command::Validate => commands::validate(&cfg),
        Command::Price(a) => commands::price(&cfg, a).map(|_| 0),
        Command::Charfn(a) => commands::charfn(&cfg, a).map(|_| 0),
        Command::Vix => commands::vix(&cfg).map(|_| 0),
        Command::Simulate(a) => commands::simulate(&cfg, a).map(|_| 0),
        Command::DumpIntegrand(a) => commands::dump_integrand(&cfg, a).map(|_| 0),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let body = serde_json::json!({
                "error": { "kind": e.kind, "message": e.message, "exit_code": e.code }
            });
            eprintln!("{body}");
            ExitCode::from(e.code)
        }
    }
}
