//! `sipsamp`: kernel lattices, reconstruction sweeps, verification reports
//! and bound estimates for the sinc sampling system.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;

use commands::{Outcome, Target};
use config::{Format, Perturbation, Range, RunConfig, Weights, CONFIG_ENV};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Bad flags, config or input: exit status 2.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Anything that stops a command before it can report pass/fail.
#[derive(Debug)]
pub enum Failure {
    Usage(UsageError),
    Library(sip_sampling::Error),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e)
    }
}

impl From<sip_sampling::Error> for Failure {
    fn from(e: sip_sampling::Error) -> Self {
        Failure::Library(e)
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(e) => write!(f, "{e}"),
            Failure::Library(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "sipsamp",
    version,
    about = "Semi-inner-product sampling on band-limited spaces"
)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// TOML file with any of the run settings (flags win). Defaults to $SIPSAMP_CONFIG.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Exponent p in (1, inf).
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Window half-width N.
    #[arg(long = "n-trunc", global = true, value_name = "N")]
    n_trunc: Option<usize>,
    /// Gauss–Legendre nodes per quadrature panel (>= 8).
    #[arg(long = "grid-order", global = true)]
    grid_order: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output file (default: stdout).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Move node t_J by DELTA; repeatable.
    #[arg(
        long = "perturb-node",
        global = true,
        value_name = "J=DELTA",
        allow_hyphen_values = true
    )]
    perturb_node: Vec<Perturbation>,
    /// One weight for every j, or `j=a,k=b,...` (others stay 1). Kernels are rescaled to match.
    #[arg(long, global = true, allow_hyphen_values = true)]
    weights: Option<Weights>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form kernel against quadrature on an (s, t) lattice.
    Kernel {
        #[arg(
            long = "s-range",
            default_value = "-5:5:41",
            allow_hyphen_values = true,
            value_name = "A:B:N"
        )]
        s_range: Range,
        #[arg(
            long = "t-range",
            default_value = "-5:5:41",
            allow_hyphen_values = true,
            value_name = "A:B:N"
        )]
        t_range: Range,
    },
    /// Sampling-series reconstruction of a named spectrum for N = 4..64.
    Reconstruct {
        /// `const`, `shift:<t0>` or `coswin`.
        #[arg(long, default_value = "const")]
        spectrum: String,
        /// Spectrum values on a grid (node,weight,re,im); overrides --spectrum.
        #[arg(long = "spectrum-csv", value_name = "PATH")]
        spectrum_csv: Option<PathBuf>,
        #[arg(
            long = "t-range",
            default_value = "-3:3:61",
            allow_hyphen_values = true,
            value_name = "A:B:N"
        )]
        t_range: Range,
    },
    /// Finite-section verification report (JSON).
    Verify {
        /// Directory for CSV dumps of the biorthogonality and Gram matrices.
        #[arg(long, value_name = "DIR")]
        matrices: Option<PathBuf>,
    },
    /// One frame/Riesz/Bessel estimate (JSON).
    Bounds {
        #[arg(value_enum)]
        target: Target,
    },
}

fn resolve(common: CommonArgs) -> Result<RunConfig, UsageError> {
    let mut cfg = RunConfig::default();
    let path = common
        .config
        .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    if let Some(path) = path {
        cfg.apply(RunConfig::load_file(&path)?)?;
    }
    macro_rules! flag {
        ($($f:ident),*) => { $(if let Some(v) = common.$f { cfg.$f = v; })* };
    }
    flag!(p, n_trunc, grid_order, seed, trials, tol);
    if common.format.is_some() {
        cfg.format = common.format;
    }
    if common.out.is_some() {
        cfg.out = common.out;
    }
    if common.weights.is_some() {
        cfg.weights = common.weights;
    }
    if !common.perturb_node.is_empty() {
        cfg.perturb_node = common.perturb_node;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome, Failure> {
    match command {
        Command::Kernel { s_range, t_range } => commands::cmd_kernel(cfg, &s_range.0, &t_range.0),
        Command::Reconstruct {
            spectrum,
            spectrum_csv,
            t_range,
        } => commands::cmd_reconstruct(cfg, &spectrum, spectrum_csv.as_deref(), &t_range.0),
        Command::Verify { matrices } => commands::cmd_verify(cfg, matrices.as_deref()),
        Command::Bounds { target } => commands::cmd_bounds(cfg, target),
    }
}

/// Parses `args`, runs the command and returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = if code == 0 {
                write!(stdout, "{e}")
            } else {
                write!(stderr, "{e}")
            };
            return if code == 0 { EXIT_PASS } else { EXIT_USAGE };
        }
    };
    let cfg = match resolve(cli.common) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let outcome = match execute(cli.command, &cfg) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, &outcome.body),
        None => stdout.write_all(outcome.body.as_bytes()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: cannot write output: {e}");
        return EXIT_USAGE;
    }
    let verdict = if outcome.pass { "PASS" } else { "FAIL" };
    let _ = writeln!(stderr, "{} -- {verdict}", outcome.summary);
    if outcome.pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
