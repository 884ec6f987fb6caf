//! Command-line front end for the soliton / Yamabe pipeline.
//!
//! Subcommands: `find-c0`, `profile`, `yamabe`, `verify`. Exit codes: 0 on
//! success, 1 on numerical failure, 2 on configuration errors.

mod commands;
mod config;
mod output;
mod verify;

use clap::{Parser, Subcommand};
use commands::CliError;
use config::{C0Method, Settings};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "koiso-cao",
    version,
    about = "Koiso-Cao soliton profile, curvature, and U(2)-invariant Yamabe solver"
)]
struct Cli {
    /// Flat key=value config file applied between defaults and flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for all emitted files.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find the soliton constant by shooting and/or Cao's root function.
    FindC0 {
        /// Bisection bracket for the constant.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_hyphen_values = true)]
        bracket: Option<Vec<f64>>,
        /// Stop once the first-minimum miss drops below this.
        #[arg(long)]
        tol: Option<f64>,
        /// shooting, cao-root, or both.
        #[arg(long)]
        method: Option<String>,
    },
    /// Solve the canonical profile and export profile.csv / curvature.csv.
    Profile {
        /// Uniform export grid size.
        #[arg(long)]
        grid: Option<usize>,
        /// Explicit soliton constant instead of the bisection search.
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
    },
    /// Scan and solve the Yamabe problem; export yamabe.csv, scan.csv,
    /// summary.json.
    Yamabe {
        #[arg(long)]
        scan_size: Option<usize>,
        #[arg(long)]
        grid: Option<usize>,
        /// Lower edge of the scan range (defaults to sqrt(S(beta)) + 1e-3).
        #[arg(long, allow_hyphen_values = true)]
        scan_lo: Option<f64>,
        /// Upper edge of the scan range (defaults to sqrt(S(0))).
        #[arg(long, allow_hyphen_values = true)]
        scan_hi: Option<f64>,
        /// Taylor-seed offset as a fraction of beta.
        #[arg(long)]
        eps_frac: Option<f64>,
        /// Matching time as a fraction of beta.
        #[arg(long)]
        t_match_frac: Option<f64>,
        /// Threads for the scan.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
    },
    /// Run the invariant suite and print a pass/fail table.
    Verify {
        /// Skip the expensive Yamabe checks.
        #[arg(long)]
        quick: bool,
        /// Evaluation constant for the identity checks over the canonical
        /// profile; a wrong value is the intended negative control.
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn build_settings(cli: &Cli) -> Result<Settings, CliError> {
    let mut settings = Settings::default();
    if let Some(path) = &cli.config {
        settings.apply_file(path).map_err(CliError::Config)?;
    }
    if let Some(dir) = &cli.out_dir {
        settings.out_dir = dir.clone();
    }
    match &cli.command {
        Command::FindC0 {
            bracket,
            tol,
            method,
        } => {
            if let Some(b) = bracket {
                settings.bracket_lo = b[0];
                settings.bracket_hi = b[1];
            }
            if let Some(t) = tol {
                settings.c0_tol = *t;
            }
            if let Some(m) = method {
                settings.method = C0Method::parse(m).map_err(CliError::Config)?;
            }
        }
        Command::Profile { grid, c } => {
            if let Some(g) = grid {
                settings.grid = *g;
            }
            if c.is_some() {
                settings.c = *c;
            }
        }
        Command::Yamabe {
            scan_size,
            grid,
            scan_lo,
            scan_hi,
            eps_frac,
            t_match_frac,
            jobs,
            c,
        } => {
            if let Some(n) = scan_size {
                settings.scan_size = *n;
            }
            if let Some(g) = grid {
                settings.grid = *g;
            }
            if scan_lo.is_some() {
                settings.scan_lo = *scan_lo;
            }
            if scan_hi.is_some() {
                settings.scan_hi = *scan_hi;
            }
            if let Some(e) = eps_frac {
                settings.eps_frac = *e;
            }
            if let Some(tm) = t_match_frac {
                settings.t_match_frac = *tm;
            }
            if let Some(j) = jobs {
                settings.jobs = *j;
            }
            if c.is_some() {
                settings.c = *c;
            }
        }
        Command::Verify { c, jobs, .. } => {
            if c.is_some() {
                settings.c = *c;
            }
            if let Some(j) = jobs {
                settings.jobs = *j;
            }
        }
    }
    settings.validate().map_err(CliError::Config)?;
    Ok(settings)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let settings = build_settings(cli)?;
    match &cli.command {
        Command::FindC0 { .. } => commands::cmd_find_c0(&settings),
        Command::Profile { .. } => commands::cmd_profile(&settings),
        Command::Yamabe { .. } => commands::cmd_yamabe(&settings),
        Command::Verify { quick, .. } => verify::cmd_verify(&settings, *quick),
    }
}

/// Die silently on a closed pipe instead of panicking mid-print.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() {
    reset_sigpipe();
    let cli = Cli::parse();
    if let Err(err) = run(&cli) {
        eprintln!("error: {}", err.message());
        std::process::exit(err.exit_code());
    }
}
