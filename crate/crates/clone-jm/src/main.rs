//! Command-line front end: spin and boson reproduction reports plus the
//! verification suite, with table/JSON/CSV output and scriptable exit
//! codes (0 = all pass, 1 = a check failed, 2 = configuration error).

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use clone_jm::harness::{
    run_boson_report, run_spin_report, run_verify, RunConfig, ToleranceProfile,
};
use clone_jm::report::{OutputFormat, Report};

#[derive(Parser)]
#[command(
    name = "clone-jm",
    about = "Quantum-cloning joint-measurement workbench: reproductions, POVM audits, verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Json,
    Csv,
}

impl From<FormatArg> for OutputFormat {
    fn from(value: FormatArg) -> Self {
        match value {
            FormatArg::Table => OutputFormat::Table,
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Default,
    Strict,
}

impl From<ProfileArg> for ToleranceProfile {
    fn from(value: ProfileArg) -> Self {
        match value {
            ProfileArg::Default => ToleranceProfile::Default,
            ProfileArg::Strict => ToleranceProfile::Strict,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Qubit pipeline: cloning shrink factor, pullback POVM, variance
    /// scoring, sphere oracle, discrete-family audit.
    SpinReport {
        /// Input state as "theta,phi" (radians): (cos(theta/2), e^{i phi} sin(theta/2)).
        #[arg(long, default_value = "0,0")]
        state: String,
        #[arg(long, value_enum, default_value_t = FormatArg::Table)]
        format: FormatArg,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bosonic pipeline: two-route POVM, completeness, moment identities,
    /// covariance checks, per sigma.
    BosonReport {
        /// Comma-separated squeezing parameters.
        #[arg(long, default_value = "0.8,1,1.5")]
        sigma: String,
        /// Fock truncation level.
        #[arg(long)]
        nmax: Option<usize>,
        /// Quadrature grid points (odd).
        #[arg(long)]
        grid: Option<usize>,
        /// Quadrature grid halfwidth.
        #[arg(long)]
        halfwidth: Option<f64>,
        #[arg(long, value_enum, default_value_t = FormatArg::Table)]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full verification suite; exit 0 iff every criterion passes.
    Verify {
        #[arg(long, value_enum, default_value_t = ProfileArg::Default)]
        profile: ProfileArg,
        /// Fock truncation override.
        #[arg(long)]
        nmax: Option<usize>,
        /// Grid points override (odd).
        #[arg(long)]
        grid: Option<usize>,
        /// Grid halfwidth override.
        #[arg(long)]
        halfwidth: Option<f64>,
    },
}

fn emit(report: &Report, format: OutputFormat, out: Option<&PathBuf>) -> std::io::Result<()> {
    let rendered = report.render(format);
    match out {
        Some(path) => std::fs::write(path, rendered)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(rendered.as_bytes())?;
        }
    }
    Ok(())
}

fn apply_fock_overrides(
    cfg: &mut RunConfig,
    nmax: Option<usize>,
    grid: Option<usize>,
    halfwidth: Option<f64>,
) {
    if let Some(n) = nmax {
        cfg.fock = cfg.fock.with_n_max(n);
    }
    if let Some(g) = grid {
        cfg.fock = cfg.fock.with_grid_points(g);
    }
    if let Some(l) = halfwidth {
        cfg.fock = cfg.fock.with_halfwidth(l);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::SpinReport { state, format, out } => {
            let (theta, phi) = RunConfig::parse_state_spec(&state).map_err(|e| e.to_string())?;
            let cfg = RunConfig {
                state_theta: theta,
                state_phi: phi,
                ..RunConfig::default()
            };
            cfg.validate().map_err(|e| e.to_string())?;
            let report = run_spin_report(&cfg).map_err(|e| e.to_string())?;
            emit(&report, format.into(), out.as_ref()).map_err(|e| e.to_string())?;
            Ok(exit_for(report.all_pass()))
        }
        Command::BosonReport {
            sigma,
            nmax,
            grid,
            halfwidth,
            format,
            out,
        } => {
            let sigmas = RunConfig::parse_sigma_list(&sigma).map_err(|e| e.to_string())?;
            let mut cfg = RunConfig {
                sigmas,
                ..RunConfig::default()
            };
            apply_fock_overrides(&mut cfg, nmax, grid, halfwidth);
            cfg.validate().map_err(|e| e.to_string())?;
            let report = run_boson_report(&cfg).map_err(|e| e.to_string())?;
            emit(&report, format.into(), out.as_ref()).map_err(|e| e.to_string())?;
            Ok(exit_for(report.all_pass()))
        }
        Command::Verify {
            profile,
            nmax,
            grid,
            halfwidth,
        } => {
            let mut cfg = RunConfig {
                profile: profile.into(),
                ..RunConfig::default()
            };
            apply_fock_overrides(&mut cfg, nmax, grid, halfwidth);
            cfg.validate().map_err(|e| e.to_string())?;
            let outcome = run_verify(&cfg).map_err(|e| e.to_string())?;
            for criterion in &outcome.criteria {
                println!(
                    "{:4} {:4}  {}",
                    criterion.label,
                    if criterion.pass { "ok" } else { "FAIL" },
                    criterion.title
                );
            }
            println!(
                "verify: {} ({} criteria)",
                if outcome.all_pass { "PASS" } else { "FAIL" },
                outcome.criteria.len()
            );
            for entry in outcome.report.failed() {
                println!(
                    "  failed: {} (residual {:?}, tolerance {:.1e})",
                    entry.name, entry.residual, entry.tolerance
                );
            }
            eprintln!("elapsed: {:.1}s", outcome.elapsed.as_secs_f64());
            Ok(exit_for(outcome.all_pass))
        }
    }
}

fn exit_for(pass: bool) -> ExitCode {
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
