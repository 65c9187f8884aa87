//! Command-line front end.

pub mod check;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::spectrum::{dressed_energy, dressed_splitting};
use crate::sweep::{find_optimum, run_sweep, Axis, AxisName, SweepMode, SweepResult};

pub use config::{parse_config, parse_with_overrides, ConfigError, RunConfig};

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Exit status for invalid input.
pub const EXIT_INVALID: i32 = 1;
/// Exit status when solver failures exceed [`MAX_FAILURE_FRACTION`] or a check fails.
pub const EXIT_SOLVER: i32 = 2;
pub const MAX_FAILURE_FRACTION: f64 = 0.1;

#[derive(Debug, Parser)]
#[command(name = "blockade", version, about = "Photon-blockade sweeps for a driven single-atom cavity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the sweep described by the configuration.
    Sweep(RunArgs),
    /// Print the dressed-state ladder for n = 1..n_max.
    Spectrum(RunArgs),
    /// Locate the g²(0) minimum of a detuning sweep.
    Optimum(RunArgs),
    /// Delayed intensity correlation at one parameter point.
    G2tau(RunArgs),
    /// Photon number from the empty cavity versus time.
    Dynamics(RunArgs),
    /// Run the built-in invariant suite.
    Check,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML configuration file.
    config: Option<PathBuf>,
    /// Override a configuration value, e.g. `--set g=1` or `--set solver.n_max=10`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// CSV output path; the metadata side-car goes next to it.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the command; returns the exit status.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Check => check(),
        Command::Spectrum(a) => with_config(&a, spectrum),
        Command::Sweep(a) => with_config(&a, |c| sweep_command(c, &a, None, "sweep")),
        Command::Optimum(a) => with_config(&a, |c| optimum(c, &a)),
        Command::G2tau(a) => with_config(&a, |c| sweep_command(c, &a, Some(SweepMode::G2Tau), "g2tau")),
        Command::Dynamics(a) => with_config(&a, |c| sweep_command(c, &a, Some(SweepMode::Dynamics), "dynamics")),
    }
}

fn with_config(args: &RunArgs, run: impl FnOnce(&RunConfig) -> i32) -> i32 {
    let text = match &args.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return EXIT_INVALID;
            }
        },
        None => String::new(),
    };
    match parse_with_overrides(&text, &args.set) {
        Ok(c) => run(&c),
        Err(e) => {
            for m in &e.messages {
                eprintln!("error: {m}");
            }
            EXIT_INVALID
        }
    }
}

fn check() -> i32 {
    let outcomes = check::run_checks();
    let mut out = std::io::stdout().lock();
    for o in &outcomes {
        let _ = writeln!(out, "{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
    }
    if outcomes.iter().all(|o| o.passed) {
        EXIT_OK
    } else {
        EXIT_SOLVER
    }
}

fn spectrum(config: &RunConfig) -> i32 {
    let p = &config.params;
    let tied = p.detunings_tied();
    let digits = config.output.precision;
    let mut w = csv::Writer::from_writer(std::io::stdout().lock());
    let mut write = || -> Result<(), csv::Error> {
        w.write_record(["n", "delta_minus", "delta_plus", "e_minus", "e_plus"])?;
        for n in 1..=config.solver.n_max {
            let (lo, hi) = dressed_splitting(n, p.g, p.u0).expect("n ≥ 1");
            let (el, eh) = if tied { dressed_energy(n, p).expect("tied detunings") } else { (f64::NAN, f64::NAN) };
            let mut rec = vec![n.to_string()];
            rec.extend([lo, hi, el, eh].map(|x| output::format_float(x, digits)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    };
    if let Err(e) = write() {
        eprintln!("error: {e}");
        return EXIT_INVALID;
    }
    if !tied {
        eprintln!("note: delta_a differs from delta_c, so the closed-form energies are omitted");
    }
    EXIT_OK
}

fn default_axes(mode: SweepMode) -> Vec<Axis> {
    match mode {
        SweepMode::G2Tau => vec![Axis::linear(AxisName::T, 0.0, 50.0, 501)],
        SweepMode::Dynamics => vec![Axis::linear(AxisName::T, 0.0, 30.0, 601)],
        SweepMode::Cut => vec![Axis::linear(AxisName::DeltaC, -8.0, 8.0, 401)],
        _ => Vec::new(),
    }
}

fn build(config: &RunConfig, args: &RunArgs, fallback: Option<SweepMode>) -> Result<SweepResult, i32> {
    let Some(mode) = config.sweep.mode.or(fallback) else {
        eprintln!("error: no sweep mode; set [sweep] mode or use --set mode=<mode>");
        return Err(EXIT_INVALID);
    };
    let mut spec = config.sweep_spec(mode);
    if spec.axes.is_empty() {
        spec.axes = default_axes(mode);
    }
    let mut result = run_sweep(&spec).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_INVALID
    })?;
    result.metadata.overrides = args.set.clone();
    Ok(result)
}

fn output_path(config: &RunConfig, args: &RunArgs, fallback: &str) -> PathBuf {
    args.output
        .clone()
        .or_else(|| config.output.path.clone())
        .or_else(|| {
            args.config.as_deref().and_then(Path::file_stem).map(|s| PathBuf::from(s).with_extension("csv"))
        })
        .unwrap_or_else(|| PathBuf::from(format!("{fallback}.csv")))
}

fn finish(result: &SweepResult, path: &Path, digits: usize) -> i32 {
    match output::write_result(result, path, digits) {
        Ok(meta) => {
            let m = &result.metadata;
            eprintln!(
                "wrote {} rows to {} (metadata {}); {} of {} points failed",
                result.rows.len(),
                path.display(),
                meta.display(),
                m.failed_points,
                m.total_points
            );
            for (code, count) in &m.failures {
                eprintln!("  {code}: {count}");
            }
            if let Some(s) = &m.spot_check {
                if s.violations > 0 {
                    eprintln!("warning: {} spot checks exceeded the two-photon bound", s.violations);
                }
            }
            if m.failure_fraction() > MAX_FAILURE_FRACTION {
                eprintln!("error: more than {:.0}% of points failed", MAX_FAILURE_FRACTION * 100.0);
                EXIT_SOLVER
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: cannot write {}: {e}", path.display());
            EXIT_INVALID
        }
    }
}

fn sweep_command(config: &RunConfig, args: &RunArgs, forced: Option<SweepMode>, name: &str) -> i32 {
    if let (Some(f), Some(m)) = (forced, config.sweep.mode) {
        if f != m {
            eprintln!("error: `{name}` runs mode {f:?}, but the configuration selects {m:?}");
            return EXIT_INVALID;
        }
    }
    match build(config, args, forced) {
        Ok(result) => finish(&result, &output_path(config, args, name), config.output.precision),
        Err(code) => code,
    }
}

fn optimum(config: &RunConfig, args: &RunArgs) -> i32 {
    let result = match build(config, args, Some(SweepMode::Cut)) {
        Ok(r) => r,
        Err(code) => return code,
    };
    let column = if result.column_index("g2_0").is_some() {
        "g2_0"
    } else if result.column_index("g2_opt").is_some() {
        "g2_opt"
    } else if result.column_index("g2_qi").is_some() {
        "g2_qi"
    } else {
        eprintln!("error: mode {:?} has no g2 column to minimize", result.metadata.mode);
        return EXIT_INVALID;
    };
    let code = match find_optimum(&result, column) {
        Ok((row, _)) => {
            let digits = config.output.precision;
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "row = {row}");
            for (name, v) in result.columns.iter().zip(&result.rows[row]) {
                let _ = writeln!(out, "{name} = {}", output::format_float(*v, digits));
            }
            if result.metadata.failure_fraction() > MAX_FAILURE_FRACTION {
                EXIT_SOLVER
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_SOLVER
        }
    };
    if args.output.is_some() || config.output.path.is_some() {
        let written = finish(&result, &output_path(config, args, "optimum"), config.output.precision);
        return code.max(written);
    }
    code
}
