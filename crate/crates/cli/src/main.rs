use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use osk_cli::{emit, parse_scenario, run, Format, Kind};

#[derive(Parser)]
#[command(name = "osk", version, about = "Heat equation with a rapidly oscillating source: forward runs, asymptotics and source recovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral solution on an (x, t) grid
    Forward(Common),
    /// Two-scale expansion and its residuals
    Asymptotics(Common),
    /// Recover r0 and r1 from the trace at x0 with f known
    Inverse1(Common),
    /// Recover f from the final-time profile with r0 known
    Inverse2(Common),
    /// Recover f and r1 from the final-time profile and the trace
    Inverse3(Common),
    /// Recover f, r0 and r1 from traces at several points
    Inverse4(Common),
    /// Residual table over a ladder of frequencies
    Convergence(Common),
    /// Run the kind declared in the scenario file
    Run(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// Scenario file, or builtin:worked-example
    #[arg(long, value_name = "PATH")]
    scenario: String,
    /// Output file (stdout when absent)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Volterra grid points
    #[arg(long, value_name = "M")]
    grid: Option<usize>,
    /// Sine-mode truncation
    #[arg(long, value_name = "N_MAX")]
    modes: Option<usize>,
    /// Comma-separated frequencies for the convergence table
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    omega_ladder: Option<Vec<f64>>,
    /// Plain product trapezoid without Richardson extrapolation
    #[arg(long)]
    no_extrapolate: bool,
    /// Record wall-clock time in the report
    #[arg(long)]
    timing: bool,
}

fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var("OSK_THREADS") {
        let n: usize = value
            .trim()
            .parse()
            .with_context(|| format!("OSK_THREADS must be a positive integer, got `{value}`"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("cannot configure thread pool")?;
    }
    Ok(())
}

fn execute(command: Command) -> Result<u8> {
    let (requested, args) = match command {
        Command::Forward(a) => (Some(Kind::Forward), a),
        Command::Asymptotics(a) => (Some(Kind::Asymptotics), a),
        Command::Inverse1(a) => (Some(Kind::Inverse1), a),
        Command::Inverse2(a) => (Some(Kind::Inverse2), a),
        Command::Inverse3(a) => (Some(Kind::Inverse3), a),
        Command::Inverse4(a) => (Some(Kind::Inverse4), a),
        Command::Convergence(a) => (Some(Kind::Convergence), a),
        Command::Run(a) => (None, a),
    };
    let mut scenario = parse_scenario(&args.scenario)?;
    let kind = scenario.resolve_kind(requested)?;
    if let Some(m) = args.grid {
        scenario.grid = Some(m);
    }
    if let Some(n) = args.modes {
        scenario.n_max = Some(n);
    }
    if let Some(ladder) = args.omega_ladder {
        scenario.omega_ladder = Some(ladder);
    }
    if args.no_extrapolate {
        scenario.extrapolate = Some(false);
    }
    let report = run(&scenario, kind, args.timing)
        .with_context(|| format!("scenario {}", args.scenario))?;
    let format = match args.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    let mut sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    emit(&report, format, &mut sink)?;
    Ok(report.status.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors share the generic failure code; 2 is reserved for data
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match configure_threads().and_then(|()| execute(cli.command)) {
        Ok(code) => ExitCode::from(code),
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|cause| {
        cause
            .downcast_ref::<io::Error>()
            .is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
            || cause
                .downcast_ref::<csv::Error>()
                .is_some_and(|c| matches!(c.kind(), csv::ErrorKind::Io(io) if io.kind() == io::ErrorKind::BrokenPipe))
    })
}
