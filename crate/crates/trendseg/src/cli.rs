// SPDX-License-Identifier: MIT OR Apache-2.0

//! `trendseg detect` and `trendseg simulate`.

use std::ffi::OsString;
use std::io::Write;
use std::num::NonZeroUsize;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use trendseg_core::shrink::DEFAULT_C;
use trendseg_core::tguw::DEFAULT_RHO;
use trendseg_core::{trendsegment, DetectionOptions, Error as CoreError, Series};

use crate::error::TrendsegError;
use crate::io::{read_column_from, write_json, ColumnSelector, DetectionOutput};
use crate::simlab::{run_simulation, Family, NoiseKind, NoiseSpec, SignalSpec, SimulationConfig, DEFAULT_PHI};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "trendseg", version, about = "Change-points in piecewise-linear trends and point anomalies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Detect change-points in one CSV column and print JSON.
    Detect(DetectArgs),
    /// Monte-Carlo run on a built-in test signal.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct Tuning {
    /// Threshold constant C in lambda = C * sigma * sqrt(2 log T).
    #[arg(long = "const", default_value_t = DEFAULT_C)]
    constant_c: f64,
    /// Tail-greediness: fraction of smooth coefficients merged per pass.
    #[arg(long, default_value_t = DEFAULT_RHO)]
    rho: f64,
    /// Greedy re-transform of the estimate.
    #[arg(long)]
    stage1: bool,
    /// Prune change-points by local contrast.
    #[arg(long)]
    stage2: bool,
}

impl Tuning {
    fn options(&self, sigma_override: Option<f64>) -> DetectionOptions {
        DetectionOptions {
            constant_c: self.constant_c,
            rho: self.rho,
            sigma_override,
            enable_stage1: self.stage1,
            enable_stage2: self.stage2,
            ..Default::default()
        }
    }
}

#[derive(Debug, Args)]
struct DetectArgs {
    /// CSV file, or `-` for stdin.
    #[arg(long, short)]
    input: PathBuf,
    /// Column header name or 0-based index.
    #[arg(long, default_value = "0")]
    column: String,
    /// The first row is data.
    #[arg(long)]
    no_header: bool,
    /// Write JSON here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Use this noise level instead of the MAD estimate.
    #[arg(long)]
    sigma: Option<f64>,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    model: Family,
    /// Series length; defaults to the model's own length.
    #[arg(long = "t")]
    length: Option<usize>,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, value_enum, default_value_t = NoiseKind::GaussIid)]
    noise: NoiseKind,
    /// AR(1) coefficient.
    #[arg(long, default_value_t = DEFAULT_PHI)]
    phi: f64,
    #[arg(long, default_value_t = 100)]
    runs: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads; defaults to the available cores.
    #[arg(long, env = "TRENDSEG_THREADS")]
    threads: Option<NonZeroUsize>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
    /// Add mean runtime per run (output then varies between invocations).
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    tuning: Tuning,
}

fn exit_code(err: &TrendsegError) -> i32 {
    match err {
        TrendsegError::Io { .. } | TrendsegError::Parse { .. } | TrendsegError::MissingColumn(_) => EXIT_PARSE,
        TrendsegError::Core(CoreError::InvalidOption(_)) | TrendsegError::InvalidSpec(_) => EXIT_USAGE,
        TrendsegError::Core(_) => EXIT_INPUT,
        TrendsegError::Output(_) => EXIT_PARSE,
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut impl Write, stderr: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Detect(a) => detect(a, stdout),
        Command::Simulate(a) => simulate(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "trendseg: {e}");
            exit_code(&e)
        }
    }
}

fn detect(a: DetectArgs, stdout: &mut impl Write) -> Result<(), TrendsegError> {
    let opts = a.tuning.options(a.sigma);
    opts.validate()?;
    let values = read_column_from(&a.input, &ColumnSelector::parse(&a.column), !a.no_header)?;
    let x = Series::new(values)?;
    let res = trendsegment(&x, &opts)?;
    let doc = DetectionOutput::from(&res);
    match a.output {
        Some(path) => {
            let file = std::fs::File::create(&path).map_err(|source| TrendsegError::Io { path, source })?;
            write_json(std::io::BufWriter::new(file), &doc)
        }
        None => write_json(stdout, &doc),
    }
}

fn simulate(a: SimulateArgs, stdout: &mut impl Write) -> Result<(), TrendsegError> {
    let options = a.tuning.options(None);
    options.validate()?;
    if !(a.sigma >= 0.0 && a.sigma.is_finite()) {
        return Err(CoreError::InvalidOption("sigma must be finite and >= 0").into());
    }
    if a.phi.is_nan() || a.phi.abs() >= 1.0 {
        return Err(CoreError::InvalidOption("phi must lie in (-1, 1)").into());
    }
    if a.runs == 0 {
        return Err(CoreError::InvalidOption("runs must be >= 1").into());
    }
    let signal = match a.length {
        Some(len) => SignalSpec::with_length(a.model, len)?,
        None => SignalSpec::canonical(a.model),
    };
    let threads = a
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().unwrap_or(NonZeroUsize::MIN));
    let cfg = SimulationConfig {
        signal,
        noise: NoiseSpec { kind: a.noise, sigma: a.sigma, phi: a.phi, seed: a.seed },
        runs: a.runs,
        options,
        threads,
    };
    let mut report = run_simulation(&cfg)?;
    if !a.timing {
        report = report.without_timing();
    }
    if a.json {
        write_json(stdout, &report)
    } else {
        stdout.write_all(report.to_table().as_bytes()).map_err(|e| TrendsegError::Output(e.to_string()))
    }
}
