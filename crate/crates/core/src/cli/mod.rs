//! The `quadform` command-line front end.
//!
//! Exit codes: 0 success, 1 input or I/O error, 2 validation failure or
//! degenerate form, 3 numerical failure, 4 verification failure.

mod document;
mod report;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use document::{FormDocument, FormKind};
pub use report::{
    fmt_num, BoundReport, BoundRow, InvertReport, MgfReport, VerifyMetadata, VerifyReport, VerifyRow,
    TOOL_VERSION,
};

use crate::bounds::{tail_exponent, threshold, Direction};
use crate::mgf::{verify_envelope, ENVELOPE_SLACK};
use crate::oracle::{self, DEFAULT_CHUNK_SIZE, DEFAULT_CONFIDENCE};

/// Smallest sample count `verify` accepts.
pub const MIN_VERIFY_SAMPLES: usize = 10_000;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Library(#[from] crate::Error),
    #[error("{0}")]
    VerificationFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Library(e) => match e {
                crate::Error::Validation(_) | crate::Error::Degenerate(_) | crate::Error::Domain { .. } => 2,
                crate::Error::NoConvergence { .. } | crate::Error::Quadrature { .. } => 3,
            },
            CliError::VerificationFailed(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "quadform", version, about = "Tail bounds for quadratic forms of Gaussian vectors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Thresholds t(x) with P(T beyond t) <= exp(-x).
    Bound(BoundArgs),
    /// Exponent x at which the threshold sits a given distance from the mean.
    Invert(InvertArgs),
    /// Monte Carlo check of the bounds over a grid of exponents.
    Verify(VerifyArgs),
    /// Compare the centred log-MGF with its envelope on a grid.
    MgfCheck(MgfCheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Upper,
    Lower,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Upper => Direction::Upper,
            DirectionArg::Lower => Direction::Lower,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated exponents.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub x: Vec<f64>,
    #[arg(long, value_enum, default_value = "upper")]
    pub direction: DirectionArg,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InvertArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    pub deviation: f64,
    #[arg(long, value_enum, default_value = "upper")]
    pub direction: DirectionArg,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `START:STOP:STEP` (inclusive) or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    pub x_grid: String,
    #[arg(long, value_enum, default_value = "upper")]
    pub direction: DirectionArg,
    /// Report path; `.json` selects JSON, anything else CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MgfCheckArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    match run(&cli.command, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(command: &Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Bound(args) => cmd_bound(args, stdout),
        Command::Invert(args) => cmd_invert(args, stdout),
        Command::Verify(args) => cmd_verify(args, stdout),
        Command::MgfCheck(args) => cmd_mgf_check(args, stdout),
    }
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, text),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Input(format!("stdout: {e}"))),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn cmd_bound(args: &BoundArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let doc = FormDocument::load(&args.input)?;
    let report = bound_report(&doc, &args.x, args.direction.into())?;
    let text = match args.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    emit(&text, args.out.as_deref(), stdout)
}

pub fn bound_report(doc: &FormDocument, xs: &[f64], direction: Direction) -> Result<BoundReport, CliError> {
    let stats = doc.stats()?;
    let rows = xs
        .iter()
        .map(|&x| threshold(&stats, x, direction).map(BoundRow::from))
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(BoundReport {
        tool_version: TOOL_VERSION,
        label: doc.label.clone(),
        direction,
        dim: doc.dim(),
        stats,
        rows,
    })
}

pub fn cmd_invert(args: &InvertArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let doc = FormDocument::load(&args.input)?;
    let report = invert_report(&doc, args.deviation, args.direction.into())?;
    let text = match args.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    emit(&text, args.out.as_deref(), stdout)
}

pub fn invert_report(doc: &FormDocument, deviation: f64, direction: Direction) -> Result<InvertReport, CliError> {
    let stats = doc.stats()?;
    let bound = tail_exponent(&stats, deviation, direction)?;
    Ok(InvertReport {
        tool_version: TOOL_VERSION,
        label: doc.label.clone(),
        direction,
        stats,
        deviation,
        x: bound.x,
        prob_bound: bound.prob_bound,
        threshold: bound.threshold,
    })
}

/// Parses `START:STOP:STEP` (inclusive of STOP up to rounding) or `x1,x2,...`.
pub fn parse_x_grid(grid: &str) -> Result<Vec<f64>, CliError> {
    let number = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Input(format!("x-grid: `{s}` is not a number")))
    };
    let mut xs = if grid.contains(':') {
        let parts: Vec<&str> = grid.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(CliError::Input(format!("x-grid `{grid}` must look like START:STOP:STEP")));
        };
        let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
        if !(step > 0.0 && step.is_finite() && stop >= start && stop.is_finite()) {
            return Err(CliError::Input(format!(
                "x-grid `{grid}` needs STEP > 0 and STOP >= START"
            )));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > 100_000 {
            return Err(CliError::Input(format!("x-grid `{grid}` has {count} points")));
        }
        (0..count).map(|i| start + i as f64 * step).collect()
    } else {
        grid.split(',').map(number).collect::<Result<Vec<_>, _>>()?
    };
    xs.sort_by(f64::total_cmp);
    Ok(xs)
}

pub fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let doc = FormDocument::load(&args.input)?;
    let xs = parse_x_grid(&args.x_grid)?;
    let report = verify_report(&doc, &xs, args.direction.into(), args.samples, args.seed)?;
    let is_json = args
        .out
        .extension()
        .is_some_and(|ext| ext.eq_ignore_ascii_case("json"));
    let file_text = if is_json { report.to_json() } else { report.to_csv() };
    write_file(&args.out, &file_text)?;
    emit(&report.to_text(), None, stdout)?;
    if report.passed() {
        Ok(())
    } else {
        let failing: Vec<String> = report
            .rows
            .iter()
            .filter(|r| !r.pass)
            .map(|r| fmt_num(r.x))
            .collect();
        Err(CliError::VerificationFailed(format!(
            "bound contradicted by Monte Carlo at x = {}",
            failing.join(", ")
        )))
    }
}

pub fn verify_report(
    doc: &FormDocument,
    xs: &[f64],
    direction: Direction,
    n: usize,
    seed: u64,
) -> Result<VerifyReport, CliError> {
    if n < MIN_VERIFY_SAMPLES {
        return Err(crate::Error::Validation(format!(
            "verify needs at least {MIN_VERIFY_SAMPLES} samples, got {n}"
        ))
        .into());
    }
    if doc.is_deterministic() {
        return Err(crate::Error::Degenerate("T is identically zero; there is no tail to verify".into()).into());
    }
    let stats = doc.stats()?;
    let mut xs = xs.to_vec();
    xs.sort_by(f64::total_cmp);
    let bounds = xs
        .iter()
        .map(|&x| threshold(&stats, x, direction))
        .collect::<crate::Result<Vec<_>>>()?;

    // matrix documents are sampled as zᵀAz + bᵀz, independently of the reduction
    let samples = match &doc.form {
        FormKind::Diagonal(d) => oracle::sample(d, n, seed)?,
        FormKind::Matrix(m) => oracle::sample_matrix(m, n, seed)?,
    };
    let rows = bounds
        .iter()
        .map(|b| {
            let est = oracle::empirical_tail(&samples, b.threshold, direction)?;
            Ok(VerifyRow {
                x: b.x,
                threshold: b.threshold,
                bound: b.prob_bound,
                p_hat: est.p_hat,
                ci_low: est.ci_low,
                ci_high: est.ci_high,
                pass: est.ci_low <= b.prob_bound,
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;

    Ok(VerifyReport {
        metadata: VerifyMetadata {
            tool_version: TOOL_VERSION,
            label: doc.label.clone(),
            direction,
            seed,
            n: n as u64,
            chunk_size: DEFAULT_CHUNK_SIZE,
            confidence: DEFAULT_CONFIDENCE,
        },
        rows,
    })
}

pub fn cmd_mgf_check(args: &MgfCheckArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    if args.grid == 0 {
        return Err(CliError::Input("--grid must be at least 1".into()));
    }
    let doc = FormDocument::load(&args.input)?;
    let report = mgf_report(&doc, args.grid)?;
    let text = match args.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    emit(&text, None, stdout)?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::VerificationFailed(format!(
            "log-MGF exceeds its envelope at {} grid points",
            report.check.violations
        )))
    }
}

pub fn mgf_report(doc: &FormDocument, grid: usize) -> Result<MgfReport, CliError> {
    let form = doc.diagonal()?;
    let check = verify_envelope(&form, grid)?;
    Ok(MgfReport {
        tool_version: TOOL_VERSION,
        label: doc.label.clone(),
        tolerance: ENVELOPE_SLACK,
        passed: check.passed(),
        check,
    })
}
