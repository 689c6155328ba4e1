//! Command-line front end: generate sequences, run analyses, render reports.
//!
//! Exit codes: 0 on success, 1 for malformed input (bad flags, schema
//! violations, unreadable documents), 2 when a computation fails.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use weightkit::analysis::{
    emit_report, parse_bundle, parse_spec, render_csv, render_json, run_analysis, OutputFormat,
};
use weightkit::{build_counterexample, make_family, Error, Family, ScheduleVariant};

#[derive(Parser)]
#[command(
    name = "weightkit",
    version,
    about = "Weight sequences and weight matrices: growth-condition checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a sequence as `{"label", "log_values"}` JSON.
    Gen(GenArgs),
    /// Evaluate an analysis spec into a report bundle.
    Analyze(AnalyzeArgs),
    /// Render a stored bundle in another format.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Builtin family id (gevrey, q_gevrey, double_exp, ...).
    #[arg(long, conflicts_with = "counterexample")]
    family: Option<String>,
    /// Family parameter as name=value; repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    #[arg(long, default_value_t = weightkit::sequence::DEFAULT_HORIZON)]
    horizon: usize,
    /// Build the counterexample sequence with this many levels instead.
    #[arg(long, value_name = "LEVELS")]
    counterexample: Option<usize>,
    /// Schedule variant (minimal, quasianalytic, strong_b); repeatable.
    #[arg(long)]
    variant: Vec<String>,
    #[arg(long, default_value_t = 1.0)]
    b1: f64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Plotdata,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
            Format::Plotdata => OutputFormat::Plotdata,
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Spec file, or `-` for stdin.
    spec: PathBuf,
    /// Overrides the spec horizon.
    #[arg(long)]
    horizon: Option<usize>,
    /// Overrides the spec d_max.
    #[arg(long)]
    d_max: Option<usize>,
    /// Overrides the spec grid, comma separated.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    /// Output path; falls back to the spec's output path, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct ReportArgs {
    /// Bundle JSON written by `analyze`, or `-` for stdin.
    bundle: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Output path (a directory for plotdata); stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Input(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_schema() {
            Failure::Input(e.to_string())
        } else {
            Failure::Compute(e.to_string())
        }
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    let mut text = String::new();
    let res = if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| text = t)
    };
    res.map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    Ok(text)
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::Compute(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Renders to stdout for json and csv without a path; plotdata needs one.
fn deliver(
    bundle: &weightkit::Bundle,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<(), Failure> {
    match (format, out) {
        (_, Some(p)) => {
            emit_report(bundle, format, p)?;
            Ok(())
        }
        (OutputFormat::Json, None) => write_output(None, &render_json(bundle)?),
        (OutputFormat::Csv, None) => write_output(None, &render_csv(bundle)?),
        (OutputFormat::Plotdata, None) => {
            Err(Failure::Input("plotdata output needs --out DIR".into()))
        }
    }
}

fn gen(args: GenArgs) -> Result<(), Failure> {
    let seq = match (args.counterexample, &args.family) {
        (Some(levels), _) => {
            let mut variants = Vec::new();
            for v in &args.variant {
                variants
                    .push(ScheduleVariant::parse(v).ok_or_else(|| {
                        Failure::Input(format!("unknown schedule variant '{v}'"))
                    })?);
            }
            build_counterexample(levels, &variants, args.b1)?.1
        }
        (None, Some(id)) => {
            let mut params = BTreeMap::new();
            for p in &args.params {
                let (k, v) = p
                    .split_once('=')
                    .ok_or_else(|| Failure::Input(format!("parameter '{p}' is not NAME=VALUE")))?;
                let v: f64 = v.parse().map_err(|_| {
                    Failure::Input(format!("parameter '{k}' has non-numeric value '{v}'"))
                })?;
                params.insert(k.to_string(), v);
            }
            let family =
                Family::from_parts(id, &params).map_err(|e| Failure::Input(e.to_string()))?;
            make_family(family, args.horizon)?
        }
        (None, None) => {
            return Err(Failure::Input(
                "gen needs --family or --counterexample".into(),
            ))
        }
    };
    let doc = json!({"label": seq.label(), "log_values": seq.log_values()});
    let mut text =
        serde_json::to_string_pretty(&doc).map_err(|e| Failure::Compute(e.to_string()))?;
    text.push('\n');
    write_output(args.out.as_deref(), &text)
}

fn analyze(args: AnalyzeArgs) -> Result<(), Failure> {
    let mut spec = parse_spec(&read_input(&args.spec)?)?;
    if let Some(h) = args.horizon {
        if h < weightkit::analysis::MIN_HORIZON {
            return Err(Failure::Input(format!(
                "--horizon must be at least {}",
                weightkit::analysis::MIN_HORIZON
            )));
        }
        spec.horizon = Some(h);
    }
    if let Some(d) = args.d_max {
        if d == 0 {
            return Err(Failure::Input("--d-max must be at least 1".into()));
        }
        spec.d_max = Some(d);
    }
    if let Some(g) = args.grid {
        if g.is_empty() || g.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(Failure::Input("--grid needs positive numbers".into()));
        }
        spec.grid = Some(g);
    }
    let bundle = run_analysis(&spec)?;
    let format = args
        .format
        .map(OutputFormat::from)
        .or(spec.output.as_ref().map(|o| o.format))
        .unwrap_or(OutputFormat::Json);
    let out = args.out.or_else(|| {
        spec.output
            .as_ref()
            .and_then(|o| o.path.as_ref())
            .map(PathBuf::from)
    });
    deliver(&bundle, format, out.as_deref())
}

fn report(args: ReportArgs) -> Result<(), Failure> {
    let text = read_input(&args.bundle)?;
    let bundle = parse_bundle(&text).map_err(|e| Failure::Input(e.to_string()))?;
    deliver(&bundle, args.format.into(), args.out.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Analyze(a) => analyze(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
