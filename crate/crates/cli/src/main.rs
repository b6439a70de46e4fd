//! `expsum`: generate Fourier coefficients of exponential sums, recover
//! models from coefficients, sample models and compare them.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use expsum::{
    coeff_model, io as csv_io, model_distance, recover, Complex64, ExponentialSumModel, FourierDataset,
    ModelDistance, RecoveryMode, RecoveryOptions, RecoveryReport,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "expsum", version, about = "Recover exponential sums from their Fourier coefficients")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the Fourier coefficients of a model as `k,re,im` CSV.
    Generate(GenerateArgs),
    /// Recover a model from a coefficient CSV and print a JSON report.
    Recover(RecoverArgs),
    /// Sample a model on a uniform grid as `t,re,im,abs` CSV.
    Eval(EvalArgs),
    /// Print the frequency and coefficient errors between two models.
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
struct Output {
    /// Output file (standard output when omitted).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Model file in JSON.
    #[arg(short, long)]
    model: PathBuf,
    /// Length P of the interval [0, P].
    #[arg(short, long)]
    period: f64,
    /// Inclusive index range `a:b`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range, required_unless_present = "index_file", conflicts_with = "index_file")]
    indices: Option<(i64, i64)>,
    /// File with one index per line.
    #[arg(long)]
    index_file: Option<PathBuf>,
    /// Standard deviation of complex Gaussian noise added to each coefficient.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Seed of the noise generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct RecoverArgs {
    /// Coefficient CSV with header `k,re,im` (`-` for standard input).
    coefficients: PathBuf,
    #[arg(short, long)]
    period: f64,
    /// One of auto, proper, real_proper, extended.
    #[arg(long, default_value = "auto", value_parser = parse_mode)]
    mode: RecoveryMode,
    /// Relative AAA stopping tolerance.
    #[arg(long, default_value_t = expsum::aaa::DEFAULT_TOL)]
    tol: f64,
    /// Distance below which computed poles are merged into one cluster.
    #[arg(long, default_value_t = expsum::pfrac::DEFAULT_MERGE_TOL)]
    merge_tol: f64,
    /// Relative size below which barycentric weights count as zero.
    #[arg(long, default_value_t = expsum::aaa::DEFAULT_ZERO_TOL)]
    zero_weight_tol: f64,
    /// Model to report errors against.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Also write the recovered model to this file.
    #[arg(long)]
    model_out: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(short, long)]
    model: PathBuf,
    /// Uniform grid `start:stop:count` with count at least 2.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_grid)]
    grid: (f64, f64, usize),
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct CompareArgs {
    a: PathBuf,
    b: PathBuf,
    #[command(flatten)]
    output: Output,
}

/// Failures by exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected a:b, got {s:?}"))?;
    let a: i64 = a.trim().parse().map_err(|e| format!("bad range start: {e}"))?;
    let b: i64 = b.trim().parse().map_err(|e| format!("bad range end: {e}"))?;
    if a > b {
        return Err(format!("empty range {a}:{b}"));
    }
    Ok((a, b))
}

fn parse_grid(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err(format!("expected start:stop:count, got {s:?}"));
    };
    let a: f64 = a.trim().parse().map_err(|e| format!("bad grid start: {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("bad grid stop: {e}"))?;
    let n: usize = n.trim().parse().map_err(|e| format!("bad grid count: {e}"))?;
    if n < 2 || !a.is_finite() || !b.is_finite() {
        return Err(format!("grid needs finite ends and count >= 2, got {s:?}"));
    }
    Ok((a, b, n))
}

fn parse_mode(s: &str) -> Result<RecoveryMode, String> {
    s.parse::<RecoveryMode>().map_err(|e| e.to_string())
}

fn check_period(p: f64) -> CliResult<()> {
    if p.is_finite() && p > 0.0 {
        Ok(())
    } else {
        Err(Failure::Usage(format!("period must be positive, got {p}")))
    }
}

fn open(path: &Path) -> CliResult<Box<dyn Read>> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(io::stdin().lock()));
    }
    let file = File::open(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(Box::new(BufReader::new(file)))
}

fn read_model(path: &Path) -> CliResult<ExponentialSumModel> {
    let mut text = String::new();
    open(path)?
        .read_to_string(&mut text)
        .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    ExponentialSumModel::from_json(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_output(out: &Output, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> CliResult<()> {
    let result = match &out.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            body(&mut w).and_then(|()| w.flush())
        }
        None => {
            let mut w = io::stdout().lock();
            body(&mut w).and_then(|()| w.flush())
        }
    };
    result.map_err(|e| usage(format!("write failed: {e}")))
}

fn write_json<T: Serialize>(out: &Output, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(usage)?;
    write_output(out, |w| writeln!(w, "{text}"))
}

fn to_io(e: expsum::Error) -> io::Error {
    io::Error::other(e)
}

fn generate(args: &GenerateArgs) -> CliResult<()> {
    check_period(args.period)?;
    let model = read_model(&args.model)?;
    let indices: Vec<i64> = match (&args.indices, &args.index_file) {
        (Some((a, b)), _) => (*a..=*b).collect(),
        (None, Some(path)) => csv_io::read_indices(open(path)?).map_err(usage)?,
        (None, None) => return Err(Failure::Usage("either --indices or --index-file is required".into())),
    };
    if !(args.noise >= 0.0 && args.noise.is_finite()) {
        return Err(Failure::Usage(format!("noise must be non-negative, got {}", args.noise)));
    }
    let mut rows: Vec<(i64, Complex64)> = indices.iter().map(|&k| (k, coeff_model(&model, args.period, k))).collect();
    if args.noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        // each component carries half the variance
        let normal = Normal::new(0.0, args.noise / std::f64::consts::SQRT_2).map_err(usage)?;
        for (_, c) in &mut rows {
            *c += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
        }
    }
    write_output(&args.output, |w| csv_io::write_coefficients(w, &rows).map_err(to_io))
}

#[derive(Serialize)]
struct ClusterRow {
    center: Complex64,
    count: usize,
    spread: f64,
    integer: Option<i64>,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    model: &'a ExponentialSumModel,
    sigma: &'a [i64],
    iterations: usize,
    residual: f64,
    threshold: f64,
    support: Vec<i64>,
    pruned: Vec<i64>,
    clusters: Vec<ClusterRow>,
    condition: f64,
    data_residual: f64,
    estimated_error: f64,
    warnings: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    errors: Option<ModelDistance>,
}

fn report_json<'a>(rep: &'a RecoveryReport, dataset: &FourierDataset) -> ReportJson<'a> {
    ReportJson {
        model: &rep.model,
        sigma: &rep.sigma,
        iterations: rep.aaa.iterations,
        residual: rep.aaa.final_residual,
        threshold: rep.aaa.threshold,
        support: rep.aaa.support_indices.iter().map(|&i| dataset.entries[i].0).collect(),
        pruned: rep.pruned.iter().map(|z| z.re.round() as i64).collect(),
        clusters: rep
            .clusters
            .clusters
            .iter()
            .map(|c| ClusterRow { center: c.center, count: c.count, spread: c.spread(), integer: c.integer() })
            .collect(),
        condition: rep.condition,
        data_residual: rep.data_residual,
        estimated_error: rep.estimated_error,
        warnings: &rep.warnings,
        errors: rep.reference_distance,
    }
}

fn recover_cmd(args: &RecoverArgs) -> CliResult<()> {
    check_period(args.period)?;
    let rows = csv_io::read_coefficients(open(&args.coefficients)?)
        .map_err(|e| usage(format!("{}: {e}", args.coefficients.display())))?;
    let dataset = FourierDataset::new(args.period, rows).map_err(usage)?;
    let reference = args.reference.as_deref().map(read_model).transpose()?;
    let opts = RecoveryOptions {
        tol: args.tol,
        merge_tol: args.merge_tol,
        zero_weight_tol: args.zero_weight_tol,
        mode: args.mode,
        ..Default::default()
    };
    let report = recover(&dataset, &opts, reference.as_ref()).map_err(|e| Failure::Numerical(e.to_string()))?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(path) = &args.model_out {
        let text = report.model.to_json().map_err(usage)?;
        std::fs::write(path, text + "\n").map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    write_json(&args.output, &report_json(&report, &dataset))
}

fn eval(args: &EvalArgs) -> CliResult<()> {
    let model = read_model(&args.model)?;
    let (a, b, n) = args.grid;
    let rows: Vec<(f64, Complex64)> = (0..n)
        .map(|i| {
            let t = a + (b - a) * i as f64 / (n - 1) as f64;
            (t, model.evaluate(t))
        })
        .collect();
    write_output(&args.output, |w| csv_io::write_samples(w, &rows).map_err(to_io))
}

fn compare(args: &CompareArgs) -> CliResult<()> {
    let a = read_model(&args.a)?.canonicalize(expsum::model::DEFAULT_MERGE_TOL);
    let b = read_model(&args.b)?.canonicalize(expsum::model::DEFAULT_MERGE_TOL);
    write_json(&args.output, &model_distance(&a, &b))
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Recover(a) => recover_cmd(a),
        Command::Eval(a) => eval(a),
        Command::Compare(a) => compare(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Usage(msg) | Failure::Numerical(msg)) = &f;
            eprintln!("error: {msg}");
            ExitCode::from(f.code())
        }
    }
}
