//! `trustinfer`: trust decisions from the command line.
//!
//! Exit status: 0 retain / success, 1 reject, 2 usage, parse or domain error.
//! Reports go to stdout, diagnostics to stderr.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use trust_inference::bayes::{sequential_update, PosteriorReport};
use trust_inference::formats::{
    events_to_stream, parse_hypothesis_set, parse_observation, parse_profile, ParsedObservation,
};
use trust_inference::harness::{
    monte_carlo_error_rates, simulate_stream, ErrorRateReport, StreamSpec,
};
use trust_inference::mdl::{
    compressor_length_estimate, formulate_null, MdlReport, QuantizedFamily,
};
use trust_inference::rng::derive_seed;
use trust_inference::testing::{fisher_decide, np_decide, point_report};
use trust_inference::{
    BehaviorAlphabet, BehaviorProfile, HypothesisSet, TestReport, TrustError, Variant, Verdict,
};

const EXIT_REJECT: u8 = 1;
const EXIT_ERROR: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "trustinfer",
    version,
    about = "Trust decisions as statistical hypothesis tests"
)]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand.
#[derive(Args, Debug, Clone)]
struct RunConfig {
    /// Significance level.
    #[arg(long, global = true, default_value_t = 0.01)]
    alpha: f64,
    /// Neyman-Pearson variant.
    #[arg(long, global = true, value_enum, default_value_t = VariantArg::Deterministic)]
    variant: VariantArg,
    /// Grid resolution: the MDL family uses multiples of 2^-k.
    #[arg(long, global = true, default_value_t = 8)]
    k: u32,
    /// Seed for every random draw; required on randomized paths.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    output: OutputFormat,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Deterministic,
    Randomized,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Deterministic => Variant::Deterministic,
            VariantArg::Randomized => Variant::Randomized,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Test the trustworthy null against an observed event or stream.
    Test {
        #[command(subcommand)]
        kind: TestKind,
    },
    /// Posterior weights over a hypothesis set after a stream.
    Bayes {
        /// Hypothesis-set file (uniform priors when none are given).
        hypotheses: PathBuf,
        #[command(flatten)]
        data: EventSource,
    },
    /// Select the null hypothesis by two-part MDL over the quantized family.
    Mdl {
        /// Observation file: event stream or JSON counts.
        stream: PathBuf,
        /// Comma-separated alphabet, in order.
        #[arg(long, value_delimiter = ',', required = true)]
        alphabet: Vec<String>,
        /// Also report the length under a built-in stream coder (e.g. lz78).
        #[arg(long)]
        compressor: Option<String>,
    },
    /// Draw an i.i.d. event stream from a profile.
    Simulate {
        profile: PathBuf,
        /// Number of events.
        #[arg(long)]
        n: u64,
        /// Write the stream here instead of stdout.
        #[arg(long, short = 'o')]
        out: Option<PathBuf>,
    },
    /// Estimate the error rates of the Neyman-Pearson test by simulation.
    Calibrate {
        null: PathBuf,
        alternative: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
}

#[derive(Subcommand, Debug)]
enum TestKind {
    /// Fisher significance test: reject when the p-value is below α.
    Fisher {
        null: PathBuf,
        #[command(flatten)]
        data: EventSource,
    },
    /// Point significance: reject when the event's null probability is below α.
    Point {
        null: PathBuf,
        #[command(flatten)]
        data: EventSource,
    },
    /// Neyman-Pearson likelihood-ratio test of the null against an alternative.
    Np {
        null: PathBuf,
        alternative: PathBuf,
        #[command(flatten)]
        data: EventSource,
    },
}

#[derive(Args, Debug)]
#[group(required = false, multiple = false)]
struct EventSource {
    /// A single observed event.
    #[arg(long)]
    event: Option<String>,
    /// Observation file: newline-delimited events or JSON counts.
    #[arg(long)]
    stream: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Domain(TrustError),
    Io(PathBuf, std::io::Error),
    Usage(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Domain(e) => write!(f, "{e}"),
            CliError::Io(path, e) => write!(f, "{}: {e}", path.display()),
            CliError::Usage(msg) => f.write_str(msg),
        }
    }
}

impl From<TrustError> for CliError {
    fn from(e: TrustError) -> Self {
        CliError::Domain(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn load_profile(path: &Path) -> CliResult<BehaviorProfile> {
    parse_profile(&read(path)?).map_err(|e| with_path(path, e))
}

fn with_path(path: &Path, e: TrustError) -> CliError {
    match e {
        TrustError::Parse(msg) => {
            CliError::Domain(TrustError::Parse(format!("{}: {msg}", path.display())))
        }
        other => CliError::Domain(other),
    }
}

/// Events to test, in order. Counts files are expanded in alphabet order.
fn load_events(source: &EventSource, alphabet: &BehaviorAlphabet) -> CliResult<Vec<String>> {
    match (&source.event, &source.stream) {
        (Some(event), None) => {
            alphabet.index_of(event)?;
            Ok(vec![event.clone()])
        }
        (None, Some(path)) => {
            let parsed =
                parse_observation(&read(path)?, alphabet).map_err(|e| with_path(path, e))?;
            Ok(ordered_events(&parsed)
                .into_iter()
                .map(|i| alphabet.symbol(i).to_string())
                .collect())
        }
        _ => Err(CliError::Usage(
            "exactly one of --event or --stream is required".into(),
        )),
    }
}

fn ordered_events(parsed: &ParsedObservation) -> Vec<usize> {
    match &parsed.events {
        Some(events) => events.clone(),
        None => parsed
            .observation
            .counts()
            .iter()
            .enumerate()
            .flat_map(|(i, &n)| std::iter::repeat_n(i, n as usize))
            .collect(),
    }
}

fn require_seed(config: &RunConfig, what: &str) -> CliResult<u64> {
    config
        .seed
        .ok_or_else(|| CliError::Usage(format!("{what} draws random numbers; pass --seed")))
}

fn emit_json<T: Serialize>(value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Domain(TrustError::Parse(e.to_string())))?;
    println!("{text}");
    Ok(())
}

#[derive(Serialize)]
struct EventReport<'a> {
    event: &'a str,
    #[serde(flatten)]
    report: &'a TestReport,
}

fn fmt_real(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x}")
    }
}

fn run_test(kind: &TestKind, config: &RunConfig) -> CliResult<u8> {
    let variant = Variant::from(config.variant);
    let (reports, events) = match kind {
        TestKind::Fisher { null, data } | TestKind::Point { null, data } => {
            let p0 = load_profile(null)?;
            let events = load_events(data, p0.alphabet())?;
            let fisher = matches!(kind, TestKind::Fisher { .. });
            let reports = events
                .iter()
                .map(|x| {
                    if fisher {
                        fisher_decide(&p0, x, config.alpha)
                    } else {
                        point_report(&p0, x, config.alpha)
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            (reports, events)
        }
        TestKind::Np {
            null,
            alternative,
            data,
        } => {
            let p0 = load_profile(null)?;
            let p1 = load_profile(alternative)?;
            if p0.alphabet() != p1.alphabet() {
                return Err(TrustError::AlphabetMismatch.into());
            }
            let seed = if variant.is_randomized() {
                Some(require_seed(config, "the randomized variant")?)
            } else {
                None
            };
            let events = load_events(data, p0.alphabet())?;
            let single = events.len() == 1;
            let reports = events
                .iter()
                .enumerate()
                .map(|(t, x)| {
                    // A lone event uses the seed as given; streams derive one per event.
                    let s = seed.map(|s| if single { s } else { derive_seed(s, t as u64) });
                    np_decide(&p0, &p1, config.alpha, x, variant, s)
                })
                .collect::<Result<Vec<_>, _>>()?;
            (reports, events)
        }
    };

    match config.output {
        OutputFormat::Json if reports.len() == 1 => emit_json(&reports[0])?,
        OutputFormat::Json => emit_json(
            &events
                .iter()
                .zip(&reports)
                .map(|(event, report)| EventReport { event, report })
                .collect::<Vec<_>>(),
        )?,
        OutputFormat::Text => {
            for (event, r) in events.iter().zip(&reports) {
                let verdict = match r.verdict {
                    Verdict::Retain => "retain",
                    Verdict::Reject => "reject",
                };
                let power = r.power.map(|p| format!(" power={p}")).unwrap_or_default();
                println!(
                    "{event}: {verdict} (statistic={} threshold={} rejection_probability={} size={}{power})",
                    fmt_real(r.statistic),
                    fmt_real(r.threshold),
                    r.rejection_probability,
                    r.size,
                );
            }
        }
    }
    let any_reject = reports.iter().any(|r| r.verdict == Verdict::Reject);
    Ok(if any_reject { EXIT_REJECT } else { 0 })
}

fn with_default_priors(hset: HypothesisSet) -> CliResult<HypothesisSet> {
    if hset.has_priors() {
        return Ok(hset);
    }
    let w = 1.0 / hset.len() as f64;
    let pairs = hset.hypotheses().iter().cloned().map(|h| (h, w)).collect();
    Ok(HypothesisSet::from_weights(pairs)?)
}

fn run_bayes(path: &Path, data: &EventSource, config: &RunConfig) -> CliResult<u8> {
    let hset =
        with_default_priors(parse_hypothesis_set(&read(path)?).map_err(|e| with_path(path, e))?)?;
    let events = load_events(data, hset.alphabet())?;
    let post = sequential_update(&hset, events.iter().map(String::as_str))?;
    let report = PosteriorReport::new(&post);
    match config.output {
        OutputFormat::Json => emit_json(&report)?,
        OutputFormat::Text => {
            for w in &report.weights {
                println!("{}: {}", w.id, w.weight);
            }
            println!("map: {}", report.map);
            println!("log2_evidence: {}", fmt_real(report.log2_evidence));
        }
    }
    Ok(0)
}

fn run_mdl(
    path: &Path,
    alphabet: &[String],
    compressor: Option<&str>,
    config: &RunConfig,
) -> CliResult<u8> {
    let alphabet = BehaviorAlphabet::new(alphabet.iter().map(String::as_str))?;
    let parsed = parse_observation(&read(path)?, &alphabet).map_err(|e| with_path(path, e))?;
    let family = QuantizedFamily::new(alphabet, config.k)?;
    let null = formulate_null(&parsed.observation, &family)?;
    let compressed = compressor
        .map(|method| {
            compressor_length_estimate(&parsed.observation, &ordered_events(&parsed), method)
        })
        .transpose()?;
    let report = MdlReport::new(&family, &null.selection, compressed);
    match config.output {
        OutputFormat::Json => emit_json(&report)?,
        OutputFormat::Text => {
            println!("selected: {}", report.selected.id);
            for (s, p) in report.selected.alphabet.iter().zip(&report.selected.probs) {
                println!("  {s}: {p}");
            }
            println!("two_part_bits: {}", fmt_real(report.two_part_bits));
            println!("data_bits: {}", fmt_real(report.data_bits));
            println!("hypothesis_bits: {}", report.hypothesis_bits);
            println!("family_size: {}", report.family_size);
            if let Some(bits) = report.compressor_bits {
                println!("compressor_bits: {bits}");
            }
        }
    }
    Ok(0)
}

fn run_simulate(path: &Path, n: u64, out: Option<&Path>, config: &RunConfig) -> CliResult<u8> {
    let profile = load_profile(path)?;
    let seed = require_seed(config, "simulate")?;
    let stream = simulate_stream(&StreamSpec {
        profile: profile.clone(),
        length: n,
        seed,
    })?;
    let text = events_to_stream(profile.alphabet(), &stream.events);
    match out {
        Some(target) => {
            fs::write(target, text).map_err(|e| CliError::Io(target.to_path_buf(), e))?
        }
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(PathBuf::from("<stdout>"), e))?,
    }
    Ok(0)
}

fn run_calibrate(
    null: &Path,
    alternative: &Path,
    trials: u64,
    config: &RunConfig,
) -> CliResult<u8> {
    let p0 = load_profile(null)?;
    let p1 = load_profile(alternative)?;
    let seed = require_seed(config, "calibrate")?;
    let report: ErrorRateReport =
        monte_carlo_error_rates(&p0, &p1, config.alpha, trials, seed, config.variant.into())?;
    match config.output {
        OutputFormat::Json => emit_json(&report)?,
        OutputFormat::Text => {
            println!(
                "fpr_hat: {} (±{} at 95%)",
                report.fpr_hat, report.wilson_halfwidth
            );
            println!("fnr_hat: {}", report.fnr_hat);
            println!("achieved_alpha: {}", report.achieved_alpha);
            println!("power: {}", report.power);
            println!("trials: {}", report.trials);
        }
    }
    Ok(0)
}

fn run(cli: &Cli) -> CliResult<u8> {
    let config = &cli.config;
    match &cli.command {
        Command::Test { kind } => run_test(kind, config),
        Command::Bayes { hypotheses, data } => run_bayes(hypotheses, data, config),
        Command::Mdl {
            stream,
            alphabet,
            compressor,
        } => run_mdl(stream, alphabet, compressor.as_deref(), config),
        Command::Simulate { profile, n, out } => run_simulate(profile, *n, out.as_deref(), config),
        Command::Calibrate {
            null,
            alternative,
            trials,
        } => run_calibrate(null, alternative, *trials, config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("trustinfer: error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
