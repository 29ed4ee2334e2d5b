//! `normlab`: generate binary expansions, analyze them, and check the vector
//! identities behind the normality criteria.

mod input;

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use normlab::analytics::{
    analyze, parse_checkpoints, AnalysisBundle, AnalyzeOptions, Statistic, WindowMode,
    MAX_BLOCK_LEN,
};
use normlab::digits::{write_bits_file, write_sidecar, Sidecar};
use normlab::harness::{verify_claim_variant, Claim, Variant, VerificationResult, VerifyConfig};
use normlab::Error;

use input::{generate_cached, InputArgs, SourceArgs};

#[derive(Debug, Parser)]
#[command(
    name = "normlab",
    version,
    about = "Exact binary expansions and base-2 normality statistics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate digits and write them as `.nbits` (or print them as 0/1).
    Digits(DigitsArgs),
    /// Compute selected series and block histograms.
    Analyze(AnalyzeArgs),
    /// Check the vector identities exhaustively and on random vectors.
    Verify(VerifyArgs),
    /// Full study bundle: every series, both ns-ratio series, block deviations.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct DigitsArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Number of digits.
    #[arg(long, value_name = "N")]
    bits: usize,
    /// Output `.nbits` path; a `.nbits.json` sidecar is written next to it.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Overlapping,
    Disjoint,
}

impl From<Mode> for WindowMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Overlapping => WindowMode::Overlapping,
            Mode::Disjoint => WindowMode::Disjoint,
        }
    }
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to a file instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Histogram worker threads (0 = one per core). Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Comma-separated statistics: ones, angle, norm, balance, ns.
    #[arg(long, value_parser = parse_statistics, default_value = "ones,angle,norm,balance")]
    series: StatList,
    /// `log2`, `linear:M`, or a comma-separated list of prefix lengths.
    #[arg(long, default_value = "log2")]
    checkpoints: String,
    /// Block lengths: `K`, `A..B`, or a comma-separated list.
    #[arg(long, value_parser = parse_blocks)]
    blocks: Option<BlockSet>,
    #[arg(long, value_enum, default_value_t = Mode::Overlapping)]
    mode: Mode,
    /// Largest n for the ns-ratio series (multiples of 8).
    #[arg(long, default_value_t = 256)]
    ns_max: u64,
    /// Omit per-pattern counts, keeping only deviations.
    #[arg(long)]
    no_counts: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Largest block length for the deviation table.
    #[arg(long, default_value_t = 12)]
    kmax: u32,
    #[arg(long, value_enum, default_value_t = Mode::Overlapping)]
    mode: Mode,
    #[arg(long, default_value_t = 256)]
    ns_max: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
#[group(id = "claim_selection", required = true, multiple = false)]
struct ClaimSelection {
    /// Every claim.
    #[arg(long)]
    all: bool,
    /// One claim (repeatable).
    #[arg(long = "claim", value_name = "NAME")]
    claims: Vec<Claim>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    selection: ClaimSelection,
    /// Largest n; exhaustive up to 12, seeded random vectors beyond.
    #[arg(long, default_value_t = 12)]
    nmax: usize,
    /// Random vectors per claim above the exhaustive range.
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run the deliberately broken checkers instead (they should all fail).
    #[arg(long)]
    mutant: bool,
    /// Print the results as JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone)]
struct StatList(Vec<Statistic>);

#[derive(Debug, Clone)]
struct BlockSet(Vec<u32>);

fn parse_statistics(s: &str) -> Result<StatList, String> {
    s.split(',')
        .map(|t| Statistic::parse(t.trim()).ok_or_else(|| format!("unknown statistic `{t}`")))
        .collect::<Result<_, _>>()
        .map(StatList)
}

fn parse_blocks(s: &str) -> Result<BlockSet, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<u32>()
            .map_err(|_| format!("bad block length `{t}`"))
    };
    let ks: Vec<u32> = if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(format!("empty range `{s}`"));
        }
        (a..=b).collect()
    } else {
        s.split(',').map(num).collect::<Result<_, _>>()?
    };
    if let Some(k) = ks.iter().find(|&&k| k == 0 || k > MAX_BLOCK_LEN) {
        return Err(format!("block length {k} outside 1..={MAX_BLOCK_LEN}"));
    }
    Ok(BlockSet(ks))
}

/// Exit status 2 for bad requests, 1 for everything that went wrong at run time.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidSource(_)
        | Error::InvalidBlockLength { .. }
        | Error::InvalidCheckpoints
        | Error::UnknownClaim(_)
        | Error::InvalidConfig(_)
        | Error::NsTooLarge { .. } => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Digits(a) => cmd_digits(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("normlab: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

type CmdResult = normlab::Result<ExitCode>;

fn cmd_digits(a: DigitsArgs) -> CmdResult {
    let spec = a.source.spec().ok_or_else(|| {
        Error::InvalidConfig("give one source flag (--sqrt, --rational, …)".into())
    })?;
    spec.validate()?;
    if a.bits == 0 {
        return Err(Error::InvalidConfig("--bits must be at least 1".into()));
    }
    let start = Instant::now();
    let bits = generate_cached(&spec, a.bits)?;
    let secs = start.elapsed().as_secs_f64();
    match &a.out {
        Some(path) => {
            write_bits_file(&bits, path)?;
            let created = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
            write_sidecar(&Sidecar::for_source(&spec, created), path)?;
            eprintln!(
                "wrote {} digits of {} to {}",
                bits.len(),
                spec.label(),
                path.display()
            );
        }
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{}", bits.to_string01())?;
        }
    }
    eprintln!(
        "{} digits in {secs:.3} s ({:.3e} digits/s)",
        bits.len(),
        bits.len() as f64 / secs.max(1e-9)
    );
    Ok(ExitCode::SUCCESS)
}

fn ns_checkpoints(ns_max: u64, digits: u64) -> Vec<u64> {
    (8..=ns_max.min(digits)).step_by(8).collect()
}

fn cmd_analyze(a: AnalyzeArgs) -> CmdResult {
    let stream = a.input.load()?;
    let n = stream.bits.len() as u64;
    let wants_ns =
        a.series.0.contains(&Statistic::NsRatio) || a.series.0.contains(&Statistic::NsProportion);
    let checkpoints = parse_checkpoints(&a.checkpoints, n)?;
    if let Some(&last) = checkpoints.last().filter(|&&c| c > n) {
        return Err(Error::InvalidConfig(format!(
            "checkpoint {last} is beyond the {n} available digits"
        )));
    }
    let opts = AnalyzeOptions {
        checkpoints,
        statistics: a.series.0.clone(),
        ns_checkpoints: wants_ns.then(|| ns_checkpoints(a.ns_max, n)),
        block_lengths: a.blocks.map(|b| b.0).unwrap_or_default(),
        mode: a.mode.into(),
        include_counts: !a.no_counts,
        threads: a.output.threads,
        significand: stream.significand,
    };
    let bundle = analyze(stream.bits, stream.spec, &opts)?;
    emit(&bundle, &a.output)
}

fn cmd_report(a: ReportArgs) -> CmdResult {
    if a.kmax == 0 || a.kmax > MAX_BLOCK_LEN {
        return Err(Error::InvalidConfig(format!(
            "--kmax must be in 1..={MAX_BLOCK_LEN}"
        )));
    }
    let stream = a.input.load()?;
    let n = stream.bits.len() as u64;
    let opts = AnalyzeOptions {
        checkpoints: parse_checkpoints("log2", n)?,
        ns_checkpoints: Some(ns_checkpoints(a.ns_max, n)),
        block_lengths: (1..=a.kmax.min(n as u32)).collect(),
        mode: a.mode.into(),
        include_counts: false,
        threads: a.output.threads,
        significand: stream.significand,
        ..AnalyzeOptions::default()
    };
    let bundle = analyze(stream.bits, stream.spec, &opts)?;
    eprint!("{}", report_summary(&bundle));
    emit(&bundle, &a.output)
}

/// Short human-readable digest for stderr.
fn report_summary(b: &AnalysisBundle) -> String {
    let mut s = format!("{} — {} digits\n", b.source.label(), b.digits);
    for r in &b.series {
        if let (Some(last), Some(t)) = (r.last(), &r.tail) {
            let _ = writeln!(
                s,
                "  {:<12} {:>14.9}  tail slope {:+.3e}, amplitude {:.3e}",
                r.statistic.name(),
                last.value,
                t.slope,
                t.amplitude
            );
        }
    }
    if let Some(ns) = &b.ns_ratio {
        if let (Some(e), Some(p)) = (ns.exact.last(), ns.proportion.last()) {
            let _ = writeln!(
                s,
                "  ns ratio at n = {}: exact {:.12} (limit estimate C = {:.12}), proportion-predicted {:.12}, claimed limit {}",
                e.n, e.value, ns.exact_limit_estimate, p.value, ns.claimed_limit
            );
        }
    }
    for h in &b.blocks {
        let _ = writeln!(
            s,
            "  k = {:>2}: max |freq − 2^-k| = {:.3e}, chi² = {:.2}",
            h.k, h.deviation.max_abs_dev, h.deviation.chi_square
        );
    }
    s
}

fn emit(bundle: &AnalysisBundle, out: &OutputArgs) -> CmdResult {
    let text = match out.format {
        Format::Json => bundle.to_json()?,
        Format::Csv => bundle.to_csv(),
    };
    write_output(out.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn write_output(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn cmd_verify(a: VerifyArgs) -> CmdResult {
    let claims = if a.selection.all {
        Claim::ALL.to_vec()
    } else {
        a.selection.claims.clone()
    };
    let cfg = VerifyConfig {
        n_max: a.nmax,
        trials: a.trials,
        seed: a.seed,
    };
    let variant = if a.mutant {
        Variant::Mutant
    } else {
        Variant::Faithful
    };
    let results = claims
        .iter()
        .map(|&c| verify_claim_variant(c, &cfg, variant))
        .collect::<normlab::Result<Vec<_>>>()?;
    let mut stdout = std::io::stdout().lock();
    if a.json {
        let mut text = serde_json::to_string_pretty(&results)?;
        text.push('\n');
        stdout.write_all(text.as_bytes())?;
    } else {
        stdout.write_all(verify_table(&results).as_bytes())?;
    }
    Ok(if results.iter().all(|r| r.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn verify_table(results: &[VerificationResult]) -> String {
    let mut s = format!(
        "{:<17} {:<8} {:<6} {:>10} {:>9} {:>10}  {}\n",
        "claim", "variant", "result", "instances", "failures", "exhaustive", "randomized"
    );
    for r in results {
        let randomized = r.randomized.as_ref().map_or("-".to_string(), |run| {
            format!(
                "n {}..={}, {} trials, seed {}",
                run.n_min, run.n_max, run.trials, run.seed
            )
        });
        let _ = writeln!(
            s,
            "{:<17} {:<8} {:<6} {:>10} {:>9} {:>10}  {}",
            r.claim.name(),
            match r.variant {
                Variant::Faithful => "faithful",
                Variant::Mutant => "mutant",
            },
            if r.passed { "pass" } else { "FAIL" },
            r.instances,
            r.failure_count,
            format!("n ≤ {}", r.exhaustive_up_to),
            randomized
        );
        if let Some(f) = r.failures.first() {
            let _ = writeln!(
                s,
                "    first counterexample (n = {}): {} — {}",
                f.n, f.bits, f.detail
            );
        }
    }
    s
}
