//! Command-line front end.
//!
//! Exit codes: 0 success, 1 corpus validation found violations,
//! 2 usage or input error, 3 scorer backend error, 4 benchmark quality gate.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use alignscore::config::{RunConfig, Settings};
use alignscore::corpus::{
    build_corpus, derive_seed, load_manifest, mask_tokens, validate_corpus, AlignmentExample,
    BinLabel, CorpusBuildConfig, Label, Paraphraser, Pipeline, Split, SynonymParaphraser, Task,
    DEFAULT_MASK_RATIO, DEFAULT_PER_DATASET_CAP,
};
use alignscore::eval::{
    load_benchmark_dir, run_benchmark, BenchError, BenchOptions, BenchmarkKind,
};
use alignscore::metric::{align_score, EvalMode, HeadChoice, MetricError};
use alignscore::scorer::{AlignmentScorer, ScorerError, ScorerKind};

#[derive(Parser)]
#[command(
    name = "alignscore",
    version,
    about = "Factual-consistency scoring toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score claims against contexts, one pair per line.
    Score(ScoreArgs),
    /// Run a benchmark protocol over a dataset directory.
    Bench(BenchArgs),
    /// Build the unified alignment corpus from a source manifest.
    Convert(ConvertArgs),
    /// Generate synthetic pairs from plain-text lines.
    Synth(SynthArgs),
    /// Check a corpus file against the example schema.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunFlags {
    #[arg(long, value_enum)]
    scorer: Option<ScorerArg>,
    /// Remote scorer base URL (overrides ALIGNSCORE_ENDPOINT).
    #[arg(long)]
    endpoint: Option<String>,
    /// Fixture table (JSONL) for the fixture scorer.
    #[arg(long)]
    fixture: Option<PathBuf>,
    #[arg(long, value_parser = parse_head)]
    head: Option<HeadChoice>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<EvalMode>,
    #[arg(long)]
    chunk_budget: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScorerArg {
    Fixture,
    Lexical,
    Remote,
}

fn parse_head(s: &str) -> Result<HeadChoice, String> {
    s.parse()
}

fn parse_mode(s: &str) -> Result<EvalMode, String> {
    s.parse()
}

fn parse_kind(s: &str) -> Result<BenchmarkKind, String> {
    s.parse()
}

fn parse_task(s: &str) -> Result<Task, String> {
    s.parse()
}

#[derive(Args)]
struct ScoreArgs {
    /// One context per line.
    #[arg(long)]
    context: PathBuf,
    /// One claim per line, aligned with the context file.
    #[arg(long)]
    claims: PathBuf,
    /// Also write `{"index", "score"}` JSONL here.
    #[arg(long)]
    jsonl: Option<PathBuf>,
    #[command(flatten)]
    run: RunFlags,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory holding manifest.json and one JSONL file per dataset.
    #[arg(long)]
    data: PathBuf,
    /// summac, true or correlation.
    #[arg(long, value_parser = parse_kind)]
    kind: BenchmarkKind,
    /// Output directory for report.json and report.txt.
    #[arg(long)]
    out: PathBuf,
    /// Recorded verbatim in the report metadata.
    #[arg(long)]
    timestamp: Option<String>,
    #[command(flatten)]
    run: RunFlags,
}

#[derive(Args)]
struct ConvertArgs {
    /// Source manifest (JSON array or JSONL).
    #[arg(long)]
    manifest: PathBuf,
    /// Corpus JSONL output path.
    #[arg(long)]
    output: PathBuf,
    /// Build report path; defaults to `<output>.report.json`.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Task to leave out; repeatable.
    #[arg(long = "exclude-task", value_parser = parse_task)]
    exclude: Vec<Task>,
    #[arg(long, default_value_t = DEFAULT_PER_DATASET_CAP)]
    cap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Perturbation {
    /// Mask 25% of tokens; the result is a not-aligned pair.
    Mask,
    /// Synonym paraphrase; the result is an aligned pair.
    Paraphrase,
}

#[derive(Args)]
struct SynthArgs {
    /// Plain text, one source sentence per line.
    #[arg(long)]
    source: PathBuf,
    #[arg(long, value_enum)]
    perturbation: Perturbation,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Corpus JSONL output; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    corpus: PathBuf,
}

#[derive(Debug)]
enum Failure {
    Violations,
    Usage(String),
    Backend(String),
    QualityGate(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Violations => 1,
            Failure::Usage(_) => 2,
            Failure::Backend(_) => 3,
            Failure::QualityGate(_) => 4,
        }
    }
}

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn io_failure(path: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::Usage(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Score(args) => cmd_score(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Convert(args) => cmd_convert(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Validate(args) => cmd_validate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Violations => {}
                Failure::Usage(m) | Failure::Backend(m) | Failure::QualityGate(m) => {
                    eprintln!("error: {m}")
                }
            }
            ExitCode::from(failure.code())
        }
    }
}

fn resolve(flags: &RunFlags) -> Result<RunConfig, Failure> {
    let file = match &flags.config {
        Some(path) => Settings::from_file(path).map_err(usage)?,
        None => Settings::default(),
    };
    let cli = Settings {
        scorer: flags.scorer.map(|s| match s {
            ScorerArg::Fixture => ScorerKind::Fixture,
            ScorerArg::Lexical => ScorerKind::Lexical,
            ScorerArg::Remote => ScorerKind::Remote,
        }),
        endpoint: flags.endpoint.clone(),
        fixture: flags.fixture.clone(),
        head: flags.head,
        mode: flags.mode,
        chunk_budget: flags.chunk_budget,
        seed: flags.seed,
        workers: flags.workers,
        ..Settings::default()
    };
    file.overlay(Settings::from_env())
        .overlay(cli)
        .resolve()
        .map_err(usage)
}

fn build_scorer(config: &RunConfig) -> Result<Box<dyn AlignmentScorer>, Failure> {
    config.scorer.build().map_err(usage)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(usage)
}

fn metric_failure(line: usize, e: MetricError) -> Failure {
    let message = format!("pair {line}: {e}");
    match e {
        MetricError::Scorer(
            ScorerError::Transport { .. }
            | ScorerError::Timeout { .. }
            | ScorerError::Protocol { .. }
            | ScorerError::InvalidJudgment { .. }
            | ScorerError::UnknownPair { .. },
        ) => Failure::Backend(message),
        _ => Failure::Usage(message),
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>, Failure> {
    let text = fs::read_to_string(path).map_err(io_failure(path))?;
    Ok(text.lines().map(str::to_string).collect())
}

fn cmd_score(args: ScoreArgs) -> Result<(), Failure> {
    let config = resolve(&args.run)?;
    let contexts = read_lines(&args.context)?;
    let claims = read_lines(&args.claims)?;
    if contexts.len() != claims.len() {
        return Err(usage(format!(
            "{} has {} lines but {} has {}",
            args.context.display(),
            contexts.len(),
            args.claims.display(),
            claims.len()
        )));
    }
    let scorer = build_scorer(&config)?;
    let metric = config.metric();
    let scores: Vec<f64> = pool(config.workers)?.install(|| {
        contexts
            .par_iter()
            .zip(claims.par_iter())
            .enumerate()
            .map(|(i, (context, claim))| {
                align_score(context, claim, scorer.as_ref(), &metric)
                    .map_err(|e| metric_failure(i + 1, e))
            })
            .collect::<Result<_, _>>()
    })?;

    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    for s in &scores {
        writeln!(out, "{s:.6}").map_err(usage)?;
    }
    out.flush().map_err(usage)?;
    if let Some(path) = &args.jsonl {
        let mut body = String::new();
        for (index, score) in scores.iter().enumerate() {
            body.push_str(&serde_json::json!({ "index": index, "score": score }).to_string());
            body.push('\n');
        }
        fs::write(path, body).map_err(io_failure(path))?;
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), Failure> {
    let config = resolve(&args.run)?;
    let records = load_benchmark_dir(&args.data).map_err(usage)?;
    let scorer = build_scorer(&config)?;
    let options = BenchOptions {
        workers: config.workers,
        seed: config.seed,
        timestamp: args.timestamp.clone(),
    };
    let report = run_benchmark(
        &records,
        args.kind,
        scorer.as_ref(),
        &config.metric(),
        &options,
    )
    .map_err(|e| match e {
        BenchError::QualityGate { .. } => Failure::QualityGate(e.to_string()),
        other => usage(other),
    })?;
    fs::create_dir_all(&args.out).map_err(io_failure(&args.out))?;
    let json_path = args.out.join("report.json");
    let table_path = args.out.join("report.txt");
    let table = report.to_table();
    fs::write(&json_path, report.to_json()).map_err(io_failure(&json_path))?;
    fs::write(&table_path, &table).map_err(io_failure(&table_path))?;
    print!("{table}");
    Ok(())
}

fn cmd_convert(args: ConvertArgs) -> Result<(), Failure> {
    let sources = load_manifest(&args.manifest).map_err(usage)?;
    let mut config = CorpusBuildConfig::new(&args.output);
    config.per_dataset_cap = args.cap;
    config.seed = args.seed;
    for task in &args.exclude {
        config = config.excluding(*task);
    }
    let pipeline = Pipeline::default();
    let report = match args.workers {
        Some(n) => pool(n.max(1))?.install(|| build_corpus(&config, &sources, &pipeline)),
        None => build_corpus(&config, &sources, &pipeline),
    }
    .map_err(usage)?;
    let report_path = args.report.unwrap_or_else(|| {
        let mut name = args.output.clone().into_os_string();
        name.push(".report.json");
        PathBuf::from(name)
    });
    let mut body = serde_json::to_string_pretty(&report).map_err(usage)?;
    body.push('\n');
    fs::write(&report_path, body).map_err(io_failure(&report_path))?;
    for d in &report.datasets {
        println!(
            "{}: {} rows, {} rejected, {} written",
            d.dataset, d.input_rows, d.rejected_rows, d.written
        );
    }
    println!("total: {}", report.total_written);
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), Failure> {
    let lines = read_lines(&args.source)?;
    let dataset = args
        .source
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "synth".into());
    let paraphraser = SynonymParaphraser::default();
    let mut body = String::new();
    for (row, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (text_b, label) = match args.perturbation {
            Perturbation::Paraphrase => (paraphraser.paraphrase(line), BinLabel::Aligned),
            Perturbation::Mask => {
                let seed = derive_seed(args.seed, &dataset, row as u64);
                let masked = mask_tokens(line, DEFAULT_MASK_RATIO, seed)
                    .map_err(|e| usage(format!("line {}: {e}", row + 1)))?;
                (masked.text(), BinLabel::NotAligned)
            }
        };
        let example = AlignmentExample {
            text_a: line.trim().to_string(),
            text_b,
            label: Label::Bin(label),
            task: Task::Paraphrase,
            dataset: dataset.clone(),
            split: Split::Train,
        };
        body.push_str(&example.to_json_line());
        body.push('\n');
    }
    match &args.output {
        Some(path) => fs::write(path, body).map_err(io_failure(path)),
        None => io::stdout()
            .lock()
            .write_all(body.as_bytes())
            .map_err(usage),
    }
}

fn cmd_validate(args: ValidateArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.corpus).map_err(io_failure(&args.corpus))?;
    let violations = validate_corpus(&text);
    if violations.is_empty() {
        println!(
            "ok: {} examples",
            text.lines().filter(|l| !l.trim().is_empty()).count()
        );
        return Ok(());
    }
    for v in &violations {
        println!("line {}: {}", v.line, v.reason);
    }
    Err(Failure::Violations)
}
