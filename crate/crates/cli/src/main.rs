//! `tokenscope`: smell scanning, metrics, similarity, prompt preview,
//! experiment runs and report verification.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error, 3 report
//! verification mismatch. Logs go to stderr; stdout carries only the
//! documented payload.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use tokenscope_core::complexity::{self, ScoreMode};
use tokenscope_core::corpus::{self, SourceSample};
use tokenscope_core::gateway::{BackendKind, Gateway, HttpBackend, MockBackend, MockScript};
use tokenscope_core::harness::{self, report, ExperimentSpec, RunOptions, RunParams};
use tokenscope_core::prompt::{self, PromptStrategy, TaskKind, TemplateSet};
use tokenscope_core::similarity::{self, CodeBleuWeights};
use tokenscope_core::smells::{self, DetectorConfig};
use tokenscope_core::syntax::SourceText;

#[derive(Parser, Debug)]
#[command(
    name = "tokenscope",
    version,
    about = "Measure LLM token consumption on code-reasoning tasks"
)]
struct Cli {
    /// Increase log verbosity on stderr (-v info, -vv debug)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Detect code smells in a corpus; prints one JSON finding per line
    Smell {
        /// Corpus JSONL file
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        /// Detector thresholds and category overrides (TOML)
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
    },
    /// Compute Halstead, cyclomatic and line metrics per sample; prints JSONL
    Metrics {
        /// Corpus JSONL file
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        /// Complexity score reported in the `score` field
        #[arg(long, value_enum, default_value_t = ScoreArg::HalsteadEffort)]
        score_mode: ScoreArg,
    },
    /// Score the similarity of two files; prints one JSON object
    Similarity(SimilarityArgs),
    /// Compose prompts without calling any backend
    Prompt {
        #[command(subcommand)]
        command: PromptCommand,
    },
    /// Run an experiment and write its journal and reports
    Run(RunArgs),
    /// Recompute every derived field and report from a run's journal
    VerifyReport {
        /// Experiment output directory
        path: PathBuf,
    },
    /// Print a run's reports, regenerated from its journal
    Report {
        /// Experiment output directory
        path: PathBuf,
        /// Output format
        #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
        format: ReportFormat,
        /// Print only this CSV table (file name, e.g. table_time_scaled.csv)
        #[arg(long)]
        table: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
enum PromptCommand {
    /// Print the exact prompt bundle for one sample as JSON
    Preview(PreviewArgs),
}

#[derive(Args, Debug)]
struct SimilarityArgs {
    /// Candidate file (generated code or description)
    #[arg(long, value_name = "PATH")]
    candidate: PathBuf,
    /// Reference file
    #[arg(long, value_name = "PATH")]
    reference: PathBuf,
    /// Metric to compute
    #[arg(long, value_enum, default_value_t = SimMetric::Codebleu)]
    metric: SimMetric,
    /// CodeBLEU weights as four comma-separated numbers summing to 1
    #[arg(long, value_name = "A,B,C,D", default_value = "0.25,0.25,0.25,0.25")]
    weights: String,
}

#[derive(Args, Debug)]
struct PreviewArgs {
    /// Corpus JSONL file
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Sample id; defaults to the first sample
    #[arg(long)]
    id: Option<String>,
    /// Task to compose
    #[arg(long, value_enum, default_value_t = TaskArg::Refactor)]
    task: TaskArg,
    /// Strategy: baseline, tips, context-code, context-func, context-all,
    /// role:seer|qaer|devops, cost-abs:N, cost-rel:F. Repeat to combine.
    #[arg(long = "strategy", value_name = "STRATEGY")]
    strategies: Vec<String>,
    /// Template directory laid out like the built-in v1 set
    #[arg(long, value_name = "DIR")]
    templates: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Research question to run (overrides the config's `rq`)
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
    rq: Option<u8>,
    /// Experiment config (TOML)
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Backend to use (overrides the config)
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Mock script (JSONL) for the mock backend
    #[arg(long, value_name = "PATH")]
    mock_script: Option<PathBuf>,
    /// Output directory (overrides the config's `out_dir`)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads (default: config `jobs`, else the number of cores)
    #[arg(long)]
    jobs: Option<usize>,
    /// Discard an existing journal instead of resuming from it
    #[arg(long)]
    fresh: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScoreArg {
    HalsteadVolume,
    HalsteadEffort,
    Cyclomatic,
    Composite,
}

impl From<ScoreArg> for ScoreMode {
    fn from(a: ScoreArg) -> Self {
        match a {
            ScoreArg::HalsteadVolume => ScoreMode::HalsteadVolume,
            ScoreArg::HalsteadEffort => ScoreMode::HalsteadEffort,
            ScoreArg::Cyclomatic => ScoreMode::Cyclomatic,
            ScoreArg::Composite => ScoreMode::Composite,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SimMetric {
    Codebleu,
    Docstring,
    Code,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TaskArg {
    Evaluate,
    Refactor,
    Generate,
    Describe,
}

impl From<TaskArg> for TaskKind {
    fn from(a: TaskArg) -> Self {
        match a {
            TaskArg::Evaluate => TaskKind::Evaluate,
            TaskArg::Refactor => TaskKind::Refactor,
            TaskArg::Generate => TaskKind::GenerateFromDoc,
            TaskArg::Describe => TaskKind::DescribeCode,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BackendArg {
    Live,
    Mock,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReportFormat {
    Csv,
    Json,
}

/// Outcome of a subcommand that ran to completion.
enum Status {
    Ok,
    Mismatch,
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
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();

    match dispatch(cli.command) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Mismatch) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<Status> {
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let status = match command {
        Command::Smell { input, config } => smell(&input, config.as_deref(), &mut out)?,
        Command::Metrics { input, score_mode } => metrics(&input, score_mode.into(), &mut out)?,
        Command::Similarity(args) => similarity(&args, &mut out)?,
        Command::Prompt {
            command: PromptCommand::Preview(args),
        } => preview(&args, &mut out)?,
        Command::Run(args) => run(&args, &mut out)?,
        Command::VerifyReport { path } => verify(&path, &mut out)?,
        Command::Report {
            path,
            format,
            table,
        } => report_cmd(&path, format, table.as_deref(), &mut out)?,
    };
    out.flush()?;
    Ok(status)
}

fn load_samples(path: &Path) -> Result<Vec<SourceSample>> {
    corpus::load_corpus(path).with_context(|| format!("loading corpus {}", path.display()))
}

fn smell(input: &Path, config: Option<&Path>, out: &mut impl Write) -> Result<Status> {
    let config = match config {
        Some(p) => DetectorConfig::from_toml(
            &fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        )?,
        None => DetectorConfig::default(),
    };
    for sample in load_samples(input)? {
        for (unit, findings) in smells::detect_source(&sample.code, &config)? {
            for f in findings {
                let line = json!({
                    "id": sample.id,
                    "unit": unit.name,
                    "kind": f.kind,
                    "category": f.category,
                    "span": f.span,
                    "measured": f.measured_value,
                    "threshold": f.threshold,
                    "evidence": f.evidence,
                });
                writeln!(out, "{line}")?;
            }
        }
    }
    Ok(Status::Ok)
}

fn metrics(input: &Path, mode: ScoreMode, out: &mut impl Write) -> Result<Status> {
    for sample in load_samples(input)? {
        let p = complexity::analyze_source(&sample.code)?;
        let h = &p.halstead;
        let line = json!({
            "id": sample.id,
            "n1": h.n1,
            "n2": h.n2,
            "N1": h.total_operators,
            "N2": h.total_operands,
            "vocabulary": h.vocabulary,
            "length": h.length,
            "volume": h.volume,
            "difficulty": h.difficulty,
            "effort": h.effort,
            "cyclomatic": p.cyclomatic,
            "loc": p.loc,
            "score_mode": mode,
            "score": p.score(mode),
        });
        writeln!(out, "{line}")?;
    }
    Ok(Status::Ok)
}

fn parse_weights(text: &str) -> Result<CodeBleuWeights> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| anyhow!("bad --weights: {e}"))?;
    let [ngram, weighted_ngram, ast_match, dataflow_match] = parts[..] else {
        bail!("--weights needs exactly four numbers");
    };
    let w = CodeBleuWeights {
        ngram,
        weighted_ngram,
        ast_match,
        dataflow_match,
    };
    w.validate()?;
    Ok(w)
}

fn similarity(args: &SimilarityArgs, out: &mut impl Write) -> Result<Status> {
    let read = |p: &Path| fs::read_to_string(p).with_context(|| format!("reading {}", p.display()));
    let candidate = read(&args.candidate)?;
    let reference = read(&args.reference)?;
    let value = match args.metric {
        SimMetric::Codebleu => serde_json::to_value(similarity::codebleu(
            &SourceText::java(candidate),
            &SourceText::java(reference),
            parse_weights(&args.weights)?,
        )?)?,
        SimMetric::Docstring => {
            serde_json::to_value(similarity::docstring_similarity(&candidate, &reference))?
        }
        SimMetric::Code => serde_json::to_value(similarity::code_similarity(
            &SourceText::java(candidate),
            &SourceText::java(reference),
        )?)?,
    };
    writeln!(out, "{value}")?;
    Ok(Status::Ok)
}

fn preview(args: &PreviewArgs, out: &mut impl Write) -> Result<Status> {
    let samples = load_samples(&args.input)?;
    let sample = match &args.id {
        Some(id) => samples
            .iter()
            .find(|s| &s.id == id)
            .ok_or_else(|| anyhow!("no sample `{id}` in {}", args.input.display()))?,
        None => samples
            .first()
            .ok_or_else(|| anyhow!("{} is empty", args.input.display()))?,
    };
    let mut members = args
        .strategies
        .iter()
        .map(|s| PromptStrategy::parse_short(s))
        .collect::<Result<Vec<_>, _>>()?;
    let strategy = match members.len() {
        0 => PromptStrategy::Baseline,
        1 => members.remove(0),
        _ => PromptStrategy::combination(members),
    };
    let templates = match &args.templates {
        Some(dir) => TemplateSet::load(dir, dir.display().to_string())?,
        None => TemplateSet::builtin(),
    };
    let findings: Vec<_> = smells::detect_source(&sample.code, &DetectorConfig::default())?
        .into_iter()
        .flat_map(|(_, f)| f)
        .collect();
    let bundle = prompt::compose(sample, args.task.into(), &strategy, &findings, &templates)?;
    let mut value = serde_json::to_value(&bundle)?;
    value["fingerprint"] = json!(bundle.fingerprint());
    writeln!(out, "{}", serde_json::to_string_pretty(&value)?)?;
    Ok(Status::Ok)
}

fn run(args: &RunArgs, out: &mut impl Write) -> Result<Status> {
    let mut spec = ExperimentSpec::load(&args.config)?;
    if let Some(rq) = args.rq {
        spec.rq = rq;
    }
    if let Some(dir) = &args.out {
        spec.out_dir = dir.clone();
    }
    match args.backend {
        Some(BackendArg::Live) => spec.backend.kind = BackendKind::Live,
        Some(BackendArg::Mock) => spec.backend.kind = BackendKind::Mock,
        None => {}
    }
    if let Some(script) = &args.mock_script {
        spec.backend.mock_script = Some(script.clone());
        if args.backend.is_none() {
            spec.backend.kind = BackendKind::Mock;
        }
    }
    spec.validate()?;
    let gateway = match spec.backend.kind {
        BackendKind::Live => Gateway::new(
            Arc::new(HttpBackend::new(&spec.backend)?),
            spec.backend.clone(),
        )?,
        BackendKind::Mock => {
            let path = spec.backend.mock_script.clone().ok_or_else(|| {
                anyhow!("the mock backend needs --mock-script or backend.mock_script")
            })?;
            let script = MockScript::load(&path)?;
            Gateway::new(Arc::new(MockBackend::new(script)), spec.backend.clone())?
        }
    };
    let options = RunOptions {
        jobs: args.jobs,
        fresh: args.fresh,
    };
    let outcome = harness::run_experiment(&spec, &gateway, &options)?;
    log::info!(
        "{} trials run, {} reused, {} failing of {}",
        outcome.attempted,
        outcome.reused,
        outcome.errors,
        outcome.total
    );
    for f in &outcome.files {
        writeln!(out, "{}", f.display())?;
    }
    Ok(Status::Ok)
}

fn verify(path: &Path, out: &mut impl Write) -> Result<Status> {
    let outcome = harness::verify_reports(path)?;
    for m in &outcome.mismatches {
        writeln!(out, "MISMATCH {m}")?;
    }
    writeln!(
        out,
        "checked {} records and {} files: {} mismatches",
        outcome.records_checked,
        outcome.files_checked,
        outcome.mismatches.len()
    )?;
    Ok(if outcome.is_clean() {
        Status::Ok
    } else {
        Status::Mismatch
    })
}

fn report_cmd(
    path: &Path,
    format: ReportFormat,
    table: Option<&str>,
    out: &mut impl Write,
) -> Result<Status> {
    let params = RunParams::load(path)?;
    let records =
        harness::journal::latest_records(&harness::read_journal(path.join(harness::JOURNAL_FILE))?);
    let files = report::build_reports(&params, &records);
    match format {
        ReportFormat::Json => {
            let summary = files
                .iter()
                .find(|f| f.name == report::SUMMARY_FILE)
                .expect("summary is always built");
            out.write_all(&summary.bytes)?;
        }
        ReportFormat::Csv => {
            let tables: Vec<_> = files.iter().filter(|f| f.name.ends_with(".csv")).collect();
            match table {
                Some(name) => {
                    let f = tables.iter().find(|f| f.name == name).ok_or_else(|| {
                        anyhow!("no table `{name}`; available: {}", names(&tables))
                    })?;
                    out.write_all(&f.bytes)?;
                }
                None => {
                    for (i, f) in tables.iter().enumerate() {
                        if i > 0 {
                            writeln!(out)?;
                        }
                        writeln!(out, "# {}", f.name)?;
                        out.write_all(&f.bytes)?;
                    }
                }
            }
        }
    }
    Ok(Status::Ok)
}

fn names(files: &[&report::ReportFile]) -> String {
    files
        .iter()
        .map(|f| f.name.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}
