//! Experiment orchestration for the five research questions.
//!
//! An [`ExperimentSpec`] expands into a deterministic plan of units. A unit
//! is one sample (under one strategy row) with a chain of dependent steps:
//! for instance refactor the code, describe the result, regenerate code from
//! the description. Units run on a bounded worker pool; their records are
//! journaled in plan order, and reports are computed from the journal alone.

pub mod journal;
pub mod metrics;
pub mod report;

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complexity::ScoreMode;
use crate::corpus::{self, CorpusError, SampleLabel, SourceSample};
use crate::gateway::{Gateway, GatewayError, RequestMeta};
use crate::prompt::{
    self, PromptError, PromptStrategy, StrategyRow, TaskKind, TemplateSet, DEFAULT_ABSOLUTE_BUDGET,
    DEFAULT_RELATIVE_FRACTION,
};
use crate::smells::{self, DetectorConfig, SmellFinding, SmellKind};
use crate::syntax::SourceText;

pub use journal::{
    extract_code, read_journal, DerivedMetrics, GateMetric, JournalWriter, TrialQuality,
    TrialRecord, TrialStatus, JOURNAL_FILE, JOURNAL_VERSION,
};
pub use metrics::{aggregate, AggregateStats, MetricError, NormalizedTokens};
pub use report::{build_reports, verify_reports, ReportFile, VerifyOutcome, SUMMARY_FILE};

pub const RUN_FILE: &str = "run.json";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment spec: {0}")]
    Config(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("journal line {line}: {reason}")]
    Journal { line: usize, reason: String },
    #[error("{errors} of {total} trials failed (limit {limit:.0}%)")]
    TooManyErrors {
        errors: usize,
        total: usize,
        limit: f64,
    },
    #[error("{0} has no run.json; not an experiment output directory")]
    MissingRun(PathBuf),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthBaseline {
    /// The same sample's refactored counterpart.
    #[default]
    Refactored,
    /// The mean over the clean corpus.
    CleanMean,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Corpora {
    pub smelly: Option<PathBuf>,
    pub clean: Option<PathBuf>,
}

/// One strategy row as written in a config file: a label and one or more
/// members (several members form a combination).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySpec {
    pub label: String,
    pub members: Vec<PromptStrategy>,
}

impl StrategySpec {
    pub fn to_row(&self) -> Result<StrategyRow, PromptError> {
        let strategy = match self.members.as_slice() {
            [] => {
                return Err(PromptError::InvalidStrategy(format!(
                    "row `{}` has no members",
                    self.label
                )))
            }
            [one] => one.clone(),
            many => PromptStrategy::combination(many.to_vec()),
        };
        strategy.validate()?;
        Ok(StrategyRow {
            label: self.label.clone(),
            strategy,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostDefaults {
    pub absolute_budget: u32,
    pub relative_fraction: f64,
}

impl Default for CostDefaults {
    fn default() -> Self {
        Self {
            absolute_budget: DEFAULT_ABSOLUTE_BUDGET,
            relative_fraction: DEFAULT_RELATIVE_FRACTION,
        }
    }
}

fn default_threshold() -> f64 {
    0.70
}
fn default_error_fraction() -> f64 {
    0.2
}
fn default_true() -> bool {
    true
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Research question 1..=5; may be left out and supplied on the command
    /// line.
    #[serde(default)]
    pub rq: u8,
    #[serde(default)]
    pub corpora: Corpora,
    /// Omitted: the research question's default rows. Present but empty:
    /// a validation error.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategies: Option<Vec<StrategySpec>>,
    #[serde(default)]
    pub backend: crate::gateway::BackendConfig,
    #[serde(default)]
    pub score_mode: ScoreMode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(default = "default_threshold")]
    pub similarity_threshold: f64,
    #[serde(default)]
    pub gate_metric: GateMetric,
    #[serde(default = "default_error_fraction")]
    pub max_error_fraction: f64,
    #[serde(default)]
    pub growth_baseline: GrowthBaseline,
    /// Describe and regenerate each refactoring to score it (RQ4, RQ5).
    #[serde(default = "default_true")]
    pub quality_chain: bool,
    #[serde(default)]
    pub cost: CostDefaults,
    #[serde(default)]
    pub detector: DetectorConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template_dir: Option<PathBuf>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ExperimentError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml(&text)
    }

    /// Strategy rows after defaults.
    pub fn rows(&self) -> Result<Vec<StrategyRow>, ExperimentError> {
        match &self.strategies {
            Some(list) => Ok(list
                .iter()
                .map(StrategySpec::to_row)
                .collect::<Result<_, _>>()?),
            None => Ok(default_rows(self.rq, self.cost)),
        }
    }

    /// Check everything that can be checked without running trials.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if !(1..=5).contains(&self.rq) {
            return bad(format!("rq must be 1..5, got {}", self.rq));
        }
        if matches!(&self.strategies, Some(s) if s.is_empty()) {
            return bad("strategy list is empty".into());
        }
        let rows = self.rows()?;
        let labels: BTreeSet<&str> = rows.iter().map(|r| r.label.as_str()).collect();
        if labels.len() != rows.len() {
            return bad("strategy labels must be unique".into());
        }
        if rows
            .iter()
            .any(|r| r.label.is_empty() || r.label.contains('/'))
        {
            return bad("strategy labels must be non-empty and contain no `/`".into());
        }
        let expected = match self.rq {
            1..=3 => Some(1),
            4 => Some(2),
            _ => None,
        };
        if let Some(n) = expected {
            if rows.len() != n {
                return bad(format!(
                    "rq {} takes exactly {n} strategy row(s), got {}",
                    self.rq,
                    rows.len()
                ));
            }
        }
        if !(0.0..=1.0).contains(&self.similarity_threshold) {
            return bad("similarity_threshold must lie in [0, 1]".into());
        }
        if !(0.0..=1.0).contains(&self.max_error_fraction) {
            return bad("max_error_fraction must lie in [0, 1]".into());
        }
        if self.jobs == Some(0) {
            return bad("jobs must be positive".into());
        }
        self.detector
            .validate()
            .map_err(|e| ExperimentError::Config(e.to_string()))?;
        self.backend.validate()?;
        let Some(smelly) = &self.corpora.smelly else {
            return bad("corpora.smelly is required".into());
        };
        let mut needed = vec![smelly];
        if self.needs_clean() {
            match &self.corpora.clean {
                Some(c) => needed.push(c),
                None => return bad("corpora.clean is required for this experiment".into()),
            }
        }
        for p in needed {
            if !p.is_file() {
                return bad(format!("corpus file {} does not exist", p.display()));
            }
        }
        Ok(())
    }

    fn needs_clean(&self) -> bool {
        self.rq == 1 || (self.rq == 3 && self.growth_baseline == GrowthBaseline::CleanMean)
    }

    pub fn params(&self, template_version: &str) -> Result<RunParams, ExperimentError> {
        Ok(RunParams {
            rq: self.rq,
            rows: self.rows()?,
            score_mode: self.score_mode,
            seed: self.seed,
            sample_cap: self.sample_cap,
            similarity_threshold: self.similarity_threshold,
            gate_metric: self.gate_metric,
            growth_baseline: self.growth_baseline,
            quality_chain: self.quality_chain,
            detector: self.detector.clone(),
            template_version: template_version.to_string(),
        })
    }
}

/// Default strategy rows per research question.
pub fn default_rows(rq: u8, cost: CostDefaults) -> Vec<StrategyRow> {
    let row = |label: &str, strategy| StrategyRow {
        label: label.into(),
        strategy,
    };
    match rq {
        4 => vec![
            row("No Tips", PromptStrategy::Baseline),
            row("With Tips", PromptStrategy::SmellTips),
        ],
        5 => prompt::strategy_presets(cost.absolute_budget, cost.relative_fraction),
        _ => vec![row("Base", PromptStrategy::Baseline)],
    }
}

/// Everything reports depend on besides the journal. Written to `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub rq: u8,
    pub rows: Vec<StrategyRow>,
    pub score_mode: ScoreMode,
    pub seed: u64,
    pub sample_cap: Option<usize>,
    pub similarity_threshold: f64,
    pub gate_metric: GateMetric,
    pub growth_baseline: GrowthBaseline,
    pub quality_chain: bool,
    pub detector: DetectorConfig,
    pub template_version: String,
}

impl RunParams {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("params serialize") + "\n"
    }

    pub fn load(out_dir: &Path) -> Result<Self, ExperimentError> {
        let path = out_dir.join(RUN_FILE);
        let text = fs::read_to_string(&path)
            .map_err(|_| ExperimentError::MissingRun(out_dir.to_path_buf()))?;
        serde_json::from_str(&text)
            .map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))
    }
}

/// Where a step's prompt input comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    /// The corpus sample's own code.
    Orig,
    /// Code extracted from an earlier step's output.
    Code(&'static str),
    /// An earlier step's output used as a description.
    Doc(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub task: TaskKind,
    pub variant: &'static str,
    pub source: Source,
    /// Use the unit's strategy row; otherwise the baseline.
    pub row_strategy: bool,
}

impl Step {
    const fn new(
        task: TaskKind,
        variant: &'static str,
        source: Source,
        row_strategy: bool,
    ) -> Self {
        Self {
            task,
            variant,
            source,
            row_strategy,
        }
    }

    pub fn name(&self) -> String {
        format!("{}/{}", self.task, self.variant)
    }
}

const REFACTOR_ORIG: Step = Step::new(TaskKind::Refactor, "orig", Source::Orig, true);
const REFACTOR_RF: Step = Step::new(
    TaskKind::Refactor,
    "rf",
    Source::Code("refactor/orig"),
    true,
);
const DESCRIBE_ORIG: Step = Step::new(TaskKind::DescribeCode, "orig", Source::Orig, false);
const DESCRIBE_RF: Step = Step::new(
    TaskKind::DescribeCode,
    "rf",
    Source::Code("refactor/orig"),
    false,
);
const GENERATE_ORIG: Step = Step::new(
    TaskKind::GenerateFromDoc,
    "orig",
    Source::Doc("describe_code/orig"),
    false,
);
const GENERATE_RF: Step = Step::new(
    TaskKind::GenerateFromDoc,
    "rf",
    Source::Doc("describe_code/rf"),
    false,
);
const DESCRIBE_GC: Step = Step::new(
    TaskKind::DescribeCode,
    "gc",
    Source::Code("generate_from_doc/orig"),
    false,
);
const DESCRIBE_RF_GC: Step = Step::new(
    TaskKind::DescribeCode,
    "rf_gc",
    Source::Code("generate_from_doc/rf"),
    false,
);

pub const EVALUATE_CHAIN: &[Step] = &[Step::new(TaskKind::Evaluate, "orig", Source::Orig, true)];
pub const REFACTOR_PAIR_CHAIN: &[Step] = &[REFACTOR_ORIG, REFACTOR_RF];
pub const REFACTOR_ONLY_CHAIN: &[Step] = &[REFACTOR_ORIG];
pub const FULL_CHAIN: &[Step] = &[
    REFACTOR_ORIG,
    DESCRIBE_ORIG,
    REFACTOR_RF,
    DESCRIBE_RF,
    GENERATE_ORIG,
    GENERATE_RF,
    DESCRIBE_GC,
    DESCRIBE_RF_GC,
];
pub const STRATEGY_CHAIN: &[Step] = &[REFACTOR_ORIG, DESCRIBE_RF, GENERATE_RF, DESCRIBE_RF_GC];

/// Ordinals reserved per unit.
const STEP_STRIDE: u64 = 100;

#[derive(Debug, Clone)]
pub struct Unit {
    pub corpus: &'static str,
    pub sample: SourceSample,
    pub row: usize,
    pub chain: &'static [Step],
}

pub fn trial_id(corpus: &str, sample_id: &str, label: &str, step: &Step) -> String {
    format!("{corpus}/{sample_id}/{label}/{}", step.name())
}

/// Units in execution (and journal) order.
pub fn plan(
    spec: &ExperimentSpec,
    smelly: &[SourceSample],
    clean: &[SourceSample],
) -> Result<Vec<Unit>, ExperimentError> {
    let rows = spec.rows()?;
    let unit = |corpus, s: &SourceSample, row, chain| Unit {
        corpus,
        sample: s.clone(),
        row,
        chain,
    };
    let mut units = Vec::new();
    match spec.rq {
        1 => {
            units.extend(smelly.iter().map(|s| unit("smelly", s, 0, EVALUATE_CHAIN)));
            units.extend(clean.iter().map(|s| unit("clean", s, 0, EVALUATE_CHAIN)));
        }
        2 => units.extend(smelly.iter().map(|s| unit("smelly", s, 0, FULL_CHAIN))),
        3 => match spec.growth_baseline {
            GrowthBaseline::Refactored => units.extend(
                smelly
                    .iter()
                    .map(|s| unit("smelly", s, 0, REFACTOR_PAIR_CHAIN)),
            ),
            GrowthBaseline::CleanMean => {
                units.extend(
                    smelly
                        .iter()
                        .map(|s| unit("smelly", s, 0, REFACTOR_ONLY_CHAIN)),
                );
                units.extend(
                    clean
                        .iter()
                        .map(|s| unit("clean", s, 0, REFACTOR_ONLY_CHAIN)),
                );
            }
        },
        _ => {
            let chain = if spec.quality_chain {
                STRATEGY_CHAIN
            } else {
                REFACTOR_ONLY_CHAIN
            };
            for s in smelly {
                for row in 0..rows.len() {
                    units.push(unit("smelly", s, row, chain));
                }
            }
        }
    }
    Ok(units)
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub jobs: Option<usize>,
    /// Discard an existing journal instead of resuming from it.
    pub fresh: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub attempted: usize,
    pub reused: usize,
    pub errors: usize,
    pub total: usize,
    pub files: Vec<PathBuf>,
}

struct RunContext<'a> {
    rows: Vec<StrategyRow>,
    spec: &'a ExperimentSpec,
    gateway: &'a Gateway,
    templates: TemplateSet,
    resume: HashMap<String, TrialRecord>,
}

/// Run the experiment described by `spec` and write the journal, `run.json`
/// and reports into `spec.out_dir`.
pub fn run_experiment(
    spec: &ExperimentSpec,
    gateway: &Gateway,
    options: &RunOptions,
) -> Result<RunOutcome, ExperimentError> {
    spec.validate()?;
    let templates = match &spec.template_dir {
        Some(dir) => TemplateSet::load(
            dir,
            dir.file_name()
                .map_or("custom".into(), |n| n.to_string_lossy().into_owned()),
        )?,
        None => TemplateSet::builtin(),
    };
    let params = spec.params(templates.version())?;

    let load = |p: &Option<PathBuf>| -> Result<Vec<SourceSample>, ExperimentError> {
        match p {
            Some(p) => Ok(corpus::sample_corpus(
                &corpus::load_corpus(p)?,
                spec.sample_cap,
                spec.seed,
            )?),
            None => Ok(Vec::new()),
        }
    };
    let smelly = load(&spec.corpora.smelly)?;
    let clean = if spec.needs_clean() {
        load(&spec.corpora.clean)?
    } else {
        Vec::new()
    };
    let units = plan(spec, &smelly, &clean)?;

    let out_dir = &spec.out_dir;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let journal_path = out_dir.join(JOURNAL_FILE);
    let run_path = out_dir.join(RUN_FILE);
    if options.fresh {
        for f in [&journal_path, &run_path] {
            if f.exists() {
                fs::remove_file(f).map_err(io_err(f))?;
            }
        }
    } else if run_path.exists() {
        let previous = RunParams::load(out_dir)?;
        if previous != params {
            return Err(ExperimentError::Config(format!(
                "{} holds a different experiment; rerun with --fresh or another --out",
                out_dir.display()
            )));
        }
    }
    fs::write(&run_path, params.to_json()).map_err(io_err(&run_path))?;

    let previous = read_journal(&journal_path)?;
    let resume: HashMap<String, TrialRecord> = journal::latest_records(&previous)
        .into_iter()
        .filter(TrialRecord::is_ok)
        .map(|r| (r.trial_id.clone(), r))
        .collect();
    if !resume.is_empty() {
        log::info!("resuming: {} completed trials in journal", resume.len());
    }

    let ctx = RunContext {
        rows: params.rows.clone(),
        spec,
        gateway,
        templates,
        resume,
    };
    let jobs = options
        .jobs
        .or(spec.jobs)
        .unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()))
        .clamp(1, units.len().max(1));
    let mut writer = JournalWriter::open(&journal_path)?;
    let (attempted, reused) = execute(&ctx, &units, jobs, &mut writer)?;
    drop(writer);

    let latest = journal::latest_records(&read_journal(&journal_path)?);
    let errors = latest.iter().filter(|r| !r.is_ok()).count();
    log::info!(
        "{} trials run, {} reused, {} failing",
        attempted,
        reused,
        errors
    );
    if !latest.is_empty() && errors as f64 > spec.max_error_fraction * latest.len() as f64 {
        return Err(ExperimentError::TooManyErrors {
            errors,
            total: latest.len(),
            limit: spec.max_error_fraction * 100.0,
        });
    }

    let mut files = vec![journal_path, run_path];
    for report in build_reports(&params, &latest) {
        let path = out_dir.join(&report.name);
        fs::write(&path, &report.bytes).map_err(io_err(&path))?;
        files.push(path);
    }
    Ok(RunOutcome {
        attempted,
        reused,
        errors,
        total: latest.len(),
        files,
    })
}

/// Run all units on `jobs` workers; records reach the journal in unit
/// order regardless of completion order.
fn execute(
    ctx: &RunContext,
    units: &[Unit],
    jobs: usize,
    writer: &mut JournalWriter,
) -> Result<(usize, usize), ExperimentError> {
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, Vec<TrialRecord>, usize)>();
    thread::scope(|scope| {
        for _ in 0..jobs {
            let tx = tx.clone();
            let next = &next;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= units.len() {
                    break;
                }
                let (records, reused) = run_unit(ctx, i, &units[i]);
                if tx.send((i, records, reused)).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let mut pending = std::collections::BTreeMap::new();
        let mut cursor = 0;
        let (mut attempted, mut reused) = (0, 0);
        for (i, records, r) in rx {
            pending.insert(i, (records, r));
            while let Some((records, r)) = pending.remove(&cursor) {
                attempted += records.len();
                reused += r;
                writer.append(&records)?;
                cursor += 1;
            }
        }
        Ok((attempted, reused))
    })
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Execute one unit's chain. Returns new records and the number of steps
/// satisfied from the journal. Steps whose input is missing (because an
/// earlier step failed) are not attempted.
fn run_unit(ctx: &RunContext, index: usize, unit: &Unit) -> (Vec<TrialRecord>, usize) {
    let row = &ctx.rows[unit.row];
    let mut outputs: HashMap<String, String> = HashMap::new();
    let mut records = Vec::new();
    let mut reused = 0;

    for (si, step) in unit.chain.iter().enumerate() {
        let input = match step.source {
            Source::Orig => Some(unit.sample.code.as_str().to_string()),
            Source::Code(dep) => outputs.get(dep).map(|o| extract_code(o)),
            Source::Doc(dep) => outputs.get(dep).map(|o| o.trim().to_string()),
        };
        let Some(input) = input else {
            continue;
        };
        let id = trial_id(unit.corpus, &unit.sample.id, &row.label, step);
        let ordinal = index as u64 * STEP_STRIDE + si as u64;

        let mut sample = unit.sample.clone();
        match step.source {
            Source::Orig => {}
            Source::Code(_) => {
                sample.code = SourceText::java(input.clone());
                sample.label = SampleLabel::Refactored;
                sample.annotated_smells.clear();
            }
            Source::Doc(_) => {
                sample.code = SourceText::java("");
                sample.doc = input.clone();
                sample.label = SampleLabel::Generated;
                sample.annotated_smells.clear();
            }
        }
        let strategy = if step.row_strategy {
            row.strategy.clone()
        } else {
            PromptStrategy::Baseline
        };
        let findings: Vec<SmellFinding> = match step.source {
            Source::Doc(_) => Vec::new(),
            _ => smells::detect_source(&sample.code, &ctx.spec.detector)
                .map(|units| units.into_iter().flat_map(|(_, f)| f).collect())
                .unwrap_or_default(),
        };
        let smell_kinds: Vec<SmellKind> =
            if step.source == Source::Orig && step.task == TaskKind::Refactor {
                if sample.annotated_smells.is_empty() {
                    findings
                        .iter()
                        .map(|f| f.kind)
                        .collect::<BTreeSet<_>>()
                        .into_iter()
                        .collect()
                } else {
                    sample
                        .annotated_smells
                        .iter()
                        .copied()
                        .collect::<BTreeSet<_>>()
                        .into_iter()
                        .collect()
                }
            } else {
                Vec::new()
            };

        let mut record = TrialRecord {
            v: JOURNAL_VERSION,
            trial_id: id.clone(),
            ordinal,
            corpus: unit.corpus.to_string(),
            sample_id: unit.sample.id.clone(),
            label: row.label.clone(),
            task: step.task,
            variant: step.variant.to_string(),
            strategy_tags: Vec::new(),
            input_text: input.clone(),
            smell_kinds,
            fingerprint: String::new(),
            status: TrialStatus::Error,
            error: None,
            inference: None,
            complexity: None,
            derived: None,
            quality: None,
            ts: String::new(),
        };

        let bundle = match prompt::compose(&sample, step.task, &strategy, &findings, &ctx.templates)
        {
            Ok(b) => b,
            Err(e) => {
                record.error = Some(e.to_string());
                record.ts = now();
                records.push(record);
                continue;
            }
        };
        record.fingerprint = bundle.fingerprint();
        record.strategy_tags = bundle.strategy_tags.clone();

        if let Some(prev) = ctx.resume.get(&id) {
            if prev.fingerprint == record.fingerprint {
                if let Some(out) = prev.output_text() {
                    outputs.insert(step.name(), out.to_string());
                }
                reused += 1;
                continue;
            }
        }

        let meta = RequestMeta {
            sample_id: unit.sample.id.clone(),
            task: Some(step.task),
            tags: bundle.strategy_tags.clone(),
            label: row.label.clone(),
            variant: step.variant.to_string(),
            ordinal,
        };
        match ctx.gateway.complete(&bundle, &meta) {
            Ok(inference) => {
                let complexity = journal::input_complexity(step.task, &input);
                match DerivedMetrics::compute(&inference, complexity.as_ref(), ctx.spec.score_mode)
                {
                    Ok(derived) => {
                        record.status = TrialStatus::Ok;
                        record.derived = Some(derived);
                    }
                    Err(e) => record.error = Some(e.to_string()),
                }
                if step.task == TaskKind::Refactor {
                    record.quality = Some(TrialQuality::compute(
                        &input,
                        &extract_code(&inference.output_text),
                        ctx.spec.gate_metric,
                        ctx.spec.similarity_threshold,
                    ));
                }
                record.complexity = complexity;
                if record.is_ok() {
                    outputs.insert(step.name(), inference.output_text.clone());
                }
                record.inference = Some(inference);
            }
            Err(e) => {
                log::warn!("{id}: {e}");
                record.error = Some(e.to_string());
            }
        }
        record.ts = now();
        records.push(record);
    }
    (records, reused)
}
