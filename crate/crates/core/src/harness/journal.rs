//! Append-only JSONL journal of trial records.
//!
//! Every attempted trial is written as one line before any aggregation. A
//! line is only ever appended, flushed and synced; a torn final line left by
//! a crash is ignored on reload.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::metrics::{self, MetricError};
use super::ExperimentError;
use crate::complexity::{self, ComplexityProfile, ScoreMode};
use crate::gateway::InferenceRecord;
use crate::prompt::TaskKind;
use crate::similarity::{self, CodeBleuScore, CodeBleuWeights, DocSimScore};
use crate::smells::SmellKind;
use crate::syntax::SourceText;

pub const JOURNAL_VERSION: u32 = 1;
pub const JOURNAL_FILE: &str = "journal.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Ok,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedMetrics {
    pub tokens_per_second: f64,
    pub tokens_per_complexity: Option<f64>,
    pub tokens_per_line: Option<f64>,
    pub completion_per_complexity: Option<f64>,
    pub completion_per_line: Option<f64>,
}

impl DerivedMetrics {
    pub fn compute(
        inference: &InferenceRecord,
        complexity: Option<&ComplexityProfile>,
        mode: ScoreMode,
    ) -> Result<Self, MetricError> {
        let total =
            complexity.and_then(|p| metrics::normalize_count(inference.total_tokens, p, mode).ok());
        let completion = complexity
            .and_then(|p| metrics::normalize_count(inference.completion_tokens, p, mode).ok());
        Ok(Self {
            tokens_per_second: metrics::time_scaled_tokens(inference)?,
            tokens_per_complexity: total.map(|n| n.per_complexity),
            tokens_per_line: total.map(|n| n.per_line),
            completion_per_complexity: completion.map(|n| n.per_complexity),
            completion_per_line: completion.map(|n| n.per_line),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateMetric {
    #[default]
    Codebleu,
    CodeSimilarity,
    None,
}

/// Similarity of a refactoring's output code to its input code, and the
/// consistency-gate verdict derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialQuality {
    pub codebleu: Option<CodeBleuScore>,
    pub code_similarity: Option<DocSimScore>,
    pub gate_value: Option<f64>,
    /// Below the similarity threshold: kept in the journal, left out of
    /// headline aggregates.
    pub gated_out: bool,
}

impl TrialQuality {
    pub fn compute(input_code: &str, output_code: &str, gate: GateMetric, threshold: f64) -> Self {
        let input = SourceText::java(input_code);
        let output = SourceText::java(output_code);
        let codebleu = similarity::codebleu(&output, &input, CodeBleuWeights::default()).ok();
        let code_similarity = similarity::code_similarity(&output, &input).ok();
        let gate_value = match gate {
            GateMetric::Codebleu => codebleu.map(|s| s.combined),
            GateMetric::CodeSimilarity => code_similarity.map(|s| s.value),
            GateMetric::None => None,
        };
        let gated_out = match gate {
            GateMetric::None => false,
            _ => gate_value.is_none_or(|v| v < threshold),
        };
        Self {
            codebleu,
            code_similarity,
            gate_value,
            gated_out,
        }
    }
}

/// Code the model returned: the first fenced block, or the whole reply.
pub fn extract_code(output: &str) -> String {
    crate::gateway::first_code_block(output)
        .unwrap_or(output)
        .trim()
        .to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub v: u32,
    pub trial_id: String,
    pub ordinal: u64,
    pub corpus: String,
    pub sample_id: String,
    pub label: String,
    pub task: TaskKind,
    /// Artifact the prompt was built from: `orig`, `rf`, `gc` or `rf_gc`.
    pub variant: String,
    pub strategy_tags: Vec<String>,
    /// Code (or, for generation, the description) the prompt was built on.
    pub input_text: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub smell_kinds: Vec<SmellKind>,
    pub fingerprint: String,
    pub status: TrialStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inference: Option<InferenceRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complexity: Option<ComplexityProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derived: Option<DerivedMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality: Option<TrialQuality>,
    pub ts: String,
}

impl TrialRecord {
    pub fn is_ok(&self) -> bool {
        self.status == TrialStatus::Ok
    }

    pub fn step(&self) -> String {
        format!("{}/{}", self.task, self.variant)
    }

    pub fn output_text(&self) -> Option<&str> {
        self.inference.as_ref().map(|i| i.output_text.as_str())
    }

    pub fn gated_out(&self) -> bool {
        self.quality.is_some_and(|q| q.gated_out)
    }

    pub fn total_tokens(&self) -> Option<u64> {
        self.inference.as_ref().map(|i| i.total_tokens)
    }
}

/// Complexity profile of a trial's input, when the input is code.
pub fn input_complexity(task: TaskKind, input: &str) -> Option<ComplexityProfile> {
    match task {
        TaskKind::GenerateFromDoc => None,
        _ => complexity::analyze_source(&SourceText::java(input)).ok(),
    }
}

pub struct JournalWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl JournalWriter {
    /// Open for appending, creating the file if needed. A torn final line
    /// is truncated first so new lines start on a line boundary.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, ExperimentError> {
        let path = path.as_ref().to_path_buf();
        let io = |source| ExperimentError::Io {
            path: path.clone(),
            source,
        };
        if let Ok(text) = fs::read(&path) {
            if !text.is_empty() && !text.ends_with(b"\n") {
                let keep = text.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
                let f = OpenOptions::new().write(true).open(&path).map_err(io)?;
                f.set_len(keep as u64).map_err(io)?;
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io)?;
        Ok(Self {
            path,
            out: BufWriter::new(file),
        })
    }

    pub fn append(&mut self, records: &[TrialRecord]) -> Result<(), ExperimentError> {
        let io = |source| ExperimentError::Io {
            path: self.path.clone(),
            source,
        };
        for r in records {
            let line = serde_json::to_string(r).expect("trial record serializes");
            self.out.write_all(line.as_bytes()).map_err(io)?;
            self.out.write_all(b"\n").map_err(io)?;
        }
        self.out.flush().map_err(io)?;
        self.out.get_ref().sync_data().map_err(io)
    }
}

/// Every record in the journal, in file order. A final line without a
/// trailing newline that fails to parse is treated as torn and skipped.
pub fn read_journal(path: impl AsRef<Path>) -> Result<Vec<TrialRecord>, ExperimentError> {
    let path = path.as_ref();
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => {
            return Err(ExperimentError::Io {
                path: path.to_path_buf(),
                source,
            })
        }
    };
    let complete = text.ends_with('\n');
    let lines: Vec<&str> = text.lines().collect();
    let mut out = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let last = i + 1 == lines.len();
        match serde_json::from_str::<TrialRecord>(line) {
            Ok(r) if r.v == JOURNAL_VERSION => out.push(r),
            Ok(r) => {
                return Err(ExperimentError::Journal {
                    line: i + 1,
                    reason: format!("unsupported journal version {}", r.v),
                })
            }
            Err(_) if last && !complete => log::warn!("ignoring torn final journal line"),
            Err(e) => {
                return Err(ExperimentError::Journal {
                    line: i + 1,
                    reason: e.to_string(),
                })
            }
        }
    }
    Ok(out)
}

/// The latest record per trial id, ordered by ordinal.
pub fn latest_records(records: &[TrialRecord]) -> Vec<TrialRecord> {
    let mut by_id: BTreeMap<&str, &TrialRecord> = BTreeMap::new();
    for r in records {
        by_id.insert(&r.trial_id, r);
    }
    let mut out: Vec<TrialRecord> = by_id.into_values().cloned().collect();
    out.sort_by(|a, b| {
        a.ordinal
            .cmp(&b.ordinal)
            .then_with(|| a.trial_id.cmp(&b.trial_id))
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, ordinal: u64, status: TrialStatus) -> TrialRecord {
        TrialRecord {
            v: JOURNAL_VERSION,
            trial_id: id.into(),
            ordinal,
            corpus: "smelly".into(),
            sample_id: "s".into(),
            label: "Base".into(),
            task: TaskKind::Evaluate,
            variant: "orig".into(),
            strategy_tags: vec!["baseline".into()],
            input_text: "x();".into(),
            smell_kinds: vec![],
            fingerprint: "f".into(),
            status,
            error: None,
            inference: None,
            complexity: None,
            derived: None,
            quality: None,
            ts: "t".into(),
        }
    }

    #[test]
    fn torn_tail_is_ignored_and_truncated() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(JOURNAL_FILE);
        let mut w = JournalWriter::open(&path).unwrap();
        w.append(&[record("a", 0, TrialStatus::Ok)]).unwrap();
        drop(w);
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"{\"v\":1,\"trial_id\":\"b\"").unwrap();
        drop(f);
        assert_eq!(read_journal(&path).unwrap().len(), 1);
        let mut w = JournalWriter::open(&path).unwrap();
        w.append(&[record("b", 1, TrialStatus::Error)]).unwrap();
        let back = read_journal(&path).unwrap();
        assert_eq!(
            back.iter().map(|r| r.trial_id.as_str()).collect::<Vec<_>>(),
            ["a", "b"]
        );
    }

    #[test]
    fn corrupt_middle_line_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(JOURNAL_FILE);
        let good = serde_json::to_string(&record("a", 0, TrialStatus::Ok)).unwrap();
        fs::write(&path, format!("{good}\nnot json\n{good}\n")).unwrap();
        assert!(matches!(
            read_journal(&path),
            Err(ExperimentError::Journal { line: 2, .. })
        ));
    }

    #[test]
    fn latest_record_wins() {
        let recs = vec![
            record("b", 1, TrialStatus::Error),
            record("a", 0, TrialStatus::Ok),
            record("b", 1, TrialStatus::Ok),
        ];
        let latest = latest_records(&recs);
        assert_eq!(latest.len(), 2);
        assert_eq!(latest[0].trial_id, "a");
        assert!(latest[1].is_ok());
    }

    #[test]
    fn extract_code_prefers_fence() {
        assert_eq!(extract_code("Here:\n```java\nint x;\n```\nDone"), "int x;");
        assert_eq!(extract_code("  int y;  "), "int y;");
    }

    #[test]
    fn gate_flags_low_similarity() {
        let same = TrialQuality::compute(
            "int f(int a){return a+1;}",
            "int f(int a){return a+1;}",
            GateMetric::Codebleu,
            0.7,
        );
        assert!(!same.gated_out);
        assert!((same.gate_value.unwrap() - 1.0).abs() < 1e-12);
        let far = TrialQuality::compute(
            "int f(int a){return a+1;}",
            "void g(){ while(true){} }",
            GateMetric::Codebleu,
            0.7,
        );
        assert!(far.gated_out);
        let off = TrialQuality::compute("a();", "b();", GateMetric::None, 0.7);
        assert!(!off.gated_out && off.gate_value.is_none());
    }
}
